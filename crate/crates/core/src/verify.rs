//! Finite-size checks of the quasirandomness properties, rate sweeps over
//! growing samples, and community/anticommunity classification.
//!
//! Every asymptotic clause becomes a threshold on a reported metric; all
//! thresholds live in [`Thresholds`] and are echoed in each verdict.

use crate::clustering::{
    adjacency_representatives_from, k_variance_of, match_partitions, modularity_representatives_from, KMeansParams,
};
use crate::discrepancy::{
    converse_inverse, degree_bounds, min_k_discrepancy, partition_discrepancy_exact, partition_discrepancy_heuristic,
    spectral_bounds_from, stirling2, HeuristicParams, MinKMode, DEFAULT_CAP,
};
use crate::error::{Error, Result};
use crate::generator::{sample, SampleSpec};
use crate::graph::{Partition, WeightedGraph};
use crate::model::ModelGraph;
use crate::numerics::{derive_seed, eigh, ols_slope, EigenSystem, Matrix};
use crate::par;
use crate::spectra::{normalized_modularity_matrix, structural_eigs, SpectralParams, StructuralMode};
use crate::subgraph::{cluster_degrees, codegree_report, hom_density, SimpleGraphPattern};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "PI")]
    PI,
    #[serde(rename = "PI_plus")]
    PIPlus,
    #[serde(rename = "PII")]
    PII,
    #[serde(rename = "PIII")]
    PIII,
    #[serde(rename = "PIV")]
    PIV,
    #[serde(rename = "P0_proxy")]
    P0Proxy,
}

impl Property {
    pub const ALL: [Property; 6] =
        [Property::PI, Property::PIPlus, Property::PII, Property::PIII, Property::PIV, Property::P0Proxy];

    pub fn name(self) -> &'static str {
        match self {
            Property::PI => "PI",
            Property::PIPlus => "PI_plus",
            Property::PII => "PII",
            Property::PIII => "PIII",
            Property::PIV => "PIV",
            Property::P0Proxy => "P0_proxy",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        Property::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(t) || (t.eq_ignore_ascii_case("PI+") && *p == Property::PIPlus))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown property '{t}'")))
    }
}

/// Operating points for the finite-size checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// PI: largest non-structural `|lambda| / n`.
    pub nonstructural_ratio: f64,
    /// PI: `S_k^2 <= kvariance_factor / n`.
    pub kvariance_factor: f64,
    /// PI+: largest non-structural `|lambda| / sqrt(n)`.
    pub nonstructural_sqrt_ratio: f64,
    /// PI+: `max |d(U_i,U_j) - p_ij|`.
    pub density_deviation: f64,
    /// PII: modularity structural threshold.
    pub delta: f64,
    /// PII: degree band `c n <= d_v <= C n`.
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    /// PII and the degree-ratio estimate: tolerated fraction of vertices
    /// outside the band.
    pub exception_fraction: f64,
    /// PII: weighted k-variance.
    pub weighted_kvariance: f64,
    /// PIII: lower bounds on `md_j`, `j < k`, must exceed this.
    pub theta: f64,
    /// PIII: `md(G; U_1..U_k)` must not exceed this.
    pub md_max: f64,
    /// PIV: `n^3`-normalized codegree deviation.
    pub piv: f64,
    /// P0 proxy: homomorphism density tolerance.
    pub hom_tol: f64,
    /// Adjacency structural threshold multiplier.
    pub c_thr: f64,
    /// Rate sweeps: tolerated excess of the fitted slope over the target.
    pub slope_band: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            nonstructural_ratio: 0.1,
            kvariance_factor: 10.0,
            nonstructural_sqrt_ratio: 1.5,
            density_deviation: 0.03,
            delta: 0.5,
            c: 0.1,
            big_c: 0.9,
            exception_fraction: 0.05,
            weighted_kvariance: 0.05,
            theta: 0.05,
            md_max: 0.15,
            piv: 0.01,
            hom_tol: 0.05,
            c_thr: 1.0,
            slope_band: 0.2,
        }
    }
}

impl Thresholds {
    pub fn spectral(&self) -> SpectralParams {
        SpectralParams { delta: self.delta, c_thr: self.c_thr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyVerdict {
    pub property: Property,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl PropertyVerdict {
    fn new(property: Property) -> Self {
        PropertyVerdict { property, pass: false, metrics: BTreeMap::new(), thresholds: BTreeMap::new(), notes: Vec::new() }
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.to_string(), v);
    }

    fn threshold(&mut self, name: &str, v: f64) {
        self.thresholds.insert(name.to_string(), v);
    }
}

/// Spectral decompositions shared by the checks on one graph.
#[derive(Debug, Clone)]
pub struct Analysis<'a> {
    pub graph: &'a WeightedGraph,
    pub adjacency: EigenSystem,
    pub modularity: EigenSystem,
    pub kmeans: KMeansParams,
    pub seed: u64,
}

impl<'a> Analysis<'a> {
    pub fn new(graph: &'a WeightedGraph, seed: u64) -> Result<Self> {
        let modularity = eigh(&normalized_modularity_matrix(graph)?)?;
        let adjacency = eigh(&graph.adjacency())?;
        Ok(Analysis { graph, adjacency, modularity, kmeans: KMeansParams::default(), seed })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// `|mu_i|`, 1-based; zero past the end.
    pub fn mu_abs(&self, i: usize) -> f64 {
        self.modularity.values.get(i.wrapping_sub(1)).map_or(0.0, |v| v.abs())
    }

    /// Plain `S_k^2` and its partition.
    pub fn plain_variance(&self, k: usize) -> Result<(f64, Partition)> {
        let e = adjacency_representatives_from(&self.adjacency, k)?;
        let r = k_variance_of(&e, k, &self.kmeans, self.seed)?;
        Ok((r.value, r.partition))
    }

    /// Weighted `S~_k^2` and its partition (zero and the trivial partition for `k = 1`).
    pub fn weighted_variance(&self, k: usize) -> Result<(f64, Partition)> {
        if k == 1 {
            return Ok((0.0, Partition::trivial(self.n())));
        }
        let e = modularity_representatives_from(self.graph, &self.modularity, k)?;
        let r = k_variance_of(&e, k, &self.kmeans, self.seed)?;
        Ok((r.value, r.partition))
    }

    /// Leading modularity eigenvectors, used to seed local search.
    fn hints(&self, k: usize) -> Vec<Vec<f64>> {
        (0..k.max(1).min(self.n())).map(|i| self.modularity.vector(i)).collect()
    }
}

/// `min` over label permutations of `max_ij |densities_ij - p_{pi(i) pi(j)}|`.
pub fn density_deviation(densities: &[Vec<f64>], p: &Matrix) -> f64 {
    let k = densities.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    fn rec(pos: usize, perm: &mut [usize], d: &[Vec<f64>], p: &Matrix, best: &mut f64) {
        let k = perm.len();
        if pos == k {
            let mut worst: f64 = 0.0;
            for i in 0..k {
                for j in 0..k {
                    worst = worst.max((d[i][j] - p[(perm[i], perm[j])]).abs());
                }
            }
            *best = best.min(worst);
            return;
        }
        for t in pos..k {
            perm.swap(pos, t);
            rec(pos + 1, perm, d, p, best);
            perm.swap(pos, t);
        }
    }
    rec(0, &mut perm, densities, p, &mut best);
    best
}

fn pi_core(an: &Analysis, k: usize, th: &Thresholds, v: &mut PropertyVerdict) -> Result<(bool, Partition, f64)> {
    let n = an.n() as f64;
    let (count, _) = structural_eigs(&an.adjacency.values, StructuralMode::Adjacency, an.n(), &th.spectral());
    v.metric("structural_count_adj", count as f64);
    for i in 0..k.min(an.n()) {
        v.metric(&format!("q_{}", i + 1), an.adjacency.values[i] / n);
    }
    let rest = an.adjacency.values.get(k).map_or(0.0, |x| x.abs());
    v.metric("max_nonstructural_over_n", rest / n);
    let (s_k, partition) = an.plain_variance(k)?;
    v.metric("s_k_sq", s_k);
    for (i, r) in partition.ratios().iter().enumerate() {
        v.metric(&format!("cluster_ratio_{}", i + 1), *r);
    }
    v.threshold("nonstructural_ratio", th.nonstructural_ratio);
    v.threshold("s_k_sq_max", th.kvariance_factor / n);
    v.threshold("adjacency_threshold", th.spectral().adjacency_threshold(an.n()));
    let pass = count == k && rest / n <= th.nonstructural_ratio && s_k <= th.kvariance_factor / n;
    Ok((pass, partition, rest))
}

/// Structural adjacency eigenvalues of order `n`, the rest `o(n)`, and
/// small plain k-variance.
pub fn check_pi(an: &Analysis, k: usize, th: &Thresholds) -> Result<PropertyVerdict> {
    let mut v = PropertyVerdict::new(Property::PI);
    v.pass = pi_core(an, k, th, &mut v)?.0;
    Ok(v)
}

/// PI with `o(sqrt n)` remaining eigenvalues and block densities matching `P`.
pub fn check_pi_plus(an: &Analysis, k: usize, model: &ModelGraph, th: &Thresholds) -> Result<PropertyVerdict> {
    if model.k() != k {
        return Err(Error::InvalidArgument(format!("model has {} classes, k = {k}", model.k())));
    }
    let mut v = PropertyVerdict::new(Property::PIPlus);
    let (pi_pass, partition, rest) = pi_core(an, k, th, &mut v)?;
    let n = an.n() as f64;
    let sqrt_ratio = rest / n.sqrt();
    v.metric("max_nonstructural_over_sqrt_n", sqrt_ratio);
    let s_k = v.metrics["s_k_sq"];
    v.metric("s_k_sq_times_n", s_k * n);
    let dens = cluster_degrees(an.graph, &partition)?.densities;
    let dev = density_deviation(&dens, model.p_matrix());
    v.metric("max_density_deviation", dev);
    v.threshold("nonstructural_sqrt_ratio", th.nonstructural_sqrt_ratio);
    v.threshold("s_k_sq_times_n_max", th.kvariance_factor);
    v.threshold("density_deviation", th.density_deviation);
    v.pass = pi_pass && sqrt_ratio <= th.nonstructural_sqrt_ratio && s_k * n <= th.kvariance_factor && dev <= th.density_deviation;
    Ok(v)
}

/// No dominant vertices, `k - 1` structural modularity eigenvalues above
/// `delta`, small weighted k-variance.
pub fn check_pii(an: &Analysis, k: usize, th: &Thresholds) -> Result<PropertyVerdict> {
    let mut v = PropertyVerdict::new(Property::PII);
    let n = an.n() as f64;
    let outside = (0..an.n()).filter(|&u| {
        let r = an.graph.degree(u) / n;
        r < th.c || r > th.big_c
    });
    let frac = outside.count() as f64 / n;
    v.metric("degree_exception_fraction", frac);
    let (count, _) = structural_eigs(&an.modularity.values, StructuralMode::Modularity, an.n(), &th.spectral());
    v.metric("structural_count_mod", count as f64);
    v.metric("max_remaining_mu", an.mu_abs(k));
    for i in 1..k {
        v.metric(&format!("mu_{i}"), an.modularity.values.get(i - 1).copied().unwrap_or(0.0));
    }
    let (s_tilde, partition) = an.weighted_variance(k)?;
    v.metric("weighted_s_k_sq", s_tilde);
    for (i, r) in partition.ratios().iter().enumerate() {
        v.metric(&format!("cluster_ratio_{}", i + 1), *r);
    }
    v.threshold("c", th.c);
    v.threshold("C", th.big_c);
    v.threshold("exception_fraction", th.exception_fraction);
    v.threshold("delta", th.delta);
    v.threshold("weighted_kvariance", th.weighted_kvariance);
    v.pass = frac <= th.exception_fraction && count + 1 == k && s_tilde <= th.weighted_kvariance;
    Ok(v)
}

/// `md_j` bounded away from zero for `j < k` and `md(G; p)` small.
///
/// Lower bounds on `md_j` combine the spectral converse bound, exact
/// enumeration when affordable, and (for `j = 1`, whose partition is
/// unique) any witnessed subset pair.
pub fn check_piii(an: &Analysis, p: &Partition, th: &Thresholds, budget: f64) -> Result<PropertyVerdict> {
    let mut v = PropertyVerdict::new(Property::PIII);
    let k = p.k();
    let g = an.graph;
    let hints = HeuristicParams { hints: an.hints(k), ..HeuristicParams::default() };
    let (md, exact) = match partition_discrepancy_exact(g, p, DEFAULT_CAP) {
        Ok(r) => (r.value, true),
        Err(Error::CapExceeded { .. }) => (partition_discrepancy_heuristic(g, p, an.seed, &hints)?.value, false),
        Err(e) => return Err(e),
    };
    v.metric("md_partition", md);
    v.notes.push(if exact {
        "md_partition is exact".to_string()
    } else {
        "md_partition is a local-search value (a lower estimate of the exact maximum)".to_string()
    });
    let mut all_above = true;
    let js: Vec<usize> = if k == 1 { vec![1] } else { (1..k).collect() };
    for j in js {
        let spectral = converse_inverse(an.mu_abs(j), j);
        let mut lower = spectral.unwrap_or(0.0);
        if spectral.is_none() {
            v.notes.push(format!("converse bound for md_{j} not applicable"));
        }
        v.metric(&format!("md_{j}_converse_lower"), spectral.unwrap_or(f64::NAN));
        if stirling2(g.n(), j) <= budget && g.n() <= DEFAULT_CAP / 2 {
            if let Ok(r) = min_k_discrepancy(g, j, MinKMode::Exact, budget, DEFAULT_CAP, an.seed) {
                v.metric(&format!("md_{j}_exact"), r.value);
                lower = lower.max(r.value);
            }
        } else if j == 1 {
            let trivial = Partition::trivial(g.n());
            let w = partition_discrepancy_heuristic(g, &trivial, an.seed, &hints)?.value;
            v.metric("md_1_witness", w);
            lower = lower.max(w);
        }
        v.metric(&format!("md_{j}_lower"), lower);
        if k > 1 && lower <= th.theta {
            all_above = false;
        }
    }
    if k == 1 {
        v.notes.push("k = 1: the theta clause is vacuous".to_string());
    }
    v.threshold("theta", th.theta);
    v.threshold("md_max", th.md_max);
    v.pass = all_above && md <= th.md_max;
    Ok(v)
}

/// Codegree concentration against `p_hat`, or observed densities.
pub fn check_piv(an: &Analysis, p: &Partition, p_hat: Option<&Matrix>, th: &Thresholds) -> Result<PropertyVerdict> {
    check_piv_graph(an.graph, p, p_hat, th)
}

/// [`check_piv`] without spectral data.
pub fn check_piv_graph(g: &WeightedGraph, p: &Partition, p_hat: Option<&Matrix>, th: &Thresholds) -> Result<PropertyVerdict> {
    let mut v = PropertyVerdict::new(Property::PIV);
    let r = codegree_report(g, p, p_hat)?;
    v.metric("max_normalized_n3", r.max_normalized);
    v.metric("max_relative", r.max_relative.unwrap_or(f64::NAN));
    v.notes.push(format!("reference probabilities: {:?}", r.source).to_lowercase());
    v.threshold("piv", th.piv);
    v.pass = r.max_normalized <= th.piv;
    Ok(v)
}

/// Finite proxy for graphon convergence: small-pattern densities match the
/// model, and PI and PIV hold.
pub fn check_p0_proxy(an: &Analysis, model: &ModelGraph, th: &Thresholds) -> Result<PropertyVerdict> {
    let mut v = PropertyVerdict::new(Property::P0Proxy);
    let k = model.k();
    let mut hom_ok = true;
    for name in ["C3", "C4", "K3", "P3"] {
        let f = SimpleGraphPattern::parse(name)?;
        let d = (hom_density(&f, an.graph)? - model.hom_density(&f)?).abs();
        v.metric(&format!("hom_deviation_{name}"), d);
        hom_ok &= d <= th.hom_tol;
    }
    let pi = check_pi(an, k, th)?;
    let (_, partition) = an.plain_variance(k)?;
    let piv = check_piv(an, &partition, None, th)?;
    v.metric("pi_pass", f64::from(u8::from(pi.pass)));
    v.metric("piv_pass", f64::from(u8::from(piv.pass)));
    v.threshold("hom_tol", th.hom_tol);
    v.notes.push("proxy: graphon convergence has no finite test".to_string());
    v.pass = hom_ok && pi.pass && piv.pass;
    Ok(v)
}

/// Heuristic `md(G; p)` against the spectral upper bound, with `p` the
/// weighted-variance partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundAudit {
    pub md: f64,
    pub upper: f64,
    pub slack: f64,
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub weighted_variance: f64,
    pub mu_k: f64,
    pub pass: bool,
}

pub fn variance_bound_audit(an: &Analysis, k: usize, th: &Thresholds) -> Result<BoundAudit> {
    let (_, p) = an.weighted_variance(k)?;
    let b = spectral_bounds_from(an.graph, &an.modularity, k, &p, th.exception_fraction)?;
    let hints = HeuristicParams { hints: an.hints(k), ..HeuristicParams::default() };
    let md = match partition_discrepancy_exact(an.graph, &p, DEFAULT_CAP) {
        Ok(r) => r.value,
        Err(Error::CapExceeded { .. }) => partition_discrepancy_heuristic(an.graph, &p, an.seed, &hints)?.value,
        Err(e) => return Err(e),
    };
    Ok(BoundAudit {
        md,
        upper: b.upper,
        slack: b.upper - md,
        c: b.degrees.c,
        big_c: b.degrees.big_c,
        weighted_variance: b.weighted_variance,
        mu_k: b.mu_k,
        pass: md <= b.upper,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Community,
    Anticommunity,
    Mixed,
}

/// Sign pattern of the `k - 1` structural modularity eigenvalues.
pub fn classify_structure(mu: &[f64], k: usize, delta: f64) -> Result<Structure> {
    if k < 2 {
        return Err(Error::InvalidArgument("classification needs k >= 2".into()));
    }
    let structural: Vec<f64> = mu.iter().copied().filter(|m| m.abs() > delta).collect();
    if structural.len() != k - 1 {
        return Err(Error::NoStructure { found: structural.len(), expected: k - 1 });
    }
    Ok(if structural.iter().all(|&m| m > 0.0) {
        Structure::Community
    } else if structural.iter().all(|&m| m < 0.0) {
        Structure::Anticommunity
    } else {
        Structure::Mixed
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMetric {
    /// Largest non-structural adjacency eigenvalue over `sqrt(n)`.
    NonstructuralAdjacency,
    /// `|mu_k|`, the first non-structural modularity eigenvalue.
    MuK,
    /// `S_k^2`.
    PlainKvariance,
    /// `S~_k^2`.
    WeightedKvariance,
    /// Local-search `md(G; planted)`.
    MdPlanted,
    /// `n^3`-normalized codegree deviation on the planted partition.
    PivStatistic,
}

impl RateMetric {
    pub const ALL: [RateMetric; 6] = [
        RateMetric::NonstructuralAdjacency,
        RateMetric::MuK,
        RateMetric::PlainKvariance,
        RateMetric::WeightedKvariance,
        RateMetric::MdPlanted,
        RateMetric::PivStatistic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RateMetric::NonstructuralAdjacency => "nonstructural_adjacency",
            RateMetric::MuK => "mu_k",
            RateMetric::PlainKvariance => "plain_kvariance",
            RateMetric::WeightedKvariance => "weighted_kvariance",
            RateMetric::MdPlanted => "md_planted",
            RateMetric::PivStatistic => "piv_statistic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        RateMetric::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric '{s}'")))
    }

    /// Expected log-log slope in `n`.
    pub fn target_exponent(self) -> f64 {
        match self {
            RateMetric::NonstructuralAdjacency => 0.0,
            RateMetric::MuK | RateMetric::MdPlanted | RateMetric::PivStatistic => -0.5,
            RateMetric::PlainKvariance | RateMetric::WeightedKvariance => -1.0,
        }
    }

    fn needs_spectrum(self) -> bool {
        !matches!(self, RateMetric::PivStatistic)
    }
}

/// One metric on a fresh sample of size `n` with proportional fixed sizes.
pub fn sweep_cell(model: &ModelGraph, n: usize, seed: u64, metric: RateMetric) -> Result<f64> {
    let sizes = model.proportional_sizes(n)?;
    let s = sample(&SampleSpec::fixed(model.clone(), sizes, seed))?;
    let k = model.k();
    if !metric.needs_spectrum() {
        return Ok(codegree_report(&s.graph, &s.partition, Some(model.p_matrix()))?.max_normalized);
    }
    let an = Analysis::new(&s.graph, seed)?;
    Ok(match metric {
        RateMetric::NonstructuralAdjacency => an.adjacency.values.get(k).map_or(0.0, |x| x.abs()) / (n as f64).sqrt(),
        RateMetric::MuK => an.mu_abs(k),
        RateMetric::PlainKvariance => an.plain_variance(k)?.0,
        RateMetric::WeightedKvariance => an.weighted_variance(k)?.0,
        RateMetric::MdPlanted => {
            let hints = HeuristicParams { hints: an.hints(k), ..HeuristicParams::default() };
            partition_discrepancy_heuristic(&s.graph, &s.partition, seed, &hints)?.value
        }
        RateMetric::PivStatistic => unreachable!("handled above"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub seed: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub metric: RateMetric,
    pub rows: Vec<RateRow>,
    pub sizes: Vec<usize>,
    pub means: Vec<f64>,
    /// Least-squares slope of `ln mean` against `ln n`.
    pub slope: f64,
    pub target: f64,
    pub band: f64,
    /// `slope <= target + band`.
    pub within_band: bool,
    pub decreasing: bool,
}

/// Sample seeds for sweep cell `(n, seed)`.
pub fn sweep_seed(n: usize, seed: u64) -> u64 {
    derive_seed(seed, n as u64)
}

pub fn rate_sweep(model: &ModelGraph, sizes: &[usize], seeds: &[u64], metric: RateMetric, band: f64) -> Result<RateReport> {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::InvalidArgument("a rate sweep needs at least 3 distinct sizes".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("a rate sweep needs at least one seed".into()));
    }
    let grid: Vec<(usize, u64)> = sizes.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let values = par::map_slice(&grid, |&(n, s)| sweep_cell(model, n, sweep_seed(n, s), metric));
    let mut rows = Vec::with_capacity(grid.len());
    for (&(n, seed), v) in grid.iter().zip(values) {
        rows.push(RateRow { n, seed, value: v? });
    }
    let means: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let vals: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.value).collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        })
        .collect();
    let lx: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = means.iter().map(|m| m.max(f64::MIN_POSITIVE).ln()).collect();
    let slope = ols_slope(&lx, &ly);
    let target = metric.target_exponent();
    Ok(RateReport {
        metric,
        rows,
        decreasing: means.windows(2).all(|w| w[1] < w[0]),
        sizes,
        means,
        slope,
        target,
        band,
        within_band: slope <= target + band,
    })
}

/// Degree range estimate used by the bound audit, re-exported for reports.
pub fn degree_range(g: &WeightedGraph, th: &Thresholds) -> (f64, f64) {
    let b = degree_bounds(g, th.exception_fraction);
    (b.c, b.big_c)
}

/// Accuracy of `found` against `planted`.
pub fn recovery_accuracy(found: &Partition, planted: &Partition) -> Result<f64> {
    Ok(match_partitions(found, planted)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::SampleSpec;

    fn standard() -> ModelGraph {
        ModelGraph::from_rows(vec![0.5, 0.5], &[vec![0.8, 0.1], vec![0.1, 0.7]]).unwrap()
    }

    fn er(n: usize, p: f64, seed: u64) -> WeightedGraph {
        let h = ModelGraph::from_rows(vec![1.0], &[vec![p]]).unwrap();
        sample(&SampleSpec::multinomial(h, n, seed)).unwrap().graph
    }

    #[test]
    fn property_names_round_trip() {
        for p in Property::ALL {
            assert_eq!(Property::parse(p.name()).unwrap(), p);
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{}\"", p.name()));
        }
        assert_eq!(Property::parse("PI+").unwrap(), Property::PIPlus);
        assert!(Property::parse("PV").is_err());
    }

    #[test]
    fn thresholds_json_defaults() {
        let t: Thresholds = serde_json::from_str(r#"{"theta": 0.2}"#).unwrap();
        assert_eq!(t.theta, 0.2);
        assert_eq!(t.piv, 0.01);
    }

    #[test]
    fn classification() {
        assert_eq!(classify_structure(&[0.76, 0.1, 0.0], 2, 0.5).unwrap(), Structure::Community);
        assert_eq!(classify_structure(&[-0.77, 0.1], 2, 0.5).unwrap(), Structure::Anticommunity);
        assert_eq!(classify_structure(&[0.8, -0.7, 0.1], 3, 0.5).unwrap(), Structure::Mixed);
        let e = classify_structure(&[-1.0 / 3.0; 3], 2, 0.5).unwrap_err();
        assert_eq!(e, Error::NoStructure { found: 0, expected: 1 });
        let g = WeightedGraph::complete_bipartite(2, 2);
        let k22 = Analysis::new(&g, 0).unwrap();
        assert_eq!(classify_structure(&k22.modularity.values, 2, 0.5).unwrap(), Structure::Anticommunity);
    }

    #[test]
    fn erdos_renyi_fails_pi_with_two_classes() {
        let g = er(300, 0.5, 1);
        let an = Analysis::new(&g, 0).unwrap();
        let v = check_pi(&an, 2, &Thresholds::default()).unwrap();
        assert!(!v.pass);
        assert_eq!(v.metrics["structural_count_adj"], 1.0);
    }

    #[test]
    fn blow_up_passes_pi() {
        let h = standard();
        let g = h.blow_up_graph(&[60, 60]).unwrap();
        let an = Analysis::new(&g, 0).unwrap();
        let th = Thresholds::default();
        let v = check_pi(&an, 2, &th).unwrap();
        assert!(v.pass, "{v:?}");
        assert!(v.metrics["s_k_sq"] <= 1e-12);
        let plus = check_pi_plus(&an, 2, &h, &th).unwrap();
        assert!(plus.metrics["max_density_deviation"] <= 1.0 / 60.0);
        let piv = check_piv(&an, &Partition::from_sizes(&[60, 60]).unwrap(), Some(h.p_matrix()), &th).unwrap();
        // only the missing diagonal separates codegrees from p_ij^2 n_j
        let n = 120f64;
        let mut expect: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let target = h.p(i, j).powi(2) * 60.0;
                // ordered pairs (u, v) in U_i: u = v, or u != v
                let (same, other) =
                    if i == j { (h.p(i, j).powi(2) * 59.0, h.p(i, j).powi(2) * 58.0) } else { (target, target) };
                let dev = 60.0 * (same - target).abs() + 60.0 * 59.0 * (other - target).abs();
                expect = expect.max(dev / n.powi(3));
            }
        }
        assert!((piv.metrics["max_normalized_n3"] - expect).abs() < 1e-12);
    }

    #[test]
    fn mismatched_model_fails_pi_plus() {
        let h = standard();
        let other = ModelGraph::from_rows(vec![0.5, 0.5], &[vec![0.8, 0.3], vec![0.3, 0.7]]).unwrap();
        let s = sample(&SampleSpec::fixed(other, vec![150, 150], 4)).unwrap();
        let an = Analysis::new(&s.graph, 0).unwrap();
        let v = check_pi_plus(&an, 2, &h, &Thresholds::default()).unwrap();
        assert!(!v.pass);
        assert!(v.metrics["max_density_deviation"] > 0.1);
    }

    #[test]
    fn star_and_complete_fail_pii() {
        let th = Thresholds::default();
        let star = WeightedGraph::star(30);
        let v = check_pii(&Analysis::new(&star, 0).unwrap(), 2, &th).unwrap();
        assert!(!v.pass);
        assert!(v.metrics["degree_exception_fraction"] > 0.5);
        let k = WeightedGraph::complete(12);
        let v = check_pii(&Analysis::new(&k, 0).unwrap(), 2, &th).unwrap();
        assert!(!v.pass);
        assert_eq!(v.metrics["structural_count_mod"], 0.0);
    }

    #[test]
    fn bipartite_piii() {
        let g = WeightedGraph::complete_bipartite(2, 2);
        let an = Analysis::new(&g, 0).unwrap();
        let th = Thresholds { theta: 0.1, ..Thresholds::default() };
        let v = check_piii(&an, &Partition::from_sizes(&[2, 2]).unwrap(), &th, 1e6).unwrap();
        assert!(v.metrics["md_partition"].abs() < 1e-12);
        assert!(v.metrics["md_1_exact"] > 0.1);
        assert!(v.pass);
        let one = check_piii(&an, &Partition::trivial(4), &th, 1e6).unwrap();
        assert!(one.notes.iter().any(|n| n.contains("vacuous")));
    }

    #[test]
    fn complete_graph_piv() {
        let th = Thresholds::default();
        let one = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let small = check_piv_graph(&WeightedGraph::complete(15), &Partition::trivial(15), Some(&one), &th).unwrap();
        let big = check_piv_graph(&WeightedGraph::complete(300), &Partition::trivial(300), Some(&one), &th).unwrap();
        let n = 300f64;
        assert!((big.metrics["max_normalized_n3"] - (2.0 * n * (n - 1.0) + n) / n.powi(3)).abs() < 1e-15);
        assert!(big.pass);
        assert!(!small.pass);
        let bip = WeightedGraph::complete_bipartite(20, 20);
        let v = check_piv_graph(&bip, &Partition::trivial(40), None, &th).unwrap();
        assert!(!v.pass);
    }

    #[test]
    fn sweep_needs_three_sizes() {
        assert!(rate_sweep(&standard(), &[100, 200], &[0], RateMetric::PivStatistic, 0.2).is_err());
        assert!(rate_sweep(&standard(), &[100, 200, 300], &[], RateMetric::PivStatistic, 0.2).is_err());
    }

    #[test]
    fn piv_sweep_decreases() {
        let r = rate_sweep(&standard(), &[100, 200, 400], &[0, 1, 2], RateMetric::PivStatistic, 0.2).unwrap();
        assert_eq!(r.rows.len(), 9);
        assert!(r.decreasing, "{:?}", r.means);
        assert!(r.within_band, "slope {}", r.slope);
    }

    #[test]
    fn density_deviation_uses_best_labelling() {
        let p = Matrix::from_rows(&[vec![0.8, 0.1], vec![0.1, 0.7]]).unwrap();
        let d = vec![vec![0.7, 0.1], vec![0.1, 0.8]];
        assert!(density_deviation(&d, &p).abs() < 1e-15);
    }
}
