//! Multiway discrepancy: exact enumeration, a local-search lower bound,
//! minimum k-way discrepancy, spectral bounds and jumbledness checks.

use crate::clustering::{centers_and_objective, modularity_representatives_from};
use crate::error::{Error, Result};
use crate::graph::{Partition, VertexSet, WeightedGraph};
use crate::numerics::{derive_seed, eigh, seeded_rng, EigenSystem, RandomStream};
use crate::par;
use crate::spectra::normalized_modularity_matrix;
use serde::{Deserialize, Serialize};

/// Default bound on `n_i + n_j` for exact enumeration.
pub const DEFAULT_CAP: usize = 24;

/// Default bound on the number of partitions visited by exact `md_k`.
pub const DEFAULT_PARTITION_BUDGET: f64 = 2e6;

const CHUNK_BITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyResult {
    pub value: f64,
    pub witness_x: VertexSet,
    pub witness_y: VertexSet,
    /// Class pair `(i, j)`, `i <= j`, attaining the value.
    pub pair: (usize, usize),
    pub method: Method,
}

fn volume_density(g: &WeightedGraph, ui: &[usize], uj: &[usize]) -> Option<f64> {
    let vol = |s: &[usize]| s.iter().map(|&v| g.degree(v)).sum::<f64>();
    let (vi, vj) = (vol(ui), vol(uj));
    if vi <= 0.0 || vj <= 0.0 {
        return None;
    }
    let cut: f64 = ui.iter().map(|&u| uj.iter().map(|&v| g.weight(u, v)).sum::<f64>()).sum();
    Some(cut / (vi * vj))
}

fn md_value(a: f64, rho: f64, vx: f64, vy: f64) -> f64 {
    (a - rho * vx * vy).abs() / (vx * vy).sqrt()
}

/// `|a(X,Y) - rho(U_i,U_j) Vol X Vol Y| / sqrt(Vol X Vol Y)`.
pub fn pair_discrepancy(g: &WeightedGraph, x: &VertexSet, y: &VertexSet, ui: &VertexSet, uj: &VertexSet) -> Result<f64> {
    if !x.is_subset_of(ui) || !y.is_subset_of(uj) {
        return Err(Error::InvalidArgument("X must lie in U_i and Y in U_j".into()));
    }
    let vx = g.volume(x);
    let vy = g.volume(y);
    if x.is_empty() || y.is_empty() || vx <= 0.0 || vy <= 0.0 {
        return Err(Error::DegenerateSubset);
    }
    let rho = volume_density(g, ui.members(), uj.members()).ok_or(Error::DegenerateSubset)?;
    Ok(md_value(g.weighted_cut(x, y), rho, vx, vy))
}

struct PairData {
    w: Vec<Vec<f64>>,
    dx: Vec<f64>,
    dy: Vec<f64>,
    rho: f64,
}

impl PairData {
    fn new(g: &WeightedGraph, ui: &[usize], uj: &[usize]) -> Option<Self> {
        let rho = volume_density(g, ui, uj)?;
        Some(PairData {
            w: ui.iter().map(|&u| uj.iter().map(|&v| g.weight(u, v)).collect()).collect(),
            dx: ui.iter().map(|&u| g.degree(u)).collect(),
            dy: uj.iter().map(|&v| g.degree(v)).collect(),
            rho,
        })
    }
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    x: u64,
    y: u64,
}

impl Best {
    const NONE: Best = Best { value: -1.0, x: 0, y: 0 };
}

/// Exhaustive maximum over nonempty `X, Y` for one class pair; returns the
/// witness masks (bit `t` = `t`-th member of the class).
fn exact_pair(d: &PairData) -> Best {
    let ni = d.dx.len();
    let nj = d.dy.len();
    let chunk_bits = ni.min(CHUNK_BITS);
    let low_bits = ni - chunk_bits;
    let chunks = par::map_indexed(1 << chunk_bits, |c| {
        let mut xmask = (c as u64) << low_bits;
        let mut s = vec![0.0; nj];
        let mut vx = 0.0;
        for x in 0..ni {
            if xmask >> x & 1 == 1 {
                vx += d.dx[x];
                s.iter_mut().zip(&d.w[x]).for_each(|(a, b)| *a += b);
            }
        }
        let mut best = Best::NONE;
        for t in 0..(1u64 << low_bits) {
            if t > 0 {
                let x = t.trailing_zeros() as usize;
                xmask ^= 1 << x;
                let sign = if xmask >> x & 1 == 1 { 1.0 } else { -1.0 };
                vx += sign * d.dx[x];
                s.iter_mut().zip(&d.w[x]).for_each(|(a, b)| *a += sign * b);
            }
            if xmask == 0 || vx <= 0.0 {
                continue;
            }
            let mut ymask = 0u64;
            let mut a = 0.0;
            let mut vy = 0.0;
            for u in 1..(1u64 << nj) {
                let y = u.trailing_zeros() as usize;
                ymask ^= 1 << y;
                if ymask >> y & 1 == 1 {
                    a += s[y];
                    vy += d.dy[y];
                } else {
                    a -= s[y];
                    vy -= d.dy[y];
                }
                if vy > 0.0 {
                    let v = md_value(a, d.rho, vx, vy);
                    if v > best.value {
                        best = Best { value: v, x: xmask, y: ymask };
                    }
                }
            }
        }
        best
    });
    chunks.into_iter().fold(Best::NONE, |acc, b| if b.value > acc.value { b } else { acc })
}

fn class_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect()
}

fn check_sizes(g: &WeightedGraph, p: &Partition) -> Result<()> {
    if p.n() != g.n() {
        return Err(Error::InvalidPartition(format!("partition covers {} vertices, graph has {}", p.n(), g.n())));
    }
    Ok(())
}

/// Exact `md(G; U_1, ..., U_k)` by nested Gray-code enumeration.
pub fn partition_discrepancy_exact(g: &WeightedGraph, p: &Partition, cap: usize) -> Result<DiscrepancyResult> {
    check_sizes(g, p)?;
    let sizes = p.sizes();
    for (i, j) in class_pairs(p.k()) {
        let size = sizes[i] + sizes[j];
        if size > cap.min(62) {
            return Err(Error::CapExceeded { size, cap, hint: "use the heuristic" });
        }
    }
    let clusters = p.clusters();
    let mut best: Option<(Best, (usize, usize))> = None;
    for (i, j) in class_pairs(p.k()) {
        let Some(data) = PairData::new(g, &clusters[i], &clusters[j]) else { continue };
        let b = exact_pair(&data);
        if b.value >= 0.0 && best.is_none_or(|(cur, _)| b.value > cur.value) {
            best = Some((b, (i, j)));
        }
    }
    finish(g, p, &clusters, best, Method::Exact)
}

fn finish(
    g: &WeightedGraph,
    p: &Partition,
    clusters: &[Vec<usize>],
    best: Option<(Best, (usize, usize))>,
    method: Method,
) -> Result<DiscrepancyResult> {
    let (b, (i, j)) = best.ok_or(Error::DegenerateSubset)?;
    let pick = |members: &[usize], mask: u64| -> VertexSet {
        VertexSet::new((0..members.len()).filter(|&t| mask >> t & 1 == 1).map(|t| members[t]).collect(), g.n())
            .expect("members of a class")
    };
    let sets = p.cluster_sets();
    let witness_x = pick(&clusters[i], b.x);
    let witness_y = pick(&clusters[j], b.y);
    let value = pair_discrepancy(g, &witness_x, &witness_y, &sets[i], &sets[j])?;
    Ok(DiscrepancyResult { value, witness_x, witness_y, pair: (i, j), method })
}

/// Local-search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicParams {
    /// Random starts per class pair.
    pub starts: usize,
    /// Maximum improving moves per start.
    pub max_steps: usize,
    /// Vertex scores; each yields starts from its positive and negative
    /// supports (e.g. eigenvectors).
    #[serde(default)]
    pub hints: Vec<Vec<f64>>,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        HeuristicParams { starts: 8, max_steps: 10_000, hints: Vec::new() }
    }
}

/// Best single-vertex flip hill climbing from many starts. The value is
/// attained by its witnesses, hence a lower bound on the exact value.
pub fn partition_discrepancy_heuristic(
    g: &WeightedGraph,
    p: &Partition,
    seed: u64,
    params: &HeuristicParams,
) -> Result<DiscrepancyResult> {
    check_sizes(g, p)?;
    let clusters = p.clusters();
    let mut found: Option<(f64, Vec<usize>, Vec<usize>, (usize, usize))> = None;
    for (index, (i, j)) in class_pairs(p.k()).into_iter().enumerate() {
        let Some(data) = PairData::new(g, &clusters[i], &clusters[j]) else { continue };
        let starts = start_sets(&data, &clusters[i], &clusters[j], params, derive_seed(seed, index as u64));
        let runs = par::map_slice(&starts, |(x, y)| climb(&data, x.clone(), y.clone(), params.max_steps));
        for (v, x, y) in runs {
            if found.as_ref().is_none_or(|f| v > f.0) {
                found = Some((v, x, y, (i, j)));
            }
        }
    }
    let (_, x, y, (i, j)) = found.ok_or(Error::DegenerateSubset)?;
    let members = |c: usize, idx: &[usize]| -> VertexSet {
        VertexSet::new(idx.iter().map(|&t| clusters[c][t]).collect(), g.n()).expect("class members")
    };
    let witness_x = members(i, &x);
    let witness_y = members(j, &y);
    let sets = p.cluster_sets();
    let value = pair_discrepancy(g, &witness_x, &witness_y, &sets[i], &sets[j])?;
    Ok(DiscrepancyResult { value, witness_x, witness_y, pair: (i, j), method: Method::Heuristic })
}

type Start = (Vec<bool>, Vec<bool>);

fn start_sets(d: &PairData, ui: &[usize], uj: &[usize], params: &HeuristicParams, seed: u64) -> Vec<Start> {
    let ni = d.dx.len();
    let nj = d.dy.len();
    let mut out: Vec<Start> = Vec::new();
    let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b]).then(b.cmp(&a))).expect("nonempty");
    let single = |len: usize, t: usize| (0..len).map(|q| q == t).collect::<Vec<bool>>();
    out.push((single(ni, argmax(&d.dx)), single(nj, argmax(&d.dy))));
    for h in &params.hints {
        for (sx, sy) in [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let x: Vec<bool> = ui.iter().map(|&v| sx * h[v] > 0.0).collect();
            let y: Vec<bool> = uj.iter().map(|&v| sy * h[v] > 0.0).collect();
            out.push((x, y));
        }
    }
    let mut rng = seeded_rng(seed);
    for _ in 0..params.starts {
        let x = (0..ni).map(|_| rng.bernoulli(0.5)).collect();
        let y = (0..nj).map(|_| rng.bernoulli(0.5)).collect();
        out.push((x, y));
    }
    for (x, y) in &mut out {
        ensure_volume(x, &d.dx, &mut rng);
        ensure_volume(y, &d.dy, &mut rng);
    }
    out
}

fn ensure_volume(set: &mut [bool], deg: &[f64], rng: &mut RandomStream) {
    if set.iter().zip(deg).any(|(&s, &d)| s && d > 0.0) {
        return;
    }
    let w: Vec<f64> = deg.to_vec();
    if let Some(t) = rng.weighted_index(&w) {
        set[t] = true;
    }
}

fn climb(d: &PairData, mut x: Vec<bool>, mut y: Vec<bool>, max_steps: usize) -> (f64, Vec<usize>, Vec<usize>) {
    let ni = x.len();
    let nj = y.len();
    // s[y] = a(X, y), t[x] = a(x, Y)
    let mut s = vec![0.0; nj];
    let mut t = vec![0.0; ni];
    let mut vx = 0.0;
    let mut vy = 0.0;
    for a in 0..ni {
        if x[a] {
            vx += d.dx[a];
            s.iter_mut().zip(&d.w[a]).for_each(|(p, q)| *p += q);
        }
    }
    for b in 0..nj {
        if y[b] {
            vy += d.dy[b];
            for a in 0..ni {
                t[a] += d.w[a][b];
            }
        }
    }
    let mut a_xy: f64 = (0..nj).filter(|&b| y[b]).map(|b| s[b]).sum();
    let value = |a: f64, vx: f64, vy: f64| if vx > 0.0 && vy > 0.0 { md_value(a, d.rho, vx, vy) } else { -1.0 };
    let mut cur = value(a_xy, vx, vy);
    for _ in 0..max_steps {
        let mut best: Option<(f64, bool, usize)> = None;
        for a in 0..ni {
            let sign = if x[a] { -1.0 } else { 1.0 };
            let v = value(a_xy + sign * t[a], vx + sign * d.dx[a], vy);
            if v > cur + 1e-13 && best.is_none_or(|b| v > b.0) {
                best = Some((v, true, a));
            }
        }
        for b in 0..nj {
            let sign = if y[b] { -1.0 } else { 1.0 };
            let v = value(a_xy + sign * s[b], vx, vy + sign * d.dy[b]);
            if v > cur + 1e-13 && best.is_none_or(|bb| v > bb.0) {
                best = Some((v, false, b));
            }
        }
        let Some((v, in_x, q)) = best else { break };
        if in_x {
            let sign = if x[q] { -1.0 } else { 1.0 };
            x[q] = !x[q];
            a_xy += sign * t[q];
            vx += sign * d.dx[q];
            s.iter_mut().zip(&d.w[q]).for_each(|(p, r)| *p += sign * r);
        } else {
            let sign = if y[q] { -1.0 } else { 1.0 };
            y[q] = !y[q];
            a_xy += sign * s[q];
            vy += sign * d.dy[q];
            for a in 0..ni {
                t[a] += sign * d.w[a][q];
            }
        }
        cur = v;
    }
    let xs = (0..ni).filter(|&a| x[a]).collect();
    let ys = (0..nj).filter(|&b| y[b]).collect();
    (cur, xs, ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinKMode {
    Exact,
    SpectralSeeded,
}

/// What `MinKResult::value` certifies about `md_k(G)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// The true minimum.
    Exact,
    /// `md(G; partition)` computed exactly, so `md_k <= value`.
    Upper,
    /// Heuristic value of `md(G; partition)`; neither bound is certified.
    Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinKResult {
    pub value: f64,
    pub partition: Partition,
    pub bound: BoundKind,
    pub partitions_visited: usize,
}

/// Stirling number of the second kind as a float.
pub fn stirling2(n: usize, k: usize) -> f64 {
    let mut row = vec![0.0f64; k + 1];
    row[0] = 1.0;
    for _ in 0..n {
        for j in (1..=k).rev() {
            row[j] = j as f64 * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    row[k]
}

/// Every proper `k`-partition of `0..n` as a restricted growth string
/// (labels in first-occurrence order).
pub fn proper_partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut labels = vec![0usize; n];
    fn rec(pos: usize, max: usize, k: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let n = labels.len();
        if pos == n {
            if max + 1 == k {
                out.push(labels.clone());
            }
            return;
        }
        // not enough vertices left to open the remaining classes
        if k - (max + 1) > n - pos {
            return;
        }
        for l in 0..=(max + 1).min(k - 1) {
            labels[pos] = l;
            rec(pos + 1, max.max(l), k, labels, out);
        }
    }
    rec(1, 0, k, &mut labels, &mut out);
    out
}

/// Minimum k-way discrepancy.
///
/// `Exact` enumerates every proper k-partition (at most `budget` of them);
/// `SpectralSeeded` evaluates the weighted k-variance partition only,
/// exactly when every class pair fits `cap`, heuristically otherwise.
pub fn min_k_discrepancy(
    g: &WeightedGraph,
    k: usize,
    mode: MinKMode,
    budget: f64,
    cap: usize,
    seed: u64,
) -> Result<MinKResult> {
    let n = g.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= n, got k = {k}")));
    }
    match mode {
        MinKMode::Exact => {
            let estimate = stirling2(n, k);
            if estimate > budget {
                return Err(Error::BudgetExceeded { estimate, budget });
            }
            let all = proper_partitions(n, k);
            let values = par::map_slice(&all, |labels| {
                let p = Partition::new(labels.clone(), k).expect("restricted growth string");
                partition_discrepancy_exact(g, &p, cap).map(|r| r.value)
            });
            let mut best: Option<(f64, usize)> = None;
            for (idx, v) in values.into_iter().enumerate() {
                let v = match v {
                    Ok(v) => v,
                    Err(Error::DegenerateSubset) => continue,
                    Err(e) => return Err(e),
                };
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, idx));
                }
            }
            let (value, idx) = best.ok_or(Error::DegenerateSubset)?;
            Ok(MinKResult {
                value,
                partition: Partition::new(all[idx].clone(), k)?,
                bound: BoundKind::Exact,
                partitions_visited: all.len(),
            })
        }
        MinKMode::SpectralSeeded => {
            let partition = if k == 1 {
                Partition::trivial(n)
            } else {
                crate::clustering::k_variance(
                    g,
                    k,
                    crate::clustering::VarianceKind::Weighted,
                    &crate::clustering::KMeansParams::default(),
                    seed,
                )?
                .partition
            };
            let (value, bound) = match partition_discrepancy_exact(g, &partition, cap) {
                Ok(r) => (r.value, BoundKind::Upper),
                Err(Error::CapExceeded { .. }) => {
                    (partition_discrepancy_heuristic(g, &partition, seed, &HeuristicParams::default())?.value, BoundKind::Estimate)
                }
                Err(e) => return Err(e),
            };
            Ok(MinKResult { value, partition, bound, partitions_visited: 1 })
        }
    }
}

/// Right-hand side of the converse bound, `9 m (k + 2 - 9 k ln m)`.
pub fn converse_rhs(m: f64, k: usize) -> f64 {
    let k = k as f64;
    9.0 * m * (k + 2.0 - 9.0 * k * m.ln())
}

/// Point where [`converse_rhs`] stops increasing: `ln m = (k+2)/(9k) - 1`.
pub fn converse_peak(k: usize) -> f64 {
    let kf = k as f64;
    ((kf + 2.0) / (9.0 * kf) - 1.0).exp()
}

/// Smallest `m` in `(0, 1)` with `converse_rhs(m, k) = mu_abs`, by bisection
/// on the increasing branch. `None` when `mu_abs` is not positive or
/// exceeds the branch maximum.
pub fn converse_inverse(mu_abs: f64, k: usize) -> Option<f64> {
    if k == 0 || !(mu_abs > 0.0) {
        return None;
    }
    let peak = converse_peak(k);
    if mu_abs > converse_rhs(peak, k) {
        return None;
    }
    let (mut lo, mut hi) = (0.0f64, peak);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if converse_rhs(mid, k) < mu_abs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Degree range `c n <= d_v <= C n` after trimming the most extreme
/// vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeBounds {
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    /// Trimmed vertices, `floor(fraction * n / 2)` from each end.
    pub exceptions: Vec<usize>,
    pub exception_fraction: f64,
}

pub fn degree_bounds(g: &WeightedGraph, exception_fraction: f64) -> DegreeBounds {
    let n = g.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| g.degree(a).total_cmp(&g.degree(b)).then(a.cmp(&b)));
    let trim = ((exception_fraction * n as f64 / 2.0).floor() as usize).min(n.saturating_sub(1) / 2);
    let kept = &order[trim..n - trim];
    let nf = n as f64;
    let c = kept.first().map_or(0.0, |&v| g.degree(v) / nf);
    let big_c = kept.last().map_or(0.0, |&v| g.degree(v) / nf);
    let mut exceptions: Vec<usize> = order[..trim].iter().chain(&order[n - trim..]).copied().collect();
    exceptions.sort_unstable();
    DegreeBounds { c, big_c, exceptions, exception_fraction }
}

/// Spectral bracket for the multiway discrepancy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralBounds {
    pub k: usize,
    /// `|mu_k|`.
    pub mu_k: f64,
    /// Weighted k-variance of the supplied partition.
    pub weighted_variance: f64,
    pub degrees: DegreeBounds,
    /// `2 (C/c) (sqrt(2k) S~_k + |mu_k|)`; the vanishing correction is
    /// dropped, so this is an asymptotic bound.
    pub upper: f64,
    pub upper_asymptotic: bool,
    /// Lower bound on `md_k` from `|mu_k|`, valid when `0 < md_k < 1`.
    pub lower: Option<f64>,
    pub lower_note: String,
}

/// Bounds on `md(G; p)` and `md_k(G)` from the normalized modularity
/// spectrum (sorted by magnitude) and the weighted variance of `p`.
pub fn discrepancy_spectral_bounds(g: &WeightedGraph, k: usize, p: &Partition, exception_fraction: f64) -> Result<SpectralBounds> {
    let es = eigh(&normalized_modularity_matrix(g)?)?;
    spectral_bounds_from(g, &es, k, p, exception_fraction)
}

pub fn spectral_bounds_from(
    g: &WeightedGraph,
    es: &EigenSystem,
    k: usize,
    p: &Partition,
    exception_fraction: f64,
) -> Result<SpectralBounds> {
    if k == 0 || k > g.n() || p.k() != k {
        return Err(Error::InvalidArgument(format!("partition must have k = {k} classes")));
    }
    let mu_k = es.values.get(k - 1).map_or(0.0, |v| v.abs());
    let weighted_variance = if k == 1 {
        0.0
    } else {
        let e = modularity_representatives_from(g, es, k)?;
        centers_and_objective(&e, p).1
    };
    let degrees = degree_bounds(g, exception_fraction);
    let upper = if degrees.c > 0.0 {
        2.0 * (degrees.big_c / degrees.c) * ((2.0 * k as f64).sqrt() * weighted_variance.sqrt() + mu_k)
    } else {
        f64::INFINITY
    };
    let (lower, lower_note) = match converse_inverse(mu_k, k) {
        Some(m) => (Some(m), "md_k >= value whenever 0 < md_k < 1".to_string()),
        None if mu_k <= 0.0 => (None, "not applicable: |mu_k| = 0".to_string()),
        None => (None, "not invertible: |mu_k| above the increasing branch".to_string()),
    };
    Ok(SpectralBounds { k, mu_k, weighted_variance, degrees, upper, upper_asymptotic: true, lower, lower_note })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumbleViolation {
    pub x: VertexSet,
    pub y: Option<VertexSet>,
    /// `|deviation| - allowed`.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumbleResult {
    pub holds: bool,
    pub worst: Option<JumbleViolation>,
}

/// Exhaustive check of `|e(X) - p C(|X|,2)| <= beta |X|` over nonempty `X`.
pub fn jumbledness(g: &WeightedGraph, p: f64, beta: f64) -> Result<JumbleResult> {
    let n = g.n();
    if n > 22 {
        return Err(Error::CapExceeded { size: n, cap: 22, hint: "jumbledness is exhaustive" });
    }
    let rows: Vec<u32> = (0..n).map(|u| (0..n).filter(|&v| g.weight(u, v) > 0.0).fold(0u32, |m, v| m | 1 << v)).collect();
    let mut mask = 0u32;
    let mut edges = 0i64;
    let mut worst: Option<(f64, u32)> = None;
    for t in 1..(1u64 << n) {
        let x = t.trailing_zeros() as usize;
        let bit = 1u32 << x;
        let deg_in = (rows[x] & mask & !bit).count_ones() as i64;
        if mask & bit == 0 {
            mask |= bit;
            edges += deg_in;
        } else {
            mask &= !bit;
            edges -= deg_in;
        }
        let size = mask.count_ones() as f64;
        let excess = (edges as f64 - p * size * (size - 1.0) / 2.0).abs() - beta * size;
        if excess > 0.0 && worst.is_none_or(|(w, _)| excess > w) {
            worst = Some((excess, mask));
        }
    }
    let to_set = |m: u32| VertexSet::new((0..n).filter(|&v| m >> v & 1 == 1).collect(), n).expect("in range");
    Ok(JumbleResult { holds: worst.is_none(), worst: worst.map(|(excess, m)| JumbleViolation { x: to_set(m), y: None, excess }) })
}

/// Exhaustive check of `|e(X,Y) - p |X||Y|| <= beta sqrt(|X||Y|)` over
/// nonempty `X` in `u1`, `Y` in `u2`.
pub fn bi_jumbledness(g: &WeightedGraph, u1: &VertexSet, u2: &VertexSet, p: f64, beta: f64) -> Result<JumbleResult> {
    let (n1, n2) = (u1.len(), u2.len());
    if n1 + n2 > DEFAULT_CAP {
        return Err(Error::CapExceeded { size: n1 + n2, cap: DEFAULT_CAP, hint: "bi-jumbledness is exhaustive" });
    }
    let a = u1.members();
    let b = u2.members();
    let mut s = vec![0i64; n2];
    let mut mask = 0u64;
    let mut worst: Option<(f64, u64, Vec<usize>)> = None;
    for t in 1..(1u64 << n1) {
        let x = t.trailing_zeros() as usize;
        mask ^= 1 << x;
        let sign = if mask >> x & 1 == 1 { 1 } else { -1 };
        for (q, &y) in b.iter().enumerate() {
            if g.weight(a[x], y) > 0.0 {
                s[q] += sign;
            }
        }
        let sx = mask.count_ones() as f64;
        // For fixed |Y| = m the extreme e(X,Y) takes the m largest or smallest s.
        let mut order: Vec<usize> = (0..n2).collect();
        order.sort_by_key(|&q| (std::cmp::Reverse(s[q]), q));
        let mut top = 0i64;
        let mut bottom = 0i64;
        for m in 1..=n2 {
            top += s[order[m - 1]];
            bottom += s[order[n2 - m]];
            let allowed = beta * (sx * m as f64).sqrt();
            let expect = p * sx * m as f64;
            for (dev, from_top) in [((top as f64 - expect).abs(), true), ((bottom as f64 - expect).abs(), false)] {
                let excess = dev - allowed;
                if excess > 0.0 && worst.as_ref().is_none_or(|w| excess > w.0) {
                    let ys: Vec<usize> = if from_top { order[..m].to_vec() } else { order[n2 - m..].to_vec() };
                    worst = Some((excess, mask, ys.iter().map(|&q| b[q]).collect()));
                }
            }
        }
    }
    let n = g.n();
    Ok(JumbleResult {
        holds: worst.is_none(),
        worst: worst.map(|(excess, m, ys)| JumbleViolation {
            x: VertexSet::new((0..n1).filter(|&t| m >> t & 1 == 1).map(|t| a[t]).collect(), n).expect("in range"),
            y: Some(VertexSet::new(ys, n).expect("in range")),
            excess,
        }),
    })
}
