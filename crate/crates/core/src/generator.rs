//! Sampling generalized random graphs from a model graph, and the
//! deterministic-plus-noise decomposition of a sample.
//!
//! Draw order is fixed: memberships by vertex index (multinomial mode
//! only), then one uniform per unordered pair `u < v` in lexicographic
//! order, with an edge whenever the uniform falls below `p_{c_u c_v}`.

use crate::error::{Error, Result};
use crate::graph::{Partition, WeightedGraph};
use crate::model::ModelGraph;
use crate::numerics::{seeded_rng, Matrix, RandomStream, SymMatrix};
use crate::par;
use serde::{Deserialize, Serialize};

/// Membership draws attempted before giving up on an empty cluster.
pub const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipMode {
    /// Memberships drawn i.i.d. from `r`.
    Multinomial,
    /// Contiguous classes of the given sizes.
    FixedSizes(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub model: ModelGraph,
    pub n: usize,
    pub seed: u64,
    pub membership: MembershipMode,
}

impl SampleSpec {
    pub fn fixed(model: ModelGraph, sizes: Vec<usize>, seed: u64) -> Self {
        SampleSpec { model, n: sizes.iter().sum(), seed, membership: MembershipMode::FixedSizes(sizes) }
    }

    pub fn multinomial(model: ModelGraph, n: usize, seed: u64) -> Self {
        SampleSpec { model, n, seed, membership: MembershipMode::Multinomial }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.model.k();
        if self.n < k {
            return Err(Error::InvalidArgument(format!("n = {} must be at least k = {k}", self.n)));
        }
        if let MembershipMode::FixedSizes(sizes) = &self.membership {
            if sizes.len() != k {
                return Err(Error::InvalidArgument(format!("expected {k} fixed sizes, got {}", sizes.len())));
            }
            if sizes.contains(&0) {
                return Err(Error::InvalidArgument("fixed sizes must be positive".into()));
            }
            if sizes.iter().sum::<usize>() != self.n {
                return Err(Error::InvalidArgument(format!("fixed sizes sum to {}, expected n = {}", sizes.iter().sum::<usize>(), self.n)));
            }
        }
        Ok(())
    }
}

/// A sampled graph with its planted partition.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub graph: WeightedGraph,
    pub partition: Partition,
    pub spec: SampleSpec,
}

pub fn sample(spec: &SampleSpec) -> Result<LabeledSample> {
    spec.validate()?;
    let k = spec.model.k();
    let n = spec.n;
    let mut rng = seeded_rng(spec.seed);
    let labels = memberships(spec, &mut rng)?;
    let mut a = Matrix::zeros(n, n);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.uniform() < spec.model.p(labels[u], labels[v]) {
                a[(u, v)] = 1.0;
                a[(v, u)] = 1.0;
            }
        }
    }
    Ok(LabeledSample { graph: WeightedGraph::new(a)?, partition: Partition::new(labels, k)?, spec: spec.clone() })
}

fn memberships(spec: &SampleSpec, rng: &mut RandomStream) -> Result<Vec<usize>> {
    let k = spec.model.k();
    match &spec.membership {
        MembershipMode::FixedSizes(sizes) => {
            Ok(sizes.iter().enumerate().flat_map(|(c, &s)| std::iter::repeat_n(c, s)).collect())
        }
        MembershipMode::Multinomial => {
            for _ in 0..MAX_RESAMPLES {
                let labels: Vec<usize> =
                    (0..spec.n).map(|_| rng.weighted_index(spec.model.r()).expect("r is a probability vector")).collect();
                let mut seen = vec![false; k];
                labels.iter().for_each(|&c| seen[c] = true);
                if seen.iter().all(|&s| s) {
                    return Ok(labels);
                }
            }
            Err(Error::EmptyCluster(MAX_RESAMPLES))
        }
    }
}

/// Samples every spec, in parallel when enabled; output order follows input.
pub fn sample_many(specs: &[SampleSpec]) -> Vec<Result<LabeledSample>> {
    par::map_slice(specs, sample)
}

/// `A = B + W`: `B` is the blow-up of `P` in the sample's vertex order
/// (diagonal included), `W = A - B` the noise.
pub fn decompose(s: &LabeledSample) -> (SymMatrix, SymMatrix) {
    let n = s.graph.n();
    let lab = s.partition.labels();
    let b = Matrix::from_fn(n, n, |u, v| s.spec.model.p(lab[u], lab[v]));
    let w = s.graph.weights().sub(&b);
    (SymMatrix::new(b).expect("block matrix is symmetric"), SymMatrix::new(w).expect("difference is symmetric"))
}

/// Edge counts per unordered class pair: entry `(i, j)` with `i != j`
/// counts edges between the classes, `(i, i)` edges inside class `i`.
pub fn block_edge_counts(g: &WeightedGraph, p: &Partition) -> Vec<Vec<usize>> {
    let k = p.k();
    let mut counts = vec![vec![0usize; k]; k];
    for u in 0..g.n() {
        for v in (u + 1)..g.n() {
            if g.weight(u, v) > 0.0 {
                let (i, j) = (p.label(u), p.label(v));
                counts[i][j] += 1;
                if i != j {
                    counts[j][i] += 1;
                }
            }
        }
    }
    counts
}

/// JSON sidecar written next to a generated edge list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub spec: SampleSpec,
    pub partition: Partition,
    pub block_edge_counts: Vec<Vec<usize>>,
}

impl LabeledSample {
    pub fn sidecar(&self) -> SampleSidecar {
        SampleSidecar {
            spec: self.spec.clone(),
            partition: self.partition.clone(),
            block_edge_counts: block_edge_counts(&self.graph, &self.partition),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancingRow {
    pub n: usize,
    /// `max_i |n_i / n - r_i|`.
    pub max_deviation: f64,
    /// `min_i n_i / n`.
    pub min_ratio: f64,
    pub weak_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancingReport {
    pub rows: Vec<BalancingRow>,
    pub weak_c: f64,
    pub weak_all: bool,
    /// Deviations never increase along the sequence (ordered by `n`).
    pub trend_toward_r: bool,
}

/// Strong and weak balancing diagnostics for a sequence of samples.
pub fn balancing_report(samples: &[LabeledSample], weak_c: f64) -> Result<BalancingReport> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("balancing report needs at least 2 samples".into()));
    }
    let mut rows: Vec<BalancingRow> = samples
        .iter()
        .map(|s| {
            let ratios = s.partition.ratios();
            let max_deviation = ratios.iter().zip(s.spec.model.r()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            BalancingRow { n: s.graph.n(), max_deviation, min_ratio, weak_ok: min_ratio >= weak_c }
        })
        .collect();
    rows.sort_by_key(|r| r.n);
    let weak_all = rows.iter().all(|r| r.weak_ok);
    let trend_toward_r = rows.windows(2).all(|w| w[1].max_deviation <= w[0].max_deviation + 1e-15);
    Ok(BalancingReport { rows, weak_c, weak_all, trend_toward_r })
}
