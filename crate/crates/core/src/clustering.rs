//! Spectral vertex representatives, weighted k-means and the k-variances
//! built from them.

use crate::error::{Error, Result};
use crate::graph::{Partition, WeightedGraph};
use crate::numerics::{derive_seed, eigh, seeded_rng, EigenSystem, Matrix, RandomStream};
use crate::par;
use crate::spectra::normalized_modularity_matrix;
use serde::{Deserialize, Serialize};

/// Eigenvalue magnitudes closer than this are treated as tied.
pub const GAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSource {
    /// Top-`k` adjacency eigenvectors, unit weights.
    Adjacency(usize),
    /// `D^{-1/2} u_1, ..., D^{-1/2} u_{k-1}` of the normalized modularity
    /// matrix, degree weights.
    Modularity(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub points: Matrix,
    pub weights: Vec<f64>,
    pub source: EmbeddingSource,
    /// Set when the requested eigenspace is not separated from the next
    /// eigenvalue.
    pub warning: Option<String>,
}

impl Embedding {
    pub fn new(points: Matrix, weights: Vec<f64>, source: EmbeddingSource) -> Result<Self> {
        if points.cols() == 0 {
            return Err(Error::InvalidArgument("embedding needs at least one dimension".into()));
        }
        if weights.len() != points.rows() {
            return Err(Error::InvalidArgument("one weight per point required".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be nonnegative".into()));
        }
        Ok(Embedding { points, weights, source, warning: None })
    }

    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    /// Number of distinct rows.
    pub fn distinct_points(&self) -> usize {
        let mut rows: Vec<Vec<u64>> = (0..self.n())
            .map(|i| self.points.row(i).iter().map(|x| if *x == 0.0 { 0 } else { x.to_bits() }).collect())
            .collect();
        rows.sort_unstable();
        rows.dedup();
        rows.len()
    }

    /// CSV dump, one row per vertex.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n() {
            let row: Vec<String> = self.points.row(i).iter().map(|x| format!("{x:e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Rows of the `n x k` matrix of top-|.| adjacency eigenvectors.
pub fn adjacency_representatives(g: &WeightedGraph, k: usize) -> Result<Embedding> {
    let es = eigh(&g.adjacency())?;
    adjacency_representatives_from(&es, k)
}

pub fn adjacency_representatives_from(es: &EigenSystem, k: usize) -> Result<Embedding> {
    let n = es.dim();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    let points = Matrix::from_fn(n, k, |v, i| es.vectors[(v, i)]);
    let mut e = Embedding::new(points, vec![1.0; n], EmbeddingSource::Adjacency(k))?;
    if (es.values[k - 1].abs() - es.values[k].abs()).abs() <= GAP_TOL {
        e.warning = Some(format!("unstable subspace: |lambda_{k}| = |lambda_{}|", k + 1));
    }
    Ok(e)
}

/// `(k-1)`-dimensional degree-weighted representatives from the
/// normalized modularity matrix.
pub fn modularity_representatives(g: &WeightedGraph, k: usize) -> Result<Embedding> {
    if k < 2 {
        return Err(Error::InvalidArgument("k = 1 has no modularity representatives (weighted 1-variance is 0)".into()));
    }
    let es = eigh(&normalized_modularity_matrix(g)?)?;
    modularity_representatives_from(g, &es, k)
}

pub fn modularity_representatives_from(g: &WeightedGraph, es: &EigenSystem, k: usize) -> Result<Embedding> {
    let n = es.dim();
    if k < 2 {
        return Err(Error::InvalidArgument("k = 1 has no modularity representatives (weighted 1-variance is 0)".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    let total = g.total_weight();
    let d: Vec<f64> = g.degrees().iter().map(|x| x / total).collect();
    let points = Matrix::from_fn(n, k - 1, |v, i| es.vectors[(v, i)] / d[v].sqrt());
    let mut e = Embedding::new(points, d, EmbeddingSource::Modularity(k))?;
    if k - 1 < n && (es.values[k - 2].abs() - es.values[k - 1].abs()).abs() <= GAP_TOL {
        e.warning = Some(format!("gap condition violated: |mu_{}| = |mu_{k}|", k - 1));
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when the relative objective decrease falls below this.
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams { restarts: 20, max_iter: 500, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub partition: Partition,
    /// `k x d`, weighted means of the clusters of `partition`.
    pub centers: Matrix,
    pub objective: f64,
    pub restarts_used: usize,
    /// Objective after each assignment step of the winning restart.
    pub history: Vec<f64>,
}

/// Weighted k-means (k-means++ seeding, Lloyd iterations), best of
/// `params.restarts` runs. Restart `i` uses the stream `derive_seed(seed, i)`.
pub fn kmeans(e: &Embedding, k: usize, params: &KMeansParams, seed: u64) -> Result<KMeansResult> {
    let distinct = e.distinct_points();
    if k == 0 || k > distinct {
        return Err(Error::TooFewPoints { k, distinct });
    }
    let restarts = params.restarts.max(1);
    let runs = par::map_indexed(restarts, |i| lloyd(e, k, params, &mut seeded_rng(derive_seed(seed, i as u64))));
    let mut best = 0;
    for i in 1..restarts {
        if runs[i].1 < runs[best].1 {
            best = i;
        }
    }
    let (labels, _, history) = runs.into_iter().nth(best).expect("at least one restart");
    let partition = Partition::new(labels, k)?.canonical();
    let (centers, objective) = centers_and_objective(e, &partition);
    Ok(KMeansResult { partition, centers, objective, restarts_used: restarts, history })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Weighted means of each class and the objective around them.
pub fn centers_and_objective(e: &Embedding, p: &Partition) -> (Matrix, f64) {
    let k = p.k();
    let d = e.dim();
    let mut centers = Matrix::zeros(k, d);
    let mut mass = vec![0.0; k];
    let mut count = vec![0usize; k];
    for v in 0..e.n() {
        let c = p.label(v);
        mass[c] += e.weights[v];
        count[c] += 1;
        for (t, x) in e.points.row(v).iter().enumerate() {
            centers[(c, t)] += e.weights[v] * x;
        }
    }
    for c in 0..k {
        if mass[c] > 0.0 {
            centers.row_mut(c).iter_mut().for_each(|x| *x /= mass[c]);
        } else {
            // zero-weight class: plain mean keeps the center well defined
            let members: Vec<usize> = (0..e.n()).filter(|&v| p.label(v) == c).collect();
            for &v in &members {
                for t in 0..d {
                    centers[(c, t)] += e.points[(v, t)] / count[c] as f64;
                }
            }
        }
    }
    let objective = (0..e.n()).map(|v| e.weights[v] * sq_dist(e.points.row(v), centers.row(p.label(v)))).sum();
    (centers, objective)
}

fn plus_plus_seeds(e: &Embedding, k: usize, rng: &mut RandomStream) -> Matrix {
    let n = e.n();
    let mut centers = Matrix::zeros(k, e.dim());
    let first = rng.weighted_index(&e.weights).unwrap_or_else(|| rng.index(n));
    centers.row_mut(0).copy_from_slice(e.points.row(first));
    let mut dist: Vec<f64> = (0..n).map(|v| sq_dist(e.points.row(v), centers.row(0))).collect();
    for c in 1..k {
        let w: Vec<f64> = (0..n).map(|v| e.weights[v] * dist[v]).collect();
        let pick = rng
            .weighted_index(&w)
            .or_else(|| {
                let plain: Vec<f64> = dist.clone();
                rng.weighted_index(&plain)
            })
            .unwrap_or_else(|| rng.index(n));
        centers.row_mut(c).copy_from_slice(e.points.row(pick));
        for v in 0..n {
            dist[v] = dist[v].min(sq_dist(e.points.row(v), centers.row(c)));
        }
    }
    centers
}

fn lloyd(e: &Embedding, k: usize, params: &KMeansParams, rng: &mut RandomStream) -> (Vec<usize>, f64, Vec<f64>) {
    let n = e.n();
    let d = e.dim();
    let mut centers = plus_plus_seeds(e, k, rng);
    let mut labels = vec![0usize; n];
    let mut history: Vec<f64> = Vec::new();
    let mut reseeds = 0;
    let mut iter = 0;
    loop {
        let mut objective = 0.0;
        let mut dist = vec![0.0; n];
        for v in 0..n {
            let row = e.points.row(v);
            let mut best = 0;
            let mut best_d = sq_dist(row, centers.row(0));
            for c in 1..k {
                let dc = sq_dist(row, centers.row(c));
                if dc < best_d {
                    best = c;
                    best_d = dc;
                }
            }
            labels[v] = best;
            dist[v] = best_d;
            objective += e.weights[v] * best_d;
        }
        let mut sizes = vec![0usize; k];
        labels.iter().for_each(|&c| sizes[c] += 1);
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            // Move the empty center onto the point farthest from its own center.
            let far = (0..n)
                .filter(|&v| sizes[labels[v]] > 1 && dist[v] > 0.0)
                .max_by(|&a, &b| {
                    (e.weights[a] * dist[a])
                        .total_cmp(&(e.weights[b] * dist[b]))
                        .then(dist[a].total_cmp(&dist[b]))
                        .then(b.cmp(&a))
                })
                .expect("k <= distinct points leaves a splittable cluster");
            centers.row_mut(empty).copy_from_slice(e.points.row(far));
            reseeds += 1;
            if reseeds <= n {
                continue;
            }
        }
        if let Some(&prev) = history.last() {
            debug_assert!(objective <= prev * (1.0 + 1e-12) + 1e-15, "k-means objective increased");
        }
        let converged = history.last().is_some_and(|&prev: &f64| prev - objective <= params.tol * prev.abs().max(1e-300));
        history.push(objective);
        iter += 1;
        if converged || iter >= params.max_iter {
            break;
        }
        let mut mass = vec![0.0; k];
        let mut sums = Matrix::zeros(k, d);
        for v in 0..n {
            mass[labels[v]] += e.weights[v];
            for t in 0..d {
                sums[(labels[v], t)] += e.weights[v] * e.points[(v, t)];
            }
        }
        for c in 0..k {
            if mass[c] > 0.0 {
                for t in 0..d {
                    centers[(c, t)] = sums[(c, t)] / mass[c];
                }
            }
        }
    }
    let p = Partition::from_labels(labels.clone());
    let objective = match p {
        Ok(p) if p.k() == k => centers_and_objective(e, &p).1,
        _ => f64::INFINITY,
    };
    (labels, objective, history)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceKind {
    /// `S_k^2`: adjacency representatives, unit weights.
    Plain,
    /// Weighted `S~_k^2`: modularity representatives, degree weights.
    Weighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KVariance {
    pub value: f64,
    pub partition: Partition,
    pub warning: Option<String>,
}

/// k-variance of the spectral representatives and its minimizing partition.
pub fn k_variance(g: &WeightedGraph, k: usize, kind: VarianceKind, params: &KMeansParams, seed: u64) -> Result<KVariance> {
    let e = match kind {
        VarianceKind::Plain => adjacency_representatives(g, k)?,
        VarianceKind::Weighted if k == 1 => {
            return Ok(KVariance { value: 0.0, partition: Partition::trivial(g.n()), warning: None });
        }
        VarianceKind::Weighted => modularity_representatives(g, k)?,
    };
    k_variance_of(&e, k, params, seed)
}

pub fn k_variance_of(e: &Embedding, k: usize, params: &KMeansParams, seed: u64) -> Result<KVariance> {
    let r = kmeans(e, k, params, seed)?;
    Ok(KVariance { value: r.objective, partition: r.partition, warning: e.warning.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Clusterability {
    pub s_k: f64,
    pub s_k_minus_1: f64,
    pub eps: f64,
    pub pass: bool,
}

/// `S_k^2 <= eps^2 S_{k-1}^2` on plain variances.
pub fn k_clusterable(g: &WeightedGraph, k: usize, eps: f64, params: &KMeansParams, seed: u64) -> Result<Clusterability> {
    if k < 2 {
        return Err(Error::InvalidArgument("k-clusterability needs k >= 2".into()));
    }
    let s_k = k_variance(g, k, VarianceKind::Plain, params, seed)?.value;
    let s_k_minus_1 = k_variance(g, k - 1, VarianceKind::Plain, params, seed)?.value;
    Ok(Clusterability { s_k, s_k_minus_1, eps, pass: s_k <= eps * eps * s_k_minus_1 })
}

/// Fraction of vertices on which `p` and `q` agree under the best label
/// permutation, and that permutation (`perm[label in p] = label in q`).
pub fn match_partitions(p: &Partition, q: &Partition) -> Result<(f64, Vec<usize>)> {
    if p.n() != q.n() || p.k() != q.k() {
        return Err(Error::InvalidArgument("partitions differ in n or k".into()));
    }
    let k = p.k();
    if k > 8 {
        return Err(Error::InvalidArgument(format!("exhaustive matching supports k <= 8, got {k}")));
    }
    let mut table = vec![vec![0usize; k]; k];
    for v in 0..p.n() {
        table[p.label(v)][q.label(v)] += 1;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = (0usize, perm.clone());
    permute(&mut perm, 0, &table, &mut best);
    Ok((best.0 as f64 / p.n() as f64, best.1))
}

fn permute(perm: &mut [usize], pos: usize, table: &[Vec<usize>], best: &mut (usize, Vec<usize>)) {
    if pos == perm.len() {
        let score = (0..perm.len()).map(|i| table[i][perm[i]]).sum();
        if score > best.0 {
            *best = (score, perm.to_vec());
        }
        return;
    }
    for i in pos..perm.len() {
        perm.swap(pos, i);
        permute(perm, pos + 1, table, best);
        perm.swap(pos, i);
    }
}
