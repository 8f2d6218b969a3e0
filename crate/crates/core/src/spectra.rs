//! Modularity and normalized modularity matrices, their spectra, and
//! detection of structural eigenvalues.

use crate::error::{Error, Result};
use crate::generator::LabeledSample;
use crate::graph::WeightedGraph;
use crate::numerics::{eigh, EigenSystem, SymMatrix};
use serde::{Deserialize, Serialize};

/// Thresholds for structural eigenvalue detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    /// Modularity mode: count `|mu_i| > delta`.
    pub delta: f64,
    /// Adjacency mode: count `|lambda_i| > c_thr * sqrt(n ln n)`.
    pub c_thr: f64,
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams { delta: 0.5, c_thr: 1.0 }
    }
}

impl SpectralParams {
    /// Adjacency cut-off for an `n`-vertex graph.
    pub fn adjacency_threshold(&self, n: usize) -> f64 {
        let n = n as f64;
        if n < 2.0 {
            return 0.0;
        }
        self.c_thr * (n * n.ln()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuralMode {
    Adjacency,
    Modularity,
}

/// `M = A - d d^T` on the weight-normalized graph.
pub fn modularity_matrix(g: &WeightedGraph) -> Result<SymMatrix> {
    let norm = g.normalize_weights()?;
    if !norm.is_connected() {
        return Err(Error::Disconnected);
    }
    let d = norm.degrees();
    SymMatrix::from_fn(g.n(), |i, j| norm.weight(i, j) - d[i] * d[j])
}

/// `M_D = D^{-1/2} A D^{-1/2} - sqrt(d) sqrt(d)^T` on the weight-normalized graph.
pub fn normalized_modularity_matrix(g: &WeightedGraph) -> Result<SymMatrix> {
    let norm = g.normalize_weights()?;
    if let Some(v) = norm.degrees().iter().position(|&d| d <= 0.0) {
        return Err(Error::ZeroDegree(v));
    }
    if !norm.is_connected() {
        return Err(Error::Disconnected);
    }
    let s: Vec<f64> = norm.degrees().iter().map(|d| d.sqrt()).collect();
    let n = g.n();
    let mut m = crate::numerics::Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = norm.weight(i, j) / (s[i] * s[j]) - s[i] * s[j];
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    SymMatrix::new(m)
}

/// Count and indices of structural eigenvalues in `values` (sorted by
/// decreasing magnitude). `n` is the vertex count, used in adjacency mode.
pub fn structural_eigs(values: &[f64], mode: StructuralMode, n: usize, params: &SpectralParams) -> (usize, Vec<usize>) {
    let cut = match mode {
        StructuralMode::Modularity => params.delta,
        StructuralMode::Adjacency => params.adjacency_threshold(n),
    };
    let idx: Vec<usize> = (0..values.len()).filter(|&i| values[i].abs() > cut).collect();
    (idx.len(), idx)
}

/// `|v_i| / |v_{i+1}|` for consecutive values; infinite when the next is zero.
pub fn gap_table(values: &[f64]) -> Vec<f64> {
    values
        .windows(2)
        .map(|w| if w[1] == 0.0 { f64::INFINITY } else { w[0].abs() / w[1].abs() })
        .collect()
}

/// 1-based position after which the largest gap occurs (`None` if fewer
/// than two values). Only the first `limit` ratios are considered.
pub fn largest_gap(values: &[f64], limit: usize) -> Option<usize> {
    let gaps = gap_table(values);
    let mut best: Option<(usize, f64)> = None;
    for (i, &g) in gaps.iter().enumerate().take(limit) {
        if best.is_none_or(|(_, b)| g > b) {
            best = Some((i + 1, g));
        }
    }
    best.map(|(i, _)| i)
}

/// Adjacency and normalized modularity spectra with structural counts.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    pub adjacency_eigs: EigenSystem,
    pub modularity_eigs: EigenSystem,
    pub structural_count_adj: usize,
    pub structural_count_mod: usize,
    pub gap_table_adj: Vec<f64>,
    pub gap_table_mod: Vec<f64>,
    pub largest_gap_adj: Option<usize>,
    pub params: SpectralParams,
    pub adjacency_threshold: f64,
}

impl SpectralSummary {
    pub fn compute(g: &WeightedGraph, params: SpectralParams) -> Result<Self> {
        let md = normalized_modularity_matrix(g)?;
        let adjacency_eigs = eigh(&g.adjacency())?;
        let modularity_eigs = eigh(&md)?;
        Ok(Self::from_systems(g.n(), adjacency_eigs, modularity_eigs, params))
    }

    pub fn from_systems(n: usize, adjacency_eigs: EigenSystem, modularity_eigs: EigenSystem, params: SpectralParams) -> Self {
        let (structural_count_adj, _) = structural_eigs(&adjacency_eigs.values, StructuralMode::Adjacency, n, &params);
        let (structural_count_mod, _) = structural_eigs(&modularity_eigs.values, StructuralMode::Modularity, n, &params);
        let gap_table_adj = gap_table(&adjacency_eigs.values);
        let gap_table_mod = gap_table(&modularity_eigs.values);
        let largest_gap_adj = largest_gap(&adjacency_eigs.values, (n / 2).max(1));
        SpectralSummary {
            adjacency_threshold: params.adjacency_threshold(n),
            adjacency_eigs,
            modularity_eigs,
            structural_count_adj,
            structural_count_mod,
            gap_table_adj,
            gap_table_mod,
            largest_gap_adj,
            params,
        }
    }

    /// The `i`-th normalized modularity eigenvalue by magnitude (`mu_i`, 1-based).
    pub fn mu(&self, i: usize) -> f64 {
        self.modularity_eigs.values.get(i - 1).copied().unwrap_or(0.0)
    }
}

/// Comparison of the empirical normalized modularity spectrum against the
/// model's limiting values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelDeviation {
    pub expected: Vec<f64>,
    pub observed: Vec<f64>,
    /// `|mu_{n,i} - expected_i|` for `i < k`.
    pub deviations: Vec<f64>,
    /// `max_{i >= k} |mu_{n,i}|`.
    pub max_remaining: f64,
}

/// Compares the first `k - 1` values of `mu` (sorted by magnitude) with the
/// model's structural values, also sorted by magnitude.
pub fn compare_with_model(mu: &[f64], model: &crate::model::ModelGraph) -> Result<ModelDeviation> {
    let spec = model.model_spectrum()?;
    let mut expected = spec.structural_values.clone();
    expected.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
    let m = expected.len().min(mu.len());
    let observed: Vec<f64> = mu[..m].to_vec();
    let deviations = observed.iter().zip(&expected).map(|(o, e)| (o - e).abs()).collect();
    let max_remaining = mu[m..].iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(ModelDeviation { expected, observed, deviations, max_remaining })
}

pub fn spectrum_vs_model(sample: &LabeledSample) -> Result<ModelDeviation> {
    let es = eigh(&normalized_modularity_matrix(&sample.graph)?)?;
    compare_with_model(&es.values, &sample.spec.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelGraph;
    use crate::numerics::Matrix;

    #[test]
    fn modularity_of_single_edge() {
        let g = WeightedGraph::from_unit_edges(2, &[(0, 1)]).unwrap();
        let m = modularity_matrix(&g).unwrap();
        let want = [[-0.25, 0.25], [0.25, -0.25]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[(i, j)] - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn modularity_rows_sum_to_zero_and_scale_free() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 2.0), (1, 2, 0.5), (2, 3, 1.0), (0, 3, 3.0), (0, 2, 1.5)]).unwrap();
        let m = modularity_matrix(&g).unwrap();
        for i in 0..4 {
            assert!(m.matrix().row(i).iter().sum::<f64>().abs() < 1e-10);
        }
        let m2 = modularity_matrix(&g.scaled(7.5)).unwrap();
        assert!(m.matrix().sub(m2.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn disconnected_and_isolated_are_rejected() {
        let g = WeightedGraph::from_unit_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(modularity_matrix(&g).unwrap_err(), Error::Disconnected);
        assert!(normalized_modularity_matrix(&g).unwrap_err().to_string().contains("M_D requires irreducible A"));
        let h = WeightedGraph::from_unit_edges(3, &[(0, 1)]).unwrap();
        assert_eq!(normalized_modularity_matrix(&h).unwrap_err(), Error::ZeroDegree(2));
    }

    #[test]
    fn complete_graph_spectrum() {
        let es = eigh(&normalized_modularity_matrix(&WeightedGraph::complete(4)).unwrap()).unwrap();
        let mut vals = es.values.clone();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] + 1.0 / 3.0).abs() < 1e-9);
        assert!((vals[1] + 1.0 / 3.0).abs() < 1e-9);
        assert!((vals[2] + 1.0 / 3.0).abs() < 1e-9);
        assert!(vals[3].abs() < 1e-9);
    }

    #[test]
    fn bipartite_has_minus_one() {
        let es = eigh(&normalized_modularity_matrix(&WeightedGraph::complete_bipartite(2, 2)).unwrap()).unwrap();
        assert!((es.values[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_degree_is_null_vector() {
        let g = WeightedGraph::from_edges(5, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 4, 0.3), (4, 0, 1.0), (1, 3, 0.7)])
            .unwrap();
        let md = normalized_modularity_matrix(&g).unwrap();
        let norm = g.normalize_weights().unwrap();
        let s: Vec<f64> = norm.degrees().iter().map(|d| d.sqrt()).collect();
        assert!(md.matrix().matvec(&s).iter().all(|x| x.abs() < 1e-9));
        let es = eigh(&md).unwrap();
        assert!(es.values.iter().all(|v| v.abs() <= 1.0 + 1e-9));
        assert!(es.values.last().unwrap().abs() < 1e-9);
    }

    #[test]
    fn threshold_counts() {
        let p = SpectralParams::default();
        assert_eq!(structural_eigs(&[0.8, 0.05, 0.01, 0.0], StructuralMode::Modularity, 4, &p), (1, vec![0]));
        let t = p.adjacency_threshold(500);
        assert!((t - (500.0 * 500f64.ln()).sqrt()).abs() < 1e-12);
        assert_eq!(structural_eigs(&[215.0, 159.0, 20.0], StructuralMode::Adjacency, 500, &p).0, 2);
    }

    #[test]
    fn gaps() {
        assert_eq!(gap_table(&[4.0, 2.0, -1.0, 0.0]), vec![2.0, 2.0, f64::INFINITY]);
        assert_eq!(largest_gap(&[10.0, 9.0, 1.0, 0.9], 3), Some(2));
        assert_eq!(largest_gap(&[1.0], 3), None);
    }

    #[test]
    fn deterministic_blow_up_spectrum() {
        let h = ModelGraph::from_rows(vec![0.5, 0.5], &[vec![0.8, 0.1], vec![0.1, 0.7]]).unwrap();
        let sizes = [60, 60];
        let g = h.blow_up_graph(&sizes).unwrap();
        let es = eigh(&normalized_modularity_matrix(&g).unwrap()).unwrap();
        // Exact quotient: the zero diagonal shifts each block's within-weight.
        let q = Matrix::from_fn(2, 2, |i, j| h.p(i, j) * sizes[j] as f64 - if i == j { h.p(i, i) } else { 0.0 });
        let deg: Vec<f64> = (0..2).map(|i| q[(i, 0)] + q[(i, 1)]).collect();
        // The random-walk quotient q_ij / deg_i has eigenvalues 1 and mu_1.
        let mu_exact = q[(0, 0)] / deg[0] + q[(1, 1)] / deg[1] - 1.0;
        assert!((es.values[0] - mu_exact).abs() < 1e-9);
        let surrogate = h.model_spectrum().unwrap().structural_values[0];
        assert!((es.values[0] - surrogate).abs() < 1.0 / 60.0);
        assert!(es.values[1].abs() < 0.02);
    }

    #[test]
    fn deterministic_blow_up_rank() {
        let h = ModelGraph::from_rows(vec![0.3, 0.7], &[vec![0.9, 0.2], vec![0.2, 0.5]]).unwrap();
        let b = h.blow_up(&[9, 21]).unwrap();
        let es = eigh(&b).unwrap();
        let f = b.matrix().frobenius_norm();
        assert!(es.values[2..].iter().all(|v| v.abs() <= 1e-8 * f));
        assert!(es.values[1].abs() > 1.0);
    }
}
