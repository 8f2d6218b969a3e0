//! The k-vertex model graph `H`: cluster ratios `r`, edge-probability
//! matrix `P`, its blow-ups, step-function graphon and homomorphism
//! densities, and the k x k surrogate for the limiting normalized
//! modularity spectrum.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::numerics::{eigh, Matrix, SymMatrix};
use crate::subgraph::SimpleGraphPattern;
use serde::{Deserialize, Serialize};

/// Smallest |eigenvalue of P| accepted as full rank.
pub const RANK_TOL: f64 = 1e-8;

/// Largest pattern accepted by [`ModelGraph::hom_density`].
pub const MAX_MODEL_PATTERN: usize = 8;

/// Model graph on `k` vertices with vertex weights `r` (summing to one)
/// and a symmetric matrix `P` of edge probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelConfig", into = "ModelConfig")]
pub struct ModelGraph {
    r: Vec<f64>,
    p: Matrix,
}

/// JSON form: `{"k": int, "r": [floats], "P": [[floats]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub k: usize,
    pub r: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
}

impl TryFrom<ModelConfig> for ModelGraph {
    type Error = Error;
    fn try_from(c: ModelConfig) -> Result<Self> {
        if c.r.len() != c.k {
            return Err(Error::InvalidModel(format!("len(r) = k violated: len(r) = {}, k = {}", c.r.len(), c.k)));
        }
        if c.p.len() != c.k || c.p.iter().any(|row| row.len() != c.k) {
            return Err(Error::InvalidModel("P is k x k violated".into()));
        }
        ModelGraph::new(c.r, Matrix::from_rows(&c.p)?)
    }
}

impl From<ModelGraph> for ModelConfig {
    fn from(m: ModelGraph) -> Self {
        ModelConfig { k: m.k(), r: m.r.clone(), p: m.p.to_rows() }
    }
}

/// Limiting normalized modularity spectrum of the model: the trivial
/// eigenvalue (1) and `k - 1` structural values sorted by magnitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpectrum {
    pub trivial_value: f64,
    pub structural_values: Vec<f64>,
}

impl ModelGraph {
    /// Validates `r_i > 0`, `sum r = 1` (1e-12), `P` symmetric, `0 <= p_ij <= 1`.
    /// Full rank of `P` is checked separately by [`ModelGraph::check_rank`].
    pub fn new(r: Vec<f64>, p: Matrix) -> Result<Self> {
        let k = r.len();
        if k == 0 {
            return Err(Error::InvalidModel("k >= 1 violated".into()));
        }
        if p.rows() != k || p.cols() != k {
            return Err(Error::InvalidModel("P is k x k violated".into()));
        }
        if let Some(i) = r.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidModel(format!("r_i > 0 violated at i = {i}")));
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("sum(r) = 1 violated: sum = {sum}")));
        }
        for i in 0..k {
            for j in 0..k {
                let x = p[(i, j)];
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::InvalidModel(format!("0 <= p_ij <= 1 violated at ({i},{j}): {x}")));
                }
                if (x - p[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidModel(format!("P symmetric violated at ({i},{j})")));
                }
            }
        }
        Ok(ModelGraph { r, p })
    }

    pub fn from_rows(r: Vec<f64>, p: &[Vec<f64>]) -> Result<Self> {
        Self::new(r, Matrix::from_rows(p)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ModelConfig = serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))?;
        ModelGraph::try_from(cfg)
    }

    pub fn k(&self) -> usize {
        self.r.len()
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    pub fn p_matrix(&self) -> &Matrix {
        &self.p
    }

    /// Smallest |eigenvalue| of `P`.
    pub fn min_abs_eigenvalue(&self) -> f64 {
        let es = eigh(&SymMatrix::new(self.p.clone()).expect("validated symmetric")).expect("small matrix");
        es.values.last().map_or(0.0, |v| v.abs())
    }

    /// `rank(P) = k` within [`RANK_TOL`].
    pub fn check_rank(&self) -> Result<()> {
        let m = self.min_abs_eigenvalue();
        if m > RANK_TOL {
            Ok(())
        } else {
            Err(Error::RankDeficient(m))
        }
    }

    /// Expected normalized degree of each class, `D_i = sum_l p_il r_l`.
    pub fn class_degrees(&self) -> Vec<f64> {
        (0..self.k()).map(|i| (0..self.k()).map(|l| self.p[(i, l)] * self.r[l]).sum()).collect()
    }

    /// Class sizes summing to `n` and proportional to `r` (largest
    /// remainder rounding, every class at least one vertex).
    pub fn proportional_sizes(&self, n: usize) -> Result<Vec<usize>> {
        let k = self.k();
        if n < k {
            return Err(Error::InvalidArgument(format!("n = {n} < k = {k}")));
        }
        let exact: Vec<f64> = self.r.iter().map(|&r| r * n as f64).collect();
        let mut sizes: Vec<usize> = exact.iter().map(|&x| (x.floor() as usize).max(1)).collect();
        while sizes.iter().sum::<usize>() > n {
            let i = (0..k).filter(|&i| sizes[i] > 1).max_by(|&a, &b| {
                (sizes[a] as f64 - exact[a]).total_cmp(&(sizes[b] as f64 - exact[b])).then(b.cmp(&a))
            });
            sizes[i.expect("n >= k")] -= 1;
        }
        while sizes.iter().sum::<usize>() < n {
            let i = (0..k)
                .max_by(|&a, &b| (exact[a] - sizes[a] as f64).total_cmp(&(exact[b] - sizes[b] as f64)).then(b.cmp(&a)))
                .expect("k >= 1");
            sizes[i] += 1;
        }
        Ok(sizes)
    }

    /// The `n x n` blow-up of `P`: constant `p_ij` on block `U_i x U_j`,
    /// vertices ordered by class, diagonal included.
    pub fn blow_up(&self, sizes: &[usize]) -> Result<SymMatrix> {
        let labels = self.block_labels(sizes)?;
        let n = labels.len();
        SymMatrix::from_fn(n, |u, v| self.p[(labels[u], labels[v])])
    }

    /// Deterministic weighted graph with block weights `p_ij` and zero
    /// diagonal (the blow-up minus its diagonal).
    pub fn blow_up_graph(&self, sizes: &[usize]) -> Result<WeightedGraph> {
        let labels = self.block_labels(sizes)?;
        let n = labels.len();
        WeightedGraph::new(Matrix::from_fn(n, n, |u, v| if u == v { 0.0 } else { self.p[(labels[u], labels[v])] }))
    }

    fn block_labels(&self, sizes: &[usize]) -> Result<Vec<usize>> {
        if sizes.len() != self.k() {
            return Err(Error::InvalidArgument(format!("expected {} block sizes, got {}", self.k(), sizes.len())));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidArgument("block sizes must be positive".into()));
        }
        Ok(sizes.iter().enumerate().flat_map(|(c, &s)| std::iter::repeat_n(c, s)).collect())
    }

    /// Nonzero spectrum of the blow-up: eigenvalues of
    /// `Delta^{1/2} P Delta^{1/2}`, `Delta = diag(sizes)`, sorted by magnitude.
    pub fn blowup_spectrum(&self, sizes: &[usize]) -> Result<Vec<f64>> {
        self.check_rank()?;
        self.block_labels(sizes)?;
        let k = self.k();
        let s: Vec<f64> = sizes.iter().map(|&x| (x as f64).sqrt()).collect();
        let m = SymMatrix::from_fn(k, |i, j| s[i] * self.p[(i, j)] * s[j])?;
        Ok(eigh(&m)?.values)
    }

    /// Surrogate for the limiting normalized modularity spectrum.
    ///
    /// `B_ij = p_ij sqrt(r_i r_j) / sqrt(D_i D_j)` is the normalized
    /// adjacency of the blow-up restricted to step vectors; it has the
    /// trivial eigenvector `sqrt(r_i D_i)` with eigenvalue 1, and its other
    /// `k - 1` eigenvalues are the structural values.
    pub fn model_spectrum(&self) -> Result<ModelSpectrum> {
        self.check_rank()?;
        let k = self.k();
        let deg = self.class_degrees();
        if let Some(i) = deg.iter().position(|&d| d <= 0.0) {
            return Err(Error::IsolatedClass(i));
        }
        let b = SymMatrix::from_fn(k, |i, j| self.p[(i, j)] * (self.r[i] * self.r[j] / (deg[i] * deg[j])).sqrt())?;
        let es = eigh(&b)?;
        let trivial: Vec<f64> = (0..k).map(|i| (self.r[i] * deg[i]).sqrt()).collect();
        let norm = trivial.iter().map(|x| x * x).sum::<f64>().sqrt();
        let overlap = |c: usize| (0..k).map(|i| es.vectors[(i, c)] * trivial[i]).sum::<f64>().abs() / norm;
        let t = (0..k).max_by(|&a, &b| overlap(a).total_cmp(&overlap(b)).then(b.cmp(&a))).expect("k >= 1");
        let structural_values = (0..k).filter(|&c| c != t).map(|c| es.values[c]).collect();
        Ok(ModelSpectrum { trivial_value: es.values[t], structural_values })
    }

    /// Class index of the point `x` in `[0, 1)` on the interval split
    /// `r_1, ..., r_k`.
    pub fn class_of(&self, x: f64) -> usize {
        let mut acc = 0.0;
        for (i, &r) in self.r.iter().enumerate() {
            acc += r;
            if x < acc {
                return i;
            }
        }
        self.k() - 1
    }

    /// Step-function graphon `W_H(x, y)`.
    pub fn graphon_value(&self, x: f64, y: f64) -> f64 {
        self.p[(self.class_of(x), self.class_of(y))]
    }

    /// `t(F, W_H) = sum over psi: V(F) -> [k] of prod r_psi(i) prod p_psi(i)psi(j)`.
    pub fn hom_density(&self, f: &SimpleGraphPattern) -> Result<f64> {
        let s = f.vertex_count();
        if s > MAX_MODEL_PATTERN {
            return Err(Error::PatternTooLarge(s, MAX_MODEL_PATTERN));
        }
        let k = self.k();
        let mut psi = vec![0usize; s];
        let mut total = 0.0;
        loop {
            let mut term: f64 = psi.iter().map(|&c| self.r[c]).product();
            for &(a, b) in f.edges() {
                term *= self.p[(psi[a], psi[b])];
            }
            total += term;
            let mut pos = 0;
            loop {
                if pos == s {
                    return Ok(total);
                }
                psi[pos] += 1;
                if psi[pos] < k {
                    break;
                }
                psi[pos] = 0;
                pos += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigh;

    fn standard() -> ModelGraph {
        ModelGraph::from_rows(vec![0.5, 0.5], &[vec![0.8, 0.1], vec![0.1, 0.7]]).unwrap()
    }

    #[test]
    fn validation_names_invariant() {
        let e = ModelGraph::from_rows(vec![0.5, 0.6], &[vec![0.8, 0.1], vec![0.1, 0.7]]).unwrap_err();
        assert!(e.to_string().contains("sum(r) = 1"));
        let e = ModelGraph::from_rows(vec![1.0], &[vec![1.5]]).unwrap_err();
        assert!(e.to_string().contains("0 <= p_ij <= 1"));
        let e = ModelGraph::from_rows(vec![0.5, 0.5], &[vec![0.8, 0.2], vec![0.1, 0.7]]).unwrap_err();
        assert!(e.to_string().contains("P symmetric"));
        let e = ModelGraph::from_json(r#"{"k":2,"r":[1.0],"P":[[1]]}"#).unwrap_err();
        assert!(e.to_string().contains("len(r) = k"));
        let ones = ModelGraph::from_rows(vec![0.5, 0.5], &[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(ones.check_rank(), Err(Error::RankDeficient(_))));
        assert!(matches!(ones.model_spectrum(), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn json_round_trip() {
        let m = standard();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"P\""));
        assert_eq!(ModelGraph::from_json(&text).unwrap(), m);
    }

    #[test]
    fn blow_up_blocks() {
        let b = standard().blow_up(&[2, 2]).unwrap();
        assert_eq!(b[(0, 3)], 0.1);
        assert_eq!(b[(0, 1)], 0.8);
        assert_eq!(b[(3, 3)], 0.7);
        let unit = standard().blow_up(&[1, 1]).unwrap();
        assert_eq!(unit.matrix(), standard().p_matrix());
    }

    #[test]
    fn blowup_spectrum_oracle() {
        let m = standard();
        let vals = m.blowup_spectrum(&[200, 200]).unwrap();
        // 200 * eig(P), eig(P) = 0.75 +- sqrt(0.0025 + 0.01)
        let disc = (0.05f64.powi(2) + 0.01).sqrt();
        assert!((vals[0] - 200.0 * (0.75 + disc)).abs() < 1e-9);
        assert!((vals[1] - 200.0 * (0.75 - disc)).abs() < 1e-9);
        assert!((vals[0] - 172.36).abs() < 0.01 && (vals[1] - 127.64).abs() < 0.01);
        let direct = eigh(&m.blow_up(&[200, 200]).unwrap()).unwrap();
        assert!((direct.values[0] - vals[0]).abs() < 1e-8);
        assert!((direct.values[1] - vals[1]).abs() < 1e-8);
        assert!(direct.values[2].abs() < 1e-8);
        let one = ModelGraph::from_rows(vec![1.0], &[vec![0.3]]).unwrap();
        assert!((one.blowup_spectrum(&[50]).unwrap()[0] - 15.0).abs() < 1e-12);
    }

    #[test]
    fn blowup_spectrum_scales_linearly() {
        let m = standard();
        let a = m.blowup_spectrum(&[30, 70]).unwrap();
        let b = m.blowup_spectrum(&[90, 210]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((3.0 * x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn surrogate_spectrum() {
        let s = standard().model_spectrum().unwrap();
        assert!((s.trivial_value - 1.0).abs() < 1e-9);
        assert_eq!(s.structural_values.len(), 1);
        // det(B) = 0.8*0.5/0.45 * 0.7*0.5/0.4 - 0.05^2/(0.45*0.4); product of eigenvalues with 1
        let det = (0.4 / 0.45) * (0.35 / 0.4) - 0.0025 / 0.18;
        assert!((s.structural_values[0] - det).abs() < 1e-12);
        assert!((s.structural_values[0] - 0.7639).abs() < 1e-4);

        let sym = ModelGraph::from_rows(vec![0.5, 0.5], &[vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        assert!((sym.model_spectrum().unwrap().structural_values[0] - 0.6).abs() < 1e-12);

        let anti = ModelGraph::from_rows(vec![0.5, 0.5], &[vec![0.1, 0.8], vec![0.8, 0.1]]).unwrap();
        assert!((anti.model_spectrum().unwrap().structural_values[0] + 0.7 / 0.9).abs() < 1e-12);

        let one = ModelGraph::from_rows(vec![1.0], &[vec![0.4]]).unwrap().model_spectrum().unwrap();
        assert!(one.structural_values.is_empty());
        assert!((one.trivial_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_value_is_one_for_random_models() {
        let mut rng = crate::numerics::seeded_rng(5);
        for k in 1..6 {
            for _ in 0..10 {
                let raw: Vec<f64> = (0..k).map(|_| 0.1 + rng.uniform()).collect();
                let s: f64 = raw.iter().sum();
                let mut r: Vec<f64> = raw.iter().map(|x| x / s).collect();
                let head: f64 = r[..k - 1].iter().sum();
                r[k - 1] = 1.0 - head;
                let mut p = Matrix::zeros(k, k);
                for i in 0..k {
                    for j in i..k {
                        let x = rng.uniform();
                        p[(i, j)] = x;
                        p[(j, i)] = x;
                    }
                }
                let Ok(m) = ModelGraph::new(r, p) else { continue };
                if let Ok(s) = m.model_spectrum() {
                    assert!((s.trivial_value - 1.0).abs() < 1e-9);
                    assert!(s.structural_values.iter().all(|v| v.abs() <= 1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn graphon_lookup() {
        let m = standard();
        assert_eq!(m.graphon_value(0.25, 0.75), 0.1);
        assert_eq!(m.graphon_value(0.0, 0.0), 0.8);
        assert_eq!(m.graphon_value(0.6, 0.9), 0.7);
        assert_eq!(m.graphon_value(0.3, 0.8), m.graphon_value(0.8, 0.3));
    }

    #[test]
    fn model_densities() {
        let edge = SimpleGraphPattern::parse("K2").unwrap();
        let c4 = SimpleGraphPattern::parse("C4").unwrap();
        let one = ModelGraph::from_rows(vec![1.0], &[vec![0.3]]).unwrap();
        assert!((one.hom_density(&edge).unwrap() - 0.3).abs() < 1e-15);
        assert!((one.hom_density(&c4).unwrap() - 0.3f64.powi(4)).abs() < 1e-15);
        let d = standard().hom_density(&edge).unwrap();
        assert!((d - 0.425).abs() < 1e-15);
        let k1 = SimpleGraphPattern::parse("K1").unwrap();
        assert!((standard().hom_density(&k1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn isomorphic_patterns_agree() {
        let m = ModelGraph::from_rows(vec![0.2, 0.3, 0.5], &[vec![0.9, 0.1, 0.3], vec![0.1, 0.6, 0.2], vec![0.3, 0.2, 0.4]])
            .unwrap();
        let f = SimpleGraphPattern::new(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]).unwrap();
        let mut rng = crate::numerics::seeded_rng(8);
        let base = m.hom_density(&f).unwrap();
        for _ in 0..10 {
            let mut perm: Vec<usize> = (0..5).collect();
            for i in (1..5).rev() {
                perm.swap(i, rng.index(i + 1));
            }
            let g = f.relabeled(&perm);
            assert!((m.hom_density(&g).unwrap() - base).abs() < 1e-14);
        }
    }

    #[test]
    fn proportional_sizes_sum() {
        let m = ModelGraph::from_rows(vec![0.2, 0.3, 0.5], &[vec![0.9, 0.1, 0.3], vec![0.1, 0.6, 0.2], vec![0.3, 0.2, 0.4]])
            .unwrap();
        assert_eq!(m.proportional_sizes(10).unwrap(), vec![2, 3, 5]);
        assert_eq!(m.proportional_sizes(7).unwrap().iter().sum::<usize>(), 7);
        assert_eq!(m.proportional_sizes(3).unwrap(), vec![1, 1, 1]);
    }
}
