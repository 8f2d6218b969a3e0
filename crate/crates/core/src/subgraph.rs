//! Small-pattern statistics: homomorphism counts and densities, labelled
//! induced counts, per-class degrees and codegree deviations.

use crate::error::{Error, Result};
use crate::graph::{Partition, WeightedGraph};
use crate::numerics::Matrix;
use crate::par;
use serde::Serialize;

/// Largest pattern size accepted anywhere.
pub const MAX_PATTERN: usize = 8;

/// Default node budget for backtracking enumerations.
pub const DEFAULT_BUDGET: f64 = 2e9;

/// Simple graph on at most [`MAX_PATTERN`] vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimpleGraphPattern {
    s: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adj: Vec<u8>,
}

impl SimpleGraphPattern {
    pub fn new(s: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if s > MAX_PATTERN {
            return Err(Error::PatternTooLarge(s, MAX_PATTERN));
        }
        let mut adj = vec![0u8; s];
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= s || b >= s {
                return Err(Error::InvalidArgument(format!("pattern edge {a}-{b} out of range for {s} vertices")));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("pattern loop at {a}")));
            }
            if adj[a] >> b & 1 == 1 {
                return Err(Error::InvalidArgument(format!("repeated pattern edge {a}-{b}")));
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        Ok(SimpleGraphPattern { s, edges: list, adj })
    }

    /// Parses `C3`..`C8` (cycles), `K1`..`K5` (cliques), `P1`..`P8` (paths
    /// on that many vertices), `edge`, `vertex`, or `"s; u-v, u-v, ..."`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let bad = || Error::InvalidArgument(format!("unrecognised pattern '{t}'"));
        match t {
            "edge" => return Self::complete(2),
            "vertex" => return Self::complete(1),
            _ => {}
        }
        if let Some((head, tail)) = t.split_once(';') {
            let s: usize = head.trim().parse().map_err(|_| bad())?;
            let mut edges = Vec::new();
            for item in tail.split(',').map(str::trim).filter(|x| !x.is_empty()) {
                let (a, b) = item.split_once('-').ok_or_else(bad)?;
                edges.push((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?));
            }
            return Self::new(s, &edges);
        }
        let mut chars = t.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let size: usize = chars.as_str().parse().map_err(|_| bad())?;
        match kind {
            'C' if (3..=MAX_PATTERN).contains(&size) => Self::cycle(size),
            'K' if (1..=5).contains(&size) => Self::complete(size),
            'P' if (1..=MAX_PATTERN).contains(&size) => Self::path(size),
            _ => Err(bad()),
        }
    }

    pub fn cycle(t: usize) -> Result<Self> {
        if t < 3 {
            return Err(Error::InvalidArgument("cycles need at least 3 vertices".into()));
        }
        let edges: Vec<_> = (0..t).map(|i| (i, (i + 1) % t)).collect();
        Self::new(t, &edges)
    }

    pub fn complete(s: usize) -> Result<Self> {
        let edges: Vec<_> = (0..s).flat_map(|a| ((a + 1)..s).map(move |b| (a, b))).collect();
        Self::new(s, &edges)
    }

    pub fn path(s: usize) -> Result<Self> {
        let edges: Vec<_> = (1..s).map(|i| (i - 1, i)).collect();
        Self::new(s, &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.s
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adj[a].count_ones() as usize
    }

    /// Pattern with vertex `v` renamed to `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let edges: Vec<_> = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Self::new(self.s, &edges).expect("relabeling preserves validity")
    }

    /// Connected components as sorted vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = 0u8;
        let mut out = Vec::new();
        for start in 0..self.s {
            if seen >> start & 1 == 1 {
                continue;
            }
            let mut comp = 1u8 << start;
            let mut frontier = comp;
            while frontier != 0 {
                let v = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let fresh = self.adj[v] & !comp;
                comp |= fresh;
                frontier |= fresh;
            }
            seen |= comp;
            out.push((0..self.s).filter(|&v| comp >> v & 1 == 1).collect());
        }
        out
    }

    fn induced(&self, verts: &[usize]) -> Self {
        let mut index = [usize::MAX; MAX_PATTERN];
        for (i, &v) in verts.iter().enumerate() {
            index[v] = i;
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter(|&&(a, b)| index[a] != usize::MAX && index[b] != usize::MAX)
            .map(|&(a, b)| (index[a], index[b]))
            .collect();
        Self::new(verts.len(), &edges).expect("subpattern is valid")
    }

    fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// `Some(t)` if the pattern is the cycle `C_t`.
    pub fn as_cycle(&self) -> Option<usize> {
        (self.s >= 3 && self.is_connected() && (0..self.s).all(|v| self.degree(v) == 2)).then_some(self.s)
    }

    /// `Some(t)` if the pattern is the path on `t >= 1` vertices.
    pub fn as_path(&self) -> Option<usize> {
        (self.s >= 1 && self.is_connected() && self.edges.len() + 1 == self.s && (0..self.s).all(|v| self.degree(v) <= 2))
            .then_some(self.s)
    }
}

/// Number of edge-preserving maps `V(F) -> V(G)` (not necessarily
/// injective), with the default node budget.
pub fn hom_count(f: &SimpleGraphPattern, g: &WeightedGraph) -> Result<f64> {
    hom_count_with_budget(f, g, DEFAULT_BUDGET)
}

pub fn hom_count_with_budget(f: &SimpleGraphPattern, g: &WeightedGraph, budget: f64) -> Result<f64> {
    let bits = g.bit_rows().ok_or(Error::NotSimple)?;
    let mut total = 1.0;
    for comp in f.components() {
        let part = f.induced(&comp);
        total *= connected_hom(&part, g, bits, budget)? as f64;
    }
    Ok(total)
}

fn connected_hom(f: &SimpleGraphPattern, g: &WeightedGraph, bits: &[Vec<u64>], budget: f64) -> Result<u128> {
    let n = g.n();
    if let Some(t) = f.as_cycle() {
        return Ok(closed_walks(g, bits, t));
    }
    if let Some(t) = f.as_path() {
        return Ok(walks(g, t - 1));
    }
    let order = search_order(f);
    let estimate = node_estimate(f, &order, g, false);
    if estimate > budget {
        return Err(Error::BudgetExceeded { estimate, budget });
    }
    let first_candidates: Vec<usize> = (0..n).collect();
    let counts = par::map_slice(&first_candidates, |&v0| {
        let mut phi = vec![usize::MAX; f.s];
        phi[order[0]] = v0;
        backtrack(f, &order, 1, &mut phi, bits, n, None)
    });
    Ok(counts.iter().sum())
}

fn walk_matrix_step(g: &WeightedGraph, bits: &[Vec<u64>], w: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let n = g.n();
    par::map_indexed(n, |i| {
        (0..n)
            .map(|j| {
                let mut acc = 0u64;
                for (word, &b) in bits[j].iter().enumerate() {
                    let mut b = b;
                    while b != 0 {
                        let l = word * 64 + b.trailing_zeros() as usize;
                        acc += w[i][l];
                        b &= b - 1;
                    }
                }
                acc
            })
            .collect()
    })
}

/// `trace(A^t)` from `A^a` and `A^b`, `a + b = t`, in exact integers.
fn closed_walks(g: &WeightedGraph, bits: &[Vec<u64>], t: usize) -> u128 {
    let n = g.n();
    let a = t / 2;
    let b = t - a;
    let mut powers: Vec<Vec<Vec<u64>>> = Vec::with_capacity(b);
    let first: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| bits[i][j / 64] >> (j % 64) & 1).collect()).collect();
    powers.push(first);
    while powers.len() < b {
        let next = walk_matrix_step(g, bits, powers.last().expect("nonempty"));
        powers.push(next);
    }
    let pa = &powers[a - 1];
    let pb = &powers[b - 1];
    let mut total = 0u128;
    for i in 0..n {
        for j in 0..n {
            total += pa[i][j] as u128 * pb[i][j] as u128;
        }
    }
    total
}

/// `1^T A^len 1`: number of walks with `len` edges.
fn walks(g: &WeightedGraph, len: usize) -> u128 {
    let n = g.n();
    let bits = g.bit_rows().expect("simple");
    let mut x = vec![1u128; n];
    for _ in 0..len {
        x = (0..n)
            .map(|i| {
                let mut acc = 0u128;
                for (word, &b) in bits[i].iter().enumerate() {
                    let mut b = b;
                    while b != 0 {
                        acc += x[word * 64 + b.trailing_zeros() as usize];
                        b &= b - 1;
                    }
                }
                acc
            })
            .collect();
    }
    x.iter().sum()
}

/// Pattern vertices ordered so each one after the first has as many
/// already placed neighbours as possible; ties go to higher degree.
fn search_order(f: &SimpleGraphPattern) -> Vec<usize> {
    let mut order = Vec::with_capacity(f.s);
    let mut placed = 0u8;
    while order.len() < f.s {
        let next = (0..f.s)
            .filter(|&v| placed >> v & 1 == 0)
            .max_by_key(|&v| ((f.adj[v] & placed).count_ones(), f.degree(v), std::cmp::Reverse(v)))
            .expect("unplaced vertex exists");
        order.push(next);
        placed |= 1 << next;
    }
    order
}

/// Expected number of search nodes for a random graph of the same density.
fn node_estimate(f: &SimpleGraphPattern, order: &[usize], g: &WeightedGraph, induced: bool) -> f64 {
    let n = g.n() as f64;
    let p = if g.n() < 2 { 0.0 } else { 2.0 * g.edge_count() as f64 / (n * (n - 1.0)) };
    let mut nodes = 1.0;
    let mut level = 1.0;
    for (pos, &v) in order.iter().enumerate().take(order.len().saturating_sub(1)) {
        let mut width = n;
        for &u in &order[..pos] {
            if f.has_edge(u, v) {
                width *= p;
            } else if induced {
                width *= 1.0 - p;
            }
        }
        level *= width.max(1.0);
        nodes += level;
    }
    nodes
}

fn backtrack(
    f: &SimpleGraphPattern,
    order: &[usize],
    pos: usize,
    phi: &mut [usize],
    bits: &[Vec<u64>],
    n: usize,
    used: Option<&mut Vec<u64>>,
) -> u128 {
    if pos == order.len() {
        return 1;
    }
    let v = order[pos];
    let words = n.div_ceil(64);
    let mut cand: Vec<u64> = vec![u64::MAX; words];
    if n % 64 != 0 {
        cand[words - 1] = (1u64 << (n % 64)) - 1;
    }
    let induced = used.is_some();
    for &u in &order[..pos] {
        let row = &bits[phi[u]];
        if f.has_edge(u, v) {
            cand.iter_mut().zip(row).for_each(|(c, r)| *c &= r);
        } else if induced {
            cand.iter_mut().zip(row).for_each(|(c, r)| *c &= !r);
        }
    }
    if let Some(used) = used.as_deref() {
        cand.iter_mut().zip(used).for_each(|(c, u)| *c &= !u);
    }
    if pos + 1 == order.len() {
        return cand.iter().map(|w| w.count_ones() as u128).sum();
    }
    let mut total = 0u128;
    let mut used = used;
    for (word, &c) in cand.iter().enumerate() {
        let mut c = c;
        while c != 0 {
            let x = word * 64 + c.trailing_zeros() as usize;
            c &= c - 1;
            phi[v] = x;
            match used.as_deref_mut() {
                Some(u) => {
                    u[x / 64] |= 1 << (x % 64);
                    total += backtrack(f, order, pos + 1, phi, bits, n, Some(u));
                    u[x / 64] &= !(1 << (x % 64));
                }
                None => total += backtrack(f, order, pos + 1, phi, bits, n, None),
            }
        }
    }
    total
}

/// `hom(F, G) / n^s`.
pub fn hom_density(f: &SimpleGraphPattern, g: &WeightedGraph) -> Result<f64> {
    let count = hom_count(f, g)?;
    Ok(count / (g.n() as f64).powi(f.vertex_count() as i32))
}

/// Number of ordered injective `s`-tuples whose induced subgraph is exactly
/// `m` (labelled induced copies).
pub fn induced_count(m: &SimpleGraphPattern, g: &WeightedGraph) -> Result<u128> {
    induced_count_with_budget(m, g, DEFAULT_BUDGET)
}

pub fn induced_count_with_budget(m: &SimpleGraphPattern, g: &WeightedGraph, budget: f64) -> Result<u128> {
    let bits = g.bit_rows().ok_or(Error::NotSimple)?;
    let n = g.n();
    if m.s == 0 {
        return Ok(1);
    }
    if m.s > n {
        return Ok(0);
    }
    let order = search_order(m);
    let estimate = node_estimate(m, &order, g, true);
    if estimate > budget {
        return Err(Error::BudgetExceeded { estimate, budget });
    }
    let starts: Vec<usize> = (0..n).collect();
    let counts = par::map_slice(&starts, |&v0| {
        let mut phi = vec![usize::MAX; m.s];
        phi[order[0]] = v0;
        let mut used = vec![0u64; n.div_ceil(64)];
        used[v0 / 64] |= 1 << (v0 % 64);
        backtrack(m, &order, 1, &mut phi, bits, n, Some(&mut used))
    });
    Ok(counts.iter().sum())
}

/// Per-vertex class degrees `N_1(u; U_j)` and block densities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterDegrees {
    /// `n x k`: weight from `u` into class `j`.
    pub table: Vec<Vec<f64>>,
    /// `k x k`: `a(U_i, U_j) / (|U_i| |U_j|)`, ordered pairs.
    pub densities: Vec<Vec<f64>>,
}

pub fn cluster_degrees(g: &WeightedGraph, p: &Partition) -> Result<ClusterDegrees> {
    check_partition(g, p)?;
    let k = p.k();
    let table: Vec<Vec<f64>> = (0..g.n())
        .map(|u| {
            let mut row = vec![0.0; k];
            for (t, &w) in g.weights().row(u).iter().enumerate() {
                row[p.label(t)] += w;
            }
            row
        })
        .collect();
    let sizes = p.sizes();
    let mut block = vec![vec![0.0; k]; k];
    for (u, row) in table.iter().enumerate() {
        for j in 0..k {
            block[p.label(u)][j] += row[j];
        }
    }
    let densities =
        (0..k).map(|i| (0..k).map(|j| block[i][j] / (sizes[i] as f64 * sizes[j] as f64)).collect()).collect();
    Ok(ClusterDegrees { table, densities })
}

fn check_partition(g: &WeightedGraph, p: &Partition) -> Result<()> {
    if p.n() != g.n() {
        return Err(Error::InvalidPartition(format!("partition covers {} vertices, graph has {}", p.n(), g.n())));
    }
    Ok(())
}

/// Source of the reference probabilities in a codegree report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    Model,
    Estimate,
}

/// Codegree statistics for one ordered class pair `(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodegreeBlock {
    pub i: usize,
    pub j: usize,
    /// Reference probability `p_ij`.
    pub p: f64,
    /// `sum_{u,v in U_i} |N_2(u,v;U_j) - p^2 n_j|`, including `u = v`.
    pub sum_abs_deviation: f64,
    /// Deviation divided by `n^3`.
    pub normalized: f64,
    /// Deviation divided by `p^2 n_i^2 n_j`; `None` when `p = 0`.
    pub relative: Option<f64>,
    /// `sum_{u,v in U_i} N_2(u,v;U_j)`.
    pub codegree_sum: f64,
    /// `sum_{t in U_j} N_1(t;U_i)^2`.
    pub squared_degree_sum: f64,
    /// `a(U_i, U_j)` summed over ordered pairs.
    pub block_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodegreeReport {
    pub blocks: Vec<CodegreeBlock>,
    pub degree_table: Vec<Vec<f64>>,
    pub source: ReferenceSource,
    pub max_normalized: f64,
    pub max_relative: Option<f64>,
}

/// Codegree deviations against `p_hat`, or against observed block
/// densities when `p_hat` is `None`.
pub fn codegree_report(g: &WeightedGraph, p: &Partition, p_hat: Option<&Matrix>) -> Result<CodegreeReport> {
    let degrees = cluster_degrees(g, p)?;
    let k = p.k();
    let (reference, source) = match p_hat {
        Some(m) => {
            if m.rows() != k || m.cols() != k {
                return Err(Error::InvalidArgument(format!("reference matrix must be {k} x {k}")));
            }
            (m.to_rows(), ReferenceSource::Model)
        }
        None => (degrees.densities.clone(), ReferenceSource::Estimate),
    };
    let n = g.n() as f64;
    let clusters = p.clusters();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    let blocks = par::map_slice(&pairs, |&(i, j)| {
        let ui = &clusters[i];
        let uj = &clusters[j];
        let pij = reference[i][j];
        let target = pij * pij * uj.len() as f64;
        let codeg = block_codegrees(g, ui, uj);
        let mut dev = 0.0;
        let mut sum = 0.0;
        for &c in &codeg {
            dev += (c - target).abs();
            sum += c;
        }
        let squared_degree_sum = uj.iter().map(|&t| degrees.table[t][i].powi(2)).sum();
        let block_weight = ui.iter().map(|&u| degrees.table[u][j]).sum();
        let denom = pij * pij * (ui.len() as f64).powi(2) * uj.len() as f64;
        CodegreeBlock {
            i,
            j,
            p: pij,
            sum_abs_deviation: dev,
            normalized: dev / n.powi(3),
            relative: (denom > 0.0).then(|| dev / denom),
            codegree_sum: sum,
            squared_degree_sum,
            block_weight,
        }
    });
    let max_normalized = blocks.iter().map(|b| b.normalized).fold(0.0, f64::max);
    let max_relative = blocks.iter().map(|b| b.relative).try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)));
    Ok(CodegreeReport { blocks, degree_table: degrees.table, source, max_normalized, max_relative })
}

/// `N_2(u, v; U_j)` for all ordered `u, v in U_i`, row-major.
fn block_codegrees(g: &WeightedGraph, ui: &[usize], uj: &[usize]) -> Vec<f64> {
    let m = ui.len();
    if let Some(bits) = g.bit_rows() {
        let words = g.n().div_ceil(64);
        let mut mask = vec![0u64; words];
        for &t in uj {
            mask[t / 64] |= 1 << (t % 64);
        }
        let rows: Vec<Vec<u64>> = ui.iter().map(|&u| bits[u].iter().zip(&mask).map(|(a, b)| a & b).collect()).collect();
        let mut out = vec![0.0; m * m];
        for a in 0..m {
            for b in a..m {
                let c: u32 = rows[a].iter().zip(&rows[b]).map(|(x, y)| (x & y).count_ones()).sum();
                out[a * m + b] = c as f64;
                out[b * m + a] = c as f64;
            }
        }
        out
    } else {
        let w = g.weights();
        let rows: Vec<Vec<f64>> = ui.iter().map(|&u| uj.iter().map(|&t| w[(u, t)]).collect()).collect();
        let mut out = vec![0.0; m * m];
        for a in 0..m {
            for b in a..m {
                let c: f64 = rows[a].iter().zip(&rows[b]).map(|(x, y)| x * y).sum();
                out[a * m + b] = c;
                out[b * m + a] = c;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{eigh, seeded_rng};
    use proptest::prelude::*;

    fn random_graph(n: usize, p: f64, seed: u64) -> WeightedGraph {
        let mut rng = seeded_rng(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.bernoulli(p) {
                    edges.push((u, v));
                }
            }
        }
        WeightedGraph::from_unit_edges(n, &edges).unwrap()
    }

    /// Plain `n^s` enumeration.
    fn brute_hom(f: &SimpleGraphPattern, g: &WeightedGraph) -> u64 {
        let n = g.n();
        let s = f.vertex_count();
        let mut phi = vec![0usize; s];
        let mut count = 0;
        loop {
            if f.edges().iter().all(|&(a, b)| g.weight(phi[a], phi[b]) == 1.0) {
                count += 1;
            }
            let mut pos = 0;
            loop {
                if pos == s {
                    return count;
                }
                phi[pos] += 1;
                if phi[pos] < n {
                    break;
                }
                phi[pos] = 0;
                pos += 1;
            }
        }
    }

    fn brute_induced(m: &SimpleGraphPattern, g: &WeightedGraph) -> u64 {
        let n = g.n();
        let s = m.vertex_count();
        let mut count = 0;
        let mut phi = vec![0usize; s];
        fn rec(m: &SimpleGraphPattern, g: &WeightedGraph, phi: &mut Vec<usize>, pos: usize, count: &mut u64) {
            if pos == phi.len() {
                *count += 1;
                return;
            }
            for x in 0..g.n() {
                if phi[..pos].contains(&x) {
                    continue;
                }
                if (0..pos).all(|q| (g.weight(phi[q], x) == 1.0) == m.has_edge(q, pos)) {
                    phi[pos] = x;
                    rec(m, g, phi, pos + 1, count);
                }
            }
        }
        let _ = n;
        rec(m, g, &mut phi, 0, &mut count);
        count
    }

    #[test]
    fn parse_aliases() {
        assert_eq!(SimpleGraphPattern::parse("C4").unwrap().edge_count(), 4);
        assert_eq!(SimpleGraphPattern::parse("K5").unwrap().edge_count(), 10);
        assert_eq!(SimpleGraphPattern::parse("P3").unwrap().edges(), &[(0, 1), (1, 2)]);
        assert_eq!(SimpleGraphPattern::parse("edge").unwrap(), SimpleGraphPattern::parse("K2").unwrap());
        let star = SimpleGraphPattern::parse("4; 0-1, 0-2, 0-3").unwrap();
        assert_eq!(star.degree(0), 3);
        assert_eq!(SimpleGraphPattern::parse("3;").unwrap().edge_count(), 0);
        assert!(SimpleGraphPattern::parse("C9").is_err());
        assert!(SimpleGraphPattern::parse("K6").is_err());
        assert!(SimpleGraphPattern::parse("2; 0-0").is_err());
        assert!(SimpleGraphPattern::parse("3; 0-1, 1-0").is_err());
        assert!(matches!(SimpleGraphPattern::new(9, &[]), Err(Error::PatternTooLarge(9, 8))));
    }

    #[test]
    fn hom_c4_k3_is_18() {
        let c4 = SimpleGraphPattern::cycle(4).unwrap();
        let k3 = WeightedGraph::complete(3);
        assert_eq!(hom_count(&c4, &k3).unwrap(), 18.0);
        assert_eq!(brute_hom(&c4, &k3), 18);
    }

    #[test]
    fn hom_simple_cases() {
        let g = random_graph(12, 0.4, 3);
        let edge = SimpleGraphPattern::complete(2).unwrap();
        assert_eq!(hom_count(&edge, &g).unwrap(), 2.0 * g.edge_count() as f64);
        let empty = WeightedGraph::empty(6);
        for name in ["edge", "C3", "C5", "K4", "P4", "4; 0-1, 0-2, 0-3"] {
            assert_eq!(hom_count(&SimpleGraphPattern::parse(name).unwrap(), &empty).unwrap(), 0.0);
        }
        assert_eq!(hom_density(&SimpleGraphPattern::complete(1).unwrap(), &g).unwrap(), 1.0);
        let weighted = WeightedGraph::from_edges(3, &[(0, 1, 0.5)]).unwrap();
        assert!(matches!(hom_count(&edge, &weighted), Err(Error::NotSimple)));
    }

    #[test]
    fn complete_graph_c4_density() {
        let n = 9usize;
        let d = hom_density(&SimpleGraphPattern::cycle(4).unwrap(), &WeightedGraph::complete(n)).unwrap();
        let m = (n - 1) as f64;
        assert!((d - (m.powi(4) + m) / (n as f64).powi(4)).abs() < 1e-15);
    }

    #[test]
    fn general_patterns_match_brute_force() {
        let patterns = [
            "K4",
            "4; 0-1, 0-2, 0-3",
            "4; 0-1, 1-2, 2-0, 2-3",
            "5; 0-1, 1-2, 2-3, 3-0, 0-2",
            "5; 0-1, 2-3",
            "3; 0-1",
            "P4",
            "C5",
            "2;",
        ];
        for seed in 0..4 {
            let g = random_graph(9, 0.5, seed);
            for name in patterns {
                let f = SimpleGraphPattern::parse(name).unwrap();
                assert_eq!(hom_count(&f, &g).unwrap(), brute_hom(&f, &g) as f64, "{name} seed {seed}");
            }
        }
    }

    #[test]
    fn cycle_counts_match_spectrum() {
        for seed in 0..5 {
            let g = random_graph(20, 0.3, 100 + seed);
            let eig = eigh(&g.adjacency()).unwrap();
            for t in 3..=8 {
                let direct = hom_count(&SimpleGraphPattern::cycle(t).unwrap(), &g).unwrap();
                let spectral: f64 = eig.values.iter().map(|l| l.powi(t as i32)).sum();
                assert!((direct - spectral).abs() <= 1e-6 * direct.abs().max(1.0), "t={t}");
            }
        }
    }

    #[test]
    fn budget_guard() {
        let g = random_graph(60, 0.5, 2);
        let f = SimpleGraphPattern::parse("4; 0-1, 0-2, 0-3").unwrap();
        assert!(matches!(hom_count_with_budget(&f, &g, 10.0), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(induced_count_with_budget(&f, &g, 10.0), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn induced_examples() {
        let k3 = WeightedGraph::complete(3);
        assert_eq!(induced_count(&SimpleGraphPattern::complete(2).unwrap(), &k3).unwrap(), 6);
        assert_eq!(induced_count(&SimpleGraphPattern::parse("2;").unwrap(), &k3).unwrap(), 0);
        for seed in 0..3 {
            let g = random_graph(8, 0.5, 40 + seed);
            for name in ["P3", "3;", "C4", "K3", "4; 0-1, 0-2, 0-3", "4; 0-1"] {
                let m = SimpleGraphPattern::parse(name).unwrap();
                assert_eq!(induced_count(&m, &g).unwrap() as u64, brute_induced(&m, &g), "{name}");
            }
        }
    }

    #[test]
    fn induced_edge_density_random() {
        let g = random_graph(100, 0.5, 9);
        let c = induced_count(&SimpleGraphPattern::complete(2).unwrap(), &g).unwrap() as f64;
        assert!((c / (100.0 * 99.0) - 0.5).abs() <= 0.05);
    }

    #[test]
    fn cliques_agree_between_counters() {
        for seed in 0..3 {
            let g = random_graph(14, 0.6, 70 + seed);
            for s in 2..=4 {
                let k = SimpleGraphPattern::complete(s).unwrap();
                // every hom of K_s is injective, and every ordered s-clique is an induced K_s
                assert_eq!(induced_count(&k, &g).unwrap() as f64, hom_count(&k, &g).unwrap());
            }
        }
    }

    #[test]
    fn cluster_degree_examples() {
        let g = WeightedGraph::complete_bipartite(2, 2);
        let p = Partition::from_sizes(&[2, 2]).unwrap();
        let cd = cluster_degrees(&g, &p).unwrap();
        for u in 0..4 {
            let own = p.label(u);
            assert_eq!(cd.table[u][own], 0.0);
            assert_eq!(cd.table[u][1 - own], 2.0);
        }
        assert_eq!(cd.densities[0][1], 1.0);
        assert_eq!(cd.densities[0][0], 0.0);
    }

    #[test]
    fn c4_codegrees() {
        let g = WeightedGraph::cycle(4);
        let codeg = block_codegrees(&g, &[0, 1, 2, 3], &[0, 1, 2, 3]);
        assert_eq!(codeg[2], 2.0);
        assert_eq!(codeg[1], 0.0);
        assert_eq!(codeg[0], 2.0);
    }

    #[test]
    fn complete_graph_piv_value() {
        let n = 20;
        let g = WeightedGraph::complete(n);
        let p = Partition::trivial(n);
        let r = codegree_report(&g, &p, Some(&Matrix::from_rows(&[vec![1.0]]).unwrap())).unwrap();
        let nf = n as f64;
        let exact = (2.0 * nf * (nf - 1.0) + nf) / nf.powi(3);
        assert!((r.max_normalized - exact).abs() < 1e-15);
        assert_eq!(r.source, ReferenceSource::Model);
    }

    #[test]
    fn weighted_codegrees_use_products() {
        let g = WeightedGraph::from_edges(3, &[(0, 2, 0.5), (1, 2, 2.0)]).unwrap();
        let p = Partition::trivial(3);
        let r = codegree_report(&g, &p, None).unwrap();
        assert_eq!(r.source, ReferenceSource::Estimate);
        assert!((r.blocks[0].codegree_sum - r.blocks[0].squared_degree_sum).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn codegree_identities(seed in 0u64..1000, n in 4usize..30, k in 1usize..4) {
            let g = random_graph(n, 0.4, seed);
            let mut rng = seeded_rng(seed ^ 0xabc);
            let mut labels: Vec<usize> = (0..n).map(|v| if v < k { v } else { rng.index(k) }).collect();
            labels.rotate_left(seed as usize % n);
            let p = Partition::new(labels, k).unwrap();
            let r = codegree_report(&g, &p, None).unwrap();
            let sizes = p.sizes();
            for b in &r.blocks {
                let s = b.codegree_sum as u128;
                prop_assert_eq!(s, b.squared_degree_sum as u128);
                let e = b.block_weight as u128;
                prop_assert!(s * sizes[b.j] as u128 >= e * e);
                if b.i == b.j {
                    prop_assert!(s * sizes[b.i] as u128 >= e * e);
                }
                prop_assert!(b.sum_abs_deviation >= 0.0);
            }
        }
    }
}
