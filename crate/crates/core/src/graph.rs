//! Graph data model: symmetric weighted adjacency, volumes, cuts,
//! volume-densities, connectivity, vertex subsets and partitions.

use crate::error::{Error, Result};
use crate::numerics::{Matrix, SymMatrix};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

/// Undirected graph with a dense, symmetric, nonnegative weight matrix and
/// zero diagonal. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: Matrix,
    degrees: Vec<f64>,
    simple: bool,
    bits: Option<Vec<Vec<u64>>>,
}

impl WeightedGraph {
    pub fn new(weights: Matrix) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::InvalidGraph("weight matrix must be square".into()));
        }
        let n = weights.rows();
        for i in 0..n {
            for j in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidGraph(format!("weight a[{i}][{j}] = {w} is not a nonnegative real")));
                }
                if w != weights[(j, i)] {
                    return Err(Error::NotSymmetric((w - weights[(j, i)]).abs()));
                }
            }
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {i}")));
            }
        }
        let degrees = (0..n).map(|i| weights.row(i).iter().sum()).collect();
        let simple = weights.as_slice().iter().all(|&w| w == 0.0 || w == 1.0);
        let bits = simple.then(|| {
            let words = n.div_ceil(64);
            (0..n)
                .map(|i| {
                    let mut row = vec![0u64; words];
                    for j in 0..n {
                        if weights[(i, j)] == 1.0 {
                            row[j / 64] |= 1 << (j % 64);
                        }
                    }
                    row
                })
                .collect()
        });
        Ok(WeightedGraph { weights, degrees, simple, bits })
    }

    /// Builds a graph on `n` vertices from `(u, v, w)` triples; the
    /// symmetric entry is filled in. Repeated pairs are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = Matrix::zeros(n, n);
        let mut seen = BTreeSet::new();
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u},{v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u},{v})")));
            }
            m[(u, v)] = w;
            m[(v, u)] = w;
        }
        Self::new(m)
    }

    pub fn from_unit_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let triples: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::from_edges(n, &triples)
    }

    pub fn complete(n: usize) -> Self {
        Self::new(Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 })).expect("valid")
    }

    pub fn empty(n: usize) -> Self {
        Self::new(Matrix::zeros(n, n)).expect("valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_unit_edges(n, &edges).expect("valid")
    }

    /// `K_{a,b}` with sides `0..a` and `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let n = a + b;
        Self::new(Matrix::from_fn(n, n, |i, j| if (i < a) != (j < a) { 1.0 } else { 0.0 })).expect("valid")
    }

    /// Star with center 0 and `n - 1` leaves.
    pub fn star(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Self::from_unit_edges(n, &edges).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn adjacency(&self) -> SymMatrix {
        SymMatrix::new(self.weights.clone()).expect("graph weights are symmetric")
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    /// All weights in {0, 1}.
    pub fn is_simple(&self) -> bool {
        self.simple
    }

    /// Neighbourhood bitsets (simple graphs only).
    pub fn bit_rows(&self) -> Option<&[Vec<u64>]> {
        self.bits.as_deref()
    }

    pub fn total_weight(&self) -> f64 {
        self.degrees.iter().sum()
    }

    /// Number of edges (each unordered pair with positive weight once).
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n).map(|i| ((i + 1)..n).filter(|&j| self.weights[(i, j)] > 0.0).count()).sum()
    }

    /// Rescales weights so that `sum_ij a_ij = 1`.
    pub fn normalize_weights(&self) -> Result<WeightedGraph> {
        let total = self.total_weight();
        if total <= 0.0 {
            return Err(Error::EmptyGraph);
        }
        Ok(self.scaled(1.0 / total))
    }

    /// Every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> WeightedGraph {
        assert!(c > 0.0 && c.is_finite(), "scale factor must be positive");
        let w = self.weights.scale(c);
        WeightedGraph::new(w).expect("scaling preserves validity")
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> WeightedGraph {
        let n = self.n();
        let mut inv = vec![0; n];
        for (v, &p) in perm.iter().enumerate() {
            inv[p] = v;
        }
        WeightedGraph::new(Matrix::from_fn(n, n, |i, j| self.weights[(inv[i], inv[j])])).expect("valid")
    }

    pub fn volume(&self, x: &VertexSet) -> f64 {
        x.iter().map(|i| self.degrees[i]).sum()
    }

    /// `a(X, Y) = sum_{i in X} sum_{j in Y} a_ij`.
    pub fn weighted_cut(&self, x: &VertexSet, y: &VertexSet) -> f64 {
        self.weights.block_sum(x.members(), y.members())
    }

    /// `rho(X, Y) = a(X, Y) / (Vol(X) Vol(Y))`.
    pub fn volume_density(&self, x: &VertexSet, y: &VertexSet) -> Result<f64> {
        let vx = self.volume(x);
        let vy = self.volume(y);
        if vx <= 0.0 || vy <= 0.0 {
            return Err(Error::DegenerateSubset);
        }
        Ok(self.weighted_cut(x, y) / (vx * vy))
    }

    /// Connectivity of the positive-weight support graph.
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if !seen[v] && self.weights[(u, v)] > 0.0 {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }

    /// Edge-list text: a `# vertices: n` header, then one `u v` line per
    /// edge (`u v w` when the graph is weighted), `u < v`, lexicographic.
    pub fn to_edge_list(&self) -> String {
        let n = self.n();
        let mut out = format!("# vertices: {n}\n");
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[(i, j)];
                if w > 0.0 {
                    if self.simple {
                        let _ = writeln!(out, "{i} {j}");
                    } else {
                        let _ = writeln!(out, "{i} {j} {w}");
                    }
                }
            }
        }
        out
    }

    /// Parses the edge-list format: `u v [w]` per line with 0-based ids,
    /// `#` comments, optional `# vertices: n` header. Duplicate pairs are
    /// an error.
    pub fn parse_edge_list(text: &str) -> Result<WeightedGraph> {
        let mut declared = None;
        let mut edges = Vec::new();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let perr = |msg: String| Error::Parse { line: lineno + 1, msg };
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(rest) = comment.trim().strip_prefix("vertices:") {
                    declared = Some(rest.trim().parse::<usize>().map_err(|e| perr(e.to_string()))?);
                }
                continue;
            }
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(perr(format!("expected `u v [w]`, got `{line}`")));
            }
            let u: usize = fields[0].parse().map_err(|_| perr(format!("bad vertex id `{}`", fields[0])))?;
            let v: usize = fields[1].parse().map_err(|_| perr(format!("bad vertex id `{}`", fields[1])))?;
            let w: f64 = match fields.get(2) {
                Some(s) => s.parse().map_err(|_| perr(format!("bad weight `{s}`")))?,
                None => 1.0,
            };
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(perr(format!("duplicate edge ({u},{v})")));
            }
            edges.push((u, v, w));
        }
        let max_id = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
        let n = match declared {
            Some(d) if d < max_id => {
                return Err(Error::Parse { line: 1, msg: format!("declared {d} vertices but ids reach {}", max_id - 1) })
            }
            Some(d) => d,
            None => max_id,
        };
        WeightedGraph::from_edges(n, &edges)
    }
}

/// Subset of the vertex range, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(members: Vec<usize>, n: usize) -> Result<Self> {
        let mut m = members;
        m.sort_unstable();
        if m.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate vertex in subset".into()));
        }
        if m.last().is_some_and(|&v| v >= n) {
            return Err(Error::InvalidArgument(format!("vertex out of range for n = {n}")));
        }
        Ok(VertexSet(m))
    }

    pub fn all(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    /// Members of `base` selected by the bits of `mask`.
    pub fn from_mask(base: &[usize], mask: u64) -> Self {
        let mut m: Vec<usize> = base.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
        m.sort_unstable();
        VertexSet(m)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

/// Proper k-partition of `0..n`: labels in `0..k`, no empty cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// `k` is inferred as `max label + 1`.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(labels, k)
    }

    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.is_empty() || k == 0 {
            return Err(Error::InvalidPartition("empty partition".into()));
        }
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            if l >= k {
                return Err(Error::InvalidPartition(format!("label {l} out of range for k = {k}")));
            }
            sizes[l] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidPartition(format!("cluster {empty} is empty")));
        }
        Ok(Partition { labels, k })
    }

    /// Contiguous blocks: the first `sizes[0]` vertices form cluster 0, etc.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let labels = sizes.iter().enumerate().flat_map(|(c, &s)| std::iter::repeat_n(c, s)).collect();
        Self::new(labels, sizes.len())
    }

    pub fn trivial(n: usize) -> Self {
        Partition { labels: vec![0; n], k: 1 }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// Members of each cluster in increasing vertex order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.k];
        for (v, &l) in self.labels.iter().enumerate() {
            c[l].push(v);
        }
        c
    }

    pub fn cluster_sets(&self) -> Vec<VertexSet> {
        self.clusters().into_iter().map(VertexSet).collect()
    }

    /// Relabels clusters in order of first occurrence.
    pub fn canonical(&self) -> Partition {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        Partition { labels, k: self.k }
    }

    pub fn ratios(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.sizes().into_iter().map(|s| s as f64 / n).collect()
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(labels: Vec<usize>) -> Result<Self> {
        Partition::from_labels(labels)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.labels
    }
}
