//! Exhaustive enumeration of small simple graphs up to isomorphism.
//!
//! Graphs on `n` vertices are grown from representatives on `n - 1`
//! vertices by attaching a new vertex to every possible neighborhood, then
//! deduplicated by a canonical code: the minimum edge bitmask over all
//! relabelings that list vertices by nondecreasing degree.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use std::collections::BTreeSet;

/// Largest supported vertex count (the edge bitmask must fit in `u32`).
pub const MAX_VERTICES: usize = 8;

fn pair_bit(i: usize, j: usize) -> u32 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    1 << (b * (b - 1) / 2 + a)
}

fn adjacency(n: usize, code: u32) -> Vec<u32> {
    let mut rows = vec![0u32; n];
    for b in 1..n {
        for a in 0..b {
            if code & pair_bit(a, b) != 0 {
                rows[a] |= 1 << b;
                rows[b] |= 1 << a;
            }
        }
    }
    rows
}

/// Isomorphism-invariant code of the graph with edge bitmask `code`.
pub fn canonical_code(n: usize, code: u32) -> u32 {
    let rows = adjacency(n, code);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (rows[v].count_ones(), v));
    // cell id of each position: positions with equal degree form one cell
    let cell_of_pos: Vec<u32> = order.iter().map(|&v| rows[v].count_ones()).collect();
    let mut best = u32::MAX;
    let mut perm = vec![0usize; n];
    let mut used = vec![false; n];
    search(0, n, &rows, &cell_of_pos, &mut perm, &mut used, 0, &mut best);
    best
}

#[allow(clippy::too_many_arguments)]
fn search(
    pos: usize,
    n: usize,
    rows: &[u32],
    cells: &[u32],
    perm: &mut [usize],
    used: &mut [bool],
    partial: u32,
    best: &mut u32,
) {
    if pos == n {
        *best = (*best).min(partial);
        return;
    }
    for v in 0..n {
        if used[v] || rows[v].count_ones() != cells[pos] {
            continue;
        }
        let mut code = partial;
        for (q, &w) in perm[..pos].iter().enumerate() {
            if rows[v] >> w & 1 == 1 {
                code |= pair_bit(q, pos);
            }
        }
        used[v] = true;
        perm[pos] = v;
        search(pos + 1, n, rows, cells, perm, used, code, best);
        used[v] = false;
    }
}

/// Canonical codes of every graph on `n` vertices, one per isomorphism class.
pub fn graph_codes(n: usize) -> Result<Vec<u32>> {
    if n > MAX_VERTICES {
        return Err(Error::CapExceeded { size: n, cap: MAX_VERTICES, hint: "graph enumeration is exhaustive" });
    }
    let mut classes: BTreeSet<u32> = BTreeSet::new();
    classes.insert(0);
    for m in 2..=n {
        let mut next = BTreeSet::new();
        for &c in &classes {
            for nbrs in 0u32..(1 << (m - 1)) {
                let mut code = c;
                for a in 0..m - 1 {
                    if nbrs >> a & 1 == 1 {
                        code |= pair_bit(a, m - 1);
                    }
                }
                next.insert(canonical_code(m, code));
            }
        }
        classes = next;
    }
    if n == 0 {
        return Ok(vec![]);
    }
    Ok(classes.into_iter().collect())
}

fn is_connected(n: usize, code: u32) -> bool {
    let rows = adjacency(n, code);
    let mut seen = 1u32;
    let mut frontier = 1u32;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = rows[v] & !seen;
        seen |= fresh;
        frontier |= fresh;
    }
    seen.count_ones() as usize == n
}

pub fn graph_from_code(n: usize, code: u32) -> WeightedGraph {
    let mut edges = Vec::new();
    for b in 1..n {
        for a in 0..b {
            if code & pair_bit(a, b) != 0 {
                edges.push((a, b));
            }
        }
    }
    WeightedGraph::from_unit_edges(n, &edges).expect("codes describe simple graphs")
}

/// One representative per isomorphism class of graphs on `n` vertices.
pub fn all_graphs(n: usize) -> Result<Vec<WeightedGraph>> {
    Ok(graph_codes(n)?.into_iter().map(|c| graph_from_code(n, c)).collect())
}

/// One representative per isomorphism class of connected graphs on `n` vertices.
pub fn connected_graphs(n: usize) -> Result<Vec<WeightedGraph>> {
    Ok(graph_codes(n)?.into_iter().filter(|&c| is_connected(n, c)).map(|c| graph_from_code(n, c)).collect())
}
