use super::{spectral_norm, Matrix, SymMatrix};
use crate::error::{Error, Result};
use crate::par;

/// Default cap on `rows + cols` for exact cut-norm enumeration.
pub const DEFAULT_CUT_CAP: usize = 24;

// Number of leading subset bits fixed per parallel chunk.
const CHUNK_BITS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct CutNorm {
    pub value: f64,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Exact cut norm `max_{X,Y} |sum_{i in X, j in Y} m_ij|`.
///
/// Enumerates subsets of the shorter side in Gray-code order with running
/// column sums; for a fixed `X` the optimal `Y` takes every column whose
/// restricted sum has the winning sign. The reported value is re-summed
/// from the witness.
pub fn cut_norm_exact(m: &Matrix, cap: usize) -> Result<CutNorm> {
    let total = m.rows() + m.cols();
    if total > cap {
        return Err(Error::CapExceeded { size: total, cap, hint: "use cut_norm_bound" });
    }
    let transposed = m.rows() > m.cols();
    let work = if transposed { m.transpose() } else { m.clone() };
    let bits = work.rows();
    if bits == 0 || work.cols() == 0 {
        return Ok(CutNorm { value: 0.0, rows: vec![], cols: vec![] });
    }
    let top = bits.min(CHUNK_BITS);
    let low = bits - top;
    let chunks = par::map_indexed(1usize << top, |prefix| best_in_chunk(&work, prefix << low, low));
    let mut best = (0.0f64, 0u64, true);
    for c in chunks {
        if c.0 > best.0 {
            best = c;
        }
    }
    let (_, mask, positive) = best;
    let x: Vec<usize> = (0..bits).filter(|&i| mask >> i & 1 == 1).collect();
    let y: Vec<usize> = (0..work.cols())
        .filter(|&j| {
            let s: f64 = x.iter().map(|&i| work[(i, j)]).sum();
            if positive {
                s > 0.0
            } else {
                s < 0.0
            }
        })
        .collect();
    let (rows, cols) = if transposed { (y, x) } else { (x, y) };
    let value = m.block_sum(&rows, &cols).abs();
    Ok(CutNorm { value, rows, cols })
}

fn best_in_chunk(m: &Matrix, start: usize, low: usize) -> (f64, u64, bool) {
    let cols = m.cols();
    let mut mask = start as u64;
    let mut sums = vec![0.0; cols];
    for i in 0..m.rows() {
        if mask >> i & 1 == 1 {
            for (s, v) in sums.iter_mut().zip(m.row(i)) {
                *s += v;
            }
        }
    }
    let eval = |sums: &[f64]| {
        let (mut pos, mut neg) = (0.0, 0.0);
        for &s in sums {
            if s > 0.0 {
                pos += s;
            } else {
                neg -= s;
            }
        }
        if pos >= neg {
            (pos, true)
        } else {
            (neg, false)
        }
    };
    let (v, sign) = eval(&sums);
    let mut best = (v, mask, sign);
    for step in 1u64..(1u64 << low) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        let add = mask >> bit & 1 == 1;
        for (s, v) in sums.iter_mut().zip(m.row(bit)) {
            if add {
                *s += v;
            } else {
                *s -= v;
            }
        }
        let (v, sign) = eval(&sums);
        if v > best.0 {
            best = (v, mask, sign);
        }
    }
    best
}

/// `(1/n) * ||m||`, the spectral upper bound on the cut norm of the step
/// graphon of an `n x n` matrix (which equals `||m||_cut / n^2`).
pub fn graphon_cut_norm_bound(m: &SymMatrix) -> Result<f64> {
    let n = m.dim();
    if n == 0 {
        return Ok(0.0);
    }
    Ok(spectral_norm(m)? / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_rng;

    // Independent oracle: every (X, Y) pair.
    fn brute_force(m: &Matrix) -> f64 {
        let mut best = 0.0f64;
        for xm in 0u32..(1 << m.rows()) {
            for ym in 0u32..(1 << m.cols()) {
                let x: Vec<usize> = (0..m.rows()).filter(|i| xm >> i & 1 == 1).collect();
                let y: Vec<usize> = (0..m.cols()).filter(|j| ym >> j & 1 == 1).collect();
                best = best.max(m.block_sum(&x, &y).abs());
            }
        }
        best
    }

    #[test]
    fn small_examples() {
        let m = Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert_eq!(brute_force(&m), 1.0);
        assert_eq!(cut_norm_exact(&m, DEFAULT_CUT_CAP).unwrap().value, 1.0);
        let ones = Matrix::from_fn(3, 3, |_, _| 1.0);
        assert_eq!(cut_norm_exact(&ones, DEFAULT_CUT_CAP).unwrap().value, 9.0);
        let zero = Matrix::zeros(4, 4);
        assert_eq!(cut_norm_exact(&zero, DEFAULT_CUT_CAP).unwrap().value, 0.0);
    }

    #[test]
    fn matches_brute_force_on_random_rectangles() {
        let mut rng = seeded_rng(17);
        for (r, c) in [(1, 5), (3, 4), (5, 3), (6, 6), (7, 2)] {
            let m = Matrix::from_fn(r, c, |_, _| rng.uniform() * 2.0 - 1.0);
            let cn = cut_norm_exact(&m, DEFAULT_CUT_CAP).unwrap();
            assert!((cn.value - brute_force(&m)).abs() < 1e-12);
            assert_eq!(m.block_sum(&cn.rows, &cn.cols).abs(), cn.value);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let m = Matrix::zeros(13, 12);
        assert!(matches!(cut_norm_exact(&m, 24), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn spectral_bound() {
        let zero = SymMatrix::diag(&[0.0; 5]);
        assert_eq!(graphon_cut_norm_bound(&zero).unwrap(), 0.0);
        let m = SymMatrix::diag(&vec![10.0; 100]);
        assert!((graphon_cut_norm_bound(&m).unwrap() - 0.1).abs() < 1e-15);
    }
}
