use super::{Matrix, SymMatrix};
use crate::error::{Error, Result};

/// Eigenpairs of a symmetric matrix.
///
/// Values are sorted by absolute value (descending), ties broken by the
/// signed value (descending) and then by the solver's original index.
/// Column `i` of `vectors` is the unit eigenvector of `values[i]`, with its
/// largest-magnitude coordinate made positive.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    /// `max_i ||A q_i - lambda_i q_i||`.
    pub fn max_residual(&self, a: &SymMatrix) -> f64 {
        (0..self.dim())
            .map(|i| {
                let q = self.vector(i);
                let aq = a.matrix().matvec(&q);
                aq.iter()
                    .zip(&q)
                    .map(|(x, y)| (x - self.values[i] * y).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max |Q^T Q - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let q = &self.vectors;
        let qtq = q.transpose().matmul(q).expect("square");
        qtq.sub(&Matrix::identity(self.dim())).max_abs()
    }

    /// `Q diag(values) Q^T`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let scaled = Matrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        scaled.matmul(&self.vectors.transpose()).expect("square")
    }
}

/// Full symmetric eigendecomposition.
///
/// Householder reduction to tridiagonal form followed by the implicit QL
/// iteration; both passes run in a fixed order, so identical input yields
/// bit-identical output.
pub fn eigh(m: &SymMatrix) -> Result<EigenSystem> {
    let n = m.dim();
    if n == 0 {
        return Ok(EigenSystem { values: vec![], vectors: Matrix::zeros(0, 0) });
    }
    let mut v = m.matrix().to_rows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    // QL rotates pairs of eigenvector columns; keep them as contiguous rows.
    let mut vt: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|k| v[k][i]).collect()).collect();
    drop(v);
    tridiagonal_ql(&mut d, &mut e, &mut vt)?;
    let vectors = Matrix::from_fn(n, n, |k, i| vt[i][k]);
    Ok(sorted_system(d, vectors))
}

/// Cyclic Jacobi eigendecomposition, swept until the off-diagonal
/// Frobenius norm drops to `1e-12 * ||A||_F`.
///
/// Slower than [`eigh`] but entirely independent of it.
pub fn eigh_jacobi(m: &SymMatrix) -> Result<EigenSystem> {
    const MAX_SWEEPS: usize = 100;
    let n = m.dim();
    let mut a = m.matrix().clone();
    let mut v = Matrix::identity(n);
    let target = 1e-12 * a.frobenius_norm();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence);
    }
    let values = (0..n).map(|i| a[(i, i)]).collect();
    Ok(sorted_system(values, v))
}

/// Largest absolute eigenvalue; zero for the empty matrix.
pub fn spectral_norm(m: &SymMatrix) -> Result<f64> {
    Ok(eigh(m)?.values.first().map_or(0.0, |v| v.abs()))
}

fn sorted_system(values: Vec<f64>, vectors: Matrix) -> EigenSystem {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(values[b].total_cmp(&values[a]))
            .then(a.cmp(&b))
    });
    let mut out = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        let mut pivot = 0;
        for k in 0..n {
            if vectors[(k, old)].abs() > vectors[(pivot, old)].abs() {
                pivot = k;
            }
        }
        let sign = if vectors[(pivot, old)] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            out[(k, new)] = sign * vectors[(k, old)];
        }
    }
    EigenSystem { values: order.iter().map(|&i| values[i]).collect(), vectors: out }
}

// Householder tridiagonalization (the classic tred2 procedure). On exit `d`
// holds the diagonal, `e[1..]` the subdiagonal and `v` the accumulated
// orthogonal transform.
fn tridiagonalize(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

// Implicit QL iteration on the tridiagonal (d, e); `vt[i]` is eigenvector i.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], vt: &mut [Vec<f64>]) -> Result<()> {
    const MAX_ITER: usize = 60;
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_ITER {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = vt.split_at_mut(i + 1);
                    let vi = &mut lo[i];
                    let vi1 = &mut hi[0];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::seeded_rng;

    fn random_symmetric(n: usize, seed: u64) -> SymMatrix {
        let mut rng = seeded_rng(seed);
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = rng.uniform() * 2.0 - 1.0;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        SymMatrix::new(m).unwrap()
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let es = eigh(&m).unwrap();
        assert!((es.values[0] - 3.0).abs() < 1e-14);
        assert!((es.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ordering_by_magnitude() {
        let es = eigh(&SymMatrix::diag(&[3.0, -5.0])).unwrap();
        assert_eq!(es.values, vec![-5.0, 3.0]);
        assert_eq!(spectral_norm(&SymMatrix::diag(&[3.0, -5.0])).unwrap(), 5.0);
    }

    #[test]
    fn ties_prefer_positive() {
        let es = eigh(&SymMatrix::diag(&[-2.0, 2.0, 1.0])).unwrap();
        assert_eq!(es.values, vec![2.0, -2.0, 1.0]);
    }

    #[test]
    fn identity_is_orthonormal() {
        let es = eigh(&SymMatrix::new(Matrix::identity(4)).unwrap()).unwrap();
        assert!(es.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(es.orthogonality_error() < 1e-15);
    }

    #[test]
    fn norms_of_trivial_matrices() {
        assert_eq!(spectral_norm(&SymMatrix::diag(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
        let swap = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((spectral_norm(&swap).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        for (n, seed) in [(1, 1), (2, 2), (7, 3), (40, 4), (200, 5)] {
            let a = random_symmetric(n, seed);
            let es = eigh(&a).unwrap();
            let fro = a.matrix().frobenius_norm();
            assert!(es.reconstruct().sub(a.matrix()).frobenius_norm() <= 1e-8 * fro);
            assert!(es.orthogonality_error() <= 1e-9);
            assert!(es.max_residual(&a) <= 1e-8 * fro);
        }
    }

    #[test]
    fn jacobi_agrees_with_ql() {
        for (n, seed) in [(3, 11), (12, 12), (30, 13)] {
            let a = random_symmetric(n, seed);
            let ql = eigh(&a).unwrap();
            let jac = eigh_jacobi(&a).unwrap();
            for (x, y) in ql.values.iter().zip(&jac.values) {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
            assert!(jac.orthogonality_error() < 1e-9);
        }
    }

    #[test]
    fn deterministic_output() {
        let a = random_symmetric(25, 99);
        let x = eigh(&a).unwrap();
        let y = eigh(&a).unwrap();
        assert_eq!(x.values, y.values);
        assert_eq!(x.vectors, y.vectors);
    }

    #[test]
    fn weyl_perturbation_bound() {
        for seed in 0..5 {
            let a = random_symmetric(20, 100 + seed);
            let e = random_symmetric(20, 200 + seed).matrix().scale(0.1);
            let ae = SymMatrix::new(a.matrix().add(&e)).unwrap();
            let mut la = eigh(&a).unwrap().values;
            let mut lae = eigh(&ae).unwrap().values;
            la.sort_by(f64::total_cmp);
            lae.sort_by(f64::total_cmp);
            let bound = spectral_norm(&SymMatrix::new(e).unwrap()).unwrap();
            for (x, y) in la.iter().zip(&lae) {
                assert!((x - y).abs() <= bound + 1e-12);
            }
        }
    }
}
