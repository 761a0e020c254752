//! Hermitian eigendecomposition.
//!
//! Householder reduction to Hermitian tridiagonal form, a diagonal phase change to a
//! real symmetric tridiagonal, then implicit QL with Wilkinson-style shifts.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{Matrix, C64, ONE, ZERO};

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, mut f: impl FnMut(f64) -> C64) -> Matrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled.mul_adjoint(&self.vectors)
    }

    /// Eigenvector `j` as a vector.
    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.vectors.column(j)
    }
}

/// Full Hermitian eigendecomposition. Only the Hermitian part of `a` is used.
pub fn eigh(a: &Matrix) -> Eigh {
    assert!(a.is_square(), "eigh needs a square matrix");
    let n = a.rows();
    let (d, e, q) = tridiagonalize(a, true);
    let q = q.expect("vectors requested");
    let (values, z) = tql(d, e, true);
    let z = z.expect("vectors requested");
    // Eigenvectors of the input are Q D Z; D is already folded into Q.
    let zc = Matrix::from_fn(n, n, |i, j| C64::new(z[j * n + i], 0.0));
    Eigh {
        values,
        vectors: q.matmul(&zc),
    }
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(a: &Matrix) -> Vec<f64> {
    assert!(a.is_square(), "eigvalsh needs a square matrix");
    let (d, e, _) = tridiagonalize(a, false);
    tql(d, e, false).0
}

/// Returns the diagonal, the real off-diagonal and (optionally) `Q D` such that
/// `A = (QD) S (QD)†` with `S` real symmetric tridiagonal.
fn tridiagonalize(a: &Matrix, want_q: bool) -> (Vec<f64>, Vec<f64>, Option<Matrix>) {
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut q = if want_q {
        Some(Matrix::identity(n))
    } else {
        None
    };
    if n == 0 {
        return (Vec::new(), Vec::new(), q);
    }
    let mut off = vec![ZERO; n];
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let len = n - lo;
        let x0 = m[(lo, k)];
        let tail: f64 = (lo + 1..n).map(|i| m[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            off[k] = x0;
            continue;
        }
        let xnorm = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;
        for i in 0..len {
            v[i] = m[(lo + i, k)];
        }
        v[0] -= alpha;
        let vnorm = v[..len].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v[..len] {
            *z /= vnorm;
        }
        // p = B v on the trailing block.
        for i in 0..len {
            let row = &m.data()[(lo + i) * n + lo..(lo + i) * n + n];
            p[i] = row
                .iter()
                .zip(&v[..len])
                .fold(ZERO, |acc, (b, x)| acc + b * x);
        }
        let kk: f64 = v[..len]
            .iter()
            .zip(&p[..len])
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
            .re;
        for i in 0..len {
            p[i] -= v[i] * kk;
        }
        // B <- B - 2 v w† - 2 w v†
        for i in 0..len {
            let vi2 = v[i] * 2.0;
            let wi2 = p[i] * 2.0;
            let row = &mut m.data_mut()[(lo + i) * n + lo..(lo + i) * n + n];
            for (j, b) in row.iter_mut().enumerate() {
                *b -= vi2 * p[j].conj() + wi2 * v[j].conj();
            }
        }
        m[(lo, k)] = alpha;
        m[(k, lo)] = alpha.conj();
        for i in lo + 1..n {
            m[(i, k)] = ZERO;
            m[(k, i)] = ZERO;
        }
        off[k] = alpha;
        if let Some(q) = q.as_mut() {
            // Q[:, lo..] <- Q[:, lo..] (I - 2 v v†)
            for r in 0..n {
                let row = &mut q.data_mut()[r * n + lo..r * n + n];
                let s = row
                    .iter()
                    .zip(&v[..len])
                    .fold(ZERO, |acc, (a, b)| acc + a * b)
                    * 2.0;
                for (x, vj) in row.iter_mut().zip(&v[..len]) {
                    *x -= s * vj.conj();
                }
            }
        }
    }
    if n >= 2 {
        off[n - 2] = m[(n - 1, n - 2)];
    }

    let d: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut phase = ONE;
    for k in 0..n.saturating_sub(1) {
        let mag = off[k].norm();
        e[k] = mag;
        let next = if mag > 0.0 {
            phase * (off[k] / mag)
        } else {
            phase
        };
        if let Some(q) = q.as_mut() {
            // Fold the phase of basis vector k+1 into column k+1 of Q.
            for r in 0..n {
                q[(r, k + 1)] *= next;
            }
        }
        phase = next;
    }
    (d, e, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix (diagonal `d`, off-diagonal
/// `e[k]` between rows `k` and `k+1`). Returns ascending eigenvalues and, when
/// requested, eigenvectors stored row-wise (`z[j*n + i]` is component `i` of vector `j`).
fn tql(mut d: Vec<f64>, mut e: Vec<f64>, want_vectors: bool) -> (Vec<f64>, Option<Vec<f64>>) {
    let n = d.len();
    let mut z = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };
    if n == 0 {
        return (d, z);
    }
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let g = d[l];
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
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..(i + 1) * n];
                        let zi1 = &mut hi[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 || iter > 100 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        d[a].partial_cmp(&d[b])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| d[i]).collect();
    let z = z.map(|z| {
        let mut out = vec![0.0; n * n];
        for (dst, &src) in order.iter().enumerate() {
            out[dst * n..(dst + 1) * n].copy_from_slice(&z[src * n..(src + 1) * n]);
        }
        out
    });
    (values, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermitian(n: usize, seed: u64) -> Matrix {
        // Small deterministic LCG keeps this module free of the RNG plumbing.
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = Matrix::from_fn(n, n, |_, _| C64::new(next(), next()));
        a.hermitian_part()
    }

    #[test]
    fn decomposition_reconstructs_input() {
        for n in [1, 2, 3, 5, 8, 17] {
            let a = hermitian(n, n as u64);
            let eg = eigh(&a);
            let back = eg.map(|l| C64::new(l, 0.0));
            assert!((&back - &a).max_abs() < 1e-12, "n={n}");
            let gram = eg.vectors.adjoint_mul(&eg.vectors);
            assert!((&gram - &Matrix::identity(n)).max_abs() < 1e-12);
            assert!(eg.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigenvalues_only_path_matches() {
        let a = hermitian(9, 42);
        let full = eigh(&a).values;
        let only = eigvalsh(&a);
        for (x, y) in full.iter().zip(&only) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_and_diagonal_inputs() {
        let a = Matrix::from_real_diag(&[3.0, 1.0, 1.0, 2.0]);
        let eg = eigh(&a);
        assert_eq!(eg.values, vec![1.0, 1.0, 2.0, 3.0]);
        let i = Matrix::identity(5);
        let eg = eigh(&i);
        assert!(eg.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn block_diagonal_input_with_zero_subdiagonal() {
        let mut a = Matrix::zeros(4, 4);
        a[(0, 1)] = C64::new(0.0, 1.0);
        a[(1, 0)] = C64::new(0.0, -1.0);
        a[(2, 3)] = C64::new(2.0, 0.0);
        a[(3, 2)] = C64::new(2.0, 0.0);
        let eg = eigh(&a);
        let back = eg.map(|l| C64::new(l, 0.0));
        assert!((&back - &a).max_abs() < 1e-14);
        assert!((eg.values[0] + 2.0).abs() < 1e-14 && (eg.values[3] - 2.0).abs() < 1e-14);
    }
}
