//! Dense complex matrices.
//!
//! Storage is row-major. Multipartite index convention: the leftmost factor of a
//! Kronecker product is the most significant index.

mod eigen;
mod quadrature;

pub use eigen::{eigh, eigvalsh, Eigh};
pub use quadrature::gauss_legendre;

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

pub type C64 = num_complex::Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major data.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Column vector `v` as an `n x 1` matrix.
    pub fn column_vector(v: &[C64]) -> Self {
        Matrix::from_vec(v.len(), 1, v.to_vec())
    }

    /// Rank-one matrix `u v†`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Matrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Projector `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        Matrix::outer(v, v)
    }

    /// Matrix unit `|i⟩⟨j|` of size `n x n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols + j])
            .collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        debug_assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self.data[i * self.cols + j] = x;
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            m.set_column(j, c);
        }
        m
    }

    /// Sub-block `[r0, r1) x [c0, c1)`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        Matrix::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn adjoint(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn conj(&self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let row = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a.is_zero() {
                    continue;
                }
                let brow = &other.data[k * p..(k + 1) * p];
                for (o, &b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Matrix {
            rows: n,
            cols: p,
            data: out,
        }
    }

    /// `self† * other` without materializing the adjoint.
    pub fn adjoint_mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "adjoint_mul shape mismatch");
        let (n, m, p) = (self.cols, self.rows, other.cols);
        let mut out = vec![ZERO; n * p];
        for k in 0..m {
            let arow = &self.data[k * n..(k + 1) * n];
            let brow = &other.data[k * p..(k + 1) * p];
            for (i, a) in arow.iter().enumerate() {
                let a = a.conj();
                if a.is_zero() {
                    continue;
                }
                let row = &mut out[i * p..(i + 1) * p];
                for (o, &b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Matrix {
            rows: n,
            cols: p,
            data: out,
        }
    }

    /// `self * other†`.
    pub fn mul_adjoint(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "mul_adjoint shape mismatch");
        let (n, m, p) = (self.rows, self.cols, other.rows);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let arow = &self.data[i * m..(i + 1) * m];
            for j in 0..p {
                let brow = &other.data[j * m..(j + 1) * m];
                let mut s = ZERO;
                for (a, b) in arow.iter().zip(brow) {
                    s += a * b.conj();
                }
                out[i * p + j] = s;
            }
        }
        Matrix {
            rows: n,
            cols: p,
            data: out,
        }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(ZERO, |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `U X U†`.
    pub fn conjugate_by(&self, u: &Matrix) -> Matrix {
        u.matmul(self).mul_adjoint(u)
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Matrix::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.data[i * self.cols + j];
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    let dst = (i * other.rows + k) * c + j * other.cols;
                    let src = &other.data[k * other.cols..(k + 1) * other.cols];
                    for (o, &b) in out.data[dst..dst + other.cols].iter_mut().zip(src) {
                        *o = a * b;
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .sum()
    }

    pub fn scale(&self, c: C64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_mut(&mut self, c: f64) {
        for z in &mut self.data {
            *z *= c;
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: C64, other: &Matrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// Hilbert–Schmidt inner product `Tr(self† other)`.
    pub fn inner(&self, other: &Matrix) -> C64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M - M†|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Matrix {
        let n = self.rows;
        Matrix::from_fn(n, n, |i, j| {
            (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5
        })
    }

    pub fn commutator(&self, other: &Matrix) -> Matrix {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `(self ⊗ I_rest) m`, without forming the Kronecker product.
    pub fn kron_identity_mul(&self, rest: usize, m: &Matrix) -> Matrix {
        assert_eq!(self.cols * rest, m.rows, "kron_identity_mul shape mismatch");
        let c = m.cols;
        let mut out = Matrix::zeros(self.rows * rest, c);
        for a in 0..self.rows {
            for t in 0..self.cols {
                let k = self.data[a * self.cols + t];
                if k.is_zero() {
                    continue;
                }
                for r in 0..rest {
                    let src = &m.data[(t * rest + r) * c..(t * rest + r + 1) * c];
                    let dst = &mut out.data[(a * rest + r) * c..(a * rest + r + 1) * c];
                    for (o, &x) in dst.iter_mut().zip(src) {
                        *o += k * x;
                    }
                }
            }
        }
        out
    }

    /// Permutes rows: output row `i` is input row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Matrix {
        debug_assert_eq!(perm.len(), self.rows);
        let mut out = Matrix::zeros(self.rows, self.cols);
        for (i, &p) in perm.iter().enumerate() {
            out.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(self.row(p));
        }
        out
    }

    /// Simultaneous row/column permutation `P M P†` with `out[i][j] = in[perm[i]][perm[j]]`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Matrix {
        let n = perm.len();
        debug_assert_eq!(n, self.rows);
        Matrix::from_fn(n, n, |i, j| self.data[perm[i] * self.cols + perm[j]])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add<&Matrix> for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub<&Matrix> for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul<&Matrix> for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&Matrix> for Matrix {
    fn add_assign(&mut self, rhs: &Matrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&Matrix> for Matrix {
    fn sub_assign(&mut self, rhs: &Matrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

/// Euclidean norm of a vector.
pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨u|v⟩`.
pub fn vec_inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

/// Kronecker product of two vectors.
pub fn vec_kron(u: &[C64], v: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for &a in u {
        out.extend(v.iter().map(|&b| a * b));
    }
    out
}

/// Orthonormal basis of the span of `vectors` by twice-iterated Gram–Schmidt.
/// Residuals with norm below `tol` (relative to the input norm) are dropped.
pub fn orthonormalize(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let n0 = vec_norm(v);
        if n0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = vec_inner(b, &w);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = vec_norm(&w);
        if n > tol * n0 {
            for x in &mut w {
                *x /= n;
            }
            basis.push(w);
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_identity_is_identity() {
        let i2 = Matrix::identity(2);
        assert_eq!(i2.kron(&i2), Matrix::identity(4));
    }

    #[test]
    fn kron_basis_projectors_place_single_one() {
        let p0 = Matrix::unit(2, 0, 0);
        let p1 = Matrix::unit(2, 1, 1);
        let k = p0.kron(&p1);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (1, 1) { 1.0 } else { 0.0 };
                assert_eq!(k[(i, j)], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn adjoint_products_agree_with_explicit_adjoint() {
        let a = Matrix::from_fn(3, 2, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let b = Matrix::from_fn(3, 4, |i, j| c((i * j) as f64, 1.0 + i as f64));
        assert_eq!(a.adjoint_mul(&b), a.adjoint().matmul(&b));
        let d = Matrix::from_fn(4, 2, |i, j| c(j as f64, i as f64));
        assert_eq!(a.mul_adjoint(&d), a.matmul(&d.adjoint()));
    }

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let v = [
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(2.0, 0.0), c(2.0, 0.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ];
        let b = orthonormalize(&v, 1e-12);
        assert_eq!(b.len(), 2);
        assert!(vec_inner(&b[0], &b[1]).norm() < 1e-15);
    }
}
