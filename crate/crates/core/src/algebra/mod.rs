//! Matrix *-algebras: closure from generators and the block decomposition
//! `ℋ = ⊕_j ℂ^{n_j} ⊗ ℂ^{m_j}` under which the algebra is `⊕_j M_{n_j} ⊗ I_{m_j}`.

mod split;

pub use split::SplitIsometry;

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{eigh, vec_norm, Matrix, C64};
use crate::qcore::random::{complex_gaussian, random_unitary};
use crate::{Error, Result};

/// Gap below which eigenvalues of a normalized random element are treated as equal.
const CLUSTER_GAP: f64 = 1e-7;
const MAX_ATTEMPTS: u64 = 4;

/// Hilbert–Schmidt orthonormal basis of a *-algebra of `d × d` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorAlgebra {
    ambient_dim: usize,
    basis: Vec<Matrix>,
    contains_identity: bool,
}

impl OperatorAlgebra {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    /// Dimension as a complex vector space.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains_identity(&self) -> bool {
        self.contains_identity
    }

    /// Largest residual of `X†` and `XY` against the span, over basis pairs.
    pub fn closure_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in &self.basis {
            worst = worst.max(self.residual(&x.adjoint()));
            for y in &self.basis {
                worst = worst.max(self.residual(&x.matmul(y)));
            }
        }
        worst
    }

    /// Norm of the component of `x` outside the algebra.
    pub fn residual(&self, x: &Matrix) -> f64 {
        let mut r = x.clone();
        for b in &self.basis {
            let c = b.inner(&r);
            r.add_scaled(-c, b);
        }
        r.frobenius_norm()
    }

    /// A random element `Σ g_k B_k` with complex Gaussian coefficients.
    fn random_element(&self, rng: &mut ChaCha8Rng) -> Matrix {
        let d = self.ambient_dim;
        let mut x = Matrix::zeros(d, d);
        for b in &self.basis {
            x.add_scaled(complex_gaussian(rng), b);
        }
        x
    }
}

/// Smallest *-algebra containing the identity and `generators`.
///
/// Every word in the generators and their adjoints is reached by left-multiplying the
/// identity, so the span is grown breadth-first from `I`. A product is new when its
/// residual against the current span exceeds `tol` relative to its norm.
pub fn generate_algebra(generators: &[Matrix], tol: f64) -> Result<OperatorAlgebra> {
    let d = match generators.first() {
        Some(g) => g.rows(),
        None => return Err(Error::Empty("generator list")),
    };
    if generators.iter().any(|g| g.rows() != d || g.cols() != d) {
        return Err(Error::DimensionMismatch(
            "generators must be square of equal size".into(),
        ));
    }
    let mut letters: Vec<Matrix> = Vec::new();
    for g in generators {
        let n = g.frobenius_norm();
        if n == 0.0 {
            continue;
        }
        let g = g.scale_real(1.0 / n);
        let ga = g.adjoint();
        let herm = (&g - &ga).max_abs() <= tol;
        letters.push(g);
        if !herm {
            letters.push(ga);
        }
    }
    let identity = Matrix::identity(d).scale_real(1.0 / (d as f64).sqrt());
    let mut basis = alloc::vec![identity];
    let mut next = 0;
    while next < basis.len() {
        let x = basis[next].clone();
        next += 1;
        for g in &letters {
            let y = g.matmul(&x);
            let norm = y.frobenius_norm();
            if norm == 0.0 {
                continue;
            }
            let mut r = y;
            for _ in 0..2 {
                for b in &basis {
                    let c = b.inner(&r);
                    r.add_scaled(-c, b);
                }
            }
            let rn = r.frobenius_norm();
            if rn > tol * norm {
                basis.push(r.scale_real(1.0 / rn));
                if basis.len() > d * d {
                    return Err(Error::NoConvergence(d * d));
                }
            }
        }
    }
    Ok(OperatorAlgebra {
        ambient_dim: d,
        basis,
        contains_identity: true,
    })
}

/// One summand `ℂ^n ⊗ ℂ^m` of a [`BlockStructure`], occupying columns
/// `offset .. offset + n·m` of the isomorphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub n: usize,
    pub m: usize,
    pub offset: usize,
}

impl Block {
    pub fn size(&self) -> usize {
        self.n * self.m
    }
}

/// Unitary `U` such that `U† X U = ⊕_j x_j ⊗ I_{m_j}` for every algebra element `X`.
/// Within block `j`, column `offset + i·m + μ` carries the index `(i, μ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockStructure {
    pub iso: Matrix,
    pub blocks: Vec<Block>,
}

impl BlockStructure {
    /// Multiset of `(n_j, m_j)`, sorted.
    pub fn block_dims(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self.blocks.iter().map(|b| (b.n, b.m)).collect();
        v.sort_unstable();
        v
    }

    /// Columns of `iso` spanning block `j`.
    pub fn block_columns(&self, j: usize) -> Matrix {
        let b = self.blocks[j];
        self.iso
            .block(0, self.iso.rows(), b.offset, b.offset + b.size())
    }

    /// `x_j` with `U_j† X U_j ≈ x_j ⊗ I_{m_j}`, obtained as `Tr_m(U_j† X U_j) / m_j`.
    pub fn factor(&self, x: &Matrix, j: usize) -> Matrix {
        let b = self.blocks[j];
        let cols = self.block_columns(j);
        let y = x.conjugate_by(&cols.adjoint());
        reduce_multiplicity(&y, b.n, b.m)
    }
}

/// `Tr_m(Y) / m` for `Y` on `ℂ^n ⊗ ℂ^m`.
fn reduce_multiplicity(y: &Matrix, n: usize, m: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, k| {
        let s: C64 = (0..m).map(|mu| y[(i * m + mu, k * m + mu)]).sum();
        s / m as f64
    })
}

/// Largest Frobenius distance, over basis elements `X`, between `U† X U` and its
/// projection onto `⊕_j M_{n_j} ⊗ I_{m_j}`.
pub fn verify_structure(algebra: &OperatorAlgebra, structure: &BlockStructure) -> f64 {
    let d = algebra.ambient_dim;
    if structure.iso.rows() != d || structure.blocks.iter().map(Block::size).sum::<usize>() != d {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for x in &algebra.basis {
        let y = x.conjugate_by(&structure.iso.adjoint());
        let mut ideal = Matrix::zeros(d, d);
        for b in &structure.blocks {
            let yb = y.block(b.offset, b.offset + b.size(), b.offset, b.offset + b.size());
            let a = reduce_multiplicity(&yb, b.n, b.m).kron(&Matrix::identity(b.m));
            for i in 0..b.size() {
                for k in 0..b.size() {
                    ideal[(b.offset + i, b.offset + k)] = a[(i, k)];
                }
            }
        }
        worst = worst.max((&y - &ideal).frobenius_norm());
    }
    worst
}

/// FNV-1a over the bit patterns of the basis, so that decompositions are
/// reproducible functions of their input.
fn input_seed(algebra: &OperatorAlgebra) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for byte in x.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(algebra.ambient_dim as u64);
    eat(algebra.basis.len() as u64);
    for b in &algebra.basis {
        for z in b.data() {
            eat(z.re.to_bits());
            eat(z.im.to_bits());
        }
    }
    h
}

/// Splits ascending values into runs whose consecutive gaps are at most `gap`.
fn clusters(values: &[f64], gap: f64) -> Vec<core::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > gap {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Hermitian part rescaled to unit operator norm.
fn normalized_hermitian(x: &Matrix) -> Matrix {
    let h = x.hermitian_part();
    let eg = eigh(&h);
    let scale = eg
        .values
        .iter()
        .fold(0.0f64, |m, l| m.max(l.abs()))
        .max(f64::MIN_POSITIVE);
    h.scale_real(1.0 / scale)
}

/// Basis of the center, from the (numerical) null space of `c ↦ ([Σ c_k B_k, R₁], [Σ c_k B_k, R₂])`
/// for two random algebra elements.
fn center(algebra: &OperatorAlgebra, rng: &mut ChaCha8Rng) -> Vec<Matrix> {
    let r1 = algebra.random_element(rng);
    let r2 = algebra.random_element(rng);
    let comms: Vec<(Matrix, Matrix)> = algebra
        .basis
        .iter()
        .map(|b| (b.commutator(&r1), b.commutator(&r2)))
        .collect();
    let n = comms.len();
    let gram = Matrix::from_fn(n, n, |k, l| {
        comms[k].0.inner(&comms[l].0) + comms[k].1.inner(&comms[l].1)
    });
    let eg = eigh(&gram);
    let floor = (1e-14 * eg.max_value()).max(1e-20);
    let d = algebra.ambient_dim;
    (0..n)
        .filter(|&j| eg.values[j] <= floor)
        .map(|j| {
            let c = eg.vector(j);
            let mut z = Matrix::zeros(d, d);
            for (ck, b) in c.iter().zip(&algebra.basis) {
                z.add_scaled(*ck, b);
            }
            z
        })
        .collect()
}

/// Block decomposition of an algebra that contains the identity.
///
/// Blocks come from the eigenprojectors of a random Hermitian central element. Inside
/// a block, the eigenspaces of a random Hermitian algebra element are the images of
/// minimal projectors `e_ii ⊗ I_m`; matrix units `e_i1 ⊗ I_m` are read off a random
/// element compressed between them. Randomness is seeded from the input, and a failed
/// self-check retries with a fresh stream.
pub fn decompose_structure(algebra: &OperatorAlgebra, verify_tol: f64) -> Result<BlockStructure> {
    if !algebra.contains_identity {
        return Err(Error::InvalidArgument(
            "algebra must contain the identity".into(),
        ));
    }
    let seed = input_seed(algebra);
    let mut worst = f64::INFINITY;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        if let Some(s) = try_decompose(algebra, &mut rng) {
            let dev = verify_structure(algebra, &s);
            if dev <= verify_tol {
                return Ok(s);
            }
            worst = worst.min(dev);
        }
    }
    Err(Error::verification(
        "algebra block structure",
        worst,
        verify_tol,
    ))
}

fn try_decompose(algebra: &OperatorAlgebra, rng: &mut ChaCha8Rng) -> Option<BlockStructure> {
    let d = algebra.ambient_dim;
    let centre = center(algebra, rng);
    let mut z = Matrix::zeros(d, d);
    for c in &centre {
        z.add_scaled(C64::new(complex_gaussian(rng).re, 0.0), &c.hermitian_part());
    }
    let z = normalized_hermitian(&z);
    let ez = eigh(&z);
    let groups = clusters(&ez.values, CLUSTER_GAP);
    if groups.len() != centre.len() {
        return None;
    }
    let h = normalized_hermitian(&algebra.random_element(rng));
    let x = algebra.random_element(rng);

    let mut pieces: Vec<(usize, usize, Vec<Vec<C64>>)> = Vec::new();
    for g in groups {
        let v = Matrix::from_columns(d, &g.clone().map(|j| ez.vector(j)).collect::<Vec<_>>());
        let r = g.len();
        let hb = normalized_hermitian(&h.conjugate_by(&v.adjoint()));
        let eh = eigh(&hb);
        let parts = clusters(&eh.values, CLUSTER_GAP);
        let n = parts.len();
        if n == 0 || r % n != 0 || parts.iter().any(|p| p.len() != r / n) {
            return None;
        }
        let m = r / n;
        let xb = x.conjugate_by(&v.adjoint());
        let e: Vec<Matrix> = parts
            .iter()
            .map(|p| Matrix::from_columns(r, &p.clone().map(|j| eh.vector(j)).collect::<Vec<_>>()))
            .collect();
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(r);
        for (i, ei) in e.iter().enumerate() {
            let t = if i == 0 {
                Matrix::identity(m)
            } else {
                let t = ei.adjoint_mul(&xb.matmul(&e[0]));
                let s = (t.frobenius_norm() / (m as f64).sqrt()).max(f64::MIN_POSITIVE);
                t.scale_real(1.0 / s)
            };
            let w = ei.matmul(&t);
            for mu in 0..m {
                let local = w.column(mu);
                let nrm = vec_norm(&local);
                if nrm < 0.5 {
                    return None;
                }
                cols.push(v.mul_vec(&local));
            }
        }
        pieces.push((n, m, cols));
    }
    // Canonical order: by (n, m), stable in the central eigenvalue order.
    pieces.sort_by_key(|&(n, m, _)| (n, m));
    let mut iso_cols = Vec::with_capacity(d);
    let mut blocks = Vec::with_capacity(pieces.len());
    for (n, m, cols) in pieces {
        blocks.push(Block {
            n,
            m,
            offset: iso_cols.len(),
        });
        iso_cols.extend(cols);
    }
    let iso = Matrix::from_columns(d, &iso_cols);
    let unitary_dev = (&iso.adjoint_mul(&iso) - &Matrix::identity(d)).max_abs();
    if unitary_dev > 1e-8 {
        return None;
    }
    Some(BlockStructure { iso, blocks })
}

/// Closure followed by decomposition.
pub fn decompose_generators(
    generators: &[Matrix],
    closure_tol: f64,
    verify_tol: f64,
) -> Result<(OperatorAlgebra, BlockStructure)> {
    let alg = generate_algebra(generators, closure_tol)?;
    let s = decompose_structure(&alg, verify_tol)?;
    Ok((alg, s))
}

/// Two generators of `U(⊕_j M_{n_j} ⊗ I_{m_j})U†` for a Haar-random `U`: each is a direct
/// sum of independent random Hermitian blocks. Returns the generators and `U`.
pub fn planted_generators<R: Rng + ?Sized>(
    blocks: &[(usize, usize)],
    rng: &mut R,
) -> (Vec<Matrix>, Matrix) {
    let d: usize = blocks.iter().map(|&(n, m)| n * m).sum();
    let u = random_unitary(d, rng);
    let gens = (0..2)
        .map(|_| {
            let mut x = Matrix::zeros(d, d);
            let mut off = 0;
            for &(n, m) in blocks {
                let g = Matrix::from_fn(n, n, |_, _| complex_gaussian(rng));
                let h = g.hermitian_part().kron(&Matrix::identity(m));
                for r in 0..n * m {
                    for c in 0..n * m {
                        x[(off + r, off + c)] = h[(r, c)];
                    }
                }
                off += n * m;
            }
            x.conjugate_by(&u)
        })
        .collect();
    (gens, u)
}
