//! Koashi–Imoto decompositions.
//!
//! For a bipartite state `Ψ^{AC}` the support of `Ψ^A` splits as
//! `⊕_j a₀=j ⊗ a_L ⊗ a_R` with `Ψ^{AC} ≅ ⊕_j p_j ω_j^{a_L} ⊗ φ_j^{a_R C}`. The split is
//! read off the *-algebra generated by the conditional operators
//! `T_Y = (Ψ^A)^{-1/2} Tr_C[(I ⊗ Y) Ψ^{AC}] (Ψ^A)^{-1/2}`, which acts as
//! `⊕_j I_{a_L} ⊗ M_{a_R}`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::algebra::{decompose_generators, SplitIsometry};
use crate::channels::QuantumChannel;
use crate::linalg::{eigh, vec_inner, vec_norm, Eigh, Matrix, C64, ZERO};
use crate::qcore::random::{complex_gaussian, random_unitary};
use crate::qcore::{
    entropy_of_spectrum, reduce_matrix, support_basis, trace_norm, DensityState, PureState,
    SystemLayout, Tolerances, Tripartition,
};
use crate::{Error, Result};

/// One summand `p_j ω_j ⊗ φ_j` of a KI decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct KIBlock {
    pub p: f64,
    /// State on `a_L` (dimension `m`).
    pub omega: Matrix,
    /// State on `a_R ⊗ C` (dimension `n · d_C`).
    pub phi: Matrix,
    /// Native `a_R` dimension (algebra factor).
    pub n: usize,
    /// Native `a_L` dimension (multiplicity).
    pub m: usize,
    pub omega_rank: usize,
    pub phi_rank: usize,
}

impl KIBlock {
    /// `φ_j^{a_R}`.
    pub fn phi_ar(&self) -> Matrix {
        let dc = self.phi.rows() / self.n;
        reduce_matrix(&self.phi, &[self.n, dc], &[0])
    }
}

/// KI decomposition of `Ψ^{AC}` on `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct KIDecomposition {
    /// Subsystems merged into `A`, in order.
    pub a_layout: SystemLayout,
    /// Subsystems merged into `C`, in order.
    pub c_layout: SystemLayout,
    /// Isometry `supp(Ψ^A) → a₀ ⊗ a_L ⊗ a_R`; block `j` has native dims `(m_j, n_j)`.
    pub gamma: SplitIsometry,
    pub blocks: Vec<KIBlock>,
    /// `‖Ψ^{AC} − Σ_j (Γ_j⊗I)†(p_j ω_j ⊗ φ_j)(Γ_j⊗I)‖₁`.
    pub residual: f64,
}

impl KIDecomposition {
    /// Padded `(d_{a₀}, d_{a_L}, d_{a_R})`.
    pub fn dims(&self) -> (usize, usize, usize) {
        self.gamma.dims()
    }

    pub fn a_dim(&self) -> usize {
        self.a_layout.total_dim()
    }

    pub fn c_dim(&self) -> usize {
        self.c_layout.total_dim()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.p).collect()
    }

    /// `H({p_j})` in bits.
    pub fn entropy_p(&self) -> f64 {
        entropy_of_spectrum(&self.probabilities(), 0.0)
    }

    /// `Σ_j p_j S(φ_j^{a_R})` in bits.
    pub fn weighted_ar_entropy(&self, cutoff_rel: f64) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.p * crate::qcore::matrix_entropy(&b.phi_ar(), cutoff_rel))
            .sum()
    }

    /// `H(p) + 2 Σ_j p_j S(φ_j^{a_R})`.
    pub fn markovianizing_cost(&self, cutoff_rel: f64) -> f64 {
        self.entropy_p() + 2.0 * self.weighted_ar_entropy(cutoff_rel)
    }

    /// `Γ_j ⊗ I_C` restricted to native rows, ordered `(a_L, a_R, C)`.
    fn block_map(&self, j: usize) -> Matrix {
        self.gamma
            .block_matrix(j)
            .kron(&Matrix::identity(self.c_dim()))
    }

    /// `Σ_j (Γ_j⊗I)†(p_j ω_j ⊗ φ_j)(Γ_j⊗I)` on `A ⊗ C`.
    pub fn reconstruct(&self) -> Matrix {
        let d = self.a_dim() * self.c_dim();
        let mut out = Matrix::zeros(d, d);
        for (j, b) in self.blocks.iter().enumerate() {
            let g = self.block_map(j);
            let x = b.omega.kron(&b.phi).scale_real(b.p);
            out += &g.adjoint_mul(&x.matmul(&g));
        }
        out
    }
}

/// Splits the layout of `state` into the labels `a_labels` and the rest, returning
/// the two sub-layouts and the matrix reordered as `A ⊗ C`.
fn split_ac<S: AsRef<str>>(
    state: &DensityState,
    a_labels: &[S],
) -> Result<(SystemLayout, SystemLayout, Matrix)> {
    let layout = state.layout();
    let a = layout.indices_of(a_labels)?;
    if a.is_empty() {
        return Err(Error::InvalidGrouping(
            "the A part must name at least one subsystem".into(),
        ));
    }
    let c: Vec<usize> = (0..layout.len()).filter(|i| !a.contains(i)).collect();
    let order: Vec<usize> = a.iter().chain(&c).copied().collect();
    let m = state.permute_positions(&order).into_matrix();
    let c_layout = if c.is_empty() {
        SystemLayout::single(&layout.fresh_label("C"), 1)?
    } else {
        layout.select(&c)
    };
    Ok((layout.select(&a), c_layout, m))
}

/// KI decomposition of `psi_ac` on the subsystems `a_labels`; the remaining
/// subsystems form `C`.
pub fn ki_decompose<S: AsRef<str>>(
    psi_ac: &DensityState,
    a_labels: &[S],
    tol: &Tolerances,
) -> Result<KIDecomposition> {
    let (a_layout, c_layout, m) = split_ac(psi_ac, a_labels)?;
    ki_decompose_matrix(&m, a_layout, c_layout, tol)
}

/// KI decomposition of `Ψ^{AC}` for the A and C groups of a pure tripartite state.
pub fn ki_of_pure(
    psi: &PureState,
    grouping: &Tripartition,
    tol: &Tolerances,
) -> Result<KIDecomposition> {
    let g = psi.grouped(grouping)?;
    let ac = g.reduce_to(&[0, 2]);
    let layout = psi.layout();
    let a_layout = layout.select(&layout.indices_of(&grouping.a)?);
    let c_idx = layout.indices_of(&grouping.c)?;
    let c_layout = if c_idx.is_empty() {
        SystemLayout::single(&layout.fresh_label("C"), 1)?
    } else {
        layout.select(&c_idx)
    };
    if a_layout.is_empty() {
        return Err(Error::InvalidGrouping(
            "the A part must name at least one subsystem".into(),
        ));
    }
    ki_decompose_matrix(&ac.into_matrix(), a_layout, c_layout, tol)
}

fn ki_decompose_matrix(
    psi: &Matrix,
    a_layout: SystemLayout,
    c_layout: SystemLayout,
    tol: &Tolerances,
) -> Result<KIDecomposition> {
    let da = a_layout.total_dim();
    let dc = c_layout.total_dim();
    if psi.rows() != da * dc {
        return Err(Error::DimensionMismatch(
            "KI input does not match its layouts".into(),
        ));
    }
    let rho_a = reduce_matrix(psi, &[da, dc], &[0]);
    let eg = eigh(&rho_a);
    let s = support_basis(&eg, tol.support_cutoff_rel);
    let r = s.cols();
    if r == 0 {
        return Err(Error::InvalidState("reduced state on A vanishes".into()));
    }
    let floor = tol.support_cutoff_rel * eg.max_value();
    let lam: Vec<f64> = eg
        .values
        .iter()
        .copied()
        .filter(|&l| l > floor && l > 0.0)
        .collect();
    let d_inv_half =
        Matrix::from_real_diag(&lam.iter().map(|l| 1.0 / l.sqrt()).collect::<Vec<_>>());
    let w = s.matmul(&d_inv_half);

    let mut gens = Vec::with_capacity(dc * dc);
    for k in 0..dc {
        for l in 0..dc {
            let mkl = Matrix::from_fn(da, da, |a, a2| psi[(a * dc + l, a2 * dc + k)]);
            gens.push(w.adjoint_mul(&mkl.matmul(&w)));
        }
    }
    let (_, structure) = decompose_generators(&gens, tol.algebra_closure_tol, tol.verify_tol)?;

    // Columns of `S U`: block j, algebra index i (a_R), multiplicity μ (a_L).
    let su = s.matmul(&structure.iso);
    let mut raw: Vec<(f64, usize, usize, Matrix, Matrix)> = Vec::new();
    for b in &structure.blocks {
        let (n, m) = (b.n, b.m);
        // Γ_j rows ordered (μ, i).
        let gj = Matrix::from_fn(m * n, da, |row, col| {
            let (mu, i) = (row / n, row % n);
            su[(col, b.offset + i * m + mu)].conj()
        });
        let g = gj.kron(&Matrix::identity(dc));
        let x = g.matmul(&psi.mul_adjoint(&g));
        let p = x.trace().re;
        raw.push((p, n, m, gj, x));
    }
    raw.sort_by_key(|(p, n, m, _, _)| (-((p * 1e12).round() as i64), *n, *m));

    let block_dims: Vec<(usize, usize)> = raw.iter().map(|&(_, n, m, _, _)| (m, n)).collect();
    let probe = SplitIsometry {
        matrix: Matrix::zeros(1, 1),
        blocks: block_dims.clone(),
    };
    let (d0, dl, dr) = probe.dims();
    let mut gamma = Matrix::zeros(d0 * dl * dr, da);
    let mut blocks = Vec::with_capacity(raw.len());
    for (j, (p, n, m, gj, x)) in raw.into_iter().enumerate() {
        for mu in 0..m {
            for i in 0..n {
                let row = probe.row(j, mu, i);
                for col in 0..da {
                    gamma[(row, col)] = gj[(mu * n + i, col)];
                }
            }
        }
        if p <= 0.0 {
            return Err(Error::verification(
                "KI block weight",
                p.abs(),
                tol.verify_tol,
            ));
        }
        let omega = reduce_matrix(&x, &[m, n * dc], &[0]).scale_real(1.0 / p);
        let phi = reduce_matrix(&x, &[m, n * dc], &[1]).scale_real(1.0 / p);
        let omega_rank = rank(&omega, tol.support_cutoff_rel);
        let phi_rank = rank(&phi, tol.support_cutoff_rel);
        blocks.push(KIBlock {
            p,
            omega: omega.hermitian_part(),
            phi: phi.hermitian_part(),
            n,
            m,
            omega_rank,
            phi_rank,
        });
    }
    let mut ki = KIDecomposition {
        a_layout,
        c_layout,
        gamma: SplitIsometry {
            matrix: gamma,
            blocks: block_dims,
        },
        blocks,
        residual: 0.0,
    };
    ki.residual = trace_norm(&(psi - &ki.reconstruct()));
    if !(ki.residual <= tol.verify_tol) {
        return Err(Error::verification(
            "KI product form",
            ki.residual,
            tol.verify_tol,
        ));
    }
    Ok(ki)
}

fn rank(m: &Matrix, cutoff_rel: f64) -> usize {
    let eg = eigh(m);
    let floor = cutoff_rel * eg.max_value();
    eg.values.iter().filter(|&&l| l > floor && l > 0.0).count()
}

/// Canonical purification `Σ_k √λ_k |e_k⟩|k⟩` as an `d × rank` matrix
/// (rows: system, columns: purifier), eigenvalues in descending order.
fn canonical_purifier(eg: &Eigh, cutoff_rel: f64) -> Matrix {
    let floor = cutoff_rel * eg.max_value();
    let cols: Vec<Vec<C64>> = (0..eg.dim())
        .rev()
        .filter(|&k| eg.values[k] > floor && eg.values[k] > 0.0)
        .map(|k| {
            let s = eg.values[k].sqrt();
            eg.vector(k).into_iter().map(|z| z * s).collect()
        })
        .collect();
    Matrix::from_columns(eg.dim(), &cols)
}

/// Moore–Penrose inverse of a full-column-rank matrix `W = E diag(√λ)` with
/// orthonormal `E`: `diag(1/λ) W†`.
fn purifier_pinv(w: &Matrix) -> Matrix {
    let norms: Vec<f64> = (0..w.cols())
        .map(|k| w.column(k).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect();
    Matrix::from_fn(w.cols(), w.rows(), |k, x| w[(x, k)].conj() / norms[k])
}

/// Extension of a KI decomposition to a purification `|Ψ⟩^{ABC}`:
/// `(Γ ⊗ Γ′ ⊗ I)|Ψ⟩ = Σ_j √p_j |j⟩^{a₀}|j⟩^{b₀} |ω_j⟩^{a_L b_L} |φ_j⟩^{a_R b_R C}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TripartiteKIForm {
    pub ki: KIDecomposition,
    pub b_layout: SystemLayout,
    /// Isometry `supp(Ψ^B) → b₀ ⊗ b_L ⊗ b_R`; block `j` has native dims
    /// `(rank ω_j, rank φ_j)`.
    pub gamma_prime: SplitIsometry,
    /// `|ω_j⟩` as an `m_j × b_L(j)` coefficient matrix.
    pub omega_purifications: Vec<Matrix>,
    /// `|φ_j⟩` as an `(n_j d_C) × b_R(j)` coefficient matrix (rows `(a_R, C)`).
    pub phi_purifications: Vec<Matrix>,
    /// `|⟨Ψ|Ψ_rec⟩|²` for the state rebuilt from the form.
    pub fidelity: f64,
}

impl TripartiteKIForm {
    /// Padded `(d_{b₀}, d_{b_L}, d_{b_R})`.
    pub fn b_dims(&self) -> (usize, usize, usize) {
        self.gamma_prime.dims()
    }

    /// Rebuilds `|Ψ⟩` on `A ⊗ B ⊗ C` from the blocks.
    pub fn reconstruct(&self) -> Vec<C64> {
        let (da, db, dc) = (self.ki.a_dim(), self.b_layout.total_dim(), self.ki.c_dim());
        let mut out = vec![ZERO; da * db * dc];
        for (j, b) in self.ki.blocks.iter().enumerate() {
            let term = self.block_vector(j, &self.omega_purifications[j]);
            for (o, t) in out.iter_mut().zip(term) {
                *o += t * b.p.sqrt();
            }
        }
        out
    }

    /// `(Γ_j† ⊗ Γ′_j† ⊗ I)(|w⟩^{a_L b_L} ⊗ |φ_j⟩^{a_R b_R C})` on `A ⊗ B ⊗ C`, where `w`
    /// is an `m_j × b_L(j)` coefficient matrix.
    pub(crate) fn block_vector(&self, j: usize, w: &Matrix) -> Vec<C64> {
        let (da, db, dc) = (self.ki.a_dim(), self.b_layout.total_dim(), self.ki.c_dim());
        let b = &self.ki.blocks[j];
        let (n, m) = (b.n, b.m);
        let phi = &self.phi_purifications[j];
        let (bl, br) = self.gamma_prime.blocks[j];
        let gj = self.gamma.block_matrix(j);
        let gpj = self.gamma_prime.block_matrix(j);
        // Coefficients c[(μ, i, c), (u, v)] = w[μ,u] φ[(i,c), v].
        let rows_a = m * n;
        let mut coeff = Matrix::zeros(rows_a * dc, bl * br);
        for mu in 0..m {
            for ic in 0..n * dc {
                for u in 0..bl {
                    for v in 0..br {
                        coeff[(mu * n * dc + ic, u * br + v)] = w[(mu, u)] * phi[(ic, v)];
                    }
                }
            }
        }
        // A side: Γ_j† on (μ, i); B side: Γ′_j† on (u, v).
        let ga = gj.adjoint().kron(&Matrix::identity(dc)); // (da dc) × (m n dc)
        let x = ga.matmul(&coeff).matmul(&gpj.conj()); // rows (a, c), cols b
        let mut out = vec![ZERO; da * db * dc];
        for a in 0..da {
            for c in 0..dc {
                for bb in 0..db {
                    out[(a * db + bb) * dc + c] = x[(a * dc + c, bb)];
                }
            }
        }
        out
    }
}

impl core::ops::Deref for TripartiteKIForm {
    type Target = KIDecomposition;
    fn deref(&self) -> &KIDecomposition {
        &self.ki
    }
}

/// Extends `ki` (the KI decomposition of `Ψ^{AC}` on the A group of `grouping`) to
/// the purification `psi`.
pub fn extend_to_purification(
    psi: &PureState,
    grouping: &Tripartition,
    ki: &KIDecomposition,
    tol: &Tolerances,
) -> Result<TripartiteKIForm> {
    let g = psi.grouped(grouping)?;
    let dims = g.layout().dims();
    let (da, db, dc) = (dims[0], dims[1], dims[2]);
    if da != ki.a_dim() || dc != ki.c_dim() {
        return Err(Error::DimensionMismatch(
            "KI decomposition does not match the state's A and C groups".into(),
        ));
    }
    let layout = psi.layout();
    let b_idx = layout.indices_of(&grouping.b)?;
    let b_layout = if b_idx.is_empty() {
        SystemLayout::single(&layout.fresh_label("B"), 1)?
    } else {
        layout.select(&b_idx)
    };
    let v = g.vector();

    let mut omega_p = Vec::new();
    let mut phi_p = Vec::new();
    let mut vts = Vec::new();
    let mut bdims = Vec::new();
    for (j, b) in ki.blocks.iter().enumerate() {
        let (n, m) = (b.n, b.m);
        let gj = ki.gamma.block_matrix(j);
        // M_j[(μ, i, c), b] = Σ_a Γ_j[(μ,i), a] Ψ[a, b, c].
        let psi_a = Matrix::from_fn(da, db * dc, |a, bc| v[a * db * dc + bc]);
        let t = gj.matmul(&psi_a); // rows (μ,i), cols (b,c)
        let mj = Matrix::from_fn(m * n * dc, db, |row, bb| {
            let (mi, c) = (row / dc, row % dc);
            t[(mi, bb * dc + c)]
        });
        let wo = canonical_purifier(&eigh(&b.omega), tol.support_cutoff_rel);
        let wp = canonical_purifier(&eigh(&b.phi), tol.support_cutoff_rel);
        let pinv = purifier_pinv(&wo).kron(&purifier_pinv(&wp));
        let vt = pinv.matmul(&mj).scale_real(1.0 / b.p.sqrt()); // (bl br) × db
        bdims.push((wo.cols(), wp.cols()));
        omega_p.push(wo);
        phi_p.push(wp);
        vts.push(vt);
    }
    let probe = SplitIsometry {
        matrix: Matrix::zeros(1, 1),
        blocks: bdims.clone(),
    };
    let (d0, dl, dr) = probe.dims();
    let mut gp = Matrix::zeros(d0 * dl * dr, db);
    for (j, vt) in vts.iter().enumerate() {
        let (bl, br) = bdims[j];
        for u in 0..bl {
            for w in 0..br {
                let row = probe.row(j, u, w);
                for bb in 0..db {
                    gp[(row, bb)] = vt[(u * br + w, bb)].conj();
                }
            }
        }
    }
    let gamma_prime = SplitIsometry {
        matrix: gp,
        blocks: bdims,
    };
    let defect = gamma_prime.isometry_defect();
    if !(defect <= tol.verify_tol.sqrt()) {
        return Err(Error::verification(
            "KI extension isometry",
            defect,
            tol.verify_tol.sqrt(),
        ));
    }
    let mut form = TripartiteKIForm {
        ki: ki.clone(),
        b_layout,
        gamma_prime,
        omega_purifications: omega_p,
        phi_purifications: phi_p,
        fidelity: 0.0,
    };
    let rec = form.reconstruct();
    form.fidelity = vec_inner(v, &rec).norm_sqr();
    if !(form.fidelity >= 1.0 - tol.verify_tol) {
        return Err(Error::verification(
            "KI extension reconstruction",
            1.0 - form.fidelity,
            tol.verify_tol,
        ));
    }
    Ok(form)
}

/// Channel on `A` with Kraus operators
/// `K_e = Γ†(Σ_j |j⟩⟨j| ⊗ (⟨e|_E U_j) ⊗ I_{a_R})Γ` plus `I − Γ†Γ`.
///
/// Each `U_j` is an isometry `a_L(j) → a_L(j) ⊗ E` (rows ordered `(a_L, E)`) that must
/// satisfy `Tr_E[U_j ω_j U_j†] = ω_j`.
pub fn state_preserving_channel(
    ki: &KIDecomposition,
    isometries: &[Matrix],
    tol: &Tolerances,
) -> Result<QuantumChannel> {
    if isometries.len() != ki.blocks.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "expected {} block isometries, got {}",
            ki.blocks.len(),
            isometries.len()
        )));
    }
    let first = &isometries[0];
    let env = first.rows() / first.cols().max(1);
    for (u, b) in isometries.iter().zip(&ki.blocks) {
        if u.cols() != b.m || u.rows() != b.m * env {
            return Err(Error::DimensionMismatch(
                "block isometry shape must be (m_j·E) × m_j with a common E".into(),
            ));
        }
        let iso = (&u.adjoint_mul(u) - &Matrix::identity(b.m)).max_abs();
        if iso > tol.verify_tol {
            return Err(Error::InvalidArgument(alloc::format!(
                "block map is not an isometry (defect {iso:.3e})"
            )));
        }
        let out = reduce_matrix(&b.omega.conjugate_by(u), &[b.m, env], &[0]);
        let dev = trace_norm(&(&out - &b.omega));
        if dev > tol.verify_tol {
            return Err(Error::InvalidArgument(alloc::format!(
                "block map does not preserve ω_j (deviation {dev:.3e})"
            )));
        }
    }
    let da = ki.a_dim();
    let mut kraus = Vec::with_capacity(env + 1);
    for e in 0..env {
        let mut k = Matrix::zeros(da, da);
        for (j, (u, b)) in isometries.iter().zip(&ki.blocks).enumerate() {
            let ue = Matrix::from_fn(b.m, b.m, |x, y| u[(x * env + e, y)]);
            let gj = ki.gamma.block_matrix(j);
            let mid = ue.kron(&Matrix::identity(b.n));
            k += &gj.adjoint_mul(&mid.matmul(&gj));
        }
        kraus.push(k);
    }
    let comp = &Matrix::identity(da) - &ki.gamma.domain_projector();
    if comp.max_abs() > tol.verify_tol {
        kraus.push(comp);
    }
    QuantumChannel::new(
        ki.a_layout.clone(),
        ki.a_layout.clone(),
        kraus,
        tol.verify_tol,
    )
}

/// Random isometry `ℂ^m → ℂ^m ⊗ ℂ^E` preserving `omega`:
/// `Σ_k e^{iθ_k} (|e_k⟩ ⊗ |χ_k⟩)⟨e_k|` in an eigenbasis of `omega`.
pub fn random_preserving_isometry<R: Rng + ?Sized>(
    omega: &Matrix,
    env: usize,
    rng: &mut R,
) -> Matrix {
    let eg = eigh(omega);
    let m = eg.dim();
    let mut u = Matrix::zeros(m * env, m);
    for k in 0..m {
        let theta = rng.random::<f64>() * 2.0 * core::f64::consts::PI;
        let phase = C64::from_polar(1.0, theta);
        let chi: Vec<C64> = (0..env).map(|_| complex_gaussian(rng)).collect();
        let nrm = vec_norm(&chi).max(f64::MIN_POSITIVE);
        let ek = eg.vector(k);
        for y in 0..m {
            let bra = ek[y].conj();
            for x in 0..m {
                for (e, c) in chi.iter().enumerate() {
                    u[(x * env + e, y)] += phase * ek[x] * (c / nrm) * bra;
                }
            }
        }
    }
    u
}

/// Random pure state with a prescribed KI structure on `A`:
/// `Σ_j √p_j |j⟩^{a₀}|j⟩^{b₀}|ω_j⟩|φ_j⟩`, followed by random unitaries on `A` and `B`.
/// Each entry of `blocks` is `(m_j, n_j)`; `d_C` is shared. Returns a state on
/// `A ⊗ B ⊗ C` with `d_A = Σ m_j n_j` and `d_B = Σ m_j n_j d_C`.
pub fn planted_ki_state<R: Rng + ?Sized>(
    blocks: &[(usize, usize)],
    dc: usize,
    rng: &mut R,
) -> Result<PureState> {
    if blocks.is_empty() || blocks.iter().any(|&(m, n)| m == 0 || n == 0) || dc == 0 {
        return Err(Error::InvalidArgument(
            "planted KI blocks need positive dims".into(),
        ));
    }
    let da: usize = blocks.iter().map(|&(m, n)| m * n).sum();
    let db: usize = blocks.iter().map(|&(m, n)| m * n * dc).sum();
    let p = crate::qcore::random::random_distribution(blocks.len(), 0.1, rng);
    let mut v = vec![ZERO; da * db * dc];
    let (mut a_off, mut b_off) = (0, 0);
    for (j, &(m, n)) in blocks.iter().enumerate() {
        let omega = normalized_gaussian(m * m, rng);
        let phi = normalized_gaussian(n * dc * n * dc, rng);
        let s = p[j].sqrt();
        for mu in 0..m {
            for u in 0..m {
                for i in 0..n {
                    for c in 0..dc {
                        for w in 0..n * dc {
                            let a = a_off + mu * n + i;
                            let b = b_off + u * n * dc + w;
                            let amp = omega[mu * m + u] * phi[(i * dc + c) * n * dc + w];
                            v[(a * db + b) * dc + c] += amp * s;
                        }
                    }
                }
            }
        }
        a_off += m * n;
        b_off += m * n * dc;
    }
    let layout = SystemLayout::abc(da, db, dc)?;
    let psi = PureState::normalized(layout, v)?;
    let ua = random_unitary(da, rng);
    let ub = random_unitary(db, rng);
    let u = ua.kron(&ub).kron(&Matrix::identity(dc));
    PureState::normalized(psi.layout().clone(), u.mul_vec(psi.vector()))
}

fn normalized_gaussian<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..len).map(|_| complex_gaussian(rng)).collect();
    let n = vec_norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::{random_pure, seeded_rng};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn ghz() -> PureState {
        let mut v = vec![ZERO; 8];
        v[0] = c(1.0);
        v[7] = c(1.0);
        PureState::normalized(SystemLayout::abc(2, 2, 2).unwrap(), v).unwrap()
    }

    #[test]
    fn product_state_has_single_multiplicity_block() {
        let tol = Tolerances::default();
        let l = SystemLayout::new([("A", 2), ("C", 2)]).unwrap();
        let rho = DensityState::from_parts(
            l,
            Matrix::from_real_diag(&[0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4]),
        );
        let ki = ki_decompose(&rho, &["A"], &tol).unwrap();
        assert_eq!(ki.dims(), (1, 2, 1));
        assert_eq!(ki.blocks.len(), 1);
        assert!(ki.markovianizing_cost(1e-10).abs() < 1e-12);
    }

    #[test]
    fn bell_pair_is_all_correlated() {
        let tol = Tolerances::default();
        let l = SystemLayout::new([("A", 2), ("C", 2)]).unwrap();
        let v = vec![c(0.5f64.sqrt()), ZERO, ZERO, c(0.5f64.sqrt())];
        let rho = PureState::new(l, v, 1e-12).unwrap().to_density();
        let ki = ki_decompose(&rho, &["A"], &tol).unwrap();
        assert_eq!(ki.dims(), (1, 1, 2));
        assert!((ki.weighted_ar_entropy(1e-10) - 1.0).abs() < 1e-12);
        assert!((ki.markovianizing_cost(1e-10) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn classical_correlation_gives_a0() {
        let tol = Tolerances::default();
        let l = SystemLayout::new([("A", 2), ("C", 2)]).unwrap();
        let rho = DensityState::from_parts(l, Matrix::from_real_diag(&[0.5, 0.0, 0.0, 0.5]));
        let ki = ki_decompose(&rho, &["A"], &tol).unwrap();
        assert_eq!(ki.dims(), (2, 1, 1));
        for b in &ki.blocks {
            assert!((b.p - 0.5).abs() < 1e-12);
        }
        assert!((ki.entropy_p() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_extension_puts_copy_in_b0() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let psi = ghz();
        let ki = ki_of_pure(&psi, &g, &tol).unwrap();
        let form = extend_to_purification(&psi, &g, &ki, &tol).unwrap();
        assert_eq!(form.b_dims(), (2, 1, 1));
        assert!(form.fidelity > 1.0 - 1e-12);
    }

    #[test]
    fn bell_ab_times_c_extension_purifies_omega_in_bl() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let h = 0.5f64.sqrt();
        let mut v = vec![ZERO; 8];
        v[0] = c(h);
        v[6] = c(h);
        let psi = PureState::normalized(SystemLayout::abc(2, 2, 2).unwrap(), v).unwrap();
        let ki = ki_of_pure(&psi, &g, &tol).unwrap();
        assert_eq!(ki.dims(), (1, 2, 1));
        let form = extend_to_purification(&psi, &g, &ki, &tol).unwrap();
        assert_eq!(form.b_dims(), (1, 2, 1));
        assert!(form.fidelity > 1.0 - 1e-12);
    }

    #[test]
    fn random_pure_states_round_trip() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let mut rng = seeded_rng(11);
        for _ in 0..100 {
            let psi = random_pure(SystemLayout::abc(2, 2, 2).unwrap(), &mut rng).unwrap();
            let ki = ki_of_pure(&psi, &g, &tol).unwrap();
            let form = extend_to_purification(&psi, &g, &ki, &tol).unwrap();
            assert!(form.fidelity >= 1.0 - 1e-10, "{}", form.fidelity);
        }
    }

    #[test]
    fn planted_structure_is_recovered() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let mut rng = seeded_rng(5);
        let psi = planted_ki_state(&[(2, 1), (1, 2)], 2, &mut rng).unwrap();
        let ki = ki_of_pure(&psi, &g, &tol).unwrap();
        let mut dims: Vec<(usize, usize)> = ki.blocks.iter().map(|b| (b.m, b.n)).collect();
        dims.sort_unstable();
        assert_eq!(dims, vec![(1, 2), (2, 1)]);
        let form = extend_to_purification(&psi, &g, &ki, &tol).unwrap();
        assert!(form.fidelity >= 1.0 - 1e-10);
    }

    #[test]
    fn preserving_channels_leave_state_invariant() {
        let tol = Tolerances::default();
        let mut rng = seeded_rng(8);
        let psi = planted_ki_state(&[(2, 1), (2, 2)], 2, &mut rng).unwrap();
        let rho = psi.to_density();
        let ac = rho.partial_trace(&["A", "C"]).unwrap();
        let ki = ki_decompose(&ac, &["A"], &tol).unwrap();

        let ids: Vec<Matrix> = ki.blocks.iter().map(|b| Matrix::identity(b.m)).collect();
        let id = state_preserving_channel(&ki, &ids, &tol).unwrap();
        let out = id.apply(&ac, &["A"]).unwrap();
        assert!(trace_norm(&(out.matrix() - ac.matrix())) < 1e-12);

        let us: Vec<Matrix> = ki
            .blocks
            .iter()
            .map(|b| random_preserving_isometry(&b.omega, 3, &mut rng))
            .collect();
        let ch = state_preserving_channel(&ki, &us, &tol).unwrap();
        let out = ch.apply(&ac, &["A"]).unwrap();
        assert!(trace_norm(&(out.matrix() - ac.matrix())) < 1e-9);

        let mut bad = ids.clone();
        let j = ki.blocks.iter().position(|b| b.m == 2).unwrap();
        bad[j] = Matrix::from_fn(2, 2, |i, k| if i != k { c(1.0) } else { ZERO });
        assert!(state_preserving_channel(&ki, &bad, &tol).is_err());
    }
}
