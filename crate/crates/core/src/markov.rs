//! Markov states conditioned by `B`: tests, decompositions
//! `ρ ≅ ⊕_i q_i |i⟩⟨i|^{b₀} ⊗ σ_i^{A b_L} ⊗ φ_i^{b_R C}`, recovery channels built from
//! them, the squeezing map `T`, the canonical state `Ψ̃` and a lower-bound estimator
//! for `ζ_Ψ(ε)`.
//!
//! Functions take a state and a [`Tripartition`] and work on the grouped `A, B, C`
//! layout; returned states carry that layout.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::algebra::{decompose_generators, SplitIsometry};
use crate::channels::{
    apply_recovery, dephase, recovery_error, Direction, PetzMode, QuantumChannel,
};
use crate::kidecomp::{
    extend_to_purification, ki_of_pure, random_preserving_isometry, state_preserving_channel,
    TripartiteKIForm,
};
use crate::linalg::{eigh, Eigh, Matrix, C64, ZERO};
use crate::qcore::random::{random_distribution, random_full_rank, random_unitary, trial_rng};
use crate::qcore::{
    qcmi_abc, reduce_matrix, support_basis, trace_distance, trace_norm, DensityState, PureState,
    SystemLayout, Tolerances, Tripartition,
};
use crate::{Error, Result};

/// One summand `q_i σ_i ⊗ φ_i` of a Markov decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovEntry {
    pub q: f64,
    /// State on `A ⊗ b_L(i)`.
    pub sigma: Matrix,
    /// State on `b_R(i) ⊗ C`.
    pub phi: Matrix,
}

/// Markov decomposition of a state on `A, B, C`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovDecomposition {
    pub da: usize,
    pub db: usize,
    pub dc: usize,
    /// Isometry `supp(ρ^B) → b₀ ⊗ b_L ⊗ b_R`.
    pub gamma_prime: SplitIsometry,
    pub entries: Vec<MarkovEntry>,
    /// Trace-norm distance between the input and [`MarkovDecomposition::reconstruct`].
    pub residual: f64,
}

impl MarkovDecomposition {
    /// Padded `(d_{b₀}, d_{b_L}, d_{b_R})`.
    pub fn dims(&self) -> (usize, usize, usize) {
        self.gamma_prime.dims()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.q).collect()
    }

    /// `I_A ⊗ Γ′_i ⊗ I_C`, rows ordered `(A, b_L, b_R, C)`.
    fn block_map(&self, i: usize) -> Matrix {
        Matrix::identity(self.da)
            .kron(&self.gamma_prime.block_matrix(i))
            .kron(&Matrix::identity(self.dc))
    }

    /// `Σ_i (I ⊗ Γ′_i ⊗ I)† (q_i σ_i ⊗ φ_i) (I ⊗ Γ′_i ⊗ I)`.
    pub fn reconstruct(&self) -> Matrix {
        let d = self.da * self.db * self.dc;
        let mut out = Matrix::zeros(d, d);
        for (i, e) in self.entries.iter().enumerate() {
            let g = self.block_map(i);
            let x = e.sigma.kron(&e.phi).scale_real(e.q);
            out += &g.adjoint_mul(&x.matmul(&g));
        }
        out
    }

    pub fn reconstruct_state(&self) -> Result<DensityState> {
        Ok(DensityState::from_parts(
            SystemLayout::abc(self.da, self.db, self.dc)?,
            self.reconstruct().hermitian_part(),
        ))
    }
}

/// QCMI and plain-Petz recovery errors, plus the decomposition when one exists.
#[derive(Clone, Debug)]
pub struct MarkovReport {
    pub qcmi_bits: f64,
    pub petz_error_from_bc: f64,
    pub petz_error_from_ab: f64,
    pub markov: bool,
    pub decomposition: Option<MarkovDecomposition>,
    /// Reconstruction distance of the decomposition (the input is this close to an
    /// exact Markov state).
    pub epsilon_decomposable_bound: Option<f64>,
}

/// Markov test at threshold `tol.verify_tol` on the QCMI.
pub fn is_markov(
    rho: &DensityState,
    grouping: &Tripartition,
    tol: &Tolerances,
) -> Result<MarkovReport> {
    let abc = rho.grouped(grouping)?;
    let q = qcmi_abc(&abc, tol)?;
    let g = Tripartition::abc();
    let from_bc = recovery_error(&abc, &g, Direction::FromBC, PetzMode::Plain, tol)?;
    let from_ab = recovery_error(&abc, &g, Direction::FromAB, PetzMode::Plain, tol)?;
    let markov = q <= tol.verify_tol;
    let decomposition = if markov {
        markov_decompose(&abc, &g, tol).ok()
    } else {
        None
    };
    let bound = decomposition.as_ref().map(|d| d.residual);
    Ok(MarkovReport {
        qcmi_bits: q,
        petz_error_from_bc: from_bc,
        petz_error_from_ab: from_ab,
        markov,
        decomposition,
        epsilon_decomposable_bound: bound,
    })
}

/// Generators `W† X W` with `X = Tr_side[(E_kl ⊗ I) ρ]` for the matrix units of the
/// traced side, where `W = S D^{-1/2}` whitens `ρ^B` on its support.
fn conditional_generators(
    rho_xb: &Matrix,
    dx: usize,
    db: usize,
    x_first: bool,
    w: &Matrix,
) -> Vec<Matrix> {
    let mut out = Vec::with_capacity(dx * dx);
    for k in 0..dx {
        for l in 0..dx {
            let m = Matrix::from_fn(db, db, |b, b2| {
                if x_first {
                    rho_xb[(l * db + b, k * db + b2)]
                } else {
                    rho_xb[(b * dx + l, b2 * dx + k)]
                }
            });
            out.push(w.adjoint_mul(&m.matmul(w)));
        }
    }
    out
}

fn max_commutator(xs: &[Matrix], ys: &[Matrix]) -> f64 {
    let mut worst: f64 = 0.0;
    for x in xs {
        for y in ys {
            let scale = 1.0 + x.frobenius_norm() * y.frobenius_norm();
            worst = worst.max(x.commutator(y).frobenius_norm() / scale);
        }
    }
    worst
}

/// Markov decomposition of `rho` conditioned by the B group.
pub fn markov_decompose(
    rho: &DensityState,
    grouping: &Tripartition,
    tol: &Tolerances,
) -> Result<MarkovDecomposition> {
    let abc = rho.grouped(grouping)?;
    let q = qcmi_abc(&abc, tol)?;
    if q > tol.verify_tol {
        return Err(Error::NotMarkov(q));
    }
    let dims = abc.layout().dims();
    let (da, db, dc) = (dims[0], dims[1], dims[2]);
    let rho_ab = abc.reduce_to(&[0, 1]).into_matrix();
    let rho_bc = abc.reduce_to(&[1, 2]).into_matrix();
    let eg = eigh(&reduce_matrix(&rho_ab, &[da, db], &[1]));
    let s = support_basis(&eg, tol.support_cutoff_rel);
    let floor = tol.support_cutoff_rel * eg.max_value();
    let inv_half: Vec<f64> = eg
        .values
        .iter()
        .filter(|&&l| l > floor && l > 0.0)
        .map(|l| 1.0 / l.sqrt())
        .collect();
    let w = s.matmul(&Matrix::from_real_diag(&inv_half));

    let gen_a = conditional_generators(&rho_ab, da, db, true, &w);
    let gen_c = conditional_generators(&rho_bc, dc, db, false, &w);
    let comm = max_commutator(&gen_a, &gen_c);
    if comm > tol.verify_tol.sqrt() {
        return Err(Error::verification(
            "commutation of the B-side algebras",
            comm,
            tol.verify_tol.sqrt(),
        ));
    }
    let all: Vec<Matrix> = gen_a.iter().chain(&gen_c).cloned().collect();
    let (_, joint) = decompose_generators(&all, tol.algebra_closure_tol, tol.verify_tol)?;
    let su = s.matmul(&joint.iso);

    // Per joint block: split M_{n_i} into the A-side and C-side factors.
    let mut raw: Vec<(f64, usize, usize, Matrix)> = Vec::new();
    for (i, b) in joint.blocks.iter().enumerate() {
        let (n, m) = (b.n, b.m);
        let factors: Vec<Matrix> = gen_a.iter().map(|x| joint.factor(x, i)).collect();
        let (_, inner) = decompose_generators(&factors, tol.algebra_closure_tol, tol.verify_tol)?;
        if inner.blocks.len() != 1 {
            return Err(Error::verification(
                "A-side algebra is not a factor within a joint block",
                inner.blocks.len() as f64,
                1.0,
            ));
        }
        let (nl, nr) = (inner.blocks[0].n, inner.blocks[0].m);
        let ua = &inner.iso;
        // Row (l·m + μ, r) of Γ′_i is the conjugate of Σ_k U_A[k, l·nR + r] e_{off + k·m + μ}.
        let (bl, br) = (nl * m, nr);
        let mut gi = Matrix::zeros(bl * br, db);
        for l in 0..nl {
            for mu in 0..m {
                for r in 0..nr {
                    let row = (l * m + mu) * br + r;
                    for bb in 0..db {
                        let mut z = ZERO;
                        for k in 0..n {
                            z += ua[(k, l * nr + r)] * su[(bb, b.offset + k * m + mu)];
                        }
                        gi[(row, bb)] = z.conj();
                    }
                }
            }
        }
        let g = Matrix::identity(da).kron(&gi).kron(&Matrix::identity(dc));
        let x = g.matmul(&abc.matrix().mul_adjoint(&g));
        let qi = x.trace().re;
        raw.push((qi, bl, br, gi));
    }
    raw.sort_by_key(|(q, bl, br, _)| (-((q * 1e12).round() as i64), *bl, *br));

    let blocks: Vec<(usize, usize)> = raw.iter().map(|r| (r.1, r.2)).collect();
    let mut gp = SplitIsometry {
        matrix: Matrix::zeros(1, 1),
        blocks,
    };
    let (d0, dl, dr) = gp.dims();
    let mut mat = Matrix::zeros(d0 * dl * dr, db);
    for (i, (_, bl, br, gi)) in raw.iter().enumerate() {
        for u in 0..*bl {
            for v in 0..*br {
                let row = gp.row(i, u, v);
                for bb in 0..db {
                    mat[(row, bb)] = gi[(u * br + v, bb)];
                }
            }
        }
    }
    gp.matrix = mat;
    let mut md = MarkovDecomposition {
        da,
        db,
        dc,
        gamma_prime: gp,
        entries: Vec::new(),
        residual: 0.0,
    };
    for (i, (qi, bl, br, _)) in raw.iter().enumerate() {
        let g = md.block_map(i);
        let x = g.matmul(&abc.matrix().mul_adjoint(&g));
        if *qi <= 0.0 {
            return Err(Error::verification(
                "Markov block weight",
                qi.abs(),
                tol.verify_tol,
            ));
        }
        let sigma = reduce_matrix(&x, &[da * bl, br * dc], &[0]).scale_real(1.0 / qi);
        let phi = reduce_matrix(&x, &[da * bl, br * dc], &[1]).scale_real(1.0 / qi);
        md.entries.push(MarkovEntry {
            q: *qi,
            sigma: sigma.hermitian_part(),
            phi: phi.hermitian_part(),
        });
    }
    md.residual = trace_norm(&(abc.matrix() - &md.reconstruct()));
    if !(md.residual <= tol.verify_tol) {
        return Err(Error::verification(
            "Markov reconstruction",
            md.residual,
            tol.verify_tol,
        ));
    }
    Ok(md)
}

/// Purifying vectors `√s_k |s_k⟩` of a state (columns, descending eigenvalues).
fn weighted_eigenvectors(eg: &Eigh, cutoff_rel: f64) -> Vec<Vec<C64>> {
    let floor = cutoff_rel * eg.max_value();
    (0..eg.dim())
        .rev()
        .filter(|&k| eg.values[k] > floor && eg.values[k] > 0.0)
        .map(|k| {
            let s = eg.values[k].sqrt();
            eg.vector(k).into_iter().map(|z| z * s).collect()
        })
        .collect()
}

/// Exact recovery channel on `B` read off a Markov decomposition: measure `b₀`,
/// discard `b_L` (resp. `b_R`), prepare `σ_i` on `A b_L` (resp. `φ_i` on `b_R C`).
/// For [`Direction::FromBC`] the output layout is `A, B`; for [`Direction::FromAB`]
/// it is `B, C`.
pub fn recovery_from_decomposition(
    md: &MarkovDecomposition,
    direction: Direction,
    tol: &Tolerances,
) -> Result<QuantumChannel> {
    let (da, db, dc) = (md.da, md.db, md.dc);
    let gp = &md.gamma_prime;
    let mut kraus = Vec::new();
    for (i, e) in md.entries.iter().enumerate() {
        let (bl, br) = gp.blocks[i];
        let gi = gp.block_matrix(i);
        match direction {
            Direction::FromBC => {
                let vecs = weighted_eigenvectors(&eigh(&e.sigma), tol.support_cutoff_rel);
                for x in 0..bl {
                    // P[v, b'] = Γ′_i[(x, v), b'].
                    let p = Matrix::from_fn(br, db, |v, b2| gi[(x * br + v, b2)]);
                    for psi in &vecs {
                        let mut k = Matrix::zeros(da * db, db);
                        for a in 0..da {
                            let col = Matrix::from_fn(bl, 1, |u, _| psi[a * bl + u]);
                            let ka = gi.adjoint_mul(&col.kron(&p));
                            for b in 0..db {
                                for b2 in 0..db {
                                    k[(a * db + b, b2)] = ka[(b, b2)];
                                }
                            }
                        }
                        kraus.push(k);
                    }
                }
            }
            Direction::FromAB => {
                let vecs = weighted_eigenvectors(&eigh(&e.phi), tol.support_cutoff_rel);
                for y in 0..br {
                    // P[u, b'] = Γ′_i[(u, y), b'].
                    let p = Matrix::from_fn(bl, db, |u, b2| gi[(u * br + y, b2)]);
                    for psi in &vecs {
                        let mut k = Matrix::zeros(db * dc, db);
                        for c in 0..dc {
                            let col = Matrix::from_fn(br, 1, |v, _| psi[v * dc + c]);
                            let kc = gi.adjoint_mul(&p.kron(&col));
                            for b in 0..db {
                                for b2 in 0..db {
                                    k[(b * dc + c, b2)] = kc[(b, b2)];
                                }
                            }
                        }
                        kraus.push(k);
                    }
                }
            }
        }
    }
    let comp = &Matrix::identity(db) - &gp.domain_projector();
    if comp.max_abs() > tol.verify_tol {
        let k = match direction {
            Direction::FromBC => {
                Matrix::from_fn(
                    da * db,
                    db,
                    |r, b2| {
                        if r < db {
                            comp[(r, b2)]
                        } else {
                            ZERO
                        }
                    },
                )
            }
            Direction::FromAB => Matrix::from_fn(db * dc, db, |r, b2| {
                if r % dc == 0 {
                    comp[(r / dc, b2)]
                } else {
                    ZERO
                }
            }),
        };
        kraus.push(k);
    }
    let b = SystemLayout::single("B", db)?;
    let out = match direction {
        Direction::FromBC => SystemLayout::single("A", da)?.concat(&b)?,
        Direction::FromAB => b.concat(&SystemLayout::single("C", dc)?)?,
    };
    QuantumChannel::new(b, out, kraus, tol.verify_tol)
}

/// `‖ρ − ℛ(marginal of ρ)‖₁` for a recovery channel from
/// [`recovery_from_decomposition`].
pub fn decomposition_recovery_error(
    rho: &DensityState,
    grouping: &Tripartition,
    channel: &QuantumChannel,
    direction: Direction,
) -> Result<f64> {
    let abc = rho.grouped(grouping)?;
    let out = apply_recovery(channel, &abc, direction)?;
    trace_distance(&abc, &out)
}

/// Output of the squeezing map.
#[derive(Clone, Debug)]
pub struct Squeezed {
    pub state: DensityState,
    /// `Tr[(I ⊗ Γ′†Γ′ ⊗ I) ρ]`, the weight of `ρ` on the domain of `Γ′`.
    pub weight: f64,
}

/// `T(ρ) = Γ′†(Σ_i p_i |i⟩⟨i| ⊗ ρ_i^{A b_L} ⊗ ρ_i^{b_R C})Γ′`, where the blocks are read
/// off `(I ⊗ Γ′ ⊗ I) ρ (I ⊗ Γ′ ⊗ I)†` and the result is normalized by the weight.
pub fn squeeze_t(
    rho: &DensityState,
    grouping: &Tripartition,
    gamma_prime: &SplitIsometry,
) -> Result<Squeezed> {
    let abc = rho.grouped(grouping)?;
    let dims = abc.layout().dims();
    let (da, db, dc) = (dims[0], dims[1], dims[2]);
    if gamma_prime.in_dim() != db {
        return Err(Error::DimensionMismatch("Γ′ does not act on B".into()));
    }
    let d = da * db * dc;
    let mut out = Matrix::zeros(d, d);
    let mut weight = 0.0;
    for i in 0..gamma_prime.d0() {
        let (bl, br) = gamma_prime.blocks[i];
        let g = Matrix::identity(da)
            .kron(&gamma_prime.block_matrix(i))
            .kron(&Matrix::identity(dc));
        let x = g.matmul(&abc.matrix().mul_adjoint(&g));
        let p = x.trace().re;
        weight += p;
        if p <= 0.0 {
            continue;
        }
        let left = reduce_matrix(&x, &[da * bl, br * dc], &[0]);
        let right = reduce_matrix(&x, &[da * bl, br * dc], &[1]);
        let y = left.kron(&right).scale_real(1.0 / p);
        out += &g.adjoint_mul(&y.matmul(&g));
    }
    if weight <= 0.0 {
        return Err(Error::InvalidState(
            "state has no weight on the domain of Γ′".into(),
        ));
    }
    Ok(Squeezed {
        state: DensityState::from_parts(
            abc.layout().clone(),
            out.scale_real(1.0 / weight).hermitian_part(),
        ),
        weight,
    })
}

/// `Ψ̃ = Σ_j p_j |j⟩⟨j|^{a₀} ⊗ |j⟩⟨j|^{b₀} ⊗ ω_j^{a_L} ⊗ ω_j^{b_L} ⊗ |φ_j⟩⟨φ_j|^{a_R b_R C}`,
/// mapped back through `Γ` and `Γ′`.
pub fn nearest_markov_tilde(
    psi: &PureState,
    grouping: &Tripartition,
    tol: &Tolerances,
) -> Result<DensityState> {
    let ki = ki_of_pure(psi, grouping, tol)?;
    let form = extend_to_purification(psi, grouping, &ki, tol)?;
    tilde_from_form(&form, psi.grouped(grouping)?.layout().clone())
}

pub(crate) fn tilde_from_form(
    form: &TripartiteKIForm,
    layout: SystemLayout,
) -> Result<DensityState> {
    let d = layout.total_dim();
    let mut out = Matrix::zeros(d, d);
    for (j, b) in form.blocks.iter().enumerate() {
        let wo = &form.omega_purifications[j];
        let (m, r) = (wo.rows(), wo.cols());
        let mu: Vec<f64> = (0..r)
            .map(|k| wo.column(k).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .collect();
        for k in 0..r {
            for k2 in 0..r {
                // √μ_k √μ_k' |f_k⟩⟨k'|: column k of W_ω moved to column k', scaled.
                let s = mu[k2].sqrt();
                let w = Matrix::from_fn(m, r, |x, u| if u == k2 { wo[(x, k)] * s } else { ZERO });
                let v = form.block_vector(j, &w);
                out += &Matrix::outer(&v, &v).scale_real(b.p);
            }
        }
    }
    Ok(DensityState::from_parts(layout, out.hermitian_part()))
}

/// Lower-bound estimate of `ζ_Ψ(ε)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZetaEstimate {
    pub epsilon: f64,
    pub value: f64,
    pub candidates: usize,
    pub feasible: usize,
}

/// Slack on the feasibility test `‖𝒢(Ψ^{AC}) − Ψ^{AC}‖₁ ≤ ε`.
const ZETA_SLACK: f64 = 1e-12;

/// Randomized search over channels `𝒢` on `A` with `‖𝒢(Ψ^{AC}) − Ψ^{AC}‖₁ ≤ ε`,
/// maximizing `‖𝒢(Ψ̃) − Ψ̃‖₁`. The candidate set depends only on `(Ψ, budget, seed)`,
/// so the estimate is nondecreasing in `ε`. The identity channel is always included.
pub fn estimate_zeta(
    psi: &PureState,
    grouping: &Tripartition,
    epsilon: f64,
    budget: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ZetaEstimate> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument("ε must be nonnegative".into()));
    }
    let scores = zeta_candidates(psi, grouping, budget, seed, tol)?;
    Ok(zeta_from_candidates(&scores, epsilon))
}

/// Evaluates the estimate at `epsilon` from precomputed [`zeta_candidates`] scores.
pub fn zeta_from_candidates(scores: &[(f64, f64)], epsilon: f64) -> ZetaEstimate {
    let mut value: f64 = 0.0;
    let mut feasible = 0;
    for &(d_ac, d_tilde) in scores {
        if d_ac <= epsilon + ZETA_SLACK {
            feasible += 1;
            value = value.max(d_tilde);
        }
    }
    ZetaEstimate {
        epsilon,
        value,
        candidates: scores.len(),
        feasible,
    }
}

/// `(‖𝒢(Ψ^{AC}) − Ψ^{AC}‖₁, ‖𝒢(Ψ̃) − Ψ̃‖₁)` for the identity and `budget` random
/// candidates. Candidate `t` uses stream `t` of `seed` and cycles through unitary
/// mixtures near the identity, dephasing in a perturbed KI basis, and KI-preserving
/// channels.
pub fn zeta_candidates(
    psi: &PureState,
    grouping: &Tripartition,
    budget: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<(f64, f64)>> {
    let g = psi.grouped(grouping)?;
    let ki = ki_of_pure(psi, grouping, tol)?;
    let form = extend_to_purification(psi, grouping, &ki, tol)?;
    let tilde = tilde_from_form(&form, g.layout().clone())?;
    let ac = g.to_density().reduce_to(&[0, 2]);
    let da = ki.a_dim();
    let a_layout = SystemLayout::single("A", da)?;
    let ki_basis = ki_basis(&ki.gamma, da);

    let mut out = vec![(0.0, 0.0)];
    for t in 0..budget {
        let mut rng = trial_rng(seed, t as u64);
        let scale = 10f64.powf(-3.0 * rng.random::<f64>());
        let channel = match t % 3 {
            0 => {
                let k = 2 + (t / 3) % 3;
                let mut kraus = Vec::with_capacity(k);
                for _ in 0..k {
                    let u = exp_i_hermitian(&random_hermitian(da, &mut rng), scale);
                    kraus.push(u.scale_real(1.0 / (k as f64).sqrt()));
                }
                QuantumChannel::new(a_layout.clone(), a_layout.clone(), kraus, tol.verify_tol)?
            }
            1 => {
                let u = exp_i_hermitian(&random_hermitian(da, &mut rng), scale).matmul(&ki_basis);
                let basis: Vec<Vec<C64>> = (0..da).map(|c| u.column(c)).collect();
                dephase(a_layout.clone(), &basis, 1e-8)?
            }
            _ => {
                let env = 2 + (t / 3) % 2;
                let us: Vec<Matrix> = ki
                    .blocks
                    .iter()
                    .map(|b| random_preserving_isometry(&b.omega, env, &mut rng))
                    .collect();
                let ch = state_preserving_channel(&ki, &us, tol)?;
                QuantumChannel::new(
                    a_layout.clone(),
                    a_layout.clone(),
                    ch.into_kraus(),
                    tol.verify_tol,
                )?
            }
        };
        let d_ac = trace_distance(&channel.apply(&ac, &["A"])?, &ac)?;
        let d_tilde = trace_distance(&channel.apply(&tilde, &["A"])?, &tilde)?;
        out.push((d_ac, d_tilde));
    }
    Ok(out)
}

/// Orthonormal basis of `A` whose first vectors are the rows of `Γ` (the KI product
/// basis), completed to a unitary.
fn ki_basis(gamma: &SplitIsometry, da: usize) -> Matrix {
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for j in 0..gamma.d0() {
        let gj = gamma.block_matrix(j);
        for r in 0..gj.rows() {
            cols.push(gj.row(r).iter().map(|z| z.conj()).collect());
        }
    }
    for e in 0..da {
        let mut v = vec![ZERO; da];
        v[e] = C64::new(1.0, 0.0);
        cols.push(v);
    }
    let basis = crate::linalg::orthonormalize(&cols, 1e-8);
    Matrix::from_columns(da, &basis[..da])
}

fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let g = crate::qcore::random::gaussian_matrix(d, d, rng);
    let h = g.hermitian_part();
    let n = h.frobenius_norm().max(f64::MIN_POSITIVE);
    h.scale_real(1.0 / n)
}

/// `exp(i s H)` for Hermitian `H`.
fn exp_i_hermitian(h: &Matrix, s: f64) -> Matrix {
    eigh(h).map(|l| C64::from_polar(1.0, s * l))
}

/// Planted Markov state `Σ_i q_i Γ′_i†(σ_i ⊗ φ_i)Γ′_i` on `A, B, C` with
/// `d_B = Σ b_L(i) b_R(i)`, random full-rank `σ_i`, `φ_i`, and a random unitary on `B`.
pub fn planted_markov_state<R: Rng + ?Sized>(
    da: usize,
    dc: usize,
    blocks: &[(usize, usize)],
    rng: &mut R,
) -> Result<DensityState> {
    if blocks.is_empty() || blocks.iter().any(|&(l, r)| l == 0 || r == 0) {
        return Err(Error::InvalidArgument(
            "planted Markov blocks need positive dims".into(),
        ));
    }
    let db: usize = blocks.iter().map(|&(l, r)| l * r).sum();
    let q = random_distribution(blocks.len(), 0.1, rng);
    let d = da * db * dc;
    let mut m = Matrix::zeros(d, d);
    let mut off = 0;
    for (i, &(bl, br)) in blocks.iter().enumerate() {
        let sigma = random_full_rank(SystemLayout::single("X", da * bl)?, rng)?.into_matrix();
        let phi = random_full_rank(SystemLayout::single("Y", br * dc)?, rng)?.into_matrix();
        let x = sigma.kron(&phi);
        // Embed (a, u, v, c) ↦ (a, off + u·br + v, c).
        let idx = |a: usize, u: usize, v: usize, c: usize| (a * db + off + u * br + v) * dc + c;
        let n = da * bl * br * dc;
        let coords: Vec<usize> = (0..n)
            .map(|z| {
                let c = z % dc;
                let v = (z / dc) % br;
                let u = (z / (dc * br)) % bl;
                let a = z / (dc * br * bl);
                idx(a, u, v, c)
            })
            .collect();
        for (r, &rr) in coords.iter().enumerate() {
            for (s, &ss) in coords.iter().enumerate() {
                m[(rr, ss)] += x[(r, s)] * q[i];
            }
        }
        off += bl * br;
    }
    let ub = random_unitary(db, rng);
    let u = Matrix::identity(da).kron(&ub).kron(&Matrix::identity(dc));
    let m = m.conjugate_by(&u);
    Ok(DensityState::from_parts(
        SystemLayout::abc(da, db, dc)?,
        m.hermitian_part(),
    ))
}

/// `ρ = (1 − λ)Υ + λτ` with `τ` random full rank and `λ` chosen so that
/// `‖ρ − Υ‖₁ = ε`. Returns `(ρ, ε)`; `ε` is capped at `‖τ − Υ‖₁`.
pub fn perturb_with_noise<R: Rng + ?Sized>(
    upsilon: &DensityState,
    epsilon: f64,
    rng: &mut R,
) -> Result<(DensityState, f64)> {
    let tau = random_full_rank(upsilon.layout().clone(), rng)?;
    let gap = trace_distance(&tau, upsilon)?;
    let lambda = if gap > 0.0 {
        (epsilon / gap).min(1.0)
    } else {
        0.0
    };
    let rho = upsilon.mix(&tau, lambda)?;
    Ok((rho, lambda * gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::qcmi;
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
    fn planted_states_decompose_and_recover() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let mut rng = seeded_rng(21);
        let rho = planted_markov_state(2, 2, &[(2, 2), (2, 2)], &mut rng).unwrap();
        let rep = is_markov(&rho, &g, &tol).unwrap();
        assert!(rep.markov && rep.qcmi_bits < 1e-10);
        assert!(rep.petz_error_from_bc < 1e-8 && rep.petz_error_from_ab < 1e-8);
        let md = markov_decompose(&rho, &g, &tol).unwrap();
        assert_eq!(md.dims(), (2, 2, 2));
        for dir in [Direction::FromBC, Direction::FromAB] {
            let ch = recovery_from_decomposition(&md, dir, &tol).unwrap();
            assert!(decomposition_recovery_error(&rho, &g, &ch, dir).unwrap() < 1e-9);
        }
        let t = squeeze_t(&rho, &g, &md.gamma_prime).unwrap();
        assert!((t.weight - 1.0).abs() < 1e-12);
        assert!(trace_distance(&t.state, &rho).unwrap() < 1e-10);
    }

    #[test]
    fn classical_markov_state_has_only_b0() {
        let tol = Tolerances::default();
        let mut m = Matrix::zeros(8, 8);
        m[(0, 0)] = c(0.5);
        m[(7, 7)] = c(0.5);
        let rho = DensityState::from_parts(SystemLayout::abc(2, 2, 2).unwrap(), m);
        // Dephased GHZ: B is a classical copy.
        let md = markov_decompose(&rho, &Tripartition::abc(), &tol).unwrap();
        assert_eq!(md.dims(), (2, 1, 1));
        let rho = ghz().to_density();
        assert!(matches!(
            markov_decompose(&rho, &Tripartition::abc(), &tol),
            Err(Error::NotMarkov(_))
        ));
        let rep = is_markov(&rho, &Tripartition::abc(), &tol).unwrap();
        assert!((rep.qcmi_bits - 1.0).abs() < 1e-12);
        assert!((rep.petz_error_from_bc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squeeze_bound_on_perturbed_states() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let mut rng = seeded_rng(4);
        for _ in 0..10 {
            let ups = planted_markov_state(2, 2, &[(1, 2), (2, 1)], &mut rng).unwrap();
            let md = markov_decompose(&ups, &g, &tol).unwrap();
            let (rho, eps) = perturb_with_noise(&ups, 0.05, &mut rng).unwrap();
            let t = squeeze_t(&rho, &g, &md.gamma_prime).unwrap();
            assert!(trace_distance(&rho, &t.state).unwrap() <= 6.0 * eps);
            assert!(qcmi(&t.state, &g, &tol).unwrap() < 1e-9);
        }
    }

    #[test]
    fn tilde_of_ghz_is_dephased_ghz() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let t = nearest_markov_tilde(&ghz(), &g, &tol).unwrap();
        let mut expect = Matrix::zeros(8, 8);
        expect[(0, 0)] = c(0.5);
        expect[(7, 7)] = c(0.5);
        assert!((t.matrix() - &expect).max_abs() < 1e-12);
        assert!(qcmi(&t, &g, &tol).unwrap() < 1e-9);
    }

    #[test]
    fn tilde_keeps_a_marginal_and_matches_cost() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let mut rng = seeded_rng(2);
        let psi = crate::kidecomp::planted_ki_state(&[(2, 1), (1, 2)], 2, &mut rng).unwrap();
        let t = nearest_markov_tilde(&psi, &g, &tol).unwrap();
        let a = psi.to_density().reduce_to(&[0]);
        assert!((t.reduce_to(&[0]).matrix() - a.matrix()).max_abs() < 1e-12);
        let ki = ki_of_pure(&psi, &g, &tol).unwrap();
        let i = crate::qcore::mutual_information(&t, &["A"], &["B", "C"], &tol).unwrap();
        assert!((i - ki.markovianizing_cost(tol.support_cutoff_rel)).abs() < 1e-9);
        let psi = random_pure(SystemLayout::abc(2, 2, 2).unwrap(), &mut rng).unwrap();
        let t = nearest_markov_tilde(&psi, &g, &tol).unwrap();
        assert!(trace_distance(&t, &psi.to_density()).unwrap() < 1e-9);
    }

    #[test]
    fn zeta_estimate_is_monotone_and_zero_at_zero() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let mut rng = seeded_rng(9);
        let psi = crate::kidecomp::planted_ki_state(&[(2, 1), (1, 1)], 2, &mut rng).unwrap();
        let mut last = 0.0;
        for eps in [0.0, 0.01, 0.1, 0.5, 2.0] {
            let z = estimate_zeta(&psi, &g, eps, 12, 3, &tol).unwrap();
            assert!(z.value >= last);
            if eps == 0.0 {
                assert!(z.value < 1e-9, "{}", z.value);
            }
            last = z.value;
        }
        assert!(last > 0.0);
    }
}
