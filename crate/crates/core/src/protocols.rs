//! Finite-n Markovianization: the exact KI twirl, the measurement-induced protocol,
//! and verifier harnesses for the recoverability bounds.
//!
//! Harnesses come in two layers. `*_trial` functions compute one reproducible trial
//! from `(seed, trial)`; the `verify_*` drivers run trials in order and summarize.
//! Callers that parallelize can map the trial functions themselves and merge with the
//! `from_trials` constructors.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::channels::{
    apply_recovery, best_rotated_petz, recovery_error, Direction, PetzMode, QuantumChannel,
    RandomUnitaryEnsemble,
};
use crate::kidecomp::{
    ki_of_pure, random_preserving_isometry, state_preserving_channel, KIDecomposition,
};
use crate::linalg::{vec_inner, Matrix, C64, ZERO};
use crate::markov::{
    markov_decompose, perturb_with_noise, planted_markov_state, recovery_from_decomposition,
    squeeze_t, zeta_candidates, zeta_from_candidates,
};
use crate::qcore::random::{random_pure, random_state, random_unitary, trial_rng};
use crate::qcore::{
    binary_entropy, eta, matrix_entropy, qcmi, qcmi_pure, recoverability_transfer, root_fidelity,
    trace_distance, DensityState, PureState, SystemLayout, Tolerances, Tripartition,
};
use crate::{Error, Result};

/// Largest total dimension of `Ψ^{⊗n}` the simulators accept.
pub const SIZE_GUARD: usize = 4096;

/// Largest total dimension accepted by the harnesses.
pub const HARNESS_MAX_DIM: usize = 64;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// `X^a Z^c` in dimension `d`.
fn weyl(d: usize, a: usize, c: usize) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for s in 0..d {
        let theta = 2.0 * core::f64::consts::PI * ((c * s) % d) as f64 / d as f64;
        m[((s + a) % d, s)] = C64::from_polar(1.0, theta);
    }
    m
}

/// Grouping of `Ψ^{⊗n}` with copy `k` labeled `X#k`, copies in order within each group.
pub fn copies_grouping(grouping: &Tripartition, n: usize) -> Tripartition {
    let expand = |labels: &[String]| -> Vec<String> {
        (1..=n)
            .flat_map(|k| labels.iter().map(move |l| format!("{l}#{k}")))
            .collect()
    };
    Tripartition {
        a: expand(&grouping.a),
        b: expand(&grouping.b),
        c: expand(&grouping.c),
    }
}

fn check_size(psi: &PureState, n: usize) -> Result<PureState> {
    let d = psi.dim();
    let mut total: usize = 1;
    for _ in 0..n {
        total = total.saturating_mul(d);
    }
    if total > SIZE_GUARD {
        return Err(Error::SizeGuard(total, SIZE_GUARD));
    }
    psi.tensor_power(n)
}

/// Single-copy twirl unitaries
/// `Σ_j e^{2πi jb/d_{a₀}} Γ_j†(I_{a_L} ⊗ X^a Z^c)Γ_j + (I − Γ†Γ)` for `b < d_{a₀}` and
/// `a, c < L`, where `L` is the least common multiple of the `a_R` block dimensions.
pub fn twirl_unitaries(ki: &KIDecomposition) -> Vec<Matrix> {
    let gamma = &ki.gamma;
    let da = ki.a_dim();
    let d0 = gamma.d0();
    let l = gamma.blocks.iter().fold(1, |acc, &(_, n)| lcm(acc, n));
    let comp = &Matrix::identity(da) - &gamma.domain_projector();
    let maps: Vec<Matrix> = (0..d0).map(|j| gamma.block_matrix(j)).collect();
    let mut out = Vec::with_capacity(d0 * l * l);
    for b in 0..d0 {
        for a in 0..l {
            for c in 0..l {
                let mut v = comp.clone();
                for (j, g) in maps.iter().enumerate() {
                    let (m, n) = gamma.blocks[j];
                    let theta = 2.0 * core::f64::consts::PI * ((j * b) % d0) as f64 / d0 as f64;
                    let w = Matrix::identity(m).kron(&weyl(n, a % n, c % n));
                    v.add_scaled(C64::from_polar(1.0, theta), &g.adjoint_mul(&w.matmul(g)));
                }
                out.push(v);
            }
        }
    }
    out
}

/// Product twirl ensemble on `A#1 … A#n` built from the single-copy KI data.
pub fn build_twirl_ensemble(
    ki: &KIDecomposition,
    n: usize,
    tol: &Tolerances,
) -> Result<RandomUnitaryEnsemble> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let single = twirl_unitaries(ki);
    let mut ens = RandomUnitaryEnsemble::new(
        ki.a_layout.with_suffix("#1"),
        single.clone(),
        tol.verify_tol,
    )?;
    for k in 2..=n {
        let copy = RandomUnitaryEnsemble::new(
            ki.a_layout.with_suffix(&format!("#{k}")),
            single.clone(),
            tol.verify_tol,
        )?;
        ens = ens.tensor(&copy)?;
    }
    Ok(ens)
}

/// Plain Petz recovery errors of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecoveryErrors {
    /// From `B^n C^n`.
    pub from_bc: f64,
    /// From `A^n B^n`.
    pub from_ab: f64,
}

#[derive(Clone, Debug)]
pub struct MarkovianizationRun {
    pub n: usize,
    /// Grouping of the output into `A^n | B^n | C^n`.
    pub grouping: Tripartition,
    pub ensemble: RandomUnitaryEnsemble,
    pub output: DensityState,
    /// `I(A:C|B)` of the single-copy input.
    pub qcmi_in: f64,
    pub qcmi_out: f64,
    pub recovery_errors: RecoveryErrors,
    pub cost_bits_per_copy: f64,
    /// Single-letter Markovianizing cost of the input.
    pub m_dec_bits: f64,
    /// `max |Tr_{A^n}(output) − (Ψ^{BC})^{⊗n}|` entrywise.
    pub marginal_defect: f64,
}

/// Applies the KI twirl to `Ψ^{⊗n}`.
pub fn markovianize(
    psi: &PureState,
    grouping: &Tripartition,
    n: usize,
    tol: &Tolerances,
) -> Result<MarkovianizationRun> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let psi_n = check_size(psi, n)?;
    let ki = ki_of_pure(psi, grouping, tol)?;
    let ensemble = build_twirl_ensemble(&ki, n, tol)?;
    let targets: Vec<&str> = ensemble.layout().labels().collect();
    let output = ensemble.apply_to_pure(&psi_n, &targets)?;
    let gn = copies_grouping(grouping, n);
    let qcmi_out = qcmi(&output, &gn, tol)?;
    let from_bc = recovery_error(&output, &gn, Direction::FromBC, PetzMode::Plain, tol)?;
    let from_ab = recovery_error(&output, &gn, Direction::FromAB, PetzMode::Plain, tol)?;
    let rest: Vec<String> = gn.b.iter().chain(&gn.c).cloned().collect();
    let marginal_defect =
        (output.partial_trace(&rest)?.matrix() - psi_n.reduce(&rest)?.matrix()).max_abs();
    Ok(MarkovianizationRun {
        n,
        grouping: gn,
        cost_bits_per_copy: ensemble.cost_bits() / n as f64,
        ensemble,
        output,
        qcmi_in: qcmi_pure(psi, grouping, tol)?,
        qcmi_out,
        recovery_errors: RecoveryErrors { from_bc, from_ab },
        m_dec_bits: ki.markovianizing_cost(tol.support_cutoff_rel),
        marginal_defect,
    })
}

/// Settings for [`measurement_protocol`].
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOptions {
    /// Random candidates for the `ζ_Ψ` estimate.
    pub zeta_budget: usize,
    pub seed: u64,
    /// Rotation grid for the best-Petz search behind `ε′_k`.
    pub t_grid: Vec<f64>,
}

impl Default for MeasurementOptions {
    fn default() -> Self {
        MeasurementOptions {
            zeta_budget: 24,
            seed: 0,
            t_grid: vec![0.0],
        }
    }
}

/// Diagnostics of one measurement outcome `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDiagnostics {
    pub probability: f64,
    /// `|⟨Ψ_𝒱|Z_k Ψ_k⟩|²`.
    pub corrected_fidelity: f64,
    /// `‖(Ψ^{⊗n})^{B̄C̄} − Ψ_k^{B̄C̄}‖₁`.
    pub epsilon: f64,
    /// `‖Ψ_k^{ĀB̄C̄} − ℛ(Ψ_k^{ĀB̄})‖₁` for the best Petz map `B̄ → B̄C̄`.
    pub epsilon_prime: f64,
    /// `I(G:B̄C̄)_{Ψ_k}`.
    pub mutual_info: f64,
    /// `5η(2√ε_k) + 2η(ζ̂(2√ε_k + 2√f(ε′_k, d_C^n)))` with the `ζ` lower-bound estimate.
    pub xi: f64,
}

#[derive(Clone, Debug)]
pub struct MeasurementRun {
    pub n: usize,
    /// Number of outcomes `K`.
    pub outcomes: usize,
    /// `log₂ K / n`.
    pub rate: f64,
    /// `M_k : Ā ⊗ A₀ → Ā`, column index `ā·K + j`.
    pub measurement: Vec<Matrix>,
    /// `K^{-1/2} Σ_j |j⟩^{A₀}|j⟩^G`.
    pub resource: PureState,
    /// `‖Σ_k M_k†M_k − I‖∞`.
    pub completeness_defect: f64,
    /// Post-measurement states on `Ā`, `B̄C̄` (layout order), `G`.
    pub post_states: Vec<PureState>,
    pub diagnostics: Vec<OutcomeDiagnostics>,
    /// `Σ_k p_k I(G:B̄C̄)_{Ψ_k}`.
    pub mutual_info_av: f64,
    /// `ξ_k` depends on the `ζ_Ψ` estimate, which is only a lower bound.
    pub xi_estimate_dependent: bool,
}

impl MeasurementRun {
    pub fn probabilities(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.probability).collect()
    }

    pub fn min_fidelity(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.corrected_fidelity)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_epsilon(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.epsilon)
            .fold(0.0, f64::max)
    }

    pub fn max_probability_deviation(&self) -> f64 {
        let k = self.outcomes as f64;
        self.diagnostics
            .iter()
            .map(|d| (d.probability - 1.0 / k).abs())
            .fold(0.0, f64::max)
    }
}

const PROTOCOL_TOL: f64 = 1e-10;

/// Simulates the measurement-induced protocol for the random unitary ensemble
/// `{V_j}` on `Ā = A^n`: Alice measures `Ā A₀` with `M_k`, George applies `Z_k` on `G`.
pub fn measurement_protocol(
    psi: &PureState,
    grouping: &Tripartition,
    ensemble: &RandomUnitaryEnsemble,
    n: usize,
    options: &MeasurementOptions,
    tol: &Tolerances,
) -> Result<MeasurementRun> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let psi_n = check_size(psi, n)?;
    let gn = copies_grouping(grouping, n);
    let layout_n = psi_n.layout().clone();
    let a_idx = layout_n.indices_of(&ensemble.layout().labels().collect::<Vec<_>>())?;
    let mut a_group = layout_n.indices_of(&gn.a)?;
    a_group.sort_unstable();
    let mut a_sorted = a_idx.clone();
    a_sorted.sort_unstable();
    if a_sorted != a_group {
        return Err(Error::InvalidArgument(
            "the ensemble must act on exactly A^n".into(),
        ));
    }
    let rest: Vec<usize> = (0..layout_n.len()).filter(|i| !a_idx.contains(i)).collect();
    let k_out = ensemble.len();
    let kf = k_out as f64;
    let d_a = ensemble.layout().total_dim();
    let s = 1.0 / kf.sqrt();
    let tau = 2.0 * core::f64::consts::PI;

    let us = ensemble.unitaries();
    let measurement: Vec<Matrix> = (0..k_out)
        .map(|k| {
            let mut m = Matrix::zeros(d_a, d_a * k_out);
            for (j, v) in us.iter().enumerate() {
                let ph = C64::from_polar(s, tau * ((j * k) % k_out) as f64 / kf);
                for x in 0..d_a {
                    for y in 0..d_a {
                        m[(x, y * k_out + j)] = ph * v[(x, y)];
                    }
                }
            }
            m
        })
        .collect();
    let mut comp = Matrix::zeros(d_a * k_out, d_a * k_out);
    for m in &measurement {
        comp += &m.adjoint_mul(m);
    }
    let completeness_defect = (&comp - &Matrix::identity(d_a * k_out)).max_abs();
    if completeness_defect > PROTOCOL_TOL {
        return Err(Error::verification(
            "measurement completeness",
            completeness_defect,
            PROTOCOL_TOL,
        ));
    }

    let g_label = layout_n.fresh_label("G");
    let a0_label = layout_n.fresh_label("A0");
    let mut res = vec![ZERO; k_out * k_out];
    for j in 0..k_out {
        res[j * k_out + j] = C64::new(s, 0.0);
    }
    let resource = PureState::new(
        SystemLayout::new([(a0_label, k_out), (g_label.clone(), k_out)])?,
        res,
        tol.verify_tol,
    )?;

    let psi_mat = psi_n.reshape_split(&a_idx);
    let dr = psi_mat.cols();
    let post_layout = layout_n
        .select(&a_idx)
        .concat(&layout_n.select(&rest))?
        .concat(&SystemLayout::single(&g_label, k_out)?)?;
    let a_labels: Vec<String> = layout_n.select(&a_idx).labels().map(Into::into).collect();
    let r_labels: Vec<String> = layout_n.select(&rest).labels().map(Into::into).collect();
    let ar_labels: Vec<String> = a_labels.iter().chain(&r_labels).cloned().collect();

    // Ψ_𝒱 = K^{-1/2} Σ_j |j⟩^G V_j|Ψ^{⊗n}⟩ in the post-state ordering (ā, r, g).
    let vpsi: Vec<Matrix> = us.iter().map(|v| v.matmul(&psi_mat)).collect();
    let mut target = vec![ZERO; d_a * dr * k_out];
    for (g, vp) in vpsi.iter().enumerate() {
        for x in 0..d_a {
            for r in 0..dr {
                target[(x * dr + r) * k_out + g] = vp[(x, r)] * s;
            }
        }
    }
    let bc_ref = psi_n.reduce(&r_labels)?;

    let scores = zeta_candidates(psi, grouping, options.zeta_budget, options.seed, tol)?;
    let dc = psi.grouped(grouping)?.layout().dims()[2];
    let dcn = dc.pow(n as u32);

    let mut post_states = Vec::with_capacity(k_out);
    let mut diagnostics = Vec::with_capacity(k_out);
    let mut eps_prime_cache: Vec<(Matrix, f64)> = Vec::new();
    for (k, m) in measurement.iter().enumerate() {
        let mut y = vec![ZERO; d_a * dr * k_out];
        for g in 0..k_out {
            let mg = Matrix::from_fn(d_a, d_a, |x, a| m[(x, a * k_out + g)]);
            let blk = mg.matmul(&psi_mat);
            for x in 0..d_a {
                for r in 0..dr {
                    y[(x * dr + r) * k_out + g] = blk[(x, r)] * s;
                }
            }
        }
        let p: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        if p <= 0.0 {
            return Err(Error::verification("outcome probability", p, PROTOCOL_TOL));
        }
        let post = PureState::normalized(post_layout.clone(), y)?;
        let corrected: Vec<C64> = post
            .vector()
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let g = i % k_out;
                z * C64::from_polar(1.0, -tau * ((g * k) % k_out) as f64 / kf)
            })
            .collect();
        let corrected_fidelity = vec_inner(&target, &corrected).norm_sqr();
        let epsilon = trace_distance(&post.reduce(&r_labels)?, &bc_ref)?;

        let abc = post.reduce(&ar_labels)?;
        let cached = eps_prime_cache
            .iter()
            .find(|(mat, _)| (mat - abc.matrix()).max_abs() <= 1e-13)
            .map(|&(_, e)| e);
        let epsilon_prime = match cached {
            Some(e) => e,
            None => {
                let e =
                    best_rotated_petz(&abc, &gn, Direction::FromAB, &options.t_grid, tol)?.error;
                eps_prime_cache.push((abc.matrix().clone(), e));
                e
            }
        };

        let cut = tol.support_cutoff_rel;
        let s_g = matrix_entropy(post.reduce(&[g_label.as_str()])?.matrix(), cut);
        let s_r = matrix_entropy(post.reduce(&r_labels)?.matrix(), cut);
        let s_a = matrix_entropy(post.reduce(&a_labels)?.matrix(), cut);
        let mutual_info = (s_g + s_r - s_a).max(0.0);

        let root = 2.0 * epsilon.sqrt();
        let arg = root + 2.0 * recoverability_transfer(epsilon_prime.min(1.0), dcn).sqrt();
        let zeta = zeta_from_candidates(&scores, arg).value;
        let xi = 5.0 * eta(root) + 2.0 * eta(zeta);

        diagnostics.push(OutcomeDiagnostics {
            probability: p,
            corrected_fidelity,
            epsilon,
            epsilon_prime,
            mutual_info,
            xi,
        });
        post_states.push(post);
    }
    let total: f64 = diagnostics.iter().map(|d| d.probability).sum();
    if (total - 1.0).abs() > PROTOCOL_TOL {
        return Err(Error::verification(
            "outcome probabilities sum",
            (total - 1.0).abs(),
            PROTOCOL_TOL,
        ));
    }
    let dev = diagnostics
        .iter()
        .map(|d| (d.probability - 1.0 / kf).abs())
        .fold(0.0, f64::max);
    if dev > PROTOCOL_TOL {
        return Err(Error::verification(
            "uniform outcome probabilities",
            dev,
            PROTOCOL_TOL,
        ));
    }
    let mutual_info_av = diagnostics
        .iter()
        .map(|d| d.probability * d.mutual_info)
        .sum();
    Ok(MeasurementRun {
        n,
        outcomes: k_out,
        rate: kf.log2() / n as f64,
        measurement,
        resource,
        completeness_defect,
        post_states,
        diagnostics,
        mutual_info_av,
        xi_estimate_dependent: true,
    })
}

fn check_dims(dims: (usize, usize, usize)) -> Result<SystemLayout> {
    let (a, b, c) = dims;
    if a == 0 || b == 0 || c == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    if a * b * c > HARNESS_MAX_DIM {
        return Err(Error::SizeGuard(a * b * c, HARNESS_MAX_DIM));
    }
    SystemLayout::abc(a, b, c)
}

/// Random split of `d_B` into Markov blocks `(b_L, b_R)` with `Σ b_L b_R = d_B`.
pub fn random_markov_blocks<R: Rng + ?Sized>(db: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut left = db;
    let mut out = Vec::new();
    while left > 0 {
        let size = rng.random_range(1..=left);
        let divisors: Vec<usize> = (1..=size).filter(|x| size % x == 0).collect();
        let bl = divisors[rng.random_range(0..divisors.len())];
        out.push((bl, size / bl));
        left -= size;
    }
    out
}

/// Fidelity-form and trace-form checks of `ε`-QCMI ⇒ recoverability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityCheck {
    pub qcmi: f64,
    /// Root fidelity of the averaged rotated Petz recovery, from `BC` and from `AB`.
    pub root_fidelity_bc: f64,
    pub root_fidelity_ab: f64,
    /// `min √F − 2^{−I/2}`.
    pub fidelity_margin: f64,
    /// Largest trace-distance error of the two recoveries.
    pub trace_error: f64,
    /// `√I − trace_error`; reported only.
    pub trace_margin: f64,
}

/// Recovery of an `ε`-perturbed Markov state with the Markov state's own maps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecomposableCheck {
    pub epsilon: f64,
    pub error_bc: f64,
    pub error_ab: f64,
    /// `2ε − max error`.
    pub margin: f64,
}

/// `I(A:C|B) ≤ 4ε log₂ d_C + 2h(ε)` given an `ε`-recovery.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferCheck {
    pub epsilon: f64,
    pub qcmi: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma1Trial {
    pub trial: usize,
    pub property1: FidelityCheck,
    pub property2: TransferCheck,
    pub property3: DecomposableCheck,
}

/// Slack on the fidelity-form bound.
pub const FIDELITY_SLACK: f64 = 1e-6;
const BOUND_SLACK: f64 = 1e-12;

/// One trial of the recoverability checks. Property 1 uses a random state whose rank
/// cycles through full, 2 and 1; properties 2 and 3 use a planted Markov state mixed
/// with noise at `ε ≤ max_epsilon`.
pub fn lemma1_trial(
    seed: u64,
    trial: usize,
    dims: (usize, usize, usize),
    max_epsilon: f64,
    tol: &Tolerances,
) -> Result<Lemma1Trial> {
    let layout = check_dims(dims)?;
    let g = Tripartition::abc();
    let mut rng = trial_rng(seed, trial as u64);
    let d = layout.total_dim();
    let rank = match trial % 3 {
        0 => d,
        1 => 2.min(d),
        _ => 1,
    };
    let rho = random_state(layout, rank, &mut rng)?;
    let i = qcmi(&rho, &g, tol)?;
    let mut fid = [0.0; 2];
    let mut err: f64 = 0.0;
    for (slot, dir) in [Direction::FromBC, Direction::FromAB]
        .into_iter()
        .enumerate()
    {
        let abc = rho.grouped(&g)?;
        let (ch, _) = crate::channels::recover_abc(&abc, dir, PetzMode::Averaged, tol)?;
        let out = apply_recovery(&ch, &abc, dir)?;
        fid[slot] = root_fidelity(&abc, &out)?;
        err = err.max(trace_distance(&abc, &out)?);
    }
    let floor = 2f64.powf(-i / 2.0);
    let property1 = FidelityCheck {
        qcmi: i,
        root_fidelity_bc: fid[0],
        root_fidelity_ab: fid[1],
        fidelity_margin: fid[0].min(fid[1]) - floor,
        trace_error: err,
        trace_margin: i.sqrt() - err,
    };

    let (da, db, dc) = dims;
    let blocks = random_markov_blocks(db, &mut rng);
    let upsilon = planted_markov_state(da, dc, &blocks, &mut rng)?;
    let target = max_epsilon * rng.random::<f64>();
    let (rho, eps) = perturb_with_noise(&upsilon, target, &mut rng)?;
    let md = markov_decompose(&upsilon, &g, tol)?;
    let mut errs = [0.0; 2];
    for (slot, dir) in [Direction::FromBC, Direction::FromAB]
        .into_iter()
        .enumerate()
    {
        let ch = recovery_from_decomposition(&md, dir, tol)?;
        let out = apply_recovery(&ch, &rho, dir)?;
        errs[slot] = trace_distance(&rho, &out)?;
    }
    let worst = errs[0].max(errs[1]);
    let property3 = DecomposableCheck {
        epsilon: eps,
        error_bc: errs[0],
        error_ab: errs[1],
        margin: 2.0 * eps - worst,
    };
    let er = worst.min(1.0);
    let bound = 4.0 * er * (dc as f64).log2() + 2.0 * binary_entropy(er);
    let qr = qcmi(&rho, &g, tol)?;
    let property2 = TransferCheck {
        epsilon: er,
        qcmi: qr,
        bound,
        margin: bound - qr,
    };
    Ok(Lemma1Trial {
        trial,
        property1,
        property2,
        property3,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma1Report {
    pub trials: Vec<Lemma1Trial>,
    pub property1_pass: usize,
    pub property1_worst_margin: f64,
    pub property1_worst_trace_margin: f64,
    pub property2_pass: usize,
    pub property2_worst_margin: f64,
    pub property3_pass: usize,
    pub property3_worst_margin: f64,
}

impl Lemma1Report {
    pub fn from_trials(trials: Vec<Lemma1Trial>) -> Self {
        let min =
            |f: &dyn Fn(&Lemma1Trial) -> f64| trials.iter().map(f).fold(f64::INFINITY, f64::min);
        Lemma1Report {
            property1_pass: trials
                .iter()
                .filter(|t| t.property1.fidelity_margin >= -FIDELITY_SLACK)
                .count(),
            property1_worst_margin: min(&|t| t.property1.fidelity_margin),
            property1_worst_trace_margin: min(&|t| t.property1.trace_margin),
            property2_pass: trials
                .iter()
                .filter(|t| t.property2.margin >= -BOUND_SLACK)
                .count(),
            property2_worst_margin: min(&|t| t.property2.margin),
            property3_pass: trials
                .iter()
                .filter(|t| t.property3.margin >= -BOUND_SLACK)
                .count(),
            property3_worst_margin: min(&|t| t.property3.margin),
            trials,
        }
    }

    pub fn passed(&self) -> bool {
        let n = self.trials.len();
        self.property1_pass == n && self.property2_pass == n && self.property3_pass == n
    }
}

pub fn verify_lemma1(
    trials: usize,
    dims: (usize, usize, usize),
    max_epsilon: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<Lemma1Report> {
    let rows = (0..trials)
        .map(|t| lemma1_trial(seed, t, dims, max_epsilon, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(Lemma1Report::from_trials(rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructuralMode {
    /// `‖ρ − T(ρ)‖₁ ≤ 6ε` for the squeezing map of a nearby Markov state.
    AppendixA,
    /// `(1/n) I(A^n:B^nC^n)_{ℰ(Ψ^{⊗n})} ≥ M − 2η(ζ_Ψ(ε)) log₂(d_A d_B d_C)`.
    Lemma6,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructuralConfig {
    pub mode: StructuralMode,
    pub dims: (usize, usize, usize),
    /// Noise level (appendixA) or channel perturbation weight (lemma6).
    pub epsilon: f64,
    /// Copies for lemma6.
    pub n: usize,
    pub zeta_budget: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructuralRow {
    pub trial: usize,
    /// Measured `ε`.
    pub epsilon: f64,
    pub lhs: f64,
    pub bound: f64,
    /// Whether the row takes part in the pass/fail verdict.
    pub asserted: bool,
    pub holds: bool,
    /// appendixA: `‖Υ − T(Υ)‖₁` on the unperturbed state.
    pub fixed_point_defect: Option<f64>,
}

/// Slack on the lemma6 bound at `ε = 0`.
pub const LEMMA6_SLACK: f64 = 1e-8;
/// Fixed-point tolerance of the squeezing map.
pub const FIXED_POINT_TOL: f64 = 1e-10;

/// `ℰ^{⊗n}` on the `A#k` copies: each copy is `(1 − λ)·𝒫 + λ·𝒰` with `𝒫` a
/// state-preserving channel and `𝒰` a random unitary.
fn lemma6_channel<R: Rng + ?Sized>(
    ki: &KIDecomposition,
    n: usize,
    lambda: f64,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<QuantumChannel> {
    let isos: Vec<Matrix> = ki
        .blocks
        .iter()
        .map(|b| random_preserving_isometry(&b.omega, 2, rng))
        .collect();
    let base = state_preserving_channel(ki, &isos, tol)?;
    let da = ki.a_dim();
    let mut kraus: Vec<Matrix> = base
        .kraus()
        .iter()
        .map(|k| k.scale_real((1.0 - lambda).sqrt()))
        .collect();
    if lambda > 0.0 {
        kraus.push(random_unitary(da, rng).scale_real(lambda.sqrt()));
    }
    let mut ops = kraus.clone();
    let mut layout = ki.a_layout.with_suffix("#1");
    for k in 2..=n {
        ops = ops
            .iter()
            .flat_map(|a| kraus.iter().map(move |b| a.kron(b)))
            .collect();
        layout = layout.concat(&ki.a_layout.with_suffix(&format!("#{k}")))?;
    }
    QuantumChannel::new(layout.clone(), layout, ops, tol.verify_tol)
}

pub fn structural_trial(
    config: &StructuralConfig,
    seed: u64,
    trial: usize,
    tol: &Tolerances,
) -> Result<StructuralRow> {
    let layout = check_dims(config.dims)?;
    let g = Tripartition::abc();
    let mut rng = trial_rng(seed, trial as u64);
    let (da, db, dc) = config.dims;
    match config.mode {
        StructuralMode::AppendixA => {
            let blocks = random_markov_blocks(db, &mut rng);
            let upsilon = planted_markov_state(da, dc, &blocks, &mut rng)?;
            let md = markov_decompose(&upsilon, &g, tol)?;
            let fixed = trace_distance(&squeeze_t(&upsilon, &g, &md.gamma_prime)?.state, &upsilon)?;
            let (rho, eps) = perturb_with_noise(&upsilon, config.epsilon, &mut rng)?;
            let lhs = trace_distance(&squeeze_t(&rho, &g, &md.gamma_prime)?.state, &rho)?;
            let bound = 6.0 * eps;
            Ok(StructuralRow {
                trial,
                epsilon: eps,
                lhs,
                bound,
                asserted: true,
                holds: lhs <= bound + BOUND_SLACK && fixed <= FIXED_POINT_TOL,
                fixed_point_defect: Some(fixed),
            })
        }
        StructuralMode::Lemma6 => {
            let n = config.n.max(1);
            let psi = random_pure(layout, &mut rng)?;
            let psi_n = check_size(&psi, n)?;
            let ki = ki_of_pure(&psi, &g, tol)?;
            let m = ki.markovianizing_cost(tol.support_cutoff_rel);
            let lambda = config.epsilon.clamp(0.0, 1.0);
            let ch = lemma6_channel(&ki, n, lambda, &mut rng, tol)?;
            let gn = copies_grouping(&g, n);
            let targets: Vec<&str> = ch.in_layout().labels().collect();
            let out = ch.apply(&psi_n.to_density(), &targets)?;
            let ac: Vec<String> = gn.a.iter().chain(&gn.c).cloned().collect();
            let ac_in = psi_n.reduce(&ac)?;
            let eps = trace_distance(&ch.apply(&ac_in, &targets)?, &ac_in)?;
            let a = out.partial_trace(&gn.a)?;
            let bc: Vec<String> = gn.b.iter().chain(&gn.c).cloned().collect();
            let cut = tol.support_cutoff_rel;
            let info = matrix_entropy(a.matrix(), cut)
                + matrix_entropy(out.partial_trace(&bc)?.matrix(), cut)
                - matrix_entropy(out.matrix(), cut);
            let lhs = info / n as f64;
            if lambda == 0.0 {
                Ok(StructuralRow {
                    trial,
                    epsilon: eps,
                    lhs,
                    bound: m,
                    asserted: true,
                    holds: lhs >= m - LEMMA6_SLACK,
                    fixed_point_defect: None,
                })
            } else {
                let scores = zeta_candidates(&psi, &g, config.zeta_budget, seed, tol)?;
                let zeta = zeta_from_candidates(&scores, eps).value;
                let bound = m - 2.0 * eta(zeta) * ((da * db * dc) as f64).log2();
                Ok(StructuralRow {
                    trial,
                    epsilon: eps,
                    lhs,
                    bound,
                    asserted: false,
                    holds: lhs >= bound,
                    fixed_point_defect: None,
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructuralReport {
    pub mode: StructuralMode,
    pub rows: Vec<StructuralRow>,
    pub asserted: usize,
    pub failures: usize,
}

impl StructuralReport {
    pub fn from_rows(mode: StructuralMode, rows: Vec<StructuralRow>) -> Self {
        StructuralReport {
            mode,
            asserted: rows.iter().filter(|r| r.asserted).count(),
            failures: rows.iter().filter(|r| r.asserted && !r.holds).count(),
            rows,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub fn verify_structural_bounds(
    config: &StructuralConfig,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<StructuralReport> {
    let rows = (0..trials)
        .map(|t| structural_trial(config, seed, t, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(StructuralReport::from_rows(config.mode, rows))
}

/// One point of the recoverability scatter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbePoint {
    pub trial: usize,
    /// Trace distance of the noised state from its planted Markov state.
    pub noise: f64,
    pub eps_ab: f64,
    pub eps_bc: f64,
}

/// Planted Markov state noised at a level up to `max_noise`, with the best rotated
/// Petz recovery errors from `AB` and from `BC`.
pub fn probe_trial(
    seed: u64,
    trial: usize,
    dims: (usize, usize, usize),
    max_noise: f64,
    t_grid: &[f64],
    tol: &Tolerances,
) -> Result<ProbePoint> {
    check_dims(dims)?;
    let g = Tripartition::abc();
    let mut rng = trial_rng(seed, trial as u64);
    let (da, db, dc) = dims;
    let blocks = random_markov_blocks(db, &mut rng);
    let upsilon = planted_markov_state(da, dc, &blocks, &mut rng)?;
    let target = max_noise * rng.random::<f64>();
    let (rho, noise) = perturb_with_noise(&upsilon, target, &mut rng)?;
    let eps_ab = best_rotated_petz(&rho, &g, Direction::FromAB, t_grid, tol)?.error;
    let eps_bc = best_rotated_petz(&rho, &g, Direction::FromBC, t_grid, tol)?.error;
    Ok(ProbePoint {
        trial,
        noise,
        eps_ab,
        eps_bc,
    })
}

pub fn conjecture_probe(
    trials: usize,
    dims: (usize, usize, usize),
    max_noise: f64,
    seed: u64,
    t_grid: &[f64],
    tol: &Tolerances,
) -> Result<Vec<ProbePoint>> {
    (0..trials)
        .map(|t| probe_trial(seed, t, dims, max_noise, t_grid, tol))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::seeded_rng;

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
    fn twirl_ensembles_for_reference_states() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let ki = ki_of_pure(&ghz(), &g, &tol).unwrap();
        let ens = build_twirl_ensemble(&ki, 1, &tol).unwrap();
        assert_eq!(ens.len(), 2);
        assert!((ens.cost_bits() - 1.0).abs() < 1e-15);
        let z = Matrix::from_real_diag(&[1.0, -1.0]);
        let u = &ens.unitaries()[1];
        let phase = u[(0, 0)];
        assert!((u - &z.scale(phase)).max_abs() < 1e-12);

        let mut v = vec![ZERO; 4];
        v[0] = c(1.0);
        v[3] = c(1.0);
        let bell = PureState::normalized(SystemLayout::abc(2, 1, 2).unwrap(), v).unwrap();
        let ki = ki_of_pure(&bell, &g, &tol).unwrap();
        assert_eq!(build_twirl_ensemble(&ki, 1, &tol).unwrap().len(), 4);

        let mut rng = seeded_rng(3);
        let a = random_pure(SystemLayout::single("A", 2).unwrap(), &mut rng).unwrap();
        let bc = random_pure(SystemLayout::new([("B", 2), ("C", 2)]).unwrap(), &mut rng).unwrap();
        let prod = a.tensor(&bc).unwrap();
        let run = markovianize(&prod, &g, 2, &tol).unwrap();
        assert_eq!(run.ensemble.len(), 1);
        assert_eq!(run.cost_bits_per_copy, 0.0);
        let input = prod.tensor_power(2).unwrap().to_density();
        assert!((run.output.matrix() - input.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn ghz_markovianizes_to_dephased_ghz() {
        let tol = Tolerances::default();
        let run = markovianize(&ghz(), &Tripartition::abc(), 1, &tol).unwrap();
        let mut expect = Matrix::zeros(8, 8);
        expect[(0, 0)] = c(0.5);
        expect[(7, 7)] = c(0.5);
        assert!((run.output.matrix() - &expect).max_abs() < 1e-12);
        assert!(run.qcmi_out.abs() < 1e-12);
        assert!(run.recovery_errors.from_bc < 1e-8 && run.recovery_errors.from_ab < 1e-8);
        assert!((run.cost_bits_per_copy - 1.0).abs() < 1e-15);
        assert!((run.m_dec_bits - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_states_markovianize_exactly() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let mut rng = seeded_rng(8);
        for n in [1, 2] {
            let psi = random_pure(SystemLayout::abc(2, 2, 2).unwrap(), &mut rng).unwrap();
            let run = markovianize(&psi, &g, n, &tol).unwrap();
            assert!(run.qcmi_out <= 1e-8, "qcmi {}", run.qcmi_out);
            assert!(run.recovery_errors.from_bc <= 1e-7 && run.recovery_errors.from_ab <= 1e-7);
            assert!(run.cost_bits_per_copy >= run.m_dec_bits - 1e-9);
            assert!(run.qcmi_in <= run.cost_bits_per_copy + 1e-9);
            assert!(run.marginal_defect <= 1e-12);
        }
    }

    #[test]
    fn size_guard() {
        let tol = Tolerances::default();
        let mut rng = seeded_rng(1);
        let psi = random_pure(SystemLayout::abc(3, 3, 3).unwrap(), &mut rng).unwrap();
        let err = markovianize(&psi, &Tripartition::abc(), 3, &tol).unwrap_err();
        assert_eq!(err, Error::SizeGuard(19683, SIZE_GUARD));
    }

    #[test]
    fn measurement_protocol_reproduces_twirl() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let mut rng = seeded_rng(5);
        let random = random_pure(SystemLayout::abc(2, 2, 2).unwrap(), &mut rng).unwrap();
        for (psi, n) in [(ghz(), 1), (ghz(), 2), (random, 1)] {
            let ki = ki_of_pure(&psi, &g, &tol).unwrap();
            let ens = build_twirl_ensemble(&ki, n, &tol).unwrap();
            let run = measurement_protocol(&psi, &g, &ens, n, &MeasurementOptions::default(), &tol)
                .unwrap();
            assert!(run.completeness_defect <= 1e-12);
            assert!(run.max_probability_deviation() <= 1e-10);
            assert!(run.min_fidelity() >= 1.0 - 1e-10);
            assert!(run.max_epsilon() <= 1e-12);
            assert!(run.mutual_info_av <= n as f64 * run.rate + 1e-9);
            assert!(run
                .diagnostics
                .iter()
                .all(|d| d.xi.is_finite() && d.epsilon_prime >= 0.0));
        }
    }

    #[test]
    fn lemma1_harness_small() {
        let tol = Tolerances::default();
        let rep = verify_lemma1(6, (2, 2, 2), 0.05, 11, &tol).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep
            .trials
            .iter()
            .all(|t| t.property3.error_bc <= 0.1 + 1e-12));
        let exact = verify_lemma1(3, (2, 2, 2), 0.0, 11, &tol).unwrap();
        assert!(exact
            .trials
            .iter()
            .all(|t| t.property3.error_bc < 1e-9 && t.property3.error_ab < 1e-9));
    }

    #[test]
    fn structural_harness_small() {
        let tol = Tolerances::default();
        let cfg = StructuralConfig {
            mode: StructuralMode::AppendixA,
            dims: (2, 2, 2),
            epsilon: 0.02,
            n: 1,
            zeta_budget: 6,
        };
        assert!(verify_structural_bounds(&cfg, 4, 2, &tol).unwrap().passed());
        let cfg = StructuralConfig {
            mode: StructuralMode::Lemma6,
            epsilon: 0.0,
            ..cfg
        };
        let rep = verify_structural_bounds(&cfg, 3, 2, &tol).unwrap();
        assert!(rep.passed() && rep.asserted == 3);
        let noisy = StructuralConfig {
            epsilon: 0.05,
            ..cfg
        };
        let rep = verify_structural_bounds(&noisy, 2, 2, &tol).unwrap();
        assert_eq!(rep.asserted, 0);
        assert!(rep.rows.iter().all(|r| r.epsilon > 0.0));
    }

    #[test]
    fn probe_is_deterministic_and_zero_on_markov_inputs() {
        let tol = Tolerances::default();
        let grid = [0.0];
        let a = conjecture_probe(3, (2, 2, 2), 0.2, 9, &grid, &tol).unwrap();
        let b = conjecture_probe(3, (2, 2, 2), 0.2, 9, &grid, &tol).unwrap();
        assert_eq!(a, b);
        let zero = conjecture_probe(2, (2, 2, 2), 0.0, 9, &grid, &tol).unwrap();
        assert!(zero.iter().all(|p| p.eps_ab < 1e-8 && p.eps_bc < 1e-8));
    }
}
