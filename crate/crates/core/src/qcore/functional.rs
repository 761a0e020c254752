//! Entropies, distances, matrix functions and continuity functions. All logarithms
//! are base 2.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::state::{DensityState, PureState};
use super::{layout::Tripartition, Tolerances};
use crate::linalg::{eigh, eigvalsh, Eigh, Matrix, C64, ZERO};
use crate::{Error, Result};

/// Applies `λ ↦ λ^exponent` on eigenvalues above `cutoff_rel · λ_max` and zero elsewhere.
pub fn matrix_function(
    h: &Matrix,
    exponent: C64,
    cutoff_rel: f64,
    herm_tol: f64,
) -> Result<Matrix> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(
            "matrix_function needs a square matrix".into(),
        ));
    }
    let defect = h.hermiticity_defect();
    if defect > herm_tol {
        return Err(Error::NotHermitian(defect));
    }
    Ok(support_power(&eigh(h), exponent, cutoff_rel))
}

/// Support-restricted complex power from a precomputed eigendecomposition.
pub fn support_power(eg: &Eigh, exponent: C64, cutoff_rel: f64) -> Matrix {
    let floor = cutoff_rel * eg.max_value();
    eg.map(|l| {
        if l > floor && l > 0.0 {
            (exponent * l.ln()).exp()
        } else {
            ZERO
        }
    })
}

/// Projector onto the eigenvectors above the support cutoff.
pub fn support_projector(eg: &Eigh, cutoff_rel: f64) -> Matrix {
    support_power(eg, ZERO, cutoff_rel)
}

/// Orthonormal basis of the support, as columns (eigenvalue order).
pub fn support_basis(eg: &Eigh, cutoff_rel: f64) -> Matrix {
    let floor = cutoff_rel * eg.max_value();
    let cols: Vec<Vec<C64>> = (0..eg.dim())
        .filter(|&j| eg.values[j] > floor && eg.values[j] > 0.0)
        .map(|j| eg.vector(j))
        .collect();
    Matrix::from_columns(eg.dim(), &cols)
}

/// `-Σ λ log₂ λ` over eigenvalues above the relative cutoff. Eigenvalues within
/// `1e-12` above one are read as one.
pub fn entropy_of_spectrum(values: &[f64], cutoff_rel: f64) -> f64 {
    let top = values.iter().copied().fold(0.0, f64::max);
    values
        .iter()
        .filter(|&&l| l > cutoff_rel * top && l > 0.0)
        .map(|&l| {
            if l > 1.0 && l < 1.0 + 1e-12 {
                0.0
            } else {
                -l * l.log2()
            }
        })
        .sum()
}

/// Entropy of a positive matrix without trace validation.
pub fn matrix_entropy(m: &Matrix, cutoff_rel: f64) -> f64 {
    entropy_of_spectrum(&eigvalsh(m), cutoff_rel)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityState, tol: &Tolerances) -> Result<f64> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > tol.verify_tol {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    Ok(matrix_entropy(rho.matrix(), tol.support_cutoff_rel))
}

/// Negative values in `[-clamp, 0)` are numerical noise and become 0; anything more
/// negative signals an invalid input.
fn clamp_information(value: f64, what: &str) -> Result<f64> {
    const CLAMP: f64 = 1e-9;
    if value < -CLAMP {
        return Err(Error::InvalidState(format!(
            "{what} is negative ({value:.3e})"
        )));
    }
    Ok(value.max(0.0))
}

/// Entropy of a merged A|B|C state restricted to a subset of {A, B, C}.
fn group_entropy(abc: &DensityState, keep: &[usize], cutoff: f64) -> f64 {
    if keep.is_empty() {
        return 0.0;
    }
    if keep.len() == 3 {
        return matrix_entropy(abc.matrix(), cutoff);
    }
    matrix_entropy(abc.reduce_to(keep).matrix(), cutoff)
}

/// `I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC)` in bits.
pub fn qcmi(rho: &DensityState, grouping: &Tripartition, tol: &Tolerances) -> Result<f64> {
    let abc = rho.grouped(grouping)?;
    qcmi_abc(&abc, tol)
}

/// QCMI of a state already merged into the `A, B, C` layout.
pub fn qcmi_abc(abc: &DensityState, tol: &Tolerances) -> Result<f64> {
    let tr = abc.trace();
    if (tr - 1.0).abs() > tol.verify_tol {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let c = tol.support_cutoff_rel;
    let v = group_entropy(abc, &[0, 1], c) + group_entropy(abc, &[1, 2], c)
        - group_entropy(abc, &[1], c)
        - group_entropy(abc, &[0, 1, 2], c);
    clamp_information(v, "conditional mutual information")
}

/// QCMI of a pure tripartite state. Uses `S(ABC) = 0` and `S(AB) = S(C)`.
pub fn qcmi_pure(psi: &PureState, grouping: &Tripartition, tol: &Tolerances) -> Result<f64> {
    let abc = psi.grouped(grouping)?;
    let c = tol.support_cutoff_rel;
    let s = |keep: &[usize]| matrix_entropy(abc.reduce_to(keep).matrix(), c);
    // S(AB) = S(C), S(BC) = S(A)
    let v = s(&[2]) + s(&[0]) - s(&[1]);
    clamp_information(v, "conditional mutual information")
}

/// `I(X:Y)` for two disjoint label sets.
pub fn mutual_information<S: AsRef<str>>(
    rho: &DensityState,
    x: &[S],
    y: &[S],
    tol: &Tolerances,
) -> Result<f64> {
    let c = tol.support_cutoff_rel;
    let xy: Vec<&str> = x
        .iter()
        .map(AsRef::as_ref)
        .chain(y.iter().map(AsRef::as_ref))
        .collect();
    let sx = matrix_entropy(rho.partial_trace(x)?.matrix(), c);
    let sy = matrix_entropy(rho.partial_trace(y)?.matrix(), c);
    let sxy = if xy.len() == rho.layout().len() {
        matrix_entropy(rho.matrix(), c)
    } else {
        matrix_entropy(rho.partial_trace(&xy)?.matrix(), c)
    };
    clamp_information(sx + sy - sxy, "mutual information")
}

/// `S(X|Y) = S(XY) - S(Y)`.
pub fn conditional_entropy<S: AsRef<str>>(
    rho: &DensityState,
    x: &[S],
    y: &[S],
    tol: &Tolerances,
) -> Result<f64> {
    let c = tol.support_cutoff_rel;
    let xy: Vec<&str> = x
        .iter()
        .map(AsRef::as_ref)
        .chain(y.iter().map(AsRef::as_ref))
        .collect();
    Ok(matrix_entropy(rho.partial_trace(&xy)?.matrix(), c)
        - matrix_entropy(rho.partial_trace(y)?.matrix(), c))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(m: &Matrix) -> f64 {
    eigvalsh(m).iter().map(|l| l.abs()).sum()
}

/// `‖ρ - σ‖₁` (ranges over `[0, 2]`).
pub fn trace_distance(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    same_layout(rho, sigma)?;
    Ok(trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// Root fidelity `Tr √(√ρ σ √ρ)`. Eigenvalues of `√ρ σ √ρ` within rounding of zero
/// (below `64 ε_mach λ_max`) are dropped before the square root.
pub fn root_fidelity(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    same_layout(rho, sigma)?;
    Ok(root_fidelity_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn root_fidelity_matrices(rho: &Matrix, sigma: &Matrix) -> f64 {
    let sq = eigh(rho).map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let inner = sigma.conjugate_by(&sq);
    let values = eigvalsh(&inner);
    let top = values.iter().fold(0.0f64, |a, &l| a.max(l));
    let floor = 64.0 * f64::EPSILON * top;
    let f: f64 = values
        .iter()
        .filter(|&&l| l > floor)
        .map(|l| l.sqrt())
        .sum();
    f.clamp(0.0, 1.0)
}

/// Fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    root_fidelity(rho, sigma).map(|f| f * f)
}

fn same_layout(a: &DensityState, b: &DensityState) -> Result<()> {
    if a.layout() != b.layout() {
        return Err(Error::DimensionMismatch(format!(
            "layouts differ: {:?} vs {:?}",
            a.layout().subsystems(),
            b.layout().subsystems()
        )));
    }
    Ok(())
}

/// Continuity functions evaluated at one `(ε, d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Continuity {
    pub eta0: f64,
    pub eta: f64,
    pub h: f64,
    pub f: f64,
}

/// `η₀(x) = -x log₂ x` up to `x = 1/e`, constant beyond (the monotone envelope).
pub fn eta0(x: f64) -> f64 {
    let inv_e = (-1.0f64).exp();
    if x <= 0.0 {
        0.0
    } else if x <= inv_e {
        -x * x.log2()
    } else {
        -inv_e * inv_e.log2()
    }
}

/// `η(x) = x + η₀(x)`.
pub fn eta(x: f64) -> f64 {
    x + eta0(x)
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// `f(ε, d) = √(4 ε log₂ d + 2 h(ε))`.
pub fn recoverability_transfer(epsilon: f64, d: usize) -> f64 {
    (4.0 * epsilon * (d as f64).log2() + 2.0 * binary_entropy(epsilon))
        .max(0.0)
        .sqrt()
}

pub fn continuity_functions(epsilon: f64, d: usize) -> Result<Continuity> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    Ok(Continuity {
        eta0: eta0(epsilon),
        eta: eta(epsilon),
        h: binary_entropy(epsilon),
        f: recoverability_transfer(epsilon, d),
    })
}

/// Purification on `system ⊗ ref` with reference dimension equal to the rank.
pub fn purify(rho: &DensityState, tol: &Tolerances) -> Result<PureState> {
    let eg = eigh(rho.matrix());
    let floor = tol.support_cutoff_rel * eg.max_value();
    let keep: Vec<usize> = (0..eg.dim())
        .rev()
        .filter(|&j| eg.values[j] > floor)
        .collect();
    let r = keep.len().max(1);
    let d = rho.dim();
    let mut v = alloc::vec![ZERO; d * r];
    for (k, &j) in keep.iter().enumerate() {
        let w = eg.values[j].sqrt();
        for i in 0..d {
            v[i * r + k] = eg.vectors[(i, j)] * w;
        }
    }
    let label = rho.layout().fresh_label("R");
    let layout = rho
        .layout()
        .concat(&super::SystemLayout::single(&label, r)?)?;
    PureState::normalized(layout, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::SystemLayout;

    #[test]
    fn entropy_reference_values() {
        let tol = Tolerances::default();
        let l = SystemLayout::single("A", 2).unwrap();
        let mixed = DensityState::maximally_mixed(l.clone());
        assert!((von_neumann_entropy(&mixed, &tol).unwrap() - 1.0).abs() < 1e-14);
        let pure = PureState::basis(l.clone(), 1).unwrap().to_density();
        assert!(von_neumann_entropy(&pure, &tol).unwrap().abs() < 1e-14);
        // -0.25 log2 0.25 - 0.75 log2 0.75 evaluated independently.
        let d = DensityState::from_parts(l, Matrix::from_real_diag(&[0.25, 0.75]));
        assert!((von_neumann_entropy(&d, &tol).unwrap() - 0.811_278_124_459_132_8).abs() < 1e-14);
    }

    #[test]
    fn continuity_reference_values() {
        let c = continuity_functions(0.0, 7).unwrap();
        assert_eq!(c.f, 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        // sqrt(0.04 + 2 h(0.01)) at 30 digits: 0.448983598577745761...
        let f = continuity_functions(0.01, 2).unwrap().f;
        assert!((f - 0.448_983_598_577_745_8).abs() < 1e-12, "{f}");
        assert!(continuity_functions(-0.1, 2).is_err());
        // The envelope is continuous and nondecreasing.
        let e = (-1.0f64).exp();
        assert!((eta0(e - 1e-12) - eta0(e + 1e-12)).abs() < 1e-10);
        assert!(eta0(0.9) >= eta0(0.2));
    }

    #[test]
    fn matrix_power_reference_values() {
        let half = Matrix::identity(2).scale_real(0.5);
        let r = matrix_function(&half, C64::new(0.5, 0.0), 1e-10, 1e-12).unwrap();
        let expect = Matrix::identity(2).scale_real(0.5f64.sqrt());
        assert!((&r - &expect).max_abs() < 1e-15);
        let s = 1.0 / 2f64.sqrt();
        let p = Matrix::projector(&[C64::new(s, 0.0), C64::new(0.0, s)]);
        let r = matrix_function(&p, C64::new(-0.5, 0.0), 1e-10, 1e-12).unwrap();
        assert!((&r - &p).max_abs() < 1e-14);
        let mut nh = Matrix::identity(2);
        nh[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matrix_function(&nh, C64::new(0.5, 0.0), 1e-10, 1e-9).is_err());
    }

    #[test]
    fn distances_of_extreme_pairs() {
        let l = SystemLayout::single("A", 2).unwrap();
        let z0 = PureState::basis(l.clone(), 0).unwrap().to_density();
        let z1 = PureState::basis(l.clone(), 1).unwrap().to_density();
        assert!((trace_distance(&z0, &z1).unwrap() - 2.0).abs() < 1e-14);
        assert!(fidelity(&z0, &z1).unwrap().abs() < 1e-14);
        assert!(trace_distance(&z0, &z0).unwrap().abs() < 1e-14);
        assert!((fidelity(&z0, &z0).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityState::maximally_mixed(l);
        assert!((trace_distance(&z0, &mixed).unwrap() - 1.0).abs() < 1e-14);
    }
}
