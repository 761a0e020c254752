//! Markovianizing cost of pure states, `H({p_j}) + 2 Σ_j p_j S(φ_j^{a_R})` bits per
//! copy from the KI decomposition of `Ψ^{AC}` on `A`, and the QCMI lower bound.

use alloc::vec::Vec;

use crate::kidecomp::ki_of_pure;
use crate::qcore::{qcmi, qcmi_pure, DensityState, PureState, Tolerances, Tripartition};
use crate::{Error, Result};

/// Slack allowed when checking `I(A:C|B) ≤ M`.
const LOWER_BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub m_dec_bits: f64,
    pub qcmi_lower_bits: f64,
    /// `H({p_j})`.
    pub entropy_p: f64,
    /// `Σ_j p_j S(φ_j^{a_R})`.
    pub weighted_ar_entropy: f64,
    pub probabilities: Vec<f64>,
    /// Padded `(d_{a₀}, d_{a_L}, d_{a_R})`.
    pub ki_dims: (usize, usize, usize),
}

/// Single-letter Markovianizing cost of a pure state, with `I(A:C|B)` as a lower bound.
/// A lower bound above the value by more than `1e-9` is reported as a verification error.
pub fn markovianizing_cost(
    psi: &PureState,
    grouping: &Tripartition,
    tol: &Tolerances,
) -> Result<CostReport> {
    let ki = ki_of_pure(psi, grouping, tol)?;
    let entropy_p = ki.entropy_p();
    let weighted = ki.weighted_ar_entropy(tol.support_cutoff_rel);
    let m = entropy_p + 2.0 * weighted;
    let lower = qcmi_pure(psi, grouping, tol)?;
    if lower > m + LOWER_BOUND_SLACK {
        return Err(Error::verification(
            "QCMI lower bound on the cost",
            lower - m,
            LOWER_BOUND_SLACK,
        ));
    }
    Ok(CostReport {
        m_dec_bits: m,
        qcmi_lower_bits: lower,
        entropy_p,
        weighted_ar_entropy: weighted,
        probabilities: ki.probabilities(),
        ki_dims: ki.dims(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostBounds {
    /// `I(A:C|B)`, a lower bound on every Markovianizing cost.
    pub lower_bits: f64,
    /// The single-letter value, available for pure inputs only.
    pub upper_bits: Option<f64>,
    pub upper_unknown: bool,
}

/// QCMI lower bound, plus the exact single-letter value when `rho` is pure.
pub fn cost_bounds(
    rho: &DensityState,
    grouping: &Tripartition,
    tol: &Tolerances,
) -> Result<CostBounds> {
    let lower = qcmi(rho, grouping, tol)?;
    let upper = match rho.as_pure(tol) {
        Some(psi) => Some(markovianizing_cost(&psi, grouping, tol)?.m_dec_bits),
        None => None,
    };
    Ok(CostBounds {
        lower_bits: lower,
        upper_unknown: upper.is_none(),
        upper_bits: upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{C64, ZERO};
    use crate::qcore::SystemLayout;
    use alloc::vec;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn reference_costs() {
        let tol = Tolerances::default();
        let g = Tripartition::abc();
        let mut v = vec![ZERO; 8];
        v[0] = c(1.0);
        v[7] = c(1.0);
        let ghz = PureState::normalized(SystemLayout::abc(2, 2, 2).unwrap(), v).unwrap();
        let r = markovianizing_cost(&ghz, &g, &tol).unwrap();
        assert!((r.m_dec_bits - 1.0).abs() < 1e-12);
        assert!((r.qcmi_lower_bits - 1.0).abs() < 1e-12);

        let mut v = vec![ZERO; 4];
        v[0] = c(1.0);
        v[3] = c(1.0);
        let bell_ac = PureState::normalized(SystemLayout::abc(2, 1, 2).unwrap(), v).unwrap();
        let r = markovianizing_cost(&bell_ac, &g, &tol).unwrap();
        assert!((r.m_dec_bits - 2.0).abs() < 1e-12);
        let b = cost_bounds(&bell_ac.to_density(), &g, &tol).unwrap();
        assert!((b.lower_bits - 2.0).abs() < 1e-12 && (b.upper_bits.unwrap() - 2.0).abs() < 1e-12);

        let mut v = vec![ZERO; 8];
        v[0] = c(1.0);
        v[6] = c(1.0);
        let bell_ab = PureState::normalized(SystemLayout::abc(2, 2, 2).unwrap(), v).unwrap();
        let r = markovianizing_cost(&bell_ab, &g, &tol).unwrap();
        assert!(r.m_dec_bits.abs() < 1e-12);

        let mixed = DensityState::maximally_mixed(SystemLayout::abc(2, 2, 2).unwrap());
        let b = cost_bounds(&mixed, &g, &tol).unwrap();
        assert!(b.upper_unknown && b.lower_bits.abs() < 1e-12);
    }
}
