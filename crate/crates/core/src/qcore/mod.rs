//! Labeled multipartite states, reductions, entropic functionals and distances.
//!
//! Index convention: the leftmost subsystem of a [`SystemLayout`] is the most
//! significant digit of the flat index, so for `A(2) ⊗ B(3)` the basis vector
//! `|a⟩|b⟩` sits at index `3a + b`.

mod functional;
mod layout;
pub mod random;
mod state;

pub use functional::{
    binary_entropy, conditional_entropy, continuity_functions, entropy_of_spectrum, eta, eta0,
    fidelity, matrix_entropy, matrix_function, mutual_information, purify, qcmi, qcmi_abc,
    qcmi_pure, recoverability_transfer, root_fidelity, support_basis, support_power,
    support_projector, trace_distance, trace_norm, von_neumann_entropy, Continuity,
};
pub use layout::{subsystem_permutation, SystemLayout, Tripartition};
pub(crate) use state::reduce_matrix;
pub use state::{tensor_product, DensityState, PureState};

use crate::{Error, Result};

/// Numerical thresholds shared by every module.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues below `support_cutoff_rel · λ_max` count as zero.
    pub support_cutoff_rel: f64,
    /// Residual below which a candidate algebra element is considered already spanned.
    pub algebra_closure_tol: f64,
    /// Acceptance threshold for self-checks.
    pub verify_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            support_cutoff_rel: 1e-10,
            algebra_closure_tol: 1e-9,
            verify_tol: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn new(support_cutoff_rel: f64, algebra_closure_tol: f64, verify_tol: f64) -> Result<Self> {
        let t = Tolerances {
            support_cutoff_rel,
            algebra_closure_tol,
            verify_tol,
        };
        t.validate()?;
        Ok(t)
    }

    /// Copy with a different `verify_tol`.
    pub fn with_verify_tol(self, verify_tol: f64) -> Result<Self> {
        Tolerances::new(
            self.support_cutoff_rel,
            self.algebra_closure_tol,
            verify_tol,
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("support_cutoff_rel", self.support_cutoff_rel),
            ("algebra_closure_tol", self.algebra_closure_tol),
            ("verify_tol", self.verify_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}
