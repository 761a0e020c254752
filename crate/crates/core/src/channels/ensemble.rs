use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{apply_operator, QuantumChannel, CHANNEL_TOL};
use crate::linalg::{vec_inner, Matrix, C64, ONE, ZERO};
use crate::qcore::{reduce_matrix, DensityState, PureState, SystemLayout};
use crate::{Error, Result};

/// Uniform mixture of unitaries `τ ↦ K⁻¹ Σ V_k τ V_k†`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomUnitaryEnsemble {
    layout: SystemLayout,
    unitaries: Vec<Matrix>,
}

impl RandomUnitaryEnsemble {
    pub fn new(layout: SystemLayout, unitaries: Vec<Matrix>, tol: f64) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(Error::Empty("ensemble with no unitaries"));
        }
        let d = layout.total_dim();
        for (k, u) in unitaries.iter().enumerate() {
            if u.rows() != d || u.cols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "unitary {k} is {}x{}, expected {d}x{d}",
                    u.rows(),
                    u.cols()
                )));
            }
            let dev = (&u.adjoint_mul(u) - &Matrix::identity(d)).max_abs();
            if dev > tol {
                return Err(Error::InvalidChannel(format!(
                    "element {k} deviates from unitarity by {dev:.3e}"
                )));
            }
        }
        Ok(RandomUnitaryEnsemble { layout, unitaries })
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn unitaries(&self) -> &[Matrix] {
        &self.unitaries
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    /// `log₂ K`.
    pub fn cost_bits(&self) -> f64 {
        (self.unitaries.len() as f64).log2()
    }

    pub fn to_channel(&self) -> QuantumChannel {
        let w = 1.0 / (self.unitaries.len() as f64).sqrt();
        let kraus = self.unitaries.iter().map(|u| u.scale_real(w)).collect();
        QuantumChannel {
            in_layout: self.layout.clone(),
            out_layout: self.layout.clone(),
            kraus,
        }
    }

    pub fn apply<S: AsRef<str>>(
        &self,
        state: &DensityState,
        targets: &[S],
    ) -> Result<DensityState> {
        self.to_channel().apply(state, targets)
    }

    /// `K⁻¹ Σ |V_k ψ⟩⟨V_k ψ|` with the unitaries acting on `targets`.
    pub fn apply_to_pure<S: AsRef<str>>(
        &self,
        psi: &PureState,
        targets: &[S],
    ) -> Result<DensityState> {
        let idx = psi.layout().indices_of(targets)?;
        let d = psi.dim();
        let mut out = Matrix::zeros(d, d);
        for u in &self.unitaries {
            let v = apply_operator(u, psi, &idx)?;
            for (i, &a) in v.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let row = &mut out.data_mut()[i * d..(i + 1) * d];
                for (o, b) in row.iter_mut().zip(&v) {
                    *o += a * b.conj();
                }
            }
        }
        out.scale_mut(1.0 / self.unitaries.len() as f64);
        Ok(DensityState::from_parts(psi.layout().clone(), out))
    }

    /// Ensemble of all products `V_{k1} ⊗ V_{k2}` (first index most significant).
    pub fn tensor(&self, other: &RandomUnitaryEnsemble) -> Result<Self> {
        let mut us = Vec::with_capacity(self.len() * other.len());
        for a in &self.unitaries {
            for b in &other.unitaries {
                us.push(a.kron(b));
            }
        }
        Ok(RandomUnitaryEnsemble {
            layout: self.layout.concat(&other.layout)?,
            unitaries: us,
        })
    }
}

/// Isometry `W = K^{-1/2} Σ_k |k⟩ ⊗ V_k` with the environment as the leading factor.
#[derive(Clone, Debug, PartialEq)]
pub struct StinespringIsometry {
    pub matrix: Matrix,
    pub env_dim: usize,
}

impl StinespringIsometry {
    pub fn from_ensemble(ensemble: &RandomUnitaryEnsemble) -> Self {
        let k = ensemble.len();
        let d = ensemble.layout.total_dim();
        let w = 1.0 / (k as f64).sqrt();
        let mut m = Matrix::zeros(k * d, d);
        for (e, u) in ensemble.unitaries.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    m[(e * d + i, j)] = u[(i, j)] * w;
                }
            }
        }
        StinespringIsometry {
            matrix: m,
            env_dim: k,
        }
    }

    pub fn system_dim(&self) -> usize {
        self.matrix.cols()
    }

    /// `Tr_E[W τ W†]`.
    pub fn apply(&self, tau: &Matrix) -> Matrix {
        let big = tau.conjugate_by(&self.matrix);
        reduce_matrix(&big, &[self.env_dim, self.system_dim()], &[1])
    }

    /// `‖W†W − I‖` entrywise maximum.
    pub fn isometry_defect(&self) -> f64 {
        let d = self.system_dim();
        (&self.matrix.adjoint_mul(&self.matrix) - &Matrix::identity(d)).max_abs()
    }
}

/// Shorthand for [`StinespringIsometry::from_ensemble`].
pub fn stinespring(ensemble: &RandomUnitaryEnsemble) -> StinespringIsometry {
    StinespringIsometry::from_ensemble(ensemble)
}

/// Complete dephasing in the orthonormal basis `basis`.
pub fn dephase(layout: SystemLayout, basis: &[Vec<C64>], tol: f64) -> Result<QuantumChannel> {
    let d = layout.total_dim();
    if basis.len() != d || basis.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidArgument(format!(
            "dephasing basis must contain {d} vectors of length {d}"
        )));
    }
    for i in 0..d {
        for j in 0..=i {
            let g = vec_inner(&basis[i], &basis[j]);
            let expect = if i == j { ONE } else { ZERO };
            if (g - expect).norm() > tol {
                return Err(Error::InvalidArgument(
                    "dephasing basis is not orthonormal".into(),
                ));
            }
        }
    }
    let kraus = basis.iter().map(|v| Matrix::projector(v)).collect();
    QuantumChannel::new(layout.clone(), layout, kraus, CHANNEL_TOL)
}

/// Cyclic shift `X|j⟩ = |j+1 mod d⟩`.
fn shift(d: usize) -> Matrix {
    let mut x = Matrix::zeros(d, d);
    for j in 0..d {
        x[((j + 1) % d, j)] = ONE;
    }
    x
}

/// `Z|j⟩ = e^{2πij/d}|j⟩`.
fn clock(d: usize, power: usize) -> Matrix {
    let diag: Vec<C64> = (0..d)
        .map(|j| {
            let k = (j * power) % d;
            // Quarter turns are set exactly so that Pauli-type operators have no rounding.
            if (4 * k).is_multiple_of(d) {
                [ONE, C64::new(0.0, 1.0), -ONE, C64::new(0.0, -1.0)][4 * k / d]
            } else {
                let theta = 2.0 * core::f64::consts::PI * k as f64 / d as f64;
                C64::new(theta.cos(), theta.sin())
            }
        })
        .collect();
    Matrix::from_diag(&diag)
}

/// `X^a Z^b` for `a, b ∈ 0..d`, listed with index `a·d + b`.
pub fn heisenberg_weyl(d: usize) -> Vec<Matrix> {
    let x = shift(d);
    let mut xa = Matrix::identity(d);
    let mut out = Vec::with_capacity(d * d);
    for _ in 0..d {
        for b in 0..d {
            out.push(xa.matmul(&clock(d, b)));
        }
        xa = x.matmul(&xa);
    }
    out
}

/// `Z^b` for `b ∈ 0..d`.
pub fn phase_ops(d: usize) -> Vec<Matrix> {
    (0..d).map(|b| clock(d, b)).collect()
}
