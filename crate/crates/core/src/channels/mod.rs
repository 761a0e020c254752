//! Kraus channels, random-unitary ensembles, Stinespring dilations and the Petz
//! family of recovery maps.

mod ensemble;
mod petz;

pub use ensemble::{
    dephase, heisenberg_weyl, phase_ops, stinespring, RandomUnitaryEnsemble, StinespringIsometry,
};
pub use petz::{
    apply_recovery, best_rotated_petz, default_t_grid, petz_recovery, recover_abc, recovery_error,
    Direction, PetzMode, PetzSearch,
};

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{eigh, eigvalsh, Matrix, C64, ZERO};
use crate::qcore::{subsystem_permutation, DensityState, PureState, SystemLayout};
use crate::{Error, Result};

/// Default completeness tolerance for constructed channels.
pub const CHANNEL_TOL: f64 = 1e-8;

/// CPTP map given by Kraus operators of shape `out × in`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    in_layout: SystemLayout,
    out_layout: SystemLayout,
    kraus: Vec<Matrix>,
}

impl QuantumChannel {
    /// Checks shapes and `‖Σ K†K − I‖∞ ≤ tol`.
    pub fn new(
        in_layout: SystemLayout,
        out_layout: SystemLayout,
        kraus: Vec<Matrix>,
        tol: f64,
    ) -> Result<Self> {
        let ch = QuantumChannel::from_parts(in_layout, out_layout, kraus)?;
        let dev = ch.completeness_defect();
        if dev > tol {
            return Err(Error::InvalidChannel(format!(
                "Kraus completeness defect {dev:.3e} exceeds {tol:.1e}"
            )));
        }
        Ok(ch)
    }

    /// Shape checks only.
    pub(crate) fn from_parts(
        in_layout: SystemLayout,
        out_layout: SystemLayout,
        kraus: Vec<Matrix>,
    ) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Empty("channel with no Kraus operators"));
        }
        let (di, dout) = (in_layout.total_dim(), out_layout.total_dim());
        if let Some(k) = kraus.iter().find(|k| k.rows() != dout || k.cols() != di) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator is {}x{}, expected {dout}x{di}",
                k.rows(),
                k.cols()
            )));
        }
        Ok(QuantumChannel {
            in_layout,
            out_layout,
            kraus,
        })
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        QuantumChannel {
            in_layout: layout.clone(),
            out_layout: layout,
            kraus: alloc::vec![Matrix::identity(d)],
        }
    }

    /// Conjugation by a single unitary.
    pub fn unitary(layout: SystemLayout, u: Matrix, tol: f64) -> Result<Self> {
        QuantumChannel::new(layout.clone(), layout, alloc::vec![u], tol)
    }

    pub fn in_layout(&self) -> &SystemLayout {
        &self.in_layout
    }

    pub fn out_layout(&self) -> &SystemLayout {
        &self.out_layout
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn into_kraus(self) -> Vec<Matrix> {
        self.kraus
    }

    /// `Σ K†K`.
    pub fn completeness(&self) -> Matrix {
        let d = self.in_layout.total_dim();
        self.kraus.iter().fold(Matrix::zeros(d, d), |mut acc, k| {
            acc += &k.adjoint_mul(k);
            acc
        })
    }

    /// Operator norm of `Σ K†K − I`.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.in_layout.total_dim();
        let s = &self.completeness() - &Matrix::identity(d);
        eigvalsh(&s).iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    /// Renormalizes `K ← K S^{-1/2}` with `S = Σ K†K` when the completeness defect is
    /// at most `max_defect`; larger defects are errors.
    pub fn repair(mut self, max_defect: f64) -> Result<Self> {
        let dev = self.completeness_defect();
        if dev > max_defect {
            return Err(Error::verification("Kraus completeness", dev, max_defect));
        }
        if dev == 0.0 {
            return Ok(self);
        }
        let eg = eigh(&self.completeness());
        let inv_sqrt = eg.map(|l| C64::new(1.0 / l.sqrt(), 0.0));
        for k in &mut self.kraus {
            *k = k.matmul(&inv_sqrt);
        }
        Ok(self)
    }

    /// Minimal Kraus representation from the eigendecomposition of the Choi matrix.
    pub fn compress(self, cutoff_rel: f64) -> Self {
        let (dout, din) = (self.out_layout.total_dim(), self.in_layout.total_dim());
        let n = dout * din;
        if self.kraus.len() <= 1 {
            return self;
        }
        let mut choi = Matrix::zeros(n, n);
        for k in &self.kraus {
            let v = k.data();
            for (i, &a) in v.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let row = &mut choi.data_mut()[i * n..(i + 1) * n];
                for (o, b) in row.iter_mut().zip(v) {
                    *o += a * b.conj();
                }
            }
        }
        let eg = eigh(&choi);
        let floor = cutoff_rel * eg.max_value();
        let kraus: Vec<Matrix> = (0..n)
            .rev()
            .filter(|&j| eg.values[j] > floor)
            .map(|j| {
                let s = eg.values[j].sqrt();
                Matrix::from_vec(dout, din, eg.vector(j).into_iter().map(|z| z * s).collect())
            })
            .collect();
        QuantumChannel { kraus, ..self }
    }

    /// Action on a bare matrix over the full input space.
    pub fn apply_matrix(&self, x: &Matrix) -> Matrix {
        let d = self.out_layout.total_dim();
        self.kraus.iter().fold(Matrix::zeros(d, d), |mut acc, k| {
            acc += &k.matmul(x).mul_adjoint(k);
            acc
        })
    }

    /// Applies the channel to the subsystems `targets` of `state` (in the order given),
    /// acting as the identity elsewhere.
    ///
    /// If the channel preserves the shape of its input, the output keeps the layout of
    /// `state`. Otherwise the output layout is the channel's output layout followed by
    /// the untouched subsystems in their original order.
    pub fn apply<S: AsRef<str>>(
        &self,
        state: &DensityState,
        targets: &[S],
    ) -> Result<DensityState> {
        let idx = state.layout().indices_of(targets)?;
        self.apply_positions(state, &idx)
    }

    pub(crate) fn apply_positions(
        &self,
        state: &DensityState,
        idx: &[usize],
    ) -> Result<DensityState> {
        let layout = state.layout();
        let dims = layout.dims();
        let din: usize = idx.iter().map(|&i| dims[i]).product();
        if din != self.in_layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "channel input dimension {} but targets have dimension {din}",
                self.in_layout.total_dim()
            )));
        }
        let rest: Vec<usize> = (0..dims.len()).filter(|i| !idx.contains(i)).collect();
        let order: Vec<usize> = idx.iter().chain(&rest).copied().collect();
        let perm = subsystem_permutation(&dims, &order);
        let rho = state.matrix().permute_symmetric(&perm);
        let r: usize = rest.iter().map(|&i| dims[i]).product();
        let dout = self.out_layout.total_dim() * r;
        let mut out = Matrix::zeros(dout, dout);
        for k in &self.kraus {
            let left = k.kron_identity_mul(r, &rho);
            out += &k.kron_identity_mul(r, &left.adjoint());
        }
        let same_shape = self.out_layout.dims() == self.in_layout.dims();
        if same_shape {
            // Undo the reordering: new flat index `perm[i]` holds row `i`.
            let mut inv = alloc::vec![0; perm.len()];
            for (i, &p) in perm.iter().enumerate() {
                inv[p] = i;
            }
            let back = out.permute_symmetric(&inv);
            return Ok(DensityState::from_parts(
                layout.clone(),
                back.hermitian_part(),
            ));
        }
        let out_layout = self.out_layout.concat(&layout.select(&rest))?;
        Ok(DensityState::from_parts(out_layout, out.hermitian_part()))
    }

    /// Sequential composition: `other` first, then `self`.
    pub fn after(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        if other.out_layout.total_dim() != self.in_layout.total_dim() {
            return Err(Error::DimensionMismatch(
                "composition: dimensions differ".into(),
            ));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.matmul(b));
            }
        }
        QuantumChannel::from_parts(other.in_layout.clone(), self.out_layout.clone(), kraus)
    }

    /// Parallel composition on concatenated layouts.
    pub fn tensor(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kron(b));
            }
        }
        QuantumChannel::from_parts(
            self.in_layout.concat(&other.in_layout)?,
            self.out_layout.concat(&other.out_layout)?,
            kraus,
        )
    }
}

/// Applies `op` (shape `out × in`) to the subsystems at `idx` of `psi`. The returned
/// vector is ordered as (operator output) ⊗ (remaining subsystems in layout order).
pub(crate) fn apply_operator_front(
    op: &Matrix,
    psi: &PureState,
    idx: &[usize],
) -> Result<Vec<C64>> {
    let dims = psi.layout().dims();
    let din: usize = idx.iter().map(|&i| dims[i]).product();
    if din != op.cols() {
        return Err(Error::DimensionMismatch(format!(
            "operator input dimension {} but targets have dimension {din}",
            op.cols()
        )));
    }
    let m = psi.reshape_split(idx);
    Ok(op.matmul(&m).into_data())
}

/// Applies a square operator to the subsystems at `idx`, keeping the layout of `psi`.
/// The result is not renormalized.
pub(crate) fn apply_operator(op: &Matrix, psi: &PureState, idx: &[usize]) -> Result<Vec<C64>> {
    let front = apply_operator_front(op, psi, idx)?;
    let dims = psi.layout().dims();
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !idx.contains(i)).collect();
    let order: Vec<usize> = idx.iter().chain(&rest).copied().collect();
    let perm = subsystem_permutation(&dims, &order);
    let mut out = alloc::vec![ZERO; front.len()];
    for (i, &p) in perm.iter().enumerate() {
        out[p] = front[i];
    }
    Ok(out)
}
