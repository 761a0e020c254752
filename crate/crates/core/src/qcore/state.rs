use alloc::format;
use alloc::vec::Vec;

use super::layout::{offsets, strides, subsystem_permutation, SystemLayout, Tripartition};
use super::Tolerances;
use crate::linalg::{eigh, eigvalsh, vec_kron, vec_norm, Matrix, C64, ZERO};
use crate::{Error, Result};

/// Positive unit-trace matrix over a [`SystemLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    layout: SystemLayout,
    matrix: Matrix,
}

/// Unit vector over a [`SystemLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    layout: SystemLayout,
    vector: Vec<C64>,
}

impl DensityState {
    /// Validates Hermiticity, positivity and unit trace within `tol`.
    pub fn new(layout: SystemLayout, matrix: Matrix, tol: f64) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "layout dimension {d} but matrix is {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = eigvalsh(&matrix).first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(DensityState {
            layout,
            matrix: matrix.hermitian_part(),
        })
    }

    /// Wraps a matrix the caller knows to be a state. Only shapes are checked.
    pub fn from_parts(layout: SystemLayout, matrix: Matrix) -> Self {
        assert_eq!(layout.total_dim(), matrix.rows(), "layout/matrix size");
        assert!(matrix.is_square());
        DensityState { layout, matrix }
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Maximally mixed state.
    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        let m = Matrix::identity(d).scale_real(1.0 / d as f64);
        DensityState { layout, matrix: m }
    }

    /// Numerical rank above the relative support cutoff.
    pub fn rank(&self, tol: &Tolerances) -> usize {
        let ev = eigvalsh(&self.matrix);
        let top = ev.last().copied().unwrap_or(0.0);
        ev.iter()
            .filter(|&&l| l > tol.support_cutoff_rel * top)
            .count()
    }

    /// Reduced state on the subsystems `keep`, which stay in layout order.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityState> {
        let mut idx = self.layout.indices_of(keep)?;
        idx.sort_unstable();
        Ok(self.reduce_to(&idx))
    }

    /// Reduced state on the subsystems `keep`, in the order given.
    pub fn reduce_ordered<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityState> {
        let idx = self.layout.indices_of(keep)?;
        Ok(self.reduce_to(&idx))
    }

    /// Reduced state on subsystem positions `keep` (output in that order).
    pub(crate) fn reduce_to(&self, keep: &[usize]) -> DensityState {
        let dims = self.layout.dims();
        let m = reduce_matrix(&self.matrix, &dims, keep);
        DensityState {
            layout: self.layout.select(keep),
            matrix: m,
        }
    }

    /// Reorders subsystems into `order` (labels, must list every subsystem once).
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<DensityState> {
        let idx = self.layout.indices_of(order)?;
        if idx.len() != self.layout.len() {
            return Err(Error::InvalidGrouping(
                "permutation must list every subsystem".into(),
            ));
        }
        Ok(self.permute_positions(&idx))
    }

    pub(crate) fn permute_positions(&self, order: &[usize]) -> DensityState {
        let perm = subsystem_permutation(&self.layout.dims(), order);
        DensityState {
            layout: self.layout.select(order),
            matrix: self.matrix.permute_symmetric(&perm),
        }
    }

    /// Reorders into A, B, C groups and merges each group into one subsystem labeled
    /// `A`, `B`, `C` (empty groups become one-dimensional).
    pub fn grouped(&self, grouping: &Tripartition) -> Result<DensityState> {
        let [a, b, c] = grouping.resolve(&self.layout)?;
        let order: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
        let dims = self.layout.dims();
        let d = |g: &[usize]| g.iter().map(|&i| dims[i]).product::<usize>();
        let layout = SystemLayout::abc(d(&a), d(&b), d(&c))?;
        let permuted = self.permute_positions(&order);
        Ok(DensityState {
            layout,
            matrix: permuted.matrix,
        })
    }

    pub fn tensor(&self, other: &DensityState) -> Result<DensityState> {
        Ok(DensityState {
            layout: self.layout.concat(&other.layout)?,
            matrix: self.matrix.kron(&other.matrix),
        })
    }

    /// Replaces the layout with another of the same total dimension.
    pub fn relabel(&self, layout: SystemLayout) -> Result<DensityState> {
        if layout.total_dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "relabel: {} vs {}",
                layout.total_dim(),
                self.dim()
            )));
        }
        Ok(DensityState {
            layout,
            matrix: self.matrix.clone(),
        })
    }

    /// Convex mixture `(1 - weight) self + weight other`.
    pub fn mix(&self, other: &DensityState, weight: f64) -> Result<DensityState> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch("mix: layouts differ".into()));
        }
        let mut m = self.matrix.scale_real(1.0 - weight);
        m.add_scaled(C64::new(weight, 0.0), &other.matrix);
        Ok(DensityState {
            layout: self.layout.clone(),
            matrix: m,
        })
    }

    /// If the state has numerical rank one, its dominant eigenvector.
    pub fn as_pure(&self, tol: &Tolerances) -> Option<PureState> {
        let eg = eigh(&self.matrix);
        let n = eg.dim();
        let top = eg.max_value();
        if n == 0 || (top - 1.0).abs() > tol.verify_tol {
            return None;
        }
        let v = eg.vector(n - 1);
        PureState::new(self.layout.clone(), v, tol.verify_tol).ok()
    }
}

impl PureState {
    pub fn new(layout: SystemLayout, vector: Vec<C64>, tol: f64) -> Result<Self> {
        if vector.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "layout dimension {} but vector has {} entries",
                layout.total_dim(),
                vector.len()
            )));
        }
        let n = vec_norm(&vector);
        if !n.is_finite() || (n - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!(
                "vector norm {n} differs from 1"
            )));
        }
        Ok(PureState { layout, vector })
    }

    /// Normalizes `vector`; errors if it is zero.
    pub fn normalized(layout: SystemLayout, mut vector: Vec<C64>) -> Result<Self> {
        let n = vec_norm(&vector);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        for z in &mut vector {
            *z /= n;
        }
        PureState::new(layout, vector, 1e-12)
    }

    /// Computational basis state.
    pub fn basis(layout: SystemLayout, index: usize) -> Result<Self> {
        let mut v = alloc::vec![ZERO; layout.total_dim()];
        *v.get_mut(index)
            .ok_or_else(|| Error::InvalidArgument(format!("basis index {index} out of range")))? =
            C64::new(1.0, 0.0);
        PureState::new(layout, v, 1e-12)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn to_density(&self) -> DensityState {
        DensityState {
            layout: self.layout.clone(),
            matrix: Matrix::projector(&self.vector),
        }
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        Ok(PureState {
            layout: self.layout.concat(&other.layout)?,
            vector: vec_kron(&self.vector, &other.vector),
        })
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<PureState> {
        let idx = self.layout.indices_of(order)?;
        if idx.len() != self.layout.len() {
            return Err(Error::InvalidGrouping(
                "permutation must list every subsystem".into(),
            ));
        }
        Ok(self.permute_positions(&idx))
    }

    pub(crate) fn permute_positions(&self, order: &[usize]) -> PureState {
        let perm = subsystem_permutation(&self.layout.dims(), order);
        PureState {
            layout: self.layout.select(order),
            vector: perm.iter().map(|&p| self.vector[p]).collect(),
        }
    }

    /// Same as [`DensityState::grouped`] for vectors.
    pub fn grouped(&self, grouping: &Tripartition) -> Result<PureState> {
        let [a, b, c] = grouping.resolve(&self.layout)?;
        let order: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
        let dims = self.layout.dims();
        let d = |g: &[usize]| g.iter().map(|&i| dims[i]).product::<usize>();
        let layout = SystemLayout::abc(d(&a), d(&b), d(&c))?;
        let permuted = self.permute_positions(&order);
        Ok(PureState {
            layout,
            vector: permuted.vector,
        })
    }

    /// Reduced state on `keep` (layout order), computed as `M M†` of the reshaped vector.
    pub fn reduce<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityState> {
        let mut idx = self.layout.indices_of(keep)?;
        idx.sort_unstable();
        Ok(self.reduce_to(&idx))
    }

    pub(crate) fn reduce_to(&self, keep: &[usize]) -> DensityState {
        let m = self.reshape_split(keep);
        DensityState {
            layout: self.layout.select(keep),
            matrix: m.mul_adjoint(&m),
        }
    }

    /// The vector as a matrix with rows indexed by `keep` (in that order) and columns
    /// by the remaining subsystems (layout order).
    pub(crate) fn reshape_split(&self, keep: &[usize]) -> Matrix {
        let dims = self.layout.dims();
        let st = strides(&dims);
        let rest: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
        let k_off = offsets(
            &keep.iter().map(|&i| dims[i]).collect::<Vec<_>>(),
            &keep.iter().map(|&i| st[i]).collect::<Vec<_>>(),
        );
        let r_off = offsets(
            &rest.iter().map(|&i| dims[i]).collect::<Vec<_>>(),
            &rest.iter().map(|&i| st[i]).collect::<Vec<_>>(),
        );
        Matrix::from_fn(k_off.len(), r_off.len(), |a, t| {
            self.vector[k_off[a] + r_off[t]]
        })
    }

    /// n-fold tensor power with copies labeled `X#1 .. X#n`.
    pub fn tensor_power(&self, n: usize) -> Result<PureState> {
        if n == 0 {
            return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
        }
        let mut out = PureState {
            layout: self.layout.with_suffix("#1"),
            vector: self.vector.clone(),
        };
        for k in 2..=n {
            let copy = PureState {
                layout: self.layout.with_suffix(&format!("#{k}")),
                vector: self.vector.clone(),
            };
            out = out.tensor(&copy)?;
        }
        Ok(out)
    }
}

/// Reduced matrix on subsystem positions `keep` (output in that order).
pub(crate) fn reduce_matrix(m: &Matrix, dims: &[usize], keep: &[usize]) -> Matrix {
    let st = strides(dims);
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let k_off = offsets(
        &keep.iter().map(|&i| dims[i]).collect::<Vec<_>>(),
        &keep.iter().map(|&i| st[i]).collect::<Vec<_>>(),
    );
    let r_off = offsets(
        &rest.iter().map(|&i| dims[i]).collect::<Vec<_>>(),
        &rest.iter().map(|&i| st[i]).collect::<Vec<_>>(),
    );
    let n = m.cols();
    let data = m.data();
    Matrix::from_fn(k_off.len(), k_off.len(), |a, b| {
        let (ra, rb) = (k_off[a], k_off[b]);
        r_off
            .iter()
            .fold(ZERO, |acc, &t| acc + data[(ra + t) * n + rb + t])
    })
}

/// Kronecker product of a list of states with concatenated layouts.
pub fn tensor_product(parts: &[DensityState]) -> Result<DensityState> {
    let (first, rest) = parts
        .split_first()
        .ok_or(Error::Empty("tensor_product of no parts"))?;
    rest.iter().try_fold(first.clone(), |acc, p| acc.tensor(p))
}
