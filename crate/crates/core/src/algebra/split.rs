use alloc::vec::Vec;

use crate::linalg::Matrix;

/// Isometry from (a subspace of) a space into `x₀ ⊗ x_L ⊗ x_R` whose image is
/// `⊕_j |j⟩ ⊗ ℂ^{l_j} ⊗ ℂ^{r_j}`, zero-padded to `d_L = max l_j`, `d_R = max r_j`.
///
/// Row `(j·d_L + x)·d_R + y` of `matrix` carries the index `(j, x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitIsometry {
    pub matrix: Matrix,
    /// Native `(l_j, r_j)` per block.
    pub blocks: Vec<(usize, usize)>,
}

impl SplitIsometry {
    pub fn d0(&self) -> usize {
        self.blocks.len()
    }

    pub fn dl(&self) -> usize {
        self.blocks.iter().map(|b| b.0).max().unwrap_or(1)
    }

    pub fn dr(&self) -> usize {
        self.blocks.iter().map(|b| b.1).max().unwrap_or(1)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.d0(), self.dl(), self.dr())
    }

    pub fn in_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn row(&self, j: usize, x: usize, y: usize) -> usize {
        (j * self.dl() + x) * self.dr() + y
    }

    /// Rows of block `j` restricted to its native dimensions, ordered `(x, y)`.
    pub fn block_rows(&self, j: usize) -> Vec<usize> {
        let (l, r) = self.blocks[j];
        let mut v = Vec::with_capacity(l * r);
        for x in 0..l {
            for y in 0..r {
                v.push(self.row(j, x, y));
            }
        }
        v
    }

    /// `Γ_j`: the rows of block `j`, an `l_j r_j × in_dim` partial isometry.
    pub fn block_matrix(&self, j: usize) -> Matrix {
        let rows = self.block_rows(j);
        Matrix::from_fn(rows.len(), self.in_dim(), |i, c| self.matrix[(rows[i], c)])
    }

    /// Projector `Γ†Γ` onto the domain.
    pub fn domain_projector(&self) -> Matrix {
        self.matrix.adjoint_mul(&self.matrix)
    }

    /// Largest entry of `ΓΓ†Γ − Γ` (zero for a partial isometry).
    pub fn isometry_defect(&self) -> f64 {
        let g = &self.matrix;
        (&g.matmul(&g.adjoint_mul(g)) - g).max_abs()
    }
}
