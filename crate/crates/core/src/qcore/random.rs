//! Seeded generators for states and unitaries.
//!
//! Every generator takes a caller-owned RNG. [`seeded_rng`] and [`trial_rng`] give
//! reproducible ChaCha streams; trial `i` of a harness uses stream `i` of the master
//! seed, so a single trial can be replayed without running the ones before it.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DensityState, PureState, SystemLayout};
use crate::linalg::{vec_inner, vec_norm, Matrix, C64};
use crate::{Error, Result};

pub type HarnessRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> HarnessRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `trial` derived from `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> HarnessRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Standard complex Gaussian (real and imaginary parts each of variance 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-random unitary: Gram–Schmidt on the columns of a Gaussian matrix. This is the
/// QR factorization with a positive diagonal in `R`, so no further phase fix is needed.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let g = gaussian_matrix(d, d, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        for _ in 0..2 {
            for q in &cols {
                let c = vec_inner(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let n = vec_norm(&v);
        for x in &mut v {
            *x /= n;
        }
        cols.push(v);
    }
    Matrix::from_columns(d, &cols)
}

/// Haar-random isometry from dimension `d_in` into `d_out` (first columns of a unitary).
pub fn random_isometry<R: Rng + ?Sized>(d_out: usize, d_in: usize, rng: &mut R) -> Result<Matrix> {
    if d_in > d_out {
        return Err(Error::InvalidArgument(alloc::format!(
            "isometry needs d_in <= d_out, got {d_in} > {d_out}"
        )));
    }
    let u = random_unitary(d_out, rng);
    Ok(u.block(0, d_out, 0, d_in))
}

/// Random pure state, uniform on the unit sphere.
pub fn random_pure<R: Rng + ?Sized>(layout: SystemLayout, rng: &mut R) -> Result<PureState> {
    let v: Vec<C64> = (0..layout.total_dim())
        .map(|_| complex_gaussian(rng))
        .collect();
    PureState::normalized(layout, v)
}

/// Random mixed state of the given rank (induced measure, `G G† / Tr`).
pub fn random_state<R: Rng + ?Sized>(
    layout: SystemLayout,
    rank: usize,
    rng: &mut R,
) -> Result<DensityState> {
    let d = layout.total_dim();
    if rank == 0 || rank > d {
        return Err(Error::InvalidArgument(alloc::format!(
            "rank must lie in 1..={d}, got {rank}"
        )));
    }
    let g = gaussian_matrix(d, rank, rng);
    let m = g.mul_adjoint(&g);
    let tr = m.trace().re;
    Ok(DensityState::from_parts(
        layout,
        m.scale_real(1.0 / tr).hermitian_part(),
    ))
}

/// Random full-rank state.
pub fn random_full_rank<R: Rng + ?Sized>(
    layout: SystemLayout,
    rng: &mut R,
) -> Result<DensityState> {
    let d = layout.total_dim();
    random_state(layout, d, rng)
}

/// Random probability vector of length `n` with every entry at least `floor`.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, floor: f64, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + floor).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::Tolerances;

    #[test]
    fn unitary_is_unitary_and_deterministic() {
        let u = random_unitary(3, &mut seeded_rng(5));
        let e = &u.adjoint_mul(&u) - &Matrix::identity(3);
        assert!(e.max_abs() < 1e-12);
        assert_eq!(u, random_unitary(3, &mut seeded_rng(5)));
    }

    #[test]
    fn state_has_requested_rank() {
        let l = SystemLayout::single("A", 4).unwrap();
        let rho = random_state(l, 2, &mut seeded_rng(7)).unwrap();
        assert_eq!(rho.rank(&Tolerances::default()), 2);
        assert!((rho.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trial_streams_differ() {
        let a: u64 = trial_rng(1, 0).random();
        let b: u64 = trial_rng(1, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, trial_rng(1, 0).random::<u64>());
    }
}
