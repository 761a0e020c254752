//! Numerics for quantum Markov structure of finite-dimensional multipartite states.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure function of
//! its inputs; randomness is always driven by a caller-supplied seed.
//!
//! Module map:
//!
//! - [`linalg`]: dense complex matrices and the Hermitian eigensolver every matrix
//!   function routes through.
//! - [`qcore`]: labeled multipartite states, partial traces, entropies, distances and
//!   the continuity functions used by the bound checks.
//! - [`channels`]: Kraus channels, random-unitary ensembles, Stinespring dilations and
//!   the Petz family of recovery maps.
//! - [`algebra`]: matrix *-algebra closure and block decomposition.
//! - [`kidecomp`]: Koashi–Imoto decompositions and state-preserving channels.
//! - [`markov`]: Markov tests, Markov decompositions, the squeezing map and the
//!   canonical nearest-Markov construction.
//! - [`cost`]: the single-letter Markovianizing cost and its QCMI lower bound.
//! - [`protocols`]: finite-n Markovianization simulators and verifier harnesses.
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

pub mod algebra;
pub mod channels;
pub mod cost;
mod error;
pub mod kidecomp;
pub mod linalg;
pub mod markov;
pub mod protocols;
pub mod qcore;

pub use error::{Error, Result};
pub use linalg::{Matrix, C64};
pub use qcore::{DensityState, PureState, SystemLayout, Tolerances, Tripartition};
