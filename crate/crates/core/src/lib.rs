//! Dual and tight generators of shift-invariant systems (FIR filter banks,
//! Gabor systems) on `ℓ²(ℤ)`.
//!
//! Two finite models are provided: the finite section `S_N = P_N S P_N`, solved
//! with a banded Cholesky factorization, and the periodic model on `ℤ_L`, whose
//! block-circulant frame operator is block-diagonalized by the DFT. Explicit
//! decay constants for banded inverses turn both into certified error bounds.

pub mod cli;
pub mod decay;
pub mod error;
pub mod finite_section;
pub mod frame_operator;
pub mod linalg;
pub mod oracle;
pub mod periodic;
pub mod report;
pub mod seq;
pub mod sis;
pub mod spec_file;
pub mod systems;
pub mod tight;

pub use error::{Error, Result};
pub use seq::FiniteSeq;
pub use sis::{CoeffArray, CoeffRange, ShiftSystem};
