//! Angular, gauge and discrete-symmetry machinery for a Dirac fermion doublet
//! in an Abelian-embedded SU(2) monopole field.

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod angular;
pub mod discrete;
pub mod error;
pub mod export;
pub mod gauge;
pub mod halfint;
pub mod ode;
pub mod pauli;
pub mod quadrature;
pub mod radial;
pub mod selection;
pub mod special;
pub mod verify;
pub mod wavefunctions;
pub mod wigner;

pub use error::{IsoError, Result};
pub use halfint::HalfInt;
pub use num_complex::Complex64 as C64;
