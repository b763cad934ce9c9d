//! Bethe-ansatz spectra for the ferromagnetic XXZ chain with domain-wall
//! boundary conditions, and the associated asymmetric exclusion process on
//! integer partitions.
//!
//! The crate provides, at desk scale and with exact-rational cross checks:
//!
//! - q-series primitives (Gaussian binomials, q-Pochhammer symbols),
//! - partitions, Young-diagram geometry and Frobenius coordinates,
//! - finite-chain Hamiltonians and a dense diagonalization oracle,
//! - the quantum-group generators `E`, `F`, `K`, descendant towers, and the
//!   associated scalar-product identities,
//! - magnon amplitudes, bound states, finite-chain Bethe vectors and their
//!   domain-wall limits,
//! - the exclusion-process rate matrix, its stationary measure, exact
//!   stochastic sampling and time evolution,
//! - ground-state observables: magnetization profiles, the limit shape and
//!   particle-displacement probabilities.
//!
//! Everything is generic over the scalar backend: `Rat` for exact rational
//! verification, `C64` for floating-point spectra.

pub mod algebra;
pub mod asep;
pub mod bethe;
pub mod chain;
pub mod dense;
pub mod error;
pub mod observables;
pub mod partitions;
pub mod qseries;
pub mod scalar;
pub mod uqsl2;
pub mod verify;

pub use algebra::{Basis, BasisId, BasisKey, LinearOperator, SpinConfig, StateVector, Symmetry};
pub use error::{Error, Result};
pub use partitions::{Corners, FrobeniusCoords, Partition};
pub use scalar::{parse_rat, Rat, Scalar, C64};
