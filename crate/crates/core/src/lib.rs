//! Device-independent QKD analysis for phase-entangled coherent states
//! travelling through a pure-loss bosonic channel.
//!
//! The pipeline runs from the source overlap `γ` and channel transmission `T`
//! to an effective two-qubit state, through optimal local filtering and the
//! maximal CHSH violation, to the secret key fraction. Every closed form has an
//! independent counterpart: the matrix pipeline in [`filtering`] and [`bell`],
//! the brute-force CHSH search, and the truncated Fock-space model in [`fock`].
//!
//! Module map:
//!
//! * [`qubit`]: 2×2 / 4×4 complex matrices, Pauli algebra, correlation
//!   matrices, 3×3 SVD and Hermitian eigensolver.
//! * [`channel`]: source and channel parameters, the unfiltered state.
//! * [`filtering`]: optimal local filters and the filtered state.
//! * [`bell`]: maximal CHSH value, achieving settings, brute-force oracle.
//! * [`keyrate`]: QBER, Holevo bound, key fractions, biphoton comparison.
//! * [`euler`]: Euler decomposition of measurement-basis rotations.
//! * [`fock`]: first-principles number-basis oracle for the reduced state.
//! * [`cli`]: the command implementations behind the `catqkd` binary.

pub mod bell;
pub mod channel;
pub mod cli;
pub mod error;
pub mod euler;
pub mod filtering;
pub mod fock;
pub mod keyrate;
pub mod qubit;

pub use error::{Error, Result};
