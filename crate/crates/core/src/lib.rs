#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Quantum amplitude dynamics and their classical-oscillator counterparts.
//!
//! A finite set of quantum amplitudes `c_n` evolves under `i ċ = H c`. Writing
//! `c_n = (q_n + i p_n)/√2` turns the same equations into Hamilton's equations
//! for coupled harmonic oscillators. This crate integrates both sides, the
//! position-coupled weak-coupling approximation of the classical side, and a
//! two-qubit gate layer built from timed oscillator couplings.
//!
//! Modules:
//! - [`model`]: Hamiltonian scenarios.
//! - [`integrate`]: adaptive Dormand-Prince kernel shared by every scheme.
//! - [`quantum_ref`]: the Schrödinger reference and closed forms.
//! - [`oscillator`]: exact and approximate classical evolutions.
//! - [`gates`]: register states, gates, coupling schedules, entanglement.
//! - [`scenario`], [`runner`], [`output`]: config files, scheme dispatch, CSV/SVG/JSON.

pub mod error;
pub mod gates;
pub mod integrate;
pub mod model;
pub mod oscillator;
pub mod output;
pub mod quantum_ref;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result};
pub use integrate::{integrate, IntegrateError, IntegratorConfig, Trajectory};
pub use model::{HamiltonianKind, HamiltonianSpec};
pub use oscillator::PhaseSpaceState;
pub use quantum_ref::AmplitudeState;

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
