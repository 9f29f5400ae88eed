//! Variational quantum imaginary time evolution (VarQITE) solver for the
//! reduced 1D Maxwell system.
//!
//! The library is organized around the stages of the solver pipeline:
//!
//! * [`statevector`] — n-qubit statevector representation and gate kernels,
//!   including ancilla-controlled application for interference circuits.
//! * [`pauli`] — Pauli words/sums and decomposition of 2^n-dimensional
//!   matrices into weighted Pauli strings.
//! * [`maxwell`] — the semi-discretized Maxwell generator, Gaussian initial
//!   condition, and the classical forward-Euler reference solver.
//! * [`ansatz`] — the four TwoLocal circuit families, parameter counting, and
//!   exact parameter Jacobians via gate-derivative expansions.
//! * [`mclachlan`] — the McLachlan system Λθ̇ = C in exact statevector mode
//!   and in simulated Hadamard-test sampling mode.
//! * [`evolver`] — the explicit-Euler parameter flow with regularized solves.
//! * [`state_prep`] — initial-parameter fitting (SPSA + SWAP-test fidelity)
//!   and the mesh-refinement criterion.
//! * [`metrics`] — trace-error metrics against the classical reference.
//! * [`resources`] — circuit-count and query-cost accounting.
//! * [`config`] / [`trajectory`] — run configuration and on-disk formats used
//!   by the CLI.
//!
//! # Conventions
//!
//! Qubit 0 is the least significant bit of the amplitude index, so the basis
//! state |q_{n-1} … q_1 q_0⟩ lives at index Σ q_k 2^k. Pauli word strings
//! follow the same rule: character k of the word acts on qubit k.

pub mod ansatz;
pub mod config;
mod error;
pub mod evolver;
pub mod maxwell;
pub mod mclachlan;
pub mod metrics;
pub mod pauli;
pub mod resources;
pub mod state_prep;
pub mod statevector;
pub mod trajectory;

pub use error::{Error, Result};
