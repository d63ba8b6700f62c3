//! Weakly nonlocal (density-gradient) fluids.
//!
//! The crate turns a static entropy density `s(ρ, ∇ρ)` into a reversible
//! pressure and a potential, integrates the resulting mass and momentum
//! balances, and checks the Schrödinger–Madelung fluid against a split-step
//! Schrödinger solver.
//!
//! Modules, bottom-up:
//! - [`fields`]: periodic grids, sampled fields, spectral and finite-difference derivatives;
//! - [`models`]: the entropy catalogue and the constitutive pipeline;
//! - [`dynamics`]: explicit time integration with conservation and entropy diagnostics;
//! - [`quantum`]: the Madelung bridge and the split-step solver;
//! - [`stationary`]: ground and excited states of `U + V = μ`;
//! - [`scenario`]: declarative experiments, runners and CSV output.

pub mod error;
pub mod fields;
pub mod dynamics;
pub mod models;
pub mod parallel;
pub mod potential;
pub mod quantum;
pub mod scenario;
pub mod stationary;

pub use error::{Error, Result};
pub use fields::{Backend, Grid, ScalarField, SymTensorField, VectorField};
