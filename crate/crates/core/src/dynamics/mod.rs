//! Explicit time integration of the mass and momentum balances
//!
//! ```text
//! ∂t ρ = −∇·(ρv)
//! ∂t v = −(v·∇)v − (1/ρ)∇·(P_rev + P_visc) − ∇V
//! ```
//!
//! in one space dimension, with conservation and entropy diagnostics.
//!
//! Localized states (a Gaussian in a wide periodic box) have tails far below
//! any useful relative precision. Cells with `ρ` under the floor
//! (`1e-12 · mean ρ`) are treated as vacuum: their rates are zero and the
//! four cells next to each active edge are refilled every step by quadratic
//! extrapolation of `ln ρ` and `v` from the last three active cells, which
//! lets the active region grow as the state spreads. Only the local
//! finite-difference backends support vacuum cells; the spectral backend
//! refuses states that reach the floor. Derivatives of `ρ` are taken through
//! `ln ρ` by default, and the pressure branch evaluates `(1/ρ)∂ₓP` as
//! `∂ₓ(P/ρ) + (P/ρ) ∂ₓ ln ρ` so nothing is divided by a tiny density after
//! differentiation.

mod diagnostics;
mod integrate;
mod kernel;
pub(crate) mod vacuum;

pub use diagnostics::{diagnostics, entropy_production, viscous_pressure, DiagnosticsRecord};
pub use integrate::{simulate, stability_bound, step, Trajectory};
pub use kernel::rhs;

use crate::error::{Error, Result};
use crate::fields::{Backend, Grid, ScalarField, VectorField};
use crate::models::{EntropyModel, JetMode};
use crate::potential::ExternalPotential;
use serde::{Deserialize, Serialize};

/// Density and velocity at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub rho: ScalarField,
    pub v: VectorField,
    pub t: f64,
}

impl FluidState {
    /// Requires matching grids and a strictly positive density.
    pub fn new(rho: ScalarField, v: VectorField, t: f64) -> Result<Self> {
        rho.grid().ensure_same(v.grid())?;
        if let Some(index) = rho.values().iter().position(|&r| !(r > 0.0)) {
            return Err(Error::DensityFloor {
                index,
                value: rho.values()[index],
                floor: 0.0,
            });
        }
        if !t.is_finite() {
            return Err(Error::param("t", "must be finite"));
        }
        Ok(FluidState { rho, v, t })
    }

    /// State at rest.
    pub fn at_rest(rho: ScalarField) -> Result<Self> {
        let v = VectorField::zeros(*rho.grid());
        Self::new(rho, v, 0.0)
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViscosityKind {
    /// `P_visc = −η(∇v + ∇vᵀ)` with constant `η`.
    #[default]
    Dynamic,
    /// `P_visc = −ηρ(∇v + ∇vᵀ)`: constant kinematic viscosity, which stays
    /// bounded in near-vacuum tails.
    Kinematic,
}

/// Shear-only viscous closure; `η = 0` is the reversible limit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ViscousClosure {
    eta: f64,
    kind: ViscosityKind,
}

impl ViscousClosure {
    pub fn new(eta: f64, kind: ViscosityKind) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::param("viscosity.eta", format!("must be non-negative, got {eta}")));
        }
        Ok(ViscousClosure { eta, kind })
    }

    pub fn inviscid() -> Self {
        ViscousClosure::default()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn kind(&self) -> ViscosityKind {
        self.kind
    }

    pub fn is_inviscid(&self) -> bool {
        self.eta == 0.0
    }

    /// Effective shear coefficient at density `rho`.
    pub fn coefficient(&self, rho: f64) -> f64 {
        match self.kind {
            ViscosityKind::Dynamic => self.eta,
            ViscosityKind::Kinematic => self.eta * rho,
        }
    }
}

/// How the reversible force is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `−(1/ρ)∇·P_rev` from the closed-form reversible pressure.
    Pressure,
    /// `−∇U` from the potential.
    #[default]
    Potential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Rk4,
    /// Explicit midpoint. Not stable for purely dispersive problems; meant for
    /// short order checks.
    Rk2,
}

/// Model, closure and body force of one fluid problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidSystem {
    pub model: EntropyModel,
    pub closure: ViscousClosure,
    pub potential: ExternalPotential,
}

impl FluidSystem {
    pub fn new(model: EntropyModel, closure: ViscousClosure, potential: ExternalPotential) -> Self {
        FluidSystem {
            model,
            closure,
            potential,
        }
    }
}

/// Discretization and time-stepping controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Diagnostics every `sample_stride` steps (and always at the end).
    pub sample_stride: usize,
    /// Keep a state snapshot every `snapshot_stride` steps; 0 keeps none.
    pub snapshot_stride: usize,
    pub branch: Branch,
    pub backend: Backend,
    pub jet: JetMode,
    /// `C` in `dt ≤ C h² / max(...)`.
    pub stability_c: f64,
    pub override_stability: bool,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator {
            scheme: Scheme::Rk4,
            dt: 1e-4,
            t_end: 1.0,
            sample_stride: 100,
            snapshot_stride: 0,
            branch: Branch::Potential,
            backend: Backend::Fd4,
            jet: JetMode::Logarithmic,
            stability_c: 0.1,
            override_stability: false,
        }
    }
}

impl Integrator {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("integrator.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::param(
                "integrator.t_end",
                format!("must be non-negative, got {}", self.t_end),
            ));
        }
        if self.sample_stride == 0 {
            return Err(Error::param("integrator.sample_stride", "must be at least 1"));
        }
        if !(self.stability_c.is_finite() && self.stability_c > 0.0) {
            return Err(Error::param("integrator.stability_c", "must be positive"));
        }
        Ok(())
    }

    /// Number of steps and the uniform step that lands exactly on `t_end`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}
