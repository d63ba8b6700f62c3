//! Stationary states: solutions of `U(ρ) + V = μ` at fixed mass.
//!
//! Everything is written in the amplitude `R = √ρ` so that no quantity is
//! divided by the density. For the Schrödinger–Madelung fluid `R·U = −(ν/2)R″`
//! and the flow below is imaginary-time Schrödinger evolution.
//!
//! The residual of a state is `max |R(U + V − μ)| / max R`, with `μ` the
//! mass-weighted mean of `U + V`. Weighting by `R` keeps it meaningful in
//! tails where `U` itself cannot be resolved.

use crate::error::{Error, Result};
use crate::fields::ops::derivative;
use crate::fields::{Backend, Grid, ScalarField};
use crate::models::{EntropyModel, ModelKind};
use crate::potential::ExternalPotential;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryProblem {
    pub model: EntropyModel,
    /// Trap potential; shifted internally so that `min V = 0`.
    pub potential: ScalarField,
    pub mass: f64,
    /// Residual tolerance.
    pub tol: f64,
    /// Flow step; `None` picks `0.1 h²/√ν` for the Schrödinger–Madelung fluid
    /// and `0.05 h²/max(D, 1/2)` otherwise, `D` being the amplitude diffusivity.
    pub dtau: Option<f64>,
    pub max_iter: usize,
    pub backend: Backend,
    /// Starting density; `None` uses `exp(−V)` normalized to the mass.
    pub initial: Option<ScalarField>,
}

impl StationaryProblem {
    pub fn new(model: EntropyModel, grid: Grid, potential: &ExternalPotential, mass: f64) -> Result<Self> {
        Ok(StationaryProblem {
            model,
            potential: potential.pinned(&grid)?,
            mass,
            tol: 1e-9,
            dtau: None,
            max_iter: 500_000,
            backend: Backend::Spectral,
            initial: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.potential.grid()
    }

    fn validate(&self) -> Result<()> {
        if self.grid().dim() != 1 {
            return Err(Error::Unsupported("stationary states are one-dimensional".into()));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::param("stationary.mass", format!("must be positive, got {}", self.mass)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::param("stationary.tol", "must be positive"));
        }
        if let Some(d) = self.dtau {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::param("stationary.dtau", format!("must be positive, got {d}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::param("stationary.max_iter", "must be at least 1"));
        }
        if let Some(init) = &self.initial {
            init.grid().ensure_same(self.grid())?;
            if let Some(index) = init.values().iter().position(|&r| !(r > 0.0)) {
                return Err(Error::DensityFloor {
                    index,
                    value: init.values()[index],
                    floor: 0.0,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryResult {
    pub rho: ScalarField,
    /// Mass-weighted mean of `U + V`.
    pub mu: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One level of the linear Schrödinger–Madelung problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub index: usize,
    pub mu: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The gap to the previous level is below `10·tol`.
    pub degenerate: bool,
    #[serde(skip)]
    pub rho: ScalarField,
    /// Real amplitude, normalized to the mass.
    #[serde(skip)]
    pub amplitude: ScalarField,
}

/// Amplitude derivatives `(R′, R″)`.
fn jet(grid: &Grid, r: &[f64], backend: Backend) -> (Vec<f64>, Vec<f64>) {
    (derivative(grid, r, 0, 1, backend), derivative(grid, r, 0, 2, backend))
}

/// `R·U(R²)` without divisions by `R`.
fn amplitude_potential(model: &EntropyModel, r: &[f64], rp: &[f64], rpp: &[f64]) -> Vec<f64> {
    let nu = model.nu();
    (0..r.len())
        .map(|i| {
            let rho = r[i] * r[i];
            let (sl, dsl) = model.local_terms(rho);
            let local = -r[i] * (sl + rho * dsl);
            let drho = 2.0 * r[i] * rp[i];
            let ddrho = 2.0 * (rp[i] * rp[i] + r[i] * rpp[i]);
            let nonlocal = match model.kind() {
                ModelKind::Euler => 0.0,
                ModelKind::SchrodingerMadelung => -0.5 * nu * rpp[i],
                ModelKind::FisherShannon => 4.0 * nu * rpp[i],
                ModelKind::Landau => r[i] * (-nu * rho * ddrho - 0.5 * nu * drho * drho),
                ModelKind::Alternative => r[i] * (-0.5 * nu * ddrho),
            };
            nonlocal + local
        })
        .collect()
}

/// `−ρs` per cell, without divisions by `R`.
fn free_energy_density(model: &EntropyModel, r: &[f64], rp: &[f64]) -> Vec<f64> {
    let nu = model.nu();
    (0..r.len())
        .map(|i| {
            let rho = r[i] * r[i];
            let g = match model.kind() {
                ModelKind::Euler => 0.0,
                ModelKind::SchrodingerMadelung => -0.5 * nu,
                ModelKind::FisherShannon => 4.0 * nu,
                ModelKind::Landau => -2.0 * nu * rho * rho,
                ModelKind::Alternative => -nu * rho,
            };
            -(g * rp[i] * rp[i] + rho * model.local_terms(rho).0)
        })
        .collect()
}

struct Eval {
    /// `R(U + V − μ)`
    force: Vec<f64>,
    mu: f64,
    residual: f64,
    energy: f64,
}

fn evaluate(model: &EntropyModel, grid: &Grid, v: &[f64], r: &[f64], backend: Backend) -> Eval {
    let (rp, rpp) = jet(grid, r, backend);
    let ru = amplitude_potential(model, r, &rp, &rpp);
    let mass: f64 = r.iter().map(|x| x * x).sum();
    let mu = (0..r.len()).map(|i| r[i] * ru[i] + r[i] * r[i] * v[i]).sum::<f64>() / mass;
    let force: Vec<f64> = (0..r.len()).map(|i| ru[i] + (v[i] - mu) * r[i]).collect();
    let rmax = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let residual = force.iter().fold(0.0f64, |m, x| m.max(x.abs())) / rmax;
    let e = free_energy_density(model, r, &rp);
    let energy = (0..r.len()).map(|i| e[i] + r[i] * r[i] * v[i]).sum::<f64>() * grid.cell_volume();
    Eval {
        force,
        mu,
        residual,
        energy,
    }
}

fn normalize(r: &mut [f64], mass: f64, dx: f64) {
    let m: f64 = r.iter().map(|x| x * x).sum::<f64>() * dx;
    let s = (mass / m).sqrt();
    for x in r.iter_mut() {
        *x *= s;
    }
}

fn default_dtau(model: &EntropyModel, grid: &Grid, rho_max: f64) -> f64 {
    let h = grid.spacing(0);
    let nu = model.nu();
    if model.kind() == ModelKind::SchrodingerMadelung {
        return 0.1 * h * h / nu.sqrt();
    }
    let d = match model.kind() {
        ModelKind::Euler | ModelKind::SchrodingerMadelung => 0.0,
        ModelKind::FisherShannon => 4.0 * nu.abs(),
        ModelKind::Landau => 2.0 * nu * rho_max * rho_max,
        ModelKind::Alternative => nu * rho_max,
    };
    0.05 * h * h / d.max(0.5)
}

/// Maximum deviation of `U + V` from its mass-weighted mean, weighted by the
/// amplitude (see the module docs).
pub fn stationarity_residual(model: &EntropyModel, rho: &ScalarField, potential: &ScalarField, backend: Backend) -> Result<f64> {
    rho.grid().ensure_same(potential.grid())?;
    if rho.grid().dim() != 1 {
        return Err(Error::Unsupported("stationary states are one-dimensional".into()));
    }
    if let Some(index) = rho.values().iter().position(|&r| !(r > 0.0)) {
        return Err(Error::DensityFloor {
            index,
            value: rho.values()[index],
            floor: 0.0,
        });
    }
    let r: Vec<f64> = rho.values().iter().map(|x| x.sqrt()).collect();
    Ok(evaluate(model, rho.grid(), potential.values(), &r, backend).residual)
}

/// Normalized gradient flow `R ← R − dτ R(U + V − μ)` with mass projection
/// and step halving whenever the free energy `∫(−ρs + ρV)` would increase.
pub fn ground_state(problem: &StationaryProblem) -> Result<StationaryResult> {
    problem.validate()?;
    let grid = *problem.grid();
    let dx = grid.cell_volume();
    let model = &problem.model;
    let v = problem.potential.values();
    let mut r: Vec<f64> = match &problem.initial {
        Some(init) => init.values().iter().map(|x| x.sqrt()).collect(),
        None => v.iter().map(|x| (-0.5 * x).exp()).collect(),
    };
    normalize(&mut r, problem.mass, dx);
    let rho_max = r.iter().fold(0.0f64, |m, x| m.max(x * x));
    let mut dtau = problem.dtau.unwrap_or_else(|| default_dtau(model, &grid, rho_max));
    let mut cur = evaluate(model, &grid, v, &r, problem.backend);
    let mut iterations = 0;
    while cur.residual > problem.tol && iterations < problem.max_iter {
        let mut halvings = 0;
        loop {
            let mut next: Vec<f64> = r.iter().zip(&cur.force).map(|(x, f)| (x - dtau * f).abs()).collect();
            normalize(&mut next, problem.mass, dx);
            if next.iter().any(|x| !x.is_finite()) {
                return Err(Error::Integration {
                    t: iterations as f64,
                    reason: "amplitude flow produced non-finite values".into(),
                });
            }
            let ev = evaluate(model, &grid, v, &next, problem.backend);
            if ev.energy <= cur.energy + 1e-12 * cur.energy.abs() {
                r = next;
                cur = ev;
                break;
            }
            halvings += 1;
            if halvings > 40 {
                return Err(Error::Integration {
                    t: iterations as f64,
                    reason: "flow step underflowed while the energy kept increasing".into(),
                });
            }
            dtau *= 0.5;
        }
        iterations += 1;
    }
    // vanishing tails may round to zero
    let rho: Vec<f64> = r.iter().map(|x| (x * x).max(f64::MIN_POSITIVE)).collect();
    Ok(StationaryResult {
        rho: ScalarField::new(grid, rho)?,
        mu: cur.mu,
        residual: cur.residual,
        iterations,
        converged: cur.residual <= problem.tol,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Deterministic start for level `n`: a few low Fourier modes under `e^{−V/2}`.
fn seed(grid: &Grid, v: &[f64], n: usize) -> Vec<f64> {
    let l = grid.length(0);
    grid.axis_coords(0)
        .iter()
        .zip(v)
        .map(|(x, v)| {
            let k = 2.0 * std::f64::consts::PI / l;
            let waves: f64 = (1..=n + 2).map(|m| (m as f64 * k * x + 0.7 * m as f64).sin()).sum();
            (-0.5 * v).exp() * (1.0 + 0.3 * waves + 0.1 * x)
        })
        .collect()
}

/// Lowest `count` levels of `−(ν/2)φ″ + Vφ = μφ` by explicit imaginary-time
/// flow with Gram–Schmidt deflation against the levels already found.
///
/// Each level is iterated to `tol/100` so that deflating against it does not
/// leave a residual floor for the levels above; `converged` is judged
/// against `tol`.
pub fn excited_states_schm(problem: &StationaryProblem, count: usize) -> Result<Vec<Level>> {
    problem.validate()?;
    let model = &problem.model;
    if model.kind() != ModelKind::SchrodingerMadelung {
        return Err(Error::Unsupported(
            "excited states are computed for the Schrödinger–Madelung fluid only".into(),
        ));
    }
    if model.nu() <= 0.0 {
        return Err(Error::param("model.nu", "must be positive for excited states"));
    }
    let grid = *problem.grid();
    let dx = grid.cell_volume();
    let v = problem.potential.values();
    let nu = model.nu();
    let h = grid.spacing(0);
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(*x));
    // explicit Euler is stable for dτ·λ_max < 2
    let lambda_max = 0.5 * nu * (std::f64::consts::PI / h).powi(2) + vmax;
    let dtau = problem.dtau.unwrap_or(0.1 * h * h / nu.sqrt()).min(1.0 / lambda_max);
    let apply = |phi: &[f64]| -> Vec<f64> {
        let pp = derivative(&grid, phi, 0, 2, problem.backend);
        (0..phi.len()).map(|i| -0.5 * nu * pp[i] + v[i] * phi[i]).collect()
    };
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut levels: Vec<Level> = Vec::new();
    for n in 0..count {
        let project = |phi: &mut Vec<f64>, found: &[Vec<f64>]| {
            for q in found {
                let c = dot(phi, q);
                for (p, qi) in phi.iter_mut().zip(q) {
                    *p -= c * qi;
                }
            }
            let s = dot(phi, phi).sqrt();
            for p in phi.iter_mut() {
                *p /= s;
            }
        };
        let mut phi = seed(&grid, v, n);
        project(&mut phi, &found);
        let mut iterations = 0;
        let (mut mu, mut residual);
        loop {
            let hphi = apply(&phi);
            mu = dot(&phi, &hphi);
            let res: Vec<f64> = (0..phi.len()).map(|i| hphi[i] - mu * phi[i]).collect();
            let pmax = phi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            residual = res.iter().fold(0.0f64, |m, x| m.max(x.abs())) / pmax;
            if residual <= 0.01 * problem.tol || iterations >= problem.max_iter {
                break;
            }
            for (p, r) in phi.iter_mut().zip(&res) {
                *p -= dtau * r;
            }
            project(&mut phi, &found);
            iterations += 1;
        }
        // fix the sign so that the largest lobe is positive
        let peak = phi.iter().fold(0.0f64, |m, &x| if x.abs() > m.abs() { x } else { m });
        if peak < 0.0 {
            for p in phi.iter_mut() {
                *p = -*p;
            }
        }
        let scale = (problem.mass / (dot(&phi, &phi) * dx)).sqrt();
        let amp: Vec<f64> = phi.iter().map(|p| p * scale).collect();
        let rho: Vec<f64> = amp.iter().map(|a| (a * a).max(f64::MIN_POSITIVE)).collect();
        let degenerate = levels.last().is_some_and(|l: &Level| (mu - l.mu).abs() < 10.0 * problem.tol);
        levels.push(Level {
            index: n,
            mu,
            residual,
            iterations,
            converged: residual <= problem.tol,
            degenerate,
            rho: ScalarField::new(grid, rho)?,
            amplitude: ScalarField::new(grid, amp)?,
        });
        found.push(phi);
    }
    Ok(levels)
}
