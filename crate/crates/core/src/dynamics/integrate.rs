use super::diagnostics::{diagnostics, DiagnosticsRecord};
use super::kernel::Kernel;
use super::vacuum::{active_mask, fill_ghosts};
use super::{FluidState, FluidSystem, Integrator, Scheme, ViscosityKind};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, VectorField};

/// Largest admissible step `C h² / max(2a, h(max|v| + c_s), D_visc)` over
/// the active cells, where `a` is the dispersion coefficient and `D_visc` the
/// viscous diffusivity. Infinite for a state with nothing to resolve.
pub fn stability_bound(state: &FluidState, system: &FluidSystem, integrator: &Integrator) -> f64 {
    let h = state.grid().min_spacing();
    let rho = state.rho.values();
    let active = active_mask(rho);
    let (mut disp, mut adv, mut rho_min) = (0.0f64, 0.0f64, f64::INFINITY);
    for n in (0..rho.len()).filter(|&n| active[n]) {
        let r = rho[n];
        let speed: f64 = state.v.components().iter().map(|c| c[n] * c[n]).sum::<f64>().sqrt();
        disp = disp.max(2.0 * system.model.dispersion_coefficient(r));
        adv = adv.max(h * (speed + system.model.sound_speed_sq(r).sqrt()));
        rho_min = rho_min.min(r);
    }
    let closure = &system.closure;
    let visc = match closure.kind() {
        ViscosityKind::Dynamic => 2.0 * closure.eta() / rho_min,
        ViscosityKind::Kinematic => 2.0 * closure.eta(),
    };
    let denom = disp.max(adv).max(visc);
    if denom > 0.0 {
        integrator.stability_c * h * h / denom
    } else {
        f64::INFINITY
    }
}

fn check_stability(state: &FluidState, system: &FluidSystem, integrator: &Integrator, dt: f64) -> Result<()> {
    if integrator.override_stability {
        return Ok(());
    }
    let bound = stability_bound(state, system, integrator);
    if dt > bound {
        return Err(Error::Stability { dt, bound });
    }
    Ok(())
}

fn axpy(base: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    base.iter().zip(k).map(|(b, k)| b + a * k).collect()
}

/// Advances the stored state by one step of length `dt`. The ghost cells of
/// the stored state are refilled first, so vacuum cells next to the edge
/// become active as soon as the extrapolated profile clears the floor.
fn advance(kernel: &mut Kernel<'_>, state: &FluidState, dt: f64, scheme: Scheme) -> Result<FluidState> {
    let grid = *state.grid();
    let t = state.t;
    let mut rho = state.rho.values().to_vec();
    let mut v = state.v.comp(0).to_vec();
    let active = active_mask(&rho);
    fill_ghosts(&mut rho, &mut v, &active)?;
    kernel.set_active(&rho)?;
    let (rho, v) = match scheme {
        Scheme::Rk2 => {
            let (r1, v1) = kernel.rates(&rho, &v, t)?;
            let (r2, v2) = kernel.rates(&axpy(&rho, 0.5 * dt, &r1), &axpy(&v, 0.5 * dt, &v1), t + 0.5 * dt)?;
            (axpy(&rho, dt, &r2), axpy(&v, dt, &v2))
        }
        Scheme::Rk4 => {
            let (r1, v1) = kernel.rates(&rho, &v, t)?;
            let (r2, v2) = kernel.rates(&axpy(&rho, 0.5 * dt, &r1), &axpy(&v, 0.5 * dt, &v1), t + 0.5 * dt)?;
            let (r3, v3) = kernel.rates(&axpy(&rho, 0.5 * dt, &r2), &axpy(&v, 0.5 * dt, &v2), t + 0.5 * dt)?;
            let (r4, v4) = kernel.rates(&axpy(&rho, dt, &r3), &axpy(&v, dt, &v3), t + dt)?;
            let combine = |y: &[f64], k: [&[f64]; 4]| -> Vec<f64> {
                (0..y.len())
                    .map(|i| y[i] + dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]))
                    .collect()
            };
            (combine(&rho, [&r1, &r2, &r3, &r4]), combine(&v, [&v1, &v2, &v3, &v4]))
        }
    };
    let t_new = t + dt;
    if let Some(i) = rho.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::Integration {
            t: t_new,
            reason: format!("density left the admissible range at cell {i}: {:e}", rho[i]),
        });
    }
    let rho = ScalarField::new(grid, rho).map_err(|e| Error::Integration {
        t: t_new,
        reason: e.to_string(),
    })?;
    let v = VectorField::new(grid, vec![v]).map_err(|e| Error::Integration {
        t: t_new,
        reason: e.to_string(),
    })?;
    FluidState::new(rho, v, t_new)
}

/// One explicit step of length `integrator.dt`. Refused when `dt` exceeds the
/// stability bound unless the integrator overrides the check.
pub fn step(state: &FluidState, system: &FluidSystem, integrator: &Integrator) -> Result<FluidState> {
    integrator.validate()?;
    check_stability(state, system, integrator, integrator.dt)?;
    let mut kernel = Kernel::new(*state.grid(), system, integrator.backend, integrator.branch, integrator.jet)?;
    advance(&mut kernel, state, integrator.dt, integrator.scheme)
}

/// Result of a run. On a numerical failure the samples up to the last good
/// step are kept, `final_state` is that last good state and `failure` says
/// what went wrong.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<FluidState>,
    pub final_state: FluidState,
    pub steps: usize,
    pub failure: Option<Error>,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Integrates from `initial.t` over `integrator.t_end` with the uniform step
/// that lands on the end time. Bad input is an error; numerical breakdown
/// returns the partial trajectory.
pub fn simulate(initial: &FluidState, system: &FluidSystem, integrator: &Integrator) -> Result<Trajectory> {
    integrator.validate()?;
    let (n, dt) = integrator.steps();
    let mut kernel = Kernel::new(*initial.grid(), system, integrator.backend, integrator.branch, integrator.jet)?;
    kernel.set_active(initial.rho.values())?;
    if n > 0 {
        check_stability(initial, system, integrator, dt)?;
    }
    let sample = |s: &FluidState| diagnostics(s, system, integrator.backend, integrator.jet);
    let mut traj = Trajectory {
        diagnostics: vec![sample(initial)?],
        snapshots: Vec::new(),
        final_state: initial.clone(),
        steps: 0,
        failure: None,
    };
    if integrator.snapshot_stride > 0 {
        traj.snapshots.push(initial.clone());
    }
    let t0 = initial.t;
    for k in 1..=n {
        let state = &traj.final_state;
        let next = check_stability(state, system, integrator, dt)
            .and_then(|_| advance(&mut kernel, state, dt, integrator.scheme))
            .map(|mut s| {
                // avoid accumulating round-off in t
                s.t = t0 + k as f64 * dt;
                s
            });
        let next = match next {
            Ok(s) => s,
            Err(e) => {
                traj.failure = Some(e);
                break;
            }
        };
        if k % integrator.sample_stride == 0 || k == n {
            match sample(&next) {
                Ok(d) => traj.diagnostics.push(d),
                Err(e) => {
                    traj.failure = Some(e);
                    break;
                }
            }
        }
        if integrator.snapshot_stride > 0 && k % integrator.snapshot_stride == 0 {
            traj.snapshots.push(next.clone());
        }
        traj.final_state = next;
        traj.steps = k;
    }
    if traj.failure.is_some() && integrator.snapshot_stride > 0 {
        traj.snapshots.push(traj.final_state.clone());
    }
    Ok(traj)
}
