use super::vacuum::{active_mask, fill_ghosts};
use super::{Branch, FluidState, FluidSystem, ViscosityKind};
use crate::error::{Error, Result};
use crate::fields::ops::derivative;
use crate::fields::{Backend, Grid, ScalarField, VectorField};
use crate::models::JetMode;

/// Precomputed per-step context for the one-dimensional rate evaluation.
pub(crate) struct Kernel<'a> {
    pub grid: Grid,
    pub system: &'a FluidSystem,
    pub backend: Backend,
    pub branch: Branch,
    pub jet: JetMode,
    pub dv_ext: Vec<f64>,
    pub active: Vec<bool>,
}

/// Derivatives of `ρ` at every cell: `(ρ′, ρ″, (ln ρ)′)`.
pub(crate) struct Jet1 {
    pub rp: Vec<f64>,
    pub rpp: Vec<f64>,
    pub gp: Vec<f64>,
}

pub(crate) fn jet1(grid: &Grid, rho: &[f64], backend: Backend, mode: JetMode) -> Jet1 {
    match mode {
        JetMode::Logarithmic => {
            let g: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
            let gp = derivative(grid, &g, 0, 1, backend);
            let gpp = derivative(grid, &g, 0, 2, backend);
            let rp = rho.iter().zip(&gp).map(|(r, d)| r * d).collect();
            let rpp = (0..rho.len()).map(|n| rho[n] * (gpp[n] + gp[n] * gp[n])).collect();
            Jet1 { rp, rpp, gp }
        }
        JetMode::Direct => {
            let rp = derivative(grid, rho, 0, 1, backend);
            let rpp = derivative(grid, rho, 0, 2, backend);
            let gp = rho.iter().zip(&rp).map(|(r, d)| d / r).collect();
            Jet1 { rp, rpp, gp }
        }
    }
}

impl<'a> Kernel<'a> {
    pub fn new(
        grid: Grid,
        system: &'a FluidSystem,
        backend: Backend,
        branch: Branch,
        jet: JetMode,
    ) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::Unsupported(
                "time integration is one-dimensional; two-dimensional fields are static only".into(),
            ));
        }
        let dv_ext = system.potential.gradient(&grid, backend)?.comp(0).to_vec();
        Ok(Kernel {
            grid,
            system,
            backend,
            branch,
            jet,
            dv_ext,
            active: vec![true; grid.len()],
        })
    }

    /// Recomputes the active set; the spectral backend admits no vacuum.
    pub fn set_active(&mut self, rho: &[f64]) -> Result<()> {
        self.active = active_mask(rho);
        if self.backend == Backend::Spectral {
            if let Some(index) = self.active.iter().position(|a| !a) {
                return Err(Error::DensityFloor {
                    index,
                    value: rho[index],
                    floor: super::vacuum::floor(rho),
                });
            }
        }
        Ok(())
    }

    fn d(&self, f: &[f64]) -> Vec<f64> {
        derivative(&self.grid, f, 0, 1, self.backend)
    }

    /// `(∂t ρ, ∂t v)` at the given (stage) values. Inactive cells get zero rates.
    pub fn rates(&self, rho: &[f64], v: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = rho.len();
        let mut rho = rho.to_vec();
        let mut v = v.to_vec();
        fill_ghosts(&mut rho, &mut v, &self.active)?;
        for (i, (&r, &u)) in rho.iter().zip(&v).enumerate() {
            if self.active[i] && !(r > 0.0 && r.is_finite() && u.is_finite()) {
                return Err(Error::Integration {
                    t,
                    reason: format!("invalid state at cell {i}: rho = {r:e}, v = {u:e}"),
                });
            }
        }
        let model = &self.system.model;
        let closure = &self.system.closure;
        let j = jet1(&self.grid, &rho, self.backend, self.jet);
        let flux: Vec<f64> = rho.iter().zip(&v).map(|(r, u)| r * u).collect();
        let dflux = self.d(&flux);
        let vp = self.d(&v);

        // reversible force per unit mass
        let mut accel = match self.branch {
            Branch::Potential => {
                let u: Vec<f64> = (0..n)
                    .map(|i| model.potential_closed_point(rho[i], j.rp[i] * j.rp[i], j.rpp[i]))
                    .collect();
                self.d(&u).into_iter().map(|x| -x).collect::<Vec<f64>>()
            }
            Branch::Pressure => {
                let a: Vec<f64> = (0..n)
                    .map(|i| {
                        let p = model.pressure_closed_point(1, rho[i], [j.rp[i], 0.0], [j.rpp[i], 0.0, 0.0]);
                        p[0] / rho[i]
                    })
                    .collect();
                let da = self.d(&a);
                (0..n).map(|i| -(da[i] + a[i] * j.gp[i])).collect()
            }
        };
        if !closure.is_inviscid() {
            // (1/ρ)∂ₓP_visc with P_visc = −2η_eff v′
            let eta = closure.eta();
            match closure.kind() {
                ViscosityKind::Dynamic => {
                    let pv: Vec<f64> = vp.iter().map(|d| -2.0 * eta * d).collect();
                    let dpv = self.d(&pv);
                    for i in 0..n {
                        accel[i] -= dpv[i] / rho[i];
                    }
                }
                ViscosityKind::Kinematic => {
                    // P_visc/ρ = −2η v′, weighted form as for the reversible pressure
                    let b: Vec<f64> = vp.iter().map(|d| -2.0 * eta * d).collect();
                    let db = self.d(&b);
                    for i in 0..n {
                        accel[i] -= db[i] + b[i] * j.gp[i];
                    }
                }
            }
        }
        let mut drho = vec![0.0; n];
        let mut dv = vec![0.0; n];
        for i in 0..n {
            if self.active[i] {
                drho[i] = -dflux[i];
                dv[i] = -v[i] * vp[i] + accel[i] - self.dv_ext[i];
            }
        }
        if let Some(i) = (0..n).find(|&i| !(drho[i].is_finite() && dv[i].is_finite())) {
            return Err(Error::Integration {
                t,
                reason: format!("non-finite rate at cell {i}"),
            });
        }
        Ok((drho, dv))
    }
}

/// Time derivatives `(∂t ρ, ∂t v)` of a one-dimensional state.
pub fn rhs(
    state: &FluidState,
    system: &FluidSystem,
    backend: Backend,
    branch: Branch,
    jet: JetMode,
) -> Result<(ScalarField, VectorField)> {
    let mut k = Kernel::new(*state.grid(), system, backend, branch, jet)?;
    let rho = state.rho.values();
    k.set_active(rho)?;
    let (dr, dv) = k.rates(rho, state.v.comp(0), state.t)?;
    let grid = *state.grid();
    Ok((ScalarField::new(grid, dr)?, VectorField::new(grid, vec![dv])?))
}
