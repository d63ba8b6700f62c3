use super::kernel::jet1;
use super::vacuum::{active_mask, fill_ghosts};
use super::{FluidState, FluidSystem, ViscousClosure};
use crate::error::Result;
use crate::fields::ops::derivative;
use crate::fields::{self, Backend, ScalarField, SymTensorField};
use crate::models::JetMode;
use serde::Serialize;

/// Integral invariants of one sampled state. Entropy-type integrals, `min ρ`
/// and `max |v|` run over active (above-floor) cells; mass and momentum over
/// the whole grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    /// `∫ρ(s − v²/2)`
    pub entropy: f64,
    /// `∫ρ(s − v²/2 − V)`, conserved in the reversible limit.
    pub q: f64,
    /// `∫σ_s`
    pub production: f64,
    pub min_rho: f64,
    pub max_v: f64,
    pub active_cells: usize,
}

impl DiagnosticsRecord {
    pub const HEADER: [&'static str; 9] = [
        "t",
        "mass",
        "momentum",
        "entropy",
        "q",
        "production",
        "min_rho",
        "max_v",
        "active_cells",
    ];

    pub fn reals(&self) -> [f64; 8] {
        [
            self.t,
            self.mass,
            self.momentum,
            self.entropy,
            self.q,
            self.production,
            self.min_rho,
            self.max_v,
        ]
    }
}

/// `P_visc = −η_eff (∇v + ∇vᵀ)`.
pub fn viscous_pressure(state: &FluidState, closure: &ViscousClosure, backend: Backend) -> Result<SymTensorField> {
    let grid = *state.grid();
    let d = grid.dim();
    let dv = fields::velocity_gradient(&state.v, backend)?;
    let r = state.rho.values();
    let mut comps = vec![vec![0.0; grid.len()]; grid.sym_components()];
    for i in 0..d {
        for j in i..d {
            let c = &mut comps[crate::fields::sym_index(d, i, j)];
            for (n, o) in c.iter_mut().enumerate() {
                *o = -closure.coefficient(r[n]) * (dv[i].comp(j)[n] + dv[j].comp(i)[n]);
            }
        }
    }
    SymTensorField::new(grid, comps)
}

/// Entropy production density `σ_s = −∇v : P_visc` and its integral.
pub fn entropy_production(
    state: &FluidState,
    closure: &ViscousClosure,
    backend: Backend,
) -> Result<(ScalarField, f64)> {
    let grid = *state.grid();
    if closure.is_inviscid() {
        return Ok((ScalarField::zeros(grid), 0.0));
    }
    let d = grid.dim();
    let dv = fields::velocity_gradient(&state.v, backend)?;
    let pv = viscous_pressure(state, closure, backend)?;
    let sigma: Vec<f64> = (0..grid.len())
        .map(|n| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s -= dv[i].comp(j)[n] * pv.get(i, j)[n];
                }
            }
            s
        })
        .collect();
    let f = ScalarField::new(grid, sigma)?;
    let total = f.integral();
    Ok((f, total))
}

/// Diagnostics of a one-dimensional state.
pub fn diagnostics(state: &FluidState, system: &FluidSystem, backend: Backend, jet: JetMode) -> Result<DiagnosticsRecord> {
    let grid = *state.grid();
    let h = grid.cell_volume();
    let mut rho = state.rho.values().to_vec();
    let mut v = state.v.comp(0).to_vec();
    let active = active_mask(&rho);
    fill_ghosts(&mut rho, &mut v, &active)?;
    let j = jet1(&grid, &rho, backend, jet);
    let vp = derivative(&grid, &v, 0, 1, backend);
    let ext = system.potential.values(&grid)?;
    let model = &system.model;
    let closure = &system.closure;
    let (mut mass, mut momentum) = (0.0, 0.0);
    for n in 0..grid.len() {
        mass += state.rho.values()[n];
        momentum += state.rho.values()[n] * state.v.comp(0)[n];
    }
    let (mut entropy, mut q, mut production) = (0.0, 0.0, 0.0);
    let (mut min_rho, mut max_v, mut count) = (f64::INFINITY, 0.0f64, 0);
    for n in (0..grid.len()).filter(|&n| active[n]) {
        let r = rho[n];
        let s = model.point(r, j.rp[n] * j.rp[n]).s;
        let kinetic = 0.5 * v[n] * v[n];
        entropy += r * (s - kinetic);
        q += r * (s - kinetic - ext.values()[n]);
        production += 2.0 * closure.coefficient(r) * vp[n] * vp[n];
        min_rho = min_rho.min(r);
        max_v = max_v.max(v[n].abs());
        count += 1;
    }
    Ok(DiagnosticsRecord {
        t: state.t,
        mass: mass * h,
        momentum: momentum * h,
        entropy: entropy * h,
        q: q * h,
        production: production * h,
        min_rho,
        max_v,
        active_cells: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ViscosityKind;
    use crate::fields::{Grid, VectorField};
    use std::f64::consts::PI;

    fn sine_state(rho: f64) -> FluidState {
        let g = Grid::new_1d(2.0 * PI, 64).unwrap();
        let v = VectorField::from_component(ScalarField::from_fn(g, |p| p[0].sin()).unwrap()).unwrap();
        FluidState::new(ScalarField::constant(g, rho), v, 0.0).unwrap()
    }

    #[test]
    fn inviscid_production_vanishes() {
        let (s, total) = entropy_production(&sine_state(1.0), &ViscousClosure::inviscid(), Backend::Spectral).unwrap();
        assert_eq!(s.max_abs(), 0.0);
        assert_eq!(total, 0.0);
    }

    #[test]
    fn shear_production_of_sine_flow() {
        let c = ViscousClosure::new(0.1, ViscosityKind::Dynamic).unwrap();
        let st = sine_state(2.7);
        let (s, total) = entropy_production(&st, &c, Backend::Spectral).unwrap();
        let want = ScalarField::from_fn(*st.grid(), |p| 0.2 * p[0].cos().powi(2)).unwrap();
        assert!(s.max_abs_diff(&want).unwrap() < 1e-13);
        assert!((total - 0.1 * 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn production_is_non_negative_in_2d() {
        let g = Grid::new_2d([5.0, 5.0], [32, 32]).unwrap();
        let rho = crate::fields::LogSmoothDensity::new(1).sample(&g);
        let vx = crate::fields::LogSmoothDensity::new(2).log_density(&g);
        let vy = crate::fields::LogSmoothDensity::new(3).log_density(&g);
        let v = VectorField::new(g, vec![vx.into_values(), vy.into_values()]).unwrap();
        let st = FluidState::new(rho, v, 0.0).unwrap();
        for kind in [ViscosityKind::Dynamic, ViscosityKind::Kinematic] {
            let c = ViscousClosure::new(0.3, kind).unwrap();
            let (s, total) = entropy_production(&st, &c, Backend::Spectral).unwrap();
            assert!(s.min() >= -1e-12);
            assert!(total > 0.0);
        }
    }
}
