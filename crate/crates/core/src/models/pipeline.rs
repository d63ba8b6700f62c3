use super::{check_density, DensityJet, EntropyModel, JetMode};
use crate::error::Result;
use crate::fields::{self, Backend, ScalarField, SymTensorField, VectorField};
use serde::{Deserialize, Serialize};

/// Which evaluation of a constitutive quantity to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// The general formulas driven by `∂₁s` and `∂₂s`, with spatial
    /// derivatives of `∂₂s` taken numerically.
    #[default]
    Generic,
    /// The model's own closed form in terms of `ρ`, `∇ρ`, `∇∇ρ`.
    Closed,
}

/// Everything the generic pipeline produces for one density.
#[derive(Debug, Clone)]
pub struct ConstitutiveBundle {
    pub model: EntropyModel,
    pub backend: Backend,
    pub s: ScalarField,
    pub d1s: ScalarField,
    pub d2s: VectorField,
    pub p_rev: SymTensorField,
    pub u: ScalarField,
}

struct Pointwise {
    s: Vec<f64>,
    d1s: Vec<f64>,
    d2s: VectorField,
}

fn pointwise(model: &EntropyModel, jet: &DensityJet) -> Pointwise {
    let grid = *jet.rho.grid();
    let g2 = jet.grad_sq();
    let pts: Vec<_> = jet
        .rho
        .values()
        .iter()
        .zip(g2.values())
        .map(|(&r, &q)| model.point(r, q))
        .collect();
    let d2s = (0..grid.dim())
        .map(|a| jet.grad.comp(a).iter().zip(&pts).map(|(g, p)| p.phi * g).collect())
        .collect();
    Pointwise {
        s: pts.iter().map(|p| p.s).collect(),
        d1s: pts.iter().map(|p| p.d1s).collect(),
        d2s: VectorField::from_raw(grid, d2s),
    }
}

/// Runs the full generic pipeline: `s`, `∂₁s`, `∂₂s`,
/// `P_rev = (ρ²/2)[(∇·∂₂s − 2∂₁s) I + ∇∂₂s]` and
/// `U = ∇·(ρ∂₂s) − ∂_ρ(ρs)`.
///
/// `∇∂₂s` is symmetric in the continuum for every catalogue model (`φ`
/// depends on `ρ` only); its discrete symmetric part is stored.
pub fn evaluate(model: &EntropyModel, rho: &ScalarField, backend: Backend) -> Result<ConstitutiveBundle> {
    check_density(rho)?;
    let grid = *rho.grid();
    let d = grid.dim();
    let jet = DensityJet::compute(rho, backend, JetMode::Direct)?;
    let pw = pointwise(model, &jet);
    let div_d2s = fields::div(&pw.d2s, backend)?;
    let grad_d2s = fields::velocity_gradient(&pw.d2s, backend)?;
    let r = rho.values();
    let mut p = SymTensorField::zeros(grid);
    for i in 0..d {
        for j in i..d {
            let (a, b) = (grad_d2s[i].comp(j), grad_d2s[j].comp(i));
            let iso = i == j;
            for (n, o) in p.get_mut(i, j).iter_mut().enumerate() {
                let mut t = 0.5 * (a[n] + b[n]);
                if iso {
                    t += div_d2s.values()[n] - 2.0 * pw.d1s[n];
                }
                *o = 0.5 * r[n] * r[n] * t;
            }
        }
    }
    let flux = pw.d2s.scale_by(rho)?;
    let div_flux = fields::div(&flux, backend)?;
    let u: Vec<f64> = (0..grid.len())
        .map(|n| div_flux.values()[n] - pw.s[n] - r[n] * pw.d1s[n])
        .collect();
    Ok(ConstitutiveBundle {
        model: *model,
        backend,
        s: ScalarField::new(grid, pw.s)?,
        d1s: ScalarField::new(grid, pw.d1s)?,
        d2s: pw.d2s,
        p_rev: SymTensorField::new(grid, p.components().to_vec())?,
        u: ScalarField::new(grid, u)?,
    })
}

/// Pointwise `s(ρ, ∇ρ)`.
pub fn entropy_density(model: &EntropyModel, rho: &ScalarField, backend: Backend) -> Result<ScalarField> {
    check_density(rho)?;
    let grad = fields::grad(rho, backend)?;
    let g2 = grad.norm_sq();
    let s = rho
        .values()
        .iter()
        .zip(g2.values())
        .map(|(&r, &q)| model.point(r, q).s)
        .collect();
    ScalarField::new(*rho.grid(), s)
}

/// Closed-form pressure from a precomputed jet.
pub fn pressure_from_jet(model: &EntropyModel, jet: &DensityJet) -> Result<SymTensorField> {
    let grid = *jet.rho.grid();
    let d = grid.dim();
    let ncomp = grid.sym_components();
    let mut comps = vec![vec![0.0; grid.len()]; ncomp];
    for (n, &r) in jet.rho.values().iter().enumerate() {
        let p = model.pressure_closed_point(d, r, jet.grad_at(n), jet.hess_at(n));
        for (c, comp) in comps.iter_mut().enumerate() {
            comp[n] = p[c];
        }
    }
    SymTensorField::new(grid, comps)
}

/// Closed-form potential from a precomputed jet.
pub fn potential_from_jet(model: &EntropyModel, jet: &DensityJet) -> Result<ScalarField> {
    let g2 = jet.grad_sq();
    let lap = jet.laplacian();
    let u = (0..jet.rho.grid().len())
        .map(|n| model.potential_closed_point(jet.rho.values()[n], g2.values()[n], lap.values()[n]))
        .collect();
    ScalarField::new(*jet.rho.grid(), u)
}

pub fn reversible_pressure(
    model: &EntropyModel,
    rho: &ScalarField,
    backend: Backend,
    route: Route,
) -> Result<SymTensorField> {
    match route {
        Route::Generic => Ok(evaluate(model, rho, backend)?.p_rev),
        Route::Closed => {
            check_density(rho)?;
            pressure_from_jet(model, &DensityJet::compute(rho, backend, JetMode::Direct)?)
        }
    }
}

pub fn quantum_potential(
    model: &EntropyModel,
    rho: &ScalarField,
    backend: Backend,
    route: Route,
) -> Result<ScalarField> {
    match route {
        Route::Generic => Ok(evaluate(model, rho, backend)?.u),
        Route::Closed => {
            check_density(rho)?;
            potential_from_jet(model, &DensityJet::compute(rho, backend, JetMode::Direct)?)
        }
    }
}

/// `j_s = −v·P + (ρ²/2)(∂₂s (∇·v) + ∂₂s·∇v)`, with the arbitrary extra
/// current set to zero. `p_total` is the full pressure (reversible plus any
/// viscous part). The closed route uses the model's coefficient of
/// `∇ρ(∇·v) + ∇ρ·∇v` instead of `ρ²φ/2`.
pub fn entropy_current(
    model: &EntropyModel,
    rho: &ScalarField,
    v: &VectorField,
    p_total: &SymTensorField,
    backend: Backend,
    route: Route,
) -> Result<VectorField> {
    check_density(rho)?;
    let grid = *rho.grid();
    grid.ensure_same(v.grid())?;
    grid.ensure_same(p_total.grid())?;
    let d = grid.dim();
    let grad_rho = fields::grad(rho, backend)?;
    let g2 = grad_rho.norm_sq();
    let dv = fields::velocity_gradient(v, backend)?;
    let r = rho.values();
    let coef: Vec<f64> = (0..grid.len())
        .map(|n| match route {
            Route::Generic => 0.5 * r[n] * r[n] * model.point(r[n], g2.values()[n]).phi,
            Route::Closed => model.current_coefficient_closed(r[n]),
        })
        .collect();
    let mut comps = vec![vec![0.0; grid.len()]; d];
    for (j, out) in comps.iter_mut().enumerate() {
        for (n, o) in out.iter_mut().enumerate() {
            let mut work = 0.0;
            let mut divv = 0.0;
            let mut transport = 0.0;
            for i in 0..d {
                work += v.comp(i)[n] * p_total.get(i, j)[n];
                divv += dv[i].comp(i)[n];
                transport += grad_rho.comp(i)[n] * dv[i].comp(j)[n];
            }
            *o = -work + coef[n] * (grad_rho.comp(j)[n] * divv + transport);
        }
    }
    VectorField::new(grid, comps)
}
