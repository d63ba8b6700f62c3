use super::{check_density, entropy_density, evaluate, EntropyModel};
use crate::error::{Error, Result};
use crate::fields::{self, Backend, Grid, ScalarField, VectorField};

/// Outcome of the `∇·P_rev = ρ∇U` check.
#[derive(Debug, Clone)]
pub struct PotentializabilityReport {
    /// `∇·P_rev − ρ∇U`.
    pub residual: VectorField,
    /// `max |r|` (pointwise Euclidean norm).
    pub max_norm: f64,
    /// `max |ρ∇U|`.
    pub reference: f64,
}

impl PotentializabilityReport {
    /// `max|r| / max|ρ∇U|`; reported as the absolute residual when the
    /// reference itself is below `1e-12`.
    pub fn relative(&self) -> f64 {
        if self.reference < 1e-12 {
            self.max_norm
        } else {
            self.max_norm / self.reference
        }
    }
}

/// Evaluates both sides of the potential condition with the generic formulas.
pub fn potentializability_residual(
    model: &EntropyModel,
    rho: &ScalarField,
    backend: Backend,
) -> Result<PotentializabilityReport> {
    let b = evaluate(model, rho, backend)?;
    let lhs = fields::div_tensor(&b.p_rev, backend)?;
    let rhs = fields::grad(&b.u, backend)?.scale_by(rho)?;
    let residual = lhs.lin_comb(1.0, &rhs, -1.0)?;
    Ok(PotentializabilityReport {
        max_norm: residual.max_norm(),
        reference: rhs.max_norm(),
        residual,
    })
}

/// Additivity defect of the entropy on a product density
/// `ρ(x₁, x₂) = ρ₁(x₁) ρ₂(x₂)`:
/// `max |s(ρ, ∇ρ) − s(ρ₁, ∇ρ₁) − s(ρ₂, ∇ρ₂)|` over the tensor grid, with
/// `|∇ρ|² = (ρ₂∇ρ₁)² + (ρ₁∇ρ₂)²` built from the one-dimensional gradients.
pub fn separability_defect(
    model: &EntropyModel,
    rho1: &ScalarField,
    rho2: &ScalarField,
    backend: Backend,
) -> Result<f64> {
    for (name, r) in [("rho1", rho1), ("rho2", rho2)] {
        if r.grid().dim() != 1 {
            return Err(Error::param(name, "separability factors must be one-dimensional"));
        }
        if let Some(i) = r.values().iter().position(|&x| !(x > 0.0)) {
            return Err(Error::DensityFloor {
                index: i,
                value: r.values()[i],
                floor: 0.0,
            });
        }
    }
    check_density(rho1)?;
    check_density(rho2)?;
    let d1 = fields::partial(rho1, 0, backend)?;
    let d2 = fields::partial(rho2, 0, backend)?;
    let s1 = entropy_density(model, rho1, backend)?;
    let s2 = entropy_density(model, rho2, backend)?;
    // the product grid only serves to enumerate the point pairs
    let _grid = Grid::new_2d(
        [rho1.grid().length(0), rho2.grid().length(0)],
        [rho1.grid().points(0), rho2.grid().points(0)],
    )?;
    let mut defect = 0.0f64;
    for (i, (&a, &da)) in rho1.values().iter().zip(d1.values()).enumerate() {
        for (j, (&b, &db)) in rho2.values().iter().zip(d2.values()).enumerate() {
            let rho = a * b;
            let g2 = (b * da).powi(2) + (a * db).powi(2);
            let s = model.point(rho, g2).s;
            defect = defect.max((s - s1.values()[i] - s2.values()[j]).abs());
        }
    }
    Ok(defect)
}

/// `max |s(λρ, ∇(λρ)) − s(ρ, ∇ρ)|`.
pub fn mass_scale_defect(
    model: &EntropyModel,
    rho: &ScalarField,
    lambda: f64,
    backend: Backend,
) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", format!("must be positive and finite, got {lambda}")));
    }
    let a = entropy_density(model, rho, backend)?;
    let b = entropy_density(model, &rho.scale(lambda), backend)?;
    b.max_abs_diff(&a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::LogSmoothDensity;
    use crate::models::{LocalPart, ModelKind};
    use std::f64::consts::{E, PI};

    #[test]
    fn uniform_density_is_exactly_potentializable() {
        let g = Grid::new_2d([4.0, 4.0], [16, 16]).unwrap();
        let rho = ScalarField::constant(g, 1.3);
        for kind in ModelKind::ALL {
            let local = if kind == ModelKind::Euler {
                LocalPart::Isothermal { c2: 1.0 }
            } else {
                LocalPart::None
            };
            let nu = if kind == ModelKind::Euler { 0.0 } else { 1.0 };
            let m = EntropyModel::new(kind, nu, 0.0, 0.0, local).unwrap();
            let r = potentializability_residual(&m, &rho, Backend::Spectral).unwrap();
            assert_eq!(r.max_norm, 0.0, "{kind:?}");
        }
    }

    #[test]
    fn schm_gaussian_potentializable() {
        // ∂₂s grows like x/ρ in the tails, which a global spectral derivative
        // smears over the whole box; local fd4 stencils keep it in the tails
        let g = Grid::new_1d(14.0, 2048).unwrap();
        let rho = ScalarField::from_fn(g, |p| (-p[0] * p[0] / 2.0).exp()).unwrap();
        let m = EntropyModel::schrodinger_madelung(1.0).unwrap();
        let r = potentializability_residual(&m, &rho, Backend::Fd4).unwrap();
        let res = r.residual.comp(0);
        let core = (0..g.len())
            .filter(|&n| g.point(n)[0].abs() <= 5.0)
            .fold(0.0f64, |m, n| m.max(res[n].abs()));
        assert!(core <= 1e-8, "{core}");
        // both sides equal -(x/4) exp(-x²/2)
        let want = ScalarField::from_fn(g, |p| -p[0] / 4.0 * (-p[0] * p[0] / 2.0).exp()).unwrap();
        assert!((r.reference - want.max_abs()).abs() < 1e-8);
    }

    #[test]
    fn additivity_examples() {
        let g = Grid::new_1d(2.0 * PI, 64).unwrap();
        let a = LogSmoothDensity::new(11).sample(&g);
        let b = LogSmoothDensity::new(12).sample(&g);
        let schm = EntropyModel::schrodinger_madelung(2.5).unwrap();
        assert!(separability_defect(&schm, &a, &b, Backend::Spectral).unwrap() <= 1e-12);
        let fs = EntropyModel::fisher_shannon(0.0, 1.0, 0.0).unwrap();
        assert!(separability_defect(&fs, &a, &b, Backend::Spectral).unwrap() <= 1e-12);
        let sine = ScalarField::from_fn(g, |p| 1.0 + 0.1 * p[0].sin()).unwrap();
        let landau = EntropyModel::landau(1.0).unwrap();
        assert!(separability_defect(&landau, &sine, &sine, Backend::Spectral).unwrap() > 1e-3);
    }

    #[test]
    fn mass_scale_examples() {
        let g = Grid::new_1d(5.0, 64).unwrap();
        let rho = LogSmoothDensity::new(21).sample(&g);
        let schm = EntropyModel::schrodinger_madelung(1.0).unwrap();
        assert!(mass_scale_defect(&schm, &rho, 7.3, Backend::Spectral).unwrap() <= 1e-12);
        let fs = EntropyModel::fisher_shannon(1.0, 1.0, 0.0).unwrap();
        let d = mass_scale_defect(&fs, &rho, E, Backend::Spectral).unwrap();
        assert!((d - 1.0).abs() <= 1e-12, "{d}");
        for kind in ModelKind::ALL {
            let nu = if kind == ModelKind::Euler { 0.0 } else { 1.0 };
            let m = EntropyModel::new(kind, nu, 0.0, 0.0, LocalPart::None).unwrap();
            assert_eq!(mass_scale_defect(&m, &rho, 1.0, Backend::Spectral).unwrap(), 0.0);
        }
        assert!(mass_scale_defect(&schm, &rho, 0.0, Backend::Spectral).is_err());
    }

    #[test]
    fn isotropy_under_axis_permutation_and_reflection() {
        let n = 32;
        let g = Grid::new_2d([6.0, 6.0], [n, n]).unwrap();
        let rho = LogSmoothDensity::new(5).sample(&g);
        let r = rho.values();
        let transpose: Vec<f64> = (0..n * n).map(|k| r[(k % n) * n + k / n]).collect();
        let reflect: Vec<f64> = (0..n * n).map(|k| r[((n - k / n) % n) * n + k % n]).collect();
        for kind in [ModelKind::SchrodingerMadelung, ModelKind::Landau, ModelKind::Alternative] {
            let m = EntropyModel::new(kind, 1.0, 0.0, 0.0, LocalPart::None).unwrap();
            let s = entropy_density(&m, &rho, Backend::Spectral).unwrap();
            let st = entropy_density(&m, &ScalarField::new(g, transpose.clone()).unwrap(), Backend::Spectral)
                .unwrap();
            let sr = entropy_density(&m, &ScalarField::new(g, reflect.clone()).unwrap(), Backend::Spectral)
                .unwrap();
            let sv = s.values();
            for k in 0..n * n {
                assert!((st.values()[k] - sv[(k % n) * n + k / n]).abs() <= 1e-13 * s.max_abs());
                assert!((sr.values()[k] - sv[((n - k / n) % n) * n + k % n]).abs() <= 1e-13 * s.max_abs());
            }
        }
    }
}
