//! Verification suites behind the `verify` command.

use super::config::{Suite, VerifySpec};
use crate::dynamics::{simulate, FluidState, FluidSystem, Integrator, Scheme, ViscousClosure};
use crate::error::{Error, Result};
use crate::fields::{self, Backend, Grid, LogSmoothDensity, ScalarField, VectorField};
use crate::models::{
    mass_scale_defect, potentializability_residual, quantum_potential, reversible_pressure, separability_defect,
    EntropyModel, JetMode, ModelKind, Route,
};
use crate::parallel::Execution;
use crate::potential::ExternalPotential;
use crate::quantum::{SplitStep, WaveState};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Pass condition of one check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    /// `|value − target| ≤ tol`
    Near { target: f64, tol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub case: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    fn new(suite: Suite, case: String, value: f64, bound: Bound) -> Self {
        let pass = match bound {
            Bound::AtMost(t) => value <= t,
            Bound::AtLeast(t) => value >= t,
            Bound::Near { target, tol } => (value - target).abs() <= tol,
        };
        Check {
            suite,
            case,
            value,
            bound,
            pass,
        }
    }

    /// `(relation, target, tolerance)` columns for the report. One-sided
    /// bounds put their threshold in one column and zero in the other.
    pub fn target_tol(&self) -> (&'static str, f64, f64) {
        match self.bound {
            Bound::AtMost(t) => ("<=", 0.0, t),
            Bound::AtLeast(t) => (">=", t, 0.0),
            Bound::Near { target, tol } => ("~", target, tol),
        }
    }
}

fn model(kind: ModelKind, nu: f64) -> Result<EntropyModel> {
    match kind {
        ModelKind::FisherShannon => EntropyModel::fisher_shannon(nu, 0.0, 0.0),
        ModelKind::Euler => Err(Error::param("verify.models", "euler has no gradient term to check")),
        k => EntropyModel::new(k, nu, 0.0, 0.0, Default::default()),
    }
}

fn models(spec: &VerifySpec, default: &[ModelKind]) -> Result<Vec<EntropyModel>> {
    let kinds = if spec.models.is_empty() { default } else { &spec.models[..] };
    kinds.iter().map(|&k| model(k, spec.nu)).collect()
}

fn validate(spec: &VerifySpec) -> Result<()> {
    if spec.seeds == 0 {
        return Err(Error::param("verify.seeds", "must be at least 1"));
    }
    if !(spec.nu.is_finite() && spec.nu > 0.0) {
        return Err(Error::param("verify.nu", format!("must be positive, got {}", spec.nu)));
    }
    if !(spec.length.is_finite() && spec.length > 0.0) {
        return Err(Error::param("verify.length", "must be positive"));
    }
    Ok(())
}

/// The seeded field set shared by the potentializability and closed-form suites.
fn field_set(spec: &VerifySpec) -> Result<Vec<(String, ScalarField)>> {
    let g1 = Grid::new_1d(spec.length, spec.points_1d)?;
    let g2 = Grid::new_2d([spec.length; 2], [spec.points_2d; 2])?;
    let mut out = Vec::new();
    for (label, g) in [("1d", g1), ("2d", g2)] {
        for seed in 1..=spec.seeds {
            out.push((format!("{label}/seed={seed}"), LogSmoothDensity::new(seed).sample(&g)));
        }
    }
    Ok(out)
}

fn rel_diff(a: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        a / scale
    } else {
        a
    }
}

fn potentializability(spec: &VerifySpec, exec: Execution) -> Result<Vec<Check>> {
    let ms = models(
        spec,
        &[
            ModelKind::SchrodingerMadelung,
            ModelKind::Landau,
            ModelKind::Alternative,
            ModelKind::FisherShannon,
        ],
    )?;
    let fields = field_set(spec)?;
    let cases: Vec<(EntropyModel, usize)> = ms.iter().flat_map(|m| (0..fields.len()).map(move |i| (*m, i))).collect();
    exec.map(&cases, |(m, i)| {
        let (label, rho) = &fields[*i];
        let r = potentializability_residual(m, rho, Backend::Spectral)?;
        Ok(Check::new(
            Suite::Potentializability,
            format!("{}/{label}", m.kind().name()),
            r.relative(),
            Bound::AtMost(1e-6),
        ))
    })
    .into_iter()
    .collect()
}

fn closed_forms(spec: &VerifySpec, exec: Execution) -> Result<Vec<Check>> {
    let ms = models(
        spec,
        &[ModelKind::SchrodingerMadelung, ModelKind::Landau, ModelKind::Alternative],
    )?;
    let fields = field_set(spec)?;
    let cases: Vec<(EntropyModel, usize)> = ms.iter().flat_map(|m| (0..fields.len()).map(move |i| (*m, i))).collect();
    let per_case: Vec<Result<Vec<Check>>> = exec.map(&cases, |(m, i)| {
        let (label, rho) = &fields[*i];
        let pg = reversible_pressure(m, rho, Backend::Spectral, Route::Generic)?;
        let pc = reversible_pressure(m, rho, Backend::Spectral, Route::Closed)?;
        let ug = quantum_potential(m, rho, Backend::Spectral, Route::Generic)?;
        let uc = quantum_potential(m, rho, Backend::Spectral, Route::Closed)?;
        let name = m.kind().name();
        Ok(vec![
            Check::new(
                Suite::ClosedForms,
                format!("{name}/pressure/{label}"),
                rel_diff(pg.max_abs_diff(&pc)?, pc.max_abs()),
                Bound::AtMost(1e-8),
            ),
            Check::new(
                Suite::ClosedForms,
                format!("{name}/potential/{label}"),
                rel_diff(ug.max_abs_diff(&uc)?, uc.max_abs()),
                Bound::AtMost(1e-8),
            ),
        ])
    });
    let mut out = Vec::new();
    for c in per_case {
        out.extend(c?);
    }
    Ok(out)
}

/// The pair on which the Landau and Alternative entropies are not additive.
pub fn non_additive_pair() -> Result<(ScalarField, ScalarField)> {
    let g = Grid::new_1d(2.0 * PI, 64)?;
    let a = ScalarField::from_fn(g, |p| 1.0 + 0.5 * p[0].sin())?;
    let b = ScalarField::from_fn(g, |p| 1.0 + 0.5 * p[0].cos())?;
    Ok((a, b))
}

fn uniqueness(spec: &VerifySpec) -> Result<Vec<Check>> {
    let u = Suite::Uniqueness;
    let g = Grid::new_1d(spec.length, 64)?;
    let nu = spec.nu;
    let schm = EntropyModel::schrodinger_madelung(nu)?;
    let fs = EntropyModel::fisher_shannon(nu, 1.0, 0.0)?;
    let mut out = Vec::new();
    for pair in 0..5u64 {
        let a = LogSmoothDensity::new(100 + 2 * pair).sample(&g);
        let b = LogSmoothDensity::new(101 + 2 * pair).sample(&g);
        for m in [&schm, &fs] {
            out.push(Check::new(
                u,
                format!("additivity/{}/pair={pair}", m.kind().name()),
                separability_defect(m, &a, &b, Backend::Spectral)?,
                Bound::AtMost(1e-12),
            ));
        }
    }
    let (a, b) = non_additive_pair()?;
    for m in [EntropyModel::landau(nu)?, EntropyModel::alternative(nu)?] {
        out.push(Check::new(
            u,
            format!("non-additivity/{}", m.kind().name()),
            separability_defect(&m, &a, &b, Backend::Spectral)?,
            Bound::AtLeast(1e-3),
        ));
    }
    let rho = LogSmoothDensity::new(7).sample(&g);
    for lambda in [0.1, 7.3] {
        out.push(Check::new(
            u,
            format!("mass-scale/{}/lambda={lambda}", schm.kind().name()),
            mass_scale_defect(&schm, &rho, lambda, Backend::Spectral)?,
            Bound::AtMost(1e-12),
        ));
        let f: f64 = lambda;
        out.push(Check::new(
            u,
            format!("mass-scale/{}/lambda={lambda}", fs.kind().name()),
            mass_scale_defect(&fs, &rho, lambda, Backend::Spectral)?,
            Bound::Near {
                target: f.ln().abs(),
                tol: 1e-10,
            },
        ));
    }
    Ok(out)
}

/// `log₂(e_coarse / e_fine)` for consecutive halvings.
fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Max error of the first derivative of `exp(sin x)` on `N = 32, 64`.
fn derivative_errors(backend: Backend) -> Result<Vec<f64>> {
    [32usize, 64, 128]
        .iter()
        .map(|&n| {
            let g = Grid::new_1d(2.0 * PI, n)?;
            let f = ScalarField::from_fn(g, |p| p[0].sin().exp())?;
            let exact = ScalarField::from_fn(g, |p| p[0].cos() * p[0].sin().exp())?;
            fields::partial(&f, 0, backend)?.max_abs_diff(&exact)
        })
        .collect()
}

/// Self-convergence of the fluid integrator on a smooth periodic flow.
fn rk_errors(scheme: Scheme) -> Result<Vec<f64>> {
    let g = Grid::new_1d(2.0 * PI, 16)?;
    let rho = ScalarField::from_fn(g, |p| (0.5 * p[0].sin() + 0.3 * (2.0 * p[0]).cos()).exp())?;
    let v = VectorField::from_component(ScalarField::from_fn(g, |p| 0.3 * p[0].sin())?)?;
    let st = FluidState::new(rho, v, 0.0)?;
    let sys = FluidSystem::new(
        EntropyModel::schrodinger_madelung(1.0)?,
        ViscousClosure::inviscid(),
        ExternalPotential::None,
    );
    let run = |scheme, dt| -> Result<ScalarField> {
        let it = Integrator {
            scheme,
            dt,
            t_end: 0.5,
            sample_stride: usize::MAX,
            backend: Backend::Spectral,
            jet: JetMode::Direct,
            override_stability: true,
            ..Integrator::default()
        };
        let tr = simulate(&st, &sys, &it)?;
        match tr.failure {
            Some(e) => Err(e),
            None => Ok(tr.final_state.rho),
        }
    };
    let reference = run(Scheme::Rk4, 1e-5)?;
    [0.01, 0.005, 0.0025]
        .iter()
        .map(|&dt| run(scheme, dt)?.max_abs_diff(&reference))
        .collect()
}

/// Strang splitting on a displaced Gaussian in a harmonic trap.
fn split_step_errors() -> Result<Vec<f64>> {
    let g = Grid::new_1d(20.0, 128)?;
    let v = ExternalPotential::harmonic(1.0)?.values(&g)?;
    let w0 = WaveState::from_fn(g, 1.0, |x| {
        Complex64::new((-(x - 1.0).powi(2) / 2.0).exp() / PI.powf(0.25), 0.0) * Complex64::from_polar(1.0, 0.5 * x)
    })?;
    let run = |dt: f64| -> Result<Vec<Complex64>> {
        let n = (1.0 / dt).round() as usize;
        let mut w = w0.clone();
        SplitStep::new(g, 1.0, &v, 1.0 / n as f64)?.advance(&mut w, n)?;
        Ok(w.psi().to_vec())
    };
    let reference = run(1e-4)?;
    [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| {
            let psi = run(dt)?;
            Ok(psi.iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
        })
        .collect()
}

fn order_checks(case: &str, errors: Result<Vec<f64>>, want: f64, tol: f64) -> Result<Vec<Check>> {
    Ok(orders(&errors?)
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            Check::new(
                Suite::Orders,
                format!("{case}/refinement={}", i + 1),
                p,
                Bound::Near { target: want, tol },
            )
        })
        .collect())
}

fn order_suite(exec: Execution) -> Result<Vec<Check>> {
    let parts: Vec<Result<Vec<Check>>> = exec.map_range(5, |i| match i {
        0 => order_checks("fd2-derivative", derivative_errors(Backend::Fd2), 2.0, 0.1),
        1 => order_checks("fd4-derivative", derivative_errors(Backend::Fd4), 4.0, 0.2),
        2 => order_checks("rk4", rk_errors(Scheme::Rk4), 4.0, 0.3),
        3 => order_checks("rk2", rk_errors(Scheme::Rk2), 2.0, 0.2),
        _ => order_checks("split-step", split_step_errors(), 2.0, 0.2),
    });
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Runs one suite; the case order is fixed regardless of `exec`.
pub fn run_suite(spec: &VerifySpec, exec: Execution) -> Result<Vec<Check>> {
    validate(spec)?;
    match spec.suite {
        Suite::Potentializability => potentializability(spec, exec),
        Suite::ClosedForms => closed_forms(spec, exec),
        Suite::Uniqueness => uniqueness(spec),
        Suite::Orders => order_suite(exec),
    }
}
