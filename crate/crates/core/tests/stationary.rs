use nlfluid::models::EntropyModel;
use nlfluid::potential::ExternalPotential;
use nlfluid::stationary::{excited_states_schm, ground_state, stationarity_residual, StationaryProblem};
use nlfluid::{Backend, Error, Grid, ScalarField};
use std::f64::consts::PI;

fn trap(model: EntropyModel, n: usize) -> StationaryProblem {
    let g = Grid::new_1d(20.0, n).unwrap();
    StationaryProblem::new(model, g, &ExternalPotential::harmonic(1.0).unwrap(), 1.0).unwrap()
}

/// `ρ ∝ exp(−2αx²)` with `α = ω/(2√ν)`, and `μ = ω√ν/2`.
fn oscillator_ground(grid: Grid, nu: f64) -> ScalarField {
    let alpha = 0.5 / nu.sqrt();
    ScalarField::from_fn(grid, |p| (2.0 * alpha / PI).sqrt() * (-2.0 * alpha * p[0] * p[0]).exp()).unwrap()
}

#[test]
fn uniform_state_without_potential() {
    let g = Grid::new_1d(10.0, 64).unwrap();
    for model in [
        EntropyModel::schrodinger_madelung(1.0).unwrap(),
        EntropyModel::landau(1.0).unwrap(),
        EntropyModel::alternative(1.0).unwrap(),
    ] {
        let p = StationaryProblem::new(model, g, &ExternalPotential::None, 2.0).unwrap();
        let res = ground_state(&p).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 0);
        assert!(res.rho.values().iter().all(|r| (r - 0.2).abs() < 1e-14));
        assert!(res.mu.abs() < 1e-14);
    }
}

#[test]
fn analytic_ground_state_is_stationary() {
    let p = trap(EntropyModel::schrodinger_madelung(1.0).unwrap(), 256);
    let rho = oscillator_ground(*p.grid(), 1.0);
    let res = stationarity_residual(&p.model, &rho, &p.potential, Backend::Spectral).unwrap();
    assert!(res <= 1e-8, "residual {res:e}");
    let perturbed = rho.zip_map(&ScalarField::from_fn(*p.grid(), |q| q[0].sin()).unwrap(), |r, s| r * (1.0 + 0.01 * s)).unwrap();
    let perturbed = perturbed.scale(1.0 / perturbed.integral());
    let res = stationarity_residual(&p.model, &perturbed, &p.potential, Backend::Spectral).unwrap();
    assert!(res > 1e-4, "residual {res:e}");
}

#[test]
fn harmonic_ground_states() {
    for (nu, mu) in [(1.0, 0.5), (4.0, 1.0)] {
        let p = trap(EntropyModel::schrodinger_madelung(nu).unwrap(), 256);
        let res = ground_state(&p).unwrap();
        assert!(res.converged, "nu = {nu}: residual {:e}", res.residual);
        assert!((res.mu - mu).abs() < 1e-6, "nu = {nu}: mu = {}", res.mu);
        assert!((res.rho.integral() - 1.0).abs() < 1e-10);
        let exact = oscillator_ground(*p.grid(), nu);
        assert!(res.rho.max_abs_diff(&exact).unwrap() < 1e-7);
    }
}

#[test]
fn excited_levels_of_the_oscillator() {
    let p = trap(EntropyModel::schrodinger_madelung(1.0).unwrap(), 256);
    let levels = excited_states_schm(&p, 3).unwrap();
    for (l, want) in levels.iter().zip([0.5, 1.5, 2.5]) {
        assert!(l.converged);
        assert!((l.mu - want).abs() < 1e-6, "level {}: {}", l.index, l.mu);
        assert!(!l.degenerate);
        assert!((l.rho.integral() - 1.0).abs() < 1e-10);
    }
    // node of the first excited state at the origin
    let i0 = p.grid().points(0) / 2;
    assert_eq!(p.grid().coord(0, i0), 0.0);
    assert!(levels[1].rho.values()[i0] <= 1e-10 * levels[1].rho.max());
    // agreement with the nonlinear flow
    let g = ground_state(&p).unwrap();
    assert!(g.rho.max_abs_diff(&levels[0].rho).unwrap() <= 1e-7);
}

#[test]
fn box_ground_level_is_uniform() {
    let g = Grid::new_1d(10.0, 64).unwrap();
    let p = StationaryProblem::new(EntropyModel::schrodinger_madelung(1.0).unwrap(), g, &ExternalPotential::None, 1.0).unwrap();
    let levels = excited_states_schm(&p, 1).unwrap();
    assert!(levels[0].mu.abs() < 1e-9);
    assert!(levels[0].rho.values().iter().all(|r| (r - 0.1).abs() < 1e-9));
}

/// `V = A(1 − cos kx)` on one period: weak enough that the nonlinear fluids
/// have smooth, everywhere-positive stationary states.
fn ripple(model: EntropyModel, n: usize, a: f64) -> StationaryProblem {
    let l = 2.0 * PI;
    let g = Grid::new_1d(l, n).unwrap();
    let v = ScalarField::from_fn(g, |p| a * (1.0 - p[0].cos())).unwrap();
    let mut p = StationaryProblem::new(model, g, &ExternalPotential::Sampled(v), l).unwrap();
    p.tol = 1e-10;
    p
}

#[test]
fn alternative_fluid_in_a_ripple() {
    // U = −(ν/2)ρ″, so ρ = 1 + (2A/ν) cos x and μ = A exactly
    let (nu, a) = (2.0, 0.3);
    let p = ripple(EntropyModel::alternative(nu).unwrap(), 64, a);
    let r = ground_state(&p).unwrap();
    assert!(r.converged, "residual {:e}", r.residual);
    assert!((r.mu - a).abs() < 1e-9, "mu = {}", r.mu);
    let exact = ScalarField::from_fn(*p.grid(), |q| 1.0 + 2.0 * a / nu * q[0].cos()).unwrap();
    assert!(r.rho.max_abs_diff(&exact).unwrap() < 1e-8);
}

#[test]
fn nonlinear_fluids_are_grid_independent() {
    for model in [EntropyModel::landau(0.5).unwrap(), EntropyModel::alternative(1.0).unwrap()] {
        let mus: Vec<f64> = [64, 128]
            .iter()
            .map(|&n| {
                let r = ground_state(&ripple(model.clone(), n, 0.2)).unwrap();
                assert!(r.converged, "{:?} at N = {n}: residual {:e}", model.kind(), r.residual);
                assert!((r.rho.integral() - 2.0 * PI).abs() < 1e-10 * 2.0 * PI);
                r.mu
            })
            .collect();
        assert!((mus[0] - mus[1]).abs() <= 1e-5, "{:?}: {mus:?}", model.kind());
    }
}

#[test]
fn trapped_landau_fluid_does_not_meet_the_residual_contract() {
    // the trapped minimizer has compact support with a non-smooth edge, so the
    // flow stops at the iteration cap and says so
    let mut p = trap(EntropyModel::landau(0.5).unwrap(), 128);
    p.max_iter = 2000;
    let r = ground_state(&p).unwrap();
    assert!(!r.converged);
    assert!(r.residual > p.tol);
    assert!((r.rho.integral() - 1.0).abs() < 1e-10);
}

#[test]
fn excited_states_need_the_madelung_fluid() {
    let p = trap(EntropyModel::landau(1.0).unwrap(), 64);
    assert!(matches!(excited_states_schm(&p, 2), Err(Error::Unsupported(_))));
}

#[test]
fn invalid_mass_is_rejected() {
    let mut p = trap(EntropyModel::schrodinger_madelung(1.0).unwrap(), 64);
    p.mass = -1.0;
    match ground_state(&p) {
        Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "stationary.mass"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn iteration_cap_returns_best_iterate() {
    let mut p = trap(EntropyModel::schrodinger_madelung(1.0).unwrap(), 128);
    p.max_iter = 10;
    let r = ground_state(&p).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 10);
    assert!((r.rho.integral() - 1.0).abs() < 1e-10);
}

#[test]
fn ground_level_is_grid_independent() {
    let mus: Vec<f64> = [256, 512]
        .iter()
        .map(|&n| {
            let r = ground_state(&trap(EntropyModel::schrodinger_madelung(1.0).unwrap(), n)).unwrap();
            assert!(r.converged);
            r.mu
        })
        .collect();
    assert!((mus[0] - mus[1]).abs() <= 1e-5, "{mus:?}");
}
