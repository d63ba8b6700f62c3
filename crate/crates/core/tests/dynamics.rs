use nlfluid::dynamics::{
    diagnostics, rhs, simulate, stability_bound, step, Branch, FluidState, FluidSystem, Integrator, Scheme,
    ViscosityKind, ViscousClosure,
};
use nlfluid::models::{EntropyModel, JetMode, LocalPart};
use nlfluid::potential::ExternalPotential;
use nlfluid::{Backend, Error, Grid, ScalarField, VectorField};
use std::f64::consts::PI;

fn schm_free(nu: f64) -> FluidSystem {
    FluidSystem::new(
        EntropyModel::schrodinger_madelung(nu).unwrap(),
        ViscousClosure::inviscid(),
        ExternalPotential::None,
    )
}

fn gaussian(grid: Grid, sigma: f64, center: f64) -> ScalarField {
    ScalarField::from_fn(grid, |p| {
        let x = p[0] - center;
        (-x * x / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma).sqrt()
    })
    .unwrap()
}

/// Free spreading of a unit-mass Gaussian of initial width `s0`:
/// density width `s(t)² = s0²(1 + νt²/(4 s0⁴))`, velocity `x·(ν t / 4s0⁴)/(1 + νt²/4s0⁴)`.
fn spreading(x: f64, t: f64, s0: f64, nu: f64) -> (f64, f64) {
    let b = nu * t * t / (4.0 * s0.powi(4));
    let s2 = s0 * s0 * (1.0 + b);
    let rho = (-x * x / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt();
    let v = x * (nu * t / (4.0 * s0.powi(4))) / (1.0 + b);
    (rho, v)
}

fn integrator(dt: f64, t_end: f64) -> Integrator {
    Integrator {
        dt,
        t_end,
        ..Integrator::default()
    }
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let g = Grid::new_1d(10.0, 64).unwrap();
    let st = FluidState::at_rest(ScalarField::constant(g, 1.0)).unwrap();
    for model in [
        EntropyModel::schrodinger_madelung(1.0).unwrap(),
        EntropyModel::landau(0.5).unwrap(),
        EntropyModel::alternative(2.0).unwrap(),
        EntropyModel::euler(LocalPart::Polytropic { kappa: 1.0, gamma: 2.0 }).unwrap(),
    ] {
        let sys = FluidSystem::new(model, ViscousClosure::inviscid(), ExternalPotential::None);
        for backend in [Backend::Spectral, Backend::Fd2, Backend::Fd4] {
            let it = Integrator {
                backend,
                ..integrator(1e-3, 1.0)
            };
            let next = step(&st, &sys, &it).unwrap();
            assert!(next.rho.max_abs_diff(&st.rho).unwrap() <= 1e-15);
            assert!(next.v.max_abs() <= 1e-15);
        }
    }
}

#[test]
fn uniform_streaming_has_zero_rates() {
    let g = Grid::new_1d(10.0, 64).unwrap();
    let v = VectorField::from_component(ScalarField::constant(g, 0.7)).unwrap();
    let st = FluidState::new(ScalarField::constant(g, 1.0), v, 0.0).unwrap();
    let sys = FluidSystem::new(
        EntropyModel::landau(1.0).unwrap(),
        ViscousClosure::new(0.2, ViscosityKind::Dynamic).unwrap(),
        ExternalPotential::None,
    );
    for branch in [Branch::Pressure, Branch::Potential] {
        let (dr, dv) = rhs(&st, &sys, Backend::Spectral, branch, JetMode::Direct).unwrap();
        assert!(dr.max_abs() < 1e-14);
        assert!(dv.max_abs() < 1e-14);
    }
}

#[test]
fn gaussian_acceleration_near_center() {
    // U = 1/4 − x²/8 for ρ = exp(−x²/2), ν = 1, so ∂t v = x/4
    let g = Grid::new_1d(40.0, 512).unwrap();
    let rho = ScalarField::from_fn(g, |p| (-p[0] * p[0] / 2.0).exp()).unwrap();
    let st = FluidState::at_rest(rho).unwrap();
    for branch in [Branch::Pressure, Branch::Potential] {
        let (_, dv) = rhs(&st, &schm_free(1.0), Backend::Fd4, branch, JetMode::Logarithmic).unwrap();
        for (i, x) in g.axis_coords(0).iter().enumerate() {
            if x.abs() < 3.0 {
                assert!((dv.comp(0)[i] - x / 4.0).abs() < 1e-8, "{branch:?} at x = {x}");
            }
        }
    }
}

#[test]
fn spectral_backend_refuses_vacuum_tails() {
    let g = Grid::new_1d(40.0, 256).unwrap();
    let st = FluidState::at_rest(gaussian(g, 1.0, 0.0)).unwrap();
    let err = rhs(&st, &schm_free(1.0), Backend::Spectral, Branch::Potential, JetMode::Logarithmic).unwrap_err();
    assert!(matches!(err, Error::DensityFloor { .. }));
}

#[test]
fn two_dimensional_integration_is_unsupported() {
    let g = Grid::new_2d([6.0, 6.0], [16, 16]).unwrap();
    let st = FluidState::at_rest(ScalarField::constant(g, 1.0)).unwrap();
    let err = step(&st, &schm_free(1.0), &integrator(1e-4, 1.0)).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)));
}

#[test]
fn step_above_stability_bound_is_refused() {
    let g = Grid::new_1d(2.0 * PI, 64).unwrap();
    let rho = ScalarField::from_fn(g, |p| 1.0 + 0.1 * p[0].sin()).unwrap();
    let st = FluidState::at_rest(rho).unwrap();
    let sys = schm_free(1.0);
    let mut it = integrator(1.0, 1.0);
    let bound = stability_bound(&st, &sys, &it);
    let h = g.spacing(0);
    assert!((bound - 0.1 * h * h).abs() < 1e-15);
    assert!(matches!(step(&st, &sys, &it), Err(Error::Stability { .. })));
    assert!(matches!(simulate(&st, &sys, &it), Err(Error::Stability { .. })));
    it.dt = 0.5 * bound;
    assert!(step(&st, &sys, &it).is_ok());
}

#[test]
fn zero_duration_gives_initial_diagnostics_only() {
    let g = Grid::new_1d(40.0, 256).unwrap();
    let st = FluidState::at_rest(gaussian(g, 1.0, 0.0)).unwrap();
    let sys = schm_free(1.0);
    let traj = simulate(&st, &sys, &integrator(1e-4, 0.0)).unwrap();
    assert_eq!(traj.steps, 0);
    assert_eq!(traj.diagnostics.len(), 1);
    assert!(traj.completed());
    let d = traj.diagnostics[0];
    assert!((d.mass - 1.0).abs() < 1e-12);
    // s = −(ν/8)|∇ ln ρ|² = −x²/8, so S = −⟨x²⟩/8
    assert!((d.entropy + 0.125).abs() < 1e-10);
}

#[test]
fn mass_change_per_step_is_round_off() {
    let g = Grid::new_1d(40.0, 512).unwrap();
    let mut st = FluidState::at_rest(gaussian(g, 1.0, 0.0)).unwrap();
    let sys = schm_free(1.0);
    let it = integrator(1e-4, 1.0);
    let m0 = st.rho.integral();
    for _ in 0..50 {
        let next = step(&st, &sys, &it).unwrap();
        assert!((next.rho.integral() - st.rho.integral()).abs() / m0 <= 1e-13);
        st = next;
    }
}

#[test]
fn free_gaussian_follows_the_spreading_law() {
    let g = Grid::new_1d(40.0, 512).unwrap();
    let st = FluidState::at_rest(gaussian(g, 1.0, 0.0)).unwrap();
    let traj = simulate(&st, &schm_free(1.0), &integrator(1e-4, 1.0)).unwrap();
    assert!(traj.completed(), "{:?}", traj.failure);
    assert_eq!(traj.steps, 10_000);
    let f = &traj.final_state;
    assert!((f.t - 1.0).abs() < 1e-15);
    let exact = ScalarField::from_fn(g, |p| spreading(p[0], 1.0, 1.0, 1.0).0).unwrap();
    let err = f.rho.max_abs_diff(&exact).unwrap() / exact.max();
    assert!(err < 1e-5, "density error {err:e}");
    // velocity checked where the state carries mass
    for (i, x) in g.axis_coords(0).iter().enumerate() {
        if x.abs() < 4.0 {
            assert!((f.v.comp(0)[i] - spreading(*x, 1.0, 1.0, 1.0).1).abs() < 1e-4);
        }
    }
    // second moment against the closed form
    let var: f64 = g
        .axis_coords(0)
        .iter()
        .zip(f.rho.values())
        .map(|(x, r)| x * x * r)
        .sum::<f64>()
        * g.cell_volume();
    assert!((var - 1.25).abs() < 1e-5);
}

#[test]
fn viscous_run_produces_entropy() {
    let g = Grid::new_1d(2.0 * PI, 64).unwrap();
    let rho = ScalarField::from_fn(g, |p| (0.3 * p[0].sin()).exp()).unwrap();
    let v = VectorField::from_component(ScalarField::from_fn(g, |p| 0.2 * p[0].cos()).unwrap()).unwrap();
    let st = FluidState::new(rho, v, 0.0).unwrap();
    let sys = FluidSystem::new(
        EntropyModel::schrodinger_madelung(1.0).unwrap(),
        ViscousClosure::new(0.05, ViscosityKind::Dynamic).unwrap(),
        ExternalPotential::None,
    );
    let it = Integrator {
        backend: Backend::Spectral,
        sample_stride: 10,
        ..integrator(5e-4, 1.0)
    };
    let traj = simulate(&st, &sys, &it).unwrap();
    assert!(traj.completed());
    let d = &traj.diagnostics;
    assert!(d.iter().all(|r| r.production >= 0.0));
    assert!(d.windows(2).all(|w| w[1].entropy >= w[0].entropy - 1e-10));
    assert!(d.last().unwrap().entropy > d[0].entropy);
    let m0 = d[0].mass;
    assert!(d.iter().all(|r| (r.mass - m0).abs() / m0 < 1e-12));
}

/// Errors of rk4 and rk2 at `dt`, `dt/2`, `dt/4` against a tiny-step reference.
fn self_convergence(scheme: Scheme, dts: [f64; 3]) -> [f64; 3] {
    let g = Grid::new_1d(2.0 * PI, 16).unwrap();
    let rho = ScalarField::from_fn(g, |p| (0.5 * p[0].sin() + 0.3 * (2.0 * p[0]).cos()).exp()).unwrap();
    let v = VectorField::from_component(ScalarField::from_fn(g, |p| 0.3 * p[0].sin()).unwrap()).unwrap();
    let st = FluidState::new(rho, v, 0.0).unwrap();
    let sys = schm_free(1.0);
    let run = |scheme, dt| {
        let it = Integrator {
            scheme,
            backend: Backend::Spectral,
            jet: JetMode::Direct,
            override_stability: true,
            ..integrator(dt, 0.5)
        };
        simulate(&st, &sys, &it).unwrap().final_state.rho
    };
    let reference = run(Scheme::Rk4, 1e-5);
    dts.map(|dt| run(scheme, dt).max_abs_diff(&reference).unwrap())
}

#[test]
fn time_integration_orders() {
    let dts = [0.01, 0.005, 0.0025];
    for (scheme, want, tol) in [(Scheme::Rk4, 4.0, 0.3), (Scheme::Rk2, 2.0, 0.2)] {
        let e = self_convergence(scheme, dts);
        for k in 0..2 {
            let order = (e[k] / e[k + 1]).log2();
            assert!((order - want).abs() < tol, "{scheme:?}: errors {e:?}");
        }
    }
}

#[test]
fn diagnostics_of_harmonic_ground_state() {
    // ρ ∝ exp(−x²) is stationary in V = x²/2 for ν = 1
    let g = Grid::new_1d(20.0, 256).unwrap();
    let rho = ScalarField::from_fn(g, |p| (-p[0] * p[0]).exp() / PI.sqrt()).unwrap();
    let st = FluidState::at_rest(rho).unwrap();
    let sys = FluidSystem::new(
        EntropyModel::schrodinger_madelung(1.0).unwrap(),
        ViscousClosure::inviscid(),
        ExternalPotential::harmonic(1.0).unwrap(),
    );
    let (dr, dv) = rhs(&st, &sys, Backend::Fd4, Branch::Potential, JetMode::Logarithmic).unwrap();
    assert!(dr.max_abs() < 1e-14);
    for (i, x) in g.axis_coords(0).iter().enumerate() {
        if x.abs() < 4.0 {
            assert!(dv.comp(0)[i].abs() < 1e-9);
        }
    }
    let d = diagnostics(&st, &sys, Backend::Fd4, JetMode::Logarithmic).unwrap();
    // s = −x²/2 and ⟨x²⟩ = 1/2, so S = −1/4 and Q = S − ⟨V⟩ = −1/2
    assert!((d.entropy + 0.25).abs() < 1e-10);
    assert!((d.q + 0.5).abs() < 1e-10);
}

#[test]
fn entropy_rate_matches_production() {
    // dS/dt = ∫σ for V = 0; centred differences of the sampled S
    let g = Grid::new_1d(2.0 * PI, 64).unwrap();
    let rho = ScalarField::from_fn(g, |p| (0.3 * p[0].sin()).exp()).unwrap();
    let v = VectorField::from_component(ScalarField::from_fn(g, |p| 0.2 * p[0].cos()).unwrap()).unwrap();
    let st = FluidState::new(rho, v, 0.0).unwrap();
    let sys = FluidSystem::new(
        EntropyModel::schrodinger_madelung(1.0).unwrap(),
        ViscousClosure::new(0.05, ViscosityKind::Kinematic).unwrap(),
        ExternalPotential::None,
    );
    let it = Integrator {
        backend: Backend::Spectral,
        jet: JetMode::Direct,
        sample_stride: 20,
        ..integrator(5e-4, 0.5)
    };
    let d = simulate(&st, &sys, &it).unwrap().diagnostics;
    let peak = d.iter().map(|r| r.production).fold(0.0, f64::max);
    assert!(peak > 1e-3);
    for w in d.windows(3) {
        let rate = (w[2].entropy - w[0].entropy) / (w[2].t - w[0].t);
        assert!((rate - w[1].production).abs() <= 1e-4 * peak, "t = {}: {rate} vs {}", w[1].t, w[1].production);
    }
    // and the reversible run has no rate at all
    let rev = FluidSystem::new(sys.model, ViscousClosure::inviscid(), ExternalPotential::None);
    let d = simulate(&st, &rev, &it).unwrap().diagnostics;
    let s0 = d[0].entropy;
    assert!(d.iter().all(|r| (r.entropy - s0).abs() <= 1e-9 * s0.abs() && r.production == 0.0));
}

#[test]
fn pressure_and_potential_branches_agree_on_the_free_gaussian() {
    let g = Grid::new_1d(40.0, 512).unwrap();
    let st = FluidState::at_rest(gaussian(g, 1.0, 0.0)).unwrap();
    let run = |branch| {
        let it = Integrator {
            branch,
            ..integrator(1e-4, 1.0)
        };
        let tr = simulate(&st, &schm_free(1.0), &it).unwrap();
        assert!(tr.completed());
        tr.final_state.rho
    };
    let a = run(Branch::Pressure);
    let b = run(Branch::Potential);
    let rel = a.max_abs_diff(&b).unwrap() / b.max_abs();
    assert!(rel <= 1e-7, "{rel:e}");
}
