use nlfluid::dynamics::{FluidState, FluidSystem, Integrator, ViscousClosure};
use nlfluid::models::{EntropyModel, JetMode};
use nlfluid::potential::ExternalPotential;
use nlfluid::quantum::{
    compare_evolutions, energy, fluid_energy, from_wavefunction, schrodinger_step, spectral_tail_fraction,
    to_wavefunction, SplitStep, WaveState,
};
use nlfluid::{Backend, Error, Grid, ScalarField, VectorField};
use num_complex::Complex64;
use std::f64::consts::PI;

fn gaussian_psi(grid: Grid, hbar: f64, beta: f64, x0: f64) -> WaveState {
    WaveState::from_fn(grid, hbar, |x| {
        let r = (-(x - x0) * (x - x0) / 4.0).exp() / (2.0 * PI).powf(0.25);
        Complex64::from_polar(r, beta * x * x / 2.0)
    })
    .unwrap()
}

#[test]
fn real_positive_wave_is_at_rest() {
    let g = Grid::new_1d(10.0, 128).unwrap();
    let w = WaveState::from_fn(g, 1.0, |x| Complex64::new((0.3 * x.sin()).exp(), 0.0)).unwrap();
    let f = from_wavefunction(&w).unwrap();
    assert!(f.v.max_abs() < 1e-13);
    assert!((f.rho.integral() - w.norm()).abs() < 1e-12 * w.norm());
}

#[test]
fn plane_wave_velocity() {
    let g = Grid::new_1d(2.0 * PI, 64).unwrap();
    let hbar = 0.7;
    let k = 3.0;
    let w = WaveState::from_fn(g, hbar, |x| Complex64::from_polar(1.0, k * x)).unwrap();
    let f = from_wavefunction(&w).unwrap();
    assert!(f.rho.values().iter().all(|r| (r - 1.0).abs() < 1e-14));
    assert!(f.v.comp(0).iter().all(|v| (v - hbar * k).abs() < 1e-12));
}

#[test]
fn quadratic_phase_gives_linear_velocity() {
    let g = Grid::new_1d(40.0, 512).unwrap();
    let (hbar, beta) = (1.3, 0.4);
    let f = from_wavefunction(&gaussian_psi(g, hbar, beta, 0.0)).unwrap();
    let floor = 1e-12 * f.rho.mean();
    let bulk = 1e-6 * f.rho.max();
    for (i, x) in g.axis_coords(0).iter().enumerate() {
        let (r, v) = (f.rho.values()[i], f.v.comp(0)[i]);
        if r >= bulk {
            assert!((v - hbar * beta * x).abs() < 1e-10, "x = {x}");
        }
        if r >= floor {
            assert!(r * (v - hbar * beta * x).abs() < 1e-13, "x = {x}");
        } else {
            assert_eq!(v, 0.0);
        }
    }
}

#[test]
fn nodes_are_rejected() {
    let g = Grid::new_1d(20.0, 256).unwrap();
    // node on a grid point
    let w = WaveState::from_fn(g, 1.0, |x| Complex64::new(x * (-x * x / 2.0).exp(), 0.0)).unwrap();
    assert!(matches!(from_wavefunction(&w), Err(Error::Node { .. })));
    // node between grid points shows up as a sign flip
    let w = WaveState::from_fn(g, 1.0, |x| {
        let y = x - 0.01;
        Complex64::new(y * (-y * y / 2.0).exp(), 0.0)
    })
    .unwrap();
    match from_wavefunction(&w) {
        Err(Error::Node { index, .. }) => assert!((g.coord(0, index) - 0.01).abs() < g.spacing(0)),
        other => panic!("expected a node, got {other:?}"),
    }
}

#[test]
fn resting_fluid_maps_to_root_density() {
    let g = Grid::new_1d(10.0, 64).unwrap();
    let rho = ScalarField::from_fn(g, |p| 1.0 + 0.5 * p[0].cos()).unwrap();
    let w = to_wavefunction(&FluidState::at_rest(rho.clone()).unwrap(), 1.0).unwrap();
    for (z, r) in w.psi().iter().zip(rho.values()) {
        assert!((z.re - r.sqrt()).abs() < 1e-15 && z.im.abs() < 1e-15);
    }
}

#[test]
fn winding_one_plane_wave() {
    let l = 8.0;
    let g = Grid::new_1d(l, 64).unwrap();
    let (hbar, mass) = (0.5, 3.0);
    let rho = ScalarField::constant(g, mass / l);
    let v = VectorField::from_component(ScalarField::constant(g, 2.0 * PI * hbar / l)).unwrap();
    let w = to_wavefunction(&FluidState::new(rho, v, 0.0).unwrap(), hbar).unwrap();
    let x0 = g.coord(0, 0);
    for (i, z) in w.psi().iter().enumerate() {
        let want = Complex64::from_polar((mass / l).sqrt(), 2.0 * PI * (g.coord(0, i) - x0) / l);
        assert!((z - want).norm() < 1e-13);
    }
    assert!((w.norm() - mass).abs() < 1e-12 * mass);
}

#[test]
fn unquantized_circulation_is_rejected() {
    let g = Grid::new_1d(2.0 * PI, 64).unwrap();
    let v = VectorField::from_component(ScalarField::constant(g, 1.25)).unwrap();
    let st = FluidState::new(ScalarField::constant(g, 1.0), v, 0.0).unwrap();
    match to_wavefunction(&st, 1.0) {
        Err(Error::Circulation { defect, .. }) => assert!((defect - 0.25).abs() < 1e-12),
        other => panic!("expected a circulation error, got {other:?}"),
    }
}

#[test]
fn round_trip_localized_state() {
    let g = Grid::new_1d(40.0, 512).unwrap();
    let f = from_wavefunction(&gaussian_psi(g, 1.0, 0.4, 0.0)).unwrap();
    let w = to_wavefunction(&f, 1.0).unwrap();
    assert!((w.norm() - f.rho.integral()).abs() < 1e-12);
    let back = from_wavefunction(&w).unwrap();
    assert!(back.rho.max_abs_diff(&f.rho).unwrap() <= 1e-10 * f.rho.max());
    // the velocity is ill-conditioned where |ψ| is tiny; compare it in the
    // bulk and the momentum density everywhere
    let bulk = 1e-6 * f.rho.max();
    let r = f.rho.values();
    let (a, b) = (f.v.comp(0), back.v.comp(0));
    for i in 0..r.len() {
        if r[i] >= bulk {
            assert!((a[i] - b[i]).abs() <= 1e-10, "velocity at {i}");
        }
        assert!((r[i] * a[i] - back.rho.values()[i] * b[i]).abs() <= 1e-10 * f.rho.max());
    }
}

#[test]
fn round_trip_full_support_with_winding() {
    let g = Grid::new_1d(2.0 * PI, 64).unwrap();
    let hbar = 0.8;
    let rho = ScalarField::from_fn(g, |p| (0.3 * p[0].sin()).exp()).unwrap();
    let v = VectorField::from_component(ScalarField::from_fn(g, |p| hbar * (2.0 + 0.2 * p[0].cos())).unwrap())
        .unwrap();
    let st = FluidState::new(rho, v, 0.0).unwrap();
    let back = from_wavefunction(&to_wavefunction(&st, hbar).unwrap()).unwrap();
    assert!(back.rho.max_abs_diff(&st.rho).unwrap() <= 1e-13);
    assert!(back.v.max_abs_diff(&st.v).unwrap() <= 1e-12);
}

#[test]
fn plane_wave_phase_is_exact() {
    let g = Grid::new_1d(2.0 * PI, 32).unwrap();
    let (hbar, k, dt) = (1.0, 5.0, 0.37);
    let w = WaveState::from_fn(g, hbar, |x| Complex64::from_polar(1.0, k * x)).unwrap();
    let next = schrodinger_step(&w, &ScalarField::zeros(g), dt).unwrap();
    let phase = Complex64::from_polar(1.0, -hbar * k * k * dt / 2.0);
    for (a, b) in next.psi().iter().zip(w.psi()) {
        assert!((a - b * phase).norm() < 1e-13);
    }
}

#[test]
fn constant_potential_is_a_gauge_phase() {
    let g = Grid::new_1d(10.0, 64).unwrap();
    let w = gaussian_psi(g, 1.0, 0.0, 0.0);
    let zero = schrodinger_step(&w, &ScalarField::zeros(g), 0.01).unwrap();
    let shifted = schrodinger_step(&w, &ScalarField::constant(g, 2.5), 0.01).unwrap();
    let phase = Complex64::from_polar(1.0, -2.5 * 0.01);
    for (a, b) in shifted.psi().iter().zip(zero.psi()) {
        assert!((a - b * phase).norm() < 1e-14);
        assert!((a.norm() - b.norm()).abs() < 1e-14);
    }
}

#[test]
fn split_step_preserves_norm_and_energy() {
    let g = Grid::new_1d(20.0, 256).unwrap();
    let v = ExternalPotential::harmonic(1.0).unwrap().values(&g).unwrap();
    let mut w = gaussian_psi(g, 1.0, 0.3, 1.0);
    let n0 = w.norm();
    let e0 = energy(&w, &v).unwrap();
    let split = SplitStep::new(g, 1.0, &v, 1e-4).unwrap();
    for _ in 0..100 {
        let before = w.norm();
        split.advance(&mut w, 100).unwrap();
        assert!((w.norm() - before).abs() <= 100.0 * 1e-13 * n0);
    }
    let e1 = energy(&w, &v).unwrap();
    assert!((e1 - e0).abs() / e0 < 1e-8, "energy drift {:e}", (e1 - e0) / e0);
    assert!(spectral_tail_fraction(&w) < 1e-8);
}

#[test]
fn free_gaussian_width() {
    let g = Grid::new_1d(40.0, 512).unwrap();
    let mut w = gaussian_psi(g, 1.0, 0.0, 0.0);
    SplitStep::new(g, 1.0, &ScalarField::zeros(g), 1e-3)
        .unwrap()
        .advance(&mut w, 1000)
        .unwrap();
    let rho = w.density();
    let var: f64 = g
        .axis_coords(0)
        .iter()
        .zip(rho.values())
        .map(|(x, r)| x * x * r)
        .sum::<f64>()
        * g.cell_volume();
    assert!((var - 1.25).abs() < 1e-8, "variance {var}");
}

#[test]
fn wave_and_fluid_energies_agree() {
    let g = Grid::new_1d(40.0, 512).unwrap();
    let w = gaussian_psi(g, 1.0, 0.4, 0.5);
    let f = from_wavefunction(&w).unwrap();
    let sys = FluidSystem::new(
        EntropyModel::schrodinger_madelung(1.0).unwrap(),
        ViscousClosure::inviscid(),
        ExternalPotential::harmonic(1.0).unwrap(),
    );
    let v = sys.potential.values(&g).unwrap();
    let ew = energy(&w, &v).unwrap();
    let ef = fluid_energy(&f, &sys, Backend::Fd4, JetMode::Logarithmic).unwrap();
    assert!((ew - ef).abs() / ew.abs() < 1e-6, "{ew} vs {ef}");
}

#[test]
fn comparison_with_zero_duration_is_exact() {
    let g = Grid::new_1d(40.0, 256).unwrap();
    let f = from_wavefunction(&gaussian_psi(g, 1.0, 0.0, 0.0)).unwrap();
    let sys = FluidSystem::new(
        EntropyModel::schrodinger_madelung(1.0).unwrap(),
        ViscousClosure::inviscid(),
        ExternalPotential::None,
    );
    let it = Integrator {
        t_end: 0.0,
        ..Integrator::default()
    };
    let c = compare_evolutions(&f, &sys, &it).unwrap();
    assert_eq!(c.samples.len(), 1);
    assert!(c.samples[0].rho_error < 1e-15);
    // only the bridge round trip separates the two
    assert!(c.samples[0].v_error < 1e-12);
}

#[test]
fn comparison_needs_a_reversible_madelung_fluid() {
    let g = Grid::new_1d(10.0, 64).unwrap();
    let f = FluidState::at_rest(ScalarField::constant(g, 1.0)).unwrap();
    let it = Integrator::default();
    let landau = FluidSystem::new(
        EntropyModel::landau(1.0).unwrap(),
        ViscousClosure::inviscid(),
        ExternalPotential::None,
    );
    assert!(matches!(compare_evolutions(&f, &landau, &it), Err(Error::Unsupported(_))));
}

#[test]
fn coherent_state_tracks_its_classical_orbit() {
    // displaced ground state of V = x²/2: the centre follows cos t
    let g = Grid::new_1d(20.0, 256).unwrap();
    let rho = ScalarField::from_fn(g, |p| (-(p[0] - 1.0).powi(2)).exp() / PI.sqrt()).unwrap();
    let sys = FluidSystem::new(
        EntropyModel::schrodinger_madelung(1.0).unwrap(),
        ViscousClosure::inviscid(),
        ExternalPotential::harmonic(1.0).unwrap(),
    );
    let it = Integrator {
        dt: 2e-4,
        t_end: 1.0,
        sample_stride: 500,
        ..Integrator::default()
    };
    let c = compare_evolutions(&FluidState::at_rest(rho).unwrap(), &sys, &it).unwrap();
    assert!(c.trajectory.completed());
    for s in &c.samples {
        assert!((s.center_fluid - s.t.cos()).abs() < 1e-6, "fluid at t = {}", s.t);
        assert!((s.center_wave - s.t.cos()).abs() < 1e-8, "wave at t = {}", s.t);
        assert!(s.rho_error < 1e-5);
    }
}
