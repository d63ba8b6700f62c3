use super::{complex_derivative, from_wavefunction, to_wavefunction, WaveState};
use crate::dynamics::{diagnostics, simulate, FluidState, FluidSystem, Integrator, Trajectory};
use crate::error::{Error, Result};
use crate::fields::{spectral, Backend, Grid, ScalarField};
use crate::models::{JetMode, ModelKind};
use num_complex::Complex64;
use serde::Serialize;

/// Strang splitting `e^{−iVdt/2ħ} e^{−iħk²dt/2} e^{−iVdt/2ħ}` for a fixed
/// grid, potential and step.
#[derive(Debug, Clone)]
pub struct SplitStep {
    grid: Grid,
    hbar: f64,
    dt: f64,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
}

impl SplitStep {
    pub fn new(grid: Grid, hbar: f64, potential: &ScalarField, dt: f64) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::Unsupported("split-step evolution is one-dimensional".into()));
        }
        grid.ensure_same(potential.grid())?;
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::param("hbar", format!("must be positive, got {hbar}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        let half_potential = potential
            .values()
            .iter()
            .map(|&v| Complex64::from_polar(1.0, -0.5 * v * dt / hbar))
            .collect();
        let kinetic = spectral::wavenumbers(grid.len(), grid.length(0))
            .into_iter()
            .map(|k| Complex64::from_polar(1.0, -0.5 * hbar * k * k * dt))
            .collect();
        Ok(SplitStep {
            grid,
            hbar,
            dt,
            half_potential,
            kinetic,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn apply(&self, psi: &mut [Complex64]) {
        for (z, p) in psi.iter_mut().zip(&self.half_potential) {
            *z *= p;
        }
        spectral::forward(psi);
        for (z, k) in psi.iter_mut().zip(&self.kinetic) {
            *z *= k;
        }
        spectral::inverse(psi);
        for (z, p) in psi.iter_mut().zip(&self.half_potential) {
            *z *= p;
        }
    }

    /// Advances `w` in place by `steps` steps.
    pub fn advance(&self, w: &mut WaveState, steps: usize) -> Result<()> {
        self.grid.ensure_same(w.grid())?;
        if (w.hbar() - self.hbar).abs() > 0.0 {
            return Err(Error::param("hbar", "wavefunction and propagator disagree"));
        }
        let psi = w.psi_mut();
        for _ in 0..steps {
            self.apply(psi);
        }
        Ok(())
    }
}

/// One Strang step of `iħψ_t = −(ħ²/2)ψ″ + Vψ`.
pub fn schrodinger_step(w: &WaveState, potential: &ScalarField, dt: f64) -> Result<WaveState> {
    let split = SplitStep::new(*w.grid(), w.hbar(), potential, dt)?;
    let mut out = w.clone();
    split.advance(&mut out, 1)?;
    Ok(out)
}

/// Fraction of `Σ|ψ̂|²` carried by the top eighth of the resolved modes.
pub fn spectral_tail_fraction(w: &WaveState) -> f64 {
    let n = w.grid().len();
    let mut buf = w.psi().to_vec();
    spectral::forward(&mut buf);
    let cut = 3 * n / 8;
    let (mut tail, mut total) = (0.0, 0.0);
    for (j, z) in buf.iter().enumerate() {
        let m = j.min(n - j);
        let e = z.norm_sqr();
        total += e;
        if m > cut {
            tail += e;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// `⟨ψ|H|ψ⟩ = ∫ (ħ²/2)|ψ′|² + V|ψ|²`.
pub fn energy(w: &WaveState, potential: &ScalarField) -> Result<f64> {
    w.grid().ensure_same(potential.grid())?;
    let dpsi = complex_derivative(w.psi(), w.grid().length(0));
    let h = w.grid().cell_volume();
    let kinetic: f64 = dpsi.iter().map(|z| z.norm_sqr()).sum::<f64>() * h;
    let pot: f64 = w
        .psi()
        .iter()
        .zip(potential.values())
        .map(|(z, v)| z.norm_sqr() * v)
        .sum::<f64>()
        * h;
    Ok(0.5 * w.hbar() * w.hbar() * kinetic + pot)
}

/// `∫ρ(v²/2 − s + V)`, the fluid counterpart of [`energy`].
pub fn fluid_energy(state: &FluidState, system: &FluidSystem, backend: Backend, jet: JetMode) -> Result<f64> {
    Ok(-diagnostics(state, system, backend, jet)?.q)
}

/// Fluid against wavefunction at one sampled time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonSample {
    pub t: f64,
    /// `‖ρ − |ψ|²‖₂ / ‖|ψ|²‖₂`
    pub rho_error: f64,
    /// Mass-weighted rms velocity difference `(∫|ψ|²(v − v_ψ)² / ∫|ψ|²)^{1/2}`.
    pub v_error: f64,
    pub center_fluid: f64,
    pub center_wave: f64,
    pub wave_norm: f64,
    pub wave_energy: f64,
    pub tail_fraction: f64,
}

impl ComparisonSample {
    pub const HEADER: [&'static str; 8] = [
        "t",
        "rho_error",
        "v_error",
        "center_fluid",
        "center_wave",
        "wave_norm",
        "wave_energy",
        "tail_fraction",
    ];

    pub fn reals(&self) -> [f64; 8] {
        [
            self.t,
            self.rho_error,
            self.v_error,
            self.center_fluid,
            self.center_wave,
            self.wave_norm,
            self.wave_energy,
            self.tail_fraction,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub samples: Vec<ComparisonSample>,
    pub trajectory: Trajectory,
    pub wave: WaveState,
}

fn center(grid: &Grid, rho: &[f64]) -> f64 {
    let x = grid.axis_coords(0);
    let m: f64 = rho.iter().sum();
    x.iter().zip(rho).map(|(x, r)| x * r).sum::<f64>() / m
}

fn sample(fluid: &FluidState, wave: &WaveState, potential: &ScalarField) -> Result<ComparisonSample> {
    let grid = *fluid.grid();
    let wrho = wave.density();
    let wflow = from_wavefunction(wave)?;
    let (mut num, mut den) = (0.0, 0.0);
    for ((r, a), b) in wrho.values().iter().zip(fluid.v.comp(0)).zip(wflow.v.comp(0)) {
        num += r * (a - b) * (a - b);
        den += r;
    }
    Ok(ComparisonSample {
        t: fluid.t,
        rho_error: fluid.rho.rel_l2_error(&wrho)?,
        v_error: (num / den).sqrt(),
        center_fluid: center(&grid, fluid.rho.values()),
        center_wave: center(&grid, wrho.values()),
        wave_norm: wave.norm(),
        wave_energy: energy(wave, potential)?,
        tail_fraction: spectral_tail_fraction(wave),
    })
}

/// Runs the fluid solver and the split-step solver from the same initial
/// data (`ħ = √ν`) and compares them at every diagnostics sample.
pub fn compare_evolutions(initial: &FluidState, system: &FluidSystem, integrator: &Integrator) -> Result<Comparison> {
    let model = &system.model;
    if model.kind() != ModelKind::SchrodingerMadelung || model.nu() <= 0.0 {
        return Err(Error::Unsupported(
            "the wavefunction comparison needs the Schrödinger–Madelung fluid with ν > 0".into(),
        ));
    }
    if !system.closure.is_inviscid() {
        return Err(Error::Unsupported("the wavefunction comparison is reversible (η = 0)".into()));
    }
    integrator.validate()?;
    let grid = *initial.grid();
    let hbar = model.nu().sqrt();
    let potential = system.potential.values(&grid)?;
    let mut wave = to_wavefunction(initial, hbar)?;
    let (_, dt) = integrator.steps();
    let split = SplitStep::new(grid, hbar, &potential, dt)?;

    let run = Integrator {
        snapshot_stride: integrator.sample_stride,
        ..*integrator
    };
    let trajectory = simulate(initial, system, &run)?;
    let mut states: Vec<&FluidState> = trajectory.snapshots.iter().collect();
    if trajectory.failure.is_some() {
        // the last snapshot duplicates the final state
        states.pop();
    }
    if states.last().map(|s| s.t) != Some(trajectory.final_state.t) {
        states.push(&trajectory.final_state);
    }
    let t0 = initial.t;
    let mut done = 0usize;
    let mut samples = Vec::with_capacity(states.len());
    for s in states {
        let k = ((s.t - t0) / dt).round() as usize;
        split.advance(&mut wave, k - done)?;
        done = k;
        samples.push(sample(s, &wave, &potential)?);
    }
    Ok(Comparison {
        samples,
        trajectory,
        wave,
    })
}
