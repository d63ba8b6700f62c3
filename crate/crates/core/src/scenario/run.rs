use super::config::{InitialSpec, PotentialSpec, Scenario};
use super::output::{comparison_csv, diagnostics_csv, fields_csv, fields_name, profile_csv, real, Artifacts, Csv};
use super::suites::run_suite;
use crate::dynamics::{self, DiagnosticsRecord, Integrator};
use crate::error::{Error, Result};
use crate::fields::{Backend, Grid, ScalarField};
use crate::models::ModelKind;
use crate::parallel::{with_threads, Execution};
use crate::quantum::compare_evolutions;
use crate::stationary::{excited_states_schm, ground_state, Level, StationaryProblem};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Compare,
    Stationary,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::Stationary => "stationary",
            Command::Verify => "verify",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simulate" => Ok(Command::Simulate),
            "compare" => Ok(Command::Compare),
            "stationary" => Ok(Command::Stationary),
            "verify" => Ok(Command::Verify),
            other => Err(Error::Config(format!("unknown command `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Explicit output root; each scenario writes to `<out>/<name>`.
    pub out: Option<PathBuf>,
    /// Root used when neither `out` nor the scenario's `output.dir` is set.
    pub default_root: PathBuf,
    pub backend: Option<Backend>,
    pub override_stability: bool,
    pub execution: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            out: None,
            default_root: PathBuf::from("nlfluid-out"),
            backend: None,
            override_stability: false,
            execution: Execution::Parallel,
        }
    }
}

impl RunOptions {
    pub fn output_dir(&self, s: &Scenario) -> PathBuf {
        match (&self.out, &s.output.dir) {
            (Some(root), _) => root.join(&s.name),
            (None, Some(dir)) => dir.clone(),
            (None, None) => self.default_root.join(&s.name),
        }
    }
}

/// Whether the run met its contract. `Failed` carries the reason: a
/// numerical breakdown, an unconverged solve or a failing check.
#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub command: Command,
    pub status: Status,
    pub summary: Value,
    pub artifacts: Artifacts,
}

/// `|x₁ − x₀| / |x₀|`, or the absolute change when `x₀ = 0`.
fn rel_change(x0: f64, x1: f64) -> f64 {
    let d = (x1 - x0).abs();
    if x0 != 0.0 {
        d / x0.abs()
    } else {
        d
    }
}

/// Invariant drifts over a diagnostics series. Momentum is measured against
/// `max(|Π₀|, max_t M·max|v|)` so runs starting at rest still get a relative
/// number.
fn drifts(records: &[DiagnosticsRecord]) -> Value {
    let (first, last) = (records[0], records[records.len() - 1]);
    let scale = records
        .iter()
        .map(|r| r.mass * r.max_v)
        .fold(first.momentum.abs(), f64::max);
    let momentum = (last.momentum - first.momentum).abs();
    let mut max_mass: f64 = 0.0;
    let mut max_q: f64 = 0.0;
    let mut max_decrease: f64 = 0.0;
    for w in records.windows(2) {
        max_decrease = max_decrease.max(w[0].entropy - w[1].entropy);
    }
    for r in records {
        max_mass = max_mass.max(rel_change(first.mass, r.mass));
        max_q = max_q.max(rel_change(first.q, r.q));
    }
    let min_production = records.iter().map(|r| r.production).fold(f64::INFINITY, f64::min);
    json!({
        "samples": records.len(),
        "t_final": last.t,
        "mass_drift": rel_change(first.mass, last.mass),
        "max_mass_drift": max_mass,
        "momentum_drift": if scale > 0.0 { momentum / scale } else { momentum },
        "q_drift": rel_change(first.q, last.q),
        "max_q_drift": max_q,
        "entropy_change": last.entropy - first.entropy,
        "max_entropy_decrease": max_decrease,
        "min_production": min_production,
        "min_rho": last.min_rho,
    })
}

fn merge(into: &mut Value, other: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, other) {
        a.extend(b);
    }
}

fn header(s: &Scenario, command: Command) -> Value {
    json!({ "scenario": s.name, "command": command.name() })
}

/// Density of the freely spreading Gaussian,
/// `σ_t² = σ²(1 + (ħt/2σ²)²)`, with its periodic images ignored.
pub fn closed_form_gaussian(grid: &Grid, sigma: f64, center: f64, mass: f64, hbar: f64, t: f64) -> Result<ScalarField> {
    let st = sigma * (1.0 + (hbar * t / (2.0 * sigma * sigma)).powi(2)).sqrt();
    ScalarField::from_fn(*grid, |p| {
        mass / ((2.0 * PI).sqrt() * st) * (-(p[0] - center).powi(2) / (2.0 * st * st)).exp()
    })
}

fn integrator(s: &Scenario, opts: &RunOptions) -> Result<Integrator> {
    s.integrator(opts.backend, opts.override_stability)
}

fn write_failure_state(arts: &mut Artifacts, tr: &dynamics::Trajectory) -> Result<()> {
    if tr.failure.is_some() {
        arts.csv("fields_failure.csv", &fields_csv(&tr.final_state))?;
    }
    Ok(())
}

fn failure_status(tr: &dynamics::Trajectory) -> (Status, Value) {
    match &tr.failure {
        None => (Status::Ok, json!({ "status": "ok", "failure": null })),
        Some(e) => (
            Status::Failed(e.to_string()),
            json!({ "status": "failed", "failure": e.to_string() }),
        ),
    }
}

fn simulate(s: &Scenario, opts: &RunOptions, arts: &mut Artifacts) -> Result<(Status, Value)> {
    let initial = s.initial_state()?;
    let system = s.system()?;
    let mut it = integrator(s, opts)?;
    it.snapshot_stride = it.sample_stride.saturating_mul(s.output.fields_stride);
    let tr = dynamics::simulate(&initial, &system, &it)?;
    arts.csv("diagnostics.csv", &diagnostics_csv(&tr.diagnostics))?;
    let (_, dt) = it.steps();
    let keep = if tr.failure.is_some() {
        tr.snapshots.len().saturating_sub(1)
    } else {
        tr.snapshots.len()
    };
    for st in &tr.snapshots[..keep] {
        let step = ((st.t - initial.t) / dt).round() as usize;
        arts.csv(&fields_name(step), &fields_csv(st))?;
    }
    write_failure_state(arts, &tr)?;
    let (status, mut summary) = failure_status(&tr);
    merge(&mut summary, header(s, Command::Simulate));
    merge(
        &mut summary,
        json!({ "steps": tr.steps, "dt": dt, "backend": it.backend.name() }),
    );
    merge(&mut summary, drifts(&tr.diagnostics));
    Ok((status, summary))
}

fn compare(s: &Scenario, opts: &RunOptions, arts: &mut Artifacts) -> Result<(Status, Value)> {
    let initial = s.initial_state()?;
    let system = s.system()?;
    let hbar = s.hbar()?;
    let it = integrator(s, opts)?;
    let c = compare_evolutions(&initial, &system, &it)?;
    arts.csv("comparison.csv", &comparison_csv(&c.samples))?;
    arts.csv("diagnostics.csv", &diagnostics_csv(&c.trajectory.diagnostics))?;
    write_failure_state(arts, &c.trajectory)?;
    let (status, mut summary) = failure_status(&c.trajectory);
    merge(&mut summary, header(s, Command::Compare));
    let last = c.samples[c.samples.len() - 1];
    let max_rho = c.samples.iter().map(|x| x.rho_error).fold(0.0, f64::max);
    let (_, dt) = it.steps();
    merge(
        &mut summary,
        json!({
            "steps": c.trajectory.steps,
            "dt": dt,
            "hbar": hbar,
            "backend": it.backend.name(),
            "final_rho_error": last.rho_error,
            "max_rho_error": max_rho,
            "final_v_error": last.v_error,
            "final_tail_fraction": last.tail_fraction,
            "wave_norm_drift": rel_change(c.samples[0].wave_norm, last.wave_norm),
            "wave_energy_drift": rel_change(c.samples[0].wave_energy, last.wave_energy),
        }),
    );
    merge(&mut summary, drifts(&c.trajectory.diagnostics));
    if let (
        InitialSpec::Gaussian {
            sigma,
            center,
            mass,
            velocity,
        },
        PotentialSpec::None,
    ) = (&s.initial, &s.potential)
    {
        if *velocity == 0.0 {
            let grid = *initial.grid();
            let exact = closed_form_gaussian(&grid, *sigma, *center, *mass, hbar, c.trajectory.final_state.t)?;
            merge(
                &mut summary,
                json!({
                    "closed_form_error_fluid": c.trajectory.final_state.rho.rel_l2_error(&exact)?,
                    "closed_form_error_wave": c.wave.density().rel_l2_error(&exact)?,
                }),
            );
        }
    }
    Ok((status, summary))
}

fn level_row(l: &Level) -> Vec<String> {
    vec![
        l.index.to_string(),
        real(l.mu),
        real(l.residual),
        l.iterations.to_string(),
        u8::from(l.converged).to_string(),
        u8::from(l.degenerate).to_string(),
    ]
}

fn stationary(s: &Scenario, arts: &mut Artifacts) -> Result<(Status, Value)> {
    let grid = s.grid()?;
    let model = s.model()?;
    let spec = &s.stationary;
    let mass = match spec.mass {
        Some(m) => m,
        None => s.initial_state()?.rho.integral(),
    };
    let mut p = StationaryProblem::new(model, grid, &s.potential()?, mass)?;
    p.tol = spec.tol;
    p.max_iter = spec.max_iter;
    p.dtau = spec.dtau;
    p.backend = spec.backend;
    if spec.levels == 0 {
        return Err(Error::param("stationary.levels", "must be at least 1"));
    }
    let levels = if spec.levels == 1 {
        let r = ground_state(&p)?;
        let amplitude = r.rho.map(f64::sqrt);
        vec![Level {
            index: 0,
            mu: r.mu,
            residual: r.residual,
            iterations: r.iterations,
            converged: r.converged,
            degenerate: false,
            rho: r.rho,
            amplitude,
        }]
    } else if model.kind() == ModelKind::SchrodingerMadelung {
        excited_states_schm(&p, spec.levels)?
    } else {
        return Err(Error::param(
            "stationary.levels",
            "excited levels need the schrodinger-madelung fluid",
        ));
    };
    let mut csv = Csv::new(&["level", "mu", "residual", "iterations", "converged", "degenerate"]);
    for l in &levels {
        csv.row(&level_row(l));
    }
    arts.csv("levels.csv", &csv)?;
    let x = grid.axis_coords(0);
    for l in &levels {
        if grid.dim() == 1 {
            arts.csv(&format!("density_level{}.csv", l.index), &profile_csv(&x, "rho", l.rho.values()))?;
        }
    }
    let unconverged: Vec<usize> = levels.iter().filter(|l| !l.converged).map(|l| l.index).collect();
    let status = if unconverged.is_empty() {
        Status::Ok
    } else {
        Status::Failed(format!("levels {unconverged:?} did not reach the residual tolerance"))
    };
    let mut summary = header(s, Command::Stationary);
    merge(
        &mut summary,
        json!({
            "status": if unconverged.is_empty() { "ok" } else { "failed" },
            "mass": mass,
            "tol": spec.tol,
            "levels": levels,
        }),
    );
    Ok((status, summary))
}

fn verify(s: &Scenario, opts: &RunOptions, arts: &mut Artifacts) -> Result<(Status, Value)> {
    let spec = s
        .verify
        .as_ref()
        .ok_or_else(|| Error::Config(format!("scenario `{}` has no [verify] table", s.name)))?;
    let checks = run_suite(spec, opts.execution)?;
    let mut csv = Csv::new(&["suite", "case", "value", "relation", "target", "tolerance", "pass"]);
    for c in &checks {
        let (rel, target, tol) = c.target_tol();
        csv.row(&[
            c.suite.name().to_string(),
            c.case.clone(),
            real(c.value),
            rel.to_string(),
            real(target),
            real(tol),
            u8::from(c.pass).to_string(),
        ]);
    }
    arts.csv("verify.csv", &csv)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.case.as_str()).collect();
    let worst = checks.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);
    let status = if failed.is_empty() {
        Status::Ok
    } else {
        Status::Failed(format!("{} of {} checks failed", failed.len(), checks.len()))
    };
    let mut summary = header(s, Command::Verify);
    merge(
        &mut summary,
        json!({
            "status": if failed.is_empty() { "ok" } else { "failed" },
            "suite": spec.suite.name(),
            "checks": checks.len(),
            "failed": failed,
            "max_value": worst,
        }),
    );
    Ok((status, summary))
}

/// Runs one command on one scenario. Bad configuration is an error and
/// writes no files; once the run starts, artifacts (including
/// `summary.json`) are written even when the run fails numerically.
pub fn run(command: Command, s: &Scenario, opts: &RunOptions) -> Result<RunReport> {
    let dir = opts.output_dir(s);
    let mut arts = Artifacts::new(&dir)?;
    let (status, summary) = match command {
        Command::Simulate => simulate(s, opts, &mut arts)?,
        Command::Compare => compare(s, opts, &mut arts)?,
        Command::Stationary => stationary(s, &mut arts)?,
        Command::Verify => verify(s, opts, &mut arts)?,
    };
    arts.json("summary.json", &summary)?;
    Ok(RunReport {
        scenario: s.name.clone(),
        command,
        status,
        summary,
        artifacts: arts,
    })
}

/// Runs independent scenarios on at most `jobs` threads (0: pool default).
/// Reports come back in input order.
pub fn run_batch(command: Command, scenarios: &[Scenario], opts: &RunOptions, jobs: usize) -> Vec<Result<RunReport>> {
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = scenarios.iter().find(|s| !seen.insert(opts.output_dir(s))) {
        let e = Error::Config(format!("two scenarios write to {}", opts.output_dir(dup).display()));
        return scenarios.iter().map(|_| Err(e.clone())).collect();
    }
    with_threads(jobs, || opts.execution.map(scenarios, |s| run(command, s, opts)))
}

/// The catalogue as a plain-text table.
pub fn list_models() -> String {
    let mut out = String::from("name                  entropy density\n");
    for k in ModelKind::ALL {
        out.push_str(&format!("{:<22}{}\n", k.name(), k.entropy_formula()));
    }
    out.push_str(
        "\nCoefficients: nu (all but euler; >= 0 for the named fluids), k (fisher-shannon only),\n\
         s0, local = { law = \"polytropic\" | \"isothermal\" | \"constant-pressure\", ... } (euler, fisher-shannon).\n",
    );
    out
}
