use crate::dynamics::{Branch, FluidState, FluidSystem, Integrator, Scheme, ViscosityKind, ViscousClosure};
use crate::error::{Error, Result};
use crate::fields::{Backend, Grid, LogSmoothDensity, ScalarField, VectorField};
use crate::models::{EntropyModel, JetMode, LocalPart, ModelKind};
use crate::potential::ExternalPotential;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// One declarative experiment, as read from a TOML file.
///
/// Every table rejects unknown keys. `grid` and `model` are optional at the
/// parse level because `verify` suites bring their own; the other runners
/// report a missing table as a validation error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub grid: Option<GridSpec>,
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub viscosity: ViscositySpec,
    /// Reduced Planck constant for bridge runs; must equal `√ν` when given.
    pub hbar: Option<f64>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub stationary: StationarySpec,
    pub verify: Option<VerifySpec>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory that relative file paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    Same(T),
    Each([T; 2]),
}

impl<T: Copy> PerAxis<T> {
    fn pair(self) -> [T; 2] {
        match self {
            PerAxis::Same(x) => [x, x],
            PerAxis::Each(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "one")]
    pub dim: usize,
    pub length: PerAxis<f64>,
    pub points: PerAxis<usize>,
}

fn one() -> usize {
    1
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        match self.dim {
            1 => match (self.length, self.points) {
                (PerAxis::Same(l), PerAxis::Same(n)) => Grid::new_1d(l, n),
                _ => Err(Error::Config("grid: a one-dimensional grid takes scalar length and points".into())),
            },
            2 => Grid::new_2d(self.length.pair(), self.points.pair()),
            d => Err(Error::param("grid.dim", format!("must be 1 or 2, got {d}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub k: f64,
    #[serde(default)]
    pub s0: f64,
    #[serde(default)]
    pub local: LocalPart,
}

impl ModelSpec {
    pub fn build(&self) -> Result<EntropyModel> {
        EntropyModel::new(self.kind, self.nu, self.k, self.s0, self.local).map_err(|e| prefix("model", e))
    }
}

/// Initial density and velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `ρ = M/(√(2π)σ) exp(−(x−c)²/2σ²)` along axis 0, uniform velocity.
    Gaussian {
        sigma: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "unit")]
        mass: f64,
        #[serde(default)]
        velocity: f64,
    },
    Uniform {
        #[serde(default = "unit")]
        density: f64,
        #[serde(default)]
        velocity: f64,
    },
    /// Uniform density with `v = ħk`.
    PlaneWave {
        k: f64,
        #[serde(default = "unit")]
        density: f64,
    },
    /// Seeded log-smooth density at rest.
    Random {
        seed: u64,
        modes: Option<usize>,
        #[serde(default = "unit")]
        amplitude: f64,
        mass: Option<f64>,
    },
    /// CSV with header `x,rho` or `x,rho,v`, one row per grid point.
    File { path: PathBuf },
}

fn unit() -> f64 {
    1.0
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Uniform {
            density: 1.0,
            velocity: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    None,
    Harmonic {
        omega: f64,
        #[serde(default)]
        center: f64,
    },
    /// CSV with header `x,V`.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscositySpec {
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub kind: ViscosityKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSpec {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub sample_stride: usize,
    pub branch: Branch,
    pub backend: Backend,
    pub jet: JetMode,
    pub stability_c: f64,
    pub override_stability: bool,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        let d = Integrator::default();
        IntegratorSpec {
            scheme: d.scheme,
            dt: d.dt,
            t_end: d.t_end,
            sample_stride: d.sample_stride,
            branch: d.branch,
            backend: d.backend,
            jet: d.jet,
            stability_c: d.stability_c,
            override_stability: d.override_stability,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationarySpec {
    /// Defaults to the mass of the initial data.
    pub mass: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub dtau: Option<f64>,
    /// Number of levels; more than one needs the Schrödinger–Madelung fluid.
    pub levels: usize,
    pub backend: Backend,
}

impl Default for StationarySpec {
    fn default() -> Self {
        StationarySpec {
            mass: None,
            tol: 1e-9,
            max_iter: 500_000,
            dtau: None,
            levels: 1,
            backend: Backend::Spectral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// `∇·P_rev = ρ∇U` on seeded densities.
    Potentializability,
    /// Generic pipeline against the closed forms.
    ClosedForms,
    /// Additivity and mass-scale properties.
    Uniqueness,
    /// Observed orders of the discretizations.
    Orders,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Potentializability, Suite::ClosedForms, Suite::Uniqueness, Suite::Orders];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Potentializability => "potentializability",
            Suite::ClosedForms => "closed-forms",
            Suite::Uniqueness => "uniqueness",
            Suite::Orders => "orders",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub suite: Suite,
    /// Models to check; an empty list means the suite's default set.
    #[serde(default)]
    pub models: Vec<ModelKind>,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default = "unit")]
    pub nu: f64,
    #[serde(default = "default_n1")]
    pub points_1d: usize,
    #[serde(default = "default_n2")]
    pub points_2d: usize,
    #[serde(default = "default_box")]
    pub length: f64,
}

fn default_seeds() -> u64 {
    20
}
fn default_n1() -> usize {
    256
}
fn default_n2() -> usize {
    64
}
fn default_box() -> f64 {
    2.0 * PI
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    /// Dump fields every `fields_stride` diagnostics samples; 0 disables.
    #[serde(default)]
    pub fields_stride: usize,
}

fn prefix(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } if !field.contains('.') => Error::InvalidParameter {
            field: format!("{section}.{field}"),
            reason,
        },
        Error::InvalidParameter { field, reason } if field.starts_with("local.") => Error::InvalidParameter {
            field: format!("{section}.{field}"),
            reason,
        },
        other => other,
    }
}

fn positive(field: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::param(field, format!("must be positive, got {x}")))
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut s = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        s.base_dir = path.parent().map(Path::to_path_buf);
        Ok(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::Config(format!("scenario `{}` has no [grid] table", self.name)))?
            .build()
    }

    pub fn model(&self) -> Result<EntropyModel> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Config(format!("scenario `{}` has no [model] table", self.name)))?
            .build()
    }

    /// `ħ` for bridge runs: the configured value, else `√ν`.
    pub fn hbar(&self) -> Result<f64> {
        let nu = self.model()?.nu();
        match self.hbar {
            Some(h) => {
                positive("hbar", h)?;
                if (h * h - nu).abs() > 1e-12 * nu.max(1.0) {
                    return Err(Error::param("hbar", format!("bridge runs need hbar² = nu, got {h}² vs {nu}")));
                }
                Ok(h)
            }
            None if nu > 0.0 => Ok(nu.sqrt()),
            None => Err(Error::param("hbar", "required when nu = 0")),
        }
    }

    pub fn potential(&self) -> Result<ExternalPotential> {
        match &self.potential {
            PotentialSpec::None => Ok(ExternalPotential::None),
            PotentialSpec::Harmonic { omega, center } => {
                if !center.is_finite() {
                    return Err(Error::param("potential.center", "must be finite"));
                }
                match ExternalPotential::harmonic(*omega)? {
                    ExternalPotential::Harmonic { omega, .. } => Ok(ExternalPotential::Harmonic {
                        omega,
                        center: *center,
                    }),
                    other => Ok(other),
                }
            }
            PotentialSpec::File { path } => {
                let grid = self.grid()?;
                let cols = read_columns(&self.resolve(path), &["x", "V"], &grid)?;
                Ok(ExternalPotential::Sampled(ScalarField::new(grid, cols[1].clone())?))
            }
        }
    }

    pub fn closure(&self) -> Result<ViscousClosure> {
        ViscousClosure::new(self.viscosity.eta, self.viscosity.kind).map_err(|e| prefix("viscosity", e))
    }

    pub fn system(&self) -> Result<FluidSystem> {
        Ok(FluidSystem::new(self.model()?, self.closure()?, self.potential()?))
    }

    /// Integrator settings with optional command-line overrides.
    pub fn integrator(&self, backend: Option<Backend>, override_stability: bool) -> Result<Integrator> {
        let s = &self.integrator;
        let it = Integrator {
            scheme: s.scheme,
            dt: s.dt,
            t_end: s.t_end,
            sample_stride: s.sample_stride,
            snapshot_stride: 0,
            branch: s.branch,
            backend: backend.unwrap_or(s.backend),
            jet: s.jet,
            stability_c: s.stability_c,
            override_stability: s.override_stability || override_stability,
        };
        it.validate()?;
        Ok(it)
    }

    pub fn initial_state(&self) -> Result<FluidState> {
        let grid = self.grid()?;
        let (rho, v) = match &self.initial {
            InitialSpec::Gaussian {
                sigma,
                center,
                mass,
                velocity,
            } => {
                positive("initial.sigma", *sigma)?;
                positive("initial.mass", *mass)?;
                let (s, c, m) = (*sigma, *center, *mass);
                let rho = ScalarField::from_fn(grid, |p| {
                    let axial = m / ((2.0 * PI).sqrt() * s) * (-(p[0] - c).powi(2) / (2.0 * s * s)).exp();
                    if grid.dim() == 2 {
                        axial / grid.length(1)
                    } else {
                        axial
                    }
                })?;
                (rho, *velocity)
            }
            InitialSpec::Uniform { density, velocity } => {
                positive("initial.density", *density)?;
                (ScalarField::constant(grid, *density), *velocity)
            }
            InitialSpec::PlaneWave { k, density } => {
                positive("initial.density", *density)?;
                if !k.is_finite() {
                    return Err(Error::param("initial.k", "must be finite"));
                }
                (ScalarField::constant(grid, *density), self.hbar()? * k)
            }
            InitialSpec::Random {
                seed,
                modes,
                amplitude,
                mass,
            } => {
                positive("initial.amplitude", *amplitude)?;
                let mut gen = LogSmoothDensity::new(*seed).with_amplitude(*amplitude);
                if let Some(m) = modes {
                    if *m == 0 {
                        return Err(Error::param("initial.modes", "must be at least 1"));
                    }
                    gen = gen.with_max_mode(*m);
                }
                let mut rho = gen.sample(&grid);
                if let Some(m) = mass {
                    positive("initial.mass", *m)?;
                    rho = rho.scale(m / rho.integral());
                }
                (rho, 0.0)
            }
            InitialSpec::File { path } => {
                if grid.dim() != 1 {
                    return Err(Error::Unsupported("file initial data is one-dimensional".into()));
                }
                let path = self.resolve(path);
                let cols = read_columns(&path, &["x", "rho", "v"], &grid)
                    .or_else(|_| read_columns(&path, &["x", "rho"], &grid))?;
                let rho = ScalarField::new(grid, cols[1].clone())?;
                let v = cols.get(2).cloned().unwrap_or_else(|| vec![0.0; grid.len()]);
                return FluidState::new(rho, VectorField::new(grid, vec![v])?, 0.0);
            }
        };
        if !v.is_finite() {
            return Err(Error::param("initial.velocity", "must be finite"));
        }
        let mut comps = vec![vec![0.0; grid.len()]; grid.dim()];
        comps[0] = vec![v; grid.len()];
        FluidState::new(rho, VectorField::new(grid, comps)?, 0.0)
    }
}

/// Reads a headed CSV whose columns are exactly `names`, one row per grid
/// point, with `x` matching the grid coordinates.
fn read_columns(path: &Path, names: &[&str], grid: &Grid) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    if header != names {
        return Err(Error::Config(format!(
            "{}: expected header `{}`, found `{}`",
            path.display(),
            names.join(","),
            header.join(",")
        )));
    }
    let mut cols = vec![Vec::with_capacity(grid.len()); names.len()];
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != names.len() {
            return Err(Error::Config(format!("{}: row {} has {} cells", path.display(), row + 1, cells.len())));
        }
        for (c, cell) in cells.iter().enumerate() {
            let x: f64 = cell
                .parse()
                .map_err(|_| Error::Config(format!("{}: row {}: `{cell}` is not a number", path.display(), row + 1)))?;
            cols[c].push(x);
        }
    }
    if cols[0].len() != grid.len() {
        return Err(Error::Config(format!(
            "{}: {} rows for a grid of {} points",
            path.display(),
            cols[0].len(),
            grid.len()
        )));
    }
    let h = grid.spacing(0);
    for (i, x) in cols[0].iter().enumerate() {
        if (x - grid.coord(0, i)).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::Config(format!(
                "{}: row {}: x = {x} is not the grid point {}",
                path.display(),
                i + 1,
                grid.coord(0, i)
            )));
        }
    }
    Ok(cols)
}
