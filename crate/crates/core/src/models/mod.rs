//! Entropy-functional catalogue and the constitutive pipeline
//! `s(ρ, ∇ρ) → P_rev → U → j_s`.
//!
//! Every catalogue entropy has the form
//! `s = f(ρ)·|∇ρ|² + k ln ρ + s₀ − s̃(ρ)`,
//! so the gradient derivative is `∂₂s = φ(ρ)∇ρ` with `φ = 2f`. The pointwise
//! derivatives are analytic; numerical differentiation only appears where the
//! pipeline takes spatial derivatives of fields.
//!
//! Sign conventions. Schrödinger–Madelung, Landau and Alternative are written
//! with a negative gradient term (`ν ≥ 0`). FisherShannon keeps the positive
//! literal form `ν|∇ρ|²/ρ² + k ln ρ + s₀`; it coincides with
//! Schrödinger–Madelung for `ν_FS = −ν_SchM/8`, `k = 0`. The local part
//! `s̃(ρ)` enters with a minus sign so that the reversible pressure of the
//! Euler kind is `ρ² s̃′(ρ) I`.

mod checks;
mod jet;
mod pipeline;

pub use checks::{
    mass_scale_defect, potentializability_residual, separability_defect, PotentializabilityReport,
};
pub use jet::{DensityJet, JetMode};
pub use pipeline::{
    entropy_current, entropy_density, evaluate, potential_from_jet, pressure_from_jet,
    quantum_potential, reversible_pressure, ConstitutiveBundle, Route,
};

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Euler,
    #[serde(alias = "schm")]
    SchrodingerMadelung,
    Landau,
    Alternative,
    FisherShannon,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Euler,
        ModelKind::SchrodingerMadelung,
        ModelKind::Landau,
        ModelKind::Alternative,
        ModelKind::FisherShannon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Euler => "euler",
            ModelKind::SchrodingerMadelung => "schrodinger-madelung",
            ModelKind::Landau => "landau",
            ModelKind::Alternative => "alternative",
            ModelKind::FisherShannon => "fisher-shannon",
        }
    }

    pub fn entropy_formula(self) -> &'static str {
        match self {
            ModelKind::Euler => "s = -s~(rho)",
            ModelKind::SchrodingerMadelung => "s = -(nu/8) |grad rho|^2 / rho^2 + s0",
            ModelKind::Landau => "s = -(nu/2) |grad rho|^2 + s0",
            ModelKind::Alternative => "s = -(nu/4) |grad rho|^2 / rho + s0",
            ModelKind::FisherShannon => "s = nu |grad rho|^2 / rho^2 + k ln rho + s0 - s~(rho)",
        }
    }

    /// The three named nonlocal fluids, which require `ν ≥ 0`.
    pub fn is_named_fluid(self) -> bool {
        matches!(
            self,
            ModelKind::SchrodingerMadelung | ModelKind::Landau | ModelKind::Alternative
        )
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(ModelKind::Euler),
            "schrodinger-madelung" | "schm" => Ok(ModelKind::SchrodingerMadelung),
            "landau" => Ok(ModelKind::Landau),
            "alternative" => Ok(ModelKind::Alternative),
            "fisher-shannon" => Ok(ModelKind::FisherShannon),
            other => Err(Error::param("model", format!("unknown model `{other}`"))),
        }
    }
}

/// Local entropy part `s̃(ρ)`, parametrized by the pressure law `p = ρ² s̃′`
/// it produces.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LocalPart {
    #[default]
    None,
    /// `s̃ = −p/ρ`, uniform pressure `p`.
    ConstantPressure { p: f64 },
    /// `s̃ = κ ρ^(γ−1)/(γ−1)`, pressure `κ ρ^γ`.
    Polytropic { kappa: f64, gamma: f64 },
    /// `s̃ = c² ln ρ`, pressure `c² ρ`.
    Isothermal { c2: f64 },
}

impl LocalPart {
    /// `(s̃, s̃′)` at density `rho`.
    pub fn eval(&self, rho: f64) -> (f64, f64) {
        match *self {
            LocalPart::None => (0.0, 0.0),
            LocalPart::ConstantPressure { p } => (-p / rho, p / (rho * rho)),
            LocalPart::Polytropic { kappa, gamma } => (
                kappa * rho.powf(gamma - 1.0) / (gamma - 1.0),
                kappa * rho.powf(gamma - 2.0),
            ),
            LocalPart::Isothermal { c2 } => (c2 * rho.ln(), c2 / rho),
        }
    }

    /// `dp/dρ` of the pressure law.
    pub fn sound_speed_sq(&self, rho: f64) -> f64 {
        match *self {
            LocalPart::None | LocalPart::ConstantPressure { .. } => 0.0,
            LocalPart::Polytropic { kappa, gamma } => kappa * gamma * rho.powf(gamma - 1.0),
            LocalPart::Isothermal { c2 } => c2,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be finite"))
            }
        };
        match *self {
            LocalPart::None => Ok(()),
            LocalPart::ConstantPressure { p } => finite("local.p", p),
            LocalPart::Polytropic { kappa, gamma } => {
                finite("local.kappa", kappa)?;
                finite("local.gamma", gamma)?;
                if kappa < 0.0 {
                    return Err(Error::param("local.kappa", "must be non-negative"));
                }
                if (gamma - 1.0).abs() < 1e-12 {
                    return Err(Error::param(
                        "local.gamma",
                        "gamma = 1 is the isothermal law; use law = \"isothermal\"",
                    ));
                }
                Ok(())
            }
            LocalPart::Isothermal { c2 } => {
                finite("local.c2", c2)?;
                if c2 < 0.0 {
                    return Err(Error::param("local.c2", "must be non-negative"));
                }
                Ok(())
            }
        }
    }
}

/// Immutable constitutive specification of a static entropy density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyModel {
    kind: ModelKind,
    nu: f64,
    k: f64,
    s0: f64,
    local: LocalPart,
}

/// Pointwise values of the entropy and its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDerivs {
    pub s: f64,
    /// `∂s/∂ρ`
    pub d1s: f64,
    /// `∂s/∂∇ρ = phi ∇ρ`
    pub phi: f64,
}

impl EntropyModel {
    /// Validating constructor; `k` and the local part are only accepted for
    /// the kinds that carry them, so a stray coefficient is an error rather
    /// than silently ignored.
    pub fn new(kind: ModelKind, nu: f64, k: f64, s0: f64, local: LocalPart) -> Result<Self> {
        if !nu.is_finite() {
            return Err(Error::param("nu", "must be finite"));
        }
        if !k.is_finite() {
            return Err(Error::param("k", "must be finite"));
        }
        if !s0.is_finite() {
            return Err(Error::param("s0", "must be finite"));
        }
        if kind.is_named_fluid() && nu < 0.0 {
            return Err(Error::param(
                "nu",
                format!("{} requires nu >= 0, got {nu}", kind.name()),
            ));
        }
        if kind == ModelKind::Euler && nu != 0.0 {
            return Err(Error::param("nu", "the euler kind has no gradient term; nu must be 0"));
        }
        if kind != ModelKind::FisherShannon && k != 0.0 {
            return Err(Error::param(
                "k",
                format!("the Shannon coefficient only applies to fisher-shannon, not {}", kind.name()),
            ));
        }
        if local != LocalPart::None && !matches!(kind, ModelKind::Euler | ModelKind::FisherShannon) {
            return Err(Error::param(
                "local",
                format!("a local part only applies to euler and fisher-shannon, not {}", kind.name()),
            ));
        }
        local.validate()?;
        Ok(EntropyModel {
            kind,
            nu,
            k,
            s0,
            local,
        })
    }

    pub fn schrodinger_madelung(nu: f64) -> Result<Self> {
        Self::new(ModelKind::SchrodingerMadelung, nu, 0.0, 0.0, LocalPart::None)
    }

    pub fn landau(nu: f64) -> Result<Self> {
        Self::new(ModelKind::Landau, nu, 0.0, 0.0, LocalPart::None)
    }

    pub fn alternative(nu: f64) -> Result<Self> {
        Self::new(ModelKind::Alternative, nu, 0.0, 0.0, LocalPart::None)
    }

    pub fn fisher_shannon(nu: f64, k: f64, s0: f64) -> Result<Self> {
        Self::new(ModelKind::FisherShannon, nu, k, s0, LocalPart::None)
    }

    pub fn euler(local: LocalPart) -> Result<Self> {
        Self::new(ModelKind::Euler, 0.0, 0.0, 0.0, local)
    }

    pub fn with_s0(self, s0: f64) -> Result<Self> {
        Self::new(self.kind, self.nu, self.k, s0, self.local)
    }

    pub fn with_local(self, local: LocalPart) -> Result<Self> {
        Self::new(self.kind, self.nu, self.k, self.s0, local)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn local(&self) -> LocalPart {
        self.local
    }

    /// Coefficient `f(ρ)` of `|∇ρ|²` in the entropy density.
    fn gradient_coefficient(&self, rho: f64) -> (f64, f64) {
        // (f, f') with f' = df/dρ
        let nu = self.nu;
        match self.kind {
            ModelKind::Euler => (0.0, 0.0),
            ModelKind::SchrodingerMadelung => {
                (-nu / 8.0 / (rho * rho), nu / 4.0 / (rho * rho * rho))
            }
            ModelKind::Landau => (-nu / 2.0, 0.0),
            ModelKind::Alternative => (-nu / 4.0 / rho, nu / 4.0 / (rho * rho)),
            ModelKind::FisherShannon => (nu / (rho * rho), -2.0 * nu / (rho * rho * rho)),
        }
    }

    /// Local (gradient-free) part: `(s_loc, ∂ρ s_loc)`.
    pub fn local_terms(&self, rho: f64) -> (f64, f64) {
        let (st, dst) = self.local.eval(rho);
        let (sk, dsk) = if self.k != 0.0 {
            (self.k * rho.ln(), self.k / rho)
        } else {
            (0.0, 0.0)
        };
        (sk + self.s0 - st, dsk - dst)
    }

    /// `s`, `∂₁s`, and `φ` (with `∂₂s = φ∇ρ`) at one point.
    pub fn point(&self, rho: f64, grad_sq: f64) -> PointDerivs {
        let (f, df) = self.gradient_coefficient(rho);
        let (sl, dsl) = self.local_terms(rho);
        PointDerivs {
            s: f * grad_sq + sl,
            d1s: df * grad_sq + dsl,
            phi: 2.0 * f,
        }
    }

    /// Closed-form reversible pressure at one point, packed as the symmetric
    /// components (`[xx]` or `[xx, xy, yy]`). `hess` uses the same packing.
    pub fn pressure_closed_point(&self, dim: usize, rho: f64, grad: [f64; 2], hess: [f64; 3]) -> [f64; 3] {
        let lap = if dim == 1 { hess[0] } else { hess[0] + hess[2] };
        let g = |i: usize, j: usize| grad[i] * grad[j];
        let h = |i: usize, j: usize| {
            if dim == 1 {
                hess[0]
            } else {
                hess[i + j]
            }
        };
        let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        let (_, dsl) = self.local_terms(rho);
        let p_loc = -rho * rho * dsl;
        let nonlocal = |i: usize, j: usize| -> f64 {
            match self.kind {
                ModelKind::Euler => 0.0,
                ModelKind::SchrodingerMadelung => {
                    -self.nu / 8.0 * (lap * delta(i, j) + h(i, j) - 2.0 * g(i, j) / rho)
                }
                ModelKind::FisherShannon => {
                    self.nu * (lap * delta(i, j) + h(i, j) - 2.0 * g(i, j) / rho)
                }
                ModelKind::Landau => -self.nu * rho * rho / 2.0 * (lap * delta(i, j) + h(i, j)),
                ModelKind::Alternative => {
                    -self.nu / 4.0 * (rho * (lap * delta(i, j) + h(i, j)) - g(i, j))
                }
            }
        };
        let mut out = [0.0; 3];
        if dim == 1 {
            out[0] = nonlocal(0, 0) + p_loc;
        } else {
            out[0] = nonlocal(0, 0) + p_loc;
            out[1] = nonlocal(0, 1);
            out[2] = nonlocal(1, 1) + p_loc;
        }
        out
    }

    /// Closed-form potential at one point from `ρ`, `|∇ρ|²` and `Δρ`.
    pub fn potential_closed_point(&self, rho: f64, grad_sq: f64, lap: f64) -> f64 {
        let (sl, dsl) = self.local_terms(rho);
        let u_loc = -(sl + rho * dsl);
        let u_nl = match self.kind {
            ModelKind::Euler => 0.0,
            ModelKind::SchrodingerMadelung => -self.nu / (4.0 * rho) * (lap - grad_sq / (2.0 * rho)),
            ModelKind::FisherShannon => 2.0 * self.nu / rho * (lap - grad_sq / (2.0 * rho)),
            ModelKind::Landau => -self.nu * rho * lap - self.nu / 2.0 * grad_sq,
            ModelKind::Alternative => -self.nu / 2.0 * lap,
        };
        u_nl + u_loc
    }

    /// Closed-form coefficient `c(ρ) = ρ²φ/2` of `∇ρ(∇·v) + ∇ρ·∇v` in the
    /// entropy current.
    pub fn current_coefficient_closed(&self, rho: f64) -> f64 {
        match self.kind {
            ModelKind::Euler => 0.0,
            ModelKind::SchrodingerMadelung => -self.nu / 8.0,
            ModelKind::Landau => -self.nu * rho * rho / 2.0,
            ModelKind::Alternative => -self.nu * rho / 4.0,
            ModelKind::FisherShannon => self.nu,
        }
    }

    /// Strength of the dispersive term for time-step control: the
    /// coefficient `a` of the linearized `ω = a k²` at density `rho`.
    pub fn dispersion_coefficient(&self, rho: f64) -> f64 {
        match self.kind {
            ModelKind::Euler => 0.0,
            ModelKind::SchrodingerMadelung => self.nu.sqrt() / 2.0,
            ModelKind::FisherShannon => (8.0 * self.nu.abs()).sqrt() / 2.0,
            ModelKind::Landau => self.nu.sqrt() * rho,
            ModelKind::Alternative => (self.nu * rho / 2.0).sqrt(),
        }
    }

    /// Squared sound speed of the local pressure law at `rho`.
    pub fn sound_speed_sq(&self, rho: f64) -> f64 {
        let shannon = if self.kind == ModelKind::FisherShannon { -self.k } else { 0.0 };
        (self.local.sound_speed_sq(rho) + shannon).max(0.0)
    }
}

/// Smallest admissible density: `1e-12 · mean(ρ)`.
pub fn density_floor(rho: &ScalarField) -> f64 {
    1e-12 * rho.mean()
}

/// Rejects densities at or below the floor, naming the first offending point.
pub fn check_density(rho: &ScalarField) -> Result<()> {
    let floor = density_floor(rho);
    match rho.values().iter().position(|&r| !(r > floor) || r <= 0.0) {
        None => Ok(()),
        Some(index) => Err(Error::DensityFloor {
            index,
            value: rho.values()[index],
            floor,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_names_fields() {
        match EntropyModel::schrodinger_madelung(-1.0) {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "nu"),
            other => panic!("{other:?}"),
        }
        assert!(EntropyModel::new(ModelKind::Landau, 1.0, 0.5, 0.0, LocalPart::None).is_err());
        assert!(EntropyModel::new(
            ModelKind::Alternative,
            1.0,
            0.0,
            0.0,
            LocalPart::Isothermal { c2: 1.0 }
        )
        .is_err());
        assert!(EntropyModel::fisher_shannon(-2.0, 1.0, 0.3).is_ok());
        assert!(EntropyModel::euler(LocalPart::Polytropic { kappa: 1.0, gamma: 1.0 }).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
        }
        assert_eq!("schm".parse::<ModelKind>().unwrap(), ModelKind::SchrodingerMadelung);
    }

    #[test]
    fn local_part_derivatives_match_finite_differences() {
        let laws = [
            LocalPart::ConstantPressure { p: 1.3 },
            LocalPart::Polytropic { kappa: 0.7, gamma: 5.0 / 3.0 },
            LocalPart::Isothermal { c2: 2.0 },
        ];
        for law in laws {
            let r = 0.8;
            let e = 1e-6;
            let fd = (law.eval(r + e).0 - law.eval(r - e).0) / (2.0 * e);
            assert!((fd - law.eval(r).1).abs() < 1e-8, "{law:?}");
            let p = |x: f64| x * x * law.eval(x).1;
            let dp = (p(r + e) - p(r - e)) / (2.0 * e);
            assert!((dp - law.sound_speed_sq(r)).abs() < 1e-8, "{law:?}");
        }
    }

    #[test]
    fn pointwise_derivatives_match_finite_differences() {
        let models = [
            EntropyModel::schrodinger_madelung(1.3).unwrap(),
            EntropyModel::landau(0.7).unwrap(),
            EntropyModel::alternative(2.1).unwrap(),
            EntropyModel::fisher_shannon(0.4, 0.9, 0.2).unwrap(),
            EntropyModel::euler(LocalPart::Polytropic { kappa: 1.0, gamma: 2.0 }).unwrap(),
        ];
        let (r, gx) = (1.7, 0.6);
        let e = 1e-6;
        for m in models {
            let p = m.point(r, gx * gx);
            let d1 = (m.point(r + e, gx * gx).s - m.point(r - e, gx * gx).s) / (2.0 * e);
            let d2 = (m.point(r, (gx + e).powi(2)).s - m.point(r, (gx - e).powi(2)).s) / (2.0 * e);
            assert!((d1 - p.d1s).abs() < 1e-7, "{:?}", m.kind());
            assert!((d2 - p.phi * gx).abs() < 1e-7, "{:?}", m.kind());
        }
    }

    #[test]
    fn floor_rejects_tiny_density() {
        let g = crate::fields::Grid::new_1d(1.0, 8).unwrap();
        let mut v = vec![1.0; 8];
        v[5] = 1e-14;
        let rho = ScalarField::new(g, v).unwrap();
        match check_density(&rho) {
            Err(Error::DensityFloor { index, .. }) => assert_eq!(index, 5),
            other => panic!("{other:?}"),
        }
    }
}
