//! Declarative experiments: TOML configuration, bundled scenarios, runners
//! and CSV output.
//!
//! A scenario file has a top-level `name` and the tables `[grid]`,
//! `[model]`, `[initial]`, `[potential]`, `[viscosity]`, `[integrator]`,
//! `[stationary]`, `[verify]` and `[output]`; see [`Scenario`] for the keys.
//! Unknown keys anywhere are rejected.

mod config;
mod output;
mod run;
mod suites;

pub use config::{
    GridSpec, InitialSpec, IntegratorSpec, ModelSpec, OutputSpec, PerAxis, PotentialSpec, Scenario, StationarySpec,
    Suite, VerifySpec, ViscositySpec,
};
pub use output::{comparison_csv, diagnostics_csv, fields_csv, real, Artifacts, Csv};
pub use run::{
    closed_form_gaussian, list_models, run, run_batch, Command, RunOptions, RunReport, Status,
};
pub use suites::{non_additive_pair, run_suite, Bound, Check};

use crate::error::{Error, Result};

const BUNDLED: [(&str, &str); 9] = [
    ("free-gaussian", include_str!("../../scenarios/free-gaussian.toml")),
    ("coherent-state", include_str!("../../scenarios/coherent-state.toml")),
    ("viscous-gaussian", include_str!("../../scenarios/viscous-gaussian.toml")),
    ("harmonic-spectrum", include_str!("../../scenarios/harmonic-spectrum.toml")),
    ("harmonic-ground-nu4", include_str!("../../scenarios/harmonic-ground-nu4.toml")),
    ("potentializability", include_str!("../../scenarios/potentializability.toml")),
    ("closed-forms", include_str!("../../scenarios/closed-forms.toml")),
    ("uniqueness", include_str!("../../scenarios/uniqueness.toml")),
    ("orders", include_str!("../../scenarios/orders.toml")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// A scenario shipped with the crate, by name.
pub fn bundled(name: &str) -> Result<Scenario> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("no bundled scenario `{name}`; known: {}", bundled_names().join(", "))))?;
    Scenario::from_toml_str(text)
}
