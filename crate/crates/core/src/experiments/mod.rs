//! Theorem-level experiments: constants, shadowing, estimate-lemma decay,
//! escape rate, periodic-orbit radius bound and the constant-width demo.

mod constants;
mod duality_check;
mod escape;
mod periodic;
mod shadow;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{OrbitRecord, SolverSettings, DEFAULT_FLOW_TOL};

pub use constants::{constants_estimate, constants_experiment, ConstantsReport, GridPoint, RhoEntry, MIN_SAMPLES};
pub use duality_check::{duality_check, CLOSED_FORM_TOL, FINITE_DIFFERENCE_TOL, PROPOSITION_TOL};
pub use escape::{demo_constant_width, escape_experiment, orbit_experiment};
pub use periodic::periodic_bound_experiment;
pub use shadow::{
    eps_decay_experiment, shadow_experiment, shadow_samples, square_bound_check, ShadowSample,
    SquareBoundReport,
};

/// Solver and integrator settings shared by all experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentOptions {
    pub solver: SolverSettings,
    pub flow_tol: f64,
    /// Cap on `T²`-steps for orbit-based experiments; the report is marked truncated.
    pub step_budget: Option<usize>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            solver: SolverSettings::default(),
            flow_tol: DEFAULT_FLOW_TOL,
            step_budget: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Verdict {
    pub fn at_most(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass: value <= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass: value >= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub body: String,
    pub seed: u64,
    pub parameters: serde_json::Value,
    pub tables: Vec<Table>,
    pub summary: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub truncated: bool,
    /// Orbit behind orbit-based experiments, for the CSV and SVG writers.
    #[serde(skip)]
    pub orbit: Option<OrbitRecord>,
}

impl ExperimentReport {
    pub(crate) fn new(experiment: &str, body: &str, seed: u64, parameters: serde_json::Value) -> Self {
        Self {
            experiment: experiment.to_string(),
            body: body.to_string(),
            seed,
            parameters,
            tables: Vec::new(),
            summary: BTreeMap::new(),
            verdicts: Vec::new(),
            truncated: false,
            orbit: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Worst ratio `(E(r₂)/E(r₁))/(r₁/r₂)` over consecutive radii: at most 1.5
/// means every doubling at least halves `E` within a factor 1.5.
pub(crate) fn decay_excess(radii: &[f64], values: &[f64]) -> f64 {
    radii
        .windows(2)
        .zip(values.windows(2))
        .map(|(r, e)| (e[1] / e[0]) / (r[0] / r[1]))
        .fold(0.0, f64::max)
}

/// Worst-case factor allowed on the per-doubling decay.
pub(crate) const DECAY_FACTOR: f64 = 1.5;
