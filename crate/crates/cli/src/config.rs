//! Strict JSON run configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use symbill_core::experiments::MIN_SAMPLES;
use symbill_core::{BodySpec, ExperimentOptions, SolverSettings};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub body: BodySpec,
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_radii() -> Vec<f64> {
    vec![10.0, 20.0, 40.0, 80.0, 160.0]
}
fn default_samples() -> usize {
    64
}
fn default_constants_samples() -> usize {
    400
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Orbit {
        /// Start point; defaults to `radius` along the first axis.
        #[serde(default)]
        x0: Option<Vec<f64>>,
        #[serde(default = "Experiment::default_orbit_radius")]
        radius: f64,
        #[serde(default = "Experiment::default_orbit_steps")]
        steps: usize,
    },
    Shadow {
        #[serde(default = "default_radii")]
        radii: Vec<f64>,
        #[serde(default = "default_samples")]
        samples: usize,
        /// Compare against `(6C + C̃)/r` from a constants estimate.
        #[serde(default = "default_true")]
        check_constants: bool,
        #[serde(default = "default_constants_samples")]
        constants_samples: usize,
    },
    EpsDecay {
        #[serde(default = "default_radii")]
        radii: Vec<f64>,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_true")]
        check_constants: bool,
        #[serde(default = "default_constants_samples")]
        constants_samples: usize,
    },
    Escape {
        #[serde(default)]
        x0: Option<Vec<f64>>,
        #[serde(default = "Experiment::default_escape_radius")]
        radius: f64,
        #[serde(default = "Experiment::default_escape_steps")]
        steps: usize,
        #[serde(default = "default_constants_samples")]
        constants_samples: usize,
    },
    Periodic {
        #[serde(default = "Experiment::default_period")]
        k: usize,
        #[serde(default = "Experiment::default_starts")]
        starts: usize,
        #[serde(default = "default_constants_samples")]
        constants_samples: usize,
    },
    DualityCheck {
        #[serde(default = "Experiment::default_duality_samples")]
        samples: usize,
    },
    Constants {
        #[serde(default = "default_constants_samples")]
        samples: usize,
        #[serde(default = "Experiment::default_k_list")]
        k_list: Vec<usize>,
    },
    /// Uniform rotation at infinity; the body must be `constant_width_2d`.
    Demo {
        #[serde(default = "Experiment::default_demo_radius")]
        radius: f64,
        #[serde(default = "Experiment::default_demo_steps")]
        steps: usize,
    },
}

impl Experiment {
    fn default_orbit_radius() -> f64 {
        10.0
    }
    fn default_orbit_steps() -> usize {
        100
    }
    fn default_escape_radius() -> f64 {
        50.0
    }
    fn default_escape_steps() -> usize {
        10_000
    }
    fn default_period() -> usize {
        3
    }
    fn default_starts() -> usize {
        200
    }
    fn default_duality_samples() -> usize {
        200
    }
    fn default_k_list() -> Vec<usize> {
        vec![3, 5, 7]
    }
    fn default_demo_radius() -> f64 {
        100.0
    }
    fn default_demo_steps() -> usize {
        2000
    }

    /// Subcommand and `name` tag of this experiment.
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Orbit { .. } => "orbit",
            Experiment::Shadow { .. } => "shadow",
            Experiment::EpsDecay { .. } => "eps-decay",
            Experiment::Escape { .. } => "escape",
            Experiment::Periodic { .. } => "periodic",
            Experiment::DualityCheck { .. } => "duality-check",
            Experiment::Constants { .. } => "constants",
            Experiment::Demo { .. } => "demo",
        }
    }

    /// The experiment with every parameter at its default.
    pub fn with_defaults(name: &str) -> Result<Self, CliError> {
        serde_json::from_value(serde_json::json!({ "name": name }))
            .map_err(|e| CliError::Config(format!("experiment: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub residual_tol: f64,
    pub max_iter: usize,
    pub warm_start: bool,
    pub fallback_grid: usize,
    pub flow_tol: f64,
    pub step_budget: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        let o = ExperimentOptions::default();
        Self {
            residual_tol: s.residual_tol,
            max_iter: s.max_iter,
            warm_start: s.warm_start,
            fallback_grid: s.fallback_grid,
            flow_tol: o.flow_tol,
            step_budget: o.step_budget,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> ExperimentOptions {
        ExperimentOptions {
            solver: SolverSettings {
                residual_tol: self.residual_tol,
                max_iter: self.max_iter,
                warm_start: self.warm_start,
                fallback_grid: self.fallback_grid,
            },
            flow_tol: self.flow_tol,
            step_budget: self.step_budget,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            csv: true,
            json: true,
            svg: false,
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig =
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.body.validate().map_err(|e| invalid(format!("body: {e}")))?;
        self.solver
            .options()
            .solver
            .validate()
            .map_err(|e| invalid(format!("solver: {e}")))?;
        if !(self.solver.flow_tol > 0.0) {
            return Err(invalid("solver.flow_tol must be positive"));
        }
        let dim = self.body.build().map_err(|e| invalid(format!("body: {e}")))?.dim();
        let check_x0 = |x0: &Option<Vec<f64>>, radius: f64| -> Result<(), CliError> {
            if let Some(x) = x0 {
                if x.len() != dim {
                    return Err(invalid(format!(
                        "experiment.x0 has {} coordinates, body has {dim}",
                        x.len()
                    )));
                }
            } else if !(radius > 0.0) {
                return Err(invalid("experiment.radius must be positive"));
            }
            Ok(())
        };
        let check_radii = |radii: &[f64], samples: usize| -> Result<(), CliError> {
            if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("experiment.radii must be positive and increasing"));
            }
            if samples == 0 {
                return Err(invalid("experiment.samples must be at least 1"));
            }
            Ok(())
        };
        let check_constants = |n: usize| -> Result<(), CliError> {
            if n < MIN_SAMPLES {
                return Err(invalid(format!(
                    "experiment.constants_samples must be at least {MIN_SAMPLES}"
                )));
            }
            Ok(())
        };
        match &self.experiment {
            Experiment::Orbit { x0, radius, .. } => check_x0(x0, *radius)?,
            Experiment::Shadow { radii, samples, constants_samples, .. }
            | Experiment::EpsDecay { radii, samples, constants_samples, .. } => {
                check_radii(radii, *samples)?;
                check_constants(*constants_samples)?;
            }
            Experiment::Escape { x0, radius, steps, constants_samples } => {
                check_x0(x0, *radius)?;
                check_constants(*constants_samples)?;
                if *steps == 0 {
                    return Err(invalid("experiment.steps must be at least 1"));
                }
            }
            Experiment::Periodic { k, starts, constants_samples } => {
                check_constants(*constants_samples)?;
                if *k == 0 || *starts == 0 {
                    return Err(invalid("experiment.k and experiment.starts must be at least 1"));
                }
            }
            Experiment::DualityCheck { samples } => {
                if *samples == 0 {
                    return Err(invalid("experiment.samples must be at least 1"));
                }
            }
            Experiment::Constants { samples, k_list } => {
                check_constants(*samples)?;
                if k_list.iter().any(|&k| k == 0) {
                    return Err(invalid("experiment.k_list entries must be at least 1"));
                }
            }
            Experiment::Demo { radius, .. } => {
                if !matches!(self.body, BodySpec::ConstantWidth2d { .. }) {
                    return Err(invalid("demo requires a constant_width_2d body"));
                }
                if !(*radius > 0.0) {
                    return Err(invalid("experiment.radius must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Normalized form with every default materialized.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_instance_parses() {
        let c = parse_config(
            r#"{"body":{"kind":"ellipsoid","semi_axes":[1,0.6]},
                "experiment":{"name":"shadow","radii":[10,20,40,80,160],"samples":64},"seed":7}"#,
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.experiment.name(), "shadow");
        assert_eq!(c.solver, SolverConfig::default());
    }

    #[test]
    fn missing_body_names_the_field() {
        let err = parse_config(r#"{"experiment":{"name":"orbit"}}"#).unwrap_err();
        assert!(matches!(err, CliError::Config(ref m) if m.contains("body")), "{err}");
    }

    #[test]
    fn invalid_body_parameters() {
        let err = parse_config(
            r#"{"body":{"kind":"constant_width_2d","eps":0.2},"experiment":{"name":"orbit"}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
    }

    #[test]
    fn unknown_fields_rejected() {
        for text in [
            r#"{"body":{"kind":"pball","p":1.5},"experiment":{"name":"orbit"},"sed":1}"#,
            r#"{"body":{"kind":"pball","p":1.5},"experiment":{"name":"orbit","stepz":1}}"#,
            r#"{"body":{"kind":"pball","p":1.5},"experiment":{"name":"orbit"},"solver":{"tol":1}}"#,
            r#"{"body":{"kind":"pball","p":1.5},"experiment":{"name":"nope"}}"#,
        ] {
            assert!(matches!(parse_config(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn seed_defaults_to_zero_and_echo_round_trips() {
        for name in ["orbit", "shadow", "eps-decay", "escape", "periodic", "duality-check", "constants"] {
            let text = format!(r#"{{"body":{{"kind":"ellipsoid","semi_axes":[1,0.6]}},"experiment":{{"name":"{name}"}}}}"#);
            let c = parse_config(&text).unwrap();
            assert_eq!(c.seed, 0);
            let again = parse_config(&c.echo().to_string()).unwrap();
            assert_eq!(again, c);
            assert_eq!(again.echo(), c.echo());
        }
    }

    #[test]
    fn experiment_specific_checks() {
        let bad = [
            r#"{"body":{"kind":"ellipsoid","semi_axes":[1,0.6]},"experiment":{"name":"orbit","x0":[1,2,3]}}"#,
            r#"{"body":{"kind":"ellipsoid","semi_axes":[1,0.6]},"experiment":{"name":"shadow","radii":[20,10]}}"#,
            r#"{"body":{"kind":"ellipsoid","semi_axes":[1,0.6]},"experiment":{"name":"constants","samples":10}}"#,
            r#"{"body":{"kind":"ellipsoid","semi_axes":[1,0.6]},"experiment":{"name":"demo"}}"#,
            r#"{"body":{"kind":"ellipsoid","semi_axes":[1,0.6]},"experiment":{"name":"orbit"},"solver":{"residual_tol":0}}"#,
        ];
        for text in bad {
            assert!(matches!(parse_config(text), Err(CliError::Validation(_))), "{text}");
        }
    }
}
