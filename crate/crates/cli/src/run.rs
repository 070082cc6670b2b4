//! Experiment dispatch and output.

use std::fs;
use std::path::PathBuf;

use symbill_core::experiments::{
    constants_estimate, constants_experiment, demo_constant_width, duality_check,
    eps_decay_experiment, escape_experiment, orbit_experiment, periodic_bound_experiment,
    shadow_experiment,
};
use symbill_core::{ConvexBody, ExperimentReport, Point};

use crate::config::{Experiment, RunConfig};
use crate::output::{body_outline, write_json, write_orbit_csv, write_scatter_svg};
use crate::CliError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

const OUTLINE_POINTS: usize = 360;

#[derive(Debug)]
pub struct RunOutcome {
    pub report: ExperimentReport,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

fn start_point(x0: &Option<Vec<f64>>, radius: f64, dim: usize) -> Point {
    match x0 {
        Some(x) => Point::from_vec(x.clone()),
        None => {
            let mut p = Point::zeros(dim);
            p[0] = radius;
            p
        }
    }
}

/// Runs the configured experiment and writes its outputs.
pub fn execute(config: &RunConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let body = config.body.build()?;
    let opts = config.solver.options();
    let seed = config.seed;
    let mut report = match &config.experiment {
        Experiment::Orbit { x0, radius, steps } => {
            orbit_experiment(&body, &start_point(x0, *radius, body.dim()), *steps, &opts)?
        }
        Experiment::Shadow { radii, samples, check_constants, constants_samples } => {
            let k = if *check_constants {
                Some(constants_estimate(&body, *constants_samples, &[], &opts)?)
            } else {
                None
            };
            if let Some(k) = &k {
                if radii[0] <= k.radius_threshold() {
                    return Err(CliError::Validation(format!(
                        "smallest radius {} is not beyond 1/Δ = {}",
                        radii[0],
                        k.radius_threshold()
                    )));
                }
            }
            shadow_experiment(&body, radii, *samples, seed, k.as_ref(), &opts)?
        }
        Experiment::EpsDecay { radii, samples, check_constants, constants_samples } => {
            let k = if *check_constants {
                Some(constants_estimate(&body, *constants_samples, &[], &opts)?)
            } else {
                None
            };
            eps_decay_experiment(&body, radii, *samples, seed, k.as_ref(), &opts)?
        }
        Experiment::Escape { x0, radius, steps, constants_samples } => {
            let k = constants_estimate(&body, *constants_samples, &[], &opts)?;
            escape_experiment(&body, &start_point(x0, *radius, body.dim()), *steps, &k, &opts)?
        }
        Experiment::Periodic { k, starts, constants_samples } => {
            let c = constants_estimate(&body, *constants_samples, &[*k], &opts)?;
            periodic_bound_experiment(&body, *k, *starts, seed, &c, &opts)?
        }
        Experiment::DualityCheck { samples } => duality_check(&body, *samples, seed)?,
        Experiment::Constants { samples, k_list } => {
            constants_experiment(&body, *samples, k_list, &opts)?
        }
        Experiment::Demo { radius, steps } => {
            let symbill_core::BodySpec::ConstantWidth2d { eps } = config.body else {
                unreachable!("validated above");
            };
            demo_constant_width(eps, *radius, *steps, &opts)?
        }
    };
    report.seed = seed;
    let files = write_outputs(config, &body, &report)?;
    Ok(RunOutcome { report, files })
}

fn write_outputs(
    config: &RunConfig,
    body: &ConvexBody,
    report: &ExperimentReport,
) -> Result<Vec<PathBuf>, CliError> {
    let out = &config.output;
    if !(out.json || out.csv || out.svg) {
        return Ok(Vec::new());
    }
    fs::create_dir_all(&out.dir)?;
    let mut files = Vec::new();
    if out.json {
        let path = out.dir.join("report.json");
        let doc = serde_json::json!({ "config": config.echo(), "report": report });
        write_json(&doc, &path)?;
        files.push(path);
    }
    if let Some(record) = &report.orbit {
        if out.csv {
            let path = out.dir.join("orbit.csv");
            write_orbit_csv(record, &path)?;
            files.push(path);
        }
        if out.svg {
            let path = out.dir.join("scatter.svg");
            let points: Vec<(f64, f64)> = record.points.iter().map(|p| (p[0], p[1])).collect();
            let outline = body_outline(body, OUTLINE_POINTS)?;
            let notes = vec![
                format!("{} — {}", report.experiment, body.label()),
                format!("{} points", points.len()),
            ];
            write_scatter_svg(&points, &outline, &notes, &path)?;
            files.push(path);
        }
    }
    Ok(files)
}

/// Runs and maps the outcome to the exit-code contract: 0 all verdicts pass,
/// 1 some verdict fails, 2 configuration or numerical error.
pub fn run(config: &RunConfig, quiet: bool) -> i32 {
    match execute(config) {
        Ok(outcome) => {
            if !quiet {
                print_summary(&outcome);
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn print_summary(outcome: &RunOutcome) {
    let r = &outcome.report;
    println!("{} on {} (seed {})", r.experiment, r.body, r.seed);
    for (k, v) in &r.summary {
        println!("  {k} = {v:e}");
    }
    for v in &r.verdicts {
        println!(
            "  {} {}: {:e} (threshold {:e}) {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.value,
            v.threshold,
            v.detail
        );
    }
    if r.truncated {
        println!("  truncated by step budget");
    }
    for f in &outcome.files {
        println!("  wrote {}", f.display());
    }
}
