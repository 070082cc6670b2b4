//! Escape-rate bound along long orbits, and the constant-width demo.

use serde_json::json;

use super::{ConstantsReport, ExperimentOptions, ExperimentReport, Table, Verdict};
use crate::body::ConvexBody;
use crate::duality::HamiltonianAtInfinity;
use crate::dynamics::{orbit, t2, OrbitRecord, SolverSettings};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Per-step rows kept in report tables; summaries use every step.
const MAX_TABLE_ROWS: usize = 10_000;
const DEMO_RADIUS_TOL: f64 = 0.01;
const DEMO_ANGLE_TOL: f64 = 0.02;
const DIAMETER_SAMPLES: usize = 720;
const REFLECTION_LAW_TOL: f64 = 1e-9;

fn run_orbit(
    body: &ConvexBody,
    x0: &Point,
    k_steps: usize,
    opts: &ExperimentOptions,
) -> Result<(OrbitRecord, bool)> {
    let steps = opts.step_budget.map_or(k_steps, |b| b.min(k_steps));
    let record = orbit(body, x0, steps, &opts.solver)?;
    if let Some(f) = &record.failure {
        return Err(Error::Consistency(format!(
            "orbit of {} from {:?} failed at step {}: {}",
            body.label(),
            x0.as_slice(),
            f.step,
            f.message
        )));
    }
    Ok((record, steps < k_steps))
}

fn stride(n: usize) -> usize {
    n.div_ceil(MAX_TABLE_ROWS).max(1)
}

pub fn escape_experiment(
    body: &ConvexBody,
    x0: &Point,
    k_steps: usize,
    constants: &ConstantsReport,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    if k_steps == 0 {
        return Err(Error::Validation("escape experiment needs k_steps ≥ 1".into()));
    }
    let h = HamiltonianAtInfinity::new(body);
    let h0 = h.value(x0)?;
    let threshold = constants.mu * constants.big_delta_inv;
    if h0 < threshold {
        return Err(Error::Validation(format!(
            "|x0|_H = {h0} is below μ/Δ = {threshold}"
        )));
    }
    let (record, truncated) = run_orbit(body, x0, k_steps, opts)?;
    let mut report = ExperimentReport::new(
        "escape",
        body.label(),
        0,
        json!({ "x0": x0.as_slice(), "k_steps": k_steps, "options": opts }),
    );
    report.truncated = truncated;
    let c_bar = constants.c_bar;
    let sq0 = h0 * h0;
    let r0 = x0.norm();
    let mut max_increment: f64 = 0.0;
    let mut max_running: f64 = 0.0;
    let mut c_fit: f64 = 0.0;
    let every = stride(record.steps());
    let mut table = Table::new("steps", &["k", "H", "increment", "running"]);
    for k in 1..record.points.len() {
        let sq = record.h_values[k].powi(2);
        let increment = sq - record.h_values[k - 1].powi(2);
        let running = (sq - sq0).abs() / k as f64;
        max_increment = max_increment.max(increment.abs());
        max_running = max_running.max(running);
        c_fit = c_fit.max((record.points[k].norm() - r0) / (k as f64).sqrt());
        if k % every == 0 || k + 1 == record.points.len() {
            table.push(vec![k as f64, record.h_values[k], increment, running]);
        }
    }
    let hs = &record.h_values;
    let h_max = hs.iter().cloned().fold(f64::MIN, f64::max);
    let h_min = hs.iter().cloned().fold(f64::MAX, f64::min);
    report.summary.insert("C_bar".into(), c_bar);
    report.summary.insert("max_increment".into(), max_increment);
    report.summary.insert("max_running".into(), max_running);
    report.summary.insert("c_fit".into(), c_fit);
    report.summary.insert("H_relative_variation".into(), (h_max - h_min) / h0);
    report.summary.insert("steps".into(), record.steps() as f64);
    report.summary.insert("residual_max".into(), record.residual_max);
    report.verdicts.push(Verdict::at_most(
        "increment_below_C_bar",
        max_increment,
        c_bar,
        "max single-step | |x_(k+1)|_H² − |x_k|_H² |",
    ));
    report.verdicts.push(Verdict::at_most(
        "running_below_C_bar",
        max_running,
        c_bar,
        "max over k of | |x_k|_H² − |x_0|_H² | / k",
    ));
    report.tables.push(table);
    report.orbit = Some(record);
    Ok(report)
}

/// Plain orbit run, checking the reflection law and `|T²x − x| ≤ 2·diam(M)` per step.
pub fn orbit_experiment(
    body: &ConvexBody,
    x0: &Point,
    steps: usize,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let (record, truncated) = run_orbit(body, x0, steps, opts)?;
    let c1 = body.diameter(DIAMETER_SAMPLES)?;
    let mut report = ExperimentReport::new(
        "orbit",
        body.label(),
        0,
        json!({ "x0": x0.as_slice(), "steps": steps, "options": opts }),
    );
    report.truncated = truncated;
    // Each recorded step is re-solved cold at default settings, so loose
    // solver overrides show up here.
    let strict = SolverSettings { warm_start: false, ..SolverSettings::default() };
    let mut law: f64 = 0.0;
    let mut displacement: f64 = 0.0;
    for j in 0..record.steps() {
        let x = &record.points[j];
        let want = t2(body, x, &strict)?;
        law = law.max((&record.points[j + 1] - want).norm() / x.norm().max(1.0));
        displacement = displacement.max((&record.points[j + 1] - x).norm());
    }
    let hs = &record.h_values;
    let h_max = hs.iter().cloned().fold(f64::MIN, f64::max);
    let h_min = hs.iter().cloned().fold(f64::MAX, f64::min);
    report.summary.insert("H_relative_variation".into(), (h_max - h_min) / hs[0]);
    report.summary.insert("residual_max".into(), record.residual_max);
    report.summary.insert("diameter".into(), c1);
    report.verdicts.push(Verdict::at_most(
        "reflection_law",
        law,
        REFLECTION_LAW_TOL,
        "max |T²x − T²x at default settings| / max(1, |x|)",
    ));
    report.verdicts.push(Verdict::at_most(
        "displacement",
        displacement,
        2.0 * c1 * (1.0 + 1e-9),
        "max |T²x − x| against 2·diam(M)",
    ));
    report.orbit = Some(record);
    Ok(report)
}

/// Orbit about the smooth constant-width body `p(θ) = 1 + ε cos 3θ` from
/// `(radius, 0)`; far away `T²` is a uniform rotation.
pub fn demo_constant_width(
    eps: f64,
    radius: f64,
    steps: usize,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let body = ConvexBody::constant_width(eps)?;
    let x0 = Point::from_vec(vec![radius, 0.0]);
    let (record, truncated) = run_orbit(&body, &x0, steps, opts)?;
    let mut report = ExperimentReport::new(
        "demo",
        body.label(),
        0,
        json!({ "eps": eps, "radius": radius, "steps": steps, "options": opts }),
    );
    report.truncated = truncated;
    let norms: Vec<f64> = record.points.iter().map(|p| p.norm()).collect();
    let angles: Vec<f64> = record
        .points
        .windows(2)
        .map(|w| {
            // Clockwise turn of T²; wrapped to (−π, π].
            let a = w[0][1].atan2(w[0][0]) - w[1][1].atan2(w[1][0]);
            (a + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI
        })
        .collect();
    let r_max = norms.iter().cloned().fold(f64::MIN, f64::max);
    let r_min = norms.iter().cloned().fold(f64::MAX, f64::min);
    let radius_drift = (r_max - r_min) / radius;
    report.summary.insert("radius_drift".into(), radius_drift);
    if !angles.is_empty() {
        let mean = angles.iter().sum::<f64>() / angles.len() as f64;
        let a_max = angles.iter().cloned().fold(f64::MIN, f64::max);
        let a_min = angles.iter().cloned().fold(f64::MAX, f64::min);
        report.summary.insert("mean_angle".into(), mean);
        report.summary.insert("expected_angle".into(), 4.0 / radius);
        report.summary.insert("angle_variation".into(), (a_max - a_min) / mean.abs());
        report.verdicts.push(Verdict::at_most(
            "uniform_angle",
            (a_max - a_min) / mean.abs(),
            DEMO_ANGLE_TOL,
            "(max − min)/mean of the angle turned per T²-step",
        ));
    }
    report.verdicts.push(Verdict::at_most(
        "radius_drift",
        radius_drift,
        DEMO_RADIUS_TOL,
        "(max − min)/radius of |x_k|",
    ));
    let every = stride(norms.len());
    let mut table = Table::new("steps", &["k", "x_1", "x_2", "norm"]);
    for (k, (p, n)) in record.points.iter().zip(&norms).enumerate() {
        if k % every == 0 || k + 1 == norms.len() {
            table.push(vec![k as f64, p[0], p[1], *n]);
        }
    }
    report.tables.push(table);
    report.orbit = Some(record);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::constants_estimate;

    #[test]
    fn demo_is_uniform_rotation() {
        let rep = demo_constant_width(0.1, 100.0, 300, &ExperimentOptions::default()).unwrap();
        assert!(rep.passed(), "{:?}", rep.verdicts);
        let mean = rep.summary["mean_angle"];
        assert!((mean - 0.04).abs() < 0.002);
    }

    #[test]
    fn demo_on_the_circle_is_exact() {
        let rep = demo_constant_width(0.0, 50.0, 100, &ExperimentOptions::default()).unwrap();
        assert!(rep.summary["radius_drift"] < 1e-8);
        assert!(rep.summary["angle_variation"] < 1e-8);
    }

    #[test]
    fn circle_escape_increments_vanish() {
        let circle = ConvexBody::unit_circle();
        let k = constants_estimate(&circle, 120, &[3], &ExperimentOptions::default()).unwrap();
        let x0 = Point::from_vec(vec![0.0, 40.0]);
        let rep = escape_experiment(&circle, &x0, 200, &k, &ExperimentOptions::default()).unwrap();
        assert!(rep.summary["max_increment"] < 1e-8 * 6400.0);
        assert!(rep.passed());
        assert!(escape_experiment(&circle, &Point::from_vec(vec![1.5, 0.0]), 10, &k, &ExperimentOptions::default()).is_err());
    }

    #[test]
    fn orbit_experiment_checks_pass() {
        let body = ConvexBody::ellipsoid(vec![1.0, 0.8, 1.2, 0.9]).unwrap();
        let x0 = Point::from_vec(vec![4.0, 1.0, -2.0, 0.5]);
        let rep = orbit_experiment(&body, &x0, 50, &ExperimentOptions::default()).unwrap();
        assert!(rep.passed(), "{:?}", rep.verdicts);
        assert_eq!(rep.orbit.as_ref().unwrap().points.len(), 51);
    }

    #[test]
    fn step_budget_truncates() {
        let opts = ExperimentOptions { step_budget: Some(10), ..Default::default() };
        let rep = demo_constant_width(0.1, 100.0, 50, &opts).unwrap();
        assert!(rep.truncated);
        assert_eq!(rep.table("steps").unwrap().rows.len(), 11);
    }
}
