//! Shadowing of `T²` by the time-one flow, and the estimate-lemma quantities.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{decay_excess, ConstantsReport, ExperimentOptions, ExperimentReport, Table, Verdict, DECAY_FACTOR};
use crate::body::ConvexBody;
use crate::duality::{n_minus, n_plus, HamiltonianAtInfinity};
use crate::dynamics::{flow, reflect_minus, t_step};
use crate::error::{Error, Result};
use crate::geometry::{sphere_sample, Point};

/// Allowed max/min of `r·E(r)` over the radius grid.
const BOUNDED_RATIO: f64 = 4.0;

#[derive(Clone, Debug, Serialize)]
pub struct ShadowSample {
    pub radius: f64,
    pub index: usize,
    pub x: Point,
    pub t2: Point,
    pub phi1: Point,
    pub error: f64,
}

fn check_radii(radii: &[f64], samples: usize) -> Result<()> {
    if radii.is_empty() || samples == 0 {
        return Err(Error::Validation("need at least one radius and one sample".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(Error::Validation("radii must be positive and increasing".into()));
    }
    Ok(())
}

fn annotate(body: &ConvexBody, x: &Point, e: Error) -> Error {
    match e {
        Error::Solver { .. } | Error::Orientation { .. } | Error::Integration(_) | Error::Consistency(_) => {
            Error::Consistency(format!("{} at x = {:?}: {e}", body.label(), x.as_slice()))
        }
        other => other,
    }
}

/// `T²(x)` and `φ₁(x)` at `|x| = r` for seeded directions, in sample order.
pub fn shadow_samples(
    body: &ConvexBody,
    radii: &[f64],
    samples_per_radius: usize,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<Vec<ShadowSample>> {
    check_radii(radii, samples_per_radius)?;
    let h = HamiltonianAtInfinity::new(body);
    let dirs = sphere_sample(body.dim(), samples_per_radius, seed);
    let jobs: Vec<(f64, usize, Point)> = radii
        .iter()
        .flat_map(|&r| dirs.iter().enumerate().map(move |(i, u)| (r, i, u * r)))
        .collect();
    jobs.par_iter()
        .map(|(r, i, x)| {
            let run = || -> Result<ShadowSample> {
                let first = t_step(body, x, &opts.solver, None)?;
                let t2 = t_step(body, &first.image, &opts.solver, Some(&first.reflection.v))?.image;
                let phi1 = flow(&h, x, 1.0, opts.flow_tol)?;
                Ok(ShadowSample {
                    radius: *r,
                    index: *i,
                    x: x.clone(),
                    error: (&t2 - &phi1).norm(),
                    t2,
                    phi1,
                })
            };
            run().map_err(|e| annotate(body, x, e))
        })
        .collect()
}

pub fn shadow_experiment(
    body: &ConvexBody,
    radii: &[f64],
    samples_per_radius: usize,
    seed: u64,
    constants: Option<&ConstantsReport>,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let samples = shadow_samples(body, radii, samples_per_radius, seed, opts)?;
    let mut report = ExperimentReport::new(
        "shadow",
        body.label(),
        seed,
        json!({ "radii": radii, "samples_per_radius": samples_per_radius, "options": opts }),
    );
    let mut per_sample = Table::new("samples", &["radius", "index", "error"]);
    for s in &samples {
        per_sample.push(vec![s.radius, s.index as f64, s.error]);
    }
    let e: Vec<f64> = radii
        .iter()
        .map(|&r| {
            samples
                .iter()
                .filter(|s| s.radius == r)
                .map(|s| s.error)
                .fold(0.0, f64::max)
        })
        .collect();
    let mut by_radius = Table::new("by_radius", &["radius", "E", "rE"]);
    let re: Vec<f64> = radii.iter().zip(&e).map(|(r, e)| r * e).collect();
    for ((r, e), re) in radii.iter().zip(&e).zip(&re) {
        by_radius.push(vec![*r, *e, *re]);
    }
    let re_max = re.iter().cloned().fold(f64::MIN, f64::max);
    let re_min = re.iter().cloned().fold(f64::MAX, f64::min);
    report.summary.insert("rE_max".into(), re_max);
    report.summary.insert("rE_min".into(), re_min);
    report.summary.insert("E_first".into(), e[0]);
    report.summary.insert("E_last".into(), e[e.len() - 1]);
    if radii.len() > 1 {
        report.verdicts.push(Verdict::at_most(
            "rE_bounded",
            re_max / re_min,
            BOUNDED_RATIO,
            "max/min of r·E(r) across the radius grid",
        ));
        report.verdicts.push(Verdict::at_most(
            "E_halves_per_doubling",
            decay_excess(radii, &e),
            DECAY_FACTOR,
            "worst (E(r2)/E(r1))/(r1/r2) over consecutive radii",
        ));
        let (r0, r1) = (radii[0], radii[radii.len() - 1]);
        report.verdicts.push(Verdict::at_most(
            "E_end_decay",
            e[e.len() - 1] / e[0],
            2.0 * r0 / r1,
            "E(r_max)/E(r_min) against 2·r_min/r_max",
        ));
    }
    if let Some(k) = constants {
        let worst = samples
            .iter()
            .map(|s| s.error * s.radius / k.shadow_constant())
            .fold(0.0, f64::max);
        report.verdicts.push(Verdict::at_most(
            "constants_bound",
            worst,
            1.0,
            "max of E·r/(6C + C̃) over samples",
        ));
        report.summary.insert("min_radius_over_threshold".into(), radii[0] / k.radius_threshold());
        // The square lemma in the H-norm with C₂ = μ²(6C + C̃) and Λ = Δ/μ.
        let h = HamiltonianAtInfinity::new(body);
        let pairs: Vec<(Point, Point)> = samples.iter().map(|s| (s.t2.clone(), s.phi1.clone())).collect();
        let c2 = k.mu * k.mu * k.shadow_constant();
        let lambda = 1.0 / (k.big_delta_inv * k.mu);
        let square = square_bound_check(&pairs, c2, lambda, |p| h.value(p).unwrap_or(f64::NAN));
        report.summary.insert("square_checked".into(), square.checked as f64);
        report.summary.insert("square_skipped".into(), square.skipped.len() as f64);
        report.verdicts.push(Verdict::at_most(
            "square_bound",
            square.worst_ratio,
            1.0,
            "max ||a|_H² − |b|_H²|/(2C₂ + 3C₂²Λ²) over pairs (T²x, φ₁x)",
        ));
    }
    report.tables.push(by_radius);
    report.tables.push(per_sample);
    Ok(report)
}

pub fn eps_decay_experiment(
    body: &ConvexBody,
    radii: &[f64],
    samples: usize,
    seed: u64,
    constants: Option<&ConstantsReport>,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    check_radii(radii, samples)?;
    let dirs = sphere_sample(body.dim(), samples, seed);
    let jobs: Vec<(f64, usize, Point)> = radii
        .iter()
        .flat_map(|&r| dirs.iter().enumerate().map(move |(i, u)| (r, i, u * r)))
        .collect();
    let rows: Vec<Result<[f64; 5]>> = jobs
        .par_iter()
        .map(|(r, i, x)| {
            let run = || -> Result<[f64; 5]> {
                let step = t_step(body, x, &opts.solver, None)?;
                let y = step.image;
                let m_y = reflect_minus(body, &y, &opts.solver, Some(&step.reflection.v))?.m;
                let n_mx = n_minus(body, x)?;
                let n_my = n_minus(body, &y)?;
                let q1 = (&n_mx - &step.reflection.m).norm();
                let q2 = (&m_y - &n_my).norm();
                let q3 = (&n_my - n_plus(body, x)?).norm();
                Ok([*r, *i as f64, q1, q2, q3])
            };
            run().map_err(|e| annotate(body, x, e))
        })
        .collect();
    let mut per_sample = Table::new("samples", &["radius", "index", "q1", "q2", "q3"]);
    for row in rows {
        per_sample.push(row?.to_vec());
    }
    let mut report = ExperimentReport::new(
        "eps_decay",
        body.label(),
        seed,
        json!({ "radii": radii, "samples": samples, "options": opts }),
    );
    let mut by_radius = Table::new("by_radius", &["radius", "q1", "q2", "q3"]);
    let mut maxima = vec![Vec::new(); 3];
    for &r in radii {
        let mut row = vec![r];
        for (q, max) in maxima.iter_mut().enumerate() {
            let v = per_sample
                .rows
                .iter()
                .filter(|s| s[0] == r)
                .map(|s| s[2 + q])
                .fold(0.0, f64::max);
            max.push(v);
            row.push(v);
        }
        by_radius.push(row);
    }
    if radii.len() > 1 {
        for (q, max) in maxima.iter().enumerate() {
            report.verdicts.push(Verdict::at_most(
                &format!("q{}_halves_per_doubling", q + 1),
                decay_excess(radii, max),
                DECAY_FACTOR,
                "worst (q(r2)/q(r1))/(r1/r2) over consecutive radii",
            ));
            report.verdicts.push(Verdict::at_most(
                &format!("q{}_decays", q + 1),
                max[max.len() - 1] / max[0],
                1.0,
                "q(r_max)/q(r_min)",
            ));
        }
    }
    if let Some(k) = constants {
        let worst = per_sample
            .rows
            .iter()
            .map(|s| s[2] * s[0] / k.c)
            .fold(0.0, f64::max);
        report.verdicts.push(Verdict::at_most(
            "q1_below_C_over_r",
            worst,
            1.0,
            "max of q1·r/C over samples",
        ));
    }
    report.tables.push(by_radius);
    report.tables.push(per_sample);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SquareBoundReport {
    pub checked: usize,
    /// Pairs failing the hypothesis `|a − b| ≤ C/|b|, |b| ≥ 1/Λ`.
    pub skipped: Vec<usize>,
    pub violations: Vec<usize>,
    /// Max of `||a|² − |b|²| / (2C + 3C²Λ²)` over checked pairs.
    pub worst_ratio: f64,
    pub pass: bool,
}

/// Checks `||a|² − |b|²| ≤ 2C + 3C²Λ²` for pairs meeting the hypothesis.
pub fn square_bound_check<N>(pairs: &[(Point, Point)], c: f64, lambda: f64, norm: N) -> SquareBoundReport
where
    N: Fn(&Point) -> f64,
{
    let bound = 2.0 * c + 3.0 * c * c * lambda * lambda;
    let mut report = SquareBoundReport {
        checked: 0,
        skipped: Vec::new(),
        violations: Vec::new(),
        worst_ratio: 0.0,
        pass: true,
    };
    for (i, (a, b)) in pairs.iter().enumerate() {
        let nb = norm(b);
        if norm(&(a - b)) > c / nb || nb < 1.0 / lambda {
            report.skipped.push(i);
            continue;
        }
        report.checked += 1;
        let na = norm(a);
        let ratio = (na * na - nb * nb).abs() / bound;
        report.worst_ratio = report.worst_ratio.max(ratio);
        if ratio > 1.0 {
            report.violations.push(i);
        }
    }
    report.pass = report.violations.is_empty();
    report
}
