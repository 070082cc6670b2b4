//! Radius bound for periodic orbits.

use serde_json::json;

use super::{ConstantsReport, ExperimentOptions, ExperimentReport, Table, Verdict};
use crate::body::ConvexBody;
use crate::dynamics::{periodic_search_in, StartRange};
use crate::error::Result;

pub fn periodic_bound_experiment(
    body: &ConvexBody,
    k: usize,
    starts: usize,
    seed: u64,
    constants: &ConstantsReport,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let found = periodic_search_in(body, k, starts, seed, StartRange::for_period(k), &opts.solver)?;
    let rho = constants.rho(k);
    let mut report = ExperimentReport::new(
        "periodic",
        body.label(),
        seed,
        json!({ "k": k, "starts": starts, "options": opts }),
    );
    let mut table = Table::new("orbits", &["index", "radius", "residual"]);
    for (i, o) in found.iter().enumerate() {
        table.push(vec![i as f64, o.radius, o.residual]);
    }
    let worst = found.iter().map(|o| o.radius).fold(0.0, f64::max);
    report.summary.insert("rho".into(), rho);
    report.summary.insert("found".into(), found.len() as f64);
    report.summary.insert("max_radius".into(), worst);
    if k <= 2 {
        report.verdicts.push(Verdict::at_most(
            "no_orbits",
            found.len() as f64,
            0.0,
            "T has no fixed points or 2-periodic points",
        ));
    } else {
        report.verdicts.push(Verdict::at_least(
            "found_orbit",
            found.len() as f64,
            1.0,
            "distinct k-periodic orbits with residual < 1e-8",
        ));
        report.verdicts.push(Verdict::at_most(
            "inside_rho",
            worst,
            rho,
            "max orbit radius against ρ(k, M)",
        ));
    }
    report.tables.push(table);
    Ok(report)
}
