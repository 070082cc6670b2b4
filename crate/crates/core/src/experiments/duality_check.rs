//! Numerical checks of the duality identities on one body.

use rayon::prelude::*;
use serde_json::json;

use super::{ExperimentReport, Table, Verdict};
use crate::body::ConvexBody;
use crate::duality::{check_involution, n_minus, n_plus, reeb, HamiltonianAtInfinity};
use crate::error::Result;
use crate::geometry::{apply_j, omega, sphere_sample};

/// Tolerance for identities evaluated in closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-10;
/// Tolerance for identities involving finite-difference tangents.
pub const FINITE_DIFFERENCE_TOL: f64 = 1e-6;
/// Relative tolerance for `V = −2X_H` across the two evaluation routes.
pub const PROPOSITION_TOL: f64 = 1e-8;
const PROPOSITION_RADII: (f64, f64) = (2.0, 100.0);

pub fn duality_check(body: &ConvexBody, samples: usize, seed: u64) -> Result<ExperimentReport> {
    let h = HamiltonianAtInfinity::new(body);
    let symm = h.symmetrized();
    let dirs = sphere_sample(body.dim(), samples, seed);
    let rows: Vec<Result<[f64; 5]>> = dirs
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let sym = (symm.support_point(v)? - symm.split_support_point(v)?).norm();
            let q = body.support_point(v)?;
            let reeb_norm = (omega(&q, &reeb(body, &q)?) - 1.0).abs();
            // |x| log-uniform over the proposition range, deterministic in i.
            let t = (i as f64 + 0.5) / samples as f64;
            let r = PROPOSITION_RADII.0 * (PROPOSITION_RADII.1 / PROPOSITION_RADII.0).powf(t);
            let x = v * r;
            // n̄_± at Jx/|x| directly: x itself may lie inside M̄ = M − M.
            let u = apply_j(&x) / r;
            let nbar = (symm.support_point(&(-&u))? + symm.support_point(&u)?).norm();
            let split = (n_plus(body, &x)? - n_minus(body, &x)?) * 2.0;
            let field = h.field(&x)?;
            let prop = (&split + &field * 2.0).norm() / split.norm();
            Ok([i as f64, sym, nbar, reeb_norm, prop])
        })
        .collect();
    let mut table = Table::new(
        "samples",
        &["index", "symmetrization", "nbar_antisymmetry", "reeb_normalization", "proposition"],
    );
    for row in rows {
        table.push(row?.to_vec());
    }
    let worst = |c: usize| table.rows.iter().map(|r| r[c]).fold(0.0, f64::max);
    let involution = check_involution(body, samples)?;
    let mut report = ExperimentReport::new(
        "duality_check",
        body.label(),
        seed,
        json!({ "samples": samples }),
    );
    report.verdicts.push(Verdict::at_most(
        "symmetrization_identity",
        worst(1),
        CLOSED_FORM_TOL,
        "|Ḡ⁻¹(v) − (G⁻¹(v) − G⁻¹(−v))|",
    ));
    report.verdicts.push(Verdict::at_most(
        "nbar_antisymmetry",
        worst(2),
        CLOSED_FORM_TOL,
        "|n̄_+(x) + n̄_−(x)|",
    ));
    report.verdicts.push(Verdict::at_most(
        "reeb_normalization",
        worst(3),
        CLOSED_FORM_TOL,
        "|ω(q, R(q)) − 1|",
    ));
    report.verdicts.push(Verdict::at_most(
        "involution_normalization",
        involution.max_normalization_violation,
        CLOSED_FORM_TOL,
        "|ω(R(x), −x) − 1|",
    ));
    report.verdicts.push(Verdict::at_most(
        "involution_tangency",
        involution.max_tangent_violation,
        FINITE_DIFFERENCE_TOL,
        "|ω(u, −x)|/(|u||x|) over finite-difference tangents u of M*",
    ));
    report.verdicts.push(Verdict::at_most(
        "shadow_field_proposition",
        worst(4),
        PROPOSITION_TOL,
        "|V(x) + 2X_H(x)|/|V(x)|, 2 ≤ |x| ≤ 100",
    ));
    report.tables.push(table);
    Ok(report)
}
