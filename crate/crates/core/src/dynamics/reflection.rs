//! Tangency points `m_±(x)` of the characteristic support rays through `x`.
//!
//! Unknowns are a unit normal `v` and `λ = s/p(v)`: with `m = ∇h(v)` and
//! `R(m) = Jv/p(v)`, the ray condition `m − x = ±s·R(m)` reads
//! `∇h(v) − x ∓ λJv = 0`. Support coordinates stay regular where the gauge
//! Hessian degenerates (pball axes).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::geometry::{apply_j, sphere_sample, Point};
use crate::newton::{self, bordered, sphere_projection};

/// Minimal relative gauge excess for a point to count as strictly outside `M`.
pub const EXTERIOR_MARGIN: f64 = 1e-6;
/// Candidates from the fallback scan that are polished by Newton.
const FALLBACK_STARTS: usize = 12;
/// Seeded sphere points added to the fallback scan in dimension > 2.
const FALLBACK_SPHERE_FACTOR: usize = 4;
const FALLBACK_SEED: u64 = 0xfa11;
/// Distance under which two converged normals are the same branch.
const BRANCH_SEPARATION: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Absolute residual tolerance, scaled by `max(1, |x|)`.
    pub residual_tol: f64,
    pub max_iter: usize,
    pub warm_start: bool,
    /// Points on the great circle through `Jx̂` and `x̂` in the fallback scan.
    pub fallback_grid: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            residual_tol: 1e-12,
            max_iter: 50,
            warm_start: true,
            fallback_grid: 720,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::Validation("residual_tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Validation("max_iter must be at least 1".into()));
        }
        if self.fallback_grid < 8 {
            return Err(Error::Validation("fallback_grid must be at least 8".into()));
        }
        Ok(())
    }

    fn tolerance(&self, x: &Point) -> f64 {
        self.residual_tol * x.norm().max(1.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReflectionSolution {
    /// Tangency point on `M`.
    pub m: Point,
    /// Ray parameter, `m − x = ±s·R(m)`.
    pub s: f64,
    /// Outward unit normal at `m`.
    pub v: Point,
    pub residual: f64,
    pub iterations: usize,
}

/// Which support ray: `Minus` solves `m − x = s·R(m)`, `Plus` solves `x − m = s·R(m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Minus => 1.0,
            Side::Plus => -1.0,
        }
    }
}

pub fn reflect_minus(
    body: &ConvexBody,
    x: &Point,
    settings: &SolverSettings,
    hint: Option<&Point>,
) -> Result<ReflectionSolution> {
    reflect(body, x, settings, hint, Side::Minus)
}

pub fn reflect_plus(
    body: &ConvexBody,
    x: &Point,
    settings: &SolverSettings,
    hint: Option<&Point>,
) -> Result<ReflectionSolution> {
    reflect(body, x, settings, hint, Side::Plus)
}

pub fn reflect(
    body: &ConvexBody,
    x: &Point,
    settings: &SolverSettings,
    hint: Option<&Point>,
    side: Side,
) -> Result<ReflectionSolution> {
    settings.validate()?;
    require_strictly_exterior(body, x)?;
    let cold = apply_j(x) / x.norm() * side.sign();
    let start = match hint {
        Some(v) if settings.warm_start && v.len() == x.len() && v.norm() > 0.0 => v.normalize(),
        _ => cold,
    };
    let mut negative = None;
    match polish(body, x, &start, settings, side) {
        Ok(sol) if sol.s > 0.0 => return Ok(sol),
        Ok(sol) => negative = Some(sol.s),
        Err(_) => {}
    }
    fallback(body, x, settings, side, negative)
}

pub(crate) fn require_strictly_exterior(body: &ConvexBody, x: &Point) -> Result<()> {
    if !body.is_exterior(x, EXTERIOR_MARGIN)? {
        return Err(Error::Domain(format!(
            "point {:?} is within the exterior margin of {}",
            x.as_slice(),
            body.label()
        )));
    }
    Ok(())
}

/// Newton from the normal `v0`; the multiplier starts at its least-squares value.
fn polish(
    body: &ConvexBody,
    x: &Point,
    v0: &Point,
    settings: &SolverSettings,
    side: Side,
) -> Result<ReflectionSolution> {
    let n = x.len();
    let sigma = side.sign();
    let jv0 = apply_j(v0);
    let lambda0 = sigma * (body.grad_h(v0)? - x).dot(&jv0);
    let mut z0 = Point::zeros(n + 1);
    z0.rows_mut(0, n).copy_from(v0);
    z0[n] = lambda0;
    let jmat = body.space().j_matrix();
    let out = newton::solve(
        z0,
        settings.tolerance(x),
        settings.max_iter,
        "reflection",
        |z| {
            let v = z.rows(0, n).into_owned();
            let lambda = z[n];
            let (g, hess) = body.grad_hess_h(&v)?;
            let jv = apply_j(&v);
            let mut f = Point::zeros(n + 1);
            f.rows_mut(0, n).copy_from(&(&g - x - &jv * (sigma * lambda)));
            f[n] = v.norm_squared() - 1.0;
            let a: DMatrix<f64> = hess - &jmat * (sigma * lambda);
            Ok((f, bordered(&a, &(-jv * sigma), &(&v * 2.0))))
        },
        sphere_projection(n),
    )?;
    let v = out.z.rows(0, n).into_owned();
    let lambda = out.z[n];
    let m = body.grad_h(&v)?;
    let p = body.h(&v)?;
    Ok(ReflectionSolution {
        m,
        s: lambda * p,
        v,
        residual: out.residual,
        iterations: out.iterations,
    })
}

/// Scan candidates ranked by the component of `∇h(v) − x` off the line `ℝJv`,
/// restricted to the requested orientation.
fn candidates(
    body: &ConvexBody,
    x: &Point,
    settings: &SolverSettings,
    side: Side,
) -> Result<Vec<(f64, Point)>> {
    let n = x.len();
    let sigma = side.sign();
    let xh = x / x.norm();
    let jx = apply_j(&xh);
    let mut dirs: Vec<Point> = (0..settings.fallback_grid)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / settings.fallback_grid as f64;
            &jx * t.cos() + &xh * t.sin()
        })
        .collect();
    if n > 2 {
        dirs.extend(sphere_sample(
            n,
            FALLBACK_SPHERE_FACTOR * settings.fallback_grid,
            FALLBACK_SEED,
        ));
    }
    let mut scored = Vec::with_capacity(dirs.len());
    for v in dirs {
        let d = body.grad_h(&v)? - x;
        let jv = apply_j(&v);
        let lambda = sigma * d.dot(&jv);
        if lambda <= 0.0 {
            continue;
        }
        let off = (&d - &jv * (sigma * lambda)).norm();
        scored.push((off, v));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(scored)
}

fn fallback(
    body: &ConvexBody,
    x: &Point,
    settings: &SolverSettings,
    side: Side,
    mut negative: Option<f64>,
) -> Result<ReflectionSolution> {
    let scored = candidates(body, x, settings, side)?;
    let mut best_residual = f64::INFINITY;
    let mut iterations = 0;
    for (_, v) in scored.iter().take(FALLBACK_STARTS) {
        match polish(body, x, v, settings, side) {
            Ok(sol) if sol.s > 0.0 => return Ok(sol),
            Ok(sol) => negative = Some(sol.s),
            Err(Error::Solver { iterations: it, residual, .. }) => {
                iterations = iterations.max(it);
                best_residual = best_residual.min(residual);
            }
            Err(e) => return Err(e),
        }
    }
    match negative {
        Some(s) => Err(Error::Orientation { s }),
        None => Err(Error::Solver {
            context: "reflection fallback",
            iterations,
            residual: best_residual,
        }),
    }
}

/// All distinct roots `(v, s)` of the ray equation, of either sign of `s`,
/// reached by Newton from every local minimum of the fallback scan.
pub fn solution_branches(
    body: &ConvexBody,
    x: &Point,
    settings: &SolverSettings,
    side: Side,
) -> Result<Vec<ReflectionSolution>> {
    settings.validate()?;
    require_strictly_exterior(body, x)?;
    let mut all = candidates(body, x, settings, side)?;
    let flipped = match side {
        Side::Minus => Side::Plus,
        Side::Plus => Side::Minus,
    };
    all.extend(candidates(body, x, settings, flipped)?);
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut roots: Vec<ReflectionSolution> = Vec::new();
    for (_, v) in all.iter().take(4 * FALLBACK_STARTS) {
        if let Ok(sol) = polish(body, x, v, settings, side) {
            if roots.iter().all(|r| (&r.v - &sol.v).norm() > BRANCH_SEPARATION) {
                roots.push(sol);
            }
        }
    }
    Ok(roots)
}
