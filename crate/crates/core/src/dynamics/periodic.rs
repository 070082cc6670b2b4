//! Multistart damped least-squares search for `k`-periodic orbits of `T`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::map::t_power;
use super::reflection::SolverSettings;
use crate::body::ConvexBody;
use crate::error::Result;
use crate::geometry::{sphere_sample, Point};

/// Terminal `|T^k(x) − x|` for an accepted orbit.
pub const PERIODIC_TOL: f64 = 1e-8;
const LM_MAX_ITER: usize = 200;
const FD_STEP: f64 = 1e-7;
/// Orbits whose points agree up to a cyclic shift within this distance are one orbit.
const DEDUP_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct PeriodicOrbit {
    /// `x, Tx, …, T^{k−1}x`.
    pub points: Vec<Point>,
    /// Max Euclidean norm over the orbit.
    pub radius: f64,
    pub residual: f64,
}

/// Radial range of the seeded starting points, as multiples of the circumradius.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StartRange {
    pub inner: f64,
    pub outer: f64,
}

impl StartRange {
    /// `[1.05, max(2, k)]` circumradii; covers the circle's periodic radii `1/sin(πj/k)`.
    pub fn for_period(k: usize) -> Self {
        Self {
            inner: 1.05,
            outer: (k as f64).max(2.0),
        }
    }
}

pub fn periodic_search(
    body: &ConvexBody,
    k: usize,
    starts: usize,
    seed: u64,
) -> Result<Vec<PeriodicOrbit>> {
    periodic_search_in(body, k, starts, seed, StartRange::for_period(k), &SolverSettings::default())
}

pub fn periodic_search_in(
    body: &ConvexBody,
    k: usize,
    starts: usize,
    seed: u64,
    range: StartRange,
    settings: &SolverSettings,
) -> Result<Vec<PeriodicOrbit>> {
    if k == 0 || starts == 0 {
        return Ok(Vec::new());
    }
    let circumradius = body.circumradius(720)?;
    let dirs = sphere_sample(body.dim(), starts, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let x0s: Vec<Point> = dirs
        .into_iter()
        .map(|v| v * (circumradius * rng.random_range(range.inner..range.outer)))
        .collect();
    let found: Vec<Option<PeriodicOrbit>> = x0s
        .par_iter()
        .map(|x0| refine(body, k, x0, settings))
        .collect();
    let mut unique: Vec<PeriodicOrbit> = Vec::new();
    for orbit in found.into_iter().flatten() {
        if !unique.iter().any(|o| same_cycle(o, &orbit)) {
            unique.push(orbit);
        }
    }
    Ok(unique)
}

fn residual(body: &ConvexBody, k: usize, x: &Point, settings: &SolverSettings) -> Option<(Point, Vec<Point>)> {
    let pts = t_power(body, x, k, settings).ok()?;
    Some((&pts[k] - x, pts))
}

/// Levenberg–Marquardt on `F(x) = T^k(x) − x` with a forward-difference Jacobian.
fn refine(body: &ConvexBody, k: usize, x0: &Point, settings: &SolverSettings) -> Option<PeriodicOrbit> {
    let n = x0.len();
    let mut x = x0.clone();
    let (mut f, mut pts) = residual(body, k, &x, settings)?;
    let mut cost = f.norm_squared();
    let mut damping = 1e-3;
    for _ in 0..LM_MAX_ITER {
        if f.norm() < PERIODIC_TOL {
            break;
        }
        let h = FD_STEP * x.norm().max(1.0);
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut xp = x.clone();
            xp[j] += h;
            let (fp, _) = residual(body, k, &xp, settings)?;
            jac.set_column(j, &((fp - &f) / h));
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &f;
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += damping * (1.0 + jtj[(i, i)]);
            }
            let Some(delta) = a.lu().solve(&(-&g)) else {
                damping *= 10.0;
                continue;
            };
            let trial = &x + delta;
            if let Some((ft, pt)) = residual(body, k, &trial, settings) {
                let ct = ft.norm_squared();
                if ct < cost {
                    x = trial;
                    f = ft;
                    pts = pt;
                    cost = ct;
                    damping = (damping / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let res = f.norm();
    if res >= PERIODIC_TOL {
        return None;
    }
    pts.truncate(k);
    // Reject orbits that collapse to a shorter period.
    for d in 1..k {
        if k % d == 0 && (&pts[d] - &pts[0]).norm() < DEDUP_TOL {
            return None;
        }
    }
    let radius = pts.iter().map(|p| p.norm()).fold(0.0, f64::max);
    Some(PeriodicOrbit { points: pts, radius, residual: res })
}

fn same_cycle(a: &PeriodicOrbit, b: &PeriodicOrbit) -> bool {
    let k = a.points.len();
    if b.points.len() != k {
        return false;
    }
    (0..k).any(|shift| {
        (0..k).all(|i| (&a.points[i] - &b.points[(i + shift) % k]).norm() < DEDUP_TOL)
    })
}
