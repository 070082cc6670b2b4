//! Numerical estimates of the constants in the shadowing, escape and
//! periodic-orbit bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use serde_json::json;

use super::{ExperimentOptions, ExperimentReport, Table, Verdict};
use crate::body::ConvexBody;
use crate::duality::HamiltonianAtInfinity;
use crate::dynamics::{flow, reflect_minus};
use crate::error::{Error, Result};
use crate::geometry::{angle_between, geodesic, sphere_sample, Point};

pub const MIN_SAMPLES: usize = 100;
/// Geodesic normal separations for the bi-Lipschitz estimate.
const ELL_SEPARATIONS: [f64; 5] = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
/// Radii `C₁·(1/2 + j/4)` for the tangency-angle threshold.
const ALPHA_GRID: usize = 15;
/// Radii `2C₁·2^j` for the flow Taylor threshold.
const TAYLOR_GRID: usize = 8;
const TAYLOR_DIRECTIONS: usize = 64;
/// Relative growth per doubling below which `r·|φ₁x − x − Vx|` counts as settled.
const TAYLOR_SETTLED: f64 = 1.05;
const ETA_PAIRS_PER_SAMPLE: usize = 8;
const ETA_BISECTIONS: usize = 40;
const SEED_ELL: u64 = 0xe11;
const SEED_ETA: u64 = 0xe7a;
/// Separates auxiliary streams from the `sphere_sample` stream of the same seed.
const SEED_STREAM: u64 = 0x5a5a_0000;

#[derive(Clone, Debug, Serialize)]
pub struct RhoEntry {
    pub k: usize,
    pub rho: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridPoint {
    pub radius: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub body: String,
    pub samples: usize,
    #[serde(rename = "C1")]
    pub c1: f64,
    pub ell: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub delta_inv: f64,
    pub delta_tilde_inv: f64,
    #[serde(rename = "C_tilde")]
    pub c_tilde: f64,
    pub m: f64,
    pub eta: f64,
    pub mu: f64,
    #[serde(rename = "Delta_inv")]
    pub big_delta_inv: f64,
    #[serde(rename = "C_bar")]
    pub c_bar: f64,
    pub rho_of_k: Vec<RhoEntry>,
    /// Max tangency angle `α` per radius.
    pub alpha_grid: Vec<GridPoint>,
    /// Max of `r·|φ₁(x) − x − V(x)|` per radius.
    pub taylor_grid: Vec<GridPoint>,
    /// `ℓ` is a sampled minimum, not a certified bound.
    pub ell_is_statistical: bool,
}

impl ConstantsReport {
    /// `max{1/δ + 2(k−1)C₁, 2(k−1)C₁/η, 24C/m}`.
    pub fn rho(&self, k: usize) -> f64 {
        rho_formula(k, self.delta_inv, self.c1, self.eta, self.c, self.m)
    }

    /// `2μ²(6C+C̃) + 3μ²(6C+C̃)²Δ²` over the stored entries.
    pub fn c_bar_formula(&self) -> f64 {
        c_bar_formula(self.mu, self.c, self.c_tilde, self.big_delta_inv)
    }

    /// `6C + C̃`, the numerator of the shadowing bound.
    pub fn shadow_constant(&self) -> f64 {
        6.0 * self.c + self.c_tilde
    }

    /// `1/Δ`.
    pub fn radius_threshold(&self) -> f64 {
        self.big_delta_inv
    }
}

/// [`constants_estimate`] as a report with the stored identities as verdicts.
pub fn constants_experiment(
    body: &ConvexBody,
    samples: usize,
    k_list: &[usize],
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let k = constants_estimate(body, samples, k_list, opts)?;
    let mut report = ExperimentReport::new(
        "constants",
        body.label(),
        0,
        json!({ "samples": samples, "k_list": k_list, "options": opts, "constants": &k }),
    );
    for (name, value) in [
        ("C1", k.c1),
        ("ell", k.ell),
        ("C", k.c),
        ("delta_inv", k.delta_inv),
        ("delta_tilde_inv", k.delta_tilde_inv),
        ("C_tilde", k.c_tilde),
        ("m", k.m),
        ("eta", k.eta),
        ("mu", k.mu),
        ("Delta_inv", k.big_delta_inv),
        ("C_bar", k.c_bar),
    ] {
        report.summary.insert(name.into(), value);
    }
    let positive = [k.c1, k.ell, k.c, k.delta_inv, k.c_tilde, k.m, k.eta, k.mu, k.big_delta_inv, k.c_bar]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    report.verdicts.push(Verdict::at_least("positive", positive, f64::MIN_POSITIVE, "smallest entry"));
    report.verdicts.push(Verdict::at_most("eta_cap", k.eta, 0.5, "η ≤ 1/2"));
    report.verdicts.push(Verdict::at_most(
        "c_bar_identity",
        (k.c_bar - k.c_bar_formula()).abs(),
        0.0,
        "stored C̄ minus the formula over stored entries",
    ));
    let mut table = Table::new("rho", &["k", "rho"]);
    let mut drop: f64 = 0.0;
    for e in &k.rho_of_k {
        table.push(vec![e.k as f64, e.rho]);
    }
    let kmax = k_list.iter().copied().max().unwrap_or(1);
    for j in 1..kmax.max(2) {
        drop = drop.max(k.rho(j) - k.rho(j + 1));
    }
    report.verdicts.push(Verdict::at_most("rho_monotone", drop, 0.0, "max of ρ(k) − ρ(k+1)"));
    report.tables.push(table);
    Ok(report)
}

fn rho_formula(k: usize, delta_inv: f64, c1: f64, eta: f64, c: f64, m: f64) -> f64 {
    let spread = 2.0 * (k.saturating_sub(1)) as f64 * c1;
    (delta_inv + spread).max(spread / eta).max(24.0 * c / m)
}

fn c_bar_formula(mu: f64, c: f64, c_tilde: f64, big_delta_inv: f64) -> f64 {
    let k = 6.0 * c + c_tilde;
    let delta = 1.0 / big_delta_inv;
    2.0 * mu * mu * k + 3.0 * mu * mu * k * k * delta * delta
}

pub fn constants_estimate(
    body: &ConvexBody,
    samples: usize,
    k_list: &[usize],
    opts: &ExperimentOptions,
) -> Result<ConstantsReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::Validation(format!(
            "constants estimation needs at least {MIN_SAMPLES} samples"
        )));
    }
    let h = HamiltonianAtInfinity::new(body);
    let c1 = body.diameter(samples)?;
    let ell = estimate_ell(body, samples)?;
    let c = 6.0 * c1 / ell;
    let mut m = f64::INFINITY;
    for v in body.directions(samples) {
        m = m.min(h.velocity(&v)?.norm());
    }
    let mu = h.norm_equivalence(samples)?;
    let (alpha_grid, alpha_radius) = alpha_threshold(body, c1, samples, opts)?;
    let delta_inv = (2.0 * c1).max(alpha_radius);
    let (taylor_grid, delta_tilde_inv, c_tilde) = taylor_threshold(&h, c1, samples, opts)?;
    let big_delta_inv = delta_inv.max(delta_tilde_inv);
    let eta = estimate_eta(&h, m, samples)?;
    let mut report = ConstantsReport {
        body: body.label().to_string(),
        samples,
        c1,
        ell,
        c,
        delta_inv,
        delta_tilde_inv,
        c_tilde,
        m,
        eta,
        mu,
        big_delta_inv,
        c_bar: c_bar_formula(mu, c, c_tilde, big_delta_inv),
        rho_of_k: Vec::new(),
        alpha_grid,
        taylor_grid,
        ell_is_statistical: true,
    };
    report.rho_of_k = k_list
        .iter()
        .map(|&k| RhoEntry { k, rho: report.rho(k) })
        .collect();
    Ok(report)
}

/// Min over sampled close pairs of (normal angle)/(chord) on `M`.
fn estimate_ell(body: &ConvexBody, samples: usize) -> Result<f64> {
    let dim = body.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_ELL ^ SEED_STREAM);
    let bases = sphere_sample(dim, samples, SEED_ELL);
    let mut pairs = Vec::with_capacity(samples);
    for v in bases {
        let g = Point::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let u = (&g - &v * g.dot(&v)).normalize();
        pairs.push((v, u));
    }
    let ratios: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|(v, u)| {
            let a = body.support_point(v)?;
            let mut best = f64::INFINITY;
            for sep in ELL_SEPARATIONS {
                let b = body.support_point(&geodesic(v, u, sep))?;
                best = best.min(sep / (&a - &b).norm());
            }
            Ok(best)
        })
        .collect();
    let mut ell = f64::INFINITY;
    for r in ratios {
        ell = ell.min(r?);
    }
    Ok(ell)
}

/// Smallest grid radius from which the tangency angle `∠ m_−(x) x O` stays ≤ π/2.
fn alpha_threshold(
    body: &ConvexBody,
    c1: f64,
    samples: usize,
    opts: &ExperimentOptions,
) -> Result<(Vec<GridPoint>, f64)> {
    let dirs = sphere_sample(body.dim(), samples, SEED_ELL ^ 1);
    let mut grid = Vec::with_capacity(ALPHA_GRID);
    for j in 0..ALPHA_GRID {
        let radius = c1 * (0.5 + 0.25 * j as f64);
        let angles: Vec<Result<Option<f64>>> = dirs
            .par_iter()
            .map(|u| {
                let x = u * radius;
                if !body.is_exterior(&x, crate::dynamics::EXTERIOR_MARGIN)? {
                    return Ok(None);
                }
                let m = reflect_minus(body, &x, &opts.solver, None)?.m;
                Ok(Some(angle_between(&x, &(&x - m))))
            })
            .collect();
        let mut worst: f64 = 0.0;
        let mut any = false;
        for a in angles {
            if let Some(a) = a? {
                worst = worst.max(a);
                any = true;
            }
        }
        if any {
            grid.push(GridPoint { radius, value: worst });
        }
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let Some(last) = grid.last() else {
        return Err(Error::Estimation("no exterior radius on the angle grid".into()));
    };
    if last.value > half_pi {
        return Err(Error::Estimation("tangency angle exceeds π/2 on the whole grid".into()));
    }
    let mut threshold = last.radius;
    for g in grid.iter().rev() {
        if g.value > half_pi {
            break;
        }
        threshold = g.radius;
    }
    Ok((grid, threshold))
}

/// First radius `2C₁·2^j` from which `τ(r) = max r·|φ₁(x) − x − V(x)|` grows
/// by under 5% per doubling; `C̃` is the max of `τ` beyond it.
fn taylor_threshold(
    h: &HamiltonianAtInfinity,
    c1: f64,
    samples: usize,
    opts: &ExperimentOptions,
) -> Result<(Vec<GridPoint>, f64, f64)> {
    let dirs = sphere_sample(h.dim(), samples.min(TAYLOR_DIRECTIONS), SEED_ELL ^ 2);
    let mut grid = Vec::with_capacity(TAYLOR_GRID);
    for j in 0..TAYLOR_GRID {
        let radius = 2.0 * c1 * (1u64 << j) as f64;
        let values: Vec<Result<f64>> = dirs
            .par_iter()
            .map(|u| {
                let x = u * radius;
                let y = flow(h, &x, 1.0, opts.flow_tol)?;
                Ok(radius * (y - &x - h.velocity(&x)?).norm())
            })
            .collect();
        let mut worst: f64 = 0.0;
        for v in values {
            worst = worst.max(v?);
        }
        grid.push(GridPoint { radius, value: worst });
    }
    let settled = |j: usize| {
        grid[j..]
            .windows(2)
            .all(|w| w[1].value <= TAYLOR_SETTLED * w[0].value)
    };
    let Some(start) = (0..grid.len() - 1).find(|&j| settled(j)) else {
        return Err(Error::Estimation("flow Taylor residual did not settle on the grid".into()));
    };
    let c_tilde = grid[start..].iter().map(|g| g.value).fold(0.0, f64::max);
    let radius = grid[start].radius;
    Ok((grid, radius, c_tilde))
}

/// Largest `η ≤ 1/2` with sampled `|V(x) − V(y)| < m/2` for `x, y` in the
/// shell `1/2 ≤ |·| ≤ 3/2` and `|x − y| ≤ η`, by bisection on fixed samples.
fn estimate_eta(h: &HamiltonianAtInfinity, m: f64, samples: usize) -> Result<f64> {
    let dim = h.dim();
    let n = samples * ETA_PAIRS_PER_SAMPLE;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_ETA ^ SEED_STREAM);
    let centers = sphere_sample(dim, n, SEED_ETA);
    let offsets = sphere_sample(dim, n, SEED_ETA ^ 1);
    let mut pairs = Vec::with_capacity(n);
    for (c, w) in centers.into_iter().zip(offsets) {
        let radius = rng.random_range(0.5..1.5);
        let frac: f64 = rng.random_range(0.0..1.0);
        let x = c * radius;
        let vx = h.velocity(&x)?;
        pairs.push((x, w * (1.0 - frac), vx));
    }
    let modulus = |eta: f64| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (x, w, vx) in &pairs {
            let y = x + w * eta;
            let ry = y.norm();
            if !(0.5..=1.5).contains(&ry) {
                continue;
            }
            worst = worst.max((h.velocity(&y)? - vx).norm());
        }
        Ok(worst)
    };
    let target = m / 2.0;
    if modulus(0.5)? < target {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..ETA_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if modulus(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo < 1e-9 {
        return Err(Error::Estimation("η bisection bracket failed".into()));
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> ExperimentOptions {
        ExperimentOptions::default()
    }

    #[test]
    fn circle_closed_forms() {
        let r = constants_estimate(&ConvexBody::unit_circle(), 200, &[3, 5], &opts()).unwrap();
        assert!((r.c1 - 2.0).abs() < 1e-12);
        assert!((r.m - 4.0).abs() < 1e-12);
        assert!((r.mu - 2.0).abs() < 1e-12);
        assert!((r.ell - 1.0).abs() < 1e-3);
        assert!(r.eta > 0.0 && r.eta <= 0.5);
    }

    #[test]
    fn constant_width_closed_forms() {
        let body = ConvexBody::constant_width(0.1).unwrap();
        let r = constants_estimate(&body, 200, &[3], &opts()).unwrap();
        assert!((r.c1 - 2.0).abs() < 1e-9);
        assert!((r.m - 4.0).abs() < 1e-9);
    }

    #[test]
    fn identities_and_monotonicity() {
        let body = ConvexBody::ellipsoid(vec![1.0, 0.6]).unwrap();
        let r = constants_estimate(&body, 150, &[3, 4, 5, 7], &opts()).unwrap();
        assert_eq!(r.c_bar, r.c_bar_formula());
        assert!(r.eta <= 0.5);
        for x in [r.c1, r.ell, r.c, r.delta_inv, r.c_tilde, r.m, r.eta, r.mu, r.big_delta_inv, r.c_bar] {
            assert!(x > 0.0 && x.is_finite());
        }
        assert_eq!(r.big_delta_inv, r.delta_inv.max(r.delta_tilde_inv));
        assert_eq!(r.c, 6.0 * r.c1 / r.ell);
        for e in &r.rho_of_k {
            assert_eq!(e.rho, r.rho(e.k));
        }
        for k in 1..20 {
            assert!(r.rho(k + 1) >= r.rho(k));
        }
    }

    #[test]
    fn rho_scales_with_the_body() {
        let body = ConvexBody::ellipsoid(vec![1.0, 0.6]).unwrap();
        let a = constants_estimate(&body, 150, &[3], &opts()).unwrap();
        let b = constants_estimate(&body.scaled(2.0).unwrap(), 150, &[3], &opts()).unwrap();
        assert!((b.rho(3) / a.rho(3) - 2.0).abs() < 0.1);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            constants_estimate(&ConvexBody::unit_circle(), 10, &[3], &opts()),
            Err(Error::Validation(_))
        ));
    }
}
