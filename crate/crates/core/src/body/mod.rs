//! Smooth quadratically convex hypersurfaces with the origin inside.
//!
//! A [`ConvexBody`] is backed either by a support function or by a gauge
//! function. Whatever is missing is recovered numerically: the support of a
//! gauge body by a bordered Newton solve of `∇f(q) = λv, f(q) = 1`, the gauge
//! of a support body by a radial solve `∇h(w) = t·x/|x|` on the sphere.

mod catalog;
mod families;

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

pub use catalog::BodySpec;
pub use families::{
    EllipsoidGauge, EllipsoidSupport, GaugeFunction, HarmonicSupport, PBallSupport,
    ScaledGauge, ScaledSupport, SupportFunction,
};

use crate::error::{Error, Result};
use crate::geometry::{sphere_sample, tangent_basis, Point, SymplecticSpace};
use crate::newton;

/// Residual tolerance of the inner support/gauge solves.
pub const INNER_TOL: f64 = 1e-12;
/// Iteration cap of the inner support/gauge solves.
pub const INNER_MAX_ITER: usize = 50;
/// Accepted deviation of `gauge(q)` from 1 for points declared on `M`.
pub const ON_SURFACE_TOL: f64 = 1e-8;
/// Curvature eigenvalues at or below this count as degenerate.
pub const CONVEXITY_FLOOR: f64 = 1e-9;
const UNIT_TOL: f64 = 1e-8;
const SAMPLE_SEED: u64 = 0x5eed;

#[derive(Clone, Debug)]
enum Representation {
    Support(Arc<dyn SupportFunction>),
    Gauge(Arc<dyn GaugeFunction>),
    /// `M ⊖ M`, support `h(v) + h(−v)`.
    Symmetrized(Arc<ConvexBody>),
}

/// An immutable smooth convex body in ℝ^{2d} containing the origin.
#[derive(Clone, Debug)]
pub struct ConvexBody {
    repr: Representation,
    space: SymplecticSpace,
    label: String,
}

/// Outcome of [`ConvexBody::validate_convexity`].
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub samples: usize,
    pub min_eigenvalue: f64,
    pub argmin_direction: Vec<f64>,
    pub pass: bool,
}

impl ConvexBody {
    pub fn from_support(f: Arc<dyn SupportFunction>, label: impl Into<String>) -> Result<Self> {
        let space = SymplecticSpace::of_dim(f.dim())?;
        Ok(Self {
            repr: Representation::Support(f),
            space,
            label: label.into(),
        })
    }

    pub fn from_gauge(f: Arc<dyn GaugeFunction>, label: impl Into<String>) -> Result<Self> {
        let space = SymplecticSpace::of_dim(f.dim())?;
        Ok(Self {
            repr: Representation::Gauge(f),
            space,
            label: label.into(),
        })
    }

    /// Central symmetrization `M ⊖ M` as a body in its own right.
    pub fn symmetrized(&self) -> Self {
        Self {
            repr: Representation::Symmetrized(Arc::new(self.clone())),
            space: self.space,
            label: format!("sym({})", self.label),
        }
    }

    pub fn unit_circle() -> Self {
        Self::ellipsoid(vec![1.0, 1.0]).expect("valid axes")
    }

    pub fn ellipsoid(axes: Vec<f64>) -> Result<Self> {
        BodySpec::Ellipsoid { semi_axes: axes }.build()
    }

    /// Ellipsoid backed by its gauge instead of its support function.
    pub fn ellipsoid_gauge(axes: Vec<f64>) -> Result<Self> {
        BodySpec::Ellipsoid {
            semi_axes: axes.clone(),
        }
        .validate()?;
        Self::from_gauge(
            Arc::new(EllipsoidGauge::new(axes)),
            "ellipsoid(gauge)",
        )
    }

    pub fn pball(p: f64) -> Result<Self> {
        BodySpec::Pball { p, dim: 2 }.build()
    }

    pub fn constant_width(eps: f64) -> Result<Self> {
        BodySpec::ConstantWidth2d { eps }.build()
    }

    /// The homothetic copy `c·M`, `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Validation(format!("scale factor must be positive, got {c}")));
        }
        let repr = match &self.repr {
            Representation::Support(f) => {
                Representation::Support(Arc::new(ScaledSupport::new(f.clone(), c)))
            }
            Representation::Gauge(f) => {
                Representation::Gauge(Arc::new(ScaledGauge::new(f.clone(), c)))
            }
            Representation::Symmetrized(base) => {
                Representation::Symmetrized(Arc::new(base.scaled(c)?))
            }
        };
        Ok(Self {
            repr,
            space: self.space,
            label: format!("{c}*{}", self.label),
        })
    }

    pub fn space(&self) -> SymplecticSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_gauge_backed(&self) -> bool {
        matches!(self.repr, Representation::Gauge(_))
    }

    fn check_unit(&self, v: &Point) -> Result<()> {
        self.space.check(v)?;
        if (v.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Domain(format!(
                "expected a unit direction, got |v| = {}",
                v.norm()
            )));
        }
        Ok(())
    }

    /// Support function `p(v)`, the distance from the origin to the tangent
    /// hyperplane with outward normal `v`.
    pub fn support(&self, v: &Point) -> Result<f64> {
        self.check_unit(v)?;
        self.h(v)
    }

    /// The boundary point with outward normal `v`, `G⁻¹(v) = p(v)v + ∇_S p(v)`.
    pub fn support_point(&self, v: &Point) -> Result<Point> {
        self.check_unit(v)?;
        self.grad_h(v)
    }

    /// Hessian of the homogeneous support extension at a unit `v`.
    pub fn support_hessian(&self, v: &Point) -> Result<DMatrix<f64>> {
        self.check_unit(v)?;
        Ok(self.grad_hess_h(v)?.1)
    }

    // Homogeneous extension `h` and its derivatives at any nonzero v.

    pub(crate) fn h(&self, v: &Point) -> Result<f64> {
        match &self.repr {
            Representation::Support(f) => Ok(f.value(v)),
            Representation::Gauge(_) => {
                let r = v.norm();
                let u = v / r;
                let (q, _) = self.gauge_support_point(&u)?;
                Ok(r * u.dot(&q))
            }
            Representation::Symmetrized(b) => Ok(b.h(v)? + b.h(&(-v))?),
        }
    }

    pub(crate) fn grad_h(&self, v: &Point) -> Result<Point> {
        match &self.repr {
            Representation::Support(f) => Ok(f.gradient(v)),
            Representation::Gauge(_) => Ok(self.gauge_support_point(&v.normalize())?.0),
            Representation::Symmetrized(b) => Ok(b.grad_h(v)? - b.grad_h(&(-v))?),
        }
    }

    pub(crate) fn grad_hess_h(&self, v: &Point) -> Result<(Point, DMatrix<f64>)> {
        match &self.repr {
            Representation::Support(f) => Ok((f.gradient(v), f.hessian(v))),
            Representation::Gauge(g) => {
                let r = v.norm();
                let u = v / r;
                let (q, lambda) = self.gauge_support_point(&u)?;
                let kkt = newton::bordered(&g.hessian(&q), &(-&u), &g.gradient(&q));
                let lu = kkt.lu();
                let n = self.dim();
                let mut hess = DMatrix::zeros(n, n);
                for j in 0..n {
                    let mut rhs = Point::zeros(n + 1);
                    rhs[j] = lambda;
                    let col = lu.solve(&rhs).ok_or_else(|| {
                        Error::Domain("singular support Hessian system".into())
                    })?;
                    hess.column_mut(j).copy_from(&col.rows(0, n));
                }
                Ok((q, hess / r))
            }
            Representation::Symmetrized(b) => {
                let (g1, h1) = b.grad_hess_h(v)?;
                let (g2, h2) = b.grad_hess_h(&(-v))?;
                Ok((g1 - g2, h1 + h2))
            }
        }
    }

    /// Maximizer of `⟨v, ·⟩` over `{f ≤ 1}` and its multiplier, for gauge bodies.
    fn gauge_support_point(&self, v: &Point) -> Result<(Point, f64)> {
        let Representation::Gauge(g) = &self.repr else {
            unreachable!("gauge solve on a support-backed body");
        };
        let n = self.dim();
        let q0 = v / g.value(v);
        let lambda0 = g.gradient(&q0).dot(v);
        let mut z0 = Point::zeros(n + 1);
        z0.rows_mut(0, n).copy_from(&q0);
        z0[n] = lambda0;
        let out = newton::solve(
            z0,
            INNER_TOL,
            INNER_MAX_ITER,
            "support point from gauge",
            |z| {
                let q = z.rows(0, n).into_owned();
                let lambda = z[n];
                let grad = g.gradient(&q);
                let mut f = Point::zeros(n + 1);
                f.rows_mut(0, n).copy_from(&(&grad - v * lambda));
                f[n] = g.value(&q) - 1.0;
                Ok((f, newton::bordered(&g.hessian(&q), &(-v), &grad)))
            },
            |z| z,
        )?;
        Ok((out.z.rows(0, n).into_owned(), out.z[n]))
    }

    /// Gauge `f(x)` with `M = {f = 1}`; `f(0) = 0`.
    pub fn gauge(&self, x: &Point) -> Result<f64> {
        self.space.check(x)?;
        Ok(self.gauge_and_gradient(x)?.0)
    }

    /// `∇f(x)`, 0-homogeneous, satisfying `⟨∇f(x), x⟩ = f(x)`.
    pub fn gauge_gradient(&self, x: &Point) -> Result<Point> {
        self.space.check(x)?;
        if x.norm() == 0.0 {
            return Err(Error::Domain("gauge gradient undefined at the origin".into()));
        }
        Ok(self.gauge_and_gradient(x)?.1)
    }

    fn gauge_and_gradient(&self, x: &Point) -> Result<(f64, Point)> {
        if x.norm() == 0.0 {
            return Ok((0.0, Point::zeros(x.len())));
        }
        match &self.repr {
            Representation::Support(f) => match f.gauge(x) {
                Some(closed) => Ok(closed),
                None => self.radial_gauge_and_gradient(x),
            },
            Representation::Gauge(g) => Ok((g.value(x), g.gradient(x))),
            Representation::Symmetrized(_) => self.radial_gauge_and_gradient(x),
        }
    }

    /// Gauge by the radial root-find in support coordinates, ignoring any
    /// closed form. Gauge-backed bodies evaluate `f` directly.
    pub fn radial_gauge(&self, x: &Point) -> Result<f64> {
        self.space.check(x)?;
        if x.norm() == 0.0 {
            return Ok(0.0);
        }
        match &self.repr {
            Representation::Gauge(g) => Ok(g.value(x)),
            _ => Ok(self.radial_gauge_and_gradient(x)?.0),
        }
    }

    /// Finds the unit normal `w` of the boundary point on the ray through `x`
    /// by solving `∇h(w) = t·x/|x|`, `|w| = 1`; then `f(x) = |x|/t` and
    /// `∇f(x) = w/h(w)`.
    fn radial_gauge_and_gradient(&self, x: &Point) -> Result<(f64, Point)> {
        let n = self.dim();
        let r = x.norm();
        let u = x / r;
        let mut z0 = Point::zeros(n + 1);
        z0.rows_mut(0, n).copy_from(&u);
        z0[n] = self.h(&u)?;
        let out = newton::solve(
            z0,
            INNER_TOL,
            INNER_MAX_ITER,
            "radial gauge",
            |z| {
                let w = z.rows(0, n).into_owned();
                let (g, hess) = self.grad_hess_h(&w)?;
                let mut f = Point::zeros(n + 1);
                f.rows_mut(0, n).copy_from(&(g - &u * z[n]));
                Ok((f, newton::bordered(&hess, &(-&u), &(&w * 2.0))))
            },
            newton::sphere_projection(n),
        )?;
        let w = out.z.rows(0, n).into_owned();
        let t = out.z[n];
        if t <= 0.0 {
            return Err(Error::Consistency(format!(
                "radial solve returned nonpositive boundary distance {t}"
            )));
        }
        let hw = self.h(&w)?;
        Ok((r / t, w / hw))
    }

    /// Outward unit normal `G(q) = ∇f(q)/|∇f(q)|` at a point of `M`.
    pub fn gauss_map(&self, q: &Point) -> Result<Point> {
        self.space.check(q)?;
        let (f, grad) = self.gauge_and_gradient(q)?;
        if (f - 1.0).abs() > ON_SURFACE_TOL {
            return Err(Error::Domain(format!(
                "point is not on the hypersurface: gauge = {f}"
            )));
        }
        Ok(grad.normalize())
    }

    /// `true` when `gauge(x) ≥ 1 + margin`. Uses the cheap lower bound
    /// `f(x) ≥ |x|/h(x/|x|)` before falling back to the full gauge.
    pub fn is_exterior(&self, x: &Point, margin: f64) -> Result<bool> {
        self.space.check(x)?;
        let r = x.norm();
        if r == 0.0 {
            return Ok(false);
        }
        if r / self.h(&(x / r))? >= 1.0 + margin {
            return Ok(true);
        }
        Ok(self.gauge(x)? >= 1.0 + margin)
    }

    /// Sampled lower bound for `diam(M)`: the maximal width `p(v) + p(−v)`.
    pub fn diameter(&self, samples: usize) -> Result<f64> {
        if samples < 2 {
            return Err(Error::Validation("diameter needs at least 2 samples".into()));
        }
        let mut best: f64 = 0.0;
        for v in self.directions(samples) {
            best = best.max(self.h(&v)? + self.h(&(-&v))?);
        }
        Ok(best)
    }

    /// Sampled circumradius `max |G⁻¹(v)|`.
    pub fn circumradius(&self, samples: usize) -> Result<f64> {
        let mut best: f64 = 0.0;
        for v in self.directions(samples) {
            best = best.max(self.grad_h(&v)?.norm());
        }
        Ok(best)
    }

    /// Deterministic direction set: an even angular grid in the plane (which
    /// contains the coordinate axes when `n % 4 == 0`), seeded sphere samples
    /// otherwise.
    pub fn directions(&self, n: usize) -> Vec<Point> {
        if self.dim() == 2 {
            (0..n)
                .map(|j| {
                    let t = std::f64::consts::TAU * j as f64 / n as f64;
                    Point::from_vec(vec![t.cos(), t.sin()])
                })
                .collect()
        } else {
            sphere_sample(self.dim(), n, SAMPLE_SEED)
        }
    }

    /// Minimum eigenvalue of the radius-of-curvature operator `∇²h(v)|_{v⊥}`
    /// (support bodies) or of the tangential gauge Hessian (gauge bodies) over
    /// sampled normals plus the coordinate axes.
    pub fn validate_convexity(&self, samples: usize) -> Result<ConvexityReport> {
        if samples == 0 {
            return Err(Error::Validation("convexity check needs at least 1 sample".into()));
        }
        let mut dirs = self.directions(samples);
        if self.dim() > 2 {
            for i in 0..self.dim() {
                for s in [1.0, -1.0] {
                    let mut e = Point::zeros(self.dim());
                    e[i] = s;
                    dirs.push(e);
                }
            }
        }
        let mut min_eig = f64::INFINITY;
        let mut argmin = dirs[0].clone();
        for v in &dirs {
            let basis = tangent_basis(v);
            let b = DMatrix::from_columns(&basis);
            let op = match &self.repr {
                Representation::Gauge(g) => {
                    let q = self.grad_h(v)?;
                    b.transpose() * g.hessian(&q) * &b
                }
                _ => b.transpose() * self.grad_hess_h(v)?.1 * &b,
            };
            let sym = (&op + op.transpose()) * 0.5;
            let eig = SymmetricEigen::new(sym).eigenvalues.min();
            if eig < min_eig {
                min_eig = eig;
                argmin = v.clone();
            }
        }
        Ok(ConvexityReport {
            samples: dirs.len(),
            min_eigenvalue: min_eig,
            argmin_direction: argmin.iter().copied().collect(),
            pass: min_eig > CONVEXITY_FLOOR,
        })
    }
}
