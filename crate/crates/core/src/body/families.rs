//! Analytic support and gauge functions for the catalog bodies.
//!
//! Support functions are given through their positively 1-homogeneous
//! extension `h` to ℝⁿ∖{0}. For unit `v`, `∇h(v)` is the boundary point with
//! outward normal `v` and `∇²h(v)` restricted to `v⊥` is the radius-of-curvature
//! operator `p·id + ∇²_S p`.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::geometry::Point;

/// A smooth support function, through its 1-homogeneous extension.
pub trait SupportFunction: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, v: &Point) -> f64;
    fn gradient(&self, v: &Point) -> Point;
    fn hessian(&self, v: &Point) -> DMatrix<f64>;

    /// Closed-form gauge and its gradient, when known.
    fn gauge(&self, _x: &Point) -> Option<(f64, Point)> {
        None
    }
}

/// A smooth positively 1-homogeneous gauge `f` with `M = {f = 1}`.
pub trait GaugeFunction: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Point;
    fn hessian(&self, x: &Point) -> DMatrix<f64>;
}

/// Ellipsoid `Σ xᵢ²/aᵢ² = 1`, support `√(Σ aᵢ² vᵢ²)`.
#[derive(Clone, Debug)]
pub struct EllipsoidSupport {
    axes: Vec<f64>,
}

impl EllipsoidSupport {
    pub fn new(axes: Vec<f64>) -> Self {
        Self { axes }
    }
}

impl SupportFunction for EllipsoidSupport {
    fn dim(&self) -> usize {
        self.axes.len()
    }

    fn value(&self, v: &Point) -> f64 {
        self.axes
            .iter()
            .zip(v.iter())
            .map(|(a, x)| (a * x).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn gradient(&self, v: &Point) -> Point {
        let h = self.value(v);
        Point::from_fn(v.len(), |i, _| self.axes[i].powi(2) * v[i] / h)
    }

    fn hessian(&self, v: &Point) -> DMatrix<f64> {
        let h = self.value(v);
        let g = self.gradient(v);
        let mut m = -(&g * g.transpose());
        for i in 0..v.len() {
            m[(i, i)] += self.axes[i].powi(2);
        }
        m / h
    }

    fn gauge(&self, x: &Point) -> Option<(f64, Point)> {
        let f = self
            .axes
            .iter()
            .zip(x.iter())
            .map(|(a, c)| (c / a).powi(2))
            .sum::<f64>()
            .sqrt();
        let grad = Point::from_fn(x.len(), |i, _| x[i] / (self.axes[i].powi(2) * f));
        Some((f, grad))
    }
}

/// Unit ball of the ℓᵖ norm, `1 < p < 2`; its support function is the dual
/// `ℓ^q` norm with `1/p + 1/q = 1`.
///
/// The support Hessian carries a factor `|vᵢ|^{q−2}`, so the radius of
/// curvature vanishes at coordinate-axis normals.
#[derive(Clone, Debug)]
pub struct PBallSupport {
    p: f64,
    q: f64,
    dim: usize,
}

impl PBallSupport {
    pub fn new(p: f64, dim: usize) -> Self {
        Self {
            p,
            q: p / (p - 1.0),
            dim,
        }
    }

    pub fn dual_exponent(&self) -> f64 {
        self.q
    }
}

fn lp_norm(x: &Point, p: f64) -> f64 {
    x.iter().map(|c| c.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

impl SupportFunction for PBallSupport {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, v: &Point) -> f64 {
        lp_norm(v, self.q)
    }

    fn gradient(&self, v: &Point) -> Point {
        let h = self.value(v);
        v.map(|c| c.signum() * (c.abs() / h).powf(self.q - 1.0))
    }

    fn hessian(&self, v: &Point) -> DMatrix<f64> {
        let h = self.value(v);
        let g = self.gradient(v);
        let q1 = self.q - 1.0;
        let mut m = -(&g * g.transpose()) * (q1 / h);
        for i in 0..v.len() {
            m[(i, i)] += q1 * (v[i].abs() / h).powf(self.q - 2.0) / h;
        }
        m
    }

    fn gauge(&self, x: &Point) -> Option<(f64, Point)> {
        let f = lp_norm(x, self.p);
        let grad = x.map(|c| c.signum() * (c.abs() / f).powf(self.p - 1.0));
        Some((f, grad))
    }
}

/// Sphere of radius `r₀` with a harmonic perturbation in the first
/// coordinate plane: `h(v) = r₀|v| + ε Re((v₁ + i v₂)^k) / |v|^{k−1}`.
///
/// In the plane this is `p(θ) = r₀ + ε cos kθ`, convex for `|ε| < r₀/(k²−1)`;
/// odd `k` gives bodies of constant width `2r₀`.
#[derive(Clone, Debug)]
pub struct HarmonicSupport {
    radius: f64,
    eps: f64,
    mode: u32,
    dim: usize,
}

impl HarmonicSupport {
    pub fn new(radius: f64, eps: f64, mode: u32, dim: usize) -> Self {
        Self {
            radius,
            eps,
            mode,
            dim,
        }
    }
}

#[derive(Clone, Copy)]
struct Cx(f64, f64);

impl Cx {
    fn mul(self, o: Cx) -> Cx {
        Cx(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }

    fn powu(self, k: u32) -> Cx {
        (0..k).fold(Cx(1.0, 0.0), |acc, _| acc.mul(self))
    }
}

impl HarmonicSupport {
    /// `(P, ∇P, ∇²P)` for `P = Re(z^k)`, restricted to the first plane.
    fn plane_harmonic(&self, v: &Point) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let k = self.mode;
        let z = Cx(v[0], v[1]);
        let p = z.powu(k).0;
        let kf = k as f64;
        let d1 = if k >= 1 { z.powu(k - 1) } else { Cx(0.0, 0.0) };
        let grad = [kf * d1.0, -kf * d1.1];
        let c2 = kf * (kf - 1.0);
        let d2 = if k >= 2 { z.powu(k - 2) } else { Cx(0.0, 0.0) };
        let hess = [[c2 * d2.0, -c2 * d2.1], [-c2 * d2.1, -c2 * d2.0]];
        (p, grad, hess)
    }
}

impl SupportFunction for HarmonicSupport {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, v: &Point) -> f64 {
        let r = v.norm();
        let (p, _, _) = self.plane_harmonic(v);
        self.radius * r + self.eps * p / r.powi(self.mode as i32 - 1)
    }

    fn gradient(&self, v: &Point) -> Point {
        let r = v.norm();
        let alpha = self.mode as i32 - 1;
        let (p, gp, _) = self.plane_harmonic(v);
        let ra = r.powi(-alpha);
        let mut g = v * (self.radius / r - self.eps * alpha as f64 * p * ra / (r * r));
        g[0] += self.eps * gp[0] * ra;
        g[1] += self.eps * gp[1] * ra;
        g
    }

    fn hessian(&self, v: &Point) -> DMatrix<f64> {
        let n = v.len();
        let r = v.norm();
        let a = (self.mode as i32 - 1) as f64;
        let (p, gp, hp) = self.plane_harmonic(v);
        let ra = r.powf(-a);
        let r2 = r * r;

        // Sphere part r₀ (I − v vᵀ/r²)/r.
        let vvt = v * v.transpose();
        let mut m = (DMatrix::identity(n, n) - &vvt / r2) * (self.radius / r);

        let mut gpv = Point::zeros(n);
        gpv[0] = gp[0];
        gpv[1] = gp[1];
        let mut hpm = DMatrix::zeros(n, n);
        for i in 0..2 {
            for j in 0..2 {
                hpm[(i, j)] = hp[i][j];
            }
        }
        let cross = &gpv * v.transpose() + v * gpv.transpose();
        let pert = hpm * ra - cross * (a * ra / r2)
            + (DMatrix::identity(n, n) * (-a * ra / r2) + vvt * (a * (a + 2.0) * ra / (r2 * r2)))
                * p;
        m += pert * self.eps;
        m
    }
}

/// Support function of `c·M`.
#[derive(Clone, Debug)]
pub struct ScaledSupport {
    inner: Arc<dyn SupportFunction>,
    factor: f64,
}

impl ScaledSupport {
    pub fn new(inner: Arc<dyn SupportFunction>, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl SupportFunction for ScaledSupport {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, v: &Point) -> f64 {
        self.factor * self.inner.value(v)
    }

    fn gradient(&self, v: &Point) -> Point {
        self.inner.gradient(v) * self.factor
    }

    fn hessian(&self, v: &Point) -> DMatrix<f64> {
        self.inner.hessian(v) * self.factor
    }

    fn gauge(&self, x: &Point) -> Option<(f64, Point)> {
        self.inner
            .gauge(x)
            .map(|(f, g)| (f / self.factor, g / self.factor))
    }
}

/// Ellipsoid given by its gauge `√(Σ xᵢ²/aᵢ²)`.
#[derive(Clone, Debug)]
pub struct EllipsoidGauge {
    axes: Vec<f64>,
}

impl EllipsoidGauge {
    pub fn new(axes: Vec<f64>) -> Self {
        Self { axes }
    }
}

impl GaugeFunction for EllipsoidGauge {
    fn dim(&self) -> usize {
        self.axes.len()
    }

    fn value(&self, x: &Point) -> f64 {
        self.axes
            .iter()
            .zip(x.iter())
            .map(|(a, c)| (c / a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn gradient(&self, x: &Point) -> Point {
        let f = self.value(x);
        Point::from_fn(x.len(), |i, _| x[i] / (self.axes[i].powi(2) * f))
    }

    fn hessian(&self, x: &Point) -> DMatrix<f64> {
        let f = self.value(x);
        let g = self.gradient(x);
        let mut m = -(&g * g.transpose());
        for i in 0..x.len() {
            m[(i, i)] += 1.0 / self.axes[i].powi(2);
        }
        m / f
    }
}

/// Gauge of `c·M`.
#[derive(Clone, Debug)]
pub struct ScaledGauge {
    inner: Arc<dyn GaugeFunction>,
    factor: f64,
}

impl ScaledGauge {
    pub fn new(inner: Arc<dyn GaugeFunction>, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl GaugeFunction for ScaledGauge {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &Point) -> f64 {
        self.inner.value(x) / self.factor
    }

    fn gradient(&self, x: &Point) -> Point {
        self.inner.gradient(x) / self.factor
    }

    fn hessian(&self, x: &Point) -> DMatrix<f64> {
        self.inner.hessian(x) / self.factor
    }
}
