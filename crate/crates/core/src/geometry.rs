//! Linear symplectic arithmetic in ℝ^{2d}.
//!
//! Coordinates are ordered in pairs `(x₁, y₁, …, x_d, y_d)`. The complex
//! rotation acts blockwise, `J(x₁, y₁, …) = (−y₁, x₁, …)`, and the symplectic
//! form is `ω(u, v) = ⟨Ju, v⟩`, so `ω(e₁, e₂) = 1` and the Hamiltonian field of
//! a function `f` is `X_f = J∇f`. Every other module uses this convention.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or vector of the ambient space.
pub type Point = DVector<f64>;

/// The standard symplectic space ℝ^{2d}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticSpace {
    d: usize,
}

impl SymplecticSpace {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Validation("half-dimension must be positive".into()));
        }
        Ok(Self { d })
    }

    /// The space a point lives in; fails for odd or empty coordinate vectors.
    pub fn of_dim(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::Validation(format!(
                "ambient dimension must be even and at least 2, got {n}"
            )));
        }
        Ok(Self { d: n / 2 })
    }

    pub fn half_dim(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        2 * self.d
    }

    pub fn check(&self, u: &Point) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: u.len(),
            });
        }
        Ok(())
    }

    pub fn omega(&self, u: &Point, v: &Point) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(omega(u, v))
    }

    pub fn apply_j(&self, u: &Point) -> Result<Point> {
        self.check(u)?;
        Ok(apply_j(u))
    }

    /// Matrix of `J`; the Gram matrix of `ω` is its transpose.
    pub fn j_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for k in 0..self.d {
            m[(2 * k, 2 * k + 1)] = -1.0;
            m[(2 * k + 1, 2 * k)] = 1.0;
        }
        m
    }

    /// `n` uniformly distributed unit vectors, reproducible for a fixed seed.
    pub fn sphere_sample(&self, n: usize, seed: u64) -> Vec<Point> {
        sphere_sample(self.dim(), n, seed)
    }
}

/// `J u` without a dimension check. `u` must have even length.
pub fn apply_j(u: &Point) -> Point {
    debug_assert!(u.len() % 2 == 0);
    let mut out = Point::zeros(u.len());
    for k in (0..u.len()).step_by(2) {
        out[k] = -u[k + 1];
        out[k + 1] = u[k];
    }
    out
}

/// `ω(u, v) = ⟨Ju, v⟩` without a dimension check.
pub fn omega(u: &Point, v: &Point) -> f64 {
    debug_assert!(u.len() == v.len() && u.len() % 2 == 0);
    let mut acc = 0.0;
    for k in (0..u.len()).step_by(2) {
        acc += u[k] * v[k + 1] - u[k + 1] * v[k];
    }
    acc
}

/// Gaussian-normalized samples on the unit sphere of ℝⁿ.
pub fn sphere_sample(dim: usize, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = Point::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
        let norm = v.norm();
        if norm > 1e-8 {
            out.push(v / norm);
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of a unit vector.
pub fn tangent_basis(v: &Point) -> Vec<Point> {
    let n = v.len();
    let mut basis: Vec<Point> = Vec::with_capacity(n.saturating_sub(1));
    // Seed Gram-Schmidt with the coordinate axes least aligned with v.
    let mut axes: Vec<usize> = (0..n).collect();
    axes.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()));
    for &i in &axes {
        if basis.len() + 1 == n {
            break;
        }
        let mut e = Point::zeros(n);
        e[i] = 1.0;
        e -= v * v[i];
        for b in &basis {
            let c = b.dot(&e);
            e -= b * c;
        }
        let norm = e.norm();
        if norm > 1e-6 {
            basis.push(e / norm);
        }
    }
    basis
}

/// Point at arc length `angle` along the great circle leaving unit `v` in
/// unit tangent direction `u`.
pub fn geodesic(v: &Point, u: &Point, angle: f64) -> Point {
    v * angle.cos() + u * angle.sin()
}

/// Angle between two nonzero vectors, accurate for nearly parallel inputs.
pub fn angle_between(a: &Point, b: &Point) -> f64 {
    let a = a.normalize();
    let b = b.normalize();
    let s = (&a - &b).norm();
    let c = (&a + &b).norm();
    2.0 * s.atan2(c)
}

/// Normalized inner product used for "positively proportional" checks:
/// returns `⟨a, b⟩ / (|a||b|)`, which is `1` exactly when `a ∼ b`.
pub fn alignment(a: &Point, b: &Point) -> f64 {
    a.dot(b) / (a.norm() * b.norm())
}
