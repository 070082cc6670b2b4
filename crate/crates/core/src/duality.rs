//! Symplectic polar duality, central symmetrization, the points `n_±(x)`
//! and the Hamiltonian at infinity.
//!
//! For a body with support extension `h` and unit normal `v`, the boundary
//! point is `q = ∇h(v)`, the gauge gradient there is `v/h(v)` and the Reeb
//! vector is `R(q) = J∇f(q) = Jv/h(v)`. The Hamiltonian whose unit level is the
//! symplectic polar of `M ⊖ M` is `H(x) = h̄(Jx)` with `h̄(v) = h(v) + h(−v)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::geometry::{apply_j, geodesic, omega, tangent_basis, Point};

/// Points closer to `M` than this relative gauge margin count as not exterior.
const STRICT_EXTERIOR: f64 = 1e-12;
/// Largest step of the extrapolated spherical gradient.
const SPHERICAL_STEP: f64 = 0.02;
const RIDDERS_SHRINK: f64 = 1.4;
const RIDDERS_LEVELS: usize = 20;
/// Step of the finite-difference tangents in [`check_involution`].
const TANGENT_STEP: f64 = 1e-5;

/// Reeb vector `R(q)` of `M` at `q`: spans the characteristic direction and
/// satisfies `ω(q, R(q)) = 1`.
pub fn reeb(body: &ConvexBody, q: &Point) -> Result<Point> {
    let v = body.gauss_map(q)?;
    Ok(apply_j(&v) / body.h(&v)?)
}

/// The point `R(G⁻¹(v))` of the symplectic polar `M*`.
pub fn symplectic_polar_point(body: &ConvexBody, v: &Point) -> Result<Point> {
    let p = body.support(v)?;
    Ok(apply_j(v) / p)
}

/// Outcome of [`check_involution`].
#[derive(Clone, Debug, Serialize)]
pub struct InvolutionReport {
    pub samples: usize,
    /// Max of `|ω(u, −x)|/(|u||x|)` over finite-difference tangents `u` of `M*`.
    pub max_tangent_violation: f64,
    /// Max of `|ω(R(x), −x) − 1|`.
    pub max_normalization_violation: f64,
}

impl InvolutionReport {
    pub fn max_violation(&self) -> f64 {
        self.max_tangent_violation.max(self.max_normalization_violation)
    }
}

/// Checks `R* ∘ R = −id` on sampled points: at `a = R(x)`, `−x` must be
/// characteristic for `M*` and normalized by `ω(a, −x) = 1`.
pub fn check_involution(body: &ConvexBody, samples: usize) -> Result<InvolutionReport> {
    if samples == 0 {
        return Err(Error::Validation("involution check needs at least 1 sample".into()));
    }
    let polar = |w: &Point| -> Result<Point> { Ok(apply_j(w) / body.h(w)?) };
    let mut tangent: f64 = 0.0;
    let mut normalization: f64 = 0.0;
    for v in body.directions(samples) {
        let x = body.grad_h(&v)?;
        let a = polar(&v)?;
        let minus_x = -&x;
        normalization = normalization.max((omega(&a, &minus_x) - 1.0).abs());
        for e in tangent_basis(&v) {
            let fwd = polar(&geodesic(&v, &e, TANGENT_STEP))?;
            let bwd = polar(&geodesic(&v, &e, -TANGENT_STEP))?;
            let u = (fwd - bwd) / (2.0 * TANGENT_STEP);
            tangent = tangent.max(omega(&u, &minus_x).abs() / (u.norm() * x.norm()));
        }
    }
    Ok(InvolutionReport {
        samples,
        max_tangent_violation: tangent,
        max_normalization_violation: normalization,
    })
}

/// `n_+(x) = G⁻¹(−Jx/|x|)`, the point whose Reeb vector is positively
/// proportional to `x`.
pub fn n_plus(body: &ConvexBody, x: &Point) -> Result<Point> {
    require_exterior(body, x)?;
    let u = apply_j(x) / x.norm();
    body.grad_h(&(-u))
}

/// `n_−(x) = G⁻¹(Jx/|x|)`, the point whose Reeb vector is positively
/// proportional to `−x`.
pub fn n_minus(body: &ConvexBody, x: &Point) -> Result<Point> {
    require_exterior(body, x)?;
    let u = apply_j(x) / x.norm();
    body.grad_h(&u)
}

fn require_exterior(body: &ConvexBody, x: &Point) -> Result<()> {
    if !body.is_exterior(x, STRICT_EXTERIOR)? {
        return Err(Error::Domain(format!(
            "point {:?} is not strictly outside {}",
            x.as_slice(),
            body.label()
        )));
    }
    Ok(())
}

/// The central symmetrization `M̄ = M ⊖ M`, support `p̄(v) = p(v) + p(−v)`.
#[derive(Clone, Debug)]
pub struct SymmetrizedBody {
    base: ConvexBody,
    body: ConvexBody,
}

pub fn symmetrize(body: &ConvexBody) -> SymmetrizedBody {
    SymmetrizedBody {
        base: body.clone(),
        body: body.symmetrized(),
    }
}

impl SymmetrizedBody {
    pub fn base(&self) -> &ConvexBody {
        &self.base
    }

    /// `M̄` as a convex body (gauge, Reeb vectors, `n̄_±`, ...).
    pub fn as_body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn support(&self, v: &Point) -> Result<f64> {
        self.body.support(v)
    }

    /// `Ḡ⁻¹(v) = p̄(v)v + ∇_S p̄(v)`, with the spherical gradient taken by
    /// Ridders-extrapolated central differences of `p̄` along geodesics.
    /// Uses support values only.
    pub fn support_point(&self, v: &Point) -> Result<Point> {
        let p = self.body.support(v)?;
        let mut x = v * p;
        for e in tangent_basis(v) {
            let slope = ridders(
                |step| {
                    let fwd = self.body.h(&geodesic(v, &e, step))?;
                    let bwd = self.body.h(&geodesic(v, &e, -step))?;
                    Ok((fwd - bwd) / (2.0 * step))
                },
                SPHERICAL_STEP,
            )?;
            x += &e * slope;
        }
        Ok(x)
    }

    /// `G⁻¹(v) − G⁻¹(−v)` from the base body.
    pub fn split_support_point(&self, v: &Point) -> Result<Point> {
        Ok(self.base.support_point(v)? - self.base.support_point(&(-v))?)
    }

    /// `n̄_+(x) = Ḡ⁻¹(−Jx/|x|)`.
    pub fn n_plus(&self, x: &Point) -> Result<Point> {
        require_exterior(&self.body, x)?;
        self.support_point(&(-apply_j(x) / x.norm()))
    }

    /// `n̄_−(x) = Ḡ⁻¹(Jx/|x|)`.
    pub fn n_minus(&self, x: &Point) -> Result<Point> {
        require_exterior(&self.body, x)?;
        self.support_point(&(apply_j(x) / x.norm()))
    }
}

/// The 1-homogeneous Hamiltonian `H` with `{H = 1} = (M ⊖ M)*`, and the
/// shadow field `V = −2X_H`.
#[derive(Clone, Debug)]
pub struct HamiltonianAtInfinity {
    symm: SymmetrizedBody,
}

pub fn hamiltonian(body: &ConvexBody) -> HamiltonianAtInfinity {
    HamiltonianAtInfinity::new(body)
}

impl HamiltonianAtInfinity {
    pub fn new(body: &ConvexBody) -> Self {
        Self {
            symm: symmetrize(body),
        }
    }

    pub fn base(&self) -> &ConvexBody {
        &self.symm.base
    }

    pub fn symmetrized(&self) -> &SymmetrizedBody {
        &self.symm
    }

    pub fn dim(&self) -> usize {
        self.symm.base.dim()
    }

    /// `H(x) = p̄(Jx)`; also the norm `|x|_H`.
    pub fn value(&self, x: &Point) -> Result<f64> {
        self.symm.base.space().check(x)?;
        if x.norm() == 0.0 {
            return Ok(0.0);
        }
        self.symm.body.h(&apply_j(x))
    }

    /// `X_H(x) = Ḡ⁻¹(Jx/|x|)`, evaluated on the symmetrized body.
    pub fn field(&self, x: &Point) -> Result<Point> {
        self.symm.base.space().check(x)?;
        if x.norm() == 0.0 {
            return Err(Error::Domain("Hamiltonian field undefined at the origin".into()));
        }
        self.symm.support_point(&(apply_j(x) / x.norm()))
    }

    /// `V(x) = 2(n_+(x) − n_−(x))` for `x` outside `M̄`.
    pub fn shadow_field(&self, x: &Point) -> Result<Point> {
        self.symm.base.space().check(x)?;
        require_exterior(&self.symm.body, x)?;
        self.velocity(x)
    }

    /// `V(x)` without the exterior check; defined for every `x ≠ 0`.
    pub fn velocity(&self, x: &Point) -> Result<Point> {
        let r = x.norm();
        if r == 0.0 {
            return Err(Error::Domain("shadow field undefined at the origin".into()));
        }
        let u = apply_j(x) / r;
        let base = &self.symm.base;
        Ok((base.grad_h(&(-&u))? - base.grad_h(&u)?) * 2.0)
    }

    /// Jacobian of `V` at `x`, `−2 ∂/∂x [∇h(−Jx̂) − ...]` assembled from support Hessians.
    pub fn velocity_jacobian(&self, x: &Point) -> Result<DMatrix<f64>> {
        let r = x.norm();
        let n = x.len();
        let xh = x / r;
        let u = apply_j(&xh);
        let base = &self.symm.base;
        let (_, h_plus) = base.grad_hess_h(&(-&u))?;
        let (_, h_minus) = base.grad_hess_h(&u)?;
        // d(Jx/|x|)/dx = J (I − x̂x̂ᵀ)/|x|
        let proj = (DMatrix::identity(n, n) - &xh * xh.transpose()) / r;
        let jmat = self.symm.base.space().j_matrix();
        let du = jmat * proj;
        Ok((-(h_plus + h_minus) * du) * 2.0)
    }

    /// `μ = max(max_{|x|=1} H, max_{|x|=1} 1/H)`, so that
    /// `|x|/μ ≤ H(x) ≤ μ|x|`. Sampled extremes are polished by projected
    /// gradient steps on the sphere.
    pub fn norm_equivalence(&self, samples: usize) -> Result<f64> {
        if samples == 0 {
            return Err(Error::Validation("norm equivalence needs at least 1 sample".into()));
        }
        let sym = &self.symm.body;
        let dirs = self.symm.base.directions(samples);
        let mut values = Vec::with_capacity(dirs.len());
        for w in &dirs {
            values.push(sym.h(w)?);
        }
        let mut order: Vec<usize> = (0..dirs.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let picks = order.len().min(POLISH_STARTS);
        let mut h_max = values[order[order.len() - 1]];
        let mut h_min = values[order[0]];
        for &i in &order[order.len() - picks..] {
            h_max = h_max.max(polish(sym, &dirs[i], 1.0)?);
        }
        for &i in &order[..picks] {
            h_min = h_min.min(-polish(sym, &dirs[i], -1.0)?);
        }
        Ok(h_max.max(1.0 / h_min))
    }
}

const POLISH_STARTS: usize = 4;
const POLISH_ITERS: usize = 200;

/// Ascends `sign·h` on the unit sphere from `w`; returns the best `sign·h`.
fn polish(body: &ConvexBody, w: &Point, sign: f64) -> Result<f64> {
    let mut w = w.clone();
    let mut best = sign * body.h(&w)?;
    let mut step = 0.1;
    for _ in 0..POLISH_ITERS {
        let g = body.grad_h(&w)? * sign;
        let t = &g - &w * g.dot(&w);
        if t.norm() < 1e-14 || step < 1e-14 {
            break;
        }
        let trial = (&w + &t * step).normalize();
        let value = sign * body.h(&trial)?;
        if value > best {
            best = value;
            w = trial;
            step *= 1.5;
        } else {
            step *= 0.5;
        }
    }
    Ok(best)
}

/// Ridders' extrapolation of a central difference quotient `d(h)` to `h → 0`.
/// Returns the tableau entry with the smallest error estimate over all levels.
/// No early exit: stencils straddling a loss of smoothness give erratic early
/// rows, and the clean small-step rows only appear later.
fn ridders(d: impl Fn(f64) -> Result<f64>, h0: f64) -> Result<f64> {
    let c2 = RIDDERS_SHRINK * RIDDERS_SHRINK;
    let mut prev: Vec<f64> = vec![d(h0)?];
    let mut best = prev[0];
    let mut err = f64::INFINITY;
    let mut h = h0;
    for _ in 1..RIDDERS_LEVELS {
        h /= RIDDERS_SHRINK;
        let mut row = Vec::with_capacity(prev.len() + 1);
        row.push(d(h)?);
        let mut fac = c2;
        for j in 0..prev.len() {
            let next = (row[j] * fac - prev[j]) / (fac - 1.0);
            fac *= c2;
            let e = (next - row[j]).abs().max((next - prev[j]).abs());
            if e <= err {
                err = e;
                best = next;
            }
            row.push(next);
        }
        prev = row;
    }
    Ok(best)
}
