//! Flow `φ_t` of the shadow field `ẋ = V(x)` by an adaptive Dormand–Prince 5(4) scheme.

use serde::Serialize;

use crate::duality::HamiltonianAtInfinity;
use crate::error::{Error, Result};
use crate::geometry::Point;

pub const DEFAULT_FLOW_TOL: f64 = 1e-10;
const MIN_STEP_FRACTION: f64 = 1e-14;
const MAX_STEPS: usize = 1_000_000;

// Dormand–Prince coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Debug, Serialize)]
pub struct FlowResult {
    pub point: Point,
    pub accepted: usize,
    pub rejected: usize,
    /// Max over accepted steps of `|H(x_t) − H(x_0)|/H(x_0)`.
    pub h_drift: f64,
}

/// `φ_t(x)` with relative step tolerance `tol`.
pub fn flow(h: &HamiltonianAtInfinity, x: &Point, t: f64, tol: f64) -> Result<Point> {
    Ok(flow_with_report(h, x, t, tol)?.point)
}

pub fn flow_with_report(
    h: &HamiltonianAtInfinity,
    x: &Point,
    t: f64,
    tol: f64,
) -> Result<FlowResult> {
    if !t.is_finite() {
        return Err(Error::Integration(format!("flow time {t} is not finite")));
    }
    if !(tol > 0.0) {
        return Err(Error::Validation("flow tolerance must be positive".into()));
    }
    h.base().space().check(x)?;
    if !h.symmetrized().as_body().is_exterior(x, 0.0)? {
        return Err(Error::Domain(format!(
            "flow start {:?} is not outside the symmetrized body",
            x.as_slice()
        )));
    }
    let h0 = h.value(x)?;
    let mut result = FlowResult {
        point: x.clone(),
        accepted: 0,
        rejected: 0,
        h_drift: 0.0,
    };
    if t == 0.0 {
        return Ok(result);
    }
    let dir = t.signum();
    let span = t.abs();
    let field = |y: &Point| -> Result<Point> { Ok(h.velocity(y)? * dir) };

    let mut y = x.clone();
    let mut s = 0.0;
    let mut k1 = field(&y)?;
    let mut step = initial_step(&y, &k1, span, tol);
    let mut k = vec![Point::zeros(x.len()); 7];
    while s < span {
        if result.accepted + result.rejected > MAX_STEPS {
            return Err(Error::Integration("flow step budget exhausted".into()));
        }
        if step < MIN_STEP_FRACTION * span.max(1.0) {
            return Err(Error::Integration(format!(
                "step size underflow at time {} near {:?}",
                s * dir,
                y.as_slice()
            )));
        }
        let last = s + step >= span;
        if last {
            step = span - s;
        }
        k[0] = k1.clone();
        for stage in 1..7 {
            let mut arg = y.clone();
            for (j, kj) in k.iter().enumerate().take(stage) {
                if A[stage][j] != 0.0 {
                    arg.axpy(step * A[stage][j], kj, 1.0);
                }
            }
            debug_assert!(C[stage] > 0.0);
            k[stage] = field(&arg)?;
        }
        let mut y5 = y.clone();
        let mut err = Point::zeros(x.len());
        for stage in 0..7 {
            y5.axpy(step * B5[stage], &k[stage], 1.0);
            err.axpy(step * (B5[stage] - B4[stage]), &k[stage], 1.0);
        }
        let scale = tol * (1.0 + y.norm().max(y5.norm()));
        let ratio = err.norm() / scale;
        if ratio <= 1.0 {
            s = if last { span } else { s + step };
            y = y5;
            k1 = k[6].clone();
            result.accepted += 1;
            let hv = h.value(&y)?;
            result.h_drift = result.h_drift.max((hv - h0).abs() / h0);
        } else {
            result.rejected += 1;
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        step *= factor;
    }
    result.point = y;
    Ok(result)
}

fn initial_step(y: &Point, f: &Point, span: f64, tol: f64) -> f64 {
    let speed = f.norm().max(f64::MIN_POSITIVE);
    let guess = tol.powf(0.2) * (1.0 + y.norm()) / speed;
    guess.min(span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::ConvexBody;
    use crate::geometry::sphere_sample;

    fn p2(a: f64, b: f64) -> Point {
        Point::from_vec(vec![a, b])
    }

    #[test]
    fn circle_flow_is_clockwise_rotation() {
        let h = HamiltonianAtInfinity::new(&ConvexBody::unit_circle());
        for r in [3.0, 10.0, 100.0] {
            for t in [0.5, 1.0, 7.0] {
                let got = flow(&h, &p2(r, 0.0), t, DEFAULT_FLOW_TOL).unwrap();
                let want = p2(r * (4.0 * t / r).cos(), -r * (4.0 * t / r).sin());
                assert!((got - want).norm() < 1e-8 * r);
            }
        }
    }

    #[test]
    fn conserves_h_and_scales() {
        // pball's field has kinks across the axes and needs the tighter tolerance.
        let bodies = [
            (ConvexBody::ellipsoid(vec![1.0, 0.6]).unwrap(), DEFAULT_FLOW_TOL),
            (ConvexBody::pball(1.5).unwrap(), 1e-12),
            (ConvexBody::ellipsoid(vec![1.0, 0.8, 1.2, 0.9]).unwrap(), DEFAULT_FLOW_TOL),
        ];
        for (body, tol) in bodies {
            let h = HamiltonianAtInfinity::new(&body);
            for v in sphere_sample(body.dim(), 4, 2) {
                let x = v * 5.0;
                let rep = flow_with_report(&h, &x, 10.0, tol).unwrap();
                assert!(rep.h_drift < 1e-8, "{}: {}", body.label(), rep.h_drift);
                let a = flow(&h, &(&x * 2.0), 2.0, DEFAULT_FLOW_TOL).unwrap();
                let b = flow(&h, &x, 1.0, DEFAULT_FLOW_TOL).unwrap() * 2.0;
                assert!((&a - &b).norm() < 1e-8 * b.norm());
            }
        }
    }

    #[test]
    fn backward_flow_inverts() {
        let h = HamiltonianAtInfinity::new(&ConvexBody::ellipsoid(vec![1.0, 0.6]).unwrap());
        let x = p2(4.0, 1.0);
        let y = flow(&h, &x, 3.0, DEFAULT_FLOW_TOL).unwrap();
        assert!((flow(&h, &y, -3.0, DEFAULT_FLOW_TOL).unwrap() - &x).norm() < 1e-8);
        assert_eq!(flow(&h, &x, 0.0, 1e-10).unwrap(), x);
    }

    #[test]
    fn rejects_bad_input() {
        let h = HamiltonianAtInfinity::new(&ConvexBody::unit_circle());
        assert!(matches!(flow(&h, &p2(1.0, 0.0), 1.0, 1e-10), Err(Error::Domain(_))));
        assert!(flow(&h, &p2(3.0, 0.0), f64::NAN, 1e-10).is_err());
        assert!(flow(&h, &p2(3.0, 0.0), 1.0, 0.0).is_err());
    }
}
