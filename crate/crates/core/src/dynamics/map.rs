//! The outer symplectic billiard map `T(x) = 2m_−(x) − x`, its inverse and square.

use nalgebra::DMatrix;
use serde::Serialize;

use super::reflection::{reflect_minus, reflect_plus, ReflectionSolution, SolverSettings};
use crate::body::ConvexBody;
use crate::duality::HamiltonianAtInfinity;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// One application of `T` with its tangency data.
#[derive(Clone, Debug, Serialize)]
pub struct Step {
    pub image: Point,
    pub reflection: ReflectionSolution,
}

pub fn t_step(
    body: &ConvexBody,
    x: &Point,
    settings: &SolverSettings,
    hint: Option<&Point>,
) -> Result<Step> {
    let reflection = reflect_minus(body, x, settings, hint)?;
    let image = &reflection.m * 2.0 - x;
    ensure_outside(body, &image)?;
    Ok(Step { image, reflection })
}

pub fn t_inv_step(
    body: &ConvexBody,
    x: &Point,
    settings: &SolverSettings,
    hint: Option<&Point>,
) -> Result<Step> {
    let reflection = reflect_plus(body, x, settings, hint)?;
    let image = &reflection.m * 2.0 - x;
    ensure_outside(body, &image)?;
    Ok(Step { image, reflection })
}

fn ensure_outside(body: &ConvexBody, y: &Point) -> Result<()> {
    if body.is_exterior(y, 0.0)? {
        Ok(())
    } else {
        Err(Error::Consistency(format!(
            "iterate {:?} landed inside {}",
            y.as_slice(),
            body.label()
        )))
    }
}

pub fn t_map(body: &ConvexBody, x: &Point, settings: &SolverSettings) -> Result<Point> {
    Ok(t_step(body, x, settings, None)?.image)
}

pub fn t_inv(body: &ConvexBody, x: &Point, settings: &SolverSettings) -> Result<Point> {
    Ok(t_inv_step(body, x, settings, None)?.image)
}

/// `T²`, the second solve warm-started from the first normal.
pub fn t2(body: &ConvexBody, x: &Point, settings: &SolverSettings) -> Result<Point> {
    Ok(t2_steps(body, x, settings, None)?.1.image)
}

pub(crate) fn t2_steps(
    body: &ConvexBody,
    x: &Point,
    settings: &SolverSettings,
    hint: Option<&Point>,
) -> Result<(Step, Step)> {
    let first = t_step(body, x, settings, hint)?;
    let second = t_step(body, &first.image, settings, Some(&first.reflection.v))?;
    Ok((first, second))
}

/// `T^k(x)`, warm-starting each solve from the previous normal.
pub fn t_power(body: &ConvexBody, x: &Point, k: usize, settings: &SolverSettings) -> Result<Vec<Point>> {
    let mut points = Vec::with_capacity(k + 1);
    points.push(x.clone());
    let mut hint: Option<Point> = None;
    for _ in 0..k {
        let step = t_step(body, points.last().unwrap(), settings, hint.as_ref())?;
        hint = Some(step.reflection.v);
        points.push(step.image);
    }
    Ok(points)
}

/// Central-difference Jacobian of `T` at `x`, with step `h·max(1, |x|)`.
pub fn t_jacobian(body: &ConvexBody, x: &Point, settings: &SolverSettings, h: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let base = t_step(body, x, settings, None)?;
    let hint = Some(&base.reflection.v);
    let step = h * x.norm().max(1.0);
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut a = x.clone();
        let mut b = x.clone();
        a[j] += step;
        b[j] -= step;
        let fa = t_step(body, &a, settings, hint)?.image;
        let fb = t_step(body, &b, settings, hint)?.image;
        jac.set_column(j, &((fa - fb) / (2.0 * step)));
    }
    Ok(jac)
}

/// `‖DᵀJ_mat D − J_mat‖_∞` for the finite-difference Jacobian `D` of `T`.
pub fn symplecticity_defect(body: &ConvexBody, x: &Point, settings: &SolverSettings) -> Result<f64> {
    let d = t_jacobian(body, x, settings, 1e-5)?;
    let j = body.space().j_matrix();
    let defect = d.transpose() * &j * &d - j;
    Ok(defect.iter().fold(0.0f64, |acc, e| acc.max(e.abs())))
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitFailure {
    /// Index of the `T²`-step that failed.
    pub step: usize,
    pub message: String,
}

/// Orbit `x, T²x, T⁴x, …` with the two tangency solutions of every step.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitRecord {
    pub body: String,
    pub x0: Point,
    pub settings: SolverSettings,
    pub points: Vec<Point>,
    pub reflections: Vec<(ReflectionSolution, ReflectionSolution)>,
    pub h_values: Vec<f64>,
    pub residual_max: f64,
    pub failure: Option<OrbitFailure>,
}

impl OrbitRecord {
    pub fn steps(&self) -> usize {
        self.reflections.len()
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Iterates `T²` `n_steps` times, warm-starting every solve from the previous
/// normal. Stops at the first failure and records it.
pub fn orbit(
    body: &ConvexBody,
    x0: &Point,
    n_steps: usize,
    settings: &SolverSettings,
) -> Result<OrbitRecord> {
    settings.validate()?;
    let h = HamiltonianAtInfinity::new(body);
    let mut record = OrbitRecord {
        body: body.label().to_string(),
        x0: x0.clone(),
        settings: settings.clone(),
        points: Vec::with_capacity(n_steps + 1),
        reflections: Vec::with_capacity(n_steps),
        h_values: Vec::with_capacity(n_steps + 1),
        residual_max: 0.0,
        failure: None,
    };
    record.h_values.push(h.value(x0)?);
    record.points.push(x0.clone());
    let mut hint: Option<Point> = None;
    for step in 0..n_steps {
        let x = record.points.last().unwrap();
        match t2_steps(body, x, settings, hint.as_ref()) {
            Ok((first, second)) => {
                let y = second.image;
                record.h_values.push(h.value(&y)?);
                record.residual_max = record
                    .residual_max
                    .max(first.reflection.residual)
                    .max(second.reflection.residual);
                hint = Some(second.reflection.v.clone());
                record.points.push(y);
                record.reflections.push((first.reflection, second.reflection));
            }
            Err(e) => {
                record.failure = Some(OrbitFailure {
                    step,
                    message: e.to_string(),
                });
                break;
            }
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::BodySpec;
    use crate::geometry::sphere_sample;

    fn p2(a: f64, b: f64) -> Point {
        Point::from_vec(vec![a, b])
    }

    fn s() -> SolverSettings {
        SolverSettings::default()
    }

    fn catalog() -> Vec<ConvexBody> {
        vec![
            ConvexBody::ellipsoid(vec![1.0, 0.6]).unwrap(),
            ConvexBody::constant_width(0.1).unwrap(),
            ConvexBody::pball(1.5).unwrap(),
            ConvexBody::ellipsoid(vec![1.0, 0.8, 1.2, 0.9]).unwrap(),
            BodySpec::SupportHarmonic { radius: 1.0, eps: 0.02, mode: 3, dim: 4 }
                .build()
                .unwrap(),
        ]
    }

    fn rotate(x: &Point, angle: f64) -> Point {
        p2(
            angle.cos() * x[0] - angle.sin() * x[1],
            angle.sin() * x[0] + angle.cos() * x[1],
        )
    }

    #[test]
    fn circle_map_is_a_rotation() {
        let circle = ConvexBody::unit_circle();
        let tx = t_map(&circle, &p2(2.0, 0.0), &s()).unwrap();
        assert!((tx - p2(-1.0, 3f64.sqrt())).norm() < 1e-12);
        for r in [2.0, 5.0, 50.0] {
            for t in [0.0_f64, 1.0, 4.0] {
                let x = p2(r * t.cos(), r * t.sin());
                let want = rotate(&x, 2.0 * (1.0 / r).acos());
                let got = t_map(&circle, &x, &s()).unwrap();
                assert!((&got - want).norm() < 1e-10);
                assert!((got.norm() - r).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inverse_pair() {
        for body in catalog() {
            for v in sphere_sample(body.dim(), 10, 3) {
                for r in [2.0, 30.0] {
                    let x = &v * r;
                    let y = t_map(&body, &x, &s()).unwrap();
                    assert!((t_inv(&body, &y, &s()).unwrap() - &x).norm() < 1e-9 * r);
                    let m_minus = reflect_minus(&body, &x, &s(), None).unwrap().m;
                    let m_plus = reflect_plus(&body, &y, &s(), None).unwrap().m;
                    assert!((m_minus - m_plus).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn symplectic_on_catalog() {
        for body in catalog() {
            for v in sphere_sample(body.dim(), 8, 17) {
                let defect = symplecticity_defect(&body, &(v * 3.0), &s()).unwrap();
                assert!(defect < 1e-5, "{}: {defect}", body.label());
            }
        }
    }

    #[test]
    fn orbit_reflection_law_and_displacement() {
        for body in catalog() {
            let c1 = body.diameter(400).unwrap();
            let x0 = sphere_sample(body.dim(), 1, 44).remove(0) * 6.0;
            let rec = orbit(&body, &x0, 30, &s()).unwrap();
            assert!(rec.is_complete());
            assert_eq!(rec.points.len(), 31);
            assert_eq!(rec.h_values.len(), 31);
            for (j, (a, b)) in rec.reflections.iter().enumerate() {
                let x = &rec.points[j];
                let tx = &a.m * 2.0 - x;
                assert!(((x + &tx) / 2.0 - &a.m).norm() < 1e-9);
                assert!(((&tx + &rec.points[j + 1]) / 2.0 - &b.m).norm() < 1e-9);
                assert!((&rec.points[j + 1] - x).norm() <= 2.0 * c1 * (1.0 + 1e-6));
            }
        }
    }

    #[test]
    fn circle_orbit_stays_on_its_circle() {
        let circle = ConvexBody::unit_circle();
        let rec = orbit(&circle, &p2(0.0, 7.5), 200, &s()).unwrap();
        for p in &rec.points {
            assert!((p.norm() - 7.5).abs() < 1e-9);
        }
    }

    #[test]
    fn orbit_failure_is_recorded() {
        let circle = ConvexBody::unit_circle();
        let rec = orbit(&circle, &p2(0.5, 0.0), 5, &s()).unwrap();
        assert_eq!(rec.steps(), 0);
        assert_eq!(rec.failure.as_ref().unwrap().step, 0);
        let rec = orbit(&circle, &p2(3.0, 0.0), 0, &s()).unwrap();
        assert_eq!(rec.points.len(), 1);
        assert!(rec.is_complete());
    }
}
