//! Damped Newton iteration shared by the support-point, radial and
//! reflection solves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug)]
pub(crate) struct NewtonOutcome {
    pub z: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `F(z) = 0` for a square system. `eval` returns the residual and
/// Jacobian at `z`; `project` maps an updated iterate back onto the
/// constraint manifold (e.g. renormalizes a sphere block).
///
/// Steps are halved until the residual norm decreases. Iteration stops at
/// `residual <= tol` or after `max_iter` steps; anything else is an error.
pub(crate) fn solve<E, P>(
    z0: DVector<f64>,
    tol: f64,
    max_iter: usize,
    context: &'static str,
    mut eval: E,
    project: P,
) -> Result<NewtonOutcome>
where
    E: FnMut(&DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)>,
    P: Fn(DVector<f64>) -> DVector<f64>,
{
    let mut z = project(z0);
    let (mut f, mut jac) = eval(&z)?;
    let mut residual = f.norm();
    let mut iterations = 0;
    while residual > tol && iterations < max_iter {
        iterations += 1;
        let Some(step) = jac.clone().lu().solve(&(-&f)) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = project(&z + &step * t);
            if trial.iter().all(|c| c.is_finite()) {
                if let Ok((f_try, jac_try)) = eval(&trial) {
                    let r_try = f_try.norm();
                    if r_try < residual {
                        z = trial;
                        f = f_try;
                        jac = jac_try;
                        residual = r_try;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if residual.is_finite() && residual <= tol {
        Ok(NewtonOutcome {
            z,
            residual,
            iterations,
        })
    } else {
        Err(Error::Solver {
            context,
            iterations,
            residual,
        })
    }
}

/// Renormalizes the first `n` coordinates of `z` to the unit sphere.
pub(crate) fn sphere_projection(n: usize) -> impl Fn(DVector<f64>) -> DVector<f64> {
    move |mut z: DVector<f64>| {
        let norm = z.rows(0, n).norm();
        if norm > 0.0 {
            z.rows_mut(0, n).unscale_mut(norm);
        }
        z
    }
}

/// Stacks `[a b; c 0]` for the bordered systems used throughout.
pub(crate) fn bordered(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, 1)).copy_from(b);
    m.view_mut((n, 0), (1, n)).copy_from(&c.transpose());
    m
}
