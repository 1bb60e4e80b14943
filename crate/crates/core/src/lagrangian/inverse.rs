//! Inverse of the label map, `x(t, y)` with `y(t, x(t, y)) = y`.

use crate::error::{Error, Result};
use crate::lagrangian::label::{det3, LabelField};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 50;

/// Per-query damped Newton solver on the trilinear label interpolant.
#[derive(Clone, Copy, Debug)]
pub struct InverseMap<'a> {
    labels: &'a LabelField,
    /// Absolute residual target, `tol * max(L)`.
    abs_tol: f64,
    max_iter: usize,
}

fn solve3(m: &[[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = det3(m);
    if !(det.abs() > 0.0) || !det.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for col in 0..3 {
        let mut mc = *m;
        for row in 0..3 {
            mc[row][col] = r[row];
        }
        out[col] = det3(&mc) / det;
    }
    Some(out)
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl<'a> InverseMap<'a> {
    pub fn new(labels: &'a LabelField) -> Self {
        Self::with_tolerance(labels, DEFAULT_TOL, DEFAULT_MAX_ITER)
    }

    pub fn with_tolerance(labels: &'a LabelField, tol: f64, max_iter: usize) -> Self {
        let l = labels.grid().lengths();
        Self {
            labels,
            abs_tol: tol * l[0].max(l[1]).max(l[2]),
            max_iter,
        }
    }

    /// Eulerian point (wrapped into the fundamental cell) carrying label `y`.
    pub fn locate(&self, y: [f64; 3]) -> Result<[f64; 3]> {
        let lf = self.labels;
        let mut x = [y[0], y[1], y[2] / lf.slope];
        let (fx, mut jac) = lf.eval_with_jacobian(x);
        let mut r = [fx[0] - y[0], fx[1] - y[1], fx[2] - y[2]];
        let mut rn = norm(r);
        for _ in 0..self.max_iter {
            if rn <= self.abs_tol {
                return Ok(lf.grid().wrap(x));
            }
            let Some(dx) = solve3(&jac, r) else {
                break;
            };
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..20 {
                let trial = [x[0] - step * dx[0], x[1] - step * dx[1], x[2] - step * dx[2]];
                let (f, j) = lf.eval_with_jacobian(trial);
                let tr = [f[0] - y[0], f[1] - y[1], f[2] - y[2]];
                let tn = norm(tr);
                if tn < rn {
                    x = trial;
                    jac = j;
                    r = tr;
                    rn = tn;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if rn <= self.abs_tol {
            return Ok(lf.grid().wrap(x));
        }
        Err(Error::Inversion {
            query: y,
            residual: rn,
        })
    }
}

/// Convenience constructor with default tolerances.
pub fn invert_map(labels: &LabelField) -> InverseMap<'_> {
    InverseMap::new(labels)
}
