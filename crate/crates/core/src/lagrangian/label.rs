//! Eulerian label field `y(t, x)` of the relativistic Lagrangian transformation.
//!
//! The initial label `y0(x) = (x1, x2, ∫_0^{x3} rho_re(0, x1, x2, s) ds)`
//! grows linearly in `x3`, so it is stored as an affine part
//! `(x1, x2, m x3)` with `m` the mean initial relativistic density plus a
//! periodic remainder. The label map then sends the Eulerian torus
//! `L1 x L2 x L3` onto the Lagrangian torus `L1 x L2 x m L3`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{derivative, Field, Grid, ScalarField, VectorField};

#[derive(Clone, Debug, PartialEq)]
pub struct LabelField {
    /// Slope `m` of the affine part in `x3`.
    pub slope: f64,
    /// Periodic remainder `y - (x1, x2, m x3)`.
    pub remainder: VectorField,
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl LabelField {
    pub fn identity(grid: &Grid) -> Self {
        Self::affine(grid, 1.0)
    }

    pub fn affine(grid: &Grid, slope: f64) -> Self {
        Self {
            slope,
            remainder: Field::filled(grid, [0.0; 3]),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.remainder.grid
    }

    #[inline]
    pub fn affine_part(&self, x: [f64; 3]) -> [f64; 3] {
        [x[0], x[1], self.slope * x[2]]
    }

    /// The Lagrangian torus the labels map onto.
    pub fn lagrangian_grid(&self) -> Grid {
        let g = self.grid();
        let l = g.lengths();
        Grid::new(g.dims(), [l[0], l[1], self.slope * l[2]])
            .expect("positive slope keeps the Lagrangian box valid")
    }

    /// Label of grid node `idx`.
    pub fn at_node(&self, idx: usize) -> [f64; 3] {
        let a = self.affine_part(self.grid().position(idx));
        let r = self.remainder.data[idx];
        [a[0] + r[0], a[1] + r[1], a[2] + r[2]]
    }

    /// `y(x)` at an arbitrary (unwrapped) point, trilinear in the remainder.
    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        let a = self.affine_part(x);
        let r = self.remainder.sample(x);
        [a[0] + r[0], a[1] + r[1], a[2] + r[2]]
    }

    /// `y(x)` and the Jacobian of the interpolant `dy_i/dx_j` at `x`.
    pub fn eval_with_jacobian(&self, x: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
        let st = self.grid().stencil(x);
        let mut y = self.affine_part(x);
        let mut jac = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, self.slope]];
        for c in 0..8 {
            let r = self.remainder.data[st.nodes[c]];
            for i in 0..3 {
                y[i] += st.weights[c] * r[i];
                for j in 0..3 {
                    jac[i][j] += st.dweights[c][j] * r[i];
                }
            }
        }
        (y, jac)
    }

    /// `det(dy/dx)` at every node with fourth-order differences of the remainder.
    pub fn jacobian_det(&self) -> ScalarField {
        let g = self.grid();
        let grads: Vec<[ScalarField; 3]> = (0..3)
            .map(|i| {
                let comp = ScalarField::component(&self.remainder, i);
                [derivative(&comp, 0), derivative(&comp, 1), derivative(&comp, 2)]
            })
            .collect();
        let data = (0..g.len())
            .map(|idx| {
                let mut m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, self.slope]];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] += grads[i][j].data[idx];
                    }
                }
                det3(&m)
            })
            .collect();
        Field {
            grid: g.clone(),
            data,
        }
    }
}

/// Builds `y0` from the initial relativistic density.
///
/// The `x3`-antiderivative of `rho_re - m` is taken spectrally per column, so
/// band-limited densities are integrated exactly. Every `x3` column must have
/// the same mean; otherwise `y0 - (x1, x2, m x3)` is not periodic and no
/// single Lagrangian box exists.
pub fn initial_label(rho_re0: &ScalarField) -> Result<LabelField> {
    let g = &rho_re0.grid;
    if let Some((idx, &v)) = rho_re0
        .data
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v > 0.0 && v.is_finite()))
    {
        return Err(Error::Domain {
            what: "initial relativistic density",
            value: v,
            domain: format!("positive (node {idx})"),
        });
    }
    let [n1, n2, n3] = g.dims();
    let l3 = g.lengths()[2];
    let column = |i: usize, j: usize| -> Vec<f64> {
        (0..n3).map(|k| rho_re0.data[g.index(i, j, k)]).collect()
    };
    let means: Vec<f64> = (0..n2)
        .flat_map(|j| (0..n1).map(move |i| (i, j)))
        .map(|(i, j)| column(i, j).iter().sum::<f64>() / n3 as f64)
        .collect();
    let slope = means.iter().sum::<f64>() / means.len() as f64;
    let spread = means.iter().fold(0.0f64, |s, m| s.max((m - slope).abs()));
    if spread > 1e-12 * slope {
        return Err(Error::Invalid(format!(
            "x3-averages of the initial relativistic density differ by up to {spread:e}; \
             the affine label needs a single slope (vary the density along x3 only, or \
             keep its x3-mean uniform)"
        )));
    }

    let mut remainder = Field::filled(g, [0.0; 3]);
    if n3 > 1 {
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n3);
        let inv = planner.plan_fft_inverse(n3);
        for j in 0..n2 {
            for i in 0..n1 {
                let mut buf: Vec<Complex64> = column(i, j)
                    .iter()
                    .map(|v| Complex64::new(v - slope, 0.0))
                    .collect();
                fwd.process(&mut buf);
                for (m, c) in buf.iter_mut().enumerate() {
                    let s = if m < (n3 + 1) / 2 {
                        m as i64
                    } else {
                        m as i64 - n3 as i64
                    };
                    // The Nyquist mode of an even grid has no odd antiderivative.
                    if s == 0 || (n3 % 2 == 0 && m == n3 / 2) {
                        *c = Complex64::new(0.0, 0.0);
                    } else {
                        let k = 2.0 * std::f64::consts::PI * s as f64 / l3;
                        *c /= Complex64::new(0.0, k);
                    }
                }
                inv.process(&mut buf);
                let base = buf[0].re / n3 as f64;
                for k in 0..n3 {
                    remainder.data[g.index(i, j, k)][2] = buf[k].re / n3 as f64 - base;
                }
            }
        }
    }
    Ok(LabelField { slope, remainder })
}

/// Semi-Lagrangian transport `y_t + u_re · ∇y = 0` over one step with a
/// frozen velocity: each node's departure point is found by an RK4 back-trace
/// through the trilinearly interpolated velocity, and
/// `y_new(x) = y_old(X_dep)`. The affine part is carried exactly, leaving
/// `r_new(x) = r_old(X_dep) + A (X_dep - x)` for the remainder.
///
/// Plain linear interpolation diffuses like first-order upwinding when the
/// displacement is a small fraction of a cell, so the remainder is first
/// corrected by a forward and backward pass (back and forth error
/// compensation), which removes the leading interpolation error.
pub fn advance_label(
    lf: &LabelField,
    velocity: &VectorField,
    dt: f64,
    max_courant: f64,
) -> Result<LabelField> {
    let g = lf.grid();
    g.same_shape(&velocity.grid)?;
    let vmax = velocity
        .data
        .iter()
        .fold(0.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs()).max(v[2].abs()));
    let limit = if vmax > 0.0 {
        max_courant * g.min_active_spacing() / vmax
    } else {
        f64::INFINITY
    };
    if !(dt >= 0.0) || dt > limit {
        return Err(Error::Cfl {
            dt,
            limit,
            context: "label transport",
        });
    }
    if dt == 0.0 || vmax == 0.0 {
        return Ok(lf.clone());
    }
    let ahead = transport(lf, velocity, dt);
    let back = transport(&ahead, velocity, -dt);
    let mut corrected = lf.clone();
    for (c, (r, b)) in corrected
        .remainder
        .data
        .iter_mut()
        .zip(lf.remainder.data.iter().zip(&back.remainder.data))
    {
        for a in 0..3 {
            c[a] = r[a] + 0.5 * (r[a] - b[a]);
        }
    }
    Ok(transport(&corrected, velocity, dt))
}

/// One uncorrected semi-Lagrangian pass; negative `dt` traces forward.
fn transport(lf: &LabelField, velocity: &VectorField, dt: f64) -> LabelField {
    let g = lf.grid();
    let data = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let x = g.position(idx);
            let dep = back_trace(velocity, x, dt);
            let r = lf.remainder.sample(dep);
            let shift = [dep[0] - x[0], dep[1] - x[1], lf.slope * (dep[2] - x[2])];
            [r[0] + shift[0], r[1] + shift[1], r[2] + shift[2]]
        })
        .collect();
    LabelField {
        slope: lf.slope,
        remainder: Field {
            grid: g.clone(),
            data,
        },
    }
}

fn back_trace(velocity: &VectorField, x: [f64; 3], dt: f64) -> [f64; 3] {
    let add = |p: [f64; 3], v: [f64; 3], s: f64| [p[0] + s * v[0], p[1] + s * v[1], p[2] + s * v[2]];
    let k1 = velocity.sample(x);
    let k2 = velocity.sample(add(x, k1, -0.5 * dt));
    let k3 = velocity.sample(add(x, k2, -0.5 * dt));
    let k4 = velocity.sample(add(x, k3, -dt));
    let mut out = x;
    for a in 0..3 {
        out[a] -= dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    }
    out
}

/// `||det(dy/dx) - rho_re||_2 / ||rho_re||_2`.
pub fn verify_density_identity(lf: &LabelField, rho_re: &ScalarField) -> Result<f64> {
    lf.grid().same_shape(&rho_re.grid)?;
    let det = lf.jacobian_det();
    Ok(det.l2_distance(rho_re)? / rho_re.l2_norm())
}
