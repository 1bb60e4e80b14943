//! Tracer view of the flow: `dPhi/dt = u_re(t, Phi)` together with the
//! Jacobians `J_Phi` (`dJ/dt = div u_re J`, `J(0) = 1`) and `J_y`
//! (`dJ/dt = -div u_re J`, `J(0) = rho_re(0, x)`).

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{divergence, ScalarField, VectorField};

/// A velocity field that can be sampled anywhere.
pub trait VelocitySource: Sync {
    fn velocity(&self, t: f64, x: [f64; 3]) -> [f64; 3];
    fn divergence(&self, t: f64, x: [f64; 3]) -> f64;
    /// Box lengths when the field is periodic; tracers are wrapped into it.
    fn period(&self) -> Option<[f64; 3]>;
}

/// Gridded `u_re`, trilinear in space and linear in time between two snapshots.
pub struct GridVelocity {
    t0: f64,
    t1: f64,
    u: [VectorField; 2],
    div: [ScalarField; 2],
}

impl GridVelocity {
    pub fn frozen(u: VectorField) -> Self {
        let div = divergence(&u);
        Self {
            t0: 0.0,
            t1: 0.0,
            u: [u.clone(), u],
            div: [div.clone(), div],
        }
    }

    pub fn between(t0: f64, u0: VectorField, t1: f64, u1: VectorField) -> Result<Self> {
        u0.grid.same_shape(&u1.grid)?;
        let (d0, d1) = (divergence(&u0), divergence(&u1));
        Ok(Self {
            t0,
            t1,
            u: [u0, u1],
            div: [d0, d1],
        })
    }

    fn weight(&self, t: f64) -> f64 {
        if self.t1 > self.t0 {
            ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

impl VelocitySource for GridVelocity {
    fn velocity(&self, t: f64, x: [f64; 3]) -> [f64; 3] {
        let w = self.weight(t);
        let a = self.u[0].sample(x);
        if w == 0.0 {
            return a;
        }
        let b = self.u[1].sample(x);
        std::array::from_fn(|i| (1.0 - w) * a[i] + w * b[i])
    }

    fn divergence(&self, t: f64, x: [f64; 3]) -> f64 {
        let w = self.weight(t);
        let a = self.div[0].sample(x);
        if w == 0.0 {
            a
        } else {
            (1.0 - w) * a + w * self.div[1].sample(x)
        }
    }

    fn period(&self) -> Option<[f64; 3]> {
        Some(self.u[0].grid.lengths())
    }
}

/// Linear field `u = A x` on unbounded space; `div u = tr A`.
pub struct LinearVelocity(pub [[f64; 3]; 3]);

impl VelocitySource for LinearVelocity {
    fn velocity(&self, _t: f64, x: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| (0..3).map(|j| self.0[i][j] * x[j]).sum())
    }

    fn divergence(&self, _t: f64, _x: [f64; 3]) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    fn period(&self) -> Option<[f64; 3]> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tracer {
    pub position: [f64; 3],
    pub j_phi: f64,
    pub j_y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub tracers: Vec<Tracer>,
}

impl FlowState {
    /// One tracer per grid node with `J_Phi = 1` and `J_y = rho_re(0, x)`.
    pub fn seeded(rho_re0: &ScalarField) -> Self {
        let g = &rho_re0.grid;
        Self {
            tracers: (0..g.len())
                .map(|idx| Tracer {
                    position: g.position(idx),
                    j_phi: 1.0,
                    j_y: rho_re0.data[idx],
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy)]
struct Rate {
    v: [f64; 3],
    div: f64,
}

fn rate(src: &dyn VelocitySource, t: f64, x: [f64; 3]) -> Rate {
    Rate {
        v: src.velocity(t, x),
        div: src.divergence(t, x),
    }
}

/// One RK4 step of the coupled tracer system.
pub fn advance_flow(fs: &FlowState, src: &dyn VelocitySource, t: f64, dt: f64) -> FlowState {
    let period = src.period();
    let tracers = fs
        .tracers
        .par_iter()
        .map(|tr| {
            let x = tr.position;
            let shift = |r: &Rate, s: f64| -> [f64; 3] {
                [x[0] + s * r.v[0], x[1] + s * r.v[1], x[2] + s * r.v[2]]
            };
            // Jacobian rates are linear in J, so each stage only needs div u.
            let k1 = rate(src, t, x);
            let k2 = rate(src, t + 0.5 * dt, shift(&k1, 0.5 * dt));
            let k3 = rate(src, t + 0.5 * dt, shift(&k2, 0.5 * dt));
            let k4 = rate(src, t + dt, shift(&k3, dt));
            let mut pos = x;
            for a in 0..3 {
                pos[a] += dt / 6.0 * (k1.v[a] + 2.0 * k2.v[a] + 2.0 * k3.v[a] + k4.v[a]);
            }
            if let Some(l) = period {
                for a in 0..3 {
                    pos[a] = pos[a].rem_euclid(l[a]);
                }
            }
            let jstep = |j0: f64, sign: f64| {
                let f = |j: f64, r: &Rate| sign * r.div * j;
                let a1 = f(j0, &k1);
                let a2 = f(j0 + 0.5 * dt * a1, &k2);
                let a3 = f(j0 + 0.5 * dt * a2, &k3);
                let a4 = f(j0 + dt * a3, &k4);
                j0 + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            };
            Tracer {
                position: pos,
                j_phi: jstep(tr.j_phi, 1.0),
                j_y: jstep(tr.j_y, -1.0),
            }
        })
        .collect();
    FlowState { tracers }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid};
    use std::f64::consts::PI;

    fn single(x: [f64; 3], j_y: f64) -> FlowState {
        FlowState {
            tracers: vec![Tracer {
                position: x,
                j_phi: 1.0,
                j_y,
            }],
        }
    }

    #[test]
    fn zero_velocity_is_stationary() {
        let g = Grid::cube([4, 4, 4], 1.0).unwrap();
        let src = GridVelocity::frozen(Field::filled(&g, [0.0; 3]));
        let fs = FlowState::seeded(&Field::filled(&g, 1.5));
        assert_eq!(advance_flow(&fs, &src, 0.0, 0.1), fs);
    }

    #[test]
    fn constant_velocity_translates() {
        let g = Grid::cube([4, 4, 4], 1.0).unwrap();
        let c = [0.1, 0.2, -0.3];
        let src = GridVelocity::frozen(Field::filled(&g, c));
        let fs = single([0.5, 0.5, 0.5], 2.0);
        let out = advance_flow(&fs, &src, 0.0, 0.5);
        let tr = out.tracers[0];
        for a in 0..3 {
            assert!((tr.position[a] - (0.5 + 0.5 * c[a])).abs() < 1e-14);
        }
        assert_eq!(tr.j_phi, 1.0);
        assert_eq!(tr.j_y, 2.0);
    }

    #[test]
    fn tracers_wrap_on_torus() {
        let g = Grid::cube([4, 4, 4], 1.0).unwrap();
        let src = GridVelocity::frozen(Field::filled(&g, [1.0, 0.0, 0.0]));
        let out = advance_flow(&single([0.9, 0.0, 0.0], 1.0), &src, 0.0, 0.25);
        assert!((out.tracers[0].position[0] - 0.15).abs() < 1e-14);
    }

    #[test]
    fn linear_field_jacobian_is_exponential_to_fourth_order() {
        let a = [[0.3, 0.1, 0.0], [0.0, -0.1, 0.2], [0.05, 0.0, 0.4]];
        let src = LinearVelocity(a);
        let tr = 0.6;
        let t_end = 1.0;
        let mut errs = Vec::new();
        for steps in [10usize, 20, 40] {
            let dt = t_end / steps as f64;
            let mut fs = single([0.2, -0.1, 0.3], 1.0);
            for n in 0..steps {
                fs = advance_flow(&fs, &src, n as f64 * dt, dt);
            }
            errs.push((fs.tracers[0].j_phi - (tr * t_end).exp()).abs());
        }
        for pair in errs.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!((order - 4.0).abs() < 0.3, "order {order}");
        }
    }

    #[test]
    fn jacobian_product_is_invariant() {
        let g = Grid::cube([1, 1, 32], 1.0).unwrap();
        let u = Field::from_fn(&g, |x| [0.0, 0.0, 0.1 * (2.0 * PI * x[2]).sin()]);
        let rho0 = Field::from_fn(&g, |x| 1.0 + 0.2 * (2.0 * PI * x[2]).cos());
        let src = GridVelocity::frozen(u);
        let mut fs = FlowState::seeded(&rho0);
        for n in 0..50 {
            fs = advance_flow(&fs, &src, n as f64 * 0.02, 0.02);
        }
        for (tr, r0) in fs.tracers.iter().zip(&rho0.data) {
            // RK4 of exp(+a) times RK4 of exp(-a) differs from 1 at O(a^5) per step.
            assert!((tr.j_phi * tr.j_y - r0).abs() < 1e-8 * r0);
        }
    }
}
