//! Finite-volume update for the conservative `(D, S)` system on the torus:
//! limited linear reconstruction of primitives, Rusanov flux with the
//! light-speed bound, SSP-RK2 in time. Sources enter the momentum rows only.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, ScalarField, VectorField};
use crate::hydro::variables::{norm2, Conserved, Primitive, RelEuler};

#[derive(Clone, Debug)]
pub struct FluidField {
    pub state: Field<Conserved>,
    pub model: RelEuler,
}

impl FluidField {
    pub fn from_primitives(
        grid: &Grid,
        model: RelEuler,
        init: impl Fn([f64; 3]) -> Primitive,
    ) -> Result<Self> {
        let data = (0..grid.len())
            .map(|idx| model.prim_to_cons(&init(grid.position(idx))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            state: Field {
                grid: grid.clone(),
                data,
            },
            model,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.state.grid
    }

    pub fn total_mass(&self) -> f64 {
        self.state.data.iter().map(|c| c.d).sum::<f64>() * self.grid().cell_volume()
    }

    pub fn total_momentum(&self) -> [f64; 3] {
        let mut m = [0.0; 3];
        for c in &self.state.data {
            for a in 0..3 {
                m[a] += c.s[a];
            }
        }
        m.map(|v| v * self.grid().cell_volume())
    }

    /// `rho_re`, which equals the conserved density `D` identically.
    pub fn rho_re(&self) -> ScalarField {
        self.state.map(|c| c.d)
    }

    /// `u_re = S / D`.
    pub fn u_re(&self) -> VectorField {
        self.state.map(|c| [c.s[0] / c.d, c.s[1] / c.d, c.s[2] / c.d])
    }

    pub fn primitives(&self) -> Result<Field<Primitive>> {
        let data = self
            .state
            .data
            .par_iter()
            .enumerate()
            .map(|(cell, c)| self.model.cons_to_prim_cell(c, cell))
            .collect::<Result<Vec<_>>>()?;
        Ok(Field {
            grid: self.grid().clone(),
            data,
        })
    }

    pub fn max_signal_speed(&self) -> f64 {
        self.model.max_signal_speed()
    }

    /// `sqrt(sum (|dD|^2 + |dS|^2) h^3)`.
    pub fn l2_distance(&self, other: &FluidField) -> Result<f64> {
        self.grid().same_shape(other.grid())?;
        let s: f64 = self
            .state
            .data
            .iter()
            .zip(&other.state.data)
            .map(|(a, b)| {
                let dd = a.d - b.d;
                dd * dd
                    + (0..3)
                        .map(|k| (a.s[k] - b.s[k]) * (a.s[k] - b.s[k]))
                        .sum::<f64>()
            })
            .sum();
        Ok((s * self.grid().cell_volume()).sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reconstruction {
    PiecewiseConstant,
    /// Monotonized-central limited slopes in primitive variables.
    LimitedLinear,
}

#[derive(Clone, Copy, Debug)]
pub struct FvScheme {
    pub cfl: f64,
    pub reconstruction: Reconstruction,
}

impl Default for FvScheme {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            reconstruction: Reconstruction::LimitedLinear,
        }
    }
}

#[inline]
fn mc_slope(dm: f64, dp: f64) -> f64 {
    if dm * dp <= 0.0 {
        0.0
    } else {
        let m = (2.0 * dm.abs()).min(2.0 * dp.abs()).min(0.5 * (dm + dp).abs());
        m.copysign(dm)
    }
}

#[inline]
fn limited(prev: &Primitive, cur: &Primitive, next: &Primitive) -> [f64; 4] {
    [
        mc_slope(cur.rho - prev.rho, next.rho - cur.rho),
        mc_slope(cur.u[0] - prev.u[0], next.u[0] - cur.u[0]),
        mc_slope(cur.u[1] - prev.u[1], next.u[1] - cur.u[1]),
        mc_slope(cur.u[2] - prev.u[2], next.u[2] - cur.u[2]),
    ]
}

#[inline]
fn shifted(p: &Primitive, slope: &[f64; 4], half: f64) -> Primitive {
    Primitive {
        rho: p.rho + half * slope[0],
        u: [
            p.u[0] + half * slope[1],
            p.u[1] + half * slope[2],
            p.u[2] + half * slope[3],
        ],
    }
}

impl FvScheme {
    pub fn max_dt(&self, f: &FluidField) -> f64 {
        self.cfl * f.grid().min_active_spacing() / f.max_signal_speed()
    }

    fn admissible(&self, model: &RelEuler, p: &Primitive) -> bool {
        model.eos.contains(p.rho) && model.eps * model.eps * norm2(&p.u) < 1.0
    }

    /// Semi-discrete right-hand side `-div F + (0, source)`.
    pub fn rate(&self, f: &FluidField, source: Option<&VectorField>) -> Result<Vec<Conserved>> {
        let g = f.grid();
        let model = &f.model;
        let prim = f.primitives()?;
        let h = g.spacing();
        let speed = model.max_signal_speed();
        let mut rate: Vec<Conserved> = match source {
            Some(src) => {
                g.same_shape(&src.grid)?;
                src.data.iter().map(|s| Conserved { d: 0.0, s: *s }).collect()
            }
            None => vec![Conserved::ZERO; g.len()],
        };
        for axis in g.active_axes() {
            let slopes: Option<Vec<[f64; 4]>> = match self.reconstruction {
                Reconstruction::PiecewiseConstant => None,
                Reconstruction::LimitedLinear => Some(
                    (0..g.len())
                        .into_par_iter()
                        .map(|i| {
                            limited(
                                &prim.data[g.neighbor(i, axis, -1)],
                                &prim.data[i],
                                &prim.data[g.neighbor(i, axis, 1)],
                            )
                        })
                        .collect(),
                ),
            };
            // Flux through the face between cell i and its upper neighbour.
            let faces = (0..g.len())
                .into_par_iter()
                .map(|i| {
                    let j = g.neighbor(i, axis, 1);
                    let (mut left, mut right) = (prim.data[i], prim.data[j]);
                    if let Some(sl) = &slopes {
                        let l = shifted(&left, &sl[i], 0.5);
                        let r = shifted(&right, &sl[j], -0.5);
                        if self.admissible(model, &l) && self.admissible(model, &r) {
                            left = l;
                            right = r;
                        }
                    }
                    let (ul, fl) = model.state_and_flux(&left, axis)?;
                    let (ur, fr) = model.state_and_flux(&right, axis)?;
                    Ok(fl.axpy(1.0, &fr).axpy(-speed, &ur).axpy(speed, &ul).scale(0.5))
                })
                .collect::<Result<Vec<Conserved>>>()?;
            let inv_h = 1.0 / h[axis];
            for i in 0..g.len() {
                let below = g.neighbor(i, axis, -1);
                rate[i] = rate[i]
                    .axpy(-inv_h, &faces[i])
                    .axpy(inv_h, &faces[below]);
            }
        }
        Ok(rate)
    }

    /// One SSP-RK2 step with a momentum source frozen over the step.
    pub fn step(&self, f: &FluidField, source: Option<&VectorField>, dt: f64) -> Result<FluidField> {
        let limit = self.max_dt(f);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                dt,
                limit,
                context: "finite-volume step",
            });
        }
        let k1 = self.rate(f, source)?;
        let stage = FluidField {
            state: Field {
                grid: f.grid().clone(),
                data: f.state.data.iter().zip(&k1).map(|(u, k)| u.axpy(dt, k)).collect(),
            },
            model: f.model,
        };
        let k2 = self.rate(&stage, source)?;
        let data = f
            .state
            .data
            .iter()
            .zip(stage.state.data.iter().zip(&k2))
            .map(|(u, (u1, k))| u.scale(0.5).axpy(0.5, &u1.axpy(dt, k)))
            .collect();
        Ok(FluidField {
            state: Field {
                grid: f.grid().clone(),
                data,
            },
            model: f.model,
        })
    }

    /// Advance by `duration` in equal CFL-limited steps with a fixed source.
    pub fn evolve(
        &self,
        f: &FluidField,
        source: Option<&VectorField>,
        duration: f64,
    ) -> Result<FluidField> {
        let steps = (duration / self.max_dt(f)).ceil().max(1.0) as usize;
        let dt = duration / steps as f64;
        let mut cur = f.clone();
        for _ in 0..steps {
            cur = self.step(&cur, source, dt)?;
        }
        Ok(cur)
    }
}

/// One step with the default scheme.
pub fn fv_step(f: &FluidField, source: Option<&VectorField>, dt: f64) -> Result<FluidField> {
    FvScheme::default().step(f, source, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::eos::Eos;
    use std::f64::consts::PI;

    fn model() -> RelEuler {
        RelEuler::new(1.0, Eos::linear(0.25)).unwrap()
    }

    fn pulse(grid: &Grid) -> FluidField {
        FluidField::from_primitives(grid, model(), |x| Primitive {
            rho: 1.0 + 0.1 * (2.0 * PI * x[0]).sin(),
            u: [0.05 * (2.0 * PI * x[0]).cos(), 0.0, 0.0],
        })
        .unwrap()
    }

    #[test]
    fn uniform_state_is_preserved() {
        let g = Grid::cube([16, 4, 1], 1.0).unwrap();
        let f = FluidField::from_primitives(&g, model(), |_| Primitive {
            rho: 1.3,
            u: [0.2, -0.1, 0.05],
        })
        .unwrap();
        let scheme = FvScheme::default();
        let next = scheme.step(&f, None, scheme.max_dt(&f)).unwrap();
        for (a, b) in f.state.data.iter().zip(&next.state.data) {
            assert!((a.d - b.d).abs() < 1e-14);
            for k in 0..3 {
                assert!((a.s[k] - b.s[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mass_is_conserved_on_torus() {
        let g = Grid::cube([32, 1, 1], 1.0).unwrap();
        let mut f = pulse(&g);
        let m0 = f.total_mass();
        let scheme = FvScheme::default();
        for _ in 0..20 {
            f = scheme.step(&f, None, scheme.max_dt(&f)).unwrap();
        }
        assert!((f.total_mass() - m0).abs() < 1e-14 * m0);
    }

    #[test]
    fn source_touches_momentum_only() {
        let g = Grid::cube([16, 1, 1], 1.0).unwrap();
        let f = FluidField::from_primitives(&g, model(), |_| Primitive {
            rho: 1.0,
            u: [0.0; 3],
        })
        .unwrap();
        let src = Field::filled(&g, [0.3, 0.0, 0.0]);
        let scheme = FvScheme::default();
        let dt = scheme.max_dt(&f);
        let next = scheme.step(&f, Some(&src), dt).unwrap();
        assert!((next.total_mass() - f.total_mass()).abs() < 1e-15);
        let mom = next.total_momentum();
        assert!((mom[0] - 0.3 * dt).abs() < 1e-14, "{mom:?}");
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let g = Grid::cube([16, 1, 1], 1.0).unwrap();
        let f = pulse(&g);
        assert!(matches!(fv_step(&f, None, 0.1), Err(Error::Cfl { .. })));
    }

    #[test]
    fn signal_speed_bound_is_light_speed() {
        assert_eq!(model().max_signal_speed(), 1.0);
        let m = RelEuler::new(0.1, Eos::linear(0.25)).unwrap();
        assert!((m.max_signal_speed() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_pulse_self_converges() {
        let t = 0.25;
        let runs: Vec<FluidField> = [32usize, 64, 128]
            .iter()
            .map(|&n| {
                let g = Grid::cube([n, 1, 1], 1.0).unwrap();
                FvScheme::default().evolve(&pulse(&g), None, t).unwrap()
            })
            .collect();
        // Restrict fine solutions to coarse nodes (node x = i h is shared).
        let l1 = |coarse: &FluidField, fine: &FluidField| {
            let r = fine.grid().dims()[0] / coarse.grid().dims()[0];
            coarse
                .state
                .data
                .iter()
                .enumerate()
                .map(|(i, c)| (c.d - fine.state.data[i * r].d).abs())
                .sum::<f64>()
                * coarse.grid().cell_volume()
        };
        let e1 = l1(&runs[0], &runs[1]);
        let e2 = l1(&runs[1], &runs[2]);
        let order = (e1 / e2).log2();
        assert!(order >= 1.0, "self-convergence order {order}");
    }
}
