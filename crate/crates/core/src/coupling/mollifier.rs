//! Discrete bump-function mollifier `zeta_delta` on the periodic grid.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap {
    pub offset: [isize; 3],
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct MollifierKernel {
    pub delta: f64,
    pub taps: Vec<Tap>,
    spacing: [f64; 3],
    dims: [usize; 3],
}

/// Unnormalized `exp(-1 / (1 - s^2))` for `s < 1`.
fn bump(s2: f64) -> f64 {
    if s2 < 1.0 {
        (-1.0 / (1.0 - s2)).exp()
    } else {
        0.0
    }
}

fn offsets(radius: isize) -> impl Iterator<Item = isize> {
    -radius..=radius
}

/// Samples `zeta(x / delta)` at the lattice offsets of `grid` and renormalizes
/// to unit sum. Axes with a single node carry no offsets; the kernel is
/// integrated along them on a virtual lattice of the largest active spacing so
/// that the taps still describe a three-dimensional bump.
pub fn build_mollifier(delta: f64, grid: &Grid) -> Result<MollifierKernel> {
    let hmax = grid.max_active_spacing();
    if !(delta.is_finite() && delta >= 2.0 * hmax * (1.0 - 1e-12)) {
        return Err(Error::config(
            "delta",
            format!("mollifier width {delta} must be at least twice the grid spacing {hmax}"),
        ));
    }
    let h = grid.spacing();
    let step: [f64; 3] = std::array::from_fn(|a| if grid.is_active(a) { h[a] } else { hmax });
    let radius: [isize; 3] = std::array::from_fn(|a| (delta / step[a]).floor() as isize);
    let mut taps = Vec::new();
    let active_range = |a: usize| if grid.is_active(a) { radius[a] } else { 0 };
    for k in offsets(active_range(2)) {
        for j in offsets(active_range(1)) {
            for i in offsets(active_range(0)) {
                let off = [i, j, k];
                let mut w = 0.0;
                // Marginalize the inactive axes.
                let virt = |a: usize| if grid.is_active(a) { 0 } else { radius[a] };
                for vk in offsets(virt(2)) {
                    for vj in offsets(virt(1)) {
                        for vi in offsets(virt(0)) {
                            let pos = [i + vi, j + vj, k + vk];
                            let s2: f64 = (0..3)
                                .map(|a| {
                                    let x = pos[a] as f64 * step[a] / delta;
                                    x * x
                                })
                                .sum();
                            w += bump(s2);
                        }
                    }
                }
                if w > 0.0 {
                    taps.push(Tap { offset: off, weight: w });
                }
            }
        }
    }
    let total: f64 = taps.iter().map(|t| t.weight).sum();
    for t in &mut taps {
        t.weight /= total;
    }
    Ok(MollifierKernel {
        delta,
        taps,
        spacing: h,
        dims: grid.dims(),
    })
}

impl MollifierKernel {
    /// Periodic discrete convolution `sum_j w_j f(x - j h)`.
    pub fn convolve(&self, f: &ScalarField) -> Result<ScalarField> {
        let g = &f.grid;
        if g.dims() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                got: g.dims(),
            });
        }
        let n = self.dims.map(|d| d as isize);
        let data = (0..g.len())
            .into_par_iter()
            .map(|idx| {
                let c = g.coords(idx);
                self.taps
                    .iter()
                    .map(|t| {
                        let q: [usize; 3] = std::array::from_fn(|a| {
                            (c[a] as isize - t.offset[a]).rem_euclid(n[a]) as usize
                        });
                        t.weight * f.data[g.index(q[0], q[1], q[2])]
                    })
                    .sum()
            })
            .collect();
        Ok(Field {
            grid: g.clone(),
            data,
        })
    }

    /// Discrete symbol `sum_j w_j cos(k . j h)`; real because the taps are even.
    pub fn symbol(&self, k: [f64; 3]) -> f64 {
        self.taps
            .iter()
            .map(|t| {
                let phase: f64 = (0..3)
                    .map(|a| k[a] * t.offset[a] as f64 * self.spacing[a])
                    .sum();
                t.weight * phase.cos()
            })
            .sum()
    }
}
