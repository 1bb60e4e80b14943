//! Periodic uniform grids and the stencils shared by every solver.
//!
//! Nodes sit at `x = i * h` on a torus of side `lengths`. An axis with a
//! single node is *inactive*: fields are constant along it, derivatives
//! along it vanish and interpolation ignores it. This is how slab runs
//! (for example `N x 1 x 1`) are expressed.
//!
//! Storage order is x-fastest: `index = i + n1 * (j + n2 * k)`.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dims: [usize; 3],
    lengths: [f64; 3],
}

impl Grid {
    pub fn new(dims: [usize; 3], lengths: [f64; 3]) -> Result<Self> {
        for axis in 0..3 {
            if dims[axis] == 0 {
                return Err(Error::Invalid(format!("grid axis {axis} has zero nodes")));
            }
            if !(lengths[axis].is_finite() && lengths[axis] > 0.0) {
                return Err(Error::Domain {
                    what: "grid length",
                    value: lengths[axis],
                    domain: "positive and finite".into(),
                });
            }
        }
        Ok(Self { dims, lengths })
    }

    /// Cube `[0, length)^3` with the given node counts.
    pub fn cube(dims: [usize; 3], length: f64) -> Result<Self> {
        Self::new(dims, [length; 3])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn spacing(&self) -> [f64; 3] {
        [
            self.lengths[0] / self.dims[0] as f64,
            self.lengths[1] / self.dims[1] as f64,
            self.lengths[2] / self.dims[2] as f64,
        ]
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1] * h[2]
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.dims[axis] > 1
    }

    pub fn active_axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(move |&a| self.is_active(a))
    }

    /// Smallest spacing over active axes (the full length when no axis is active).
    pub fn min_active_spacing(&self) -> f64 {
        let h = self.spacing();
        let m = self.active_axes().map(|a| h[a]).fold(f64::INFINITY, f64::min);
        if m.is_finite() {
            m
        } else {
            self.lengths.iter().copied().fold(f64::INFINITY, f64::min)
        }
    }

    pub fn max_active_spacing(&self) -> f64 {
        let h = self.spacing();
        self.active_axes().map(|a| h[a]).fold(0.0, f64::max)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let h = self.spacing();
        [c[0] as f64 * h[0], c[1] as f64 * h[1], c[2] as f64 * h[2]]
    }

    /// Periodic neighbour of `idx` shifted by `offset` nodes along `axis`.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, offset: isize) -> usize {
        let mut c = self.coords(idx);
        let n = self.dims[axis] as isize;
        c[axis] = (c[axis] as isize + offset).rem_euclid(n) as usize;
        self.index(c[0], c[1], c[2])
    }

    /// Wrap a point into the fundamental cell `[0, L)^3`.
    pub fn wrap(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = x;
        for a in 0..3 {
            out[a] = x[a].rem_euclid(self.lengths[a]);
            if out[a] >= self.lengths[a] {
                out[a] = 0.0;
            }
        }
        out
    }

    pub fn same_shape(&self, other: &Grid) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                got: other.dims,
            });
        }
        Ok(())
    }
}

/// A value per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    pub grid: Grid,
    pub data: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type VectorField = Field<[f64; 3]>;

impl<T: Clone> Field<T> {
    pub fn filled(grid: &Grid, value: T) -> Self {
        Self {
            data: vec![value; grid.len()],
            grid: grid.clone(),
        }
    }
}

impl<T> Field<T> {
    pub fn from_fn(grid: &Grid, f: impl FnMut([f64; 3]) -> T) -> Self {
        let mut f = f;
        let data = (0..grid.len()).map(|idx| f(grid.position(idx))).collect();
        Self {
            grid: grid.clone(),
            data,
        }
    }

    pub fn from_vec(grid: &Grid, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "field has {} values but the grid has {} nodes",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            data,
        })
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Field<U> {
        Field {
            grid: self.grid.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl ScalarField {
    /// Sum of values times cell volume.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn l2_distance(&self, other: &ScalarField) -> Result<f64> {
        self.grid.same_shape(&other.grid)?;
        let s: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok((s * self.grid.cell_volume()).sqrt())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn component(field: &VectorField, axis: usize) -> ScalarField {
        field.map(|v| v[axis])
    }
}

/// Fourth-order centered first derivative at one node.
#[inline]
pub fn d1_at<T>(field: &Field<T>, idx: usize, axis: usize) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let g = &field.grid;
    let h = g.spacing()[axis];
    let p1 = field.data[g.neighbor(idx, axis, 1)];
    let p2 = field.data[g.neighbor(idx, axis, 2)];
    let m1 = field.data[g.neighbor(idx, axis, -1)];
    let m2 = field.data[g.neighbor(idx, axis, -2)];
    ((p1 - m1) * 8.0 - (p2 - m2)) * (1.0 / (12.0 * h))
}

/// Fourth-order centered derivative of a whole scalar field; zero along inactive axes.
pub fn derivative(field: &ScalarField, axis: usize) -> ScalarField {
    if !field.grid.is_active(axis) {
        return Field::filled(&field.grid, 0.0);
    }
    let data = (0..field.grid.len())
        .map(|idx| d1_at(field, idx, axis))
        .collect();
    Field {
        grid: field.grid.clone(),
        data,
    }
}

pub fn gradient(field: &ScalarField) -> VectorField {
    let parts = [derivative(field, 0), derivative(field, 1), derivative(field, 2)];
    let data = (0..field.grid.len())
        .map(|i| [parts[0].data[i], parts[1].data[i], parts[2].data[i]])
        .collect();
    Field {
        grid: field.grid.clone(),
        data,
    }
}

pub fn divergence(field: &VectorField) -> ScalarField {
    let mut out = Field::filled(&field.grid, 0.0);
    for axis in field.grid.active_axes() {
        let comp = ScalarField::component(field, axis);
        let d = derivative(&comp, axis);
        for (o, v) in out.data.iter_mut().zip(&d.data) {
            *o += v;
        }
    }
    out
}

/// Second-order centered Laplacian.
pub fn laplacian2(field: &ScalarField) -> ScalarField {
    let g = &field.grid;
    let h = g.spacing();
    let mut out = Field::filled(g, 0.0);
    for axis in g.active_axes() {
        let inv = 1.0 / (h[axis] * h[axis]);
        for idx in 0..g.len() {
            let p = field.data[g.neighbor(idx, axis, 1)];
            let m = field.data[g.neighbor(idx, axis, -1)];
            out.data[idx] += (p - 2.0 * field.data[idx] + m) * inv;
        }
    }
    out
}

/// Corner indices and weights of the periodic trilinear stencil containing `x`,
/// plus the derivative of each weight with respect to `x`.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    pub nodes: [usize; 8],
    pub weights: [f64; 8],
    pub dweights: [[f64; 3]; 8],
}

impl Grid {
    pub fn stencil(&self, x: [f64; 3]) -> Stencil {
        let h = self.spacing();
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let n = self.dims[a];
            if n == 1 {
                continue;
            }
            let s = x[a] / h[a];
            let fl = s.floor();
            frac[a] = s - fl;
            let i0 = (fl as i64).rem_euclid(n as i64) as usize;
            lo[a] = i0;
            hi[a] = (i0 + 1) % n;
        }
        let mut st = Stencil {
            nodes: [0; 8],
            weights: [0.0; 8],
            dweights: [[0.0; 3]; 8],
        };
        for corner in 0..8 {
            let pick = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let mut c = [0usize; 3];
            let mut w1 = [0.0; 3];
            let mut dw1 = [0.0; 3];
            for a in 0..3 {
                if self.dims[a] == 1 {
                    // Inactive axis: all weight on the upper "corner" is dropped.
                    c[a] = 0;
                    w1[a] = if pick[a] == 0 { 1.0 } else { 0.0 };
                    dw1[a] = 0.0;
                } else if pick[a] == 0 {
                    c[a] = lo[a];
                    w1[a] = 1.0 - frac[a];
                    dw1[a] = -1.0 / h[a];
                } else {
                    c[a] = hi[a];
                    w1[a] = frac[a];
                    dw1[a] = 1.0 / h[a];
                }
            }
            st.nodes[corner] = self.index(c[0], c[1], c[2]);
            st.weights[corner] = w1[0] * w1[1] * w1[2];
            st.dweights[corner] = [
                dw1[0] * w1[1] * w1[2],
                w1[0] * dw1[1] * w1[2],
                w1[0] * w1[1] * dw1[2],
            ];
        }
        st
    }
}

impl ScalarField {
    /// Periodic trilinear interpolation.
    pub fn sample(&self, x: [f64; 3]) -> f64 {
        let st = self.grid.stencil(x);
        st.nodes
            .iter()
            .zip(&st.weights)
            .map(|(&n, &w)| w * self.data[n])
            .sum()
    }
}

impl VectorField {
    pub fn sample(&self, x: [f64; 3]) -> [f64; 3] {
        let st = self.grid.stencil(x);
        let mut out = [0.0; 3];
        for (&n, &w) in st.nodes.iter().zip(&st.weights) {
            for a in 0..3 {
                out[a] += w * self.data[n][a];
            }
        }
        out
    }
}
