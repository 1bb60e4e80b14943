//! Separable 3D FFT on periodic grids (rustfft along each active axis).

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::grid::Grid;

pub fn fft3(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let dims = grid.dims();
    let mut planner = FftPlanner::<f64>::new();
    for axis in grid.active_axes() {
        let n = dims[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let stride = match axis {
            0 => 1,
            1 => dims[0],
            _ => dims[0] * dims[1],
        };
        for start in line_starts(dims, axis) {
            for (m, v) in line.iter_mut().enumerate() {
                *v = data[start + m * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (m, v) in line.iter().enumerate() {
                data[start + m * stride] = *v;
            }
        }
    }
    if inverse {
        let norm = 1.0 / grid.len() as f64;
        for v in data.iter_mut() {
            *v *= norm;
        }
    }
}

fn line_starts(dims: [usize; 3], axis: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let c = [i, j, k];
                if c[axis] == 0 {
                    out.push(i + dims[0] * (j + dims[1] * k));
                }
            }
        }
    }
    out
}

/// Angular wavenumbers `2 pi m / L` in FFT order, `m` in `[-N/2, N/2)`.
pub fn wavenumbers(grid: &Grid) -> [Vec<f64>; 3] {
    let dims = grid.dims();
    let lens = grid.lengths();
    std::array::from_fn(|a| {
        let n = dims[a] as i64;
        (0..n)
            .map(|m| {
                let s = if m < (n + 1) / 2 { m } else { m - n };
                2.0 * PI * s as f64 / lens[a]
            })
            .collect()
    })
}

/// Signed wavevector of the mode stored at `idx`.
pub fn wavevector(grid: &Grid, k: &[Vec<f64>; 3], idx: usize) -> [f64; 3] {
    let c = grid.coords(idx);
    [k[0][c[0]], k[1][c[1]], k[2][c[2]]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_identity() {
        let g = Grid::cube([6, 4, 5], 1.0).unwrap();
        let orig: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut data = orig.clone();
        fft3(&g, &mut data, false);
        fft3(&g, &mut data, true);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_lands_in_its_bin() {
        let g = Grid::new([8, 1, 1], [2.0 * PI, 1.0, 1.0]).unwrap();
        let mut data: Vec<Complex64> = (0..8)
            .map(|i| Complex64::new((3.0 * g.position(i)[0]).cos(), 0.0))
            .collect();
        fft3(&g, &mut data, false);
        let k = wavenumbers(&g);
        for (i, v) in data.iter().enumerate() {
            if k[0][i].abs() == 3.0 {
                assert!((v.re - 4.0).abs() < 1e-12);
            } else {
                assert!(v.norm() < 1e-12);
            }
        }
    }
}
