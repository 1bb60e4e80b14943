//! Free wave equation `w_tt - Δw = 0` on the periodic grid, solved by
//! diagonalizing in Fourier space. Each mode evolves as
//! `ŵ(t) = ŵ0 cos(|k| t) + ŵt0 sin(|k| t) / |k|`, so band-limited data is
//! propagated exactly up to roundoff.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{laplacian2, Field, Grid, ScalarField};
use crate::spectral::{fft3, wavenumbers, wavevector};

/// `sin(k t) / k`, continuous through `k = 0`.
fn sinc_t(k: f64, t: f64) -> f64 {
    if k == 0.0 {
        t
    } else {
        (k * t).sin() / k
    }
}

fn to_complex(f: &ScalarField) -> Vec<Complex64> {
    f.data.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Position and velocity at time `t`.
pub fn wave_evolve_with_rate(
    w0: &ScalarField,
    wt0: &ScalarField,
    t: f64,
) -> Result<(ScalarField, ScalarField)> {
    WavePropagator::new(w0, wt0)?.at_with_rate(t)
}

pub fn wave_evolve(w0: &ScalarField, wt0: &ScalarField, t: f64) -> Result<ScalarField> {
    WavePropagator::new(w0, wt0)?.at(t)
}

/// Precomputed spectra for evaluating many times from the same initial data.
pub struct WavePropagator {
    grid: Grid,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    k: Vec<f64>,
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "wave evolution time",
            value: t,
            domain: "t >= 0".into(),
        })
    }
}

impl WavePropagator {
    pub fn new(w0: &ScalarField, wt0: &ScalarField) -> Result<Self> {
        w0.grid.same_shape(&wt0.grid)?;
        let g = &w0.grid;
        let kw = wavenumbers(g);
        let mut a = to_complex(w0);
        let mut b = to_complex(wt0);
        fft3(g, &mut a, false);
        fft3(g, &mut b, false);
        let k = (0..g.len())
            .map(|idx| {
                let kv = wavevector(g, &kw, idx);
                (kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]).sqrt()
            })
            .collect();
        Ok(Self {
            grid: g.clone(),
            a,
            b,
            k,
        })
    }

    fn synthesize(&self, mut spec: Vec<Complex64>) -> ScalarField {
        fft3(&self.grid, &mut spec, true);
        Field {
            grid: self.grid.clone(),
            data: spec.iter().map(|v| v.re).collect(),
        }
    }

    pub fn at(&self, t: f64) -> Result<ScalarField> {
        check_time(t)?;
        let w = (0..self.grid.len())
            .map(|i| self.a[i] * (self.k[i] * t).cos() + self.b[i] * sinc_t(self.k[i], t))
            .collect();
        Ok(self.synthesize(w))
    }

    pub fn at_with_rate(&self, t: f64) -> Result<(ScalarField, ScalarField)> {
        check_time(t)?;
        let mut w = Vec::with_capacity(self.grid.len());
        let mut wt = Vec::with_capacity(self.grid.len());
        for i in 0..self.grid.len() {
            let kk = self.k[i];
            let (c, s) = ((kk * t).cos(), sinc_t(kk, t));
            w.push(self.a[i] * c + self.b[i] * s);
            wt.push(-self.a[i] * (kk * kk * s) + self.b[i] * c);
        }
        Ok((self.synthesize(w), self.synthesize(wt)))
    }
}

/// Spectral energy `sum (w_t^2 + |∇w|^2) h^3`.
pub fn wave_energy(w: &ScalarField, wt: &ScalarField) -> Result<f64> {
    w.grid.same_shape(&wt.grid)?;
    let g = &w.grid;
    let k = wavenumbers(g);
    let mut a = to_complex(w);
    fft3(g, &mut a, false);
    let n = g.len() as f64;
    // Parseval: sum |f|^2 = (1/N) sum |f̂|^2.
    let grad2: f64 = (0..g.len())
        .map(|idx| {
            let kv = wavevector(g, &k, idx);
            (kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]) * a[idx].norm_sqr()
        })
        .sum::<f64>()
        / n;
    let rate2: f64 = wt.data.iter().map(|v| v * v).sum();
    Ok((rate2 + grad2) * g.cell_volume())
}

/// Root-mean-square over interior samples of the L2 norm of the discrete
/// d'Alembertian `(w⁺ - 2w + w⁻)/dt² - Δ₂w` (second order in time and space).
pub fn dalembertian_residual(series: &[(f64, ScalarField)]) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::Arity {
            op: "dalembertian_residual",
            needed: 3,
            got: series.len(),
        });
    }
    let dt = series[1].0 - series[0].0;
    if !(dt > 0.0) {
        return Err(Error::Invalid("time samples must increase".into()));
    }
    for pair in series.windows(2) {
        pair[0].1.grid.same_shape(&pair[1].1.grid)?;
        let step = pair[1].0 - pair[0].0;
        if (step - dt).abs() > 1e-9 * dt {
            return Err(Error::Invalid(format!(
                "time samples are not equally spaced ({step} vs {dt})"
            )));
        }
    }
    let mut acc = 0.0;
    for n in 1..series.len() - 1 {
        let (prev, cur, next) = (&series[n - 1].1, &series[n].1, &series[n + 1].1);
        let lap = laplacian2(cur);
        let r: f64 = (0..cur.grid.len())
            .map(|i| {
                let wtt = (next.data[i] - 2.0 * cur.data[i] + prev.data[i]) / (dt * dt);
                let v = wtt - lap.data[i];
                v * v
            })
            .sum();
        acc += r * cur.grid.cell_volume();
    }
    Ok((acc / (series.len() - 2) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::cube([16, 8, 4], 1.0).unwrap()
    }

    fn kvec() -> ([f64; 3], f64) {
        let k = [2.0 * PI * 2.0, 2.0 * PI, 2.0 * PI];
        (k, (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt())
    }

    fn cos_mode(g: &Grid) -> ScalarField {
        let (k, _) = kvec();
        Field::from_fn(g, |x| (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).cos())
    }

    #[test]
    fn constant_is_stationary() {
        let g = grid();
        let w = wave_evolve(&Field::filled(&g, 3.0), &Field::filled(&g, 0.0), 1.7).unwrap();
        assert!(w.data.iter().all(|v| (v - 3.0).abs() < 1e-13));
    }

    #[test]
    fn cosine_mode_from_displacement() {
        let g = grid();
        let (_, kk) = kvec();
        let t = 0.37;
        let w0 = cos_mode(&g);
        let w = wave_evolve(&w0, &Field::filled(&g, 0.0), t).unwrap();
        for (a, b) in w.data.iter().zip(&w0.data) {
            assert!((a - b * (kk * t).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_mode_from_velocity() {
        let g = grid();
        let (_, kk) = kvec();
        let t = 0.37;
        let wt0 = cos_mode(&g);
        let w = wave_evolve(&Field::filled(&g, 0.0), &wt0, t).unwrap();
        for (a, b) in w.data.iter().zip(&wt0.data) {
            assert!((a - b * (kk * t).sin() / kk).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_mode_drifts_linearly() {
        let g = grid();
        let w = wave_evolve(&Field::filled(&g, 1.0), &Field::filled(&g, 0.5), 2.0).unwrap();
        assert!(w.data.iter().all(|v| (v - 2.0).abs() < 1e-13));
    }

    #[test]
    fn negative_time_is_a_domain_error() {
        let g = grid();
        let z = Field::filled(&g, 0.0);
        assert!(matches!(wave_evolve(&z, &z, -0.1), Err(Error::Domain { .. })));
    }

    fn bump(g: &Grid) -> ScalarField {
        Field::from_fn(g, |x| {
            ((2.0 * PI * x[0]).sin() + 0.3 * (4.0 * PI * x[1]).cos()).exp()
                * (1.0 + 0.2 * (2.0 * PI * x[2]).cos())
        })
    }

    #[test]
    fn energy_is_conserved() {
        let g = grid();
        let w0 = bump(&g);
        let wt0 = Field::from_fn(&g, |x| (2.0 * PI * (x[0] + x[2])).sin());
        let e0 = wave_energy(&w0, &wt0).unwrap();
        for t in [0.1, 0.7, 3.3] {
            let (w, wt) = wave_evolve_with_rate(&w0, &wt0, t).unwrap();
            let e = wave_energy(&w, &wt).unwrap();
            assert!((e - e0).abs() < 1e-11 * e0, "{e} vs {e0}");
        }
    }

    #[test]
    fn time_reversal_returns_initial_data() {
        let g = grid();
        let w0 = bump(&g);
        let wt0 = Field::from_fn(&g, |x| (2.0 * PI * x[1]).cos());
        let t = 0.83;
        let (w, wt) = wave_evolve_with_rate(&w0, &wt0, t).unwrap();
        let back = wt.map(|v| -v);
        let (w_back, wt_back) = wave_evolve_with_rate(&w, &back, t).unwrap();
        for i in 0..g.len() {
            assert!((w_back.data[i] - w0.data[i]).abs() < 1e-12);
            assert!((wt_back.data[i] + wt0.data[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn propagator_matches_direct_evaluation() {
        let g = grid();
        let w0 = bump(&g);
        let wt0 = cos_mode(&g);
        let p = WavePropagator::new(&w0, &wt0).unwrap();
        let a = p.at(0.4).unwrap();
        let b = wave_evolve(&w0, &wt0, 0.4).unwrap();
        assert!(a.l2_distance(&b).unwrap() < 1e-13);
    }

    #[test]
    fn residual_of_trivial_series_vanishes() {
        let g = grid();
        let constant: Vec<_> = (0..4).map(|n| (n as f64 * 0.1, Field::filled(&g, 2.0))).collect();
        assert!(dalembertian_residual(&constant).unwrap() < 1e-10);
        let drift: Vec<_> = (0..4)
            .map(|n| {
                let t = n as f64 * 0.1;
                (t, Field::filled(&g, t))
            })
            .collect();
        assert!(dalembertian_residual(&drift).unwrap() < 1e-10);
    }

    #[test]
    fn residual_needs_three_samples() {
        let g = grid();
        let s = vec![(0.0, Field::filled(&g, 0.0)), (0.1, Field::filled(&g, 0.0))];
        assert!(matches!(dalembertian_residual(&s), Err(Error::Arity { .. })));
    }

    #[test]
    fn residual_of_exact_mode_is_second_order() {
        // Taylor expansion of both stencils on cos(kx)cos(kt): the residual is
        // k^4 (h^2 - dt^2) / 12 times the mode amplitude.
        let mut res = Vec::new();
        for n in [16usize, 32, 64] {
            let g = Grid::new([n, 1, 1], [1.0, 1.0, 1.0]).unwrap();
            let w0 = Field::from_fn(&g, |x| (2.0 * PI * x[0]).cos());
            let z = Field::filled(&g, 0.0);
            let dt = 0.5 / n as f64;
            // Centre every series on t = 1/2 so the mode amplitude is the same.
            let series: Vec<_> = (0..3)
                .map(|m| {
                    let t = 0.5 + (m as f64 - 1.0) * dt;
                    (t, wave_evolve(&w0, &z, t).unwrap())
                })
                .collect();
            res.push(dalembertian_residual(&series).unwrap());
        }
        for pair in res.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!((order - 2.0).abs() < 0.1, "order {order}");
        }
    }
}
