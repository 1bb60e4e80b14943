//! Named initial conditions. Fluid data varies along `x3` only, so every
//! `x3`-column carries the same mass and a single affine label slope exists.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dirac::{Spinor, SpinorField};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::hydro::{FluidField, Primitive, RelEuler};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluidIc {
    /// `rho = 1`, constant velocity along `x3`.
    Uniform,
    /// Gaussian density bump with the matching right-moving velocity bump.
    AcousticPulse,
    /// `rho = 1 + A sin(2 pi x3 / L)`.
    DensitySine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinorIc {
    /// `exp(i k y3)` in the first component.
    PlaneWave,
    /// Periodized Gaussian with a fixed mixed polarization.
    GaussianPacket,
}

macro_rules! named {
    ($ty:ty, $($variant:ident => $name:literal),+) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self { $(Self::$variant => $name),+ }
            }
        }
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    _ => Err(format!("expected one of: {}", [$($name),+].join(", "))),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

named!(FluidIc, Uniform => "uniform", AcousticPulse => "acoustic_pulse", DensitySine => "density_sine");
named!(SpinorIc, PlaneWave => "plane_wave", GaussianPacket => "gaussian_packet");

/// Parameters shared by the fluid initial conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidSetup {
    pub kind: FluidIc,
    pub amplitude: f64,
    pub velocity: f64,
}

pub fn fluid_initial(grid: &Grid, model: RelEuler, setup: &FluidSetup) -> Result<FluidField> {
    let l = grid.lengths()[2];
    let a = setup.amplitude;
    let v = setup.velocity;
    let sound = sound_speed(&model);
    let init = move |x: [f64; 3]| {
        let z = x[2] / l;
        match setup.kind {
            FluidIc::Uniform => Primitive {
                rho: 1.0,
                u: [0.0, 0.0, v],
            },
            FluidIc::AcousticPulse => {
                let s = (z - 0.5) / 0.1;
                let bump = a * (-s * s).exp();
                Primitive {
                    rho: 1.0 + bump,
                    u: [0.0, 0.0, v + sound * bump],
                }
            }
            FluidIc::DensitySine => Primitive {
                rho: 1.0 + a * (2.0 * PI * z).sin(),
                u: [0.0, 0.0, v],
            },
        }
    };
    FluidField::from_primitives(grid, model, init)
}

/// Linearized sound speed at `rho = 1`.
fn sound_speed(model: &RelEuler) -> f64 {
    let (_, dp) = model.eos.pressure(1.0);
    dp.max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinorSetup {
    pub kind: SpinorIc,
    pub amplitude: f64,
    /// Packet width as a fraction of each box length.
    pub width: f64,
    /// Plane-wave mode number along `y3`.
    pub mode: i64,
}

fn periodized_gaussian(y: f64, length: f64, width: f64) -> f64 {
    (-3..=3)
        .map(|m| {
            let s = (y - 0.5 * length + m as f64 * length) / (width * length);
            (-s * s).exp()
        })
        .sum()
}

pub fn spinor_initial(lag: &Grid, setup: &SpinorSetup) -> Result<SpinorField> {
    if !(setup.width > 0.0 && setup.width < 0.5) {
        return Err(Error::config("spinor_width", "must lie in (0, 0.5)"));
    }
    let l = lag.lengths();
    let amp = setup.amplitude;
    Ok(match setup.kind {
        SpinorIc::PlaneWave => {
            let k = 2.0 * PI * setup.mode as f64 / l[2];
            Field::from_fn(lag, |y| {
                let mut s = Spinor::zero();
                s.0[0] = Complex64::from_polar(amp, k * y[2]);
                s
            })
        }
        SpinorIc::GaussianPacket => {
            let pol = [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.5),
                Complex64::new(0.3, 0.0),
                Complex64::new(0.0, -0.2),
            ];
            Field::from_fn(lag, |y| {
                let mut env = amp;
                for a in lag.active_axes() {
                    env *= periodized_gaussian(y[a], l[a], setup.width);
                }
                Spinor(pol.map(|c| c * env))
            })
        }
    })
}
