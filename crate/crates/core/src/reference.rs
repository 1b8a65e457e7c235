//! The reference configuration used by the examples and the acceptance runs.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::fields::{PhaseGrid, TimeGrid, XGrid};
use crate::params::DampingParams;
use crate::profiles::{ProfileSpec, VelocityShape, XMode, ZDependence};
use crate::scattering::SolveGrids;

pub const C0: f64 = 3.5e-4;
pub const C1: f64 = 1.5e-4;
/// `dc1/dz = 0.3 c1`.
pub const C1_Z: f64 = 4.5e-5;
pub const N_Z: usize = 9;

/// `a = 1, a1 = a2 = 0.002, K = 2, t0 = 8`.
pub fn params() -> DampingParams {
    DampingParams::derive(1.0, 0.002, 0.002, 2).expect("reference constants are valid")
}

/// `[c0 + 2 c1 (1 + 0.3 z) cos x] sech(pi v / 2)`.
pub fn profile() -> ProfileSpec {
    profile_with_slope(C1_Z)
}

/// The reference profile with `c1` frozen at its `z = 0` value.
pub fn z_independent_profile() -> ProfileSpec {
    profile_with_slope(0.0)
}

fn profile_with_slope(c1_z: f64) -> ProfileSpec {
    let c = |re: f64| Complex64::new(re, 0.0);
    let first = if c1_z == 0.0 { vec![c(C1)] } else { vec![c(C1), c(c1_z)] };
    ProfileSpec::new(
        vec![
            XMode {
                wavenumber: 0,
                coefficient: ZDependence::constant(c(C0)),
            },
            XMode {
                wavenumber: 1,
                coefficient: ZDependence::Polynomial { coeffs: first },
            },
        ],
        VelocityShape::Sech { rate: FRAC_PI_2 },
        1.0,
    )
    .expect("reference profile is valid")
}

/// `Nx = 64`, `Nv = 129` on `[-6, 6]`, 176 times on `[8, 43]`.
pub fn grids() -> SolveGrids {
    let x = XGrid::new(64).expect("power of two");
    SolveGrids {
        phase: PhaseGrid::new(x, 129, 6.0).expect("valid phase grid"),
        time: TimeGrid::new(8.0, 43.0, 176).expect("valid time grid"),
    }
}
