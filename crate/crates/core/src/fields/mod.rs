//! Grids, tabulated fields, weighted decay norms and the periodic kernel `B`.

mod grid;
mod norm;
pub mod spectral;
mod table;

use std::f64::consts::PI;

pub use grid::{PhaseGrid, TimeGrid, XGrid};
pub use norm::{
    weighted_norm_phase, weighted_norm_series, weighted_norm_slices, NormKind, NormReport, SliceSup, HORIZON_GROWTH,
};
pub use spectral::SliceModes;
pub use table::FieldTable;

/// The mean-free sawtooth `B(x) = 1/2 - x/(2 pi)` on `[0, 2 pi)`, extended periodically.
pub fn kernel_b(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    // rem_euclid can round up to exactly 2 pi for tiny negative x.
    let r = if r >= 2.0 * PI { 0.0 } else { r };
    0.5 - r / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_b(0.0), 0.5);
        assert!(kernel_b(PI).abs() < 1e-16);
        assert!(kernel_b(3.0 * PI).abs() < 1e-15);
        assert!((kernel_b(-1e-300) - 0.5).abs() < 1e-15);
        assert!((kernel_b(-PI / 2.0) - kernel_b(1.5 * PI)).abs() < 1e-15);
    }

    #[test]
    fn kernel_mean_and_jump() {
        // Midpoint rule on a piecewise-linear function is exact away from the jump.
        let n = 1 << 16;
        let h = 2.0 * PI / n as f64;
        let mean: f64 = (0..n).map(|i| kernel_b((i as f64 + 0.5) * h)).sum::<f64>() * h;
        assert!(mean.abs() < 1e-12);
        let jump = kernel_b(0.0) - kernel_b(-1e-12);
        assert!((jump - 1.0).abs() < 1e-9);
    }

    #[test]
    fn norm_is_monotone_under_refinement() {
        let f = |x: f64, t: f64| (x - 0.37).sin() * (-t).exp() * (1.0 + 0.1 * (t - 9.3).powi(2)).recip();
        let mut last = 0.0;
        for (nx, nt) in [(8, 11), (16, 21), (32, 41), (64, 81)] {
            let e = FieldTable::from_fn(XGrid::new(nx).unwrap(), TimeGrid::new(8.0, 12.0, nt).unwrap(), f);
            let r = e.weighted_norm(1.0, 0).unwrap();
            assert!(r.value >= last);
            last = r.value;
        }
    }
}
