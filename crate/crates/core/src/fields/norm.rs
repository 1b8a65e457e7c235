use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sup_{t >= t0} t^{-k} e^{at} sup_space |F|`. `k = 0` is the plain
/// exponential norm, `a = 0` the polynomially weighted sup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormKind {
    pub a: f64,
    pub t0: f64,
    pub k: u32,
}

impl NormKind {
    pub fn new(a: f64, t0: f64, k: u32) -> Self {
        Self { a, t0, k }
    }

    pub fn weight(&self, t: f64) -> f64 {
        (self.a * t).exp() / t.powi(self.k as i32)
    }
}

/// Growth of the weighted value over the last time step above which a
/// maximum sitting at the horizon is flagged.
pub const HORIZON_GROWTH: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    /// Largest weighted sample; a lower bound of the true sup.
    pub value: f64,
    pub argmax_x: usize,
    pub argmax_v: Option<usize>,
    pub argmax_t: usize,
    pub t_at_max: f64,
    /// The sup sits on the last time sample and was still growing there, so
    /// the truncation at `T` is what bounds it.
    pub horizon_dominated: bool,
}

/// Per-slice spatial suprema with their location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceSup {
    pub value: f64,
    pub x: usize,
    pub v: Option<usize>,
}

impl SliceSup {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut best = SliceSup {
            value: 0.0,
            x: 0,
            v: None,
        };
        for (i, v) in values.into_iter().enumerate() {
            if v.abs() > best.value || v.is_nan() {
                best.value = v.abs();
                best.x = i;
            }
        }
        best
    }
}

/// Weighted norm from per-slice suprema at the given times.
pub fn weighted_norm_slices(kind: NormKind, times: &[f64], slices: &[SliceSup]) -> Result<NormReport> {
    if times.is_empty() {
        return Err(Error::EmptySamples);
    }
    if times.len() != slices.len() {
        return Err(Error::GridMismatch(format!(
            "{} times but {} slices",
            times.len(),
            slices.len()
        )));
    }
    let mut weighted = Vec::with_capacity(times.len());
    for (&t, s) in times.iter().zip(slices) {
        if t < kind.t0 * (1.0 - 1e-14) {
            return Err(Error::TimeBeforeStart { t, t0: kind.t0 });
        }
        weighted.push(kind.weight(t) * s.value);
    }
    let mut best = 0;
    for (n, &w) in weighted.iter().enumerate() {
        if w > weighted[best] || w.is_nan() {
            best = n;
        }
    }
    let last = times.len() - 1;
    let horizon_dominated = best == last
        && last > 0
        && weighted[last] > 0.0
        && (weighted[last] - weighted[last - 1]) / weighted[last] > HORIZON_GROWTH;
    Ok(NormReport {
        kind,
        value: weighted[best],
        argmax_x: slices[best].x,
        argmax_v: slices[best].v,
        argmax_t: best,
        t_at_max: times[best],
        horizon_dominated,
    })
}

/// Weighted norm of a scalar function of time.
pub fn weighted_norm_series(kind: NormKind, times: &[f64], values: &[f64]) -> Result<NormReport> {
    let slices: Vec<SliceSup> = values
        .iter()
        .map(|&v| SliceSup {
            value: v.abs(),
            x: 0,
            v: None,
        })
        .collect();
    weighted_norm_slices(kind, times, &slices)
}

/// Weighted norm of a phase-space table stored node-major, `values[node * nt + n]`,
/// with `nv` velocities per x index.
pub fn weighted_norm_phase(kind: NormKind, times: &[f64], nv: usize, values: &[f64]) -> Result<NormReport> {
    let nt = times.len();
    if nt == 0 {
        return Err(Error::EmptySamples);
    }
    if !values.len().is_multiple_of(nt) || nv == 0 || !(values.len() / nt).is_multiple_of(nv) {
        return Err(Error::GridMismatch(format!(
            "phase table of length {} does not fit {nt} times and {nv} velocities",
            values.len()
        )));
    }
    let mut slices = vec![
        SliceSup {
            value: 0.0,
            x: 0,
            v: Some(0),
        };
        nt
    ];
    for (node, row) in values.chunks_exact(nt).enumerate() {
        for (n, &value) in row.iter().enumerate() {
            let value = value.abs();
            if value > slices[n].value || value.is_nan() {
                slices[n] = SliceSup {
                    value,
                    x: node / nv,
                    v: Some(node % nv),
                };
            }
        }
    }
    weighted_norm_slices(kind, times, &slices)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times() -> Vec<f64> {
        (0..=175).map(|n| 8.0 + 0.2 * n as f64).collect()
    }

    #[test]
    fn exponential_is_normalised() {
        let t = times();
        let f: Vec<f64> = t.iter().map(|&t| (-t).exp()).collect();
        let r = weighted_norm_series(NormKind::new(1.0, 8.0, 0), &t, &f).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        assert!(!r.horizon_dominated);
        let g: Vec<f64> = t.iter().map(|&t| t * (-t).exp()).collect();
        let r = weighted_norm_series(NormKind::new(1.0, 8.0, 1), &t, &g).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mismatched_weight_is_horizon_dominated() {
        let t = times();
        let g: Vec<f64> = t.iter().map(|&t| t * (-t).exp()).collect();
        let r = weighted_norm_series(NormKind::new(1.0, 8.0, 0), &t, &g).unwrap();
        assert!((r.value - 43.0).abs() < 1e-11);
        assert_eq!(r.argmax_t, 175);
        assert!(r.horizon_dominated);
    }

    #[test]
    fn rejects_empty_and_early_samples() {
        assert!(matches!(
            weighted_norm_series(NormKind::new(1.0, 8.0, 0), &[], &[]),
            Err(Error::EmptySamples)
        ));
        assert!(matches!(
            weighted_norm_series(NormKind::new(1.0, 8.0, 0), &[7.0], &[1.0]),
            Err(Error::TimeBeforeStart { .. })
        ));
    }

    #[test]
    fn polynomial_weight_only() {
        let t = vec![2.0, 3.0, 4.0];
        let f = vec![4.0, 9.0, 8.0];
        let r = weighted_norm_series(NormKind::new(0.0, 2.0, 2), &t, &f).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.argmax_t, 0);
    }

    #[test]
    fn phase_table_locates_argmax() {
        let t = vec![1.0, 2.0];
        // 2 x-points, 2 velocities, node-major.
        let vals = vec![0.1, 0.2, 0.3, -0.9, 0.0, 0.0, 0.5, 0.1];
        let r = weighted_norm_phase(NormKind::new(0.0, 1.0, 0), &t, 2, &vals).unwrap();
        assert_eq!(r.value, 0.9);
        assert_eq!((r.argmax_x, r.argmax_v, r.argmax_t), (0, Some(1), 1));
    }

    proptest::proptest! {
        #[test]
        fn homogeneous_in_scale(lambda in 1e-6f64..1e6, amp in 0.1f64..10.0) {
            let t = times();
            let f: Vec<f64> = t.iter().map(|&t| amp * (-0.9 * t).exp() * (1.0 + 0.1 * t.sin())).collect();
            let g: Vec<f64> = f.iter().map(|v| lambda * v).collect();
            let kind = NormKind::new(1.0, 8.0, 0);
            let r1 = weighted_norm_series(kind, &t, &f).unwrap();
            let r2 = weighted_norm_series(kind, &t, &g).unwrap();
            proptest::prop_assert!((r2.value - lambda * r1.value).abs() <= 1e-12 * r2.value);
        }
    }
}
