//! Backward characteristics `X = x + vt + int_t^inf (s-t) E(X(s), s) ds`,
//! `V = v - int_t^inf E(X(s), s) ds`, solved by waveform relaxation.
//!
//! Trajectories are stored as displacements from free transport,
//! `xi_x = X - x - vt` and `xi_v = V - v`, which keeps their full relative
//! precision even when they are many orders of magnitude below `x` and `vt`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::TailQuadrature;
use crate::checks::BoundCheck;
use crate::error::{Error, Result};
use crate::fields::{FieldTable, PhaseGrid, SliceModes, TimeGrid};
use crate::params::tail_integral_moment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    /// Stop when `sup_t e^{at} |xi^{m+1} - xi^m|` falls below this fraction of
    /// `sup_t e^{at} |xi|` after the first sweep.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_iter: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    phase: PhaseGrid,
    time: TimeGrid,
    /// node-major: `xi_x[node * nt + n]`
    xi_x: Vec<f64>,
    xi_v: Vec<f64>,
    /// Largest number of relaxation sweeps over all nodes.
    pub iterations: usize,
    /// Largest final weighted increment over all nodes.
    pub residual: f64,
    /// Bound on the neglected `int_T^inf (s - t) |E|`.
    pub tail_bound: f64,
}

impl TrajectoryTable {
    /// Free transport, `X = x + vt`, `V = v`.
    pub fn free(phase: PhaseGrid, time: TimeGrid) -> Self {
        let len = phase.nodes() * time.len();
        Self {
            phase,
            time,
            xi_x: vec![0.0; len],
            xi_v: vec![0.0; len],
            iterations: 0,
            residual: 0.0,
            tail_bound: 0.0,
        }
    }

    pub fn phase_grid(&self) -> PhaseGrid {
        self.phase
    }

    pub fn time_grid(&self) -> TimeGrid {
        self.time
    }

    fn at(&self, node: usize, n: usize) -> usize {
        node * self.time.len() + n
    }

    /// `X - x - vt`
    pub fn displacement_x(&self, node: usize, n: usize) -> f64 {
        self.xi_x[self.at(node, n)]
    }

    /// `V - v`
    pub fn displacement_v(&self, node: usize, n: usize) -> f64 {
        self.xi_v[self.at(node, n)]
    }

    /// `X - V t - x`
    pub fn asymptotic_offset(&self, node: usize, n: usize) -> f64 {
        self.displacement_x(node, n) - self.time.time(n) * self.displacement_v(node, n)
    }

    pub fn free_position(&self, node: usize, n: usize) -> f64 {
        let (i, j) = self.phase.split(node);
        self.phase.x_grid().point(i) + self.phase.v(j) * self.time.time(n)
    }

    /// `X(x_i, v_j, t_n)`, not reduced mod `2 pi`.
    pub fn x(&self, node: usize, n: usize) -> f64 {
        self.free_position(node, n) + self.displacement_x(node, n)
    }

    pub fn v(&self, node: usize, n: usize) -> f64 {
        let (_, j) = self.phase.split(node);
        self.phase.v(j) + self.displacement_v(node, n)
    }

    pub fn displacements_x(&self) -> &[f64] {
        &self.xi_x
    }

    pub fn displacements_v(&self) -> &[f64] {
        &self.xi_v
    }

    /// Node-major table of `X - Vt - x`.
    pub fn asymptotic_offsets(&self) -> Vec<f64> {
        let nt = self.time.len();
        let times = self.time.times();
        self.xi_x
            .iter()
            .zip(&self.xi_v)
            .enumerate()
            .map(|(idx, (dx, dv))| dx - times[idx % nt] * dv)
            .collect()
    }
}

/// Checks the smallness `|E|_(a,t0) e^{-a t0} <= a` under which the
/// trajectory map is defined.
pub fn check_field_admissible(e: &FieldTable, a: f64) -> Result<f64> {
    let norm = e.weighted_norm(a, 0)?.value;
    let scaled = norm * (-a * e.time_grid().t0()).exp();
    if scaled > a {
        return Err(Error::FieldTooLarge { scaled, a });
    }
    Ok(norm)
}

/// Solves the characteristic equations for every phase node; `warm`, when
/// given, seeds the relaxation with earlier displacements.
pub fn solve_characteristics(
    e: &FieldTable,
    phase: PhaseGrid,
    a: f64,
    opts: &TrajectoryOptions,
    warm: Option<&TrajectoryTable>,
) -> Result<TrajectoryTable> {
    let norm = check_field_admissible(e, a)?;
    let time = e.time_grid();
    if phase.x_grid() != e.x_grid() {
        return Err(Error::GridMismatch("phase grid and field use different x grids".into()));
    }
    if let Some(w) = warm {
        if w.phase != phase || w.time != time {
            return Err(Error::GridMismatch(
                "warm-start trajectories use different grids".into(),
            ));
        }
    }
    let nt = time.len();
    let times = time.times();
    let weights: Vec<f64> = times.iter().map(|&t| (a * t).exp()).collect();
    let modes = e.spectral();
    let quad = TailQuadrature::new(a, time.step());
    let mut table = TrajectoryTable::free(phase, time);
    table.tail_bound = norm * tail_integral_moment(a, time.t_end(), 0)?;
    if modes.iter().all(SliceModes::is_zero) {
        return Ok(table);
    }
    let outcomes: Vec<(usize, f64, bool)> = table
        .xi_x
        .par_chunks_mut(nt)
        .zip(table.xi_v.par_chunks_mut(nt))
        .enumerate()
        .map(|(node, (xi_x, xi_v))| {
            let (i, j) = phase.split(node);
            let x = phase.x_grid().point(i);
            let v = phase.v(j);
            if let Some(w) = warm {
                xi_x.copy_from_slice(&w.xi_x[node * nt..(node + 1) * nt]);
            }
            let mut g = vec![0.0; nt];
            let mut r0 = vec![0.0; nt];
            let mut r1 = vec![0.0; nt];
            let mut residual = f64::INFINITY;
            let mut threshold = opts.tol;
            let mut sweeps = 0;
            while sweeps < opts.max_iter {
                sweeps += 1;
                for n in 0..nt {
                    g[n] = modes[n].eval(x + v * times[n] + xi_x[n]);
                }
                quad.tails(&g, &mut r0, &mut r1);
                residual = 0.0;
                for n in 0..nt {
                    residual = f64::max(residual, weights[n] * (r1[n] - xi_x[n]).abs());
                    xi_x[n] = r1[n];
                    xi_v[n] = -r0[n];
                }
                if sweeps == 1 {
                    let size = (0..nt).map(|n| weights[n] * xi_x[n].abs()).fold(0.0, f64::max);
                    threshold = opts.tol * size;
                }
                if residual <= threshold {
                    break;
                }
            }
            (sweeps, residual, residual <= threshold)
        })
        .collect();
    let mut converged = true;
    for (sweeps, residual, ok) in outcomes {
        table.iterations = table.iterations.max(sweeps);
        table.residual = table.residual.max(residual);
        converged &= ok;
    }
    if !converged {
        return Err(Error::NotConverged {
            what: "characteristics",
            iterations: table.iterations,
            residual: table.residual,
        });
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBoundReport {
    /// `|v - V| <= (|E|/a) e^{-at}`
    pub velocity: BoundCheck,
    /// `|x - (X - Vt)| <= |E| (2/a) t e^{-at}`
    pub offset: BoundCheck,
    pub velocity_argmax: (usize, usize),
    pub offset_argmax: (usize, usize),
}

/// Slack allowed on the pointwise trajectory ratios.
pub const TRAJECTORY_SLACK: f64 = 1e-6;

/// Pointwise displacement bounds with `field_norm = |E|_(a,t0)`; the reported
/// values are the worst pointwise ratios, against a bound of one.
pub fn check_trajectory_bounds(traj: &TrajectoryTable, field_norm: f64, a: f64) -> TrajectoryBoundReport {
    let times = traj.time.times();
    let mut worst_v = (0.0, (0, 0));
    let mut worst_x = (0.0, (0, 0));
    for node in 0..traj.phase.nodes() {
        for (n, &t) in times.iter().enumerate() {
            let decay = (-a * t).exp();
            let dv = traj.displacement_v(node, n).abs();
            let dx = traj.asymptotic_offset(node, n).abs();
            let rv = crate::checks::ratio(dv, field_norm / a * decay);
            let rx = crate::checks::ratio(dx, field_norm * 2.0 / a * t * decay);
            if rv > worst_v.0 || rv.is_nan() {
                worst_v = (rv, (node, n));
            }
            if rx > worst_x.0 || rx.is_nan() {
                worst_x = (rx, (node, n));
            }
        }
    }
    let limit = 1.0 + TRAJECTORY_SLACK;
    TrajectoryBoundReport {
        velocity: BoundCheck::with_limit("|v - V| <= (|E|/a) e^{-at}", worst_v.0, 1.0, limit),
        offset: BoundCheck::with_limit("|x - (X - Vt)| <= (2|E|/a) t e^{-at}", worst_x.0, 1.0, limit),
        velocity_argmax: worst_v.1,
        offset_argmax: worst_x.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::XGrid;

    fn grids() -> (PhaseGrid, TimeGrid) {
        let x = XGrid::new(16).unwrap();
        (
            PhaseGrid::new(x, 9, 4.0).unwrap(),
            TimeGrid::new(8.0, 43.0, 176).unwrap(),
        )
    }

    #[test]
    fn zero_field_is_free_transport() {
        let (phase, time) = grids();
        let e = FieldTable::zeros(phase.x_grid(), time);
        let t = solve_characteristics(&e, phase, 1.0, &TrajectoryOptions::default(), None).unwrap();
        assert!(t.displacements_x().iter().all(|&d| d == 0.0));
        assert!(t.displacements_v().iter().all(|&d| d == 0.0));
        let node = phase.index(3, 7);
        let expected = phase.x_grid().point(3) + phase.v(7) * time.time(50);
        assert_eq!(t.x(node, 50), expected);
        let r = check_trajectory_bounds(&t, 0.0, 1.0);
        assert_eq!(r.velocity.value, 0.0);
        assert_eq!(r.offset.value, 0.0);
    }

    #[test]
    fn homogeneous_force_closed_form() {
        let (phase, time) = grids();
        let (a, eps) = (1.0, 0.5);
        let e = FieldTable::from_fn(phase.x_grid(), time, |_, t| eps * (-a * t).exp());
        let t = solve_characteristics(&e, phase, a, &TrajectoryOptions::default(), None).unwrap();
        let tend = time.t_end();
        for node in [0, 17, phase.nodes() - 1] {
            for n in [0, 40, 174] {
                let tn = time.time(n);
                // exact values of the truncated integrals
                let ex = eps * ((-a * tn).exp() / (a * a) - (-a * tend).exp() * ((tend - tn) / a + 1.0 / (a * a)));
                let ev = -eps * ((-a * tn).exp() - (-a * tend).exp()) / a;
                assert!((t.displacement_x(node, n) - ex).abs() < 1e-15 * eps);
                assert!((t.displacement_v(node, n) - ev).abs() < 1e-15 * eps);
            }
        }
        let norm = e.weighted_norm(a, 0).unwrap().value;
        let r = check_trajectory_bounds(&t, norm, a);
        assert!((r.velocity.value - 1.0).abs() < 1e-12, "{}", r.velocity.value);
        assert!(r.velocity.pass && r.offset.pass);
    }

    #[test]
    fn large_field_rejected() {
        let (phase, time) = grids();
        let e = FieldTable::from_fn(phase.x_grid(), time, |x, t| 2.0 * x.sin() * (8.0 - t).exp());
        assert!(matches!(
            solve_characteristics(&e, phase, 1.0, &TrajectoryOptions::default(), None),
            Err(Error::FieldTooLarge { .. })
        ));
    }

    #[test]
    fn warm_start_reaches_same_fixed_point() {
        let (phase, time) = grids();
        let e = FieldTable::from_fn(phase.x_grid(), time, |x, t| {
            0.01 * (x - 0.3).sin() * (-t).exp() * (1.0 + 0.2 * (t - 8.0).cos().powi(2))
        });
        let opts = TrajectoryOptions::default();
        let cold = solve_characteristics(&e, phase, 1.0, &opts, None).unwrap();
        let warm = solve_characteristics(&e.scaled(1.01), phase, 1.0, &opts, Some(&cold)).unwrap();
        let cold2 = solve_characteristics(&e.scaled(1.01), phase, 1.0, &opts, None).unwrap();
        let w: Vec<f64> = time.times().iter().map(|t| t.exp()).collect();
        let nt = time.len();
        for (idx, (a, b)) in warm.displacements_x().iter().zip(cold2.displacements_x()).enumerate() {
            assert!((a - b).abs() * w[idx % nt] < 1e-14);
        }
        assert!(warm.iterations <= cold2.iterations);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let (phase, time) = grids();
        let e = FieldTable::from_fn(phase.x_grid(), time, |x, t| 0.05 * x.sin() * (-t).exp());
        let opts = TrajectoryOptions { tol: 0.0, max_iter: 3 };
        assert!(matches!(
            solve_characteristics(&e, phase, 1.0, &opts, None),
            Err(Error::NotConverged { iterations: 3, .. })
        ));
    }
}
