//! Fixed-point iteration `E_{n+1} = F(E_n)` from `E_0 = 0` and the bound
//! checks at the converged field.

use serde::{Deserialize, Serialize};

use super::characteristics::{
    check_trajectory_bounds, solve_characteristics, TrajectoryBoundReport, TrajectoryOptions, TrajectoryTable,
};
use super::field_map::{deposit_density, field_from_trajectories, field_map_zero, free_tail_norm, PhaseQuadrature};
use super::variational::{check_variational_bounds, solve_variational, VariationalBoundReport, VariationalTable};
use crate::checks::{all_pass, BoundCheck};
use crate::error::{Error, Result};
use crate::fields::{FieldTable, NormReport, PhaseGrid, TimeGrid};
use crate::params::{check_assumptions, tail_integral_moment, DampingParams};
use crate::profiles::{check_decay, check_smoothness, ProfileSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveGrids {
    pub phase: PhaseGrid,
    pub time: TimeGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    /// Stop once `|E_{n+1} - E_n|_(a,t0)` is below this.
    pub tol: f64,
    pub max_iter: usize,
    pub trajectory: TrajectoryOptions,
    pub quadrature: PhaseQuadrature,
    /// Consecutive ratios above one that abort the iteration.
    pub divergence_window: usize,
    /// Relative slack on the observed contraction ratios.
    pub contraction_slack: f64,
    /// Bound on `|dF(E)/dx - (rho - rho0)|_inf`.
    pub consistency_tol: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_iter: 40,
            trajectory: TrajectoryOptions::default(),
            quadrature: PhaseQuadrature::Split,
            divergence_window: 3,
            contraction_slack: 0.10,
            consistency_tol: 5e-5,
        }
    }
}

/// Bound-check outcomes at the converged field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveChecks {
    pub field: Vec<BoundCheck>,
    pub density: Vec<BoundCheck>,
    pub trajectory: TrajectoryBoundReport,
    pub variational: VariationalBoundReport,
    pub contraction: BoundCheck,
    pub jacobian: BoundCheck,
    pub consistency: BoundCheck,
    pub residual: BoundCheck,
}

impl SolveChecks {
    pub fn all(&self) -> Vec<BoundCheck> {
        let mut out = self.field.clone();
        out.extend(self.density.iter().cloned());
        out.push(self.trajectory.velocity.clone());
        out.push(self.trajectory.offset.clone());
        out.extend(self.variational.checks.iter().cloned());
        out.push(self.contraction.clone());
        out.push(self.jacobian.clone());
        out.push(self.consistency.clone());
        out.push(self.residual.clone());
        out
    }

    pub fn pass(&self) -> bool {
        all_pass(&self.all())
    }
}

/// Bounds on what the discretisation leaves out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// `|E|_(a,t0) int_T^inf (s - T) e^{-as} ds`, neglected in `X`.
    pub time_tail_position: f64,
    /// `|E|_(a,t0) e^{-aT} / a`, neglected in `V`.
    pub time_tail_velocity: f64,
    /// Mass per unit length beyond `|v| = v_max` allowed by the decay bound.
    pub velocity_tail_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub z: f64,
    pub iterations: usize,
    pub converged: bool,
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
    pub contraction_bound: f64,
    pub field_norm: NormReport,
    pub field_norm_interpolated: NormReport,
    /// `sup_{t >= T} e^{at} |E|` of the free field past the horizon.
    pub tail_norm: NormReport,
    /// `max(field_norm_interpolated, tail_norm)`: the sup over all `t >= t0`.
    pub field_norm_bound: f64,
    pub dx_field_sup: f64,
    pub dx_field_norm: NormReport,
    pub first_iterate_norm: f64,
    pub residual: f64,
    pub consistency: f64,
    pub rho0: f64,
    pub inner_iterations: usize,
    pub truncation: TruncationReport,
    pub checks: SolveChecks,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub field: FieldTable,
    /// `F(E)` for the returned `E`; differs from it by the residual.
    pub field_next: FieldTable,
    pub trajectories: TrajectoryTable,
    pub variational: VariationalTable,
    pub density: FieldTable,
    pub summary: SolveSummary,
}

/// Runs the (A1)-(A5) gate, the profile hypotheses at `z` and the grid
/// compatibility checks.
pub fn check_solve_preconditions(spec: &ProfileSpec, params: &DampingParams, z: f64, grids: &SolveGrids) -> Result<()> {
    let gate = check_assumptions(params);
    if !gate.pass {
        return Err(Error::GateFailed(format!(
            "conditions {} fail",
            gate.failing().join(", ")
        )));
    }
    let smooth = check_smoothness(spec, params.a, params.a1, &[z], 0);
    if !smooth.pass {
        return Err(Error::GateFailed(match smooth.structural_failure {
            Some(s) => s,
            None => format!("profile smoothness margin {} exceeds 1", smooth.margin),
        }));
    }
    for order in [0, 1] {
        let decay = check_decay(spec, params.a2, &[z], order);
        if !decay.pass {
            return Err(Error::GateFailed(format!(
                "profile decay margin {} (derivative order {order}) exceeds 1",
                decay.worst
            )));
        }
    }
    if (grids.time.t0() - params.t0).abs() > 1e-12 * params.t0 {
        return Err(Error::GridMismatch(format!(
            "time grid starts at {} but t0 = {}",
            grids.time.t0(),
            params.t0
        )));
    }
    Ok(())
}

/// Fixed-point iteration without the precondition gate; see [`picard_solve`].
pub fn picard_iterate(
    spec: &ProfileSpec,
    params: &DampingParams,
    z: f64,
    grids: &SolveGrids,
    opts: &PicardOptions,
) -> Result<SolveResult> {
    let a = params.a;
    let SolveGrids { phase, time } = *grids;
    let mut e = FieldTable::zeros(phase.x_grid(), time);
    let mut traj: Option<TrajectoryTable> = None;
    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    let mut above_one = 0;
    let mut converged = false;
    let mut inner = 0;
    for _ in 0..opts.max_iter {
        let t = solve_characteristics(&e, phase, a, &opts.trajectory, traj.as_ref())?;
        inner = inner.max(t.iterations);
        let next = field_from_trajectories(&t, spec, z, opts.quadrature)?;
        let inc = next.sub(&e)?.weighted_norm(a, 0)?.value;
        if let Some(&prev) = increments.last() {
            let r: f64 = crate::checks::ratio(inc, prev);
            ratios.push(r);
            if r > 1.0 {
                above_one += 1;
                if above_one >= opts.divergence_window {
                    return Err(Error::Diverging {
                        count: above_one,
                        ratio: r,
                    });
                }
            } else {
                above_one = 0;
            }
        }
        increments.push(inc);
        e = next;
        traj = Some(t);
        if inc < opts.tol || inc == 0.0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            what: "Picard iteration",
            iterations: increments.len(),
            residual: increments.last().copied().unwrap_or(f64::NAN),
        });
    }
    let trajectories = solve_characteristics(&e, phase, a, &opts.trajectory, traj.as_ref())?;
    inner = inner.max(trajectories.iterations);
    let variational = solve_variational(&e, &trajectories, a, &opts.trajectory)?;
    let field_next = field_from_trajectories(&trajectories, spec, z, opts.quadrature)?;
    let density = deposit_density(&trajectories, spec, z, opts.quadrature)?;
    let rho0 = spec.neutral_density(z);
    let residual = field_next.sub(&e)?.weighted_norm(a, 0)?.value;
    let consistency = field_next.spectral_dx().max_abs_diff(&density.map(|r| r - rho0))?;

    let field_norm = e.weighted_norm(a, 0)?;
    let field_norm_interpolated = e.weighted_norm_interpolated(a, 0)?;
    let tail_norm = free_tail_norm(spec, z, phase.x_grid(), time.t_end(), a)?;
    let field_norm_bound = field_norm_interpolated.value.max(tail_norm.value);
    let dx = e.spectral_dx();
    let dx_field_sup = dx.max_abs();
    let dx_field_norm = dx.weighted_norm(a, 1)?;
    let first_iterate_norm = increments[0];

    let c_e = params.c_e;
    let lipschitz = params.contraction_bound();
    let mut field = vec![
        BoundCheck::new(
            "|E|_(a,t0) <= 8 a1",
            field_norm.value.max(tail_norm.value),
            8.0 * params.a1,
        ),
        BoundCheck::new("|dE/dx|_inf <= 20 a2", dx_field_sup, 20.0 * params.a2),
        BoundCheck::new("|dE/dx|_(a,t0,1) <= C_E", dx_field_norm.value, c_e),
        BoundCheck::new(
            "|F(0)|_(a,t0) <= 4 a1",
            first_iterate_norm.max(tail_norm.value),
            4.0 * params.a1,
        ),
        BoundCheck::new(
            "|F(E)|_(a,t0) <= 8 a1 L + 4 a1",
            field_next.weighted_norm(a, 0)?.value.max(tail_norm.value),
            8.0 * params.a1 * lipschitz + 4.0 * params.a1,
        ),
    ];
    // past the tail span the sup may still be growing
    if tail_norm.horizon_dominated {
        field[0].pass = false;
    }
    let rho_minus = density.map(|r| r - rho0);
    let density_checks = vec![
        BoundCheck::new("|rho|_inf <= 10 a2", density.max_abs(), 10.0 * params.a2),
        BoundCheck::new(
            "|rho - rho0|_(a,t0,1) <= C_E",
            rho_minus.weighted_norm(a, 1)?.value,
            c_e,
        ),
    ];
    let trajectory = check_trajectory_bounds(&trajectories, field_norm_bound, a);
    let variational_report = check_variational_bounds(&variational, c_e, a)?;
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let contraction = BoundCheck::with_limit(
        "|E_(n+1) - E_n| / |E_n - E_(n-1)| <= 88 a2 / (a^2 - 80 a2)",
        max_ratio,
        lipschitz,
        1.0 + opts.contraction_slack,
    );
    let jacobian = BoundCheck::new(
        "|det d(X,V)/d(x,v) - 1| <= 1e-6",
        variational_report.max_jacobian_defect,
        1e-6,
    );
    let consistency_check = BoundCheck::new(
        "|dF(E)/dx - (rho - rho0)|_inf <= tolerance",
        consistency,
        opts.consistency_tol,
    );
    let residual_check = BoundCheck::new("|F(E) - E|_(a,t0) <= tol", residual, opts.tol);
    let truncation = TruncationReport {
        time_tail_position: field_norm_bound * tail_integral_moment(a, time.t_end(), 0)?,
        time_tail_velocity: field_norm_bound * (-a * time.t_end()).exp() / a,
        velocity_tail_mass: phase.truncated_mass_bound(params.a2),
    };
    let checks = SolveChecks {
        field,
        density: density_checks,
        trajectory,
        variational: variational_report,
        contraction,
        jacobian,
        consistency: consistency_check,
        residual: residual_check,
    };
    let summary = SolveSummary {
        z,
        iterations: increments.len(),
        converged,
        increments,
        ratios,
        contraction_bound: lipschitz,
        field_norm,
        field_norm_interpolated,
        tail_norm,
        field_norm_bound,
        dx_field_sup,
        dx_field_norm,
        first_iterate_norm,
        residual,
        consistency,
        rho0,
        inner_iterations: inner,
        truncation,
        checks,
    };
    Ok(SolveResult {
        field: e,
        field_next,
        trajectories,
        variational,
        density,
        summary,
    })
}

/// Solves `E = F(E)` at parameter `z` after the precondition gate.
pub fn picard_solve(
    spec: &ProfileSpec,
    params: &DampingParams,
    z: f64,
    grids: &SolveGrids,
    opts: &PicardOptions,
) -> Result<SolveResult> {
    check_solve_preconditions(spec, params, z, grids)?;
    picard_iterate(spec, params, z, grids, opts)
}

/// The closed-form first iterate, for comparison with `F(0)`.
pub fn first_iterate(spec: &ProfileSpec, z: f64, grids: &SolveGrids) -> Result<FieldTable> {
    field_map_zero(spec, z, grids.phase.x_grid(), grids.time)
}
