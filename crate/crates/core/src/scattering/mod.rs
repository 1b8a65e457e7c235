//! Backward characteristics, their first variations, the field map and the
//! fixed-point driver.

mod characteristics;
mod field_map;
mod picard;
mod product;
mod quadrature;
mod variational;

pub use characteristics::{
    check_field_admissible, check_trajectory_bounds, solve_characteristics, TrajectoryBoundReport, TrajectoryOptions,
    TrajectoryTable, TRAJECTORY_SLACK,
};
pub use field_map::{
    deposit_density, field_from_trajectories, field_map_zero, free_density, free_tail_norm, PhaseQuadrature,
    REDUCTION_PARTITION,
};
pub use picard::{
    check_solve_preconditions, first_iterate, picard_iterate, picard_solve, PicardOptions, SolveChecks, SolveGrids,
    SolveResult, SolveSummary, TruncationReport,
};
pub use product::{check_nonlinear_norm_product, product_constant, ProductCheck};
pub use quadrature::TailQuadrature;
pub use variational::{check_variational_bounds, solve_variational, VariationalBoundReport, VariationalTable};

use crate::error::Result;
use crate::fields::{FieldTable, PhaseGrid};
use crate::profiles::ProfileSpec;

/// `F(E)`: characteristics for `E`, then the field they generate.
pub fn apply_field_map(
    e: &FieldTable,
    spec: &ProfileSpec,
    z: f64,
    phase: PhaseGrid,
    a: f64,
    traj_opts: &TrajectoryOptions,
    quadrature: PhaseQuadrature,
) -> Result<FieldTable> {
    let traj = solve_characteristics(e, phase, a, traj_opts, None)?;
    field_from_trajectories(&traj, spec, z, quadrature)
}
