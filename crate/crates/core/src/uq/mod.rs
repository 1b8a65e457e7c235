//! Stochastic collocation in the random parameter `z` on `[-1, 1]` with the
//! uniform measure.

mod basis;
mod ensemble;

pub use basis::{
    fornberg_weights, legendre_derivatives, legendre_orthonormal, legendre_orthonormal_derivative, CollocationNodes,
    NodeFamily,
};
pub use ensemble::{
    check_corollary, check_theorem_bounds, compare_refinement, gpc_coefficients, run_collocation, CorollaryOrder,
    CorollaryReport, DerivativeEstimate, EnsembleMember, GpcTable, RefinementReport, RefinementRow,
    ResidualDerivatives, TheoremReport, ZEnsemble, ESTIMATOR_TOL, FD_STENCIL, NOISE_FLOOR, REFINEMENT_TOL,
};
