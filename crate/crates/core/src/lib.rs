//! Landau-damping fields for the one-dimensional Vlasov-Poisson system on the
//! torus, constructed backwards from a prescribed time-asymptotic profile.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] holds the scalar constants, the admissibility gate and the
//!   closed-form tail integrals.
//! * [`profiles`] describes the asymptotic profile `f*(x, v, z)` and checks its
//!   smoothness and decay hypotheses.
//! * [`fields`] contains grids, field tables, weighted decay norms and the
//!   periodic kernel `B`.
//! * [`scattering`] solves the backward characteristics, the variational
//!   system, the density/field map and the Picard iteration.
//! * [`uq`] sweeps the random parameter by stochastic collocation and checks
//!   the regularity of the field and of the solution residual in `z`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod error;
pub mod fields;
pub mod params;
pub mod profiles;
pub mod reference;
pub mod scattering;
pub mod uq;

pub use error::{Error, Result};
pub use fields::{FieldTable, NormKind, NormReport, PhaseGrid, TimeGrid, XGrid};
pub use params::{AssumptionReport, DampingParams};
pub use profiles::{ProfileSpec, VelocityShape, XMode, ZDependence};
pub use scattering::{PhaseQuadrature, PicardOptions, SolveResult, TrajectoryOptions};
pub use uq::{NodeFamily, ZEnsemble};
