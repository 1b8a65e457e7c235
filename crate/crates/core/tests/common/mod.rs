#![allow(dead_code)]

use landau_core::scattering::SolveGrids;
use landau_core::{PhaseGrid, TimeGrid, XGrid};

/// Coarse grids on the reference time window, for fast pipeline tests.
pub fn small_grids() -> SolveGrids {
    SolveGrids {
        phase: PhaseGrid::new(XGrid::new(16).unwrap(), 49, 6.0).unwrap(),
        time: TimeGrid::new(8.0, 43.0, 71).unwrap(),
    }
}
