//! Games with guards and resets: region construction, reset unfolding and
//! the bounded unfolding of games with negative reset cycles.

pub mod nra;
pub mod region;
pub mod solve;

pub use nra::{nra_check, solve_nra, value_bounds, NraBudget, NraOptions, NraReport, NraVerdict};
pub use region::{region_ptg, Region, RegionPtg};
pub use solve::{reset_acyclic_solve, solve_reset_free, PtgSolution};
