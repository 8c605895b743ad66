//! Exact solver for one-clock priced timed games.
//!
//! Two players, Min and Max, move a token through locations while a single
//! clock advances. Waiting costs the location's rate per time unit, taking a
//! transition costs its weight, and reaching a final location adds its final
//! cost. The crate computes the optimal value of every location as an exact
//! piecewise-affine function of the clock, over rational numbers.
//!
//! ## Modules
//!
//! - [`costfn`]: exact rationals and piecewise-affine cost functions.
//! - [`model`]: games, guards, resets and the arena used by the solvers.
//! - [`urgent`]: values at one clock value when nobody may wait.
//! - [`sptg`]: value functions and optimal strategies of simple games.
//! - [`pipeline`]: region games, games with guards and resets.
//! - [`play`]: plays, costs and random strategies for simulation.
//! - [`io`]: the text game format and CSV, JSON and SVG results.
//! - [`cli`]: the `sptg` command.
//! - [`testkit`]: random games and brute-force checks.
//!
//! ## Examples
//!
//! Every capability has a runnable program in `crates/core/examples`:
//!
//! ```text
//! cargo run --example solve_simple      # value functions of a simple game
//! cargo run --example instant_values    # values at one clock value
//! cargo run --example strategies        # optimal Min and Max strategies
//! cargo run --example simulate          # strategies against random opponents
//! cargo run --example region_game       # the region game of a game with resets
//! cargo run --example reset_acyclic     # guards and resets without reset cycles
//! cargo run --example nra_check         # classify reset cycles by price
//! cargo run --example nra_solve         # solve a game with reset cycles
//! cargo run --example export            # CSV, JSON and SVG output
//! cargo run --example cost_functions    # cost function arithmetic
//! cargo run --example oracle            # compare with a grid brute force
//! cargo run --example print_fixtures    # the bundled games in text form
//! ```

pub mod cli;
pub mod costfn;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod play;
pub mod sptg;
pub mod testkit;
pub mod urgent;

pub use error::SolverError;
