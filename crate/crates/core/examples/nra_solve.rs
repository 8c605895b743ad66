//! Solves a game with a reset cycle whose prices avoid (-kappa, 0) by
//! unfolding it into reset-free copies.
//!
//! `cargo run --example nra_solve -- 1`

use sptg::costfn::Rational;
use sptg::fixtures;
use sptg::pipeline::{solve_nra, value_bounds, NraOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kappa: Rational = std::env::args().nth(1).unwrap_or_else(|| "1".into()).parse()?;
    let game = fixtures::unit_reset();
    let (v_inf, v_sup) = value_bounds(&game);
    println!("finite values lie in [{v_inf}, {v_sup}]");
    let sol = solve_nra(&game, &kappa, &NraOptions::default())?;
    println!("budget: {} copies for kappa = {kappa}", sol.budget.copies);
    match sol.stable_after {
        Some(k) => println!("values at clock 0 stopped changing after copy {k}"),
        None => println!("values still changing at the last copy"),
    }
    for name in ["l0", "l1"] {
        let f = sol.solution.value(name).expect("location");
        println!("{name}(0) = {}", f.evaluate(&Rational::zero())?);
    }
    // the full unfolding gives the same values
    let full = solve_nra(&game, &kappa, &NraOptions { early_stop: false, ..NraOptions::default() })?;
    assert_eq!(full.solution.values, sol.solution.values);
    println!("full unfolding of {} copies agrees", full.solution.copies);
    Ok(())
}
