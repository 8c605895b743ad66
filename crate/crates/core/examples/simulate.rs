//! Plays the optimal strategies of a simple game against random opponents and
//! compares the costs with the value.
//!
//! `cargo run --example simulate -- 42`

use sptg::costfn::Rational;
use sptg::fixtures;
use sptg::model::{Owner, Sptg};
use sptg::play::{default_horizon, play_cost, random_fp_strategy, simulate, Configuration};
use sptg::sptg::solve_sptg;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let game = fixtures::simple_seven();
    let s = Sptg::new(game.clone())?;
    let r = solve_sptg(&s)?;
    let start = Configuration::new(0, Rational::zero());
    let value = r.values[0].evaluate(&start.clock)?;
    let horizon = default_horizon(r.min_strategy.k, game.locations.len());
    let (mut worst_min, mut best_max) = (None, None);
    for i in 0..100 {
        let mut min = r.min_strategy.clone();
        let mut max = random_fp_strategy(&s, Owner::Max, seed + i);
        let c = play_cost(&game, &simulate(&game, start.clone(), &mut min, &mut max, horizon)?);
        worst_min = Some(worst_min.map_or(c.clone(), |w: sptg::costfn::ExtValue| w.max(c)));
        let mut max = r.max_strategy.clone();
        let mut min = random_fp_strategy(&s, Owner::Min, seed + i);
        let c = play_cost(&game, &simulate(&game, start.clone(), &mut min, &mut max, horizon)?);
        best_max = Some(best_max.map_or(c.clone(), |w: sptg::costfn::ExtValue| w.min(c)));
    }
    println!("value at (l1, 0): {value}");
    println!("optimal Min never paid more than {}", worst_min.expect("plays"));
    println!("optimal Max never received less than {}", best_max.expect("plays"));
    Ok(())
}
