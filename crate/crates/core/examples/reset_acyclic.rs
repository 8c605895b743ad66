//! Solves a game with guards and resets but no reset cycle by solving one
//! reset-free copy per reset depth.
//!
//! `cargo run --example reset_acyclic`

use sptg::costfn::{AffineFn, Rational};
use sptg::model::{Guard, Location, Ptg, Transition};
use sptg::pipeline::reset_acyclic_solve;
use sptg::sptg::SolveOptions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = |s: &str| -> Rational { s.parse().expect("rational") };
    // a waits for a discount window, b pays for time after the reset
    let game = Ptg::new(
        vec![
            Location::min("a", 2),
            Location::max("b", 1),
            Location::min("c", -1),
            Location::target("f", AffineFn::ints(1, 0)),
        ],
        vec![
            Transition::new(0, 1, 0).guarded(Guard { lo: q("1"), lo_closed: false, hi: q("2"), hi_closed: true }).with_reset(),
            Transition::new(0, 3, 5),
            Transition::new(1, 2, 1).guarded(Guard::closed(q("0"), q("1"))),
            Transition::new(1, 3, 3).guarded(Guard::closed(q("0"), q("2"))),
            Transition::new(2, 3, 0).guarded(Guard::closed(q("1"), q("2"))),
        ],
        2,
    );
    let sol = reset_acyclic_solve(&game, &SolveOptions::default())?;
    for (name, f) in sol.names.iter().zip(&sol.values).take(game.locations.len()) {
        let cuts: Vec<String> = f.cutpoints().iter().zip(f.point_values()).map(|(c, v)| format!("{c}:{v}")).collect();
        println!("{name}: {}", cuts.join("  "));
    }
    println!("solved {} reset-free copies", sol.copies);
    Ok(())
}
