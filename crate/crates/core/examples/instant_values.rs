//! Values at a single clock value when every location is urgent, with the
//! number of value-iteration steps and the theoretical bound.
//!
//! `cargo run --example instant_values -- 1/2`

use sptg::costfn::Rational;
use sptg::fixtures;
use sptg::model::{Arena, Sptg};
use sptg::urgent::solve_instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nu: Rational = std::env::args().nth(1).unwrap_or_else(|| "1".into()).parse()?;
    let arena = Arena::from_sptg(&Sptg::new(fixtures::simple_seven())?).all_urgent();
    let x = solve_instant(&arena, &nu)?;
    for (name, v) in arena.names.iter().zip(&x.values) {
        println!("{name:>4} = {v}");
    }
    println!("stable after {} steps (bound {})", x.iterations, x.iteration_bound);

    // the untimed family: values -W, iteration counts growing with W
    for w in [1, 10, 100, 1000] {
        let a = Arena::from_sptg(&Sptg::new(fixtures::untimed_loop(w))?).all_urgent();
        let x = solve_instant(&a, &Rational::zero())?;
        println!("W = {w:>4}: l1 = {}, {} steps, bound {}", x.values[0], x.iterations, x.iteration_bound);
    }
    Ok(())
}
