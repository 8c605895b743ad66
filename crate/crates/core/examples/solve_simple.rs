//! Solves a simple game and prints every value function piece by piece.
//!
//! `cargo run --example solve_simple` solves the bundled seven-location game;
//! pass a path to solve a game file instead.

use sptg::costfn::Piece;
use sptg::fixtures;
use sptg::io::parse_game;
use sptg::model::Sptg;
use sptg::sptg::solve_sptg;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let game = match std::env::args().nth(1) {
        Some(path) => parse_game(&std::fs::read_to_string(path)?)?,
        None => fixtures::simple_seven(),
    };
    let result = solve_sptg(&Sptg::new(game.clone())?)?;
    for (loc, f) in game.locations.iter().zip(&result.values) {
        if loc.is_final() {
            continue;
        }
        println!("{} ({}):", loc.id, loc.owner);
        for (i, piece) in f.pieces().iter().enumerate() {
            let (a, b) = (&f.cutpoints()[i], &f.cutpoints()[i + 1]);
            match piece {
                Piece::Affine(g) => println!("  [{a}, {b}]  {g}"),
                other => println!("  [{a}, {b}]  {}", other.eval(a)),
            }
        }
        if f.pieces().is_empty() {
            println!("  at {}: {}", f.lo(), f.point_values()[0]);
        }
    }
    let s = &result.stats;
    println!(
        "{} windows, {} instant solves, {} value-iteration steps in total",
        s.windows, s.instant_calls, s.total_iterations
    );
    Ok(())
}
