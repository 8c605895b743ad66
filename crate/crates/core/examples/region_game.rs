//! Builds the region game of a game with guards and resets and prints it.
//!
//! `cargo run --example region_game`

use sptg::fixtures;
use sptg::io::print_game;
use sptg::pipeline::region_ptg;

fn main() {
    let game = fixtures::unit_reset();
    let rg = region_ptg(&game);
    println!("{} regions, {} region locations, {} edges", rg.regions.len(), rg.locations.len(), rg.edges.len());
    for e in rg.edges.iter().filter(|e| e.is_reset()) {
        println!("reset edge {} -> {}", rg.name(e.src), rg.name(e.dst));
    }
    print!("{}", rg.describe());
    print!("{}", print_game(&rg.as_ptg()));
}
