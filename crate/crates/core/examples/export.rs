//! Writes the value functions of a simple game as CSV, JSON and SVG.
//!
//! `cargo run --example export -- /tmp/out`

use std::path::PathBuf;

use sptg::costfn::Rational;
use sptg::fixtures;
use sptg::io::{entries, to_csv, to_svg, ResultFile};
use sptg::model::Sptg;
use sptg::sptg::solve_sptg;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/export".into()));
    std::fs::create_dir_all(&dir)?;
    let game = fixtures::simple_seven();
    let r = solve_sptg(&Sptg::new(game.clone())?)?;
    let keep = |i: usize| !game.locations[i].is_final();
    let es = entries(&r.names, &r.values, keep);
    std::fs::write(dir.join("simple_seven.csv"), to_csv(&es))?;
    std::fs::write(dir.join("simple_seven.json"), ResultFile::new("sptg", Rational::one(), &es).to_json())?;
    std::fs::write(dir.join("simple_seven.svg"), to_svg(&es))?;
    println!("wrote simple_seven.csv, simple_seven.json and simple_seven.svg to {}", dir.display());
    Ok(())
}
