//! Compares the exact solver with brute force on a grid of clock values for a
//! few random games.
//!
//! `cargo run --example oracle -- 16`

use sptg::costfn::{ExtValue, Rational};
use sptg::model::Sptg;
use sptg::sptg::solve_sptg;
use sptg::testkit::{discretized_values, random_sptg, RandomGameParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(16);
    let p = RandomGameParams { max_locations: 4, ..RandomGameParams::default() };
    for seed in 0..5 {
        let g = random_sptg(seed, &p);
        let r = solve_sptg(&Sptg::new(g.clone())?)?;
        let grid = discretized_values(&g, n);
        let mut worst = Rational::zero();
        for (f, d) in r.values.iter().zip(&grid) {
            for (i, dv) in d.iter().enumerate() {
                let x = Rational::new(i as i64, n as i64);
                if let (ExtValue::Finite(a), ExtValue::Finite(b)) = (f.evaluate(&x)?, dv) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        println!("seed {seed}: {} locations, largest gap to the 1/{n} grid game {worst}", g.locations.len());
    }
    Ok(())
}
