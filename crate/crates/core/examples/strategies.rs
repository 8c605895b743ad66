//! Optimal strategies of a simple game: the Max table, the two Min phases
//! and the switching threshold.
//!
//! `cargo run --example strategies`

use sptg::costfn::Rational;
use sptg::fixtures;
use sptg::model::Sptg;
use sptg::sptg::{solve_sptg, LocationStrategy, Move};

fn describe(m: &Move, names: &[String], game: &sptg::model::Ptg) -> String {
    let t = &game.transitions[m.edge()];
    let edge = format!("{} -> {}", names[t.source], names[t.target]);
    match m {
        Move::Now { .. } => format!("take {edge} now"),
        Move::Wait { until, .. } => format!("wait until {until}, then {edge}"),
    }
}

fn table(name: &str, s: &LocationStrategy, names: &[String], game: &sptg::model::Ptg) {
    println!("  {name}:");
    for (i, c) in s.cuts.iter().enumerate() {
        println!("    at {c}: {}", describe(&s.at_cut[i], names, game));
        if let Some(m) = s.between.get(i) {
            println!("    in ({c}, {}): {}", s.cuts[i + 1], describe(m, names, game));
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let game = fixtures::simple_seven();
    let r = solve_sptg(&Sptg::new(game.clone())?)?;
    println!("Max:");
    for (l, s) in r.max_strategy.locations.iter().enumerate() {
        if let Some(s) = s {
            table(&r.names[l], s, &r.names, &game);
        }
    }
    println!("Min, first phase:");
    for (l, s) in r.min_strategy.first.locations.iter().enumerate() {
        if let Some(s) = s {
            table(&r.names[l], s, &r.names, &game);
        }
    }
    println!("Min switches to reaching the target after {} steps", r.min_strategy.k);
    let l1 = r.index_of("l1").expect("l1");
    let nu = Rational::new(1, 3);
    if let Some(m) = r.min_strategy.decide(l1, &nu, 0) {
        println!("from (l1, {nu}) Min will {}", describe(m, &r.names, &game));
    }
    Ok(())
}
