//! Prints the bundled reference games in the text format.
//!
//! `cargo run --example print_fixtures -- simple_seven`

use sptg::fixtures;
use sptg::io::print_game;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "simple_seven".into());
    let g = match which.as_str() {
        "simple_seven" => fixtures::simple_seven(),
        "untimed_loop" => fixtures::untimed_loop(5),
        "creeping_reset" => fixtures::creeping_reset(),
        "unit_reset" => fixtures::unit_reset(),
        other => {
            eprintln!("unknown game `{other}`; choose simple_seven, untimed_loop, creeping_reset or unit_reset");
            std::process::exit(64);
        }
    };
    print!("{}", print_game(&g));
}
