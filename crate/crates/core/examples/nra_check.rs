//! Decides whether every reset cycle prices at least 0 or at most -kappa, and
//! reports the largest kappa for which that holds.
//!
//! `cargo run --example nra_check`

use sptg::costfn::Rational;
use sptg::fixtures;
use sptg::pipeline::nra::{nra_check, KappaBound, NraVerdict};

fn main() {
    for (name, game) in [("creeping_reset", fixtures::creeping_reset()), ("unit_reset", fixtures::unit_reset())] {
        for kappa in ["1", "3/2"] {
            let k: Rational = kappa.parse().expect("rational");
            let report = nra_check(&game, Some(&k));
            let verdict = match &report.verdict {
                NraVerdict::Holds => "holds".to_string(),
                NraVerdict::Violated { cycle } => format!("violated by {}", cycle.path.join(" -> ")),
                NraVerdict::Inconclusive { reason } => format!("undecided: {reason}"),
            };
            println!("{name}, kappa = {kappa}: {verdict}");
        }
        let bound = match nra_check(&game, None).kappa_bound {
            KappaBound::Any => "any kappa".to_string(),
            KappaBound::AtMost(k) => format!("kappa at most {k}"),
            KappaBound::None => "no kappa".to_string(),
        };
        println!("{name}: {bound}");
    }
}
