//! Exact piecewise-affine cost functions: construction, evaluation and
//! pointwise minimum.
//!
//! `cargo run --example cost_functions`

use sptg::costfn::{pointwise_extremum, AffineFn, CostFunction, Extremum, Rational};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = |s: &str| -> Rational { s.parse().expect("rational") };
    let tent = CostFunction::from_points(&[(q("0"), q("0")), (q("1/2"), q("3")), (q("1"), q("0"))])?;
    let line = CostFunction::affine(q("0"), q("1"), AffineFn::new(q("2"), q("1/3")));
    let low = pointwise_extremum(&[tent.clone(), line.clone()], Extremum::Min)?;
    for f in [&tent, &line, &low] {
        let pts: Vec<String> = f.cutpoints().iter().zip(f.point_values()).map(|(c, v)| format!("({c}, {v})")).collect();
        println!("{}", pts.join(" "));
    }
    println!("min at 2/7 = {}", low.evaluate(&q("2/7"))?);
    Ok(())
}
