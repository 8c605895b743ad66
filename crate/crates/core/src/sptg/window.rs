//! Per-window ingredients of the sweep: the waiting game, candidate cutpoints
//! and the slope test deciding how far down an urgent solution stays valid.

use std::collections::BTreeSet;

use num_traits::ToPrimitive;

use crate::costfn::{AffineFn, ExtValue, Piece, Rational};
use crate::error::SolverError;
use crate::model::{Arena, Node, Player};

/// Adds to every waiting node `v` a target clone `v^f` with final cost
/// `(r - ν)·π(v) + x[v]` and a weight-0 edge `v → v^f`; the result lives on `[0, r]`.
///
/// Original node and edge indices are preserved; clones and their edges are appended.
/// `x` is indexed by node and only read at waiting nodes.
pub fn waiting(a: &Arena, r: &Rational, x: &[Rational]) -> Arena {
    let mut g = a.clone();
    g.r = r.clone();
    for (v, node) in a.nodes.iter().enumerate() {
        if let Node::Player { rate, urgent: false, .. } = node {
            let cost = AffineFn::new(-rate, rate * r + &x[v]);
            let c = g.add_node(&format!("{}^f", a.names[v]), Node::Target(Piece::Affine(cost)));
            g.add_edge(v, c, 0, None);
        }
    }
    g
}

/// The translates `k + φ` of every affine final cost, `|k| ≤ (|L|-1)·W_T`.
pub fn fg_set(a: &Arena) -> Vec<AffineFn> {
    let span = (a.len().max(1) as i64 - 1) * a.w_t();
    let mut out = Vec::new();
    for (_, f) in a.final_fns() {
        for k in -span..=span {
            out.push(f.shifted(&Rational::from_int(k)));
        }
    }
    out
}

/// Cardinality of [`fg_set`] without building it.
pub fn fg_size(a: &Arena) -> u128 {
    let span = (a.len().max(1) as u128 - 1) * a.w_t() as u128;
    a.final_fns().count() as u128 * (2 * span + 1)
}

/// Abscissae in `[lo, hi]` where two members of [`fg_set`] with different
/// slopes intersect, plus `0` when it lies in range. Sorted ascending, no duplicates.
pub fn poss_cp(a: &Arena, lo: &Rational, hi: &Rational) -> Vec<Rational> {
    let bound = 2 * (a.len().max(1) as i64 - 1) * a.w_t();
    let finals: Vec<&AffineFn> = a.final_fns().map(|(_, f)| f).collect();
    let mut set = BTreeSet::new();
    if lo <= &Rational::zero() && hi >= &Rational::zero() {
        set.insert(Rational::zero());
    }
    for (i, fi) in finals.iter().enumerate() {
        for fj in &finals[i + 1..] {
            // (k_i + φ_i)(ν) = (k_j + φ_j)(ν)  ⇔  ν = (d + c_j - c_i) / (s_i - s_j),  d = k_j - k_i
            let ds = &fi.slope - &fj.slope;
            if ds.is_zero() {
                continue;
            }
            let dc = &fj.intercept - &fi.intercept;
            let (e1, e2) = (lo * &ds - &dc, hi * &ds - &dc);
            let (dlo, dhi) = if ds.is_positive() { (e1, e2) } else { (e2, e1) };
            let dmin = dlo.ceil().to_i64().unwrap_or(i64::MIN).max(-bound);
            let dmax = dhi.floor().to_i64().unwrap_or(i64::MAX).min(bound);
            for d in dmin..=dmax {
                set.insert((Rational::from_int(d) + &dc) / &ds);
            }
        }
    }
    set.into_iter().collect()
}

/// Whether the urgent values `at_lo` at `lo` may be joined affinely to the
/// values `at_hi` at `hi` without a waiting node preferring to wait.
///
/// A waiting Min node passes when its slope on `[lo, hi]` is at least `-π`, a
/// waiting Max node when it is at most `-π`; equality passes. Non-finite values fail.
pub fn slope_test(
    a: &Arena,
    at_hi: &[Rational],
    at_lo: &[ExtValue],
    lo: &Rational,
    hi: &Rational,
) -> Result<bool, SolverError> {
    if lo >= hi {
        return Err(SolverError::InvalidArgument(format!("slope test needs lo < hi, got [{lo}, {hi}]")));
    }
    let width = hi - lo;
    for (v, node) in a.nodes.iter().enumerate() {
        let Some(x) = at_lo[v].finite() else {
            if node.player().is_some() {
                return Ok(false);
            }
            continue;
        };
        let Node::Player { player, rate, urgent: false } = node else { continue };
        let slope = (&at_hi[v] - x) / &width;
        let bound = -rate;
        let ok = match player {
            Player::Min => slope >= bound,
            Player::Max => slope <= bound,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::Sptg;

    fn simple_seven() -> Arena {
        Arena::from_sptg(&Sptg::new(fixtures::simple_seven()).unwrap())
    }

    #[test]
    fn clone_cost_follows_rate() {
        let mut a = Arena::new(Rational::one());
        let l = a.add_node("l", Node::Player { player: Player::Min, rate: Rational::from_int(5), urgent: false });
        let f = a.add_node("f", Node::Target(Piece::Affine(AffineFn::ints(0, 0))));
        a.add_edge(l, f, 0, None);
        let g = waiting(&a, &Rational::one(), &[Rational::zero(), Rational::zero()]);
        assert_eq!(g.len(), 3);
        assert_eq!(g.nodes[2], Node::Target(Piece::Affine(AffineFn::ints(-5, 5))));
        assert_eq!(g.edges[1], crate::model::Edge { src: 0, dst: 2, weight: 0, origin: None });
    }

    #[test]
    fn simple_seven_clone_for_l1() {
        let a = simple_seven();
        let x = [0, 1, -7, -7, 1, 1, 0, 0].map(Rational::from_int);
        let g = waiting(&a, &Rational::one(), &x);
        let c = g.index_of("l1^f").unwrap();
        // -2(1 - ν) + 0
        assert_eq!(g.nodes[c], Node::Target(Piece::Affine(AffineFn::ints(2, -2))));
        assert_eq!(g.len(), 15);
        assert_eq!(g.edges.len(), 12 + 7);
    }

    #[test]
    fn candidates_contain_known_intersection() {
        let mut a = Arena::new(Rational::one());
        a.add_node("f1", Node::Target(Piece::Affine(AffineFn::ints(-3, -4))));
        a.add_node("f2", Node::Target(Piece::Affine(AffineFn::ints(16, -10))));
        // n = 2 but W_T = 0, so only the untranslated crossing and 0
        let cp = poss_cp(&a, &Rational::zero(), &Rational::one());
        assert_eq!(cp, vec![Rational::zero(), Rational::new(6, 19)]);
        assert_eq!(fg_size(&a), 2);
    }

    #[test]
    fn candidates_respect_range_and_size_bound() {
        let a = simple_seven();
        let g = waiting(&a, &Rational::one(), &[0, 1, -7, -7, 1, 1, 0, 0].map(Rational::from_int));
        let cp = poss_cp(&g, &Rational::zero(), &Rational::one());
        assert!(cp.iter().all(|c| c >= &Rational::zero() && c <= &Rational::one()));
        assert!(cp.windows(2).all(|w| w[0] < w[1]));
        assert!((cp.len() as u128) <= fg_size(&g) * fg_size(&g));
        for c in ["1/4", "1/2", "3/4", "9/10"] {
            assert!(cp.contains(&c.parse().unwrap()), "{c} missing");
        }
        assert_eq!(fg_set(&g).len() as u128, fg_size(&g));
    }

    #[test]
    fn slope_test_cases() {
        let mut a = Arena::new(Rational::one());
        a.add_node("m", Node::Player { player: Player::Min, rate: Rational::zero(), urgent: false });
        a.add_node("M", Node::Player { player: Player::Max, rate: Rational::zero(), urgent: false });
        let z = [Rational::zero(), Rational::zero()];
        let ez = [ExtValue::int(0), ExtValue::int(0)];
        assert!(slope_test(&a, &z, &ez, &Rational::zero(), &Rational::one()).unwrap());
        // Min slope -1 < 0 fails
        assert!(!slope_test(&a, &z, &[ExtValue::int(1), ExtValue::int(0)], &Rational::zero(), &Rational::one()).unwrap());
        // Max slope 1 > 0 fails
        assert!(!slope_test(&a, &z, &[ExtValue::int(0), ExtValue::int(-1)], &Rational::zero(), &Rational::one()).unwrap());
        assert!(slope_test(&a, &z, &ez, &Rational::one(), &Rational::one()).is_err());
    }

    #[test]
    fn l1_slope_twelve_against_two() {
        // Min rate -2 waiting: slope 12 on [3/4, 9/10] passes, slope 1 fails
        let mut a = Arena::new(Rational::one());
        a.add_node("l1", Node::Player { player: Player::Min, rate: Rational::from_int(-2), urgent: false });
        let (lo, hi): (Rational, Rational) = ("3/4".parse().unwrap(), "9/10".parse().unwrap());
        let at_hi = ["-1/5".parse().unwrap()];
        assert!(slope_test(&a, &at_hi, &[ExtValue::Finite(Rational::from_int(-2))], &lo, &hi).unwrap());
        let shallow = &at_hi[0] - &(&hi - &lo);
        assert!(!slope_test(&a, &at_hi, &[ExtValue::Finite(shallow)], &lo, &hi).unwrap());
    }
}
