//! Finitely described strategies: per-location interval tables of moves.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::costfn::Rational;

/// What a player does at a configuration.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Move {
    /// Take the edge immediately.
    Now { edge: usize },
    /// Let time elapse until the clock reads `until`, then take the edge.
    Wait { until: Rational, edge: usize },
}

impl Move {
    pub fn edge(&self) -> usize {
        match self {
            Move::Now { edge } | Move::Wait { edge, .. } => *edge,
        }
    }

    /// Delay prescribed at clock value `nu`.
    pub fn delay(&self, nu: &Rational) -> Rational {
        match self {
            Move::Now { .. } => Rational::zero(),
            Move::Wait { until, .. } => until - nu,
        }
    }

    fn map_edge(&self, f: impl Fn(usize) -> usize) -> Move {
        match self {
            Move::Now { edge } => Move::Now { edge: f(*edge) },
            Move::Wait { until, edge } => Move::Wait { until: until.clone(), edge: f(*edge) },
        }
    }
}

/// Moves of one location over `[cuts[0], cuts.last()]`: `at_cut[i]` applies at
/// `cuts[i]` and `between[i]` on the open interval `(cuts[i], cuts[i+1])`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct LocationStrategy {
    pub cuts: Vec<Rational>,
    pub at_cut: Vec<Move>,
    pub between: Vec<Move>,
}

impl LocationStrategy {
    pub fn constant(lo: Rational, hi: Rational, mv: Move) -> Self {
        if lo == hi {
            return LocationStrategy { cuts: vec![lo], at_cut: vec![mv], between: vec![] };
        }
        LocationStrategy { cuts: vec![lo, hi], at_cut: vec![mv.clone(), mv.clone()], between: vec![mv] }
    }

    pub fn lookup(&self, nu: &Rational) -> Option<&Move> {
        match self.cuts.binary_search(nu) {
            Ok(i) => self.at_cut.get(i),
            Err(0) => None,
            Err(i) if i == self.cuts.len() => None,
            Err(i) => self.between.get(i - 1),
        }
    }

    /// Drops interior cutpoints where the point move equals both neighbouring interval moves.
    pub fn canonical(&self) -> Self {
        let mut out = LocationStrategy { cuts: vec![self.cuts[0].clone()], at_cut: vec![self.at_cut[0].clone()], between: vec![] };
        for i in 1..self.cuts.len() {
            let incoming = &self.between[i - 1];
            let last = out.cuts.len() - 1;
            if last > 0 && out.between[last - 1] == *incoming && out.at_cut[last] == *incoming {
                out.cuts[last] = self.cuts[i].clone();
                out.at_cut[last] = self.at_cut[i].clone();
                continue;
            }
            out.between.push(incoming.clone());
            out.cuts.push(self.cuts[i].clone());
            out.at_cut.push(self.at_cut[i].clone());
        }
        out
    }

    /// Every `Wait` ends no earlier than the stretch it is prescribed on.
    pub fn waits_forward(&self) -> bool {
        let ok = |m: &Move, nu: &Rational| match m {
            Move::Now { .. } => true,
            Move::Wait { until, .. } => until >= nu,
        };
        self.at_cut.iter().zip(&self.cuts).all(|(m, c)| ok(m, c))
            && self.between.iter().zip(&self.cuts[1..]).all(|(m, c)| ok(m, c))
    }

    pub fn map_edges(&self, f: impl Fn(usize) -> usize + Copy) -> Self {
        LocationStrategy {
            cuts: self.cuts.clone(),
            at_cut: self.at_cut.iter().map(|m| m.map_edge(f)).collect(),
            between: self.between.iter().map(|m| m.map_edge(f)).collect(),
        }
    }
}

/// Memoryless strategy given per location by an interval table; `None` where
/// the strategy does not prescribe anything (other player, targets, pruned locations).
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct FpStrategy {
    pub locations: Vec<Option<LocationStrategy>>,
}

impl FpStrategy {
    pub fn decide(&self, loc: usize, nu: &Rational) -> Option<&Move> {
        self.locations.get(loc)?.as_ref()?.lookup(nu)
    }

    /// Number of intervals (points and open stretches) of the common refinement
    /// of all location tables.
    pub fn size(&self) -> usize {
        let pts: BTreeSet<&Rational> = self.locations.iter().flatten().flat_map(|s| s.cuts.iter()).collect();
        if pts.is_empty() {
            0
        } else {
            2 * pts.len() - 1
        }
    }

    /// All breakpoints of the common refinement, ascending.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let pts: BTreeSet<&Rational> = self.locations.iter().flatten().flat_map(|s| s.cuts.iter()).collect();
        pts.into_iter().cloned().collect()
    }
}

/// Play `first` until the play has `k` transitions, then `second`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SwitchingStrategy {
    pub first: FpStrategy,
    pub second: FpStrategy,
    pub k: u64,
}

impl SwitchingStrategy {
    pub fn decide(&self, loc: usize, nu: &Rational, steps: u64) -> Option<&Move> {
        if steps < self.k {
            self.first.decide(loc, nu)
        } else {
            self.second.decide(loc, nu)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn lookup_points_and_intervals() {
        let s = LocationStrategy {
            cuts: vec![q("0"), q("1/2"), q("1")],
            at_cut: vec![Move::Now { edge: 0 }, Move::Now { edge: 1 }, Move::Now { edge: 2 }],
            between: vec![Move::Wait { until: q("1/2"), edge: 1 }, Move::Now { edge: 3 }],
        };
        assert_eq!(s.lookup(&q("0")), Some(&Move::Now { edge: 0 }));
        assert_eq!(s.lookup(&q("1/4")).unwrap().delay(&q("1/4")), q("1/4"));
        assert_eq!(s.lookup(&q("3/4")), Some(&Move::Now { edge: 3 }));
        assert_eq!(s.lookup(&q("2")), None);
        assert!(s.waits_forward());
    }

    #[test]
    fn canonical_merges_uniform_stretches() {
        let m = Move::Now { edge: 4 };
        let s = LocationStrategy {
            cuts: vec![q("0"), q("1/3"), q("2/3"), q("1")],
            at_cut: vec![m.clone(), m.clone(), Move::Now { edge: 1 }, m.clone()],
            between: vec![m.clone(), m.clone(), m.clone()],
        };
        let c = s.canonical();
        assert_eq!(c.cuts, vec![q("0"), q("2/3"), q("1")]);
        assert_eq!(c.canonical(), c);
        let fp = FpStrategy { locations: vec![Some(c), None] };
        assert_eq!(fp.size(), 5);
    }

    #[test]
    fn switching_uses_counter() {
        let a = FpStrategy { locations: vec![Some(LocationStrategy::constant(q("0"), q("1"), Move::Now { edge: 0 }))] };
        let b = FpStrategy { locations: vec![Some(LocationStrategy::constant(q("0"), q("1"), Move::Now { edge: 1 }))] };
        let s = SwitchingStrategy { first: a, second: b, k: 3 };
        assert_eq!(s.decide(0, &q("1/2"), 2).unwrap().edge(), 0);
        assert_eq!(s.decide(0, &q("1/2"), 3).unwrap().edge(), 1);
    }
}
