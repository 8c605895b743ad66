//! Region construction: one copy of every location per region of the clock,
//! with guards resolved statically and explicit waiting transitions.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::costfn::Rational;
use crate::model::{Guard, Location, Owner, Ptg, Transition};

/// Either the point `{lo}` (when `lo == hi`) or the open interval `(lo, hi)`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Region {
    pub lo: Rational,
    pub hi: Rational,
}

impl Region {
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, nu: &Rational) -> bool {
        if self.is_point() {
            nu == &self.lo
        } else {
            &self.lo < nu && nu < &self.hi
        }
    }

    /// True when every clock value of the region satisfies the guard.
    pub fn within(&self, g: &Guard) -> bool {
        if self.is_point() {
            return g.contains(&self.lo);
        }
        g.lo <= self.lo && g.hi >= self.hi
    }

    pub fn label(&self) -> String {
        if self.is_point() {
            format!("{{{}}}", self.lo)
        } else {
            format!("({},{})", self.lo, self.hi)
        }
    }
}

/// Guard endpoints together with `0` and the clock bound, ascending.
pub fn endpoints(g: &Ptg) -> Vec<Rational> {
    let mut s: BTreeSet<Rational> = BTreeSet::new();
    s.insert(Rational::zero());
    s.insert(Rational::from_int(g.clock_bound));
    for t in &g.transitions {
        s.insert(t.guard.lo.clone());
        s.insert(t.guard.hi.clone());
    }
    s.into_iter().collect()
}

/// `{M0}, (M0,M1), {M1}, …, {Mk}`.
pub fn regions(g: &Ptg) -> Vec<Region> {
    let pts = endpoints(g);
    let mut out = Vec::with_capacity(2 * pts.len() - 1);
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            out.push(Region { lo: pts[i - 1].clone(), hi: p.clone() });
        }
        out.push(Region { lo: p.clone(), hi: p.clone() });
    }
    out
}

pub fn region_of(regions: &[Region], nu: &Rational) -> Option<usize> {
    regions.iter().position(|r| r.contains(nu))
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RegionEdgeKind {
    /// Stands for the listed source transitions, which all share source, target and reset flag.
    Action { transitions: Vec<usize>, reset: bool },
    /// Time elapses into the next region.
    Wait,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct RegionEdge {
    pub src: usize,
    pub dst: usize,
    /// Owner's preferred weight among the collapsed transitions.
    pub weight: i64,
    /// Smallest and largest weight among them.
    pub weight_range: (i64, i64),
    pub kind: RegionEdgeKind,
}

impl RegionEdge {
    pub fn is_reset(&self) -> bool {
        matches!(self.kind, RegionEdgeKind::Action { reset: true, .. })
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct RegionLocation {
    pub location: usize,
    pub region: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionPtg {
    #[serde(skip)]
    pub source: Ptg,
    pub regions: Vec<Region>,
    pub locations: Vec<RegionLocation>,
    pub edges: Vec<RegionEdge>,
    /// `index[location][region]`.
    #[serde(skip)]
    pub index: Vec<Vec<usize>>,
    /// Whether a move exists from the region location (possibly after waiting).
    pub has_move: Vec<bool>,
}

impl RegionPtg {
    pub fn node(&self, location: usize, region: usize) -> usize {
        self.index[location][region]
    }

    pub fn out(&self, v: usize) -> impl Iterator<Item = (usize, &RegionEdge)> {
        self.edges.iter().enumerate().filter(move |(_, e)| e.src == v)
    }

    pub fn name(&self, v: usize) -> String {
        let rl = &self.locations[v];
        format!("{}#{}", self.source.locations[rl.location].id, rl.region)
    }

    /// The region game as an ordinary game with closed guards.
    ///
    /// Location `l#i` is `l` restricted to region `i`; point regions are urgent.
    pub fn as_ptg(&self) -> Ptg {
        let locations = self
            .locations
            .iter()
            .enumerate()
            .map(|(v, rl)| {
                let src = &self.source.locations[rl.location];
                Location {
                    id: self.name(v),
                    owner: src.owner,
                    rate: src.rate,
                    urgent: src.owner != Owner::Final && (src.urgent || self.regions[rl.region].is_point()),
                    final_cost: src.final_cost.clone(),
                }
            })
            .collect();
        let transitions = self
            .edges
            .iter()
            .map(|e| {
                let from = &self.regions[self.locations[e.src].region];
                let guard = match e.kind {
                    RegionEdgeKind::Wait if !from.is_point() => Guard::point(from.hi.clone()),
                    RegionEdgeKind::Wait => Guard::point(from.lo.clone()),
                    RegionEdgeKind::Action { .. } => Guard::closed(from.lo.clone(), from.hi.clone()),
                };
                Transition { source: e.src, target: e.dst, guard, reset: e.is_reset(), weight: e.weight }
            })
            .collect();
        Ptg::new(locations, transitions, self.source.clock_bound)
    }

    /// Comment lines describing the regions, for printing next to [`Self::as_ptg`].
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for (i, r) in self.regions.iter().enumerate() {
            let _ = writeln!(s, "# region {i}: {}", r.label());
        }
        s
    }
}

/// Builds the region game of `g`.
pub fn region_ptg(g: &Ptg) -> RegionPtg {
    let regions = regions(g);
    let nr = regions.len();
    let mut locations = Vec::new();
    let mut index = vec![vec![0; nr]; g.locations.len()];
    for (l, row) in index.iter_mut().enumerate() {
        for (i, slot) in row.iter_mut().enumerate() {
            *slot = locations.len();
            locations.push(RegionLocation { location: l, region: i });
        }
    }
    let zero_region = 0;
    let mut edges: Vec<RegionEdge> = Vec::new();
    for (k, t) in g.transitions.iter().enumerate() {
        let owner = g.locations[t.source].owner;
        for (i, reg) in regions.iter().enumerate() {
            if !reg.within(&t.guard) {
                continue;
            }
            let src = index[t.source][i];
            let dst = index[t.target][if t.reset { zero_region } else { i }];
            let same = edges.iter_mut().find(|e| {
                e.src == src && e.dst == dst && matches!(&e.kind, RegionEdgeKind::Action { reset, .. } if *reset == t.reset)
            });
            match same {
                Some(e) => {
                    if let RegionEdgeKind::Action { transitions, .. } = &mut e.kind {
                        transitions.push(k);
                    }
                    e.weight = if owner == Owner::Max { e.weight.max(t.weight) } else { e.weight.min(t.weight) };
                    e.weight_range = (e.weight_range.0.min(t.weight), e.weight_range.1.max(t.weight));
                }
                None => edges.push(RegionEdge {
                    src,
                    dst,
                    weight: t.weight,
                    weight_range: (t.weight, t.weight),
                    kind: RegionEdgeKind::Action { transitions: vec![k], reset: t.reset },
                }),
            }
        }
    }
    // has_move from the top region down; waiting only into regions where a move exists
    let mut has_move = vec![false; locations.len()];
    for (l, loc) in g.locations.iter().enumerate() {
        for i in (0..nr).rev() {
            let v = index[l][i];
            let acts = edges.iter().any(|e| e.src == v);
            let can_wait = loc.owner != Owner::Final && !loc.urgent && i + 1 < nr && has_move[index[l][i + 1]];
            has_move[v] = acts || can_wait;
            if can_wait {
                edges.push(RegionEdge {
                    src: v,
                    dst: index[l][i + 1],
                    weight: 0,
                    weight_range: (0, 0),
                    kind: RegionEdgeKind::Wait,
                });
            }
        }
    }
    RegionPtg { source: g.clone(), regions, locations, edges, index, has_move }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn three_regions_for_unit_bound() {
        let g = fixtures::unit_reset();
        let r = regions(&g);
        assert_eq!(r.len(), 3);
        assert!(r[0].is_point() && r[2].is_point());
        assert_eq!(r[1].label(), "(0,1)");
        assert_eq!(region_of(&r, &q("1/2")), Some(1));
        assert_eq!(region_of(&r, &q("1")), Some(2));
    }

    #[test]
    fn unit_reset_region_game() {
        let g = fixtures::unit_reset();
        let rg = region_ptg(&g);
        let has_edge = |s: (usize, usize), d: (usize, usize), wait: bool| {
            rg.edges.iter().any(|e| {
                e.src == rg.node(s.0, s.1) && e.dst == rg.node(d.0, d.1) && matches!(e.kind, RegionEdgeKind::Wait) == wait
            })
        };
        // l0 -> l1 in {0} and (0,1); l1 -> l0 reset lands in {0}
        assert!(has_edge((0, 0), (1, 0), false));
        assert!(has_edge((0, 1), (1, 1), false));
        assert!(has_edge((1, 1), (0, 0), false));
        assert!(has_edge((1, 0), (0, 0), false));
        // l1 -> lf only inside (0,1)
        assert!(has_edge((1, 1), (2, 1), false));
        assert!(!has_edge((1, 0), (2, 0), false));
        // waits from singleton to interval, none into the dead region {1}
        assert!(has_edge((0, 0), (0, 1), true));
        assert!(has_edge((1, 0), (1, 1), true));
        assert!(!has_edge((0, 1), (0, 2), true));
        assert!(rg.edges.iter().filter(|e| matches!(e.kind, RegionEdgeKind::Wait)).all(|e| e.weight == 0));
        assert!(!rg.has_move[rg.node(0, 2)]);
    }

    #[test]
    fn simple_game_keeps_structure() {
        let g = fixtures::simple_seven();
        let rg = region_ptg(&g);
        assert_eq!(rg.regions.len(), 3);
        let inner: Vec<_> = rg.edges.iter().filter(|e| rg.locations[e.src].region == 1 && !matches!(e.kind, RegionEdgeKind::Wait)).collect();
        assert_eq!(inner.len(), g.transitions.len());
    }

    #[test]
    fn collapsed_transitions_use_owner_preference() {
        let g = Ptg::new(
            vec![Location::max("a", 0), Location::target("f", crate::costfn::AffineFn::ints(0, 0))],
            vec![Transition::new(0, 1, 2), Transition::new(0, 1, 5)],
            1,
        );
        let rg = region_ptg(&g);
        let e = rg.edges.iter().find(|e| e.src == rg.node(0, 1) && !matches!(e.kind, RegionEdgeKind::Wait)).unwrap();
        assert_eq!(e.weight, 5);
        assert_eq!(e.weight_range, (2, 5));
    }

    #[test]
    fn as_ptg_is_valid() {
        for g in [fixtures::simple_seven(), fixtures::creeping_reset(), fixtures::unit_reset()] {
            let p = region_ptg(&g).as_ptg();
            let errs: Vec<_> = p.validate().into_iter().filter(|d| d.severity == crate::model::Severity::Error).collect();
            assert!(errs.is_empty(), "{errs:?}");
        }
    }
}
