//! Solving games with guards region by region, and games whose resets never
//! lie on a cycle by stacking reset-free copies.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::costfn::{AffineFn, CostFunction, ExtValue, Piece, Rational};
use crate::error::SolverError;
use crate::model::{Arena, Node, Owner, Player, Ptg};
use crate::sptg::{solve_game, SolveOptions, ValueResult};
use crate::urgent::solve_instant;

use super::region::{region_ptg, Region, RegionEdgeKind, RegionPtg};

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerResult {
    /// Values at the single clock value of a point region, per location.
    Point { values: Vec<ExtValue> },
    /// The rescaled simple game solved on an open region; its locations come
    /// first, followed by one waiting target per location that may wait.
    Interval { result: Box<ValueResult> },
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionLayer {
    pub region: Region,
    pub result: LayerResult,
}

#[derive(Clone, Debug, Serialize)]
pub struct PtgSolution {
    pub names: Vec<String>,
    pub clock_bound: Rational,
    /// Value function per location on `[0, M]`; jumps at region borders are
    /// stored as explicit point values.
    pub values: Vec<CostFunction>,
    /// Region solutions of the last copy, ascending.
    pub layers: Vec<RegionLayer>,
    /// Reset-free copies solved.
    pub copies: usize,
}

impl PtgSolution {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn value(&self, name: &str) -> Option<&CostFunction> {
        self.index_of(name).map(|i| &self.values[i])
    }

    /// Values at clock 0, per location.
    pub fn at_zero(&self) -> Vec<ExtValue> {
        self.values.iter().map(|f| f.evaluate(&Rational::zero()).expect("domain starts at 0")).collect()
    }
}

fn player_node(owner: Owner, rate: Rational, urgent: bool) -> Node {
    let player = if owner == Owner::Max { Player::Max } else { Player::Min };
    Node::Player { player, rate, urgent }
}

/// Solves a game without resets. `overrides[l]`, when set for a final
/// location, replaces its final cost by that constant (possibly infinite).
pub fn solve_reset_free(g: &Ptg, overrides: &[Option<ExtValue>], opts: &SolveOptions) -> Result<PtgSolution, SolverError> {
    if g.has_resets() {
        return Err(SolverError::InvalidArgument("game has reset transitions".into()));
    }
    let rg = region_ptg(g);
    solve_regions(&rg, overrides, opts)
}

fn solve_regions(rg: &RegionPtg, overrides: &[Option<ExtValue>], opts: &SolveOptions) -> Result<PtgSolution, SolverError> {
    let g = &rg.source;
    let n = g.locations.len();
    let nr = rg.regions.len();
    let zero = Rational::zero();
    let mut point_vals: Vec<Vec<ExtValue>> = vec![vec![]; nr];
    let mut interval_fns: Vec<Vec<CostFunction>> = vec![vec![]; nr];
    let mut layers: Vec<RegionLayer> = Vec::with_capacity(nr);

    for i in (0..nr).rev() {
        let reg = &rg.regions[i];
        let point = reg.is_point();
        let len = &reg.hi - &reg.lo;
        let mut a = Arena::new(if point { zero.clone() } else { Rational::one() });
        for (l, loc) in g.locations.iter().enumerate() {
            let node = match (loc.owner, &overrides.get(l).cloned().flatten()) {
                (Owner::Final, Some(v)) => Node::Target(Piece::from_ext(v)),
                (Owner::Final, None) => {
                    let phi = loc.final_cost.clone().unwrap_or_else(|| AffineFn::ints(0, 0));
                    if point {
                        Node::Target(Piece::Affine(AffineFn::constant(phi.eval(&reg.lo))))
                    } else {
                        Node::Target(Piece::Affine(phi.compose_affine(&reg.lo, &len)))
                    }
                }
                (owner, _) if point => player_node(owner, Rational::from_int(loc.rate), true),
                (owner, _) => player_node(owner, Rational::from_int(loc.rate) * &len, loc.urgent),
            };
            a.add_node(&loc.id, node);
        }
        for (k, e) in rg.edges.iter().enumerate() {
            if rg.locations[e.src].region != i {
                continue;
            }
            let (src, dst) = (rg.locations[e.src].location, rg.locations[e.dst].location);
            match e.kind {
                RegionEdgeKind::Action { reset: true, .. } => {
                    return Err(SolverError::InvalidArgument("reset edge in a reset-free layer".into()));
                }
                RegionEdgeKind::Action { .. } => {
                    a.add_edge(src, dst, e.weight, Some(k));
                }
                RegionEdgeKind::Wait => {
                    let target = if point {
                        // waiting into the open region: its value just after the left end
                        Piece::from_ext(&interval_fns[i + 1][src].evaluate(&reg.lo)?)
                    } else {
                        // wait until the right end, then continue from the point region
                        let rate = Rational::from_int(g.locations[src].rate) * &len;
                        match &point_vals[i + 1][src] {
                            ExtValue::Finite(v) => Piece::Affine(AffineFn::new(-&rate, &rate + v)),
                            inf => Piece::from_ext(inf),
                        }
                    };
                    let t = a.add_node(&format!("{}^wait", g.locations[src].id), Node::Target(target));
                    a.add_edge(src, t, 0, Some(k));
                }
            }
        }
        if point {
            let x = solve_instant(&a, &zero)?;
            point_vals[i] = x.values[..n].to_vec();
            layers.push(RegionLayer { region: reg.clone(), result: LayerResult::Point { values: point_vals[i].clone() } });
        } else {
            let res = solve_game(&a, opts)?;
            interval_fns[i] = res.values[..n].iter().map(|f| f.map_domain(&reg.lo, &len)).collect();
            layers.push(RegionLayer { region: reg.clone(), result: LayerResult::Interval { result: Box::new(res) } });
        }
    }
    layers.reverse();

    let mut values = Vec::with_capacity(n);
    for l in 0..n {
        let parts: Vec<CostFunction> = rg
            .regions
            .iter()
            .enumerate()
            .map(|(i, reg)| {
                if reg.is_point() {
                    CostFunction::point(reg.lo.clone(), point_vals[i][l].clone())
                } else {
                    interval_fns[i][l].clone()
                }
            })
            .collect();
        values.push(glue(&parts)?);
    }
    Ok(PtgSolution {
        names: g.locations.iter().map(|l| l.id.clone()).collect(),
        clock_bound: Rational::from_int(g.clock_bound),
        values,
        layers,
        copies: 1,
    })
}

/// Joins per-region functions (points and open intervals, ascending and
/// adjacent) into one function; interval parts contribute only their interior.
pub(crate) fn glue(parts: &[CostFunction]) -> Result<CostFunction, SolverError> {
    let (mut cuts, mut vals, mut pieces) = (Vec::new(), Vec::new(), Vec::new());
    for f in parts {
        if f.lo() == f.hi() {
            cuts.push(f.lo().clone());
            vals.push(f.point_values()[0].clone());
        } else {
            let k = f.cutpoints().len();
            cuts.extend(f.cutpoints()[1..k - 1].iter().cloned());
            vals.extend(f.point_values()[1..k - 1].iter().cloned());
            pieces.extend(f.pieces().iter().cloned());
        }
    }
    Ok(CostFunction::from_parts(cuts, vals, pieces)?.canonicalize())
}

/// A cycle of the region graph through a reset, as region-location names.
pub fn find_reset_cycle(rg: &RegionPtg) -> Option<Vec<String>> {
    let (graph, scc_of, _) = condensation(rg);
    for e in &rg.edges {
        if e.is_reset() && scc_of[e.src] == scc_of[e.dst] {
            // close the cycle with a shortest path back from dst to src inside the component
            let mut prev = vec![usize::MAX; rg.locations.len()];
            let mut queue = std::collections::VecDeque::from([e.dst]);
            prev[e.dst] = e.dst;
            while let Some(v) = queue.pop_front() {
                if v == e.src {
                    break;
                }
                for w in graph.neighbors(petgraph::graph::NodeIndex::new(v)) {
                    let w = w.index();
                    if prev[w] == usize::MAX && scc_of[w] == scc_of[e.src] {
                        prev[w] = v;
                        queue.push_back(w);
                    }
                }
            }
            let mut path = vec![e.src];
            let mut v = e.src;
            while v != e.dst {
                v = prev[v];
                path.push(v);
            }
            path.reverse();
            path.push(e.dst);
            return Some(path.into_iter().map(|v| rg.name(v)).collect());
        }
    }
    None
}

/// Region graph, SCC id per node, SCC count.
fn condensation(rg: &RegionPtg) -> (DiGraph<(), ()>, Vec<usize>, usize) {
    let mut graph = DiGraph::<(), ()>::with_capacity(rg.locations.len(), rg.edges.len());
    for _ in 0..rg.locations.len() {
        graph.add_node(());
    }
    for e in &rg.edges {
        graph.add_edge(petgraph::graph::NodeIndex::new(e.src), petgraph::graph::NodeIndex::new(e.dst), ());
    }
    let sccs = tarjan_scc(&graph);
    let mut scc_of = vec![0; rg.locations.len()];
    for (c, comp) in sccs.iter().enumerate() {
        for v in comp {
            scc_of[v.index()] = c;
        }
    }
    (graph, scc_of, sccs.len())
}

/// Largest number of resets along a path of the region graph.
pub fn reset_depth(rg: &RegionPtg) -> Result<usize, SolverError> {
    if let Some(c) = find_reset_cycle(rg) {
        return Err(SolverError::ResetCycle(c));
    }
    let (_, scc_of, count) = condensation(rg);
    // tarjan_scc yields components in reverse topological order: successors first
    let mut depth = vec![0usize; count];
    let mut by_comp: Vec<Vec<usize>> = vec![vec![]; count];
    for (k, e) in rg.edges.iter().enumerate() {
        by_comp[scc_of[e.src]].push(k);
    }
    for c in 0..count {
        for &k in &by_comp[c] {
            let e = &rg.edges[k];
            let (cs, cd) = (scc_of[e.src], scc_of[e.dst]);
            if cs != cd {
                depth[c] = depth[c].max(depth[cd] + usize::from(e.is_reset()));
            }
        }
    }
    Ok(depth.into_iter().max().unwrap_or(0))
}

/// The reset-free template: every reset transition `l -(g, reset)-> l'` becomes
/// a transition `l -(g)-> l'@reset` into a fresh final location. Returns the
/// template and, per fresh final, the location whose clock-0 value it stands for.
pub fn reset_template(g: &Ptg) -> (Ptg, Vec<(usize, usize)>) {
    let mut t = g.clone();
    let mut entries: Vec<(usize, usize)> = Vec::new();
    for k in 0..g.transitions.len() {
        if !g.transitions[k].reset {
            continue;
        }
        let target = g.transitions[k].target;
        let fresh = match entries.iter().find(|(_, tgt)| *tgt == target) {
            Some((f, _)) => *f,
            None => {
                let id = format!("{}@reset", g.locations[target].id);
                t.locations.push(crate::model::Location::target(&id, AffineFn::ints(0, 0)));
                entries.push((t.locations.len() - 1, target));
                t.locations.len() - 1
            }
        };
        t.transitions[k].reset = false;
        t.transitions[k].target = fresh;
    }
    (t, entries)
}

/// Solves the template once with reset entries priced by `prev_at_zero`.
pub(crate) fn solve_copy(
    template: &Ptg,
    entries: &[(usize, usize)],
    prev_at_zero: &[ExtValue],
    opts: &SolveOptions,
) -> Result<PtgSolution, SolverError> {
    let mut overrides = vec![None; template.locations.len()];
    for &(fresh, target) in entries {
        overrides[fresh] = Some(prev_at_zero[target].clone());
    }
    solve_reset_free(template, &overrides, opts)
}

/// Restricts a template solution to the original locations.
pub(crate) fn original_part(mut sol: PtgSolution, n: usize) -> PtgSolution {
    sol.names.truncate(n);
    sol.values.truncate(n);
    sol
}

/// Solves a game whose resets lie on no cycle, one reset-free copy per reset level.
pub fn reset_acyclic_solve(g: &Ptg, opts: &SolveOptions) -> Result<PtgSolution, SolverError> {
    let rg = region_ptg(g);
    let depth = reset_depth(&rg)?;
    if !g.has_resets() {
        return solve_regions(&rg, &[], opts);
    }
    let (template, entries) = reset_template(g);
    let n = g.locations.len();
    let mut prev = vec![ExtValue::PosInf; n];
    let mut sol = None;
    for copy in 0..=depth {
        let s = solve_copy(&template, &entries, &prev, opts)?;
        prev = s.at_zero()[..n].to_vec();
        log::debug!("reset level {copy} solved");
        sol = Some(s);
    }
    let mut sol = original_part(sol.expect("at least one copy"), n);
    sol.copies = depth + 1;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{Guard, Location, Sptg, Transition};
    use crate::sptg::solve_sptg;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn simple_game_matches_direct_solver() {
        let g = fixtures::simple_seven();
        let direct = solve_sptg(&Sptg::new(g.clone()).unwrap()).unwrap();
        let piped = reset_acyclic_solve(&g, &SolveOptions::default()).unwrap();
        for l in 0..g.locations.len() {
            assert_eq!(piped.values[l], direct.values[l], "{}", g.locations[l].id);
        }
    }

    #[test]
    fn rescaled_window_of_length_two() {
        // Min waits in a rate-1 location; leaving costs the final 0 only at x in [0,2]
        let g = Ptg::new(
            vec![Location::max("a", -1), Location::target("f", AffineFn::ints(0, 0))],
            vec![Transition::new(0, 1, 0).guarded(Guard::closed(q("0"), q("2")))],
            2,
        );
        let sol = reset_acyclic_solve(&g, &SolveOptions::default()).unwrap();
        let a = sol.value("a").unwrap();
        // Max leaves immediately: waiting only lowers the price
        assert_eq!(a.evaluate(&q("1/2")).unwrap(), ExtValue::int(0));
        let g2 = Ptg::new(
            vec![Location::max("a", 1), Location::target("f", AffineFn::ints(0, 0))],
            vec![Transition::new(0, 1, 0).guarded(Guard::closed(q("0"), q("2")))],
            2,
        );
        let sol = reset_acyclic_solve(&g2, &SolveOptions::default()).unwrap();
        // Max waits until 2: price 2 - ν
        assert_eq!(sol.value("a").unwrap().evaluate(&q("1/2")).unwrap(), ExtValue::Finite(q("3/2")));
        assert_eq!(sol.value("a").unwrap().evaluate(&q("2")).unwrap(), ExtValue::int(0));
    }

    #[test]
    fn strict_guard_jump() {
        // leaving only possible for x > 1/2 with weight 0, or at any time with weight 3
        let open = Guard { lo: q("1/2"), lo_closed: false, hi: q("1"), hi_closed: true };
        let g = Ptg::new(
            vec![Location::min("a", 2).urgent(), Location::target("f", AffineFn::ints(0, 0))],
            vec![Transition::new(0, 1, 0).guarded(open), Transition::new(0, 1, 3)],
            1,
        );
        let sol = reset_acyclic_solve(&g, &SolveOptions::default()).unwrap();
        let a = sol.value("a").unwrap();
        assert_eq!(a.evaluate(&q("1/4")).unwrap(), ExtValue::int(3));
        assert_eq!(a.evaluate(&q("1/2")).unwrap(), ExtValue::int(3));
        assert_eq!(a.evaluate(&q("3/4")).unwrap(), ExtValue::int(0));
    }

    #[test]
    fn manual_unrolling_agrees() {
        // A: Min a -(reset, w=2)-> b ; a -> f weight 5. B: Max b waits (rate 1) then exits at x in [0,1].
        let g = Ptg::new(
            vec![Location::min("a", 0), Location::max("b", 1), Location::target("f", AffineFn::ints(0, 0))],
            vec![
                Transition::new(0, 1, 2).with_reset(),
                Transition::new(0, 2, 5),
                Transition::new(1, 2, 0),
            ],
            1,
        );
        let sol = reset_acyclic_solve(&g, &SolveOptions::default()).unwrap();
        assert_eq!(sol.copies, 2);
        // b from 0 is worth 1 (wait to 1); a pays 2 + 1 = 3 < 5
        let b = solve_sptg(&Sptg::new(Ptg::new(
            vec![Location::max("b", 1), Location::target("f", AffineFn::ints(0, 0))],
            vec![Transition::new(0, 1, 0)],
            1,
        ))
        .unwrap())
        .unwrap();
        let b0 = b.values[0].evaluate(&q("0")).unwrap();
        let unrolled = Ptg::new(
            vec![
                Location::min("a", 0),
                Location::target("b0", AffineFn::constant(b0.finite().unwrap() + &q("0"))),
                Location::target("f", AffineFn::ints(0, 0)),
            ],
            vec![Transition::new(0, 1, 2), Transition::new(0, 2, 5)],
            1,
        );
        let direct = solve_sptg(&Sptg::new(unrolled).unwrap()).unwrap();
        assert_eq!(sol.values[0], direct.values[0]);
        assert_eq!(sol.values[0].evaluate(&q("1/3")).unwrap(), ExtValue::int(3));
    }

    #[test]
    fn reset_cycle_is_reported() {
        let err = reset_acyclic_solve(&fixtures::unit_reset(), &SolveOptions::default()).unwrap_err();
        match err {
            SolverError::ResetCycle(c) => {
                assert!(c.len() >= 3);
                assert_eq!(c.first(), c.last());
            }
            other => panic!("{other:?}"),
        }
    }
}
