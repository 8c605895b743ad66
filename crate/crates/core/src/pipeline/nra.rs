//! Games whose cycles through a reset are either non-negative or at most `-κ`:
//! a best-effort membership check on the region graph and a solver that
//! unfolds resets into a bounded number of reset-free copies.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::costfn::{CostFunction, ExtValue, Rational};
use crate::error::SolverError;
use crate::model::Ptg;
use crate::sptg::SolveOptions;

use super::region::{region_ptg, regions, RegionEdgeKind, RegionPtg};
use super::solve::{glue, original_part, reset_template, solve_copy, PtgSolution};

/// Finite values of such a game lie in `[v_inf, v_sup]`; `copies` reset-free
/// copies suffice to reach them.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct NraBudget {
    pub kappa: Rational,
    pub v_inf: Rational,
    pub v_sup: Rational,
    pub copies: u64,
}

/// `(V_inf, V_sup)` from the number of locations `n`, the clock bound `M`,
/// the region count `k` and the weight maxima.
pub fn value_bounds(g: &Ptg) -> (Rational, Rational) {
    let c = g.constants();
    let n = c.n as i64;
    let k = regions(g).len() as i64;
    let m = g.clock_bound;
    let v_sup = Rational::from_int(n * m * c.w_l + n * k * c.w_t) + &c.w_fin;
    let v_inf = Rational::from_int(-n * m * c.w_l - n * n * (n * k + k + 1) * c.w_t) - &c.w_fin;
    (v_inf, v_sup)
}

pub fn nra_budget(g: &Ptg, kappa: &Rational) -> Result<NraBudget, SolverError> {
    if !kappa.is_positive() {
        return Err(SolverError::InvalidArgument(format!("kappa must be positive, got {kappa}")));
    }
    let (v_inf, v_sup) = value_bounds(g);
    let n = Rational::from_int(g.locations.len() as i64);
    let raw = Rational::from_int(2) * &n * (&v_sup - &v_inf) / kappa;
    let copies = raw.ceil_i64().unwrap_or(i64::MAX).max(1) as u64;
    Ok(NraBudget { kappa: kappa.clone(), v_inf, v_sup, copies })
}

/// A simple cycle of the region graph with the range of prices its plays can take.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CycleSummary {
    #[serde(skip)]
    pub start: usize,
    /// Region-location names along the cycle, first repeated at the end.
    pub path: Vec<String>,
    pub has_reset: bool,
    /// Price range when the cycle may be entered and left anywhere in its regions.
    pub relaxed: (Rational, Rational),
    /// Price range of the plays starting and ending at clock 0, when such plays exist.
    pub anchored: Option<(Rational, Rational)>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum NraVerdict {
    Holds,
    /// A cycle from clock 0 back to clock 0 can take a price in `(-κ, 0)`.
    Violated { cycle: Box<CycleSummary> },
    /// The checker could not decide; the property may still hold.
    Inconclusive { reason: String },
}

/// Largest `κ` the anchored cycles allow.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum KappaBound {
    /// No anchored cycle has negative price.
    Any,
    AtMost(Rational),
    /// Some anchored cycle has prices arbitrarily close to 0 from below.
    None,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct NraReport {
    pub kappa: Option<Rational>,
    pub verdict: NraVerdict,
    pub kappa_bound: KappaBound,
    pub cycles_examined: usize,
    pub truncated: bool,
}

/// Cycle enumeration stops after this many cycles.
pub const DEFAULT_CYCLE_CAP: usize = 20_000;

/// Simple cycles as edge-index lists, each listed once starting from its
/// smallest node. Returns `true` as second component when the cap was hit.
fn simple_cycles(rg: &RegionPtg, cap: usize) -> (Vec<Vec<usize>>, bool) {
    let nv = rg.locations.len();
    let mut adj: Vec<Vec<usize>> = vec![vec![]; nv];
    for (k, e) in rg.edges.iter().enumerate() {
        adj[e.src].push(k);
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; nv];
    let mut stack: Vec<usize> = Vec::new();
    for s in 0..nv {
        // iterative DFS over (node, next adjacency slot)
        let mut frames: Vec<(usize, usize)> = vec![(s, 0)];
        on_path[s] = true;
        while let Some(&mut (v, ref mut slot)) = frames.last_mut() {
            if *slot == adj[v].len() {
                on_path[v] = false;
                frames.pop();
                stack.pop();
                continue;
            }
            let k = adj[v][*slot];
            *slot += 1;
            let w = rg.edges[k].dst;
            if w == s {
                let mut c = stack.clone();
                c.push(k);
                out.push(c);
                if out.len() >= cap {
                    return (out, true);
                }
            } else if w > s && !on_path[w] {
                on_path[w] = true;
                stack.push(k);
                frames.push((w, 0));
            }
        }
        debug_assert!(stack.is_empty());
    }
    (out, false)
}

/// Min and max price over clock assignments along `cycle` (edge indices),
/// starting at a clock in `starts`. The clock at each location stays in the
/// closure of its region; with `anchored`, the play must start at 0 right
/// after the cycle's last edge, which is a reset or stays in region `{0}`.
fn price_range(rg: &RegionPtg, cycle: &[usize], starts: &[Rational], anchored: bool) -> Option<(Rational, Rational)> {
    let g = &rg.source;
    let pts: Vec<Rational> = {
        let mut s: BTreeSet<Rational> = BTreeSet::new();
        for r in &rg.regions {
            s.insert(r.lo.clone());
            s.insert(r.hi.clone());
        }
        s.into_iter().collect()
    };
    let has_reset = cycle.iter().any(|&k| rg.edges[k].is_reset());
    let mut best: Option<(Rational, Rational)> = None;
    for start in starts {
        // range[i] = (min, max) over plays reaching the current location with clock pts[i]
        let mut range: Vec<Option<(Rational, Rational)>> =
            pts.iter().map(|p| (p == start).then(|| (Rational::zero(), Rational::zero()))).collect();
        for &k in cycle {
            let e = &rg.edges[k];
            let rl = &rg.locations[e.src];
            let reg = &rg.regions[rl.region];
            let loc = &g.locations[rl.location];
            let rate = Rational::from_int(loc.rate);
            let frozen = reg.is_point() || loc.urgent;
            let mut next: Vec<Option<(Rational, Rational)>> = vec![None; pts.len()];
            for (i, cur) in range.iter().enumerate() {
                let Some((lo, hi)) = cur else { continue };
                let c_in = &pts[i];
                if c_in < &reg.lo || c_in > &reg.hi {
                    continue;
                }
                for (j, c_out) in pts.iter().enumerate() {
                    if c_out < c_in || c_out > &reg.hi || (frozen && c_out != c_in) {
                        continue;
                    }
                    if matches!(e.kind, RegionEdgeKind::Wait) && !reg.is_point() && c_out != &reg.hi {
                        continue;
                    }
                    let delay_cost = &rate * &(c_out - c_in);
                    let (wmin, wmax) = (Rational::from_int(e.weight_range.0), Rational::from_int(e.weight_range.1));
                    let target = if e.is_reset() { 0 } else { j };
                    let cand = (lo + &delay_cost + &wmin, hi + &delay_cost + &wmax);
                    next[target] = Some(match next[target].take() {
                        None => cand,
                        Some((a, b)) => (a.min(cand.0), b.max(cand.1)),
                    });
                }
            }
            range = next;
        }
        for (i, r) in range.into_iter().enumerate() {
            let Some((lo, hi)) = r else { continue };
            let ok = if anchored { pts[i].is_zero() } else { has_reset || &pts[i] >= start };
            if ok {
                best = Some(match best {
                    None => (lo, hi),
                    Some((a, b)) => (a.min(lo), b.max(hi)),
                });
            }
        }
    }
    best
}

fn summarize(rg: &RegionPtg, cycle: &[usize]) -> Option<CycleSummary> {
    let first = rg.edges[cycle[0]].src;
    let reg0 = &rg.regions[rg.locations[first].region];
    let pts: BTreeSet<Rational> = rg.regions.iter().flat_map(|r| [r.lo.clone(), r.hi.clone()]).collect();
    let starts: Vec<Rational> = pts.into_iter().filter(|p| p >= &reg0.lo && p <= &reg0.hi).collect();
    let relaxed = price_range(rg, cycle, &starts, false)?;
    let has_reset = cycle.iter().any(|&k| rg.edges[k].is_reset());
    let anchored = if let Some(pos) = cycle.iter().position(|&k| rg.edges[k].is_reset()) {
        let rotated: Vec<usize> = cycle[pos + 1..].iter().chain(&cycle[..=pos]).copied().collect();
        price_range(rg, &rotated, &[Rational::zero()], true)
    } else if cycle.iter().all(|&k| rg.locations[rg.edges[k].src].region == 0) {
        price_range(rg, cycle, &[Rational::zero()], true)
    } else {
        None
    };
    let mut path: Vec<String> = cycle.iter().map(|&k| rg.name(rg.edges[k].src)).collect();
    path.push(path[0].clone());
    Some(CycleSummary { start: first, path, has_reset, relaxed, anchored })
}

fn meets_gap(range: &(Rational, Rational), kappa: &Rational) -> bool {
    let (lo, hi) = range;
    let neg_k = -kappa.clone();
    if lo == hi {
        lo > &neg_k && lo.is_negative()
    } else {
        lo < &Rational::zero() && hi > &neg_k
    }
}

/// Checks the region graph of `g` for cycles whose price lies strictly
/// between `-κ` and 0. Without `kappa` only the bound on `κ` is reported.
pub fn nra_check(g: &Ptg, kappa: Option<&Rational>) -> NraReport {
    nra_check_with(g, kappa, DEFAULT_CYCLE_CAP)
}

pub fn nra_check_with(g: &Ptg, kappa: Option<&Rational>, cap: usize) -> NraReport {
    let rg = region_ptg(g);
    let (cycles, truncated) = simple_cycles(&rg, cap);
    let summaries: Vec<CycleSummary> = cycles.iter().filter_map(|c| summarize(&rg, c)).collect();

    let mut bound = KappaBound::Any;
    for s in &summaries {
        let Some((lo, hi)) = &s.anchored else { continue };
        if !lo.is_negative() {
            continue;
        }
        if lo < hi && !hi.is_negative() {
            bound = KappaBound::None;
            break;
        }
        let cap_k = -hi.clone();
        bound = match bound {
            KappaBound::Any => KappaBound::AtMost(cap_k),
            KappaBound::AtMost(b) => KappaBound::AtMost(b.min(cap_k)),
            KappaBound::None => KappaBound::None,
        };
    }

    let verdict = match kappa {
        None => match &bound {
            KappaBound::None => NraVerdict::Violated {
                cycle: summaries
                    .iter()
                    .find(|s| s.anchored.as_ref().is_some_and(|(lo, hi)| lo.is_negative() && lo < hi && !hi.is_negative()))
                    .cloned()
                    .map(Box::new)
                    .expect("bound comes from a cycle"),
            },
            _ => NraVerdict::Inconclusive { reason: "no kappa given".into() },
        },
        Some(k) => verdict_for(&rg, &summaries, k, truncated),
    };
    NraReport { kappa: kappa.cloned(), verdict, kappa_bound: bound, cycles_examined: summaries.len(), truncated }
}

fn verdict_for(rg: &RegionPtg, summaries: &[CycleSummary], kappa: &Rational, truncated: bool) -> NraVerdict {
    if let Some(s) = summaries.iter().find(|s| s.anchored.as_ref().is_some_and(|r| meets_gap(r, kappa))) {
        return NraVerdict::Violated { cycle: Box::new(s.clone()) };
    }
    if truncated {
        return NraVerdict::Inconclusive { reason: "cycle enumeration cap reached".into() };
    }
    // A play from (l, 0) back to (l, 0) stays in the component of (l, {0}) and
    // splits into simple cycles of it, so a component is safe when all its
    // cycles agree in sign. Without a reset inside, such plays take no time
    // and have integer prices, which cannot fall in (-κ, 0) when κ ≤ 1.
    let scc = strongly_connected(rg);
    let nc = scc.iter().max().map_or(0, |m| m + 1);
    let mut relevant = vec![false; nc];
    for (v, rl) in rg.locations.iter().enumerate() {
        relevant[scc[v]] |= rl.region == 0;
    }
    let mut inner_reset = vec![false; nc];
    for e in &rg.edges {
        if e.is_reset() && scc[e.src] == scc[e.dst] {
            inner_reset[scc[e.src]] = true;
        }
    }
    let neg_k = -kappa.clone();
    let mut signs: Vec<(bool, bool)> = vec![(true, true); nc];
    for s in summaries {
        let c = scc[s.start];
        signs[c].0 &= !s.relaxed.0.is_negative();
        signs[c].1 &= s.relaxed.1 <= neg_k;
    }
    let unsafe_part = (0..nc).find(|&c| {
        relevant[c] && !signs[c].0 && !signs[c].1 && (inner_reset[c] || kappa > &Rational::one())
    });
    match unsafe_part {
        None => NraVerdict::Holds,
        Some(c) => {
            let v = scc.iter().position(|&x| x == c).expect("component has a node");
            NraVerdict::Inconclusive { reason: format!("cycles of mixed sign around {}", rg.name(v)) }
        }
    }
}

fn strongly_connected(rg: &RegionPtg) -> Vec<usize> {
    let mut graph = petgraph::graph::DiGraph::<(), ()>::new();
    for _ in 0..rg.locations.len() {
        graph.add_node(());
    }
    for e in &rg.edges {
        graph.add_edge(petgraph::graph::NodeIndex::new(e.src), petgraph::graph::NodeIndex::new(e.dst), ());
    }
    let mut out = vec![0; rg.locations.len()];
    for (c, comp) in petgraph::algo::tarjan_scc(&graph).into_iter().enumerate() {
        for v in comp {
            out[v.index()] = c;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct NraOptions {
    pub solve: SolveOptions,
    /// Skip the membership check and trust the caller.
    pub assert_nra: bool,
    /// Stop as soon as two consecutive copies give the same values at clock 0.
    pub early_stop: bool,
    /// Overrides the number of copies from the budget.
    pub copies: Option<u64>,
}

impl Default for NraOptions {
    fn default() -> Self {
        NraOptions { solve: SolveOptions::default(), assert_nra: false, early_stop: true, copies: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NraSolution {
    pub solution: PtgSolution,
    pub budget: NraBudget,
    pub report: Option<NraReport>,
    /// Copy after which values at clock 0 stopped changing, if they did.
    pub stable_after: Option<u64>,
}

fn clamp(v: ExtValue, v_inf: &Rational) -> ExtValue {
    match v {
        ExtValue::Finite(x) if &x < v_inf => ExtValue::NegInf,
        other => other,
    }
}

/// Solves `g` by unfolding resets into reset-free copies, the first of which
/// forbids resets. Values below the lower bound are `-∞`.
pub fn solve_nra(g: &Ptg, kappa: &Rational, opts: &NraOptions) -> Result<NraSolution, SolverError> {
    let budget = nra_budget(g, kappa)?;
    let report = if opts.assert_nra {
        None
    } else {
        let r = nra_check(g, Some(kappa));
        match &r.verdict {
            NraVerdict::Holds => {}
            NraVerdict::Violated { cycle } => {
                return Err(SolverError::NotNra(format!("cycle {} has prices in (-{kappa}, 0)", cycle.path.join(" -> "))))
            }
            NraVerdict::Inconclusive { reason } => {
                return Err(SolverError::NotNra(format!("membership undecided ({reason}); assert it to solve anyway")))
            }
        }
        Some(r)
    };
    let n = g.locations.len();
    let copies = opts.copies.unwrap_or(budget.copies).max(1);
    let (template, entries) = reset_template(g);
    let mut prev = vec![ExtValue::PosInf; n];
    let mut last = None;
    let mut stable_after = None;
    let mut used = 0;
    for copy in 1..=copies {
        let s = solve_copy(&template, &entries, &prev, &opts.solve)?;
        let at_zero: Vec<ExtValue> = s.at_zero()[..n].iter().cloned().map(|v| clamp(v, &budget.v_inf)).collect();
        used = copy;
        last = Some(s);
        if at_zero == prev {
            stable_after.get_or_insert(copy - 1);
            if opts.early_stop {
                break;
            }
        }
        prev = at_zero;
    }
    let mut sol = original_part(last.expect("at least one copy"), n);
    sol.copies = used as usize;
    let rgs = regions(g);
    for f in sol.values.iter_mut() {
        let parts: Vec<CostFunction> = rgs
            .iter()
            .map(|r| {
                let part = f.restrict(&r.lo, &r.hi)?;
                let low = |v: ExtValue| v.finite().is_some_and(|x| x < &budget.v_inf);
                let sink = if r.is_point() {
                    low(part.point_values()[0].clone())
                } else {
                    // interval parts: interior cutpoints and the limits at both ends
                    let k = part.cutpoints().len();
                    part.point_values()[1..k - 1].iter().cloned().any(low)
                        || low(part.pieces()[0].eval(&r.lo))
                        || low(part.pieces()[part.pieces().len() - 1].eval(&r.hi))
                };
                Ok(if sink { CostFunction::constant(r.lo.clone(), r.hi.clone(), ExtValue::NegInf) } else { part })
            })
            .collect::<Result<_, SolverError>>()?;
        *f = glue(&parts)?;
    }
    Ok(NraSolution { solution: sol, budget, report, stable_after })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costfn::AffineFn;
    use crate::fixtures;
    use crate::model::{Location, Transition};

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn bounds_example() {
        // n = 2, M = 1, three regions, unit weights
        let g = Ptg::new(
            vec![Location::min("a", 1), Location::target("f", AffineFn::ints(0, 0))],
            vec![Transition::new(0, 1, 1)],
            1,
        );
        let (v_inf, v_sup) = value_bounds(&g);
        assert_eq!(v_sup, Rational::from_int(8));
        assert_eq!(v_inf, Rational::from_int(-2 - 4 * (6 + 3 + 1)));
        let zero = Ptg::new(
            vec![Location::min("a", 0), Location::target("f", AffineFn::ints(0, 0))],
            vec![Transition::new(0, 1, 0)],
            1,
        );
        assert_eq!(value_bounds(&zero), (Rational::zero(), Rational::zero()));
    }

    #[test]
    fn unit_reset_cycles_and_verdict() {
        let r = nra_check(&fixtures::unit_reset(), Some(&Rational::one()));
        assert_eq!(r.verdict, NraVerdict::Holds, "{r:?}");
        assert_eq!(r.kappa_bound, KappaBound::AtMost(Rational::one()));
        assert!(matches!(nra_check(&fixtures::unit_reset(), Some(&q("3/2"))).verdict, NraVerdict::Violated { .. }));
    }

    #[test]
    fn creeping_reset_rejected_for_every_kappa() {
        for k in ["1/100", "1/2", "1", "5"] {
            let r = nra_check(&fixtures::creeping_reset(), Some(&q(k)));
            assert!(matches!(r.verdict, NraVerdict::Violated { .. }), "{k}: {r:?}");
        }
        assert_eq!(nra_check(&fixtures::creeping_reset(), None).kappa_bound, KappaBound::None);
    }

    #[test]
    fn unit_reset_value_is_zero() {
        let s = solve_nra(&fixtures::unit_reset(), &Rational::one(), &NraOptions::default()).unwrap();
        let l0 = s.solution.value("l0").unwrap();
        assert_eq!(l0.evaluate(&Rational::zero()).unwrap(), ExtValue::int(0));
        let (v_inf, v_sup) = value_bounds(&fixtures::unit_reset());
        assert!(v_inf <= Rational::zero() && Rational::zero() <= v_sup);
        assert!(s.stable_after.is_some());
    }

    #[test]
    fn reset_free_game_single_copy_needed() {
        let g = fixtures::simple_seven();
        let s = solve_nra(&g, &Rational::one(), &NraOptions::default()).unwrap();
        assert_eq!(s.stable_after, Some(1));
        let direct = super::super::reset_acyclic_solve(&g, &SolveOptions::default()).unwrap();
        assert_eq!(s.solution.values, direct.values);
    }

    #[test]
    fn nonpositive_kappa_rejected() {
        assert!(matches!(
            solve_nra(&fixtures::unit_reset(), &Rational::zero(), &NraOptions::default()),
            Err(SolverError::InvalidArgument(_))
        ));
    }

    #[test]
    fn negative_reset_loop_is_minus_infinity() {
        // Min may loop a -2 reset cycle forever before leaving
        let g = Ptg::new(
            vec![Location::min("a", 0), Location::target("f", AffineFn::ints(0, 0))],
            vec![Transition::new(0, 0, -2).with_reset(), Transition::new(0, 1, 0)],
            1,
        );
        let s = solve_nra(&g, &Rational::one(), &NraOptions::default()).unwrap();
        assert_eq!(s.solution.values[0].evaluate(&Rational::zero()).unwrap(), ExtValue::NegInf);
    }

    #[test]
    fn stabilises_with_extra_copies() {
        let g = fixtures::unit_reset();
        let opts = |c| NraOptions { copies: Some(c), early_stop: false, ..NraOptions::default() };
        let a = solve_nra(&g, &Rational::one(), &opts(12)).unwrap();
        let b = solve_nra(&g, &Rational::one(), &opts(15)).unwrap();
        assert_eq!(a.solution.values, b.solution.values);
    }
}
