//! Value functions and optimal strategies of simple priced timed games.
//!
//! The solver sweeps the clock interval from right to left. At the current
//! right end `r` it builds the waiting game (every waiting location may cash
//! out "wait until `r`"), makes everything urgent, and walks down the candidate
//! cutpoints of that urgent game as long as the slope test accepts the affine
//! join. When the test fails the window closes and a new one starts there.

mod strategy;
mod window;

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::costfn::{CostFunction, ExtValue, Rational};
use crate::error::SolverError;
use crate::model::{attractor_ranks, Arena, Node, Player, Sptg};
use crate::urgent::{
    cutoff_threshold, extract_instant_strategies, iteration_bound, minus_infinity_family, solve_instant_with,
    CountdownStrategy, InstantOptions, InstantStrategies, InstantValues,
};

pub use strategy::{FpStrategy, LocationStrategy, Move, SwitchingStrategy};
pub use window::{fg_set, fg_size, poss_cp, slope_test, waiting};

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Per-call override of the value-iteration bound.
    pub max_iterations: Option<u64>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SolveStats {
    pub windows: usize,
    pub instant_calls: u64,
    pub total_iterations: u64,
    /// Largest iteration count of a single instant solve.
    pub max_iterations: u64,
    /// Largest theoretical iteration bound among the instant solves.
    pub iteration_bound: u64,
    /// Candidate cutpoints examined over the whole sweep.
    pub candidates: u64,
    pub sweep_bound: u128,
    /// Cutpoint count per location after canonicalisation.
    pub cutpoints: Vec<usize>,
    pub cutpoint_bound: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValueResult {
    pub names: Vec<String>,
    /// Value function per location on `[0, r]`.
    pub values: Vec<CostFunction>,
    pub max_strategy: FpStrategy,
    pub min_strategy: SwitchingStrategy,
    /// Right ends of the sweep windows, descending, ending at 0.
    pub sweep_endpoints: Vec<Rational>,
    pub stats: SolveStats,
    /// Step-counting Min strategies for locations of value `-inf`, when there are any.
    pub minus_infinity: Option<CountdownStrategy>,
}

impl ValueResult {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn value(&self, name: &str) -> Option<&CostFunction> {
        self.index_of(name).map(|i| &self.values[i])
    }
}

/// Result of removing infinite-value nodes.
pub struct Pruned {
    pub arena: Arena,
    /// Original node index to pruned index.
    pub node_map: Vec<Option<usize>>,
    /// Pruned edge index to original.
    pub edge_back: Vec<usize>,
    /// `Some(±inf)` for removed nodes.
    pub verdicts: Vec<Option<ExtValue>>,
}

/// Removes nodes whose value is infinite. The classification at `r` holds on
/// all of `[0, r]`, and removing those nodes leaves the other values unchanged.
pub fn prune_infinite(a: &Arena) -> Result<Pruned, SolverError> {
    let x = solve_instant_with(&a.all_urgent(), &a.r, &InstantOptions::default())?;
    let keep: Vec<bool> = x.values.iter().map(ExtValue::is_finite).collect();
    let verdicts = x.values.iter().map(|v| (!v.is_finite()).then(|| v.clone())).collect();
    let res = a.restrict_to(&keep);
    Ok(Pruned { arena: res.arena, node_map: res.node_map, edge_back: res.edge_back, verdicts })
}

/// Number of sweep windows the solver may open on `a`.
pub fn sweep_bound(a: &Arena) -> u128 {
    let f = fg_size(a);
    a.len() as u128 * (f.saturating_mul(f).saturating_add(2))
}

/// Instance-level cutpoint budget per location: each window contributes at
/// most the candidate cutpoints of its waiting game.
pub fn cutpoint_bound(a: &Arena) -> u128 {
    let waiting = a.nodes.iter().filter(|n| n.is_waiting()).count() as u128;
    let n2 = a.len() as u128 + waiting;
    let finals = a.final_fns().count() as u128 + waiting;
    let f2 = finals * (2 * (n2.max(1) - 1) * a.w_t() as u128 + 1);
    sweep_bound(a).saturating_mul(f2.saturating_mul(f2).saturating_add(1)).saturating_add(1)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Raw {
    Now(usize),
    /// Go to the clone: wait until the window's right end.
    WaitTo(usize),
}

struct Sample {
    lo: Rational,
    hi: Rational,
    window: Option<usize>,
    strat: InstantStrategies,
}

struct Sweep<'a> {
    a: &'a Arena,
    opts: InstantOptions,
    stats: SolveStats,
}

impl Sweep<'_> {
    fn instant(&mut self, g: &Arena, nu: &Rational) -> Result<InstantValues, SolverError> {
        let x = solve_instant_with(g, nu, &self.opts)?;
        self.stats.instant_calls += 1;
        self.stats.total_iterations += x.iterations;
        self.stats.max_iterations = self.stats.max_iterations.max(x.iterations);
        self.stats.iteration_bound = self.stats.iteration_bound.max(x.iteration_bound);
        Ok(x)
    }

    fn finite_prefix(&self, x: &InstantValues) -> Result<Vec<Rational>, SolverError> {
        (0..self.a.len())
            .map(|v| x.values[v].finite().cloned().ok_or_else(|| SolverError::InfiniteValue(self.a.names[v].clone())))
            .collect()
    }
}

/// Solves an arena in which every node has a finite value.
pub fn solve(a: &Arena) -> Result<ValueResult, SolverError> {
    solve_with(a, &SolveOptions::default())
}

pub fn solve_with(a: &Arena, opts: &SolveOptions) -> Result<ValueResult, SolverError> {
    let n = a.len();
    let zero = Rational::zero();
    let mut sw = Sweep { a, opts: InstantOptions { max_iterations: opts.max_iterations, trace: false }, stats: SolveStats::default() };
    sw.stats.sweep_bound = sweep_bound(a);
    sw.stats.cutpoint_bound = cutpoint_bound(a);

    let urgent = a.all_urgent();
    let top = sw.instant(&urgent, &a.r)?;
    let mut at_r = sw.finite_prefix(&top)?;
    let mut acc: Vec<CostFunction> =
        at_r.iter().map(|v| CostFunction::point(a.r.clone(), ExtValue::Finite(v.clone()))).collect();
    let mut samples = vec![Sample { lo: a.r.clone(), hi: a.r.clone(), window: None, strat: extract_instant_strategies(&urgent, &top)? }];
    let mut windows: Vec<Rational> = Vec::new();
    let mut endpoints = vec![a.r.clone()];
    let mut r = a.r.clone();

    while r > zero {
        if windows.len() as u128 >= sw.stats.sweep_bound {
            return Err(SolverError::BoundViolated(format!("more than {} sweep windows", sw.stats.sweep_bound)));
        }
        let w = windows.len();
        windows.push(r.clone());
        let gp = waiting(a, &r, &at_r).all_urgent();
        let mut cands = poss_cp(&gp, &zero, &r);
        cands.retain(|c| c < &r);
        let mut b = r.clone();
        let mut at_b = at_r.clone();
        let mut pts: Vec<Vec<(Rational, Rational)>> = at_r.iter().map(|v| vec![(r.clone(), v.clone())]).collect();
        for c in cands.iter().rev() {
            sw.stats.candidates += 1;
            let x = sw.instant(&gp, c)?;
            if !slope_test(a, &at_b, &x.values[..n], c, &b)? {
                break;
            }
            let at_c = sw.finite_prefix(&x)?;
            let mid = Rational::midpoint(c, &b);
            let xm = sw.instant(&gp, &mid)?;
            for v in 0..n {
                let interp = Rational::midpoint(&at_c[v], &at_b[v]);
                if xm.values[v] != ExtValue::Finite(interp) {
                    return Err(SolverError::BoundViolated(format!(
                        "value of {} is not affine between candidate cutpoints {c} and {b}",
                        a.names[v]
                    )));
                }
            }
            samples.push(Sample { lo: c.clone(), hi: c.clone(), window: Some(w), strat: extract_instant_strategies(&gp, &x)? });
            samples.push(Sample { lo: c.clone(), hi: b.clone(), window: Some(w), strat: extract_instant_strategies(&gp, &xm)? });
            for v in 0..n {
                pts[v].push((c.clone(), at_c[v].clone()));
            }
            at_b = at_c;
            b = c.clone();
        }
        if b == r {
            return Err(SolverError::BoundViolated(format!("sweep window at {r} made no progress")));
        }
        for v in 0..n {
            pts[v].reverse();
            let piece = CostFunction::from_points(&pts[v])?;
            acc[v] = piece.concat_left(&acc[v])?;
        }
        log::debug!("window {w}: [{b}, {r}]");
        at_r = at_b;
        r = b;
        endpoints.push(r.clone());
    }
    sw.stats.windows = windows.len();
    let values: Vec<CostFunction> = acc.iter().map(CostFunction::canonicalize).collect();
    sw.stats.cutpoints = values.iter().map(|f| f.cutpoints().len()).collect();
    check_invariants(a, &values, &sw.stats)?;

    let (max_strategy, first) = assemble(a, &samples, &windows);
    let second = attractor_strategy(a);
    let k = switch_threshold(a, &first, &values);
    Ok(ValueResult {
        names: a.names.clone(),
        values,
        max_strategy,
        min_strategy: SwitchingStrategy { first, second, k },
        sweep_endpoints: endpoints,
        stats: sw.stats,
        minus_infinity: None,
    })
}

fn check_invariants(a: &Arena, values: &[CostFunction], stats: &SolveStats) -> Result<(), SolverError> {
    for (v, f) in values.iter().enumerate() {
        let name = &a.names[v];
        if !f.is_continuous() {
            return Err(SolverError::BoundViolated(format!("value of {name} is not continuous")));
        }
        if stats.cutpoints[v] as u128 > stats.cutpoint_bound {
            return Err(SolverError::BoundViolated(format!("value of {name} has too many cutpoints")));
        }
        if let Node::Player { player, rate, urgent: false } = &a.nodes[v] {
            let bound = -rate;
            for p in f.pieces() {
                let s = p.slope().ok_or_else(|| SolverError::InfiniteValue(name.clone()))?;
                let ok = match player {
                    Player::Min => s >= &bound,
                    Player::Max => s <= &bound,
                };
                if !ok {
                    return Err(SolverError::BoundViolated(format!("slope {s} of {name} against rate {rate}")));
                }
            }
        }
    }
    Ok(())
}

/// Max table and Min first-phase table, glued from the per-point and per-piece choices.
fn assemble(a: &Arena, samples: &[Sample], windows: &[Rational]) -> (FpStrategy, FpStrategy) {
    let n_edges = a.edges.len();
    let raw = |s: &Sample, e: usize| match s.window {
        Some(w) if e >= n_edges => Raw::WaitTo(w),
        _ => Raw::Now(e),
    };
    let mut maxs = vec![None; a.len()];
    let mut mins = vec![None; a.len()];
    for (v, node) in a.nodes.iter().enumerate() {
        let Some(player) = node.player() else { continue };
        let pick = |s: &Sample| match player {
            Player::Max => s.strat.max_choice[v],
            Player::Min => s.strat.min_first[v],
        };
        let mut at_point: BTreeMap<&Rational, Raw> = BTreeMap::new();
        let mut on_piece: BTreeMap<&Rational, Raw> = BTreeMap::new();
        for s in samples {
            let Some(e) = pick(s) else { continue };
            if s.lo == s.hi {
                at_point.insert(&s.lo, raw(s, e));
            } else {
                on_piece.insert(&s.lo, raw(s, e));
            }
        }
        let resolve = |mut m: Raw| {
            let mut until: Option<usize> = None;
            loop {
                match m {
                    Raw::Now(edge) => {
                        return match until {
                            None => Move::Now { edge },
                            Some(u) => Move::Wait { until: windows[u].clone(), edge },
                        }
                    }
                    Raw::WaitTo(w) => {
                        until = Some(w);
                        m = at_point[&windows[w]];
                    }
                }
            }
        };
        let table = LocationStrategy {
            cuts: at_point.keys().map(|c| (*c).clone()).collect(),
            at_cut: at_point.values().map(|m| resolve(*m)).collect(),
            between: on_piece.values().map(|m| resolve(*m)).collect(),
        }
        .canonical();
        match player {
            Player::Max => maxs[v] = Some(table),
            Player::Min => mins[v] = Some(table),
        }
    }
    (FpStrategy { locations: maxs }, FpStrategy { locations: mins })
}

/// Min moves decreasing the attractor rank, over the whole interval.
fn attractor_strategy(a: &Arena) -> FpStrategy {
    let ranks = attractor_ranks(a);
    let locations = a
        .nodes
        .iter()
        .enumerate()
        .map(|(v, node)| {
            if node.player() != Some(Player::Min) {
                return None;
            }
            let e = a
                .out(v)
                .iter()
                .copied()
                .filter(|&e| ranks[a.edges[e].dst].is_some())
                .min_by_key(|&e| (ranks[a.edges[e].dst], e))?;
            Some(LocationStrategy::constant(Rational::zero(), a.r.clone(), Move::Now { edge: e }))
        })
        .collect();
    FpStrategy { locations }
}

/// Switching threshold `|L|·(2W_L + 2|σ¹|·|L|·W_T + 3|σ¹| + n + W_fin)` with
/// `n = 1 + max(0, -min Val)`, uniform over starting configurations.
pub fn switch_threshold(a: &Arena, first: &FpStrategy, values: &[CostFunction]) -> u64 {
    let l = Rational::from_int(a.len() as i64);
    let size = Rational::from_int(first.size() as i64);
    let min_val = values.iter().filter_map(CostFunction::min_finite_value).min().unwrap_or_else(Rational::zero);
    let n = Rational::one() + Rational::from_bigint((-min_val).max(Rational::zero()).ceil());
    let two = Rational::from_int(2);
    let inner = &two * &a.w_l()
        + &two * &size * &l * Rational::from_int(a.w_t())
        + Rational::from_int(3) * &size
        + n
        + a.w_fin();
    (l * inner).ceil().to_u64().unwrap_or(u64::MAX)
}

/// Prunes infinite values, solves the rest and maps everything back to `a`.
pub fn solve_game(a: &Arena, opts: &SolveOptions) -> Result<ValueResult, SolverError> {
    let pruned = prune_infinite(a)?;
    let zero = Rational::zero();
    let inner = if pruned.arena.is_empty() { None } else { Some(solve_with(&pruned.arena, opts)?) };
    let n = a.len();
    let mut values = Vec::with_capacity(n);
    for v in 0..n {
        values.push(match (&pruned.verdicts[v], &inner) {
            (Some(inf), _) => CostFunction::constant(zero.clone(), a.r.clone(), inf.clone()),
            (None, Some(res)) => res.values[pruned.node_map[v].expect("kept node")].clone(),
            (None, None) => unreachable!("finite node in an empty pruned arena"),
        });
    }
    let owned = |player: Player| -> Vec<Option<LocationStrategy>> {
        (0..n).map(|v| (a.nodes[v].player() == Some(player)).then(|| fallback_move(a, &pruned.verdicts, v)).flatten()).collect()
    };
    let (max_fallback, min_fallback) = (owned(Player::Max), owned(Player::Min));
    let full_attractor = attractor_strategy(a);
    let min_reach: Vec<Option<LocationStrategy>> =
        (0..n).map(|v| full_attractor.locations[v].clone().or_else(|| min_fallback[v].clone())).collect();
    let back = |fp: &FpStrategy, fallback: &[Option<LocationStrategy>]| FpStrategy {
        locations: (0..n)
            .map(|v| match pruned.node_map[v] {
                Some(i) => fp.locations[i].as_ref().map(|s| s.map_edges(|e| pruned.edge_back[e])),
                None => fallback[v].clone(),
            })
            .collect(),
    };
    let minus_infinity = if pruned.verdicts.iter().any(|v| v == &Some(ExtValue::NegInf)) {
        let bound = -cutoff_threshold(a) + Rational::one();
        minus_infinity_family(&a.all_urgent(), &a.r, &bound, iteration_bound(a) as usize)?
    } else {
        None
    };
    Ok(match inner {
        Some(res) => ValueResult {
            names: a.names.clone(),
            values,
            max_strategy: back(&res.max_strategy, &max_fallback),
            min_strategy: SwitchingStrategy {
                first: back(&res.min_strategy.first, &min_fallback),
                second: back(&res.min_strategy.second, &min_reach),
                k: res.min_strategy.k,
            },
            sweep_endpoints: res.sweep_endpoints,
            stats: res.stats,
            minus_infinity,
        },
        None => {
            let min = FpStrategy { locations: min_fallback };
            ValueResult {
                names: a.names.clone(),
                values,
                max_strategy: FpStrategy { locations: max_fallback },
                min_strategy: SwitchingStrategy { first: min, second: FpStrategy { locations: min_reach }, k: 0 },
                sweep_endpoints: vec![a.r.clone()],
                stats: SolveStats::default(),
                minus_infinity,
            }
        }
    })
}

/// Move for a node whose value is infinite: the cheapest immediate edge to a
/// node with the same verdict when there is one, the first edge otherwise.
fn fallback_move(a: &Arena, verdicts: &[Option<ExtValue>], v: usize) -> Option<LocationStrategy> {
    let out = a.out(v);
    let e = out
        .iter()
        .copied()
        .filter(|&e| verdicts[a.edges[e].dst] == verdicts[v])
        .min_by_key(|&e| (a.edges[e].weight, e))
        .or_else(|| out.first().copied())?;
    Some(LocationStrategy::constant(Rational::zero(), a.r.clone(), Move::Now { edge: e }))
}

/// Solves a simple game; edges in the strategies are transition indices.
pub fn solve_sptg(g: &Sptg) -> Result<ValueResult, SolverError> {
    solve_game(&Arena::from_sptg(g), &SolveOptions::default())
}

pub fn solve_sptg_with(g: &Sptg, opts: &SolveOptions) -> Result<ValueResult, SolverError> {
    solve_game(&Arena::from_sptg(g), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costfn::{AffineFn, Piece};
    use crate::fixtures;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn simple_seven() -> ValueResult {
        solve_sptg(&Sptg::new(fixtures::simple_seven()).unwrap()).unwrap()
    }

    #[test]
    fn simple_seven_l1_golden() {
        let res = simple_seven();
        let l1 = res.value("l1").unwrap();
        let cuts: Vec<Rational> = ["0", "1/4", "1/2", "3/4", "9/10", "1"].map(q).to_vec();
        assert_eq!(l1.cutpoints(), &cuts[..]);
        let vals: Vec<ExtValue> = ["-19/2", "-6", "-11/2", "-2", "-1/5", "0"].map(|s| ExtValue::Finite(q(s))).to_vec();
        assert_eq!(l1.point_values(), &vals[..]);
    }

    #[test]
    fn simple_seven_other_locations() {
        let res = simple_seven();
        let l4 = res.value("l4").unwrap();
        assert_eq!(l4.pieces(), &[Piece::Affine(AffineFn::ints(-3, -4))]);
        let l7 = res.value("l7").unwrap();
        assert_eq!(l7.pieces(), &[Piece::Affine(AffineFn::ints(16, -16))]);
        let at = |l: &str, nu: &str| res.value(l).unwrap().evaluate(&q(nu)).unwrap();
        assert_eq!(at("l3", "0"), ExtValue::int(-10));
        assert_eq!(at("l5", "0"), ExtValue::int(-14));
        assert_eq!(at("l6", "0"), ExtValue::int(-11));
        assert_eq!(at("l2", "1"), ExtValue::int(1));
    }

    #[test]
    fn simple_seven_sweep_endpoints() {
        let res = simple_seven();
        assert_eq!(res.sweep_endpoints, ["1", "3/4", "1/2", "1/4", "0"].map(q).to_vec());
        assert!((res.stats.windows as u128) <= res.stats.sweep_bound);
    }

    #[test]
    fn simple_seven_waiting_strategies() {
        let g = fixtures::simple_seven();
        let res = simple_seven();
        let l4 = g.index_of("l4").unwrap();
        let l7 = g.index_of("l7").unwrap();
        let m = res.max_strategy.decide(l4, &q("1/3")).unwrap();
        assert_eq!(m, &Move::Wait { until: q("1"), edge: 9 });
        let m = res.min_strategy.first.decide(l7, &q("1/3")).unwrap();
        assert_eq!(m, &Move::Wait { until: q("1"), edge: 10 });
    }

    #[test]
    fn targets_only() {
        let mut a = Arena::new(Rational::one());
        a.add_node("f", Node::Target(Piece::Affine(AffineFn::ints(3, -1))));
        let res = solve(&a).unwrap();
        assert_eq!(res.values[0], CostFunction::affine(Rational::zero(), Rational::one(), AffineFn::ints(3, -1)));
    }

    #[test]
    fn pruning_classifies_infinities() {
        let mut a = Arena::new(Rational::one());
        let l = a.add_node("l", Node::Player { player: Player::Min, rate: Rational::zero(), urgent: false });
        let m = a.add_node("m", Node::Player { player: Player::Max, rate: Rational::one(), urgent: false });
        let f = a.add_node("f", Node::Target(Piece::Affine(AffineFn::ints(0, 0))));
        a.add_edge(l, l, -1, None);
        a.add_edge(l, f, 0, None);
        a.add_edge(m, m, 0, None);
        let p = prune_infinite(&a).unwrap();
        assert_eq!(p.verdicts, vec![Some(ExtValue::NegInf), Some(ExtValue::PosInf), None]);
        assert_eq!(p.arena.len(), 1);
        let res = solve_game(&a, &SolveOptions::default()).unwrap();
        assert_eq!(res.values[0].evaluate(&q("1/2")).unwrap(), ExtValue::NegInf);
        assert!(res.minus_infinity.is_some());
    }

    #[test]
    fn untimed_loop_threshold_and_values() {
        let res = solve_sptg(&Sptg::new(fixtures::untimed_loop(5)).unwrap()).unwrap();
        for l in ["l1", "l2"] {
            let f = res.value(l).unwrap();
            assert_eq!(f.evaluate(&q("1/2")).unwrap(), ExtValue::int(-5));
        }
        assert!(res.min_strategy.k >= 10);
        assert_eq!(res.min_strategy.first.decide(1, &q("0")).unwrap().edge(), 2);
        assert_eq!(res.min_strategy.second.decide(1, &q("0")).unwrap().edge(), 3);
    }
}
