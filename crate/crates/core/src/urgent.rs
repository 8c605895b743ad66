//! Value iteration at a fixed clock value for games whose player nodes are all urgent.
//!
//! Finite values at a fixed `ν` always have the form `k + φ(ν)` for an integer `k`
//! and a final cost `φ`. Values are kept in that symbolic form so the iteration
//! runs on integers; the pairwise differences of the final costs at `ν` are
//! tabulated once.

use std::cmp::Ordering;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::costfn::{ExtValue, Piece, Rational};
use crate::error::SolverError;
use crate::model::{attractor_ranks, Arena, Node, Player};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Sym {
    NegInf,
    Fin(i64, u32),
    PosInf,
}

struct Table {
    consts: Vec<Rational>,
    m: usize,
    /// `floor(c[j2] - c[j1])` at `j2 * m + j1`, and whether the difference is integral.
    diff: Vec<(i64, bool)>,
    /// `Fin(k, j)` lies below the cutoff iff `k < cut[j]`.
    cut: Vec<i64>,
}

impl Table {
    fn new(consts: Vec<Rational>, threshold: &Rational) -> Result<Table, SolverError> {
        let m = consts.len();
        let mut diff = Vec::with_capacity(m * m);
        for c2 in &consts {
            for c1 in &consts {
                let d = c2 - c1;
                diff.push((d.floor_i64().ok_or(SolverError::Overflow)?, d.is_integer()));
            }
        }
        let cut = consts
            .iter()
            .map(|c| (threshold - c).ceil_i64().ok_or(SolverError::Overflow))
            .collect::<Result<_, _>>()?;
        Ok(Table { consts, m, diff, cut })
    }

    fn cmp(&self, a: Sym, b: Sym) -> Ordering {
        match (a, b) {
            (Sym::Fin(k1, j1), Sym::Fin(k2, j2)) => {
                let k = k1 - k2;
                let (f, exact) = self.diff[j2 as usize * self.m + j1 as usize];
                if exact {
                    k.cmp(&f)
                } else if k <= f {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (Sym::NegInf, Sym::NegInf) | (Sym::PosInf, Sym::PosInf) => Ordering::Equal,
            (Sym::NegInf, _) | (_, Sym::PosInf) => Ordering::Less,
            (Sym::PosInf, _) | (_, Sym::NegInf) => Ordering::Greater,
        }
    }

    fn below_cutoff(&self, s: Sym) -> bool {
        matches!(s, Sym::Fin(k, j) if k < self.cut[j as usize])
    }

    fn to_ext(&self, s: Sym) -> ExtValue {
        match s {
            Sym::NegInf => ExtValue::NegInf,
            Sym::PosInf => ExtValue::PosInf,
            Sym::Fin(k, j) => ExtValue::Finite(&self.consts[j as usize] + Rational::from_int(k)),
        }
    }
}

fn add(s: Sym, w: i64) -> Result<Sym, SolverError> {
    Ok(match s {
        Sym::Fin(k, j) => Sym::Fin(k.checked_add(w).ok_or(SolverError::Overflow)?, j),
        other => other,
    })
}

struct Engine<'a> {
    arena: &'a Arena,
    table: Table,
    init: Vec<Sym>,
}

struct Run {
    x: Vec<Sym>,
    iterations: u64,
    witness: Vec<Option<usize>>,
    cutoff_at: Vec<Option<u64>>,
    trace: Vec<Vec<Sym>>,
}

impl<'a> Engine<'a> {
    fn new(arena: &'a Arena, nu: &Rational) -> Result<Self, SolverError> {
        if nu.is_negative() || nu > &arena.r {
            return Err(SolverError::OutOfRange(nu.clone()));
        }
        let mut consts = Vec::new();
        let mut init = Vec::with_capacity(arena.len());
        for n in &arena.nodes {
            init.push(match n {
                Node::Target(Piece::Affine(f)) => {
                    consts.push(f.eval(nu));
                    Sym::Fin(0, (consts.len() - 1) as u32)
                }
                Node::Target(Piece::PosInf) | Node::Player { .. } => Sym::PosInf,
                Node::Target(Piece::NegInf) => Sym::NegInf,
            });
        }
        let table = Table::new(consts, &cutoff_threshold(arena))?;
        Ok(Engine { arena, table, init })
    }

    /// One synchronous application of the min/max operator.
    fn step(&self, prev: &[Sym], witness: &mut [Option<usize>]) -> Result<Vec<Sym>, SolverError> {
        let a = self.arena;
        let mut next = prev.to_vec();
        for (v, node) in a.nodes.iter().enumerate() {
            let Some(player) = node.player() else { continue };
            let mut best: Option<(Sym, usize)> = None;
            for &e in a.out(v) {
                let cand = add(prev[a.edges[e].dst], a.edges[e].weight)?;
                let better = match &best {
                    None => true,
                    Some((b, _)) => {
                        let o = self.table.cmp(cand, *b);
                        match player {
                            Player::Min => o == Ordering::Less,
                            Player::Max => o == Ordering::Greater,
                        }
                    }
                };
                if better {
                    best = Some((cand, e));
                }
            }
            next[v] = match best {
                Some((s, e)) => {
                    if self.table.cmp(s, prev[v]) != Ordering::Equal {
                        witness[v] = Some(e);
                    }
                    s
                }
                None => Sym::PosInf,
            };
        }
        Ok(next)
    }

    fn same(&self, x: &[Sym], y: &[Sym]) -> bool {
        x.iter().zip(y).all(|(a, b)| self.table.cmp(*a, *b) == Ordering::Equal)
    }

    fn run(&self, limit: u64, keep_trace: bool) -> Result<Run, SolverError> {
        let n = self.arena.len();
        let mut x = self.init.clone();
        let mut witness = vec![None; n];
        let mut cutoff_at = vec![None; n];
        let mut trace = Vec::new();
        let mut iterations = 0u64;
        loop {
            if iterations >= limit {
                return Err(SolverError::IterationLimit { limit });
            }
            iterations += 1;
            let mut next = self.step(&x, &mut witness)?;
            for v in 0..n {
                if self.arena.nodes[v].player().is_some() && self.table.below_cutoff(next[v]) {
                    if next[v] != Sym::NegInf && cutoff_at[v].is_none() {
                        cutoff_at[v] = Some(iterations);
                    }
                    next[v] = Sym::NegInf;
                }
            }
            if keep_trace {
                trace.push(next.clone());
            }
            let done = self.same(&next, &x);
            x = next;
            if done {
                return Ok(Run { x, iterations, witness, cutoff_at, trace });
            }
        }
    }
}

/// `-(|L|-1)·W_T - W_fin`: finite values never drop below this.
pub fn cutoff_threshold(a: &Arena) -> Rational {
    let n = a.len().max(1) as i64;
    -(Rational::from_int((n - 1) * a.w_t())) - a.w_fin()
}

/// `|L_f|·|L|·(2(|L|-1)W_T + 2W_fin + 1) + |L|`.
pub fn iteration_bound(a: &Arena) -> u64 {
    let n = a.len() as i64;
    let nf = a.nodes.iter().filter(|v| matches!(v, Node::Target(_))).count() as i64;
    let inner = Rational::from_int(2 * (n - 1).max(0) * a.w_t() + 1) + Rational::from_int(2) * a.w_fin();
    let b = Rational::from_int(nf * n) * inner + Rational::from_int(n);
    b.ceil().to_u64().unwrap_or(u64::MAX)
}

#[derive(Clone, Debug, Default)]
pub struct InstantOptions {
    /// Overrides the theoretical iteration bound when set.
    pub max_iterations: Option<u64>,
    /// Keep every intermediate vector.
    pub trace: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InstantValues {
    pub nu: Rational,
    pub values: Vec<ExtValue>,
    pub iterations: u64,
    pub iteration_bound: u64,
    /// Iteration at which the `-inf` cutoff fired, per node.
    pub cutoff_at: Vec<Option<u64>>,
    #[serde(skip)]
    pub trace: Vec<Vec<ExtValue>>,
    #[serde(skip)]
    witness: Vec<Option<usize>>,
}

/// Values of every node at clock value `nu`.
pub fn solve_instant(a: &Arena, nu: &Rational) -> Result<InstantValues, SolverError> {
    solve_instant_with(a, nu, &InstantOptions::default())
}

pub fn solve_instant_with(a: &Arena, nu: &Rational, opts: &InstantOptions) -> Result<InstantValues, SolverError> {
    if let Some(v) = a.nodes.iter().position(Node::is_waiting) {
        return Err(SolverError::NotUrgent(a.names[v].clone()));
    }
    let engine = Engine::new(a, nu)?;
    let bound = iteration_bound(a);
    let limit = opts.max_iterations.unwrap_or(bound);
    let run = engine.run(limit, opts.trace)?;
    Ok(InstantValues {
        nu: nu.clone(),
        values: run.x.iter().map(|s| engine.table.to_ext(*s)).collect(),
        iterations: run.iterations,
        iteration_bound: bound,
        cutoff_at: run.cutoff_at,
        trace: run.trace.iter().map(|x| x.iter().map(|s| engine.table.to_ext(*s)).collect()).collect(),
        witness: run.witness,
    })
}

/// The `i`-step bounded values: the plain operator applied `steps` times from
/// the initial vector, with no `-inf` cutoff.
pub fn bounded_values(a: &Arena, nu: &Rational, steps: usize) -> Result<Vec<ExtValue>, SolverError> {
    let engine = Engine::new(a, nu)?;
    let mut x = engine.init.clone();
    let mut w = vec![None; a.len()];
    for _ in 0..steps {
        x = engine.step(&x, &mut w)?;
    }
    Ok(x.iter().map(|s| engine.table.to_ext(*s)).collect())
}

/// Optimal choices at one clock value, as arena edge indices per node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstantStrategies {
    /// Max: an edge attaining the maximum of `weight + X(successor)`.
    pub max_choice: Vec<Option<usize>>,
    /// Min, first phase: value-preserving edge along which the value was first attained.
    pub min_first: Vec<Option<usize>>,
    /// Min, second phase: edge decreasing the attractor rank.
    pub min_second: Vec<Option<usize>>,
}

pub fn extract_instant_strategies(a: &Arena, x: &InstantValues) -> Result<InstantStrategies, SolverError> {
    // The first-phase choice needs the order in which values stabilised; rerun if absent.
    let fresh;
    let witness = if x.witness.len() == a.len() {
        &x.witness
    } else {
        fresh = solve_instant(a, &x.nu)?;
        &fresh.witness
    };
    let ranks = attractor_ranks(a);
    let n = a.len();
    let mut max_choice = vec![None; n];
    let mut min_first = vec![None; n];
    let mut min_second = vec![None; n];
    for (v, node) in a.nodes.iter().enumerate() {
        let Some(player) = node.player() else { continue };
        let out = a.out(v);
        let succ_val = |e: usize| x.values[a.edges[e].dst].plus(&Rational::from_int(a.edges[e].weight));
        let opt = out.iter().map(|&e| succ_val(e)).reduce(|p, q| match player {
            Player::Min => p.min(q),
            Player::Max => p.max(q),
        });
        let expected = opt.unwrap_or(ExtValue::PosInf);
        if x.values[v] != expected && x.values[v] != ExtValue::NegInf {
            return Err(SolverError::NotFixedPoint(a.names[v].clone()));
        }
        let tight = out.iter().copied().find(|&e| succ_val(e) == x.values[v]);
        match player {
            Player::Max => max_choice[v] = tight.or_else(|| out.first().copied()),
            Player::Min => {
                min_first[v] = match &x.values[v] {
                    ExtValue::Finite(_) => witness[v],
                    _ => tight.or_else(|| out.first().copied()),
                };
                min_second[v] = out
                    .iter()
                    .copied()
                    .filter(|&e| ranks[a.edges[e].dst].is_some())
                    .min_by_key(|&e| (ranks[a.edges[e].dst], e));
            }
        }
    }
    Ok(InstantStrategies { max_choice, min_first, min_second })
}

/// Step-counting Min strategies reaching a target with price at most `-bound`
/// from every node of value `-inf`.
///
/// `table[i][v]` is the edge to take at `v` when `i + 1` steps remain; it
/// attains the `(i+1)`-step bounded value.
#[derive(Clone, Debug, Serialize)]
pub struct CountdownStrategy {
    pub horizon: usize,
    pub table: Vec<Vec<Option<usize>>>,
}

pub fn minus_infinity_family(
    a: &Arena,
    nu: &Rational,
    bound: &Rational,
    max_horizon: usize,
) -> Result<Option<CountdownStrategy>, SolverError> {
    let full = solve_instant(a, nu)?;
    let goal = ExtValue::Finite(-bound);
    let engine = Engine::new(a, nu)?;
    let mut x = engine.init.clone();
    let mut table = Vec::new();
    for _ in 0..max_horizon {
        let mut choice = vec![None; a.len()];
        for (v, node) in a.nodes.iter().enumerate() {
            let Some(player) = node.player() else { continue };
            let mut best: Option<(Sym, usize)> = None;
            for &e in a.out(v) {
                let cand = add(x[a.edges[e].dst], a.edges[e].weight)?;
                let better = best.as_ref().is_none_or(|(b, _)| {
                    let o = engine.table.cmp(cand, *b);
                    if player == Player::Min { o == Ordering::Less } else { o == Ordering::Greater }
                });
                if better {
                    best = Some((cand, e));
                }
            }
            choice[v] = best.map(|b| b.1);
        }
        let mut w = vec![None; a.len()];
        x = engine.step(&x, &mut w)?;
        table.push(choice);
        let reached = full
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == ExtValue::NegInf)
            .all(|(v, _)| engine.table.to_ext(x[v]) <= goal);
        if reached {
            return Ok(Some(CountdownStrategy { horizon: table.len(), table }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costfn::AffineFn;
    use crate::fixtures;
    use crate::model::Sptg;

    fn arena(g: crate::model::Ptg) -> Arena {
        Arena::from_sptg(&Sptg::new(g).unwrap()).all_urgent()
    }

    fn neg_cycle() -> Arena {
        let mut a = Arena::new(Rational::one());
        let l = a.add_node("l", Node::Player { player: Player::Min, rate: Rational::zero(), urgent: true });
        let f = a.add_node("f", Node::Target(Piece::Affine(AffineFn::ints(0, 0))));
        a.add_edge(l, l, -1, None);
        a.add_edge(l, f, 0, None);
        a
    }

    #[test]
    fn simple_seven_at_one() {
        let a = arena(fixtures::simple_seven());
        let x = solve_instant(&a, &Rational::one()).unwrap();
        let expect = [0, 1, -7, -7, 1, 1, 0, 0].map(ExtValue::int);
        assert_eq!(x.values, expect.to_vec());
        let s = extract_instant_strategies(&a, &x).unwrap();
        // l1 leaves directly to the target
        assert_eq!(a.edges[s.min_first[0].unwrap()].dst, 7);
    }

    #[test]
    fn untimed_loop_values_and_choices() {
        let a = arena(fixtures::untimed_loop(5));
        let x = solve_instant(&a, &Rational::one()).unwrap();
        assert_eq!(x.values[..2], [ExtValue::int(-5), ExtValue::int(-5)]);
        assert!(x.iterations <= iteration_bound(&a));
        let s = extract_instant_strategies(&a, &x).unwrap();
        assert_eq!(a.edges[s.max_choice[0].unwrap()].dst, 2);
        assert_eq!(a.edges[s.min_first[1].unwrap()].dst, 0);
        assert_eq!(a.edges[s.min_second[1].unwrap()].dst, 2);
    }

    #[test]
    fn lone_target() {
        let mut a = Arena::new(Rational::one());
        a.add_node("f", Node::Target(Piece::Affine(AffineFn::ints(2, 0))));
        let x = solve_instant(&a, &Rational::new(1, 2)).unwrap();
        assert_eq!(x.values, vec![ExtValue::int(1)]);
    }

    #[test]
    fn cutoff_fires_below_threshold() {
        let a = neg_cycle();
        assert_eq!(cutoff_threshold(&a), Rational::from_int(-1));
        let x = solve_instant_with(&a, &Rational::zero(), &InstantOptions { trace: true, ..Default::default() }).unwrap();
        assert_eq!(x.values[0], ExtValue::NegInf);
        // 0, then -1 (at the threshold, kept), then -2 (below it, cut)
        assert_eq!(x.trace[0][0], ExtValue::int(0));
        assert_eq!(x.trace[1][0], ExtValue::int(-1));
        assert_eq!(x.cutoff_at[0], Some(3));
    }

    #[test]
    fn unreachable_target_is_plus_infinity() {
        let mut a = Arena::new(Rational::one());
        let l = a.add_node("l", Node::Player { player: Player::Max, rate: Rational::zero(), urgent: true });
        a.add_node("f", Node::Target(Piece::Affine(AffineFn::ints(0, 0))));
        a.add_edge(l, l, 3, None);
        let x = solve_instant(&a, &Rational::one()).unwrap();
        assert_eq!(x.values[0], ExtValue::PosInf);
    }

    #[test]
    fn rejects_waiting_nodes() {
        let g = Sptg::new(fixtures::simple_seven()).unwrap();
        let a = Arena::from_sptg(&g);
        assert!(matches!(solve_instant(&a, &Rational::one()), Err(SolverError::NotUrgent(_))));
    }

    #[test]
    fn countdown_family_reaches_bound() {
        let a = neg_cycle();
        let fam = minus_infinity_family(&a, &Rational::zero(), &Rational::from_int(5), 100).unwrap().unwrap();
        assert_eq!(fam.horizon, 6);
        assert_eq!(fam.table[5][0], Some(0));
        assert_eq!(fam.table[0][0], Some(1));
    }

    #[test]
    fn sequence_is_non_increasing() {
        let a = arena(fixtures::simple_seven());
        let x = solve_instant_with(&a, &Rational::new(1, 3), &InstantOptions { trace: true, ..Default::default() }).unwrap();
        for w in x.trace.windows(2) {
            assert!(w[0].iter().zip(&w[1]).all(|(p, q)| q <= p));
        }
    }
}
