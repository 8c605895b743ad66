//! Generators and independent checks used by the test suites: random games,
//! a brute-force solver for the clock discretized on a grid, and an exact
//! one-step optimality check of computed value functions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::costfn::{AffineFn, CostFunction, ExtValue, Rational};
use crate::model::{Guard, Location, Owner, Ptg, Transition};

/// Shape of the random simple games.
#[derive(Clone, Debug)]
pub struct RandomGameParams {
    /// Total number of locations, finals included.
    pub max_locations: usize,
    /// Bound on `|weight|` and `|rate|`.
    pub max_weight: i64,
    /// Bound on the coefficients of final costs.
    pub max_final: i64,
    pub max_out_degree: usize,
    pub urgent_probability: f64,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        RandomGameParams { max_locations: 6, max_weight: 8, max_final: 4, max_out_degree: 3, urgent_probability: 0.2 }
    }
}

/// A random simple game on `[0,1]`, deterministic in `seed`, with one or two
/// final locations placed last.
pub fn random_sptg(seed: u64, p: &RandomGameParams) -> Ptg {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = rng.gen_range(2..=p.max_locations.max(2));
    let finals = if total >= 4 && rng.gen_bool(0.4) { 2 } else { 1 };
    let players = total - finals;
    let w = p.max_weight;
    let mut locations = Vec::with_capacity(total);
    for i in 0..players {
        let rate = rng.gen_range(-w..=w);
        let mut l = if rng.gen_bool(0.5) { Location::min(&format!("l{i}"), rate) } else { Location::max(&format!("l{i}"), rate) };
        l.urgent = rng.gen_bool(p.urgent_probability);
        locations.push(l);
    }
    for i in 0..finals {
        let f = AffineFn::ints(rng.gen_range(-p.max_final..=p.max_final), rng.gen_range(-p.max_final..=p.max_final));
        locations.push(Location::target(&format!("f{i}"), f));
    }
    let mut transitions = Vec::new();
    for s in 0..players {
        let deg = rng.gen_range(1..=p.max_out_degree);
        let mut targets: Vec<usize> = (0..total).collect();
        targets.shuffle(&mut rng);
        for &t in targets.iter().take(deg) {
            transitions.push(Transition::new(s, t, rng.gen_range(-w..=w)));
        }
    }
    Ptg::new(locations, transitions, 1)
}

/// A random game with guards and resets on `[0, M]`, `M ∈ {1, 2}`, with
/// `players` non-final locations and one final location.
pub fn random_ptg(seed: u64, players: usize, max_weight: i64) -> Ptg {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=2i64);
    let w = max_weight;
    let mut locations: Vec<Location> = (0..players)
        .map(|i| {
            let rate = rng.gen_range(-w..=w);
            if rng.gen_bool(0.5) {
                Location::min(&format!("l{i}"), rate)
            } else {
                Location::max(&format!("l{i}"), rate)
            }
        })
        .collect();
    locations.push(Location::target("lf", AffineFn::ints(0, rng.gen_range(0..=2))));
    let mut transitions = Vec::new();
    for s in 0..players {
        let deg = rng.gen_range(1..=3);
        for _ in 0..deg {
            let t = rng.gen_range(0..=players);
            let a = rng.gen_range(0..=m);
            let b = rng.gen_range(a..=m);
            let (lo_closed, hi_closed) = if a == b { (true, true) } else { (rng.gen_bool(0.7), rng.gen_bool(0.7)) };
            let guard = Guard { lo: Rational::from_int(a), lo_closed, hi: Rational::from_int(b), hi_closed };
            let mut tr = Transition::new(s, t, rng.gen_range(-w..=w)).guarded(guard);
            tr.reset = t < players && rng.gen_bool(0.35);
            transitions.push(tr);
        }
    }
    Ptg::new(locations, transitions, m)
}

/// Values of the game where delays are multiples of `1/n` on `[0,1]`, at
/// every grid point: `result[l][i]` is the value at `(l, i/n)`.
///
/// Solved by plain value iteration on scaled integers. Values below the
/// finite-value bound of the discrete game are `-inf`.
pub fn discretized_values(g: &Ptg, n: usize) -> Vec<Vec<ExtValue>> {
    let nl = g.locations.len();
    let scale = n as i128;
    let idx = |l: usize, i: usize| l * (n + 1) + i;
    let states = nl * (n + 1);
    // final values scaled by n; final cost coefficients must be integers
    let mut finals: Vec<Option<i128>> = vec![None; states];
    let mut wmax: i128 = 0;
    let mut fmax: i128 = 0;
    for (l, loc) in g.locations.iter().enumerate() {
        if let Some(f) = &loc.final_cost {
            for i in 0..=n {
                let v = f.eval(&Rational::new(i as i64, n as i64)) * Rational::from_int(n as i64);
                let v = v.floor_i64().filter(|_| v.is_integer()).expect("final costs with integer coefficients") as i128;
                fmax = fmax.max(v.abs());
                finals[idx(l, i)] = Some(v);
            }
        }
    }
    // moves (target state, scaled weight) per state
    let mut moves: Vec<Vec<(usize, i128)>> = vec![vec![]; states];
    for (l, loc) in g.locations.iter().enumerate() {
        if loc.is_final() {
            continue;
        }
        for i in 0..=n {
            let last = if loc.urgent { i } else { n };
            for j in i..=last {
                for t in g.transitions.iter().filter(|t| t.source == l) {
                    let wt = loc.rate as i128 * (j - i) as i128 + scale * t.weight as i128;
                    wmax = wmax.max(wt.abs());
                    moves[idx(l, i)].push((idx(t.target, j), wt));
                }
            }
        }
    }
    let floor = -((states as i128 - 1) * wmax) - fmax;
    // None = +inf, Some(i128::MIN) = -inf
    const NEG: i128 = i128::MIN;
    let mut x: Vec<Option<i128>> = finals.clone();
    loop {
        let mut next = x.clone();
        for s in 0..states {
            if finals[s].is_some() {
                continue;
            }
            let l = s / (n + 1);
            let maximize = g.locations[l].owner == Owner::Max;
            let mut best: Option<Option<i128>> = None;
            for &(t, w) in &moves[s] {
                let cand = match x[t] {
                    None => None,
                    Some(NEG) => Some(NEG),
                    Some(v) => Some(v + w),
                };
                best = Some(match best {
                    None => cand,
                    Some(b) => pick(b, cand, maximize),
                });
            }
            let v = best.unwrap_or(None);
            next[s] = match v {
                Some(v) if v != NEG && v < floor => Some(NEG),
                other => other,
            };
        }
        if next == x {
            break;
        }
        x = next;
    }
    (0..nl)
        .map(|l| {
            (0..=n)
                .map(|i| match x[idx(l, i)] {
                    None => ExtValue::PosInf,
                    Some(NEG) => ExtValue::NegInf,
                    Some(v) => ExtValue::Finite(Rational::from_big((v as i64).into(), (n as i64).into())),
                })
                .collect()
        })
        .collect()
}

fn pick(a: Option<i128>, b: Option<i128>, maximize: bool) -> Option<i128> {
    // None is +inf and i128::MIN is -inf, so the integer order handles -inf
    match (a, b) {
        (Some(x), Some(y)) => Some(if maximize { x.max(y) } else { x.min(y) }),
        (None, _) | (_, None) if maximize => None,
        (None, o) | (o, None) => o,
    }
}

/// Right-hand side of the optimality equation at `(l, nu)` given the
/// value functions `values` (one per location, all on `[0, r]`).
///
/// For player locations the best over every transition and every delay;
/// the optimum over delays is reached at `nu`, `r` or a cutpoint in between
/// because the functions are piecewise affine and continuous on each piece.
pub fn bellman_rhs(g: &Ptg, values: &[CostFunction], l: usize, nu: &Rational, r: &Rational) -> ExtValue {
    let loc = &g.locations[l];
    if let Some(f) = &loc.final_cost {
        return ExtValue::Finite(f.eval(nu));
    }
    let maximize = loc.owner == Owner::Max;
    let rate = Rational::from_int(loc.rate);
    let mut best: Option<ExtValue> = None;
    for t in g.transitions.iter().filter(|t| t.source == l) {
        let f = &values[t.target];
        let mut times = vec![nu.clone()];
        if !loc.urgent {
            times.push(r.clone());
            times.extend(f.cutpoints().iter().filter(|c| *c > nu && *c < r).cloned());
        }
        for u in times {
            let at = f.evaluate(&u).expect("value functions cover [0, r]");
            let cand = at.plus(&(&rate * &(&u - nu) + Rational::from_int(t.weight)));
            best = Some(match best {
                None => cand,
                Some(b) if maximize => b.max(cand),
                Some(b) => b.min(cand),
            });
        }
    }
    best.unwrap_or(ExtValue::PosInf)
}

/// Random rationals in `[0, r]` with denominators up to 97, deterministic in `seed`.
pub fn random_points(seed: u64, r: &Rational, count: usize) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let den = rng.gen_range(1..=97i64);
            let num = rng.gen_range(0..=den);
            Rational::new(num, den) * r
        })
        .collect()
}
