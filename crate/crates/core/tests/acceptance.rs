//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::time::{Duration, Instant};

use sptg::costfn::{CostFunction, ExtValue, Rational};
use sptg::fixtures;
use sptg::model::{Arena, Location, Node, Owner, Player, Ptg, Sptg, Transition};
use sptg::pipeline::nra::{nra_check, NraOptions, NraVerdict};
use sptg::pipeline::solve::find_reset_cycle;
use sptg::pipeline::{region_ptg, solve_nra};
use sptg::play::{default_horizon, play_cost, random_fp_strategy, simulate, Configuration};
use sptg::sptg::{cutpoint_bound, solve_sptg, ValueResult};
use sptg::testkit::{bellman_rhs, discretized_values, random_points, random_ptg, random_sptg, RandomGameParams};
use sptg::urgent::{bounded_values, cutoff_threshold, iteration_bound, solve_instant, solve_instant_with, InstantOptions};

fn q(s: &str) -> Rational {
    s.parse().expect("rational literal")
}

fn fin(s: &str) -> ExtValue {
    ExtValue::Finite(q(s))
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

/// Games solved by suites 1 to 5, kept for the residual check.
#[derive(Default)]
struct Solved {
    games: Vec<(String, Ptg, ValueResult)>,
}

fn solve(g: &Ptg) -> ValueResult {
    solve_sptg(&Sptg::new(g.clone()).expect("simple game")).expect("solver succeeds")
}

fn criterion_1(solved: &mut Solved) -> Outcome {
    let t = Instant::now();
    let g = fixtures::simple_seven();
    let r = solve(&g);
    let elapsed = t.elapsed();
    let mut problems = Vec::new();
    let l1 = r.value("l1").expect("l1");
    let cuts: Vec<Rational> = ["0", "1/4", "1/2", "3/4", "9/10", "1"].iter().map(|s| q(s)).collect();
    let vals: Vec<ExtValue> = ["-19/2", "-6", "-11/2", "-2", "-1/5", "0"].iter().map(|s| fin(s)).collect();
    if l1.cutpoints() != cuts.as_slice() || l1.point_values() != vals.as_slice() {
        problems.push(format!("l1 cutpoints {:?}", l1.cutpoints().iter().map(|c| c.to_string()).collect::<Vec<_>>()));
    }
    let affine = |name: &str, a: i64, b: i64| {
        let f = r.value(name).expect("location");
        CostFunction::affine(Rational::zero(), Rational::one(), sptg::costfn::AffineFn::ints(a, b)) == f.canonicalize()
    };
    if !affine("l4", -3, -4) {
        problems.push("l4 is not -3x-4".into());
    }
    if !affine("l7", 16, -16) {
        problems.push("l7 is not 16x-16".into());
    }
    for (name, at, v) in [("l3", "0", "-10"), ("l5", "0", "-14"), ("l6", "0", "-11"), ("l2", "1", "1")] {
        let got = r.value(name).expect("location").evaluate(&q(at)).expect("in domain");
        if got != fin(v) {
            problems.push(format!("{name}({at}) = {got}, expected {v}"));
        }
    }
    if elapsed > Duration::from_secs(1) {
        problems.push(format!("took {elapsed:?}"));
    }
    solved.games.push(("simple_seven".into(), g, r));
    if problems.is_empty() {
        pass(format!("7 value functions exact, {elapsed:.2?}"))
    } else {
        fail(problems.join("; "))
    }
}

fn criterion_2() -> Outcome {
    let r = solve(&fixtures::simple_seven());
    let expect: Vec<Rational> = ["1", "3/4", "1/2", "1/4", "0"].iter().map(|s| q(s)).collect();
    let mut got = vec![Rational::one()];
    got.extend(r.sweep_endpoints.iter().cloned());
    got.dedup();
    if got == expect {
        pass("r = 1, 3/4, 1/2, 1/4, 0")
    } else {
        fail(format!("visited {}", got.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")))
    }
}

fn criterion_3(solved: &mut Solved) -> Outcome {
    let mut details = Vec::new();
    for w in [1i64, 10, 100, 1000] {
        let g = fixtures::untimed_loop(w);
        let t = Instant::now();
        let r = solve(&g);
        let elapsed = t.elapsed();
        for name in ["l1", "l2"] {
            let f = r.value(name).expect("location");
            if f.canonicalize() != CostFunction::constant(Rational::zero(), Rational::one(), ExtValue::int(-w)) {
                return fail(format!("W={w}: {name} is not constant -{w}"));
            }
        }
        // the instant solve at every sweep point must respect the iteration bound
        let a = Arena::from_sptg(&Sptg::new(g.clone()).expect("simple"));
        let x = solve_instant(&a.all_urgent(), &Rational::zero()).expect("instant");
        let nf = 1u64;
        let n = g.locations.len() as u64;
        let bound = nf * n * (2 * (n - 1) * w as u64 + 1) + n;
        if x.iterations > bound || r.stats.max_iterations > bound {
            return fail(format!("W={w}: {} iterations over bound {bound}", x.iterations.max(r.stats.max_iterations)));
        }
        if w == 1000 && elapsed > Duration::from_secs(2) {
            return fail(format!("W=1000 took {elapsed:?}"));
        }
        details.push(format!("W={w}: {} it (bound {bound}) {elapsed:.2?}", r.stats.max_iterations));
        solved.games.push((format!("untimed_loop W={w}"), g, r));
    }
    pass(details.join(", "))
}

/// Slope bounds from the rates: on every piece of a finite value function the
/// slope lies between `-max rate` and `-min rate` over non-final locations.
fn slope_bounds_hold(g: &Ptg, f: &CostFunction) -> bool {
    let rates: Vec<i64> = g.locations.iter().filter(|l| !l.is_final()).map(|l| l.rate).collect();
    let finals: Vec<Rational> =
        g.locations.iter().filter_map(|l| l.final_cost.as_ref()).map(|c| c.slope.clone()).collect();
    let lo = rates.iter().map(|r| -Rational::from_int(*r)).chain(finals.iter().cloned()).min();
    let hi = rates.iter().map(|r| -Rational::from_int(*r)).chain(finals.iter().cloned()).max();
    let (Some(lo), Some(hi)) = (lo, hi) else { return true };
    f.pieces().iter().filter_map(|p| p.slope()).all(|s| s >= &lo && s <= &hi)
}

fn criterion_4(solved: &mut Solved) -> Outcome {
    let p = RandomGameParams::default();
    let mut worst = 0usize;
    for seed in 0..500u64 {
        let g = random_sptg(seed, &p);
        let s = Sptg::new(g.clone()).expect("simple");
        let r = match solve_sptg(&s) {
            Ok(r) => r,
            Err(e) => return fail(format!("seed {seed}: {e}")),
        };
        let bound = cutpoint_bound(&Arena::from_sptg(&s));
        for (l, f) in r.values.iter().enumerate() {
            if !f.is_finite_everywhere() {
                continue;
            }
            if !f.is_continuous() {
                return fail(format!("seed {seed}: {} discontinuous", g.locations[l].id));
            }
            if !slope_bounds_hold(&g, f) {
                return fail(format!("seed {seed}: {} slope outside the rate bounds", g.locations[l].id));
            }
            if f.cutpoints().len() as u128 > bound {
                return fail(format!("seed {seed}: {} has {} cutpoints > {bound}", g.locations[l].id, f.cutpoints().len()));
            }
            worst = worst.max(f.cutpoints().len());
        }
        solved.games.push((format!("random seed {seed}"), g, r));
    }
    pass(format!("500 games, at most {worst} cutpoints per location"))
}

fn criterion_5(solved: &mut Solved) -> Outcome {
    const N: usize = 64;
    let p = RandomGameParams { max_locations: 4, ..RandomGameParams::default() };
    let t = Instant::now();
    let (mut checked, mut exact) = (0usize, 0usize);
    for seed in 0..200u64 {
        let g = random_sptg(10_000 + seed, &p);
        let r = solve(&g);
        let d = discretized_values(&g, N);
        let c = g.constants();
        let tol = Rational::new(c.w_l + c.n as i64 * c.w_t, N as i64);
        for (l, f) in r.values.iter().enumerate() {
            for (i, dv) in d[l].iter().enumerate() {
                let x = Rational::new(i as i64, N as i64);
                let v = f.evaluate(&x).expect("grid point in domain");
                checked += 1;
                let ok = match (&v, dv) {
                    (ExtValue::Finite(a), ExtValue::Finite(b)) => {
                        let diff = (a - b).abs();
                        // exact where the grid point is a cutpoint of the solution
                        // and the discrete values bend there as well
                        if f.cutpoints().contains(&x) && grid_bends(&d[l], i) {
                            exact += 1;
                            diff.is_zero()
                        } else {
                            diff <= tol
                        }
                    }
                    (a, b) => a == b,
                };
                if !ok {
                    return fail(format!("seed {}: {} at {x}: solver {v}, grid {dv}", 10_000 + seed, g.locations[l].id));
                }
            }
        }
        solved.games.push((format!("oracle seed {}", 10_000 + seed), g, r));
    }
    let elapsed = t.elapsed();
    if elapsed > Duration::from_secs(60) {
        return fail(format!("took {elapsed:?}"));
    }
    pass(format!("{checked} grid values within tolerance, {exact} exact at shared cutpoints, {elapsed:.2?}"))
}

/// True when the discrete values change slope at grid index `i`, or `i` is an end.
fn grid_bends(d: &[ExtValue], i: usize) -> bool {
    if i == 0 || i + 1 == d.len() {
        return true;
    }
    match (&d[i - 1], &d[i], &d[i + 1]) {
        (ExtValue::Finite(a), ExtValue::Finite(b), ExtValue::Finite(c)) => (b - a) != (c - b),
        _ => false,
    }
}

fn criterion_6(solved: &Solved) -> Outcome {
    let mut points = 0usize;
    for (k, (name, g, r)) in solved.games.iter().enumerate() {
        let rr = Rational::one();
        for l in 0..g.locations.len() {
            for nu in random_points((k * 97 + l) as u64, &rr, 100) {
                let lhs = r.values[l].evaluate(&nu).expect("in domain");
                let rhs = bellman_rhs(g, &r.values, l, &nu, &rr);
                points += 1;
                if lhs != rhs {
                    return fail(format!("{name}: {} at {nu}: value {lhs}, one-step optimum {rhs}", g.locations[l].id));
                }
            }
        }
    }
    pass(format!("zero residual at {points} points over {} games", solved.games.len()))
}

fn sandwich(g: &Ptg, r: &ValueResult, adversaries: u64, seed_base: u64) -> Result<usize, String> {
    let s = Sptg::new(g.clone()).expect("simple");
    let horizon = default_horizon(r.min_strategy.k, g.locations.len());
    let mut plays = 0usize;
    for l in 0..g.locations.len() {
        if g.locations[l].is_final() {
            continue;
        }
        let mut starts = vec![Rational::zero(), Rational::one()];
        starts.extend(random_points(seed_base + l as u64, &Rational::one(), 2));
        for nu in starts {
            let v = r.values[l].evaluate(&nu).expect("in domain");
            if !v.is_finite() {
                continue;
            }
            for a in 0..adversaries {
                let seed = seed_base * 1000 + a;
                let start = Configuration::new(l, nu.clone());
                let mut min = r.min_strategy.clone();
                let mut max_adv = random_fp_strategy(&s, Owner::Max, seed);
                let p = simulate(g, start.clone(), &mut min, &mut max_adv, horizon).map_err(|e| e.to_string())?;
                let c = play_cost(g, &p);
                if c > v {
                    return Err(format!("{} at {nu}: optimal Min paid {c} > {v} (seed {seed})", g.locations[l].id));
                }
                let mut max = r.max_strategy.clone();
                let mut min_adv = random_fp_strategy(&s, Owner::Min, seed);
                let p = simulate(g, start, &mut min_adv, &mut max, horizon).map_err(|e| e.to_string())?;
                if p.is_completed(g) {
                    let c = play_cost(g, &p);
                    if c < v {
                        return Err(format!("{} at {nu}: optimal Max got {c} < {v} (seed {seed})", g.locations[l].id));
                    }
                }
                plays += 2;
            }
        }
    }
    Ok(plays)
}

fn criterion_7() -> Outcome {
    let mut plays = 0usize;
    let g = fixtures::simple_seven();
    match sandwich(&g, &solve(&g), 200, 1) {
        Ok(n) => plays += n,
        Err(e) => return fail(format!("simple_seven: {e}")),
    }
    let p = RandomGameParams::default();
    for seed in 0..50u64 {
        let g = random_sptg(20_000 + seed, &p);
        match sandwich(&g, &solve(&g), 200, 2 + seed) {
            Ok(n) => plays += n,
            Err(e) => return fail(format!("seed {}: {e}", 20_000 + seed)),
        }
    }
    pass(format!("{plays} simulated plays, zero violations"))
}

/// Random games with resets that the checker certifies for kappa = 1.
fn nra_games(count: usize) -> Vec<(u64, Ptg)> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        let g = random_ptg(seed, 2 + (seed % 2) as usize, 2);
        seed += 1;
        let rg = region_ptg(&g);
        if find_reset_cycle(&rg).is_none() {
            continue;
        }
        if nra_check(&g, Some(&Rational::one())).verdict == NraVerdict::Holds {
            out.push((seed - 1, g));
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let f9 = match solve_nra(&fixtures::unit_reset(), &Rational::one(), &NraOptions::default()) {
        Ok(s) => s,
        Err(e) => return fail(format!("unit_reset: {e}")),
    };
    let v = f9.solution.value("l0").expect("l0").evaluate(&Rational::zero()).expect("in domain");
    if v != ExtValue::int(0) {
        return fail(format!("unit_reset value at (l0,0) is {v}"));
    }
    if !matches!(nra_check(&fixtures::creeping_reset(), None).verdict, NraVerdict::Violated { .. }) {
        return fail("creeping_reset not rejected");
    }
    let t = Instant::now();
    let (mut total, mut latest) = (0u64, 0u64);
    for (seed, g) in nra_games(30) {
        let budget = sptg::pipeline::nra::nra_budget(&g, &Rational::one()).expect("kappa > 0");
        let k = budget.copies;
        // full unfoldings, no early stop
        let run = |c: u64| {
            solve_nra(&g, &Rational::one(), &NraOptions { copies: Some(c), early_stop: false, ..NraOptions::default() })
        };
        let (a, b) = match (run(k), run(k + 3)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return fail(format!("seed {seed}: {e}")),
        };
        if a.solution.values != b.solution.values {
            return fail(format!("seed {seed}: {k} and {} copies differ", k + 3));
        }
        total += 2 * k + 3;
        latest = latest.max(a.stable_after.unwrap_or(k));
    }
    pass(format!(
        "unit_reset value 0, creeping_reset rejected, 30 random games equal at k and k+3 copies ({total} copies solved, \
         values settle by copy {latest}, {:.2?})",
        t.elapsed()
    ))
}

fn criterion_9() -> Outcome {
    let f = |a: &mut Arena| a.add_node("f", Node::Target(sptg::costfn::Piece::Affine(sptg::costfn::AffineFn::ints(0, 0))));
    let player = |p: Player| Node::Player { player: p, rate: Rational::zero(), urgent: true };
    // +inf: Max can avoid the target forever
    let mut a = Arena::new(Rational::one());
    let m = a.add_node("m", player(Player::Max));
    let t = f(&mut a);
    a.add_edge(m, m, 1, None);
    a.add_edge(m, t, 0, None);
    let x = solve_instant(&a, &Rational::one()).expect("solves");
    if x.values[m] != ExtValue::PosInf {
        return fail(format!("Max loop: {}", x.values[m]));
    }
    // +inf: no path to the target
    let mut a = Arena::new(Rational::one());
    let n = a.add_node("n", player(Player::Min));
    f(&mut a);
    a.add_edge(n, n, 0, None);
    if solve_instant(&a, &Rational::zero()).expect("solves").values[n] != ExtValue::PosInf {
        return fail("unreachable target not +inf");
    }
    // -inf: Max at v can only close the negative cycle; the cutoff fires on the first bounded value below the threshold
    let mut checked = Vec::new();
    for w in [1i64, 3] {
        let mut a = Arena::new(Rational::one());
        let u = a.add_node("u", player(Player::Min));
        let v = a.add_node("v", player(Player::Max));
        let t = f(&mut a);
        a.add_edge(u, v, -w, None);
        a.add_edge(v, u, 0, None);
        a.add_edge(u, t, 0, None);
        let x = solve_instant_with(&a, &Rational::zero(), &InstantOptions { trace: true, ..InstantOptions::default() }).expect("solves");
        if x.values[u] != ExtValue::NegInf {
            return fail(format!("negative cycle w={w}: {}", x.values[u]));
        }
        let threshold = ExtValue::Finite(cutoff_threshold(&a));
        let first_below = (1..=iteration_bound(&a) as usize)
            .find(|&i| bounded_values(&a, &Rational::zero(), i).expect("bounded")[u] < threshold)
            .map(|i| i as u64);
        if x.cutoff_at[u] != first_below {
            return fail(format!("w={w}: cutoff at {:?}, first bounded value below {threshold} at {first_below:?}", x.cutoff_at[u]));
        }
        checked.push(format!("w={w} cut at step {}", first_below.unwrap_or(0)));
    }
    // the same classification through the game model
    let g = Ptg::new(
        vec![Location::min("a", 0).urgent(), Location::max("b", 0).urgent(), Location::target("f", sptg::costfn::AffineFn::ints(0, 0))],
        vec![Transition::new(0, 1, -2), Transition::new(1, 0, 0), Transition::new(0, 2, 0)],
        1,
    );
    let r = solve(&g);
    if r.values[0].evaluate(&Rational::zero()).expect("domain") != ExtValue::NegInf || r.minus_infinity.is_none() {
        return fail("game-level -inf not reported");
    }
    pass(format!("+inf and -inf classified; {}", checked.join(", ")))
}

fn main() {
    let _ = env_logger::builder().is_test(true).try_init();
    let mut solved = Solved::default();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut run = |i: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!("criterion {i} [{}] {name}: {} ({:.2?})", if o.ok { "PASS" } else { "FAIL" }, o.detail, t.elapsed());
        results.push((i, name, o));
    };
    run(1, "simple_seven golden values", &mut || criterion_1(&mut solved));
    run(2, "sweep endpoints", &mut criterion_2);
    run(3, "untimed family", &mut || criterion_3(&mut solved));
    run(4, "continuity and slope bounds", &mut || criterion_4(&mut solved));
    run(5, "discretized oracle", &mut || criterion_5(&mut solved));
    run(6, "bellman residual", &mut || criterion_6(&solved));
    run(7, "strategy sandwich", &mut criterion_7);
    run(8, "region and nra pipeline", &mut criterion_8);
    run(9, "infinite values", &mut criterion_9);
    let failed: Vec<usize> = results.iter().filter(|r| !r.2.ok).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all 9 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
