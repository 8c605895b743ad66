//! Executable semantics: configurations, timed moves, plays and their prices,
//! strategy-driven simulation and random adversaries.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::costfn::{ExtValue, Rational};
use crate::model::{Arena, Owner, Ptg, Sptg};
use crate::sptg::{poss_cp, FpStrategy, LocationStrategy, Move, SwitchingStrategy};

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Configuration {
    pub location: usize,
    pub clock: Rational,
}

impl Configuration {
    pub fn new(location: usize, clock: Rational) -> Self {
        Configuration { location, clock }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct StepRecord {
    pub delay: Rational,
    pub transition: usize,
    pub cost: Rational,
    pub to: Configuration,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Play {
    pub start: Configuration,
    pub steps: Vec<StepRecord>,
}

impl Play {
    pub fn new(start: Configuration) -> Self {
        Play { start, steps: vec![] }
    }

    pub fn last(&self) -> &Configuration {
        self.steps.last().map_or(&self.start, |s| &s.to)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Sum of the step costs, without any final cost.
    pub fn prefix_cost(&self) -> Rational {
        self.steps.iter().map(|s| s.cost.clone()).sum()
    }

    pub fn is_completed(&self, g: &Ptg) -> bool {
        g.locations[self.last().location].is_final()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlayError {
    #[error("transition {transition} does not leave location {location}")]
    WrongSource { location: String, transition: usize },
    #[error("negative delay {0}")]
    NegativeDelay(Rational),
    #[error("location {0} is urgent but the delay is {1}")]
    Urgency(String, Rational),
    #[error("guard {guard} of transition {transition} violated at clock {clock}")]
    Guard { transition: usize, guard: String, clock: Rational },
    #[error("{player} strategy has no move at ({location}, {clock})")]
    NoMove { player: String, location: String, clock: Rational },
    #[error("{player} strategy proposed an illegal move at {location}: {source}")]
    Illegal {
        player: String,
        location: String,
        #[source]
        source: Box<PlayError>,
    },
}

/// One `(t, δ)` move from `s`, with its cost `π(δ) + t·π(ℓ)`.
pub fn step(g: &Ptg, s: &Configuration, t: &Rational, delta: usize) -> Result<(Configuration, Rational), PlayError> {
    let loc = &g.locations[s.location];
    let tr = &g.transitions[delta];
    if tr.source != s.location {
        return Err(PlayError::WrongSource { location: loc.id.clone(), transition: delta });
    }
    if t.is_negative() {
        return Err(PlayError::NegativeDelay(t.clone()));
    }
    if loc.urgent && !t.is_zero() {
        return Err(PlayError::Urgency(loc.id.clone(), t.clone()));
    }
    let clock = &s.clock + t;
    if !tr.guard.contains(&clock) {
        return Err(PlayError::Guard { transition: delta, guard: tr.guard.to_string(), clock });
    }
    let cost = Rational::from_int(tr.weight) + t * Rational::from_int(loc.rate);
    let next = Configuration::new(tr.target, if tr.reset { Rational::zero() } else { clock });
    Ok((next, cost))
}

/// Price of a play: step costs plus the final cost, or `+inf` when it does not end in a final location.
pub fn play_cost(g: &Ptg, play: &Play) -> ExtValue {
    let end = play.last();
    match &g.locations[end.location].final_cost {
        Some(phi) if g.locations[end.location].is_final() => ExtValue::Finite(play.prefix_cost() + phi.eval(&end.clock)),
        _ => ExtValue::PosInf,
    }
}

/// A way of picking moves from the history so far.
pub trait Strategy {
    /// `(delay, transition)` at the last configuration of `play`, or `None` when undefined.
    fn choose(&mut self, play: &Play) -> Option<(Rational, usize)>;
}

impl Strategy for FpStrategy {
    fn choose(&mut self, play: &Play) -> Option<(Rational, usize)> {
        let s = play.last();
        let m = self.decide(s.location, &s.clock)?;
        Some((m.delay(&s.clock), m.edge()))
    }
}

impl Strategy for SwitchingStrategy {
    fn choose(&mut self, play: &Play) -> Option<(Rational, usize)> {
        let s = play.last();
        let m = self.decide(s.location, &s.clock, play.len() as u64)?;
        Some((m.delay(&s.clock), m.edge()))
    }
}

impl<F: FnMut(&Play) -> Option<(Rational, usize)>> Strategy for F {
    fn choose(&mut self, play: &Play) -> Option<(Rational, usize)> {
        self(play)
    }
}

/// Horizon used when none is given: `4K + 4|L|`.
pub fn default_horizon(k: u64, locations: usize) -> usize {
    (4 * k as usize).saturating_add(4 * locations)
}

/// Plays the two strategies against each other from `s0` for at most `horizon` steps.
pub fn simulate(
    g: &Ptg,
    s0: Configuration,
    min: &mut dyn Strategy,
    max: &mut dyn Strategy,
    horizon: usize,
) -> Result<Play, PlayError> {
    let mut play = Play::new(s0);
    while play.len() < horizon {
        let s = play.last().clone();
        let loc = &g.locations[s.location];
        let (player, strat): (&str, &mut dyn Strategy) = match loc.owner {
            Owner::Final => break,
            Owner::Min => ("Min", &mut *min),
            Owner::Max => ("Max", &mut *max),
        };
        let Some((t, delta)) = strat.choose(&play) else {
            if g.outgoing(s.location).next().is_none() {
                break;
            }
            return Err(PlayError::NoMove { player: player.into(), location: loc.id.clone(), clock: s.clock });
        };
        let (to, cost) = step(g, &s, &t, delta).map_err(|e| PlayError::Illegal {
            player: player.into(),
            location: loc.id.clone(),
            source: Box::new(e),
        })?;
        play.steps.push(StepRecord { delay: t, transition: delta, cost, to });
    }
    Ok(play)
}

/// Checks that `s` prescribes a legal move for every location of `owner` at every clock value of `[0, r]`.
pub fn validate_fp(g: &Sptg, owner: Owner, s: &FpStrategy) -> Result<(), String> {
    let r = g.r();
    for (v, loc) in g.locations.iter().enumerate() {
        if loc.owner != owner {
            continue;
        }
        let Some(table) = s.locations.get(v).and_then(Option::as_ref) else {
            return Err(format!("no table for {}", loc.id));
        };
        if table.cuts.first() != Some(&Rational::zero()) || table.cuts.last() != Some(r) {
            return Err(format!("table of {} does not cover [0,{r}]", loc.id));
        }
        if !table.waits_forward() {
            return Err(format!("table of {} waits backwards", loc.id));
        }
        for m in table.at_cut.iter().chain(&table.between) {
            let tr = g.transitions.get(m.edge()).ok_or_else(|| format!("unknown transition {}", m.edge()))?;
            if tr.source != v {
                return Err(format!("transition {} does not leave {}", m.edge(), loc.id));
            }
            if let Move::Wait { until, .. } = m {
                if until > r {
                    return Err(format!("{} waits past {r}", loc.id));
                }
                if loc.urgent {
                    return Err(format!("{} is urgent but waits", loc.id));
                }
            }
        }
    }
    Ok(())
}

/// A random legal FP-strategy for `owner` on a simple game, deterministic in `seed`.
///
/// Breakpoints are drawn from the candidate cutpoints of the game; waits end at
/// a later breakpoint or at the midpoint of a later interval.
pub fn random_fp_strategy(g: &Sptg, owner: Owner, seed: u64) -> FpStrategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = g.r().clone();
    let zero = Rational::zero();
    let pool = poss_cp(&Arena::from_sptg(g), &zero, &r);
    let locations = g
        .locations
        .iter()
        .enumerate()
        .map(|(v, loc)| {
            if loc.owner != owner {
                return None;
            }
            let out: Vec<usize> = g.outgoing(v).map(|(i, _)| i).collect();
            if out.is_empty() {
                return None;
            }
            let mut cuts: Vec<Rational> = pool.choose_multiple(&mut rng, 3).cloned().collect();
            cuts.push(zero.clone());
            cuts.push(r.clone());
            cuts.sort();
            cuts.dedup();
            let pick = |rng: &mut ChaCha8Rng, from: usize, strict: bool| -> Move {
                let edge = *out.choose(rng).unwrap();
                // waiting targets: later breakpoints and midpoints of later intervals
                let mut targets: Vec<Rational> = Vec::new();
                for j in from..cuts.len() {
                    if !(strict && j == from) {
                        targets.push(cuts[j].clone());
                    }
                    if j + 1 < cuts.len() {
                        targets.push(Rational::midpoint(&cuts[j], &cuts[j + 1]));
                    }
                }
                if strict {
                    targets.retain(|u| u > &cuts[from]);
                }
                if loc.urgent || targets.is_empty() || rng.gen_bool(0.5) {
                    Move::Now { edge }
                } else {
                    Move::Wait { until: targets.choose(rng).unwrap().clone(), edge }
                }
            };
            let at_cut = (0..cuts.len()).map(|i| pick(&mut rng, i, true)).collect();
            let between = (0..cuts.len() - 1)
                .map(|i| {
                    let m = pick(&mut rng, i + 1, false);
                    // interval moves may only wait to points at or beyond its right end
                    match m {
                        Move::Wait { until, edge } if until < cuts[i + 1] => Move::Wait { until: cuts[i + 1].clone(), edge },
                        m => m,
                    }
                })
                .collect();
            Some(LocationStrategy { cuts, at_cut, between })
        })
        .collect();
    FpStrategy { locations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sptg::solve_sptg;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn worked_play_price() {
        // (l2,0) -1/4,t23-> (l3,1/4) -1/2,t37-> (l7,3/4) -> ... price 0 - 3.5 + 6 - 12 = -9.5
        let g = fixtures::simple_seven();
        let idx = |s: usize, t: usize| g.transitions.iter().position(|tr| tr.source == s && tr.target == t).unwrap();
        let mut play = Play::new(Configuration::new(0, q("0")));
        let mut cur = play.start.clone();
        for (t, s, d) in [("0", 0, 1), ("1/4", 1, 2), ("0", 2, 6), ("3/4", 6, 7)] {
            let (to, cost) = step(&g, &cur, &q(t), idx(s, d)).unwrap();
            play.steps.push(StepRecord { delay: q(t), transition: idx(s, d), cost, to: to.clone() });
            cur = to;
        }
        assert_eq!(play_cost(&g, &play), ExtValue::Finite(q("-19/2")));
    }

    #[test]
    fn step_errors_and_reset() {
        let g = fixtures::creeping_reset();
        let (s, c) = step(&g, &Configuration::new(1, q("1")), &q("0"), 1).unwrap();
        assert_eq!(s, Configuration::new(0, q("0")));
        assert_eq!(c, q("0"));
        assert!(matches!(step(&g, &Configuration::new(1, q("1/2")), &q("0"), 1), Err(PlayError::Guard { .. })));
        assert!(matches!(step(&g, &Configuration::new(0, q("0")), &q("0"), 1), Err(PlayError::WrongSource { .. })));
        assert!(matches!(step(&g, &Configuration::new(0, q("0")), &q("-1"), 0), Err(PlayError::NegativeDelay(_))));
        let mut urgent = fixtures::simple_seven();
        urgent.locations[0].urgent = true;
        assert!(matches!(step(&urgent, &Configuration::new(0, q("0")), &q("1/2"), 0), Err(PlayError::Urgency(..))));
    }

    #[test]
    fn stuck_play_costs_plus_infinity() {
        let g = fixtures::simple_seven();
        let play = Play::new(Configuration::new(0, q("0")));
        assert_eq!(play_cost(&g, &play), ExtValue::PosInf);
        let done = Play::new(Configuration::new(7, q("1/3")));
        assert_eq!(play_cost(&g, &done), ExtValue::int(0));
    }

    #[test]
    fn simple_seven_max_waits_at_l4() {
        let g = Sptg::new(fixtures::simple_seven()).unwrap();
        let res = solve_sptg(&g).unwrap();
        let mut min = res.min_strategy.clone();
        let mut max = res.max_strategy.clone();
        for nu in ["0", "1/3", "1"] {
            let play = simulate(&g, Configuration::new(3, q(nu)), &mut min, &mut max, 10).unwrap();
            assert_eq!(play_cost(&g, &play), ExtValue::Finite(q("-3") * q(nu) - q("4")));
        }
        let play = simulate(&g, Configuration::new(3, q("0")), &mut min, &mut max, 0).unwrap();
        assert!(play.is_empty());
    }

    #[test]
    fn untimed_loop_switching_secures_minus_w() {
        let g = Sptg::new(fixtures::untimed_loop(5)).unwrap();
        let res = solve_sptg(&g).unwrap();
        let mut min = res.min_strategy.clone();
        let mut to_target = |p: &Play| (p.last().location == 0).then(|| (q("0"), 0));
        let h = default_horizon(res.min_strategy.k, 3);
        let play = simulate(&g, Configuration::new(1, q("0")), &mut min, &mut to_target, h).unwrap();
        assert_eq!(play_cost(&g, &play), ExtValue::int(-5));
        // Max looping forever: the switch forces the exit
        let mut looping = |_: &Play| Some((q("0"), 1));
        let play = simulate(&g, Configuration::new(1, q("0")), &mut min, &mut looping, h).unwrap();
        assert!(play.is_completed(&g));
        assert!(play_cost(&g, &play) <= ExtValue::int(-5));
    }

    #[test]
    fn random_strategies_are_legal_and_reproducible() {
        let g = Sptg::new(fixtures::simple_seven()).unwrap();
        for seed in 0..200 {
            let s = random_fp_strategy(&g, Owner::Max, seed);
            validate_fp(&g, Owner::Max, &s).unwrap();
            let m = random_fp_strategy(&g, Owner::Min, seed);
            validate_fp(&g, Owner::Min, &m).unwrap();
        }
        assert_eq!(random_fp_strategy(&g, Owner::Max, 7), random_fp_strategy(&g, Owner::Max, 7));
    }

    #[test]
    fn single_transition_strategy_is_forced() {
        let g = Sptg::new(Ptg::new(
            vec![crate::model::Location::min("a", 1), crate::model::Location::target("f", crate::costfn::AffineFn::ints(0, 0))],
            vec![crate::model::Transition::new(0, 1, 0)],
            1,
        ))
        .unwrap();
        for seed in 0..3 {
            let s = random_fp_strategy(&g, Owner::Min, seed);
            assert!(s.locations[0].as_ref().unwrap().at_cut.iter().all(|m| m.edge() == 0));
        }
    }
}
