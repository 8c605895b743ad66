//! Game graphs: priced timed games, their simple subclass, and the solver-side arena.

mod arena;

use std::fmt;

use serde::Serialize;

use crate::costfn::{AffineFn, Rational};

pub use arena::{attractor_ranks, Arena, Edge, Node, Player, Restriction};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Owner {
    Min,
    Max,
    Final,
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Owner::Min => "min",
            Owner::Max => "max",
            Owner::Final => "final",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Location {
    pub id: String,
    pub owner: Owner,
    /// Cost per time unit; ignored (kept 0) for final locations.
    pub rate: i64,
    pub urgent: bool,
    pub final_cost: Option<AffineFn>,
}

impl Location {
    pub fn min(id: &str, rate: i64) -> Self {
        Location { id: id.into(), owner: Owner::Min, rate, urgent: false, final_cost: None }
    }

    pub fn max(id: &str, rate: i64) -> Self {
        Location { id: id.into(), owner: Owner::Max, rate, urgent: false, final_cost: None }
    }

    pub fn target(id: &str, cost: AffineFn) -> Self {
        Location { id: id.into(), owner: Owner::Final, rate: 0, urgent: false, final_cost: Some(cost) }
    }

    pub fn urgent(mut self) -> Self {
        self.urgent = true;
        self
    }

    pub fn is_final(&self) -> bool {
        self.owner == Owner::Final
    }
}

/// An interval of clock values with rational endpoints.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Guard {
    pub lo: Rational,
    pub lo_closed: bool,
    pub hi: Rational,
    pub hi_closed: bool,
}

impl Guard {
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Guard { lo, lo_closed: true, hi, hi_closed: true }
    }

    pub fn point(v: Rational) -> Self {
        Guard::closed(v.clone(), v)
    }

    pub fn unit() -> Self {
        Guard::closed(Rational::zero(), Rational::one())
    }

    pub fn contains(&self, nu: &Rational) -> bool {
        let above = if self.lo_closed { nu >= &self.lo } else { nu > &self.lo };
        let below = if self.hi_closed { nu <= &self.hi } else { nu < &self.hi };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn is_closed(&self) -> bool {
        self.lo_closed && self.hi_closed
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Transition {
    pub source: usize,
    pub target: usize,
    pub guard: Guard,
    pub reset: bool,
    pub weight: i64,
}

impl Transition {
    /// A transition guarded by `[0, 1]`; use [`Transition::guarded`] for other clock bounds.
    pub fn new(source: usize, target: usize, weight: i64) -> Self {
        Transition { source, target, guard: Guard::unit(), reset: false, weight }
    }

    pub fn guarded(mut self, guard: Guard) -> Self {
        self.guard = guard;
        self
    }

    pub fn with_reset(mut self) -> Self {
        self.reset = true;
        self
    }
}

/// A one-clock priced timed game.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ptg {
    pub locations: Vec<Location>,
    pub transitions: Vec<Transition>,
    pub clock_bound: i64,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct GameConstants {
    pub w_t: i64,
    pub w_l: i64,
    pub w_fin: Rational,
    pub n: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub element: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.element, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid game: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("not a simple game: {0}")]
    NotSimple(String),
}

impl Ptg {
    pub fn new(locations: Vec<Location>, transitions: Vec<Transition>, clock_bound: i64) -> Self {
        Ptg { locations, transitions, clock_bound }
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.id == id)
    }

    pub fn outgoing(&self, loc: usize) -> impl Iterator<Item = (usize, &Transition)> {
        self.transitions.iter().enumerate().filter(move |(_, t)| t.source == loc)
    }

    pub fn has_resets(&self) -> bool {
        self.transitions.iter().any(|t| t.reset)
    }

    pub fn constants(&self) -> GameConstants {
        let m = Rational::from_int(self.clock_bound);
        let w_fin = self
            .locations
            .iter()
            .filter_map(|l| l.final_cost.as_ref())
            .map(|f| f.eval(&Rational::zero()).abs().max(f.eval(&m).abs()))
            .max()
            .unwrap_or_else(Rational::zero);
        GameConstants {
            w_t: self.transitions.iter().map(|t| t.weight.abs()).max().unwrap_or(0),
            w_l: self.locations.iter().filter(|l| !l.is_final()).map(|l| l.rate.abs()).max().unwrap_or(0),
            w_fin,
            n: self.locations.len(),
        }
    }

    /// Structural diagnostics; empty when every invariant holds.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let err = |element: String, message: &str| Diagnostic { severity: Severity::Error, element, message: message.into() };
        if self.locations.is_empty() {
            out.push(err("game".into(), "no locations"));
        }
        if self.clock_bound < 1 {
            out.push(err("clock_bound".into(), "clock bound must be a positive integer"));
        }
        for (i, l) in self.locations.iter().enumerate() {
            let el = format!("location {}", l.id);
            if self.locations[..i].iter().any(|o| o.id == l.id) {
                out.push(err(el.clone(), "duplicate location id"));
            }
            if l.is_final() {
                if l.final_cost.is_none() {
                    out.push(err(el.clone(), "final location without final cost"));
                }
                if l.urgent {
                    out.push(err(el.clone(), "final location marked urgent"));
                }
                if self.outgoing(i).next().is_some() {
                    out.push(err(el.clone(), "final location has outgoing transitions"));
                }
            } else if l.final_cost.is_some() {
                out.push(err(el.clone(), "final cost on a non-final location"));
            }
        }
        let m = Rational::from_int(self.clock_bound);
        let n = self.locations.len();
        for (k, t) in self.transitions.iter().enumerate() {
            let el = format!("transition #{k}");
            if t.source >= n || t.target >= n {
                out.push(err(el.clone(), "dangling location reference"));
                continue;
            }
            if t.guard.is_empty() {
                out.push(err(el.clone(), "empty guard"));
            }
            if t.guard.lo.is_negative() || t.guard.hi > m {
                out.push(err(el.clone(), "guard exceeds the clock bound"));
            }
        }
        if out.is_empty() {
            out.extend(self.deadlock_warnings());
        }
        out
    }

    /// A non-final location whose entry clock values may exceed every outgoing guard.
    fn deadlock_warnings(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (i, l) in self.locations.iter().enumerate() {
            if l.is_final() {
                continue;
            }
            // supremum of entry values, with closedness; clock 0 is always a possible start
            let mut entry = (Rational::zero(), true);
            for t in self.transitions.iter().filter(|t| t.target == i) {
                let cand = if t.reset { (Rational::zero(), true) } else { (t.guard.hi.clone(), t.guard.hi_closed) };
                if cand.0 > entry.0 || (cand.0 == entry.0 && cand.1) {
                    entry = cand;
                }
            }
            let exit = self
                .outgoing(i)
                .map(|(_, t)| (t.guard.hi.clone(), t.guard.hi_closed))
                .max_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
            let stuck = match exit {
                None => true,
                Some((hi, closed)) => entry.0 > hi || (entry.0 == hi && entry.1 && !closed),
            };
            if stuck {
                out.push(Diagnostic {
                    severity: Severity::Warning,
                    element: format!("location {}", l.id),
                    message: "possible deadlock: some entry clock value enables no transition".into(),
                });
            }
        }
        out
    }

    /// The shared `r` if the game is an r-SPTG: every guard `[0, r]`, no resets.
    pub fn simple_bound(&self) -> Option<Rational> {
        let mut r = None;
        for t in &self.transitions {
            if t.reset || !t.guard.is_closed() || !t.guard.lo.is_zero() {
                return None;
            }
            match &r {
                None => r = Some(t.guard.hi.clone()),
                Some(x) if *x != t.guard.hi => return None,
                _ => {}
            }
        }
        let r = r.unwrap_or_else(Rational::one);
        (r <= Rational::one()).then_some(r)
    }

    pub fn is_sptg(&self) -> bool {
        self.simple_bound().is_some()
    }
}

/// An r-SPTG: all guards `[0, r]` with one shared `r ≤ 1`, and no resets.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Sptg {
    ptg: Ptg,
    r: Rational,
}

impl Sptg {
    pub fn new(ptg: Ptg) -> Result<Self, ModelError> {
        let errors: Vec<Diagnostic> = ptg.validate().into_iter().filter(|d| d.severity == Severity::Error).collect();
        if !errors.is_empty() {
            return Err(ModelError::Invalid(errors));
        }
        let r = ptg
            .simple_bound()
            .ok_or_else(|| ModelError::NotSimple("guards must all be [0,r] without resets".into()))?;
        Ok(Sptg { ptg, r })
    }

    pub fn ptg(&self) -> &Ptg {
        &self.ptg
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn into_ptg(self) -> Ptg {
        self.ptg
    }
}

impl std::ops::Deref for Sptg {
    type Target = Ptg;
    fn deref(&self) -> &Ptg {
        &self.ptg
    }
}
