//! Line-oriented text format for games.
//!
//! ```text
//! clock_bound 1
//! location l1 owner=min rate=-2
//! location lf owner=final final_cost=0*x+0
//! transition l1 -> lf guard=[0,1] weight=0
//! ```
//!
//! `#` starts a comment; transitions may name locations declared later.

use std::fmt;
use std::fmt::Write as _;

use crate::costfn::{AffineFn, Rational};
use crate::model::{Guard, Location, Owner, Ptg, Severity, Transition};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    /// 1-based line; 0 for errors about the whole file.
    pub line: usize,
    /// 1-based column of the offending token.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}:{}: {}", self.line, self.column, self.message)
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ParseErrors(pub Vec<ParseError>);

#[derive(Clone, Copy)]
struct Tok<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Tok<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.column, message: message.into() }
    }

    fn expected(&self, what: &str) -> ParseError {
        self.error(format!("expected {what}, found `{}`", self.text))
    }
}

fn tokens(line: &str, lineno: usize) -> Vec<Tok<'_>> {
    // a comment starts at a `#` that begins a token
    let mut prev_space = true;
    let cut = line
        .char_indices()
        .find(|&(_, ch)| {
            let hit = ch == '#' && prev_space;
            prev_space = ch.is_whitespace();
            hit
        })
        .map_or(line.len(), |(i, _)| i);
    let code = &line[..cut];
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in code.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Tok { text: &code[s..i], line: lineno, column: code[..s].chars().count() + 1 });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Tok { text: &code[s..], line: lineno, column: code[..s].chars().count() + 1 });
    }
    out
}

fn integer(tok: &Tok, s: &str) -> Result<i64, ParseError> {
    s.parse().map_err(|_| tok.error(format!("expected an integer, found `{s}`")))
}

/// `a*x+b`, `a*x-b`, `a*x` or `b`.
pub fn parse_affine(s: &str) -> Option<AffineFn> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(pos) = t.find("*x") else {
        return t.parse().ok().map(AffineFn::constant);
    };
    let slope: Rational = t[..pos].parse().ok()?;
    let rest = &t[pos + 2..];
    let intercept: Rational = match rest.strip_prefix('+') {
        _ if rest.is_empty() => Rational::zero(),
        Some(r) => r.parse().ok()?,
        None => rest.strip_prefix('-').and_then(|r| r.parse::<Rational>().ok()).map(|r| -r)?,
    };
    Some(AffineFn::new(slope, intercept))
}

/// `[lo,hi]`, `(lo,hi]`, `[lo,hi)` or `(lo,hi)`.
pub fn parse_guard(s: &str) -> Option<Guard> {
    let lo_closed = match s.chars().next()? {
        '[' => true,
        '(' => false,
        _ => return None,
    };
    let hi_closed = match s.chars().last()? {
        ']' => true,
        ')' => false,
        _ => return None,
    };
    let (lo, hi) = s.get(1..s.len() - 1)?.split_once(',')?;
    Some(Guard { lo: lo.trim().parse().ok()?, lo_closed, hi: hi.trim().parse().ok()?, hi_closed })
}

struct PendingTransition<'a> {
    src: Tok<'a>,
    dst: Tok<'a>,
    guard: Option<Guard>,
    reset: bool,
    weight: i64,
}

/// Parses and validates a game. Errors carry line and column.
pub fn parse_game(text: &str) -> Result<Ptg, ParseErrors> {
    let mut errors = Vec::new();
    let mut clock_bound: Option<i64> = None;
    let mut locations: Vec<(Location, Tok)> = Vec::new();
    let mut pending: Vec<PendingTransition> = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let toks = tokens(line, i + 1);
        let Some(head) = toks.first() else { continue };
        let r = match head.text {
            "clock_bound" => parse_clock_bound(&toks).map(|m| clock_bound = Some(m)),
            "location" => parse_location(&toks).map(|l| locations.push(l)),
            "transition" => parse_transition(&toks).map(|t| pending.push(t)),
            _ => Err(head.expected("`clock_bound`, `location` or `transition`")),
        };
        if let Err(e) = r {
            errors.push(e);
        }
    }

    for (i, (l, tok)) in locations.iter().enumerate() {
        if locations[..i].iter().any(|(o, _)| o.id == l.id) {
            errors.push(tok.error(format!("duplicate location `{}`", l.id)));
        }
    }
    if locations.is_empty() && errors.is_empty() {
        errors.push(ParseError { line: 0, column: 0, message: "no locations".into() });
    }
    let m = clock_bound.unwrap_or(1);
    let find = |t: &Tok| -> Result<usize, ParseError> {
        locations
            .iter()
            .position(|(l, _)| l.id == t.text)
            .ok_or_else(|| t.error(format!("unknown location `{}`", t.text)))
    };
    let mut transitions = Vec::new();
    for p in &pending {
        match (find(&p.src), find(&p.dst)) {
            (Ok(s), Ok(d)) => transitions.push(Transition {
                source: s,
                target: d,
                guard: p.guard.clone().unwrap_or_else(|| Guard::closed(Rational::zero(), Rational::from_int(m))),
                reset: p.reset,
                weight: p.weight,
            }),
            (a, b) => errors.extend(a.err().into_iter().chain(b.err())),
        }
    }
    if !errors.is_empty() {
        return Err(ParseErrors(errors));
    }
    let g = Ptg::new(locations.into_iter().map(|(l, _)| l).collect(), transitions, m);
    let invalid: Vec<ParseError> = g
        .validate()
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| ParseError { line: 0, column: 0, message: format!("{}: {}", d.element, d.message) })
        .collect();
    if invalid.is_empty() {
        Ok(g)
    } else {
        Err(ParseErrors(invalid))
    }
}

fn parse_clock_bound(toks: &[Tok]) -> Result<i64, ParseError> {
    let t = toks.get(1).ok_or_else(|| toks[0].error("expected the clock bound after `clock_bound`"))?;
    let m = integer(t, t.text)?;
    if m < 1 {
        return Err(t.error("clock bound must be a positive integer"));
    }
    if let Some(extra) = toks.get(2) {
        return Err(extra.expected("end of line"));
    }
    Ok(m)
}

fn parse_location<'a>(toks: &[Tok<'a>]) -> Result<(Location, Tok<'a>), ParseError> {
    let id = *toks.get(1).ok_or_else(|| toks[0].error("expected a location id after `location`"))?;
    if id.text.contains('=') {
        return Err(id.expected("a location id"));
    }
    let (mut owner, mut rate, mut urgent, mut cost) = (None, 0, false, None);
    for t in &toks[2..] {
        match t.text.split_once('=') {
            None if t.text == "urgent" => urgent = true,
            Some(("owner", v)) => {
                owner = Some(match v {
                    "min" => Owner::Min,
                    "max" => Owner::Max,
                    "final" => Owner::Final,
                    _ => return Err(t.error(format!("expected owner `min`, `max` or `final`, found `{v}`"))),
                })
            }
            Some(("rate", v)) => rate = integer(t, v)?,
            Some(("final_cost", v)) => {
                cost = Some(parse_affine(v).ok_or_else(|| t.error(format!("expected a final cost `a*x+b`, found `{v}`")))?)
            }
            _ => return Err(t.expected("`owner=`, `rate=`, `urgent` or `final_cost=`")),
        }
    }
    let owner = owner.ok_or_else(|| id.error(format!("location `{}` has no owner=", id.text)))?;
    let loc = Location { id: id.text.to_string(), owner, rate, urgent, final_cost: cost };
    Ok((loc, id))
}

fn parse_transition<'a>(toks: &[Tok<'a>]) -> Result<PendingTransition<'a>, ParseError> {
    let src = *toks.get(1).ok_or_else(|| toks[0].error("expected a source location after `transition`"))?;
    let arrow = toks.get(2).ok_or_else(|| src.error("expected `->` after the source"))?;
    if arrow.text != "->" {
        return Err(arrow.expected("`->`"));
    }
    let dst = *toks.get(3).ok_or_else(|| arrow.error("expected a target location after `->`"))?;
    let mut p = PendingTransition { src, dst, guard: None, reset: false, weight: 0 };
    let mut weight_seen = false;
    for t in &toks[4..] {
        match t.text.split_once('=') {
            None if t.text == "reset" => p.reset = true,
            Some(("guard", v)) => {
                p.guard = Some(parse_guard(v).ok_or_else(|| t.error(format!("expected a guard like `[0,1]`, found `{v}`")))?)
            }
            Some(("weight", v)) => {
                p.weight = integer(t, v)?;
                weight_seen = true;
            }
            _ => return Err(t.expected("`guard=`, `reset` or `weight=`")),
        }
    }
    if !weight_seen {
        return Err(src.error("transition has no weight="));
    }
    Ok(p)
}

/// Text form of a game; [`parse_game`] reads it back to an equal game.
pub fn print_game(g: &Ptg) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "clock_bound {}", g.clock_bound);
    for l in &g.locations {
        let owner = match l.owner {
            Owner::Min => "min",
            Owner::Max => "max",
            Owner::Final => "final",
        };
        let _ = write!(s, "location {} owner={owner}", l.id);
        if l.owner != Owner::Final || l.rate != 0 {
            let _ = write!(s, " rate={}", l.rate);
        }
        if l.urgent {
            s.push_str(" urgent");
        }
        if let Some(f) = &l.final_cost {
            let _ = write!(s, " final_cost={f}");
        }
        s.push('\n');
    }
    for t in &g.transitions {
        let _ = write!(
            s,
            "transition {} -> {} guard={}",
            g.locations[t.source].id, g.locations[t.target].id, t.guard
        );
        if t.reset {
            s.push_str(" reset");
        }
        let _ = writeln!(s, " weight={}", t.weight);
    }
    s
}
