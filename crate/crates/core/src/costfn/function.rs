use std::cmp::Ordering;

use serde::Serialize;

use super::{AffineFn, CostFnError, ExtValue, Rational};

/// One open stretch between consecutive cutpoints.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum Piece {
    Affine(AffineFn),
    PosInf,
    NegInf,
}

impl Piece {
    pub fn eval(&self, nu: &Rational) -> ExtValue {
        match self {
            Piece::Affine(f) => ExtValue::Finite(f.eval(nu)),
            Piece::PosInf => ExtValue::PosInf,
            Piece::NegInf => ExtValue::NegInf,
        }
    }

    pub fn slope(&self) -> Option<&Rational> {
        match self {
            Piece::Affine(f) => Some(&f.slope),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Piece::Affine(_))
    }

    pub fn from_ext(v: &ExtValue) -> Piece {
        match v {
            ExtValue::Finite(c) => Piece::Affine(AffineFn::constant(c.clone())),
            ExtValue::PosInf => Piece::PosInf,
            ExtValue::NegInf => Piece::NegInf,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    pub fn pick<'a>(self, a: &'a ExtValue, b: &'a ExtValue) -> &'a ExtValue {
        match self {
            Extremum::Min => std::cmp::min(a, b),
            Extremum::Max => std::cmp::max(a, b),
        }
    }

    fn better(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Extremum::Min => a < b,
            Extremum::Max => a > b,
        }
    }
}

/// Piecewise-affine partial function on a closed rational interval.
///
/// Point values at cutpoints are stored explicitly, so a jump at a cutpoint is
/// representable. Inside each open piece the function is either affine or a
/// constant infinity.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CostFunction {
    cuts: Vec<Rational>,
    values: Vec<ExtValue>,
    pieces: Vec<Piece>,
}

impl CostFunction {
    pub fn from_parts(
        cuts: Vec<Rational>,
        values: Vec<ExtValue>,
        pieces: Vec<Piece>,
    ) -> Result<Self, CostFnError> {
        if cuts.is_empty() || values.len() != cuts.len() || pieces.len() + 1 != cuts.len() {
            return Err(CostFnError::Malformed("length mismatch".into()));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CostFnError::Malformed("cutpoints not increasing".into()));
        }
        Ok(CostFunction { cuts, values, pieces })
    }

    pub fn point(m: Rational, v: ExtValue) -> Self {
        CostFunction { cuts: vec![m], values: vec![v], pieces: vec![] }
    }

    pub fn constant(lo: Rational, hi: Rational, v: ExtValue) -> Self {
        if lo == hi {
            return CostFunction::point(lo, v);
        }
        assert!(lo < hi, "empty domain");
        CostFunction {
            pieces: vec![Piece::from_ext(&v)],
            values: vec![v.clone(), v],
            cuts: vec![lo, hi],
        }
    }

    pub fn affine(lo: Rational, hi: Rational, f: AffineFn) -> Self {
        let vl = ExtValue::Finite(f.eval(&lo));
        if lo == hi {
            return CostFunction::point(lo, vl);
        }
        assert!(lo < hi, "empty domain");
        let vh = ExtValue::Finite(f.eval(&hi));
        CostFunction { cuts: vec![lo, hi], values: vec![vl, vh], pieces: vec![Piece::Affine(f)] }
    }

    /// Continuous linear interpolation through the given points.
    pub fn from_points(points: &[(Rational, Rational)]) -> Result<Self, CostFnError> {
        if points.is_empty() {
            return Err(CostFnError::Empty);
        }
        let cuts: Vec<Rational> = points.iter().map(|p| p.0.clone()).collect();
        let values = points.iter().map(|p| ExtValue::Finite(p.1.clone())).collect();
        let pieces = points
            .windows(2)
            .map(|w| Piece::Affine(AffineFn::through(&w[0].0, &w[0].1, &w[1].0, &w[1].1)))
            .collect();
        CostFunction::from_parts(cuts, values, pieces)
    }

    pub fn lo(&self) -> &Rational {
        &self.cuts[0]
    }

    pub fn hi(&self) -> &Rational {
        self.cuts.last().unwrap()
    }

    pub fn cutpoints(&self) -> &[Rational] {
        &self.cuts
    }

    pub fn point_values(&self) -> &[ExtValue] {
        &self.values
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn contains(&self, nu: &Rational) -> bool {
        nu >= self.lo() && nu <= self.hi()
    }

    pub fn evaluate(&self, nu: &Rational) -> Result<ExtValue, CostFnError> {
        if !self.contains(nu) {
            return Err(CostFnError::OutOfDomain(nu.clone()));
        }
        Ok(match self.cuts.binary_search(nu) {
            Ok(i) => self.values[i].clone(),
            Err(i) => self.pieces[i - 1].eval(nu),
        })
    }

    /// Index of the piece whose open interval contains `nu`, if `nu` is not a cutpoint.
    pub fn piece_at(&self, nu: &Rational) -> Option<usize> {
        match self.cuts.binary_search(nu) {
            Ok(_) => None,
            Err(0) => None,
            Err(i) if i == self.cuts.len() => None,
            Err(i) => Some(i - 1),
        }
    }

    /// Right-hand slope at a cutpoint or interior point; `None` at `hi` or on infinite pieces.
    pub fn slope_right(&self, nu: &Rational) -> Option<&Rational> {
        let i = match self.cuts.binary_search(nu) {
            Ok(i) => i,
            Err(0) => return None,
            Err(i) => i - 1,
        };
        self.pieces.get(i).and_then(Piece::slope)
    }

    /// True when every finite point value matches the adjacent finite pieces.
    pub fn is_continuous(&self) -> bool {
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 && self.pieces[i - 1].eval(&self.cuts[i]) != *v {
                return false;
            }
            if i < self.pieces.len() && self.pieces[i].eval(&self.cuts[i]) != *v {
                return false;
            }
        }
        true
    }

    pub fn is_finite_everywhere(&self) -> bool {
        self.values.iter().all(ExtValue::is_finite) && self.pieces.iter().all(Piece::is_finite)
    }

    /// Smallest finite value over the cutpoints; finite pieces attain extremes there.
    pub fn min_finite_value(&self) -> Option<Rational> {
        self.values.iter().filter_map(|v| v.finite().cloned()).min()
    }

    /// Drops cutpoints whose two neighbouring pieces coincide and agree with the point value.
    pub fn canonicalize(&self) -> CostFunction {
        let mut cuts = vec![self.cuts[0].clone()];
        let mut values = vec![self.values[0].clone()];
        let mut pieces: Vec<Piece> = Vec::new();
        for i in 1..self.cuts.len() {
            let incoming = &self.pieces[i - 1];
            if let Some(prev) = pieces.last() {
                let c = cuts.last().unwrap();
                if prev == incoming && prev.eval(c) == *values.last().unwrap() {
                    cuts.pop();
                    values.pop();
                    cuts.push(self.cuts[i].clone());
                    values.push(self.values[i].clone());
                    continue;
                }
            }
            pieces.push(incoming.clone());
            cuts.push(self.cuts[i].clone());
            values.push(self.values[i].clone());
        }
        CostFunction { cuts, values, pieces }
    }

    /// `self ⊙ other`: equals `self` on its own domain and `other` elsewhere.
    /// The two domains must meet in exactly one point.
    pub fn concat_left(&self, other: &CostFunction) -> Result<CostFunction, CostFnError> {
        let f = self;
        let g = other;
        let (mut cuts, mut values, mut pieces);
        if f.hi() == g.lo() {
            // f on the left; f's last point value wins at the junction
            cuts = f.cuts.clone();
            values = f.values.clone();
            pieces = f.pieces.clone();
            cuts.extend(g.cuts[1..].iter().cloned());
            values.extend(g.values[1..].iter().cloned());
            pieces.extend(g.pieces.iter().cloned());
        } else if g.hi() == f.lo() {
            cuts = g.cuts[..g.cuts.len() - 1].to_vec();
            values = g.values[..g.values.len() - 1].to_vec();
            pieces = g.pieces.clone();
            cuts.extend(f.cuts.iter().cloned());
            values.extend(f.values.iter().cloned());
            pieces.extend(f.pieces.iter().cloned());
        } else {
            return Err(CostFnError::NotTouching);
        }
        Ok(CostFunction::from_parts(cuts, values, pieces)?.canonicalize())
    }

    /// Slopes of the pieces meeting `[a, b]`, left to right.
    pub fn slopes_in(&self, a: &Rational, b: &Rational) -> Result<Vec<Rational>, CostFnError> {
        if !self.contains(a) || !self.contains(b) || a > b {
            return Err(CostFnError::OutOfDomain(if self.contains(a) { b.clone() } else { a.clone() }));
        }
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let (pl, ph) = (&self.cuts[i], &self.cuts[i + 1]);
            let meets = if a == b { pl <= a && a < ph || (a == ph && a == self.hi()) } else { pl < b && a < ph };
            if meets {
                match p.slope() {
                    Some(s) => out.push(s.clone()),
                    None => return Err(CostFnError::InfinitePiece),
                }
            }
        }
        Ok(out)
    }

    /// Restriction to `[a, b] ⊆ domain`.
    pub fn restrict(&self, a: &Rational, b: &Rational) -> Result<CostFunction, CostFnError> {
        if !self.contains(a) || !self.contains(b) || a > b {
            return Err(CostFnError::OutOfDomain(a.clone()));
        }
        let va = self.evaluate(a)?;
        if a == b {
            return Ok(CostFunction::point(a.clone(), va));
        }
        let mut cuts = vec![a.clone()];
        let mut values = vec![va];
        let mut pieces = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let (pl, ph) = (&self.cuts[i], &self.cuts[i + 1]);
            if ph <= a || pl >= b {
                continue;
            }
            pieces.push(p.clone());
            let end = std::cmp::min(ph, b);
            cuts.push(end.clone());
            values.push(self.evaluate(end)?);
        }
        CostFunction::from_parts(cuts, values, pieces)
    }

    /// The function `ν' ↦ self((ν' - lo) / scale)` on `[lo + scale·self.lo, lo + scale·self.hi]`,
    /// i.e. the domain is mapped through `ν ↦ lo + scale·ν` with `scale > 0`.
    pub fn map_domain(&self, lo: &Rational, scale: &Rational) -> CostFunction {
        assert!(scale.is_positive(), "scale must be positive");
        let inv = scale.recip();
        let cuts = self.cuts.iter().map(|c| lo + scale * c).collect();
        let pieces = self
            .pieces
            .iter()
            .map(|p| match p {
                Piece::Affine(f) => {
                    // f((ν - lo)/scale) = (s/scale)ν + (i - s·lo/scale)
                    let slope = &f.slope * &inv;
                    let intercept = &f.intercept - &slope * lo;
                    Piece::Affine(AffineFn::new(slope, intercept))
                }
                other => other.clone(),
            })
            .collect();
        CostFunction { cuts, values: self.values.clone(), pieces }
    }
}

/// Exact lower (`Min`) or upper (`Max`) envelope of functions sharing one domain.
pub fn pointwise_extremum(fs: &[CostFunction], mode: Extremum) -> Result<CostFunction, CostFnError> {
    let first = fs.first().ok_or(CostFnError::Empty)?;
    if fs.iter().any(|f| f.lo() != first.lo() || f.hi() != first.hi()) {
        return Err(CostFnError::DomainMismatch);
    }
    let mut grid: Vec<Rational> = fs.iter().flat_map(|f| f.cuts.iter().cloned()).collect();
    grid.sort();
    grid.dedup();

    let mut cuts = Vec::new();
    let mut values = Vec::new();
    let mut pieces = Vec::new();
    for (gi, c) in grid.iter().enumerate() {
        let v = fs
            .iter()
            .map(|f| f.evaluate(c).unwrap())
            .reduce(|a, b| mode.pick(&a, &b).clone())
            .unwrap();
        cuts.push(c.clone());
        values.push(v);
        let Some(next) = grid.get(gi + 1) else { break };
        let mid = Rational::midpoint(c, next);
        let active: Vec<&Piece> = fs.iter().map(|f| &f.pieces[f.piece_at(&mid).unwrap()]).collect();
        for (lo, hi, piece) in envelope(&active, c, next, mode) {
            if &lo != c {
                values.push(piece.eval(&lo));
                cuts.push(lo);
            }
            let _ = hi;
            pieces.push(piece);
        }
    }
    Ok(CostFunction::from_parts(cuts, values, pieces)?.canonicalize())
}

/// Envelope of pieces over the open interval `(a, b)`, split at crossings.
fn envelope(active: &[&Piece], a: &Rational, b: &Rational, mode: Extremum) -> Vec<(Rational, Rational, Piece)> {
    let (absorbing, neutral) = match mode {
        Extremum::Min => (Piece::NegInf, Piece::PosInf),
        Extremum::Max => (Piece::PosInf, Piece::NegInf),
    };
    if active.iter().any(|p| **p == absorbing) {
        return vec![(a.clone(), b.clone(), absorbing)];
    }
    let lines: Vec<&AffineFn> = active
        .iter()
        .filter_map(|p| match p {
            Piece::Affine(f) => Some(f),
            _ => None,
        })
        .collect();
    if lines.is_empty() {
        return vec![(a.clone(), b.clone(), neutral)];
    }
    let mut splits = vec![a.clone(), b.clone()];
    for (i, f) in lines.iter().enumerate() {
        for g in &lines[i + 1..] {
            if let Some(x) = f.intersection(g) {
                if &x > a && &x < b {
                    splits.push(x);
                }
            }
        }
    }
    splits.sort();
    splits.dedup();
    splits
        .windows(2)
        .map(|w| {
            let mid = Rational::midpoint(&w[0], &w[1]);
            let mut best = lines[0];
            let mut best_v = best.eval(&mid);
            for f in &lines[1..] {
                let v = f.eval(&mid);
                if mode.better(&v, &best_v) || (v == best_v && f.slope.cmp(&best.slope) == Ordering::Less) {
                    best = f;
                    best_v = v;
                }
            }
            (w[0].clone(), w[1].clone(), Piece::Affine((*best).clone()))
        })
        .collect()
}
