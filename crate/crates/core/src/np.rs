//! Slope multisets, Newton polygons, and the dominance order.
//!
//! A slope multiset `{x_1 ≤ x_2 ≤ ⋯ ≤ x_r}` determines a unique continuous,
//! piecewise-linear convex function on `[0, r]` through `(0, 0)` with slope
//! `x_i` on `[i−1, i]`: its Newton polygon. Two multisets of the same size and
//! total are compared by the dominance order: `a ⪰ b` iff every ascending
//! partial sum of `a` is ≥ the corresponding partial sum of `b`;
//! geometrically, the polygon of `a` lies on or above the polygon of `b` with
//! the same endpoints. The pointwise order `f ⪯ g` on convex functions with
//! matching endpoints corresponds to `dominance(slopes(g), slopes(f))` being
//! `DominatesOrEqual` or `Equal`: the dominating multiset has the upper
//! polygon. (Some of the literature draws the picture the other way up; this
//! crate fixes the convention above once and uses it everywhere.)
//!
//! Everything here is exact rational arithmetic; values are immutable after
//! construction.

use crate::rat::{fmt_rat, parse_rat, Rat};
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NpError {
    #[error("EmptyMultiset: a Newton polygon needs at least one slope")]
    EmptyMultiset,
    #[error("IntervalMismatch: polygons are defined on [0,{0}] and [0,{1}]")]
    IntervalMismatch(usize, usize),
}

impl NpError {
    pub fn variant(&self) -> &'static str {
        match self {
            NpError::EmptyMultiset => "EmptyMultiset",
            NpError::IntervalMismatch(..) => "IntervalMismatch",
        }
    }
}

/// A multiset of exact rational slopes, stored sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SlopeMultiset {
    slopes: Vec<Rat>,
}

impl SlopeMultiset {
    /// Builds a multiset, sorting the entries. Empty input is allowed here as
    /// an explicit degenerate value; polygon construction rejects it.
    pub fn new(mut slopes: Vec<Rat>) -> Self {
        slopes.sort();
        SlopeMultiset { slopes }
    }

    pub fn from_i64s(slopes: &[i64]) -> Self {
        Self::new(slopes.iter().map(|&n| Rat::from_integer(n.into())).collect())
    }

    pub fn slopes(&self) -> &[Rat] {
        &self.slopes
    }

    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    pub fn total(&self) -> Rat {
        self.slopes.iter().fold(Rat::zero(), |acc, s| acc + s)
    }

    /// Ascending partial sums `Σ_{i≤k}` for k = 1..=r.
    pub fn partial_sums(&self) -> Vec<Rat> {
        let mut acc = Rat::zero();
        self.slopes
            .iter()
            .map(|s| {
                acc += s;
                acc.clone()
            })
            .collect()
    }

    /// Elementwise multiplication by `a`, re-sorted.
    pub fn scale(&self, a: &Rat) -> SlopeMultiset {
        SlopeMultiset::new(self.slopes.iter().map(|s| s * a).collect())
    }

    /// Scaling by −1.
    pub fn negate(&self) -> SlopeMultiset {
        self.scale(&Rat::from_integer((-1).into()))
    }
}

impl fmt::Display for SlopeMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.slopes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", fmt_rat(s))?;
        }
        write!(f, "}}")
    }
}

impl Serialize for SlopeMultiset {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.slopes.iter().map(fmt_rat).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SlopeMultiset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let slopes = strings
            .iter()
            .map(|s| parse_rat(s).map_err(D::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SlopeMultiset::new(slopes))
    }
}

/// The convex piecewise-linear function of a slope multiset, stored as its
/// minimal breakpoint list. Breakpoints start at `(0, 0)`, the abscissae are
/// ascending, and successive segment slopes strictly increase, so equality of
/// polygons is equality of breakpoint lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    breakpoints: Vec<(Rat, Rat)>,
    length: usize,
}

impl NewtonPolygon {
    /// The polygon with slope `x_i` on `[i−1, i]` after sorting.
    pub fn from_multiset(m: &SlopeMultiset) -> Result<Self, NpError> {
        if m.is_empty() {
            return Err(NpError::EmptyMultiset);
        }
        let mut breakpoints = vec![(Rat::zero(), Rat::zero())];
        let mut t = Rat::zero();
        let mut v = Rat::zero();
        let slopes = m.slopes();
        for (i, s) in slopes.iter().enumerate() {
            t += Rat::from_integer(1.into());
            v += s;
            let is_last = i + 1 == slopes.len();
            let slope_changes = !is_last && slopes[i + 1] != *s;
            if is_last || slope_changes {
                breakpoints.push((t.clone(), v.clone()));
            }
        }
        Ok(NewtonPolygon {
            breakpoints,
            length: m.len(),
        })
    }

    pub fn breakpoints(&self) -> &[(Rat, Rat)] {
        &self.breakpoints
    }

    /// The multiset size r, i.e. the right end of the interval `[0, r]`.
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn endpoint(&self) -> &(Rat, Rat) {
        self.breakpoints.last().expect("polygon has breakpoints")
    }

    /// Recovers the slope multiset from the segment slopes with multiplicity.
    pub fn slopes(&self) -> SlopeMultiset {
        let mut slopes = Vec::with_capacity(self.length);
        for w in self.breakpoints.windows(2) {
            let (ref t0, ref v0) = w[0];
            let (ref t1, ref v1) = w[1];
            let run = t1 - t0;
            let slope = (v1 - v0) / &run;
            let mult = run.to_integer();
            let mut k = num_bigint::BigInt::from(0);
            while k < mult {
                slopes.push(slope.clone());
                k += 1;
            }
        }
        SlopeMultiset::new(slopes)
    }

    /// Value at `t ∈ [0, r]` by linear interpolation. Panics outside the
    /// domain.
    pub fn value_at(&self, t: &Rat) -> Rat {
        let end = &self.breakpoints.last().unwrap().0;
        assert!(
            !t.is_negative() && t <= end,
            "value_at called outside [0, r]"
        );
        for w in self.breakpoints.windows(2) {
            let (ref t0, ref v0) = w[0];
            let (ref t1, ref v1) = w[1];
            if t >= t0 && t <= t1 {
                let slope = (v1 - v0) / (t1 - t0);
                return v0 + slope * (t - t0);
            }
        }
        self.breakpoints.last().unwrap().1.clone()
    }
}

impl fmt::Display for NewtonPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (t, v)) in self.breakpoints.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "({},{})", fmt_rat(t), fmt_rat(v))?;
        }
        Ok(())
    }
}

impl Serialize for NewtonPolygon {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[String; 2]> = self
            .breakpoints
            .iter()
            .map(|(t, v)| [fmt_rat(t), fmt_rat(v)])
            .collect();
        pairs.serialize(serializer)
    }
}

/// Outcome of comparing two multisets in the dominance order.
/// `DifferentFrame` means the sizes or the totals disagree, so the order does
/// not apply; it is a value, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrderResult {
    Equal,
    DominatesOrEqual,
    DominatedOrEqual,
    Incomparable,
    DifferentFrame,
}

impl fmt::Display for OrderResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OrderResult::Equal => "Equal",
            OrderResult::DominatesOrEqual => "DominatesOrEqual",
            OrderResult::DominatedOrEqual => "DominatedOrEqual",
            OrderResult::Incomparable => "Incomparable",
            OrderResult::DifferentFrame => "DifferentFrame",
        };
        f.write_str(s)
    }
}

/// Compares `a` against `b` by ascending partial sums over a shared frame
/// (equal size, equal total). All proper partial sums of `a` being ≥ those of
/// `b` gives `DominatesOrEqual`, all ≤ gives `DominatedOrEqual`, all equal
/// gives `Equal`, a mix gives `Incomparable`.
pub fn dominance(a: &SlopeMultiset, b: &SlopeMultiset) -> OrderResult {
    if a.len() != b.len() || a.total() != b.total() {
        return OrderResult::DifferentFrame;
    }
    let pa = a.partial_sums();
    let pb = b.partial_sums();
    let mut any_gt = false;
    let mut any_lt = false;
    // only proper prefixes k < r; the full sums agree by the frame check
    for k in 0..pa.len().saturating_sub(1) {
        match pa[k].cmp(&pb[k]) {
            std::cmp::Ordering::Greater => any_gt = true,
            std::cmp::Ordering::Less => any_lt = true,
            std::cmp::Ordering::Equal => {}
        }
    }
    match (any_gt, any_lt) {
        (false, false) => OrderResult::Equal,
        (true, false) => OrderResult::DominatesOrEqual,
        (false, true) => OrderResult::DominatedOrEqual,
        (true, true) => OrderResult::Incomparable,
    }
}

/// The pointwise order on convex functions over a common interval:
/// `f ⪯ g` iff the endpoints agree and `f ≤ g` at every breakpoint of either
/// polygon (both are piecewise linear, so breakpoint checks suffice).
pub fn conv_preceq(f: &NewtonPolygon, g: &NewtonPolygon) -> Result<bool, NpError> {
    if f.length() != g.length() {
        return Err(NpError::IntervalMismatch(f.length(), g.length()));
    }
    if f.endpoint() != g.endpoint() {
        return Ok(false);
    }
    let mut ts: Vec<&Rat> = f
        .breakpoints
        .iter()
        .chain(g.breakpoints.iter())
        .map(|(t, _)| t)
        .collect();
    ts.sort();
    ts.dedup();
    Ok(ts.into_iter().all(|t| f.value_at(t) <= g.value_at(t)))
}
