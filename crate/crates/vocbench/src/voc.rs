//! Value-of-classifier curves: dimensionless value as a function of the
//! penalty ω.
//!
//! At a fixed threshold the value is a single affine function of ω. When the
//! threshold is re-optimized for every ω, the curve becomes the upper
//! envelope of one line per candidate threshold — convex, non-increasing, and
//! piecewise linear — computed here exactly with a convex-hull sweep rather
//! than by sampling.
//!
//! Lines keep their raw accepted sums (`n_correct`, `n_wrong`, total weight)
//! and evaluate as `(n_correct − ω·n_wrong) / total`, the same expression the
//! threshold optimizer uses, so curve queries reproduce optimizer results
//! bitwise. Knot positions divide raw sums (the shared total cancels), which
//! keeps unit-weight knots like 1 exact.

use crate::error::{Error, Result};
use crate::model::{OutcomeCounts, ScoredDataset};
use crate::threshold::candidate_stats;

/// Absolute slack used by [`dominates`] when comparing two curves at a knot.
///
/// The comparison itself is exact in the piecewise-linear sense (knots
/// suffice; nothing is sampled), but evaluating two independently accumulated
/// curves at the same ω carries last-ulp noise: a curve can sit one rounding
/// step below another even though the underlying real values are equal.
/// Deficits at or below this slack count as ties.
pub const DOMINANCE_TOLERANCE: f64 = 1e-12;

/// A single value line `𝒱(ω) = intercept_a − slope_b·ω`, tagged with the
/// threshold that realizes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueLine {
    n_correct: f64,
    n_wrong: f64,
    total: f64,
    threshold: f64,
}

impl ValueLine {
    pub(crate) fn from_raw(n_correct: f64, n_wrong: f64, total: f64, threshold: f64) -> Self {
        ValueLine {
            n_correct,
            n_wrong,
            total,
            threshold,
        }
    }

    /// Reconstructs a line from its normalized coefficients (as read back
    /// from a knot file). Evaluation behaves identically because the raw
    /// sums are just `a`, `b` over a total of 1.
    pub fn from_normalized(intercept_a: f64, slope_b: f64, threshold: f64) -> Result<Self> {
        for (field, v) in [("intercept_a", intercept_a), ("slope_b", slope_b)] {
            if !v.is_finite() {
                return Err(Error::field(field, format!("must be finite, got {v}")));
            }
        }
        if slope_b < 0.0 {
            return Err(Error::field(
                "slope_b",
                format!("must be non-negative, got {slope_b}"),
            ));
        }
        Ok(ValueLine {
            n_correct: intercept_a,
            n_wrong: slope_b,
            total: 1.0,
            threshold,
        })
    }

    /// Value at ω = 0: accepted correct weight over total weight.
    pub fn intercept_a(&self) -> f64 {
        self.n_correct / self.total
    }

    /// Losing rate: accepted wrong weight over total weight.
    pub fn slope_b(&self) -> f64 {
        self.n_wrong / self.total
    }

    /// The candidate threshold this line belongs to.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `(n_correct − ω·n_wrong) / total` — the dimensionless value expression.
    pub fn value_at(&self, omega: f64) -> f64 {
        (self.n_correct - omega * self.n_wrong) / self.total
    }

    /// ω where this line crosses `other` (caller guarantees the raw wrong
    /// sums differ). Raw sums cancel the shared total, so integer-weight
    /// crossings stay exact.
    fn crossing(&self, other: &ValueLine) -> f64 {
        (self.n_correct - other.n_correct) / (self.n_wrong - other.n_wrong)
    }

    /// Root `n_correct / n_wrong` where the line reaches zero (+∞ for flat
    /// positive lines).
    fn positive_until(&self) -> f64 {
        if self.n_wrong == 0.0 {
            if self.n_correct > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            self.n_correct / self.n_wrong
        }
    }
}

/// One piece of a [`VocCurve`]: `line` is active on
/// `[omega_start, next piece's omega_start)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePiece {
    omega_start: f64,
    line: ValueLine,
}

impl CurvePiece {
    pub fn new(omega_start: f64, line: ValueLine) -> Self {
        CurvePiece { omega_start, line }
    }

    pub fn omega_start(&self) -> f64 {
        self.omega_start
    }

    pub fn line(&self) -> &ValueLine {
        &self.line
    }
}

/// How a curve was produced: one frozen threshold, or the per-ω optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMode {
    Fixed,
    OmegaAware,
}

impl CurveMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveMode::Fixed => "fixed",
            CurveMode::OmegaAware => "omega-aware",
        }
    }
}

impl std::str::FromStr for CurveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(CurveMode::Fixed),
            "omega-aware" => Ok(CurveMode::OmegaAware),
            other => Err(Error::field(
                "mode",
                format!("expected \"fixed\" or \"omega-aware\", got {other:?}"),
            )),
        }
    }
}

/// A non-negative real extended with +∞, used for ω ranges and curve areas.
///
/// Infinity is a distinct symbolic state — never a large float — and
/// serializes as the string `"inf"` where numbers otherwise appear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

impl ExtendedReal {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedReal::Infinity)
    }

    pub fn as_finite(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(*v),
            ExtendedReal::Infinity => None,
        }
    }

    /// Collapses to a plain float (+∞ for the infinite state).
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::Infinity => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinity => write!(f, "inf"),
        }
    }
}

impl serde::Serialize for ExtendedReal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => serializer.serialize_f64(*v),
            ExtendedReal::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> serde::Deserialize<'de> for ExtendedReal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;

        impl serde::de::Visitor<'_> for Visitor {
            type Value = ExtendedReal;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a number or the string \"inf\"")
            }

            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<ExtendedReal, E> {
                Ok(ExtendedReal::Finite(v))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<ExtendedReal, E> {
                Ok(ExtendedReal::Finite(v as f64))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<ExtendedReal, E> {
                Ok(ExtendedReal::Finite(v as f64))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<ExtendedReal, E> {
                if v == "inf" {
                    Ok(ExtendedReal::Infinity)
                } else {
                    Err(E::custom(format!("expected \"inf\", got {v:?}")))
                }
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

/// Half-open ω interval `[lo, hi)`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    lo: f64,
    hi: ExtendedReal,
}

impl Band {
    pub fn new(lo: f64, hi: ExtendedReal) -> Result<Self> {
        if !lo.is_finite() || lo < 0.0 {
            return Err(Error::field(
                "band",
                format!("lower endpoint must be finite and non-negative, got {lo}"),
            ));
        }
        if let ExtendedReal::Finite(h) = hi {
            if !h.is_finite() || h <= lo {
                return Err(Error::field(
                    "band",
                    format!("upper endpoint must exceed the lower, got [{lo}, {h})"),
                ));
            }
        }
        Ok(Band { lo, hi })
    }

    pub fn bounded(lo: f64, hi: f64) -> Result<Self> {
        Band::new(lo, ExtendedReal::Finite(hi))
    }

    pub fn unbounded(lo: f64) -> Result<Self> {
        Band::new(lo, ExtendedReal::Infinity)
    }

    /// The whole domain `[0, ∞)`.
    pub fn full() -> Self {
        Band {
            lo: 0.0,
            hi: ExtendedReal::Infinity,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> ExtendedReal {
        self.hi
    }
}

/// Piecewise-linear value-vs-penalty curve on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VocCurve {
    mode: CurveMode,
    pieces: Vec<CurvePiece>,
}

impl VocCurve {
    /// Assembles a curve from pieces. The first piece must start at 0 and
    /// starts must be strictly increasing.
    pub fn from_pieces(mode: CurveMode, pieces: Vec<CurvePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::field("pieces", "curve needs at least one piece"));
        }
        if pieces[0].omega_start != 0.0 {
            return Err(Error::field(
                "pieces",
                format!("first piece must start at 0, got {}", pieces[0].omega_start),
            ));
        }
        for pair in pieces.windows(2) {
            if !(pair[1].omega_start > pair[0].omega_start) {
                return Err(Error::field(
                    "pieces",
                    format!(
                        "piece starts must increase strictly, got {} then {}",
                        pair[0].omega_start, pair[1].omega_start
                    ),
                ));
            }
        }
        Ok(VocCurve { mode, pieces })
    }

    pub fn mode(&self) -> CurveMode {
        self.mode
    }

    pub fn pieces(&self) -> &[CurvePiece] {
        &self.pieces
    }

    /// Value at `omega` via the active piece (right-continuous at knots; both
    /// adjacent pieces agree there up to rounding by construction).
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(Error::field(
                "omega",
                format!("must be finite and non-negative, got {omega}"),
            ));
        }
        let idx = self.pieces.partition_point(|p| p.omega_start <= omega) - 1;
        Ok(self.pieces[idx].line.value_at(omega))
    }

    /// Right endpoint of piece `i`'s interval.
    fn piece_end(&self, i: usize) -> ExtendedReal {
        match self.pieces.get(i + 1) {
            Some(next) => ExtendedReal::Finite(next.omega_start),
            None => ExtendedReal::Infinity,
        }
    }

    /// Supremum of `{ω : 𝒱(ω) > 0}` — the penalty beyond which the classifier
    /// stops being worth running. 0 when the curve is never positive,
    /// infinite when a flat positive tail never dies.
    pub fn omega_sup(&self) -> ExtendedReal {
        let mut sup = 0.0f64;
        for (i, piece) in self.pieces.iter().enumerate() {
            let line = &piece.line;
            if line.n_correct <= 0.0 {
                continue;
            }
            let root = line.positive_until();
            if root <= piece.omega_start {
                continue;
            }
            match self.piece_end(i) {
                ExtendedReal::Infinity => {
                    if root.is_infinite() {
                        return ExtendedReal::Infinity;
                    }
                    sup = sup.max(root);
                }
                ExtendedReal::Finite(end) => {
                    sup = sup.max(root.min(end));
                }
            }
        }
        ExtendedReal::Finite(sup)
    }

    /// Exact integral of the positive part `max(𝒱(ω), 0)` over a band.
    ///
    /// Piecewise-analytic: each linear piece contributes
    /// `a·(hi−lo) − b·(hi²−lo²)/2` over the sub-interval where it is active
    /// and positive. Infinite exactly when the band is unbounded and the
    /// terminal piece has a positive flat tail.
    pub fn auc(&self, band: &Band) -> Result<ExtendedReal> {
        let mut area = 0.0f64;
        for (i, piece) in self.pieces.iter().enumerate() {
            let lo = piece.omega_start.max(band.lo);
            let end = match (self.piece_end(i), band.hi) {
                (ExtendedReal::Finite(e), ExtendedReal::Finite(h)) => ExtendedReal::Finite(e.min(h)),
                (ExtendedReal::Finite(e), ExtendedReal::Infinity) => ExtendedReal::Finite(e),
                (ExtendedReal::Infinity, ExtendedReal::Finite(h)) => ExtendedReal::Finite(h),
                (ExtendedReal::Infinity, ExtendedReal::Infinity) => ExtendedReal::Infinity,
            };
            let line = &piece.line;
            let root = line.positive_until();
            if root <= lo {
                continue; // nothing positive in this piece's share
            }
            let hi = match end {
                ExtendedReal::Infinity => {
                    if root.is_infinite() {
                        // flat positive tail over an unbounded band
                        return Ok(ExtendedReal::Infinity);
                    }
                    root
                }
                ExtendedReal::Finite(e) => {
                    if e <= lo {
                        continue;
                    }
                    e.min(root)
                }
            };
            let a = line.intercept_a();
            let b = line.slope_b();
            area += a * (hi - lo) - b * ((hi * hi - lo * lo) / 2.0);
        }
        Ok(ExtendedReal::Finite(area))
    }
}

/// Curve of a frozen threshold: the single value line of its outcome counts.
pub fn fixed_voc(counts: &OutcomeCounts, threshold: f64) -> Result<VocCurve> {
    if counts.total() <= 0.0 {
        return Err(Error::field("total", "zero total weight"));
    }
    let line = ValueLine::from_raw(counts.n_correct(), counts.n_wrong(), counts.total(), threshold);
    Ok(VocCurve {
        mode: CurveMode::Fixed,
        pieces: vec![CurvePiece {
            omega_start: 0.0,
            line,
        }],
    })
}

/// Exact upper envelope over every candidate threshold's value line: the
/// curve of a classifier whose threshold is re-optimized for each ω.
///
/// Convex-hull-of-lines sweep: candidates arrive sorted by slope (ascending
/// threshold means non-increasing wrong weight), dominated lines are
/// discarded, crossings become knots, and the hull is clipped to `[0, ∞)`.
/// No sampling; agreement with the brute-force threshold sweep is exercised
/// by tests at 1e−9.
pub fn omega_aware_voc(data: &ScoredDataset) -> VocCurve {
    let stats = candidate_stats(data);
    let total = stats.total_weight;

    // Collapse to the strongest line per slope. Ascending threshold makes
    // both accepted sums non-increasing, so within an equal-n_wrong run the
    // first line has the largest n_correct; exact duplicates keep the larger
    // (more conservative) threshold as their representative.
    let mut best: Vec<ValueLine> = Vec::with_capacity(stats.thresholds.len());
    for i in 0..stats.thresholds.len() {
        let line = ValueLine::from_raw(stats.n_correct[i], stats.n_wrong[i], total, stats.thresholds[i]);
        match best.last_mut() {
            Some(prev) if prev.n_wrong == line.n_wrong => {
                if prev.n_correct == line.n_correct {
                    *prev = line;
                }
            }
            _ => best.push(line),
        }
    }

    // Upper-envelope sweep; starts[i] is the left end of lines[i]'s interval.
    let mut lines: Vec<ValueLine> = Vec::with_capacity(best.len());
    let mut starts: Vec<f64> = Vec::with_capacity(best.len());
    for line in best {
        let mut start = f64::NEG_INFINITY;
        while let Some(top) = lines.last() {
            let x = top.crossing(&line);
            if x <= *starts.last().expect("starts parallels lines") {
                lines.pop();
                starts.pop();
            } else {
                start = x;
                break;
            }
        }
        lines.push(line);
        starts.push(start);
    }

    // Clip to [0, ∞): the piece active at 0 is the last one starting ≤ 0.
    let first = starts.partition_point(|&s| s <= 0.0) - 1;
    let pieces = lines[first..]
        .iter()
        .zip(&starts[first..])
        .enumerate()
        .map(|(i, (line, &start))| CurvePiece {
            omega_start: if i == 0 { 0.0 } else { start },
            line: *line,
        })
        .collect();
    VocCurve {
        mode: CurveMode::OmegaAware,
        pieces,
    }
}

/// Witness for a failed dominance claim: an ω where the right curve exceeds
/// the left one beyond [`DOMINANCE_TOLERANCE`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceWitness {
    pub omega: f64,
    pub lhs_value: f64,
    pub rhs_value: f64,
}

/// Outcome of a [`dominates`] check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceCheck {
    pub dominates: bool,
    pub witness: Option<DominanceWitness>,
}

/// Whether `lhs(ω) ≥ rhs(ω)` across the band, checked exactly on the merged
/// knot set (both curves are affine between adjacent checkpoints, so knots
/// plus band endpoints decide the question; nothing is sampled). Deficits
/// within [`DOMINANCE_TOLERANCE`] count as ties. On failure the first
/// violating checkpoint is reported.
pub fn dominates(lhs: &VocCurve, rhs: &VocCurve, band: &Band) -> DominanceCheck {
    let mut points: Vec<f64> = Vec::with_capacity(lhs.pieces.len() + rhs.pieces.len() + 2);
    points.push(band.lo);
    for piece in lhs.pieces.iter().chain(rhs.pieces.iter()) {
        let s = piece.omega_start;
        let inside = s > band.lo
            && match band.hi {
                ExtendedReal::Finite(h) => s <= h,
                ExtendedReal::Infinity => true,
            };
        if inside {
            points.push(s);
        }
    }
    if let ExtendedReal::Finite(h) = band.hi {
        points.push(h);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();

    for &omega in &points {
        let l = lhs.evaluate(omega).expect("checkpoint is in-domain");
        let r = rhs.evaluate(omega).expect("checkpoint is in-domain");
        if l < r - DOMINANCE_TOLERANCE {
            return DominanceCheck {
                dominates: false,
                witness: Some(DominanceWitness {
                    omega,
                    lhs_value: l,
                    rhs_value: r,
                }),
            };
        }
    }

    if band.hi.is_infinite() {
        // Beyond the last checkpoint both curves are affine forever; compare
        // the terminal slopes. A strictly faster-falling lhs loses eventually
        // no matter the slack.
        let lhs_term = lhs.pieces.last().expect("curves are non-empty").line;
        let rhs_term = rhs.pieces.last().expect("curves are non-empty").line;
        let lhs_drop = lhs_term.slope_b();
        let rhs_drop = rhs_term.slope_b();
        if lhs_drop > rhs_drop {
            let k = *points.last().expect("at least the band start");
            let gap = lhs.evaluate(k).expect("in-domain") - rhs.evaluate(k).expect("in-domain");
            let omega = k + (gap + DOMINANCE_TOLERANCE) / (lhs_drop - rhs_drop) + 1.0;
            let l = lhs_term.value_at(omega);
            let r = rhs_term.value_at(omega);
            return DominanceCheck {
                dominates: false,
                witness: Some(DominanceWitness {
                    omega,
                    lhs_value: l,
                    rhs_value: r,
                }),
            };
        }
    }

    DominanceCheck {
        dominates: true,
        witness: None,
    }
}
