//! Penalty-aware threshold selection.
//!
//! The threshold sweep only ever needs to look at a finite candidate set: the
//! distinct confidences in the dataset (each realizes a distinct accept
//! prefix), plus 0 (never abstain) and a sentinel above every valid
//! confidence (always abstain). The optimizer scores each candidate's
//! dimensionless value with one sorted pass over prefix sums and returns the
//! largest maximizing threshold — when several thresholds tie, the most
//! conservative (most abstaining) one wins.
//!
//! For calibrated confidences the sweep collapses to a closed form: accept
//! exactly the predictions with `c ≥ ω/(ω+1)`. [`calibrated_expected_value`]
//! prices a threshold from confidences alone under that assumption, and logs
//! a warning when the dataset's calibration error makes the shortcut
//! untrustworthy.

use crate::calibration;
use crate::error::Result;
use crate::model::{Penalty, ScoredDataset};

/// Threshold strictly above any valid confidence: the always-abstain
/// candidate. Confidences live in [0, 1], so 2 is unambiguous.
pub const ALWAYS_ABSTAIN_THRESHOLD: f64 = 2.0;

/// Default calibration-error bound above which the calibrated shortcut logs a
/// warning.
pub const DEFAULT_ECE_WARNING_BOUND: f64 = 0.1;

/// Bin count used for the calibration-error screen inside
/// [`calibrated_expected_value`].
const ECE_SCREEN_BINS: usize = 15;

/// The finite candidate set that realizes every achievable accept/abstain
/// partition: 0, the distinct confidences ascending, and the always-abstain
/// sentinel.
pub fn candidate_thresholds(data: &ScoredDataset) -> Vec<f64> {
    let records = data.records();
    let mut out = Vec::with_capacity(records.len() + 2);
    out.push(0.0);
    // Canonical order is confidence-descending; walk it backwards for
    // ascending distinct confidences.
    for r in records.iter().rev() {
        let c = r.confidence();
        if c > *out.last().expect("candidates start non-empty") {
            out.push(c);
        }
    }
    out.push(ALWAYS_ABSTAIN_THRESHOLD);
    out
}

/// Per-candidate accepted sums, shared between the optimizer and the VOC
/// envelope. Entry `i` belongs to `thresholds[i]`.
#[derive(Debug, Clone)]
pub(crate) struct CandidateStats {
    pub thresholds: Vec<f64>,
    /// Accepted correct weight per candidate.
    pub n_correct: Vec<f64>,
    /// Accepted wrong weight per candidate.
    pub n_wrong: Vec<f64>,
    /// Accepted total weight per candidate.
    pub accepted: Vec<f64>,
    /// Grand total weight (denominator of every value).
    pub total_weight: f64,
}

/// Builds prefix sums over the canonical order and reads one prefix per
/// candidate. The accumulation order per bucket is identical to
/// [`crate::model::count_outcomes`] on the thresholded dataset, so the sums
/// returned here agree with it bitwise.
pub(crate) fn candidate_stats(data: &ScoredDataset) -> CandidateStats {
    let records = data.records();
    let n = records.len();
    let mut prefix_correct = Vec::with_capacity(n + 1);
    let mut prefix_wrong = Vec::with_capacity(n + 1);
    let mut prefix_weight = Vec::with_capacity(n + 1);
    let (mut c, mut w, mut a) = (0.0f64, 0.0f64, 0.0f64);
    prefix_correct.push(c);
    prefix_wrong.push(w);
    prefix_weight.push(a);
    for r in records {
        if r.is_correct() {
            c += r.weight();
        } else {
            w += r.weight();
        }
        a += r.weight();
        prefix_correct.push(c);
        prefix_wrong.push(w);
        prefix_weight.push(a);
    }
    let thresholds = candidate_thresholds(data);
    let mut n_correct = Vec::with_capacity(thresholds.len());
    let mut n_wrong = Vec::with_capacity(thresholds.len());
    let mut accepted = Vec::with_capacity(thresholds.len());
    for &t in &thresholds {
        // Records are confidence-descending: the accepted set is a prefix.
        let k = records.partition_point(|r| r.confidence() >= t);
        n_correct.push(prefix_correct[k]);
        n_wrong.push(prefix_wrong[k]);
        accepted.push(prefix_weight[k]);
    }
    CandidateStats {
        thresholds,
        n_correct,
        n_wrong,
        accepted,
        total_weight: data.total_weight(),
    }
}

/// Result of a penalty-aware threshold optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    /// The chosen threshold: the largest maximizer over the candidate set.
    pub threshold: f64,
    /// Dimensionless value achieved at that threshold.
    pub achieved_value: f64,
    /// Total weight of accepted (non-abstained) predictions.
    pub accepted_weight: f64,
}

/// Exact maximization of dimensionless value over all thresholds.
///
/// Scans the candidate set in ascending order keeping the best value, with
/// ties resolved toward the larger threshold. The achieved value is computed
/// with the same expression as
/// [`OutcomeCounts::dimensionless_value`](crate::model::OutcomeCounts::dimensionless_value)
/// on the same sums, so recomputing it through `apply_threshold` +
/// `count_outcomes` reproduces it bitwise.
pub fn optimize_threshold(data: &ScoredDataset, penalty: Penalty) -> ThresholdResult {
    let stats = candidate_stats(data);
    let omega = penalty.value();
    let mut best = ThresholdResult {
        threshold: stats.thresholds[0],
        achieved_value: f64::NEG_INFINITY,
        accepted_weight: 0.0,
    };
    for i in 0..stats.thresholds.len() {
        let value = (stats.n_correct[i] - omega * stats.n_wrong[i]) / stats.total_weight;
        // `>=`: later candidates are larger thresholds, so ties move up.
        if value >= best.achieved_value {
            best = ThresholdResult {
                threshold: stats.thresholds[i],
                achieved_value: value,
                accepted_weight: stats.accepted[i],
            };
        }
    }
    best
}

/// Optimal threshold when confidences are calibrated: `ω / (ω + 1)`.
pub fn calibrated_threshold(penalty: Penalty) -> f64 {
    let omega = penalty.value();
    omega / (omega + 1.0)
}

/// Expected dimensionless value of a threshold assuming calibrated
/// confidences: `Σ_{c ≥ t} w·(c − ω·(1 − c)) / W`.
///
/// Correctness flags are ignored — each accepted prediction is priced by its
/// confidence alone. Logs a warning when the dataset's expected calibration
/// error exceeds [`DEFAULT_ECE_WARNING_BOUND`]; use
/// [`calibrated_expected_value_with_warning_bound`] to tune the screen.
pub fn calibrated_expected_value(
    data: &ScoredDataset,
    threshold: f64,
    penalty: Penalty,
) -> Result<f64> {
    calibrated_expected_value_with_warning_bound(data, threshold, penalty, DEFAULT_ECE_WARNING_BOUND)
}

/// [`calibrated_expected_value`] with an explicit warning bound on the
/// expected calibration error.
pub fn calibrated_expected_value_with_warning_bound(
    data: &ScoredDataset,
    threshold: f64,
    penalty: Penalty,
    ece_warning_bound: f64,
) -> Result<f64> {
    // Reuse the threshold validation (range/finiteness) from apply_threshold.
    let _ = data.apply_threshold(threshold)?;
    let ece = calibration::ece(data, ECE_SCREEN_BINS)?;
    if ece > ece_warning_bound {
        log::warn!(
            "calibrated expected value assumes calibrated confidences, but ECE = {ece:.4} \
             exceeds {ece_warning_bound}; the estimate may be unreliable"
        );
    }
    let omega = penalty.value();
    let mut sum = 0.0;
    for r in data.records() {
        if r.confidence() >= threshold {
            let c = r.confidence();
            sum += r.weight() * (c - omega * (1.0 - c));
        }
    }
    Ok(sum / data.total_weight())
}
