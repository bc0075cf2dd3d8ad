//! Core data model: scored predictions, the abstaining decision rule, and the
//! value accounting that turns outcome counts into raw or dimensionless value.
//!
//! A classifier under evaluation emits, per example, a predicted class and a
//! confidence in `[0, 1]`. Thresholding turns it into an *abstaining*
//! classifier: predictions at or above the threshold are kept, the rest become
//! the reserved abstain decision (class `0`). Each kept prediction is then
//! either correct or wrong, and a use case assigns a value to each of the
//! three outcomes.
//!
//! Datasets are immutable and iterate in a fixed canonical order (confidence
//! descending, correct before wrong at equal confidence, input order as the
//! final tie-break). Every sum in this crate runs over that order with a
//! plain left-to-right accumulator, which is what makes repeated runs — and
//! independent recomputations of the same quantity — agree bitwise.

use crate::error::{Error, Result};

/// Reserved decision class meaning "abstain".
///
/// Real classes are numbered from 1, so 0 can never collide with a prediction.
pub const ABSTAIN_CLASS: u32 = 0;

/// One scored prediction: what the classifier said, how sure it was, what the
/// truth was, and how much this example counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRecord {
    confidence: f64,
    predicted_class: u32,
    true_label: u32,
    weight: f64,
}

impl PredictionRecord {
    /// Builds a record, validating every field.
    ///
    /// Confidence must be a finite value in `[0, 1]`, classes must be real
    /// (nonzero — 0 is reserved for abstain), and the weight must be a finite
    /// positive value.
    pub fn new(confidence: f64, predicted_class: u32, true_label: u32, weight: f64) -> Result<Self> {
        if !confidence.is_finite() || !(0.0..=1.0).contains(&confidence) {
            return Err(Error::field(
                "confidence",
                format!("must lie in [0, 1], got {confidence}"),
            ));
        }
        if predicted_class == ABSTAIN_CLASS {
            return Err(Error::field(
                "predicted_class",
                "class 0 is reserved for abstain",
            ));
        }
        if true_label == ABSTAIN_CLASS {
            return Err(Error::field("true_label", "class 0 is reserved for abstain"));
        }
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::field(
                "weight",
                format!("must be a positive finite value, got {weight}"),
            ));
        }
        Ok(PredictionRecord {
            confidence,
            predicted_class,
            true_label,
            weight,
        })
    }

    /// Unit-weight convenience constructor.
    pub fn unweighted(confidence: f64, predicted_class: u32, true_label: u32) -> Result<Self> {
        PredictionRecord::new(confidence, predicted_class, true_label, 1.0)
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn predicted_class(&self) -> u32 {
        self.predicted_class
    }

    pub fn true_label(&self) -> u32 {
        self.true_label
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Whether the (non-abstaining) prediction matches the label.
    pub fn is_correct(&self) -> bool {
        self.predicted_class == self.true_label
    }

    /// Copy of this record with a different confidence (used by rescaling and
    /// discriminator wrappers). The new confidence is validated.
    pub fn with_confidence(&self, confidence: f64) -> Result<Self> {
        PredictionRecord::new(confidence, self.predicted_class, self.true_label, self.weight)
    }
}

/// An immutable set of scored predictions in canonical order.
///
/// Canonical order is confidence descending, then correct-before-wrong, then
/// position in the input — fixed once at construction. All downstream
/// operations iterate (and sum) in this order, so results are deterministic
/// down to the last bit no matter how the input file was shuffled.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDataset {
    records: Vec<PredictionRecord>,
    total_weight: f64,
}

impl ScoredDataset {
    /// Builds a dataset from records in any order.
    ///
    /// Fails on an empty input; the per-record invariants were already
    /// enforced by [`PredictionRecord::new`].
    pub fn new(records: Vec<PredictionRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut records = records;
        // Stable sort: input position breaks any remaining ties.
        records.sort_by(|a, b| {
            b.confidence
                .total_cmp(&a.confidence)
                .then_with(|| b.is_correct().cmp(&a.is_correct()))
        });
        let mut total_weight = 0.0;
        for r in &records {
            total_weight += r.weight;
        }
        // Weights are all strictly positive, so this can only trip on inputs
        // engineered to overflow.
        if !total_weight.is_finite() || total_weight <= 0.0 {
            return Err(Error::field(
                "weight",
                format!("total weight must be positive and finite, got {total_weight}"),
            ));
        }
        Ok(ScoredDataset {
            records,
            total_weight,
        })
    }

    /// Records in canonical order.
    pub fn records(&self) -> &[PredictionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Always false: empty datasets are unrepresentable.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sum of all weights (canonical-order accumulation).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Applies the threshold rule: keep predictions with confidence at or
    /// above `threshold` (the boundary is accepted), abstain on the rest.
    ///
    /// A threshold above 1 always abstains. Negative or non-finite thresholds
    /// are rejected.
    pub fn apply_threshold(&self, threshold: f64) -> Result<Vec<AbstainingPrediction>> {
        if !threshold.is_finite() || threshold < 0.0 {
            return Err(Error::field(
                "threshold",
                format!("must be finite and non-negative, got {threshold}"),
            ));
        }
        Ok(self
            .records
            .iter()
            .map(|r| AbstainingPrediction {
                decided_class: if r.confidence >= threshold {
                    r.predicted_class
                } else {
                    ABSTAIN_CLASS
                },
                true_label: r.true_label,
                weight: r.weight,
            })
            .collect())
    }
}

/// A prediction after the abstaining decision: either a real class or
/// [`ABSTAIN_CLASS`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbstainingPrediction {
    decided_class: u32,
    true_label: u32,
    weight: f64,
}

impl AbstainingPrediction {
    pub fn decided_class(&self) -> u32 {
        self.decided_class
    }

    pub fn true_label(&self) -> u32 {
        self.true_label
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn is_abstain(&self) -> bool {
        self.decided_class == ABSTAIN_CLASS
    }

    /// Correct means decided and matching; abstentions are never correct.
    pub fn is_correct(&self) -> bool {
        self.decided_class == self.true_label
    }
}

/// Weighted tallies of the three possible outcomes of an abstaining decision.
///
/// `total` is the grand weight sum accumulated in the same pass (not the sum
/// of the three buckets), so value formulas divide by exactly the dataset's
/// total weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeCounts {
    n_correct: f64,
    n_abstain: f64,
    n_wrong: f64,
    total: f64,
}

impl OutcomeCounts {
    /// Builds counts directly. The total is the bucket sum.
    pub fn new(n_correct: f64, n_abstain: f64, n_wrong: f64) -> Result<Self> {
        for (field, v) in [
            ("n_correct", n_correct),
            ("n_abstain", n_abstain),
            ("n_wrong", n_wrong),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::field(
                    field,
                    format!("must be non-negative and finite, got {v}"),
                ));
            }
        }
        Ok(OutcomeCounts {
            n_correct,
            n_abstain,
            n_wrong,
            total: n_correct + n_abstain + n_wrong,
        })
    }

    pub fn n_correct(&self) -> f64 {
        self.n_correct
    }

    pub fn n_abstain(&self) -> f64 {
        self.n_abstain
    }

    pub fn n_wrong(&self) -> f64 {
        self.n_wrong
    }

    /// Total weight of the counted predictions.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Total value under a use case: each outcome bucket times its value.
    pub fn raw_value(&self, use_case: &UseCase) -> f64 {
        self.n_correct * use_case.v_correct
            + self.n_abstain * use_case.v_abstain
            + self.n_wrong * use_case.v_wrong
    }

    /// Dimensionless value `(n_correct − ω·n_wrong) / total`.
    ///
    /// 0 is "abstain on everything", 1 is "everything correct". Note the
    /// single division: computing `n_correct/total − ω·(n_wrong/total)`
    /// instead would round differently and, for example, miss the exact zero
    /// at counts (3, 0, 2) with ω = 1.5.
    pub fn dimensionless_value(&self, penalty: Penalty) -> Result<f64> {
        if self.total <= 0.0 {
            return Err(Error::field("total", "zero total weight"));
        }
        Ok((self.n_correct - penalty.value() * self.n_wrong) / self.total)
    }
}

/// Tallies outcomes over abstaining predictions in their given order.
///
/// One pass, one accumulator per bucket plus one for the grand total, so the
/// result is a pure function of the sequence.
pub fn count_outcomes(predictions: &[AbstainingPrediction]) -> Result<OutcomeCounts> {
    if predictions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut n_correct = 0.0;
    let mut n_abstain = 0.0;
    let mut n_wrong = 0.0;
    let mut total = 0.0;
    for p in predictions {
        if p.is_abstain() {
            n_abstain += p.weight;
        } else if p.is_correct() {
            n_correct += p.weight;
        } else {
            n_wrong += p.weight;
        }
        total += p.weight;
    }
    Ok(OutcomeCounts {
        n_correct,
        n_abstain,
        n_wrong,
        total,
    })
}

/// Per-outcome values defining what the classifier's decisions are worth.
///
/// The interesting regime — enforced at construction — is
/// `v_wrong ≤ v_abstain < v_correct`: being right beats abstaining, and
/// abstaining is at least as good as being wrong.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UseCase {
    v_correct: f64,
    v_abstain: f64,
    v_wrong: f64,
}

impl UseCase {
    pub fn new(v_correct: f64, v_abstain: f64, v_wrong: f64) -> Result<Self> {
        for (field, v) in [
            ("v_correct", v_correct),
            ("v_abstain", v_abstain),
            ("v_wrong", v_wrong),
        ] {
            if !v.is_finite() {
                return Err(Error::field(field, format!("must be finite, got {v}")));
            }
        }
        if v_abstain >= v_correct {
            return Err(Error::AbstentionDominates);
        }
        if v_wrong > v_abstain {
            return Err(Error::NeverAbstain);
        }
        Ok(UseCase {
            v_correct,
            v_abstain,
            v_wrong,
        })
    }

    pub fn v_correct(&self) -> f64 {
        self.v_correct
    }

    pub fn v_abstain(&self) -> f64 {
        self.v_abstain
    }

    pub fn v_wrong(&self) -> f64 {
        self.v_wrong
    }

    /// The use case collapsed to its single degree of freedom: the penalty
    /// `ω = −(v_wrong − v_abstain) / (v_correct − v_abstain)`.
    ///
    /// Infallible because construction already rejected the degenerate
    /// orderings; the result is always finite and non-negative.
    pub fn penalty(&self) -> Penalty {
        Penalty(-(self.v_wrong - self.v_abstain) / (self.v_correct - self.v_abstain))
    }
}

/// The penalty ω: how many correct answers one wrong answer erases, measured
/// in units of (correct − abstain) value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Penalty(f64);

impl Penalty {
    pub fn new(omega: f64) -> Result<Self> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(Error::field(
                "omega",
                format!("must be finite and non-negative, got {omega}"),
            ));
        }
        Ok(Penalty(omega))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Maps a raw value onto the dimensionless scale of a use case:
/// `(raw − W·v_abstain) / (W·(v_correct − v_abstain))` for total weight `W`.
///
/// Equals [`OutcomeCounts::dimensionless_value`] at the use case's penalty up
/// to rounding, which is exercised by tests at 1e−12.
pub fn normalize_value(raw: f64, use_case: &UseCase, total_weight: f64) -> Result<f64> {
    if !total_weight.is_finite() || total_weight <= 0.0 {
        return Err(Error::field(
            "total_weight",
            format!("must be positive and finite, got {total_weight}"),
        ));
    }
    Ok((raw - total_weight * use_case.v_abstain)
        / (total_weight * (use_case.v_correct - use_case.v_abstain)))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rec(c: f64, correct: bool) -> PredictionRecord {
        // class 1 predictions against label 1 (correct) or 2 (wrong)
        PredictionRecord::unweighted(c, 1, if correct { 1 } else { 2 }).unwrap()
    }

    /// The five-record worked instance used across the test suite.
    pub(crate) fn d1() -> ScoredDataset {
        ScoredDataset::new(vec![
            rec(0.9, true),
            rec(0.8, true),
            rec(0.7, false),
            rec(0.6, true),
            rec(0.5, false),
        ])
        .unwrap()
    }

    #[test]
    fn record_validation_rejects_bad_fields() {
        assert!(PredictionRecord::new(1.2, 1, 1, 1.0).is_err());
        assert!(PredictionRecord::new(-0.1, 1, 1, 1.0).is_err());
        assert!(PredictionRecord::new(f64::NAN, 1, 1, 1.0).is_err());
        assert!(PredictionRecord::new(0.5, 0, 1, 1.0).is_err());
        assert!(PredictionRecord::new(0.5, 1, 0, 1.0).is_err());
        assert!(PredictionRecord::new(0.5, 1, 1, 0.0).is_err());
        assert!(PredictionRecord::new(0.5, 1, 1, -1.0).is_err());
        assert!(PredictionRecord::new(0.5, 1, 1, f64::INFINITY).is_err());
        assert!(PredictionRecord::new(0.0, 3, 7, 2.5).is_ok());
        assert!(PredictionRecord::new(1.0, 3, 7, 2.5).is_ok());
    }

    #[test]
    fn empty_dataset_is_rejected() {
        match ScoredDataset::new(vec![]) {
            Err(Error::EmptyDataset) => {}
            other => panic!("expected EmptyDataset, got {other:?}"),
        }
    }

    #[test]
    fn canonical_order_sorts_by_confidence_then_correctness() {
        let ds = ScoredDataset::new(vec![
            rec(0.7, true),
            rec(0.9, false),
            rec(0.9, true),
            rec(0.7, false),
        ])
        .unwrap();
        let key: Vec<(f64, bool)> = ds
            .records()
            .iter()
            .map(|r| (r.confidence(), r.is_correct()))
            .collect();
        assert_eq!(
            key,
            vec![(0.9, true), (0.9, false), (0.7, true), (0.7, false)]
        );
    }

    #[test]
    fn canonical_order_is_input_stable_for_full_ties() {
        // Two records identical in confidence and correctness keep input order.
        let a = PredictionRecord::new(0.5, 1, 1, 2.0).unwrap();
        let b = PredictionRecord::new(0.5, 3, 3, 4.0).unwrap();
        let ds = ScoredDataset::new(vec![a, b]).unwrap();
        assert_eq!(ds.records()[0].weight(), 2.0);
        assert_eq!(ds.records()[1].weight(), 4.0);
    }

    #[test]
    fn threshold_boundary_is_accepted() {
        let ds = ScoredDataset::new(vec![rec(0.9, true), rec(0.8, true), rec(0.5, false)]).unwrap();
        let preds = ds.apply_threshold(0.8).unwrap();
        let decided: Vec<u32> = preds.iter().map(|p| p.decided_class()).collect();
        assert_eq!(decided, vec![1, 1, ABSTAIN_CLASS]);
    }

    #[test]
    fn threshold_above_one_always_abstains() {
        let preds = d1().apply_threshold(1.5).unwrap();
        assert!(preds.iter().all(|p| p.is_abstain()));
    }

    #[test]
    fn threshold_zero_never_abstains() {
        let preds = d1().apply_threshold(0.0).unwrap();
        assert!(preds.iter().all(|p| !p.is_abstain()));
    }

    #[test]
    fn negative_or_nan_threshold_is_rejected() {
        assert!(d1().apply_threshold(-0.1).is_err());
        assert!(d1().apply_threshold(f64::NAN).is_err());
    }

    #[test]
    fn count_outcomes_on_d1() {
        let counts = count_outcomes(&d1().apply_threshold(0.8).unwrap()).unwrap();
        assert_eq!(counts.n_correct(), 2.0);
        assert_eq!(counts.n_abstain(), 3.0);
        assert_eq!(counts.n_wrong(), 0.0);
        assert_eq!(counts.total(), 5.0);
    }

    #[test]
    fn count_outcomes_rejects_empty() {
        assert!(matches!(count_outcomes(&[]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn partition_is_exact_for_dyadic_weights() {
        // Dyadic weights make every partial sum exact, so the bucket sum
        // reproduces the grand total bitwise.
        let ds = ScoredDataset::new(vec![
            PredictionRecord::new(0.9, 1, 1, 0.5).unwrap(),
            PredictionRecord::new(0.7, 1, 2, 2.25).unwrap(),
            PredictionRecord::new(0.4, 2, 2, 1.125).unwrap(),
            PredictionRecord::new(0.2, 2, 3, 4.0).unwrap(),
        ]);
        let ds = ds.unwrap();
        for t in [0.0, 0.3, 0.5, 0.8, 1.5] {
            let c = count_outcomes(&ds.apply_threshold(t).unwrap()).unwrap();
            assert_eq!(c.n_correct() + c.n_abstain() + c.n_wrong(), c.total());
            assert_eq!(c.total(), ds.total_weight());
        }
    }

    #[test]
    fn raw_value_example() {
        let counts = OutcomeCounts::new(10.0, 5.0, 3.0).unwrap();
        let uc = UseCase::new(2.0, 0.5, -1.0).unwrap();
        assert_eq!(counts.raw_value(&uc), 19.5);
    }

    #[test]
    fn dimensionless_value_examples() {
        let counts = OutcomeCounts::new(3.0, 0.0, 2.0).unwrap();
        assert_eq!(
            counts.dimensionless_value(Penalty::new(1.0).unwrap()).unwrap(),
            0.2
        );
        // Exact zero: one wrong at omega = 1.5 erases exactly 1.5 corrects.
        assert_eq!(
            counts.dimensionless_value(Penalty::new(1.5).unwrap()).unwrap(),
            0.0
        );
        let counts = OutcomeCounts::new(2.0, 3.0, 0.0).unwrap();
        assert_eq!(
            counts.dimensionless_value(Penalty::new(7.0).unwrap()).unwrap(),
            0.4
        );
    }

    #[test]
    fn dimensionless_value_rejects_zero_total() {
        let counts = OutcomeCounts::new(0.0, 0.0, 0.0).unwrap();
        assert!(counts
            .dimensionless_value(Penalty::new(1.0).unwrap())
            .is_err());
    }

    #[test]
    fn penalty_examples() {
        let uc = UseCase::new(2.0, 0.5, -1.0).unwrap();
        assert_eq!(uc.penalty().value(), 1.0);
        let uc = UseCase::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(uc.penalty().value(), 0.0);
    }

    #[test]
    fn degenerate_use_cases_are_rejected() {
        match UseCase::new(1.0, 1.0, 0.0) {
            Err(Error::AbstentionDominates) => {}
            other => panic!("expected AbstentionDominates, got {other:?}"),
        }
        match UseCase::new(1.0, 0.0, 0.5) {
            Err(Error::NeverAbstain) => {}
            other => panic!("expected NeverAbstain, got {other:?}"),
        }
        // Both violated: the abstention check fires first.
        match UseCase::new(0.0, 1.0, 2.0) {
            Err(Error::AbstentionDominates) => {}
            other => panic!("expected AbstentionDominates, got {other:?}"),
        }
    }

    #[test]
    fn penalty_rejects_negative_and_nan() {
        assert!(Penalty::new(-0.5).is_err());
        assert!(Penalty::new(f64::NAN).is_err());
        assert!(Penalty::new(f64::INFINITY).is_err());
    }

    #[test]
    fn normalize_value_matches_dimensionless() {
        let counts = OutcomeCounts::new(10.0, 5.0, 3.0).unwrap();
        let uc = UseCase::new(2.0, 0.5, -1.0).unwrap();
        let raw = counts.raw_value(&uc);
        let normalized = normalize_value(raw, &uc, counts.total()).unwrap();
        let direct = counts.dimensionless_value(uc.penalty()).unwrap();
        assert_abs_diff_eq!(normalized, direct, epsilon = 1e-12);
        assert_abs_diff_eq!(normalized, 10.5 / 27.0, epsilon = 1e-15);
    }

    #[test]
    fn normalize_value_rejects_bad_total() {
        let uc = UseCase::new(1.0, 0.0, 0.0).unwrap();
        assert!(normalize_value(1.0, &uc, 0.0).is_err());
        assert!(normalize_value(1.0, &uc, -3.0).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Records with dyadic weights (exactly summable) and grid confidences.
        fn dyadic_record() -> impl Strategy<Value = PredictionRecord> {
            (0u32..=256, 1u32..=4, 1u32..=4, 1u32..=32).prop_map(|(c, p, l, w)| {
                PredictionRecord::new(c as f64 / 256.0, p, l, w as f64 / 8.0).unwrap()
            })
        }

        fn dyadic_dataset() -> impl Strategy<Value = ScoredDataset> {
            proptest::collection::vec(dyadic_record(), 1..60)
                .prop_map(|rs| ScoredDataset::new(rs).unwrap())
        }

        proptest! {
            #[test]
            fn partition_always_recovers_total(ds in dyadic_dataset(), t in 0.0f64..1.2) {
                let counts = count_outcomes(&ds.apply_threshold(t).unwrap()).unwrap();
                prop_assert_eq!(
                    counts.n_correct() + counts.n_abstain() + counts.n_wrong(),
                    counts.total()
                );
                prop_assert_eq!(counts.total(), ds.total_weight());
            }

            #[test]
            fn raising_threshold_never_increases_decided_weight(
                ds in dyadic_dataset(),
                t1 in 0.0f64..1.2,
                t2 in 0.0f64..1.2,
            ) {
                let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
                let at = |t: f64| {
                    let c = count_outcomes(&ds.apply_threshold(t).unwrap()).unwrap();
                    c.n_correct() + c.n_wrong()
                };
                prop_assert!(at(hi) <= at(lo));
            }

            #[test]
            fn dimensionless_value_is_affine_in_omega(
                ds in dyadic_dataset(),
                t in 0.0f64..1.2,
                w1 in 0.0f64..8.0,
                w2 in 0.0f64..8.0,
            ) {
                let counts = count_outcomes(&ds.apply_threshold(t).unwrap()).unwrap();
                let v1 = counts.dimensionless_value(Penalty::new(w1).unwrap()).unwrap();
                let v2 = counts.dimensionless_value(Penalty::new(w2).unwrap()).unwrap();
                let slope = -counts.n_wrong() / counts.total();
                prop_assert!(((v2 - v1) - slope * (w2 - w1)).abs() <= 1e-12);
            }
        }
    }
}
