//! Calibration diagnostics and repair: accuracy, expected calibration error,
//! monotone (isotonic) confidence rescaling, and the discrimination metric.
//!
//! Everything here is weighted and deterministic: sums run left-to-right in
//! the dataset's canonical order, so repeated runs over the same data produce
//! bit-identical numbers.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{PredictionRecord, ScoredDataset};

/// Weighted accuracy: correct weight over total weight.
///
/// Equals the dimensionless value at ω = 0 with threshold 0 — accepting
/// everything and charging nothing for mistakes grades pure correctness.
pub fn accuracy(data: &ScoredDataset) -> f64 {
    let mut correct = 0.0;
    for r in data.records() {
        if r.is_correct() {
            correct += r.weight();
        }
    }
    correct / data.total_weight()
}

/// Index of the equal-width bin holding `confidence`, with 1.0 folded into
/// the top bin.
pub(crate) fn bin_index(confidence: f64, n_bins: usize) -> usize {
    ((confidence * n_bins as f64) as usize).min(n_bins - 1)
}

/// Expected calibration error over `n_bins` equal-width confidence bins:
/// the weighted mean over bins of |bin accuracy − bin mean confidence|.
/// Empty bins contribute nothing.
pub fn ece(data: &ScoredDataset, n_bins: usize) -> Result<f64> {
    if n_bins == 0 {
        return Err(Error::field("n_bins", "must be positive"));
    }
    let mut weight = vec![0.0f64; n_bins];
    let mut confidence = vec![0.0f64; n_bins];
    let mut correct = vec![0.0f64; n_bins];
    for r in data.records() {
        let b = bin_index(r.confidence(), n_bins);
        weight[b] += r.weight();
        confidence[b] += r.weight() * r.confidence();
        if r.is_correct() {
            correct[b] += r.weight();
        }
    }
    let mut total = 0.0;
    for b in 0..n_bins {
        if weight[b] > 0.0 {
            total += weight[b] * (correct[b] / weight[b] - confidence[b] / weight[b]).abs();
        }
    }
    Ok(total / data.total_weight())
}

/// A monotone step rescaling of confidences, produced by
/// [`isotonic_rescale`]. Maps each input confidence to the fitted value of
/// the nearest breakpoint at or below it; inputs below the first breakpoint
/// take the first output.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MonotoneRescale {
    /// Strictly increasing input confidences.
    breakpoints: Vec<f64>,
    /// Non-decreasing rescaled outputs, same length, all in [0, 1].
    outputs: Vec<f64>,
}

impl<'de> serde::Deserialize<'de> for MonotoneRescale {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wire {
            breakpoints: Vec<f64>,
            outputs: Vec<f64>,
        }
        let wire = Wire::deserialize(deserializer)?;
        MonotoneRescale::new(wire.breakpoints, wire.outputs).map_err(serde::de::Error::custom)
    }
}

impl MonotoneRescale {
    /// Builds a rescale from parallel breakpoint/output arrays, validating
    /// monotonicity and range.
    pub fn new(breakpoints: Vec<f64>, outputs: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != outputs.len() {
            return Err(Error::field(
                "breakpoints",
                format!(
                    "need matching non-empty arrays, got {} breakpoints and {} outputs",
                    breakpoints.len(),
                    outputs.len()
                ),
            ));
        }
        for &b in &breakpoints {
            if !b.is_finite() || !(0.0..=1.0).contains(&b) {
                return Err(Error::field(
                    "breakpoints",
                    format!("must lie in [0, 1], got {b}"),
                ));
            }
        }
        for pair in breakpoints.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::field(
                    "breakpoints",
                    format!(
                        "must increase strictly, got {} then {}",
                        pair[0], pair[1]
                    ),
                ));
            }
        }
        for &o in &outputs {
            if !o.is_finite() || !(0.0..=1.0).contains(&o) {
                return Err(Error::field(
                    "outputs",
                    format!("must lie in [0, 1], got {o}"),
                ));
            }
        }
        for pair in outputs.windows(2) {
            if pair[1] < pair[0] {
                return Err(Error::field(
                    "outputs",
                    format!(
                        "must be non-decreasing, got {} then {}",
                        pair[0], pair[1]
                    ),
                ));
            }
        }
        Ok(MonotoneRescale {
            breakpoints,
            outputs,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    /// Rescaled confidence for an input confidence.
    pub fn map(&self, confidence: f64) -> f64 {
        let idx = self
            .breakpoints
            .partition_point(|&b| b <= confidence);
        if idx == 0 {
            self.outputs[0]
        } else {
            self.outputs[idx - 1]
        }
    }
}

/// Weighted isotonic regression (pool-adjacent-violators) of correctness on
/// confidence.
///
/// Distinct confidences become breakpoints; each starts at its own weighted
/// accuracy, and adjacent blocks that violate monotonicity are pooled into
/// their weighted mean until the sequence is non-decreasing. The result is
/// the least-squares monotone fit, returned as a step rescaling.
pub fn isotonic_rescale(data: &ScoredDataset) -> MonotoneRescale {
    // Group by distinct confidence, ascending. Canonical order is descending,
    // so walk it in reverse; sums stay deterministic.
    let mut confidences: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut corrects: Vec<f64> = Vec::new();
    for r in data.records().iter().rev() {
        if confidences.last() != Some(&r.confidence()) {
            confidences.push(r.confidence());
            weights.push(0.0);
            corrects.push(0.0);
        }
        *weights.last_mut().expect("just pushed") += r.weight();
        if r.is_correct() {
            *corrects.last_mut().expect("just pushed") += r.weight();
        }
    }

    // Pool adjacent violators. Each block keeps (start index, weight sum,
    // correct sum); a block's fitted value is correct/weight.
    struct Block {
        start: usize,
        weight: f64,
        correct: f64,
    }
    let mut blocks: Vec<Block> = Vec::with_capacity(confidences.len());
    for i in 0..confidences.len() {
        blocks.push(Block {
            start: i,
            weight: weights[i],
            correct: corrects[i],
        });
        while blocks.len() >= 2 {
            let hi = &blocks[blocks.len() - 1];
            let lo = &blocks[blocks.len() - 2];
            if lo.correct * hi.weight > hi.correct * lo.weight {
                // lo's mean exceeds hi's mean (cross-multiplied): pool.
                let hi = blocks.pop().expect("len checked");
                let lo = blocks.last_mut().expect("len checked");
                lo.weight += hi.weight;
                lo.correct += hi.correct;
            } else {
                break;
            }
        }
    }

    let mut outputs = vec![0.0f64; confidences.len()];
    for (b, block) in blocks.iter().enumerate() {
        let end = blocks
            .get(b + 1)
            .map(|next| next.start)
            .unwrap_or(confidences.len());
        let value = block.correct / block.weight;
        for slot in &mut outputs[block.start..end] {
            *slot = value;
        }
    }
    MonotoneRescale {
        breakpoints: confidences,
        outputs,
    }
}

/// Applies a rescale to every record, preserving correctness, classes, and
/// weights.
pub fn apply_rescale(data: &ScoredDataset, rescale: &MonotoneRescale) -> ScoredDataset {
    let records: Vec<PredictionRecord> = data
        .records()
        .iter()
        .map(|r| {
            r.with_confidence(rescale.map(r.confidence()))
                .expect("rescale outputs are valid confidences")
        })
        .collect();
    ScoredDataset::new(records).expect("rescaling a valid dataset stays valid")
}

/// Discrimination diagnostics: how decisively confidences commit.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DiscriminationReport {
    /// Weighted mean of (½ − c)²: distance of confidences from the fence.
    pub discrimination: f64,
    /// Weighted mean of c²: confidence mass behaving high.
    pub high_component: f64,
    /// Weighted mean of (1 − c)²: confidence mass behaving low.
    pub low_component: f64,
}

/// Weighted mean squared distance of confidence from ½, with its high/low
/// decomposition. The components satisfy
/// `(high + low) / 2 = discrimination + ¼` up to rounding.
pub fn discrimination(data: &ScoredDataset) -> DiscriminationReport {
    let mut disc = 0.0;
    let mut high = 0.0;
    let mut low = 0.0;
    for r in data.records() {
        let c = r.confidence();
        let w = r.weight();
        let gap = 0.5 - c;
        disc += w * (gap * gap);
        high += w * (c * c);
        low += w * ((1.0 - c) * (1.0 - c));
    }
    let total = data.total_weight();
    DiscriminationReport {
        discrimination: disc / total,
        high_component: high / total,
        low_component: low / total,
    }
}

/// Per-bin calibration table used by reports: weight share, mean confidence,
/// and accuracy for each non-empty equal-width bin.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CalibrationBin {
    pub bin: usize,
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
    pub mean_confidence: f64,
    pub accuracy: f64,
}

/// Non-empty calibration bins in ascending order.
pub fn calibration_bins(data: &ScoredDataset, n_bins: usize) -> Result<Vec<CalibrationBin>> {
    if n_bins == 0 {
        return Err(Error::field("n_bins", "must be positive"));
    }
    let mut acc: BTreeMap<usize, (f64, f64, f64)> = BTreeMap::new();
    for r in data.records() {
        let b = bin_index(r.confidence(), n_bins);
        let slot = acc.entry(b).or_insert((0.0, 0.0, 0.0));
        slot.0 += r.weight();
        slot.1 += r.weight() * r.confidence();
        if r.is_correct() {
            slot.2 += r.weight();
        }
    }
    Ok(acc
        .into_iter()
        .map(|(b, (w, c, k))| CalibrationBin {
            bin: b,
            lo: b as f64 / n_bins as f64,
            hi: (b + 1) as f64 / n_bins as f64,
            weight: w,
            mean_confidence: c / w,
            accuracy: k / w,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{count_outcomes, PredictionRecord, ScoredDataset};
    use approx::assert_abs_diff_eq;

    fn d1() -> ScoredDataset {
        crate::model::tests::d1()
    }

    #[test]
    fn accuracy_of_the_worked_dataset() {
        assert_eq!(accuracy(&d1()), 0.6);
    }

    #[test]
    fn accuracy_matches_accept_everything_value_bitwise() {
        let data = d1();
        let counts = count_outcomes(&data.apply_threshold(0.0).unwrap()).unwrap();
        let value = counts
            .dimensionless_value(crate::model::Penalty::new(0.0).unwrap())
            .unwrap();
        assert_eq!(accuracy(&data), value);
    }

    #[test]
    fn bin_index_folds_the_top_edge() {
        assert_eq!(bin_index(0.0, 10), 0);
        assert_eq!(bin_index(0.05, 10), 0);
        assert_eq!(bin_index(0.1, 10), 1);
        assert_eq!(bin_index(0.999, 10), 9);
        assert_eq!(bin_index(1.0, 10), 9);
        assert_eq!(bin_index(1.0, 15), 14);
    }

    #[test]
    fn ece_zero_for_a_calibrated_population() {
        // Two confidence levels, each realized with weights matching its
        // stated accuracy exactly.
        let records = vec![
            PredictionRecord::new(0.8, 1, 1, 0.8).unwrap(),
            PredictionRecord::new(0.8, 1, 2, 0.2).unwrap(),
            PredictionRecord::new(0.25, 1, 1, 0.25).unwrap(),
            PredictionRecord::new(0.25, 1, 2, 0.75).unwrap(),
        ];
        let data = ScoredDataset::new(records).unwrap();
        assert_abs_diff_eq!(ece(&data, 10).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ece(&data, 15).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ece_of_a_fully_overconfident_dataset() {
        // All predictions at 1.0, all wrong: ECE is exactly 1.
        let records = vec![
            PredictionRecord::unweighted(1.0, 1, 2).unwrap(),
            PredictionRecord::unweighted(1.0, 3, 2).unwrap(),
        ];
        let data = ScoredDataset::new(records).unwrap();
        assert_eq!(ece(&data, 10).unwrap(), 1.0);
    }

    #[test]
    fn ece_mixed_bins_hand_computed() {
        // Bin [0.6, 0.7): weight 2, accuracy 1/2, mean confidence 0.625
        //   → contributes 2·|0.5 − 0.625|
        // Bin [0.9, 1.0]: weight 2, accuracy 1, mean confidence 0.9
        //   → contributes 2·|1 − 0.9|
        // ECE = (2·0.125 + 2·0.1)/4 = 0.1125
        let records = vec![
            PredictionRecord::unweighted(0.6, 1, 1).unwrap(),
            PredictionRecord::unweighted(0.65, 1, 2).unwrap(),
            PredictionRecord::unweighted(0.9, 1, 1).unwrap(),
            PredictionRecord::unweighted(0.9, 1, 1).unwrap(),
        ];
        let data = ScoredDataset::new(records).unwrap();
        assert_abs_diff_eq!(ece(&data, 10).unwrap(), 0.1125, epsilon = 1e-12);

        // A bin boundary value belongs to the upper bin: 0.7 starts
        // [0.7, 0.8), so moving the wrong record there adds its own bin.
        let records = vec![
            PredictionRecord::unweighted(0.6, 1, 1).unwrap(),
            PredictionRecord::unweighted(0.7, 1, 2).unwrap(),
            PredictionRecord::unweighted(0.9, 1, 1).unwrap(),
            PredictionRecord::unweighted(0.9, 1, 1).unwrap(),
        ];
        let data = ScoredDataset::new(records).unwrap();
        assert_abs_diff_eq!(ece(&data, 10).unwrap(), 0.325, epsilon = 1e-12);
    }

    #[test]
    fn ece_rejects_zero_bins() {
        assert!(ece(&d1(), 0).is_err());
    }

    #[test]
    fn isotonic_fits_an_already_monotone_dataset_exactly() {
        // Accuracy rises with confidence: no pooling happens, breakpoints
        // keep their own bin accuracies.
        let records = vec![
            PredictionRecord::unweighted(0.2, 1, 2).unwrap(),
            PredictionRecord::unweighted(0.2, 1, 2).unwrap(),
            PredictionRecord::unweighted(0.6, 1, 1).unwrap(),
            PredictionRecord::unweighted(0.6, 1, 2).unwrap(),
            PredictionRecord::unweighted(0.9, 1, 1).unwrap(),
        ];
        let data = ScoredDataset::new(records).unwrap();
        let rescale = isotonic_rescale(&data);
        assert_eq!(rescale.breakpoints(), &[0.2, 0.6, 0.9]);
        assert_eq!(rescale.outputs(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn isotonic_pools_violating_neighbors() {
        // 0.3 → accuracy 1, 0.7 → accuracy 0: a violation pooled into the
        // shared weighted mean 1/2 across both breakpoints.
        let records = vec![
            PredictionRecord::unweighted(0.3, 1, 1).unwrap(),
            PredictionRecord::unweighted(0.7, 1, 2).unwrap(),
        ];
        let data = ScoredDataset::new(records).unwrap();
        let rescale = isotonic_rescale(&data);
        assert_eq!(rescale.breakpoints(), &[0.3, 0.7]);
        assert_eq!(rescale.outputs(), &[0.5, 0.5]);
    }

    #[test]
    fn isotonic_pooling_cascades_leftward() {
        // Means 0.0, 1.0, 0.0 (weights 1, 1, 2): the right pool (1,0,weights
        // 1+2 → 1/3) still violates the left 0 mean? No — 0 ≤ 1/3. Pool is
        // [0], [1/3, 1/3].
        let records = vec![
            PredictionRecord::unweighted(0.1, 1, 2).unwrap(),
            PredictionRecord::unweighted(0.5, 1, 1).unwrap(),
            PredictionRecord::unweighted(0.9, 1, 2).unwrap(),
            PredictionRecord::unweighted(0.9, 1, 2).unwrap(),
        ];
        let data = ScoredDataset::new(records).unwrap();
        let rescale = isotonic_rescale(&data);
        assert_eq!(rescale.breakpoints(), &[0.1, 0.5, 0.9]);
        let outs = rescale.outputs();
        assert_eq!(outs[0], 0.0);
        assert_abs_diff_eq!(outs[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(outs[2], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(outs[1], outs[2]);
    }

    #[test]
    fn rescale_map_is_a_right_closed_step_function() {
        let rescale = MonotoneRescale::new(vec![0.2, 0.6], vec![0.1, 0.7]).unwrap();
        assert_eq!(rescale.map(0.0), 0.1); // below the first breakpoint
        assert_eq!(rescale.map(0.2), 0.1);
        assert_eq!(rescale.map(0.59), 0.1);
        assert_eq!(rescale.map(0.6), 0.7);
        assert_eq!(rescale.map(1.0), 0.7);
    }

    #[test]
    fn rescale_validation() {
        assert!(MonotoneRescale::new(vec![], vec![]).is_err());
        assert!(MonotoneRescale::new(vec![0.1], vec![]).is_err());
        assert!(MonotoneRescale::new(vec![0.5, 0.5], vec![0.1, 0.2]).is_err());
        assert!(MonotoneRescale::new(vec![0.1, 0.5], vec![0.8, 0.2]).is_err());
        assert!(MonotoneRescale::new(vec![0.1], vec![1.5]).is_err());
        assert!(MonotoneRescale::new(vec![-0.1], vec![0.5]).is_err());
    }

    #[test]
    fn apply_rescale_preserves_correctness_and_weights() {
        let data = d1();
        let rescale = isotonic_rescale(&data);
        let rescaled = apply_rescale(&data, &rescale);
        assert_eq!(accuracy(&data), accuracy(&rescaled));
        assert_eq!(data.total_weight(), rescaled.total_weight());
        // Isotonic output is calibrated on its own data by construction.
        assert_abs_diff_eq!(ece(&rescaled, 10).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn discrimination_of_the_worked_dataset() {
        // Confidences 0.9, 0.8, 0.7, 0.6, 0.5 → squared gaps 0.16, 0.09,
        // 0.04, 0.01, 0.00; mean 0.06.
        let report = discrimination(&d1());
        assert_abs_diff_eq!(report.discrimination, 0.06, epsilon = 1e-12);
        assert_abs_diff_eq!(
            (report.high_component + report.low_component) / 2.0,
            report.discrimination + 0.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn discrimination_extremes() {
        let fence = ScoredDataset::new(vec![
            PredictionRecord::unweighted(0.5, 1, 1).unwrap(),
        ])
        .unwrap();
        assert_eq!(discrimination(&fence).discrimination, 0.0);

        let certain = ScoredDataset::new(vec![
            PredictionRecord::unweighted(1.0, 1, 1).unwrap(),
            PredictionRecord::unweighted(0.0, 1, 2).unwrap(),
        ])
        .unwrap();
        assert_eq!(discrimination(&certain).discrimination, 0.25);
    }

    #[test]
    fn calibration_bins_skip_empty_and_stay_sorted() {
        let bins = calibration_bins(&d1(), 10).unwrap();
        let indices: Vec<usize> = bins.iter().map(|b| b.bin).collect();
        assert_eq!(indices, vec![5, 6, 7, 8, 9]);
        for b in &bins {
            assert_eq!(b.weight, 1.0);
            assert!(b.lo <= b.mean_confidence && b.mean_confidence <= b.hi);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_dataset() -> impl Strategy<Value = ScoredDataset> {
            proptest::collection::vec((0u32..=64, any::<bool>(), 1u32..=8), 1..60).prop_map(
                |rows| {
                    let records = rows
                        .into_iter()
                        .map(|(c, ok, w)| {
                            PredictionRecord::new(
                                c as f64 / 64.0,
                                1,
                                if ok { 1 } else { 2 },
                                w as f64,
                            )
                            .unwrap()
                        })
                        .collect();
                    ScoredDataset::new(records).unwrap()
                },
            )
        }

        proptest! {
            /// ECE lands in [0, 1] and a perfectly sharp correct dataset has
            /// ECE 0.
            #[test]
            fn ece_is_bounded(ds in arb_dataset(), bins in 1usize..30) {
                let e = ece(&ds, bins).unwrap();
                prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
            }

            /// Isotonic outputs are monotone, in range, and weight-mean
            /// preserving (the pooled means average back to overall
            /// accuracy).
            #[test]
            fn isotonic_outputs_are_monotone(ds in arb_dataset()) {
                let rescale = isotonic_rescale(&ds);
                let outs = rescale.outputs();
                for pair in outs.windows(2) {
                    prop_assert!(pair[1] >= pair[0]);
                }
                for &o in outs {
                    prop_assert!((0.0..=1.0).contains(&o));
                }
                for pair in rescale.breakpoints().windows(2) {
                    prop_assert!(pair[1] > pair[0]);
                }
            }

            /// Rescaling never changes accuracy or total weight, and the
            /// rescaled dataset is calibrated against itself.
            #[test]
            fn rescaling_preserves_accuracy(ds in arb_dataset()) {
                let rescale = isotonic_rescale(&ds);
                let rescaled = apply_rescale(&ds, &rescale);
                prop_assert_eq!(accuracy(&ds), accuracy(&rescaled));
                prop_assert_eq!(ds.total_weight(), rescaled.total_weight());
                prop_assert!(ece(&rescaled, 10).unwrap() <= 1e-9);
            }

            /// The high/low decomposition identity holds.
            #[test]
            fn discrimination_identity(ds in arb_dataset()) {
                let rep = discrimination(&ds);
                prop_assert!(
                    ((rep.high_component + rep.low_component) / 2.0
                        - (rep.discrimination + 0.25))
                        .abs()
                        <= 1e-12
                );
                prop_assert!(rep.discrimination >= 0.0);
                prop_assert!(rep.discrimination <= 0.25 + 1e-15);
            }
        }
    }
}
