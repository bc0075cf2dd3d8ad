//! Report assembly: a JSON-serializable projection of every metric this
//! crate computes for a dataset.
//!
//! Reports add no arithmetic of their own — every number is the result of
//! one library call — and serialize deterministically: struct field order is
//! fixed, collections are pre-sorted, and floats render in shortest
//! round-trip form.

use crate::calibration::{
    accuracy, calibration_bins, discrimination, ece, CalibrationBin, DiscriminationReport,
};
use crate::error::{Error, Result};
use crate::model::{count_outcomes, OutcomeCounts, Penalty, ScoredDataset};
use crate::threshold::{calibrated_threshold, optimize_threshold};
use crate::voc::{omega_aware_voc, Band, ExtendedReal, VocCurve};

/// Default number of equal-width ECE bins in reports.
pub const DEFAULT_ECE_BINS: usize = 15;

/// One endpoint of a band request: a number, the curve's own ω_sup, or ∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandLimit {
    Value(f64),
    OmegaSup,
    Infinity,
}

/// An unresolved band request (`lo:hi` on the command line, where `hi` may
/// be the keyword `sup` or `inf`). Resolution substitutes the curve's ω_sup
/// for `sup`; a band that comes out empty yields area 0 rather than an
/// error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub lo: f64,
    pub hi: BandLimit,
}

impl BandSpec {
    /// The default report bands: `[0, 1)` and `[1, sup)`.
    pub fn defaults() -> Vec<BandSpec> {
        vec![
            BandSpec {
                lo: 0.0,
                hi: BandLimit::Value(1.0),
            },
            BandSpec {
                lo: 1.0,
                hi: BandLimit::OmegaSup,
            },
        ]
    }

    /// Resolves against a curve's ω_sup. Returns the concrete endpoints and
    /// the band to integrate, or `None` for an empty band.
    fn resolve(&self, omega_sup: ExtendedReal) -> Result<(ExtendedReal, Option<Band>)> {
        let hi = match self.hi {
            BandLimit::Value(v) => ExtendedReal::Finite(v),
            BandLimit::Infinity => ExtendedReal::Infinity,
            BandLimit::OmegaSup => omega_sup,
        };
        let band = match hi {
            ExtendedReal::Finite(h) if h <= self.lo => None,
            ExtendedReal::Finite(h) => Some(Band::bounded(self.lo, h)?),
            ExtendedReal::Infinity => Some(Band::unbounded(self.lo)?),
        };
        Ok((hi, band))
    }
}

impl std::str::FromStr for BandSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| {
            Error::field("band", format!("expected LO:HI, got {s:?}"))
        })?;
        let lo: f64 = lo
            .parse()
            .map_err(|_| Error::field("band", format!("bad lower endpoint {lo:?}")))?;
        if !lo.is_finite() || lo < 0.0 {
            return Err(Error::field(
                "band",
                format!("lower endpoint must be finite and non-negative, got {lo}"),
            ));
        }
        let hi = match hi {
            "sup" => BandLimit::OmegaSup,
            "inf" => BandLimit::Infinity,
            other => {
                let v: f64 = other.parse().map_err(|_| {
                    Error::field("band", format!("bad upper endpoint {other:?}"))
                })?;
                if !v.is_finite() || v <= lo {
                    return Err(Error::field(
                        "band",
                        format!("upper endpoint must exceed the lower, got [{lo}, {v})"),
                    ));
                }
                BandLimit::Value(v)
            }
        };
        Ok(BandSpec { lo, hi })
    }
}

/// Outcome counts in serializable form.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CountsSection {
    pub n_correct: f64,
    pub n_abstain: f64,
    pub n_wrong: f64,
    pub total: f64,
}

impl From<&OutcomeCounts> for CountsSection {
    fn from(c: &OutcomeCounts) -> Self {
        CountsSection {
            n_correct: c.n_correct(),
            n_abstain: c.n_abstain(),
            n_wrong: c.n_wrong(),
            total: c.total(),
        }
    }
}

/// `eval` command output: value of one dataset at one frozen threshold.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EvalOutput {
    pub threshold: f64,
    pub omega: f64,
    pub counts: CountsSection,
    /// Raw (unit-bearing) value — present only when the use case supplied
    /// the full value triple.
    pub raw_value: Option<f64>,
    pub dimensionless_value: f64,
}

/// `optimize` command output.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OptimizeOutput {
    pub omega: f64,
    pub threshold: f64,
    pub achieved_value: f64,
    pub accepted_weight: f64,
    pub calibrated_threshold: f64,
    /// Value re-measured on a held-out test file at the tuned threshold.
    pub test_value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DatasetSummary {
    pub records: usize,
    pub total_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EceSection {
    pub n_bins: usize,
    pub value: f64,
}

/// One tuned threshold row: optimized on the tuning set, measured on the
/// evaluation set.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ThresholdRow {
    pub omega: f64,
    pub threshold: f64,
    pub achieved_value: f64,
    pub accepted_weight: f64,
    pub calibrated_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KnotRow {
    pub omega_start: f64,
    pub intercept_a: f64,
    pub slope_b: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BandRow {
    pub lo: f64,
    pub hi: ExtendedReal,
    pub auc: ExtendedReal,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct VocSection {
    pub mode: String,
    pub omega_sup: ExtendedReal,
    pub auc_full: ExtendedReal,
    pub bands: Vec<BandRow>,
    pub knots: Vec<KnotRow>,
}

/// The full report document.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Report {
    pub dataset: DatasetSummary,
    pub accuracy: f64,
    pub ece: EceSection,
    pub discrimination: DiscriminationReport,
    pub calibration_bins: Vec<CalibrationBin>,
    pub thresholds: Vec<ThresholdRow>,
    pub voc: VocSection,
    /// Path of the SVG written alongside this report, if any.
    pub svg: Option<String>,
    /// Path of the knot CSV written alongside this report, if any.
    pub curve_csv: Option<String>,
}

/// Report assembly options.
#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub ece_bins: usize,
    /// Penalties to tune thresholds for; sorted and deduplicated during
    /// assembly.
    pub omegas: Vec<Penalty>,
    pub bands: Vec<BandSpec>,
    pub svg: Option<String>,
    pub curve_csv: Option<String>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            ece_bins: DEFAULT_ECE_BINS,
            omegas: Vec::new(),
            bands: BandSpec::defaults(),
            svg: None,
            curve_csv: None,
        }
    }
}

/// Knot rows of a curve.
pub fn knot_rows(curve: &VocCurve) -> Vec<KnotRow> {
    curve
        .pieces()
        .iter()
        .map(|p| KnotRow {
            omega_start: p.omega_start(),
            intercept_a: p.line().intercept_a(),
            slope_b: p.line().slope_b(),
            threshold: p.line().threshold(),
        })
        .collect()
}

/// Resolved band rows (empty bands report area 0).
pub fn band_rows(curve: &VocCurve, specs: &[BandSpec]) -> Result<Vec<BandRow>> {
    let omega_sup = curve.omega_sup();
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let (hi, band) = spec.resolve(omega_sup)?;
        let auc = match band {
            Some(band) => curve.auc(&band)?,
            None => ExtendedReal::Finite(0.0),
        };
        rows.push(BandRow {
            lo: spec.lo,
            hi,
            auc,
        });
    }
    Ok(rows)
}

/// The VOC portion of a report for one curve.
pub fn voc_section(curve: &VocCurve, bands: &[BandSpec]) -> Result<VocSection> {
    Ok(VocSection {
        mode: curve.mode().as_str().to_owned(),
        omega_sup: curve.omega_sup(),
        auc_full: curve.auc(&Band::full())?,
        bands: band_rows(curve, bands)?,
        knots: knot_rows(curve),
    })
}

/// Assembles the full report: calibration metrics on `eval`, thresholds
/// tuned on `tuning` and measured on `eval`, and the ω-aware VOC of `eval`.
/// Callers pass the same dataset twice for in-sample reporting.
pub fn build_report(
    eval: &ScoredDataset,
    tuning: &ScoredDataset,
    options: &ReportOptions,
) -> Result<Report> {
    let mut omegas = options.omegas.clone();
    omegas.sort_by(|a, b| a.value().total_cmp(&b.value()));
    omegas.dedup_by(|a, b| a.value() == b.value());

    let mut thresholds = Vec::with_capacity(omegas.len());
    for penalty in &omegas {
        let tuned = optimize_threshold(tuning, *penalty);
        let counts = count_outcomes(&eval.apply_threshold(tuned.threshold)?)?;
        thresholds.push(ThresholdRow {
            omega: penalty.value(),
            threshold: tuned.threshold,
            achieved_value: counts.dimensionless_value(*penalty)?,
            accepted_weight: counts.n_correct() + counts.n_wrong(),
            calibrated_threshold: calibrated_threshold(*penalty),
        });
    }

    let curve = omega_aware_voc(eval);
    let voc = voc_section(&curve, &options.bands)?;

    Ok(Report {
        dataset: DatasetSummary {
            records: eval.len(),
            total_weight: eval.total_weight(),
        },
        accuracy: accuracy(eval),
        ece: EceSection {
            n_bins: options.ece_bins,
            value: ece(eval, options.ece_bins)?,
        },
        discrimination: discrimination(eval),
        calibration_bins: calibration_bins(eval, options.ece_bins)?,
        thresholds,
        voc,
        svg: options.svg.clone(),
        curve_csv: options.curve_csv.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn d1() -> ScoredDataset {
        crate::model::tests::d1()
    }

    fn d1_report() -> Report {
        let data = d1();
        let options = ReportOptions {
            omegas: vec![Penalty::new(1.0).unwrap()],
            ..ReportOptions::default()
        };
        build_report(&data, &data, &options).unwrap()
    }

    #[test]
    fn worked_dataset_report_numbers() {
        let report = d1_report();
        assert_eq!(report.dataset.records, 5);
        assert_eq!(report.dataset.total_weight, 5.0);
        assert_eq!(report.accuracy, 0.6);
        assert_abs_diff_eq!(report.discrimination.discrimination, 0.06, epsilon = 1e-12);
        assert_eq!(report.voc.omega_sup, ExtendedReal::Infinity);
        assert_eq!(report.voc.auc_full, ExtendedReal::Infinity);

        assert_eq!(report.thresholds.len(), 1);
        let row = &report.thresholds[0];
        assert_eq!(row.omega, 1.0);
        assert_eq!(row.threshold, 0.8);
        assert_eq!(row.achieved_value, 0.4);
        assert_eq!(row.accepted_weight, 2.0);
        assert_eq!(row.calibrated_threshold, 0.5);

        // Default bands: [0, 1) with area 1/2, then [1, sup) = [1, ∞) with
        // infinite area under the flat tail.
        assert_eq!(report.voc.bands.len(), 2);
        assert_abs_diff_eq!(
            report.voc.bands[0].auc.as_finite().unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_eq!(report.voc.bands[1].hi, ExtendedReal::Infinity);
        assert_eq!(report.voc.bands[1].auc, ExtendedReal::Infinity);

        assert_eq!(report.voc.knots.len(), 2);
        assert_eq!(report.voc.knots[0].omega_start, 0.0);
        assert_eq!(report.voc.knots[0].intercept_a, 0.6);
        assert_eq!(report.voc.knots[0].slope_b, 0.2);
        assert_eq!(report.voc.knots[1].omega_start, 1.0);
        assert_eq!(report.voc.knots[1].intercept_a, 0.4);
        assert_eq!(report.voc.knots[1].slope_b, 0.0);
    }

    #[test]
    fn report_json_is_deterministic_and_tagged() {
        let a = crate::io::to_json_string(&d1_report()).unwrap();
        let b = crate::io::to_json_string(&d1_report()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"accuracy\": 0.6"));
        assert!(a.contains("\"omega_sup\": \"inf\""));
        assert!(a.ends_with('\n'));
    }

    #[test]
    fn achieved_value_matches_optimizer_in_sample() {
        let data = d1();
        for omega in [0.0, 0.3, 1.0, 2.5, 7.0] {
            let penalty = Penalty::new(omega).unwrap();
            let options = ReportOptions {
                omegas: vec![penalty],
                ..ReportOptions::default()
            };
            let report = build_report(&data, &data, &options).unwrap();
            let direct = optimize_threshold(&data, penalty);
            assert_eq!(report.thresholds[0].threshold, direct.threshold);
            assert_eq!(report.thresholds[0].achieved_value, direct.achieved_value);
        }
    }

    #[test]
    fn omegas_are_sorted_and_deduplicated() {
        let data = d1();
        let options = ReportOptions {
            omegas: vec![
                Penalty::new(2.0).unwrap(),
                Penalty::new(0.5).unwrap(),
                Penalty::new(2.0).unwrap(),
            ],
            ..ReportOptions::default()
        };
        let report = build_report(&data, &data, &options).unwrap();
        let listed: Vec<f64> = report.thresholds.iter().map(|t| t.omega).collect();
        assert_eq!(listed, vec![0.5, 2.0]);
    }

    #[test]
    fn band_spec_parsing() {
        let spec: BandSpec = "0:1".parse().unwrap();
        assert_eq!(spec.lo, 0.0);
        assert_eq!(spec.hi, BandLimit::Value(1.0));
        assert_eq!(
            "1:sup".parse::<BandSpec>().unwrap().hi,
            BandLimit::OmegaSup
        );
        assert_eq!(
            "0.5:inf".parse::<BandSpec>().unwrap().hi,
            BandLimit::Infinity
        );
        for bad in ["1", "a:b", "-1:2", "3:2", "1:1", "0:nan", ":", "2:"] {
            assert!(bad.parse::<BandSpec>().is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn sup_band_that_comes_out_empty_reports_zero() {
        // All-wrong dataset: ω_sup = 0, so [1, sup) is empty.
        let records = vec![
            crate::model::PredictionRecord::unweighted(0.9, 1, 2).unwrap(),
            crate::model::PredictionRecord::unweighted(0.4, 1, 2).unwrap(),
        ];
        let data = ScoredDataset::new(records).unwrap();
        let report = build_report(&data, &data, &ReportOptions::default()).unwrap();
        let sup_band = &report.voc.bands[1];
        assert_eq!(sup_band.lo, 1.0);
        assert_eq!(sup_band.hi, ExtendedReal::Finite(0.0));
        assert_eq!(sup_band.auc, ExtendedReal::Finite(0.0));
        assert_eq!(report.voc.omega_sup, ExtendedReal::Finite(0.0));
    }

    #[test]
    fn out_of_sample_threshold_is_measured_on_eval() {
        // Tuning set prefers accepting everything; eval set then measures
        // the value of that threshold on different data.
        let tuning = d1();
        let eval = ScoredDataset::new(vec![
            crate::model::PredictionRecord::unweighted(0.9, 1, 2).unwrap(),
            crate::model::PredictionRecord::unweighted(0.7, 1, 1).unwrap(),
        ])
        .unwrap();
        let options = ReportOptions {
            omegas: vec![Penalty::new(1.0).unwrap()],
            ..ReportOptions::default()
        };
        let report = build_report(&eval, &tuning, &options).unwrap();
        // Tuned on d1: threshold 0.8. On eval that accepts only the wrong
        // 0.9 record: (0 − 1·1)/2 = −0.5.
        assert_eq!(report.thresholds[0].threshold, 0.8);
        assert_eq!(report.thresholds[0].achieved_value, -0.5);
    }
}
