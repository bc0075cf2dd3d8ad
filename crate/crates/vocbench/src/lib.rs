//! Evaluation of classifiers as abstaining classifiers under an explicit
//! value model.
//!
//! A classifier that may answer or abstain is scored by what its answers
//! are worth: correct answers earn, wrong answers cost, abstentions are the
//! zero point. After normalization a single parameter remains — the penalty
//! ω, the cost of a wrong answer measured in correct answers. This crate
//! turns plain classifiers into abstaining ones by confidence thresholding
//! and evaluates them across the whole ω axis:
//!
//! - [`model`]: prediction records, weighted datasets in canonical order,
//!   outcome counts, and the raw and dimensionless value functions.
//! - [`threshold`]: exact penalty-aware threshold optimization and the
//!   calibrated shortcut `t = ω/(ω+1)`.
//! - [`voc`]: value–penalty curves — fixed-threshold lines and the
//!   piecewise-affine upper envelope — with ω_sup, banded areas, and
//!   dominance checks.
//! - [`calibration`]: accuracy, expected calibration error, isotonic
//!   (monotone) rescaling, and the discrimination statistic.
//! - [`synth`]: finite confidence distributions, calibrated presets, the
//!   polarize/push-up transforms, and seeded sampling.
//! - [`discriminator`]: confidence rewrites learned from validation data
//!   (binned accuracy tables, optionally per class).
//! - [`io`]: CSV and JSON readers/writers for every artifact the tools
//!   exchange.
//! - [`report`], [`svg`]: deterministic report assembly and VOC plots.
//!
//! Determinism is a design constraint throughout: datasets have one
//! canonical order, sums run left to right in that order, and every
//! serializer is byte-stable, so identical inputs produce identical
//! outputs down to the last bit.

pub mod calibration;
pub mod discriminator;
pub mod error;
pub mod io;
pub mod model;
pub mod report;
pub mod svg;
pub mod synth;
pub mod threshold;
pub mod voc;

pub use calibration::{
    accuracy, apply_rescale, calibration_bins, discrimination, ece, isotonic_rescale,
    CalibrationBin, DiscriminationReport, MonotoneRescale,
};
pub use discriminator::{
    apply_discriminator, train_bin_remap, Discriminator, DiscriminatorKind, TableKey,
};
pub use error::{Error, Result};
pub use model::{
    count_outcomes, normalize_value, AbstainingPrediction, OutcomeCounts, Penalty,
    PredictionRecord, ScoredDataset, UseCase, ABSTAIN_CLASS,
};
pub use report::{build_report, BandLimit, BandSpec, Report, ReportOptions, DEFAULT_ECE_BINS};
pub use svg::voc_svg;
pub use synth::{
    polarize, preset, push_up, realize, Atom, ConfidenceDistribution, Preset, RealizeMode,
};
pub use threshold::{
    calibrated_expected_value, calibrated_threshold, candidate_thresholds, optimize_threshold,
    ThresholdResult, ALWAYS_ABSTAIN_THRESHOLD, DEFAULT_ECE_WARNING_BOUND,
};
pub use voc::{
    dominates, fixed_voc, omega_aware_voc, Band, CurveMode, CurvePiece, DominanceCheck,
    DominanceWitness, ExtendedReal, ValueLine, VocCurve,
};
