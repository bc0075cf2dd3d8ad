//! Revised-confidence discriminators: wrappers that re-score predictions
//! without ever changing them.
//!
//! A discriminator maps (predicted class, confidence) to a revised
//! confidence. Because the predicted class is untouched, accuracy is
//! invariant under wrapping — only the abstention behavior downstream of a
//! threshold can change. The two reference discriminators are lookup tables
//! over equal-width confidence bins (the same binning ECE uses), optionally
//! split by predicted class; the class-split variant can be non-monotone
//! across classes and therefore outperform every plain rescaling of the
//! original confidences.

use std::collections::BTreeMap;

use crate::calibration::bin_index;
use crate::error::{Error, Result};
use crate::model::{PredictionRecord, ScoredDataset};

/// Which lookup shape a discriminator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscriminatorKind {
    /// Pass confidences through unchanged.
    Identity,
    /// One revised confidence per confidence bin.
    BinRemap,
    /// One revised confidence per (predicted class, confidence bin).
    ClassBinRemap,
}

impl DiscriminatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiscriminatorKind::Identity => "identity",
            DiscriminatorKind::BinRemap => "bin_remap",
            DiscriminatorKind::ClassBinRemap => "class_bin_remap",
        }
    }
}

impl std::str::FromStr for DiscriminatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(DiscriminatorKind::Identity),
            "bin_remap" => Ok(DiscriminatorKind::BinRemap),
            "class_bin_remap" => Ok(DiscriminatorKind::ClassBinRemap),
            other => Err(Error::field(
                "kind",
                format!("expected identity, bin_remap, or class_bin_remap, got {other:?}"),
            )),
        }
    }
}

/// Table key: a confidence bin, optionally qualified by predicted class.
/// Displays as `"bin"` or `"class:bin"` (the JSON object key format).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TableKey {
    Bin(usize),
    ClassBin(u32, usize),
}

impl std::fmt::Display for TableKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TableKey::Bin(b) => write!(f, "{b}"),
            TableKey::ClassBin(c, b) => write!(f, "{c}:{b}"),
        }
    }
}

impl std::str::FromStr for TableKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |s: &str| Error::field("table", format!("bad key {s:?}"));
        match s.split_once(':') {
            Some((class, bin)) => Ok(TableKey::ClassBin(
                class.parse().map_err(|_| bad(s))?,
                bin.parse().map_err(|_| bad(s))?,
            )),
            None => Ok(TableKey::Bin(s.parse().map_err(|_| bad(s))?)),
        }
    }
}

/// A trained (or trivial) discriminator: an immutable lookup table from
/// [`TableKey`] to revised confidence, with input-confidence fallback for
/// unseen keys.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    kind: DiscriminatorKind,
    n_bins: usize,
    table: BTreeMap<TableKey, f64>,
}

impl Discriminator {
    /// The do-nothing discriminator.
    pub fn identity() -> Self {
        Discriminator {
            kind: DiscriminatorKind::Identity,
            n_bins: 1,
            table: BTreeMap::new(),
        }
    }

    /// Assembles a discriminator from parts, validating key shapes, bin
    /// ranges, and confidence ranges.
    pub fn new(
        kind: DiscriminatorKind,
        n_bins: usize,
        table: BTreeMap<TableKey, f64>,
    ) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::field("n_bins", "must be positive"));
        }
        if kind == DiscriminatorKind::Identity && !table.is_empty() {
            return Err(Error::field("table", "identity discriminator takes no table"));
        }
        for (key, &v) in &table {
            let bin = match (kind, key) {
                (DiscriminatorKind::BinRemap, TableKey::Bin(b)) => *b,
                (DiscriminatorKind::ClassBinRemap, TableKey::ClassBin(_, b)) => *b,
                _ => {
                    return Err(Error::field(
                        "table",
                        format!("key {key} does not match kind {}", kind.as_str()),
                    ))
                }
            };
            if bin >= n_bins {
                return Err(Error::field(
                    "table",
                    format!("bin {bin} out of range for {n_bins} bins"),
                ));
            }
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::field(
                    "table",
                    format!("revised confidence must lie in [0, 1], got {v}"),
                ));
            }
        }
        Ok(Discriminator {
            kind,
            n_bins,
            table,
        })
    }

    pub fn kind(&self) -> DiscriminatorKind {
        self.kind
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn per_class(&self) -> bool {
        self.kind == DiscriminatorKind::ClassBinRemap
    }

    pub fn table(&self) -> &BTreeMap<TableKey, f64> {
        &self.table
    }

    /// Revised confidence for one prediction. Unseen keys fall back to the
    /// input confidence, so the discriminator is the identity off the
    /// distribution it was trained on.
    pub fn revised_confidence(&self, predicted_class: u32, confidence: f64) -> f64 {
        let key = match self.kind {
            DiscriminatorKind::Identity => return confidence,
            DiscriminatorKind::BinRemap => TableKey::Bin(bin_index(confidence, self.n_bins)),
            DiscriminatorKind::ClassBinRemap => {
                TableKey::ClassBin(predicted_class, bin_index(confidence, self.n_bins))
            }
        };
        self.table.get(&key).copied().unwrap_or(confidence)
    }
}

/// Trains a bin-remap discriminator on a validation set: the revised
/// confidence of a bin (optionally per predicted class) is the weighted
/// empirical accuracy of the validation records that land in it.
pub fn train_bin_remap(
    validation: &ScoredDataset,
    n_bins: usize,
    per_class: bool,
) -> Result<Discriminator> {
    if n_bins == 0 {
        return Err(Error::field("n_bins", "must be positive"));
    }
    let mut sums: BTreeMap<TableKey, (f64, f64)> = BTreeMap::new();
    for r in validation.records() {
        let bin = bin_index(r.confidence(), n_bins);
        let key = if per_class {
            TableKey::ClassBin(r.predicted_class(), bin)
        } else {
            TableKey::Bin(bin)
        };
        let slot = sums.entry(key).or_insert((0.0, 0.0));
        slot.0 += r.weight();
        if r.is_correct() {
            slot.1 += r.weight();
        }
    }
    let table = sums
        .into_iter()
        .map(|(key, (weight, correct))| (key, correct / weight))
        .collect();
    Discriminator::new(
        if per_class {
            DiscriminatorKind::ClassBinRemap
        } else {
            DiscriminatorKind::BinRemap
        },
        n_bins,
        table,
    )
}

/// Re-scores every record through the discriminator. Predicted classes,
/// true labels, and weights are untouched, so accuracy is preserved exactly;
/// only where a downstream threshold abstains can change.
pub fn apply_discriminator(data: &ScoredDataset, h: &Discriminator) -> ScoredDataset {
    let records: Vec<PredictionRecord> = data
        .records()
        .iter()
        .map(|r| {
            r.with_confidence(h.revised_confidence(r.predicted_class(), r.confidence()))
                .expect("revised confidences are valid")
        })
        .collect();
    ScoredDataset::new(records).expect("re-scoring a valid dataset stays valid")
}
