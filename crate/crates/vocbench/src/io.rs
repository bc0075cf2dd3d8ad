//! File formats: prediction CSV, use-case JSON, distribution JSON, rescale
//! CSV, discriminator JSON, and curve-knot CSV.
//!
//! Reals are written in shortest round-trip form (the `ryu` rendering used
//! by the CSV and JSON serializers), so write-then-read reproduces every
//! in-memory value bit-for-bit. Reads validate eagerly: malformed text
//! reports its line, and invariant violations name the offending field and
//! row.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::calibration::MonotoneRescale;
use crate::discriminator::{Discriminator, DiscriminatorKind, TableKey};
use crate::error::{Error, Result};
use crate::model::{Penalty, PredictionRecord, ScoredDataset, UseCase};
use crate::synth::ConfidenceDistribution;
use crate::voc::{CurveMode, CurvePiece, ValueLine, VocCurve};

fn csv_error(err: csv::Error) -> Error {
    let line = err
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or_default();
    if err.is_io_error() {
        match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!("is_io_error guarantees an Io kind"),
        }
    } else {
        Error::Parse {
            line,
            message: err.to_string(),
        }
    }
}

fn json_error(err: serde_json::Error, what: &'static str) -> Error {
    match err.classify() {
        serde_json::error::Category::Data => Error::field(what, err.to_string()),
        _ => Error::Parse {
            line: err.line(),
            message: err.to_string(),
        },
    }
}

fn parse_cell<T: std::str::FromStr>(
    row: &csv::StringRecord,
    index: usize,
    name: &str,
    line: usize,
) -> Result<T> {
    let raw = row.get(index).unwrap_or_default();
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {name} from {raw:?}"),
    })
}

fn row_line(row: &csv::StringRecord) -> usize {
    row.position().map(|p| p.line() as usize).unwrap_or_default()
}

/// Reads a prediction CSV (`confidence,predicted,label[,weight]`) into a
/// dataset. Text problems report their line; invariant violations report
/// the row and the violated constraint.
pub fn read_predictions(path: &Path) -> Result<ScoredDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_owned)
        .collect();
    let names: Vec<&str> = header.iter().map(String::as_str).collect();
    let has_weight = match names.as_slice() {
        ["confidence", "predicted", "label"] => false,
        ["confidence", "predicted", "label", "weight"] => true,
        other => {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header confidence,predicted,label[,weight], got {:?}",
                    other.join(",")
                ),
            })
        }
    };

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row_line(&row);
        let confidence: f64 = parse_cell(&row, 0, "confidence", line)?;
        let predicted: u32 = parse_cell(&row, 1, "predicted", line)?;
        let label: u32 = parse_cell(&row, 2, "label", line)?;
        let weight: f64 = if has_weight {
            parse_cell(&row, 3, "weight", line)?
        } else {
            1.0
        };
        let record =
            PredictionRecord::new(confidence, predicted, label, weight).map_err(|e| {
                Error::InvalidRow {
                    row: line,
                    message: e.to_string(),
                }
            })?;
        records.push(record);
    }
    ScoredDataset::new(records)
}

/// Writes a dataset as a four-column prediction CSV in canonical order.
pub fn write_predictions(path: &Path, data: &ScoredDataset) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    writer
        .write_record(["confidence", "predicted", "label", "weight"])
        .map_err(csv_error)?;
    for r in data.records() {
        writer
            .serialize((r.confidence(), r.predicted_class(), r.true_label(), r.weight()))
            .map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

/// A parsed use-case file: either the full value triple or a bare penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UseCaseInput {
    Triple(UseCase),
    Omega(Penalty),
}

impl UseCaseInput {
    /// The penalty, from either shape.
    pub fn penalty(&self) -> Penalty {
        match self {
            UseCaseInput::Triple(uc) => uc.penalty(),
            UseCaseInput::Omega(p) => *p,
        }
    }

    /// The raw value triple, when the file provided one.
    pub fn use_case(&self) -> Option<&UseCase> {
        match self {
            UseCaseInput::Triple(uc) => Some(uc),
            UseCaseInput::Omega(_) => None,
        }
    }
}

/// Reads a use-case JSON file: exactly one of
/// `{"v_correct": r, "v_abstain": r, "v_wrong": r}` or `{"omega": r}`.
pub fn read_use_case(path: &Path) -> Result<UseCaseInput> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct TripleWire {
        v_correct: f64,
        v_abstain: f64,
        v_wrong: f64,
    }
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct OmegaWire {
        omega: f64,
    }
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Wire {
        Triple(TripleWire),
        Omega(OmegaWire),
    }

    let text = fs::read_to_string(path)?;
    let wire: Wire = serde_json::from_str(&text).map_err(|e| json_error(e, "use case"))?;
    match wire {
        Wire::Triple(t) => Ok(UseCaseInput::Triple(UseCase::new(
            t.v_correct,
            t.v_abstain,
            t.v_wrong,
        )?)),
        Wire::Omega(o) => Ok(UseCaseInput::Omega(Penalty::new(o.omega)?)),
    }
}

/// Reads a distribution JSON file: a list of `{"confidence": c, "mass": m}`.
pub fn read_distribution(path: &Path) -> Result<ConfidenceDistribution> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| json_error(e, "distribution"))
}

/// Writes a distribution as its JSON atom list.
pub fn write_distribution(path: &Path, dist: &ConfidenceDistribution) -> Result<()> {
    write_json(path, dist)
}

/// Reads a rescale CSV (`breakpoint,output` rows, ascending).
pub fn read_rescale(path: &Path) -> Result<MonotoneRescale> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != ["breakpoint", "output"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header breakpoint,output, got {:?}", header.join(",")),
        });
    }
    let mut breakpoints = Vec::new();
    let mut outputs = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row_line(&row);
        breakpoints.push(parse_cell(&row, 0, "breakpoint", line)?);
        outputs.push(parse_cell(&row, 1, "output", line)?);
    }
    MonotoneRescale::new(breakpoints, outputs)
}

/// Writes a rescale as a `breakpoint,output` CSV.
pub fn write_rescale(path: &Path, rescale: &MonotoneRescale) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    writer
        .write_record(["breakpoint", "output"])
        .map_err(csv_error)?;
    for (b, o) in rescale.breakpoints().iter().zip(rescale.outputs()) {
        writer.serialize((b, o)).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscriminatorWire {
    kind: String,
    n_bins: usize,
    per_class: bool,
    table: BTreeMap<String, f64>,
}

/// Reads a discriminator JSON file (`{kind, n_bins, per_class, table}`).
pub fn read_discriminator(path: &Path) -> Result<Discriminator> {
    let text = fs::read_to_string(path)?;
    let wire: DiscriminatorWire =
        serde_json::from_str(&text).map_err(|e| json_error(e, "discriminator"))?;
    let kind: DiscriminatorKind = wire.kind.parse()?;
    if wire.per_class != (kind == DiscriminatorKind::ClassBinRemap) {
        return Err(Error::field(
            "per_class",
            format!(
                "inconsistent with kind {}: got per_class={}",
                kind.as_str(),
                wire.per_class
            ),
        ));
    }
    let mut table = BTreeMap::new();
    for (key, value) in wire.table {
        table.insert(key.parse::<TableKey>()?, value);
    }
    Discriminator::new(kind, wire.n_bins, table)
}

/// Writes a discriminator as `{kind, n_bins, per_class, table}` JSON.
pub fn write_discriminator(path: &Path, h: &Discriminator) -> Result<()> {
    let wire = DiscriminatorWire {
        kind: h.kind().as_str().to_owned(),
        n_bins: h.n_bins(),
        per_class: h.per_class(),
        table: h
            .table()
            .iter()
            .map(|(k, &v)| (k.to_string(), v))
            .collect(),
    };
    write_json(path, &wire)
}

/// Writes curve knots as a CSV with one row per piece:
/// `omega_start,intercept_a,slope_b,threshold`.
pub fn write_curve_csv(path: &Path, curve: &VocCurve) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    writer
        .write_record(["omega_start", "intercept_a", "slope_b", "threshold"])
        .map_err(csv_error)?;
    for piece in curve.pieces() {
        writer
            .serialize((
                piece.omega_start(),
                piece.line().intercept_a(),
                piece.line().slope_b(),
                piece.line().threshold(),
            ))
            .map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a knot CSV back into a curve with the given mode.
pub fn read_curve_csv(path: &Path, mode: CurveMode) -> Result<VocCurve> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != ["omega_start", "intercept_a", "slope_b", "threshold"] {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header omega_start,intercept_a,slope_b,threshold, got {:?}",
                header.join(",")
            ),
        });
    }
    let mut pieces = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row_line(&row);
        let omega_start: f64 = parse_cell(&row, 0, "omega_start", line)?;
        let a: f64 = parse_cell(&row, 1, "intercept_a", line)?;
        let b: f64 = parse_cell(&row, 2, "slope_b", line)?;
        let threshold: f64 = parse_cell(&row, 3, "threshold", line)?;
        pieces.push(CurvePiece::new(
            omega_start,
            ValueLine::from_normalized(a, b, threshold)?,
        ));
    }
    VocCurve::from_pieces(mode, pieces)
}

/// Serializes a value as pretty JSON with a trailing newline.
pub fn to_json_string<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes a value as pretty JSON.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}
