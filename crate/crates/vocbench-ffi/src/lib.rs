//! C ABI for the vocbench library.
//!
//! Conventions:
//! - Handles (`VbDataset`, `VbVocCurve`) are opaque; create them with the
//!   `vb_*_load`/`vb_*_from`/`vb_voc_*` constructors and release them with
//!   the matching `vb_*_free`. Freeing null is a no-op.
//! - Fallible functions return a [`VbStatus`] and write results through
//!   out-pointers, which are only written on `VB_STATUS_OK`. Optional
//!   out-pointers may be null.
//! - On failure, a thread-local message is set; read it with
//!   [`vb_last_error_message`]. The pointer stays valid until the next
//!   failing call on the same thread.
//! - Unbounded quantities (ω_sup, areas) are reported as C `INFINITY`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use vocbench::{
    accuracy, calibrated_threshold, count_outcomes, discrimination, dominates, ece, fixed_voc,
    io, omega_aware_voc, optimize_threshold, Band, Error, ExtendedReal, Penalty,
    PredictionRecord, ScoredDataset, VocCurve,
};

/// Result class of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VbStatus {
    /// Success.
    Ok = 0,
    /// Input could not be read or parsed (file access, malformed text).
    ParseError = 1,
    /// Input parsed but violates a data invariant (bad field, empty
    /// dataset, out-of-domain argument).
    DataError = 2,
    /// Internal failure; should not happen.
    InternalError = 3,
    /// A required pointer argument was null.
    NullArgument = 4,
}

/// Opaque handle to a loaded prediction dataset.
pub struct VbDataset(ScoredDataset);

/// Opaque handle to a VOC curve.
pub struct VbVocCurve(VocCurve);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").expect("static"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn fail(e: Error) -> VbStatus {
    let status = match e {
        Error::Parse { .. } | Error::Io(_) => VbStatus::ParseError,
        Error::Format(_) => VbStatus::InternalError,
        Error::EmptyDataset
        | Error::InvalidField { .. }
        | Error::InvalidRow { .. }
        | Error::AbstentionDominates
        | Error::NeverAbstain => VbStatus::DataError,
    };
    set_last_error(e.to_string());
    status
}

fn null_argument(name: &str) -> VbStatus {
    set_last_error(format!("null argument: {name}"));
    VbStatus::NullArgument
}

/// Runs an FFI body, converting panics into `InternalError`.
fn guarded(body: impl FnOnce() -> VbStatus) -> VbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic".to_owned());
            VbStatus::InternalError
        }
    }
}

/// Writes through an optional out-pointer.
unsafe fn put<T>(out: *mut T, value: T) {
    if !out.is_null() {
        *out = value;
    }
}

fn extended_to_f64(value: ExtendedReal) -> f64 {
    match value {
        ExtendedReal::Finite(v) => v,
        ExtendedReal::Infinity => f64::INFINITY,
    }
}

fn band_from(lo: f64, hi: f64) -> Result<Band, Error> {
    if hi.is_infinite() && hi > 0.0 {
        Band::unbounded(lo)
    } else {
        Band::bounded(lo, hi)
    }
}

/// Message of the most recent failure on this thread, or null if none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |message| message.as_ptr())
    })
}

/// Loads a prediction CSV (`confidence,predicted,label[,weight]`).
///
/// # Safety
/// `path` must point to a NUL-terminated string; `out` must be valid for a
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn vb_dataset_load_csv(
    path: *const c_char,
    out: *mut *mut VbDataset,
) -> VbStatus {
    guarded(|| {
        if path.is_null() {
            return null_argument("path");
        }
        if out.is_null() {
            return null_argument("out");
        }
        let path = match CStr::from_ptr(path).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_last_error("path is not valid UTF-8".to_owned());
                return VbStatus::ParseError;
            }
        };
        match io::read_predictions(Path::new(path)) {
            Ok(data) => {
                *out = Box::into_raw(Box::new(VbDataset(data)));
                VbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Builds a dataset from parallel arrays of length `len`. `weight` may be
/// null for unit weights.
///
/// # Safety
/// Non-null array arguments must point to `len` readable elements; `out`
/// must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn vb_dataset_from_arrays(
    confidence: *const f64,
    predicted: *const u32,
    label: *const u32,
    weight: *const f64,
    len: usize,
    out: *mut *mut VbDataset,
) -> VbStatus {
    guarded(|| {
        if confidence.is_null() {
            return null_argument("confidence");
        }
        if predicted.is_null() {
            return null_argument("predicted");
        }
        if label.is_null() {
            return null_argument("label");
        }
        if out.is_null() {
            return null_argument("out");
        }
        let confidence = std::slice::from_raw_parts(confidence, len);
        let predicted = std::slice::from_raw_parts(predicted, len);
        let label = std::slice::from_raw_parts(label, len);
        let weight = if weight.is_null() {
            None
        } else {
            Some(std::slice::from_raw_parts(weight, len))
        };

        let mut records = Vec::with_capacity(len);
        for i in 0..len {
            let record = match weight {
                Some(w) => PredictionRecord::new(confidence[i], predicted[i], label[i], w[i]),
                None => PredictionRecord::unweighted(confidence[i], predicted[i], label[i]),
            };
            match record {
                Ok(r) => records.push(r),
                Err(e) => return fail(e),
            }
        }
        match ScoredDataset::new(records) {
            Ok(data) => {
                *out = Box::into_raw(Box::new(VbDataset(data)));
                VbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a dataset handle. Null is a no-op.
///
/// # Safety
/// `dataset` must be null or a pointer returned by a `vb_dataset_*`
/// constructor that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn vb_dataset_free(dataset: *mut VbDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn vb_dataset_len(dataset: *const VbDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.len())
}

/// Total weight, or NaN for a null handle.
///
/// # Safety
/// `dataset` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn vb_dataset_total_weight(dataset: *const VbDataset) -> f64 {
    dataset.as_ref().map_or(f64::NAN, |d| d.0.total_weight())
}

/// Weighted accuracy.
///
/// # Safety
/// `dataset` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_accuracy(dataset: *const VbDataset, out: *mut f64) -> VbStatus {
    guarded(|| {
        let Some(dataset) = dataset.as_ref() else {
            return null_argument("dataset");
        };
        if out.is_null() {
            return null_argument("out");
        }
        *out = accuracy(&dataset.0);
        VbStatus::Ok
    })
}

/// Expected calibration error over `n_bins` equal-width bins.
///
/// # Safety
/// `dataset` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_ece(
    dataset: *const VbDataset,
    n_bins: usize,
    out: *mut f64,
) -> VbStatus {
    guarded(|| {
        let Some(dataset) = dataset.as_ref() else {
            return null_argument("dataset");
        };
        if out.is_null() {
            return null_argument("out");
        }
        match ece(&dataset.0, n_bins) {
            Ok(value) => {
                *out = value;
                VbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Discrimination statistic; the high/low component outputs may be null.
///
/// # Safety
/// `dataset` must be a live dataset handle; non-null out-pointers must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn vb_discrimination(
    dataset: *const VbDataset,
    out_discrimination: *mut f64,
    out_high_component: *mut f64,
    out_low_component: *mut f64,
) -> VbStatus {
    guarded(|| {
        let Some(dataset) = dataset.as_ref() else {
            return null_argument("dataset");
        };
        let report = discrimination(&dataset.0);
        put(out_discrimination, report.discrimination);
        put(out_high_component, report.high_component);
        put(out_low_component, report.low_component);
        VbStatus::Ok
    })
}

/// Value-optimal acceptance threshold at penalty `omega`. All out-pointers
/// may be null.
///
/// # Safety
/// `dataset` must be a live dataset handle; non-null out-pointers must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn vb_optimize_threshold(
    dataset: *const VbDataset,
    omega: f64,
    out_threshold: *mut f64,
    out_value: *mut f64,
    out_accepted_weight: *mut f64,
) -> VbStatus {
    guarded(|| {
        let Some(dataset) = dataset.as_ref() else {
            return null_argument("dataset");
        };
        let penalty = match Penalty::new(omega) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        let tuned = optimize_threshold(&dataset.0, penalty);
        put(out_threshold, tuned.threshold);
        put(out_value, tuned.achieved_value);
        put(out_accepted_weight, tuned.accepted_weight);
        VbStatus::Ok
    })
}

/// Calibrated-classifier threshold ω/(ω+1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_calibrated_threshold(omega: f64, out: *mut f64) -> VbStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        match Penalty::new(omega) {
            Ok(penalty) => {
                *out = calibrated_threshold(penalty);
                VbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Builds the penalty-aware VOC curve (upper envelope over thresholds).
///
/// # Safety
/// `dataset` must be a live dataset handle; `out` must be valid for a
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn vb_voc_omega_aware(
    dataset: *const VbDataset,
    out: *mut *mut VbVocCurve,
) -> VbStatus {
    guarded(|| {
        let Some(dataset) = dataset.as_ref() else {
            return null_argument("dataset");
        };
        if out.is_null() {
            return null_argument("out");
        }
        *out = Box::into_raw(Box::new(VbVocCurve(omega_aware_voc(&dataset.0))));
        VbStatus::Ok
    })
}

/// Builds the fixed-threshold VOC line of a dataset.
///
/// # Safety
/// `dataset` must be a live dataset handle; `out` must be valid for a
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn vb_voc_fixed(
    dataset: *const VbDataset,
    threshold: f64,
    out: *mut *mut VbVocCurve,
) -> VbStatus {
    guarded(|| {
        let Some(dataset) = dataset.as_ref() else {
            return null_argument("dataset");
        };
        if out.is_null() {
            return null_argument("out");
        }
        let curve = dataset
            .0
            .apply_threshold(threshold)
            .and_then(|preds| count_outcomes(&preds))
            .and_then(|counts| fixed_voc(&counts, threshold));
        match curve {
            Ok(curve) => {
                *out = Box::into_raw(Box::new(VbVocCurve(curve)));
                VbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a curve handle. Null is a no-op.
///
/// # Safety
/// `curve` must be null or a pointer returned by a `vb_voc_*` constructor
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn vb_voc_free(curve: *mut VbVocCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Curve value at penalty `omega`.
///
/// # Safety
/// `curve` must be a live curve handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_voc_evaluate(
    curve: *const VbVocCurve,
    omega: f64,
    out: *mut f64,
) -> VbStatus {
    guarded(|| {
        let Some(curve) = curve.as_ref() else {
            return null_argument("curve");
        };
        if out.is_null() {
            return null_argument("out");
        }
        match curve.0.evaluate(omega) {
            Ok(value) => {
                *out = value;
                VbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Largest penalty with positive value; `INFINITY` when the curve stays
/// positive forever.
///
/// # Safety
/// `curve` must be a live curve handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_voc_omega_sup(curve: *const VbVocCurve, out: *mut f64) -> VbStatus {
    guarded(|| {
        let Some(curve) = curve.as_ref() else {
            return null_argument("curve");
        };
        if out.is_null() {
            return null_argument("out");
        }
        *out = extended_to_f64(curve.0.omega_sup());
        VbStatus::Ok
    })
}

/// Area under the positive part of the curve over `[lo, hi)`; `hi` may be
/// `INFINITY`. Writes `INFINITY` when the area diverges.
///
/// # Safety
/// `curve` must be a live curve handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_voc_auc(
    curve: *const VbVocCurve,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> VbStatus {
    guarded(|| {
        let Some(curve) = curve.as_ref() else {
            return null_argument("curve");
        };
        if out.is_null() {
            return null_argument("out");
        }
        let area = band_from(lo, hi).and_then(|band| curve.0.auc(&band));
        match area {
            Ok(value) => {
                *out = extended_to_f64(value);
                VbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of affine pieces in the curve, or 0 for a null handle.
///
/// # Safety
/// `curve` must be null or a live curve handle.
#[no_mangle]
pub unsafe extern "C" fn vb_voc_piece_count(curve: *const VbVocCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.pieces().len())
}

/// Reads one curve piece: the half-open ω interval start, the line
/// coefficients (value = a − b·ω), and the realizing threshold. All
/// out-pointers may be null.
///
/// # Safety
/// `curve` must be a live curve handle; non-null out-pointers must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn vb_voc_piece(
    curve: *const VbVocCurve,
    index: usize,
    out_omega_start: *mut f64,
    out_intercept_a: *mut f64,
    out_slope_b: *mut f64,
    out_threshold: *mut f64,
) -> VbStatus {
    guarded(|| {
        let Some(curve) = curve.as_ref() else {
            return null_argument("curve");
        };
        let pieces = curve.0.pieces();
        let Some(piece) = pieces.get(index) else {
            set_last_error(format!(
                "piece index {index} out of range (curve has {})",
                pieces.len()
            ));
            return VbStatus::DataError;
        };
        put(out_omega_start, piece.omega_start());
        put(out_intercept_a, piece.line().intercept_a());
        put(out_slope_b, piece.line().slope_b());
        put(out_threshold, piece.line().threshold());
        VbStatus::Ok
    })
}

/// Checks whether `lhs` dominates `rhs` (value at least as high everywhere)
/// over `[lo, hi)`; `hi` may be `INFINITY`. When domination fails and
/// `out_witness_omega` is non-null, a penalty where `rhs` is strictly
/// better is written there; on domination it is set to NaN.
///
/// # Safety
/// `lhs` and `rhs` must be live curve handles; non-null out-pointers must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn vb_voc_dominates(
    lhs: *const VbVocCurve,
    rhs: *const VbVocCurve,
    lo: f64,
    hi: f64,
    out_dominates: *mut bool,
    out_witness_omega: *mut f64,
) -> VbStatus {
    guarded(|| {
        let Some(lhs) = lhs.as_ref() else {
            return null_argument("lhs");
        };
        let Some(rhs) = rhs.as_ref() else {
            return null_argument("rhs");
        };
        match band_from(lo, hi) {
            Ok(band) => {
                let check = dominates(&lhs.0, &rhs.0, &band);
                put(out_dominates, check.dominates);
                put(
                    out_witness_omega,
                    check.witness.map_or(f64::NAN, |w| w.omega),
                );
                VbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
