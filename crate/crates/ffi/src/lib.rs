//! C interface to `mfconn`: two-layer networks behind opaque handles,
//! checkpoint I/O, SGD steps, dropout and the connecting-path bound.
//!
//! Every fallible call returns an [`MfcStatus`]; on failure the message is
//! available from [`mfc_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mfconn::data::{LabeledDataset, Sample};
use mfconn::harness::{Checkpoint, CheckpointModel};
use mfconn::path::profile_loss;
use mfconn::two_layer::{build_path2, dropout2, sgd_step2, DropoutPattern, TwoLayerInit, TwoLayerParams};
use mfconn::{empirical_loss, Activation, Error, LossKind, Network};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    NonFinite = 4,
    Io = 5,
    MalformedCheckpoint = 6,
    VersionMismatch = 7,
    CheckpointShape = 8,
    Panic = 9,
}

/// Opaque two-layer network.
pub struct MfcTwoLayer {
    params: TwoLayerParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(e: &Error) -> MfcStatus {
    match e {
        Error::Shape { .. } => MfcStatus::Shape,
        Error::NonFinite { .. } => MfcStatus::NonFinite,
        Error::Io { .. } | Error::Idx(_) => MfcStatus::Io,
        Error::MalformedCheckpoint(_) => MfcStatus::MalformedCheckpoint,
        Error::VersionMismatch { .. } => MfcStatus::VersionMismatch,
        Error::CheckpointShape(_) => MfcStatus::CheckpointShape,
        _ => MfcStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MfcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            MfcStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer passed for `{what}`"));
            MfcStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            MfcStatus::Panic
        }
    }
}

unsafe fn handle<'a>(h: *const MfcTwoLayer, what: &'static str) -> Result<&'a MfcTwoLayer, Failure> {
    h.as_ref().ok_or(Failure::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument("path is not valid UTF-8".into())))?;
    Ok(Path::new(s))
}

fn activation(code: u32) -> Result<Activation, Failure> {
    Ok(match code {
        0 => Activation::Sigmoid,
        1 => Activation::Tanh,
        2 => Activation::Relu,
        3 => Activation::Identity,
        _ => return Err(Failure::Lib(Error::InvalidArgument(format!("unknown activation code {code}")))),
    })
}

fn loss_kind(code: u32) -> Result<LossKind, Failure> {
    match code {
        0 => Ok(LossKind::Square),
        1 => Ok(LossKind::CrossEntropy),
        _ => Err(Failure::Lib(Error::InvalidArgument(format!("unknown loss code {code}")))),
    }
}

/// Row-major `count × d` inputs and `count × out_dim` targets.
unsafe fn samples(
    xs: *const f64,
    ys: *const f64,
    count: usize,
    d: usize,
    out_dim: usize,
) -> Result<Vec<Sample>, Failure> {
    let xs = slice(xs, count * d, "xs")?;
    let ys = slice(ys, count * out_dim, "ys")?;
    Ok((0..count)
        .map(|i| Sample::new(xs[i * d..(i + 1) * d].to_vec(), ys[i * out_dim..(i + 1) * out_dim].to_vec()))
        .collect())
}

fn boxed(p: TwoLayerParams) -> *mut MfcTwoLayer {
    Box::into_raw(Box::new(MfcTwoLayer { params: p }))
}

/// Message of the last failed call on this thread (empty after a success).
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn mfc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Checkpoint format version written and accepted by this build.
#[no_mangle]
pub extern "C" fn mfc_checkpoint_version() -> u64 {
    mfconn::harness::CHECKPOINT_VERSION
}

/// Fresh network with `n` neurons, `aᵢ ~ Unif[-1, 1]` and `wᵢ ~ N(0, I/d)`.
/// Activation codes: 0 sigmoid, 1 tanh, 2 relu, 3 identity.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mfc_two_layer_init(
    n: usize,
    d: usize,
    out_dim: usize,
    activation_code: u32,
    seed: u64,
    out: *mut *mut MfcTwoLayer,
) -> MfcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let act = activation(activation_code)?;
        let p = TwoLayerParams::init(n, d, out_dim, act, &TwoLayerInit::default(), seed)?;
        *out = boxed(p);
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn mfc_two_layer_free(h: *mut MfcTwoLayer) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Load a two-layer JSON checkpoint.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mfc_two_layer_load(path: *const c_char, out: *mut *mut MfcTwoLayer) -> MfcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let ck = Checkpoint::load(path_arg(path)?)?;
        match ck.model {
            CheckpointModel::TwoLayer(p) => {
                *out = boxed(p);
                Ok(())
            }
            _ => Err(Error::InvalidArgument("checkpoint does not hold a two-layer network".into()).into()),
        }
    })
}

/// Save as a JSON checkpoint recording `seed` and `step`.
///
/// # Safety
/// `h` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mfc_two_layer_save(
    h: *const MfcTwoLayer,
    path: *const c_char,
    seed: u64,
    step: u64,
) -> MfcStatus {
    guard(|| {
        let h = handle(h, "h")?;
        Checkpoint::two_layer(h.params.clone(), seed, step, false).save(path_arg(path)?)?;
        Ok(())
    })
}

/// Write the width, input dimension and output dimension. Any pointer may
/// be null to skip that value.
///
/// # Safety
/// `h` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mfc_two_layer_shape(
    h: *const MfcTwoLayer,
    n: *mut usize,
    d: *mut usize,
    out_dim: *mut usize,
) -> MfcStatus {
    guard(|| {
        let p = &handle(h, "h")?.params;
        if let Some(n) = n.as_mut() {
            *n = p.n();
        }
        if let Some(d) = d.as_mut() {
            *d = p.d();
        }
        if let Some(o) = out_dim.as_mut() {
            *o = p.out_dim();
        }
        Ok(())
    })
}

/// Predictions for `count` row-major inputs of length `d`, written
/// row-major into `out` (`count × out_dim` values).
///
/// # Safety
/// `x` must hold `count·d` values and `out` room for `count·out_dim`.
#[no_mangle]
pub unsafe extern "C" fn mfc_two_layer_predict(
    h: *const MfcTwoLayer,
    x: *const f64,
    count: usize,
    out: *mut f64,
) -> MfcStatus {
    guard(|| {
        let p = &handle(h, "h")?.params;
        let (d, c) = (p.d(), p.out_dim());
        let batch = samples(x, ptr::null(), count, d, 0)?;
        let preds = p.predict_batch(&batch)?;
        if count > 0 && out.is_null() {
            return Err(Failure::Null("out"));
        }
        for (i, row) in preds.iter().enumerate() {
            ptr::copy_nonoverlapping(row.as_ptr(), out.add(i * c), c);
        }
        Ok(())
    })
}

/// Mean loss over `count` samples. Loss codes: 0 square, 1 cross-entropy.
///
/// # Safety
/// `xs` must hold `count·d` values, `ys` `count·out_dim`, `out_loss` writable.
#[no_mangle]
pub unsafe extern "C" fn mfc_two_layer_loss(
    h: *const MfcTwoLayer,
    xs: *const f64,
    ys: *const f64,
    count: usize,
    loss_code: u32,
    out_loss: *mut f64,
) -> MfcStatus {
    guard(|| {
        let p = &handle(h, "h")?.params;
        let out_loss = out_loss.as_mut().ok_or(Failure::Null("out_loss"))?;
        let ds = LabeledDataset::new(samples(xs, ys, count, p.d(), p.out_dim())?, p.out_dim().max(2))?;
        *out_loss = empirical_loss(p, &ds, loss_kind(loss_code)?)?;
        Ok(())
    })
}

/// One SGD step in place with step size `step` (the update is
/// `θᵢ -= step · N · ∇θᵢ` of the batch-mean loss). Writes the batch loss
/// before the step to `out_loss` if non-null. On failure `h` is unchanged.
///
/// # Safety
/// `h` must be a live handle; `xs`/`ys` must hold `batch` samples.
#[no_mangle]
pub unsafe extern "C" fn mfc_two_layer_sgd_step(
    h: *mut MfcTwoLayer,
    xs: *const f64,
    ys: *const f64,
    batch: usize,
    step: f64,
    loss_code: u32,
    out_loss: *mut f64,
) -> MfcStatus {
    guard(|| {
        let h = h.as_mut().ok_or(Failure::Null("h"))?;
        let b = samples(xs, ys, batch, h.params.d(), h.params.out_dim())?;
        let l = sgd_step2(&mut h.params, &b, step, loss_kind(loss_code)?)?;
        if let Some(o) = out_loss.as_mut() {
            *o = l;
        }
        Ok(())
    })
}

/// New handle holding the sub-network of the first `kept` neurons, with
/// output weights rescaled by `N/kept`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mfc_two_layer_dropout(
    h: *const MfcTwoLayer,
    kept: usize,
    out: *mut *mut MfcTwoLayer,
) -> MfcStatus {
    guard(|| {
        let p = &handle(h, "h")?.params;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let sub = dropout2(p, &DropoutPattern::first(kept, p.n())?)?;
        *out = boxed(sub);
        Ok(())
    })
}

/// Profile the loss along the piecewise-linear path from `a` to `b` with
/// `points` grid points per segment, writing the largest loss seen to
/// `out_max` and the number of segments to `out_segments` (either may be
/// null).
///
/// # Safety
/// Handles must be live; `xs`/`ys` must hold `count` samples.
#[no_mangle]
pub unsafe extern "C" fn mfc_path_max_loss(
    a: *const MfcTwoLayer,
    b: *const MfcTwoLayer,
    xs: *const f64,
    ys: *const f64,
    count: usize,
    loss_code: u32,
    points: usize,
    out_max: *mut f64,
    out_segments: *mut usize,
) -> MfcStatus {
    guard(|| {
        let pa = &handle(a, "a")?.params;
        let pb = &handle(b, "b")?.params;
        let ds = LabeledDataset::new(samples(xs, ys, count, pa.d(), pa.out_dim())?, pa.out_dim().max(2))?;
        let path = build_path2(pa, pb)?;
        let prof = profile_loss(&path, &ds, loss_kind(loss_code)?, points)?;
        if let Some(m) = out_max.as_mut() {
            *m = prof.max();
        }
        if let Some(s) = out_segments.as_mut() {
            *s = path.segments();
        }
        Ok(())
    })
}
