//! C interface to the change-detection pipeline.
//!
//! The surface is a single opaque handle, [`WecsAnalyzer`], fed one image at
//! a time and then screened in place. Callers never see internal structs:
//! results come back through flat caller-owned buffers, and every fallible
//! call returns a [`WecsStatus`] code backed by a thread-local message from
//! [`wecs_last_error_message`].
//!
//! Conventions:
//! - images are row-major `double` arrays of exactly `rows * cols` values
//! - selector arguments (`kind`, `source`) are plain `uint32_t` holding a
//!   [`WecsSeries`] or [`WecsMaskSource`] value, so an out-of-range integer
//!   is a reportable error instead of undefined behavior
//! - output buffers must carry exactly the advertised length; the status
//!   names the mismatch otherwise
//! - a handle is not thread-safe; the error message is per thread

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ndarray::Array2;

use wecs::change::{change_signal, deviation_cube, transition_cube, ChangeSignal};
use wecs::coeff::CoeffStack;
use wecs::dwt::{Basis, Boundary};
use wecs::screening::{
    correlation_map, flag_change_times, select_indices, union_selection, CorrelationMap,
    SelectionMask, ThresholdSpec, TimeFlags,
};
use wecs::stack::{log_transform, Channel, Domain, ImageStack};
use wecs::Error;

/// Outcome of a fallible call. `WECS_STATUS_OK` is zero; everything else
/// leaves a description in [`wecs_last_error_message`].
#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WecsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A parameter was out of range or otherwise unusable.
    BadParam = 2,
    /// Unknown wavelet basis name.
    BadBasis = 3,
    /// Decomposition level infeasible for the image dimensions.
    BadLevel = 4,
    /// Non-finite or negative pixel data.
    BadData = 5,
    /// Buffer or image dimensions disagree with the handle.
    ShapeMismatch = 6,
    /// Too little data, or every site degenerate.
    Degenerate = 7,
    /// Input domain does not match what the operation needs.
    BadDomain = 8,
    /// Results were requested before a successful `wecs_analyzer_screen`.
    NotReady = 9,
    /// The implementation panicked; state may be stale but not corrupt.
    Internal = 10,
}

/// Which temporal series a getter refers to.
#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WecsSeries {
    /// Squared deviation from the temporal mean; length n.
    D = 0,
    /// Squared transition between consecutive times; length n - 1.
    T = 1,
}

/// Which selection mask a getter refers to.
#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WecsMaskSource {
    D = 0,
    T = 1,
    /// Sites selected by either series.
    Union = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(clean).unwrap());
}

fn fail(e: Error) -> WecsStatus {
    let status = match e.category() {
        "basis" => WecsStatus::BadBasis,
        "level" => WecsStatus::BadLevel,
        "data" => WecsStatus::BadData,
        "shape" => WecsStatus::ShapeMismatch,
        "degenerate" => WecsStatus::Degenerate,
        "domain" => WecsStatus::BadDomain,
        "params" => WecsStatus::BadParam,
        _ => WecsStatus::Internal,
    };
    set_error(&e.to_string());
    status
}

fn null_arg(what: &str) -> WecsStatus {
    set_error(&format!("{what} must not be null"));
    WecsStatus::NullArgument
}

/// Convert panics into a status instead of unwinding across the C boundary.
fn guarded(body: impl FnOnce() -> WecsStatus) -> WecsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            WecsStatus::Internal
        }
    }
}

struct Screened {
    signals: [ChangeSignal; 2],
    maps: [CorrelationMap; 2],
    masks: [SelectionMask; 3],
    flags: [TimeFlags; 2],
}

/// Opaque accumulation and screening state behind the C interface.
pub struct WecsAnalyzer {
    stack: CoeffStack,
    apply_log: bool,
    log_floor: f64,
    screened: Option<Screened>,
}

impl WecsAnalyzer {
    fn push(&mut self, pixels: &[f64]) -> Result<(), Error> {
        let (rows, cols) = self.stack.source_dims();
        if pixels.len() != rows * cols {
            return Err(Error::LengthMismatch {
                what: "image buffer",
                expected: rows * cols,
                got: pixels.len(),
            });
        }
        let img = Array2::from_shape_vec((rows, cols), pixels.to_vec()).unwrap();
        let img = if self.apply_log {
            let raw = ImageStack::new(vec![img], Channel::Generic, Domain::Raw)?;
            log_transform(&raw, self.log_floor)?.into_images().pop().unwrap()
        } else {
            img
        };
        self.stack.push_image(&img)?;
        self.screened = None;
        Ok(())
    }

    fn screen(&mut self, quantile: f64, time_k: f64) -> Result<(), Error> {
        let d_cube = deviation_cube(&self.stack)?;
        let t_cube = transition_cube(&self.stack)?;
        let d_sig = change_signal(&d_cube);
        let t_sig = change_signal(&t_cube);
        let d_map = correlation_map(&d_cube, &d_sig)?;
        let t_map = correlation_map(&t_cube, &t_sig)?;
        let spec = ThresholdSpec::Quantile(quantile);
        let d_mask = select_indices(&d_map, spec)?;
        let t_mask = select_indices(&t_map, spec)?;
        let union = union_selection(&d_mask, &t_mask)?;
        let d_flags = flag_change_times(&d_sig, time_k)?;
        let t_flags = flag_change_times(&t_sig, time_k)?;
        self.screened = Some(Screened {
            signals: [d_sig, t_sig],
            maps: [d_map, t_map],
            masks: [d_mask, t_mask, union],
            flags: [d_flags, t_flags],
        });
        Ok(())
    }

    fn results(&self) -> Result<&Screened, WecsStatus> {
        self.screened.as_ref().ok_or_else(|| {
            set_error("no results yet; call wecs_analyzer_screen first");
            WecsStatus::NotReady
        })
    }
}

fn series_from(kind: u32) -> Result<usize, WecsStatus> {
    match kind {
        0 | 1 => Ok(kind as usize),
        other => {
            set_error(&format!("unknown series selector {other}; expected 0 (d) or 1 (t)"));
            Err(WecsStatus::BadParam)
        }
    }
}

fn mask_from(source: u32) -> Result<usize, WecsStatus> {
    match source {
        0 | 1 | 2 => Ok(source as usize),
        other => {
            set_error(&format!(
                "unknown mask selector {other}; expected 0 (d), 1 (t), or 2 (union)"
            ));
            Err(WecsStatus::BadParam)
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, WecsStatus> {
    if ptr.is_null() {
        return Err(null_arg(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        WecsStatus::BadParam
    })
}

/// Version of the underlying library, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wecs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Description of the most recent failure on this thread, or an empty
/// string. The pointer stays valid until the next failing call on the
/// same thread.
#[no_mangle]
pub extern "C" fn wecs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Create an analyzer for `rows x cols` images transformed with the named
/// wavelet `basis` ("haar", "db2", "db4", "sym2", "sym4", "sym8", "coif4")
/// at the given approximation `level`, under the named `boundary` handling
/// ("periodic", "symmetric", "auto").
///
/// With `apply_log` true each pushed image is treated as raw non-negative
/// intensity and log-transformed after clamping to `log_floor`; pass false
/// to push pre-transformed values as-is.
///
/// Returns null on failure; see [`wecs_last_error_message`]. A non-null
/// handle must be released exactly once with [`wecs_analyzer_free`].
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_new(
    basis: *const c_char,
    level: usize,
    boundary: *const c_char,
    rows: usize,
    cols: usize,
    apply_log: bool,
    log_floor: f64,
) -> *mut WecsAnalyzer {
    let build = || -> Result<*mut WecsAnalyzer, WecsStatus> {
        let basis = Basis::parse(str_arg(basis, "basis")?).map_err(fail)?;
        let boundary = Boundary::parse(str_arg(boundary, "boundary")?).map_err(fail)?;
        if rows == 0 || cols == 0 {
            set_error("image dimensions must be nonzero");
            return Err(WecsStatus::BadParam);
        }
        if apply_log && !(log_floor.is_finite() && log_floor > 0.0) {
            set_error("log floor must be finite and positive");
            return Err(WecsStatus::BadParam);
        }
        Ok(Box::into_raw(Box::new(WecsAnalyzer {
            stack: CoeffStack::builder(basis, level, boundary, (rows, cols)),
            apply_log,
            log_floor,
            screened: None,
        })))
    };
    match catch_unwind(AssertUnwindSafe(build)) {
        Ok(Ok(handle)) => handle,
        Ok(Err(_)) => ptr::null_mut(),
        Err(_) => {
            set_error("internal panic");
            ptr::null_mut()
        }
    }
}

/// Release a handle from [`wecs_analyzer_new`]. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_free(analyzer: *mut WecsAnalyzer) {
    if !analyzer.is_null() {
        drop(Box::from_raw(analyzer));
    }
}

/// Append one image of `len == rows * cols` row-major pixels to the stack.
/// Invalidates any previous screening results.
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_push_image(
    analyzer: *mut WecsAnalyzer,
    pixels: *const f64,
    len: usize,
) -> WecsStatus {
    let Some(a) = analyzer.as_mut() else {
        return null_arg("analyzer");
    };
    if pixels.is_null() {
        return null_arg("pixels");
    }
    let data = std::slice::from_raw_parts(pixels, len);
    guarded(|| match a.push(data) {
        Ok(()) => WecsStatus::Ok,
        Err(e) => fail(e),
    })
}

/// Report the number of images pushed so far and the coefficient grid
/// dimensions. Any output pointer may be null to skip that value.
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_dims(
    analyzer: *const WecsAnalyzer,
    n_images: *mut usize,
    grid_rows: *mut usize,
    grid_cols: *mut usize,
) -> WecsStatus {
    let Some(a) = analyzer.as_ref() else {
        return null_arg("analyzer");
    };
    let (gr, gc) = a.stack.grid_dims();
    if !n_images.is_null() {
        *n_images = a.stack.n();
    }
    if !grid_rows.is_null() {
        *grid_rows = gr;
    }
    if !grid_cols.is_null() {
        *grid_cols = gc;
    }
    WecsStatus::Ok
}

/// Run the full screen over the images pushed so far: deviation and
/// transition series per site, correlation against each change signal,
/// the two quantile masks plus their union, and flagged change times.
///
/// `quantile` is the selection quantile in [0, 1); `time_k` scales the
/// median-absolute-deviation rule for flagging change times.
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_screen(
    analyzer: *mut WecsAnalyzer,
    quantile: f64,
    time_k: f64,
) -> WecsStatus {
    let Some(a) = analyzer.as_mut() else {
        return null_arg("analyzer");
    };
    guarded(|| match a.screen(quantile, time_k) {
        Ok(()) => WecsStatus::Ok,
        Err(e) => fail(e),
    })
}

/// Length of the requested change signal: n for the deviation series,
/// n - 1 for the transition series.
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_signal_len(
    analyzer: *const WecsAnalyzer,
    kind: u32,
    len: *mut usize,
) -> WecsStatus {
    let Some(a) = analyzer.as_ref() else {
        return null_arg("analyzer");
    };
    if len.is_null() {
        return null_arg("len");
    }
    let idx = match series_from(kind) {
        Ok(i) => i,
        Err(s) => return s,
    };
    match a.results() {
        Ok(r) => {
            *len = r.signals[idx].len();
            WecsStatus::Ok
        }
        Err(s) => s,
    }
}

/// Copy the requested change signal into `out`, which must hold exactly
/// the length reported by [`wecs_analyzer_signal_len`].
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_change_signal(
    analyzer: *const WecsAnalyzer,
    kind: u32,
    out: *mut f64,
    len: usize,
) -> WecsStatus {
    let Some(a) = analyzer.as_ref() else {
        return null_arg("analyzer");
    };
    if out.is_null() {
        return null_arg("out");
    }
    let idx = match series_from(kind) {
        Ok(i) => i,
        Err(s) => return s,
    };
    let r = match a.results() {
        Ok(r) => r,
        Err(s) => return s,
    };
    let values = &r.signals[idx].values;
    if len != values.len() {
        return fail(Error::LengthMismatch {
            what: "signal buffer",
            expected: values.len(),
            got: len,
        });
    }
    std::slice::from_raw_parts_mut(out, len).copy_from_slice(values);
    WecsStatus::Ok
}

/// Copy the requested correlation map into `out`, row-major over the
/// coefficient grid; `len` must equal `grid_rows * grid_cols`. Degenerate
/// (zero-variance) sites carry 0.
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_correlation(
    analyzer: *const WecsAnalyzer,
    kind: u32,
    out: *mut f64,
    len: usize,
) -> WecsStatus {
    let Some(a) = analyzer.as_ref() else {
        return null_arg("analyzer");
    };
    if out.is_null() {
        return null_arg("out");
    }
    let idx = match series_from(kind) {
        Ok(i) => i,
        Err(s) => return s,
    };
    let r = match a.results() {
        Ok(r) => r,
        Err(s) => return s,
    };
    let map = &r.maps[idx].values;
    if len != map.len() {
        return fail(Error::LengthMismatch {
            what: "correlation buffer",
            expected: map.len(),
            got: len,
        });
    }
    let out = std::slice::from_raw_parts_mut(out, len);
    for (dst, src) in out.iter_mut().zip(map.iter()) {
        *dst = *src;
    }
    WecsStatus::Ok
}

/// Copy the requested selection mask into `out` as 0/1 bytes, row-major
/// over the coefficient grid; `len` must equal `grid_rows * grid_cols`.
/// If `count` is non-null it receives the number of selected sites.
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_mask(
    analyzer: *const WecsAnalyzer,
    source: u32,
    out: *mut u8,
    len: usize,
    count: *mut usize,
) -> WecsStatus {
    let Some(a) = analyzer.as_ref() else {
        return null_arg("analyzer");
    };
    if out.is_null() {
        return null_arg("out");
    }
    let idx = match mask_from(source) {
        Ok(i) => i,
        Err(s) => return s,
    };
    let r = match a.results() {
        Ok(r) => r,
        Err(s) => return s,
    };
    let mask = &r.masks[idx];
    if len != mask.indices.len() {
        return fail(Error::LengthMismatch {
            what: "mask buffer",
            expected: mask.indices.len(),
            got: len,
        });
    }
    let out = std::slice::from_raw_parts_mut(out, len);
    for (dst, src) in out.iter_mut().zip(mask.indices.iter()) {
        *dst = *src as u8;
    }
    if !count.is_null() {
        *count = mask.count;
    }
    WecsStatus::Ok
}

/// Resolved |R| threshold of the d or t mask. The union mask is the join
/// of two selections and has no single threshold, so asking for it is an
/// error.
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_mask_threshold(
    analyzer: *const WecsAnalyzer,
    source: u32,
    out: *mut f64,
) -> WecsStatus {
    let Some(a) = analyzer.as_ref() else {
        return null_arg("analyzer");
    };
    if out.is_null() {
        return null_arg("out");
    }
    let idx = match mask_from(source) {
        Ok(i) => i,
        Err(s) => return s,
    };
    let r = match a.results() {
        Ok(r) => r,
        Err(s) => return s,
    };
    match r.masks[idx].threshold {
        Some(tau) => {
            *out = tau;
            WecsStatus::Ok
        }
        None => {
            set_error("union mask has no single threshold");
            WecsStatus::BadParam
        }
    }
}

/// Flagged change times for the requested series, as 1-based time indices.
/// Writes at most `cap` entries to `out` and stores the total count in
/// `total`; call with `cap == 0` (out may be null) to query the count.
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_flagged_times(
    analyzer: *const WecsAnalyzer,
    kind: u32,
    out: *mut usize,
    cap: usize,
    total: *mut usize,
) -> WecsStatus {
    let Some(a) = analyzer.as_ref() else {
        return null_arg("analyzer");
    };
    if total.is_null() {
        return null_arg("total");
    }
    if out.is_null() && cap > 0 {
        return null_arg("out");
    }
    let idx = match series_from(kind) {
        Ok(i) => i,
        Err(s) => return s,
    };
    let r = match a.results() {
        Ok(r) => r,
        Err(s) => return s,
    };
    let flagged = &r.flags[idx].flagged;
    *total = flagged.len();
    let take = cap.min(flagged.len());
    if take > 0 {
        std::slice::from_raw_parts_mut(out, take).copy_from_slice(&flagged[..take]);
    }
    WecsStatus::Ok
}

/// Robust statistics behind the time flags: median, median absolute
/// deviation, and the resulting threshold median + k * MAD. Any output
/// pointer may be null to skip that value.
#[no_mangle]
pub unsafe extern "C" fn wecs_analyzer_time_stats(
    analyzer: *const WecsAnalyzer,
    kind: u32,
    median: *mut f64,
    mad: *mut f64,
    threshold: *mut f64,
) -> WecsStatus {
    let Some(a) = analyzer.as_ref() else {
        return null_arg("analyzer");
    };
    let idx = match series_from(kind) {
        Ok(i) => i,
        Err(s) => return s,
    };
    let r = match a.results() {
        Ok(r) => r,
        Err(s) => return s,
    };
    let flags = &r.flags[idx];
    if !median.is_null() {
        *median = flags.median;
    }
    if !mad.is_null() {
        *mad = flags.mad;
    }
    if !threshold.is_null() {
        *threshold = flags.threshold();
    }
    WecsStatus::Ok
}
