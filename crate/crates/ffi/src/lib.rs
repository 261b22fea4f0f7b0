//! C interface to the breptok tokenizer.
//!
//! Every fallible call returns a [`BtStatus`]; on failure the message is
//! kept per thread and read back with [`bt_last_error_message`]. Handles are
//! opaque and owned by the caller until passed to the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use breptok::document::BRepDocument;
use breptok::fsq::{fsq_quantize, FsqLevels};
use breptok::latent::MomentCodec;
use breptok::pipeline::{detokenize, roundtrip, tokenize, TokenizeOptions};
use breptok::tokens::format::{read_tokens, write_binary};
use breptok::tokens::vocab::VOCAB_SIZE;
use breptok::tokens::{ComplexityClass, DecodeMode};
use breptok::topology::{BRepGraph, WindowStride};
use breptok::validity::check_validity;
use breptok::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Malformed token stream, binary file or JSON document.
    Format = 3,
    Geometry = 4,
    Topology = 5,
    TooLarge = 6,
    Panic = 7,
    Other = 8,
}

/// A solid: sampled faces and edges plus incidence.
pub struct BtBrep {
    graph: BRepGraph,
}

pub struct BtTokenStream {
    tokens: Vec<u16>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BtValidity {
    pub closed: bool,
    pub incidence_violations: usize,
    pub gap_violations: usize,
    pub dangling_edges: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BtRoundtrip {
    pub passed: bool,
    pub topology_ok: bool,
    pub tokens: usize,
    pub levels: usize,
    pub max_placement_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BtStatus {
    match e {
        Error::MalformedGeometry(_) | Error::DegenerateGeometry(_) | Error::DimensionMismatch { .. } => {
            BtStatus::Geometry
        }
        Error::EmptyGraph | Error::Disconnected { .. } | Error::WindowCapacity { .. } => BtStatus::Topology,
        Error::TooLarge { .. } => BtStatus::TooLarge,
        Error::Contract(_) => BtStatus::InvalidArgument,
        e if e.is_format_error() => BtStatus::Format,
        _ => BtStatus::Other,
    }
}

struct Fail(BtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(BtStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(BtStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any failure or panic, and clears the error on success.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BtStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BtStatus::Panic
        }
    }
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn stride_of(stride: u32) -> Result<WindowStride, Fail> {
    match stride {
        1 => Ok(WindowStride::One),
        2 => Ok(WindowStride::Two),
        s => Err(invalid(format!("window stride must be 1 or 2, got {s}"))),
    }
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn bt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn bt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn bt_vocab_size() -> u32 {
    u32::from(VOCAB_SIZE)
}

/// Parses a solid from the JSON interchange document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_brep_from_json(json: *const c_char, out: *mut *mut BtBrep) -> BtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| invalid(format!("json is not UTF-8: {e}")))?;
        let graph = BRepDocument::from_json(text)?.to_graph()?;
        *out = Box::into_raw(Box::new(BtBrep { graph }));
        Ok(())
    })
}

/// Serializes a solid to JSON. Release the string with [`bt_string_free`].
///
/// # Safety
/// `brep` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_brep_to_json(brep: *const BtBrep, out: *mut *mut c_char) -> BtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let brep = in_ref(brep, "brep")?;
        let json = BRepDocument::from_graph(&brep.graph, None).to_json();
        *out = CString::new(json).map_err(|e| invalid(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `brep` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn bt_brep_free(brep: *mut BtBrep) {
    if !brep.is_null() {
        drop(Box::from_raw(brep));
    }
}

/// # Safety
/// `s` must come from this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn bt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Face count, or 0 for NULL.
///
/// # Safety
/// `brep` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn bt_brep_face_count(brep: *const BtBrep) -> usize {
    brep.as_ref().map_or(0, |b| b.graph.face_count())
}

/// # Safety
/// `brep` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn bt_brep_edge_count(brep: *const BtBrep) -> usize {
    brep.as_ref().map_or(0, |b| b.graph.edge_count())
}

/// Tokenizes a solid. `meta` is -1 for no complexity prefix, otherwise
/// 0 easy, 1 medium, 2 hard, 3 random. `stride` is 1 or 2.
///
/// # Safety
/// `brep` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_tokenize(
    brep: *const BtBrep,
    meta: i32,
    stride: u32,
    out: *mut *mut BtTokenStream,
) -> BtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let brep = in_ref(brep, "brep")?;
        let meta = match meta {
            -1 => None,
            0 => Some(ComplexityClass::Easy),
            1 => Some(ComplexityClass::Medium),
            2 => Some(ComplexityClass::Hard),
            3 => Some(ComplexityClass::Random),
            m => return Err(invalid(format!("meta must be -1..=3, got {m}"))),
        };
        let opts = TokenizeOptions {
            meta,
            stride: stride_of(stride)?,
            ..TokenizeOptions::default()
        };
        let t = tokenize(&brep.graph, &MomentCodec::new(), &opts)?;
        *out = Box::into_raw(Box::new(BtTokenStream { tokens: t.stream.tokens }));
        Ok(())
    })
}

/// Detokenizes a stream into a solid in the `[-1, 1]^3` frame. `mode` is
/// 0 for unconditional streams, 1 for autocomplete. `dangling` may be NULL;
/// otherwise it receives the number of edges still missing a face.
///
/// # Safety
/// `stream` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_detokenize(
    stream: *const BtTokenStream,
    mode: u32,
    stride: u32,
    out: *mut *mut BtBrep,
    dangling: *mut usize,
) -> BtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let stream = in_ref(stream, "stream")?;
        let mode = match mode {
            0 => DecodeMode::Unconditional,
            1 => DecodeMode::Autocomplete,
            m => return Err(invalid(format!("mode must be 0 or 1, got {m}"))),
        };
        let d = detokenize(&stream.tokens, &MomentCodec::new(), mode, stride_of(stride)?)?;
        if let Some(n) = dangling.as_mut() {
            *n = d.dangling.len();
        }
        *out = Box::into_raw(Box::new(BtBrep { graph: d.graph }));
        Ok(())
    })
}

/// Copies raw token ids into a new stream. Ids are checked when decoding.
///
/// # Safety
/// `tokens` must point at `len` readable values (may be NULL when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn bt_stream_from_tokens(
    tokens: *const u16,
    len: usize,
    out: *mut *mut BtTokenStream,
) -> BtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let tokens = match (tokens.is_null(), len) {
            (_, 0) => Vec::new(),
            (true, _) => return Err(null("tokens")),
            (false, n) => std::slice::from_raw_parts(tokens, n).to_vec(),
        };
        *out = Box::into_raw(Box::new(BtTokenStream { tokens }));
        Ok(())
    })
}

/// Reads a stream from binary or text file contents.
///
/// # Safety
/// `bytes` must point at `len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn bt_stream_from_bytes(
    bytes: *const u8,
    len: usize,
    out: *mut *mut BtTokenStream,
) -> BtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if bytes.is_null() {
            return Err(null("bytes"));
        }
        let tokens = read_tokens(std::slice::from_raw_parts(bytes, len))?;
        *out = Box::into_raw(Box::new(BtTokenStream { tokens }));
        Ok(())
    })
}

/// Binary file contents for a stream. Release with [`bt_bytes_free`].
///
/// # Safety
/// `stream` must come from this library; `out` and `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_stream_to_bytes(
    stream: *const BtTokenStream,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> BtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let out_len = out_ptr(out_len, "out_len")?;
        *out = ptr::null_mut();
        *out_len = 0;
        let stream = in_ref(stream, "stream")?;
        let bytes = write_binary(&stream.tokens).into_boxed_slice();
        *out_len = bytes.len();
        *out = Box::into_raw(bytes).cast();
        Ok(())
    })
}

/// # Safety
/// `bytes` and `len` must be exactly what [`bt_stream_to_bytes`] returned.
#[no_mangle]
pub unsafe extern "C" fn bt_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}

/// # Safety
/// `stream` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn bt_stream_len(stream: *const BtTokenStream) -> usize {
    stream.as_ref().map_or(0, |s| s.tokens.len())
}

/// Borrowed token ids, valid while the stream lives.
///
/// # Safety
/// `stream` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn bt_stream_tokens(stream: *const BtTokenStream) -> *const u16 {
    stream.as_ref().map_or(ptr::null(), |s| s.tokens.as_ptr())
}

/// # Safety
/// `stream` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn bt_stream_free(stream: *mut BtTokenStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// Checks incidence and edge-to-face gaps; `gap_tol` is in the
/// normalized frame.
///
/// # Safety
/// `brep` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_validate(brep: *const BtBrep, gap_tol: f64, out: *mut BtValidity) -> BtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let brep = in_ref(brep, "brep")?;
        if !(gap_tol.is_finite() && gap_tol >= 0.0) {
            return Err(invalid(format!("gap_tol must be finite and >= 0, got {gap_tol}")));
        }
        let r = check_validity(&brep.graph, gap_tol);
        *out = BtValidity {
            closed: r.is_manifold_closed,
            incidence_violations: r.edge_incidence_violations.len(),
            gap_violations: r.geometric_gap_violations.len(),
            dangling_edges: r.dangling_edges.len(),
        };
        Ok(())
    })
}

/// Tokenizes, parses back and compares topology and placement.
///
/// # Safety
/// `brep` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_roundtrip(brep: *const BtBrep, stride: u32, out: *mut BtRoundtrip) -> BtStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let brep = in_ref(brep, "brep")?;
        let opts = TokenizeOptions {
            stride: stride_of(stride)?,
            ..TokenizeOptions::default()
        };
        let r = roundtrip(&brep.graph, &MomentCodec::new(), &opts)?;
        *out = BtRoundtrip {
            passed: r.passed(),
            topology_ok: r.topology_ok,
            tokens: r.tokens,
            levels: r.levels,
            max_placement_error: r.max_placement_error,
        };
        Ok(())
    })
}

/// Quantizes a 4-vector with levels `[8, 5, 5, 5]`; values are clamped
/// to `[-1, 1]` first.
///
/// # Safety
/// `v` must point at 4 readable values; `index` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bt_fsq_quantize(v: *const f64, index: *mut u32) -> BtStatus {
    guard(|| {
        let index = out_ptr(index, "index")?;
        if v.is_null() {
            return Err(null("v"));
        }
        let v = std::slice::from_raw_parts(v, 4);
        if v.iter().any(|x| x.is_nan()) {
            return Err(invalid("v contains NaN"));
        }
        let q = fsq_quantize(v, &FsqLevels::default())?;
        *index = q.index as u32;
        Ok(())
    })
}
