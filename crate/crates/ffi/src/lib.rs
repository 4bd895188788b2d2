//! C ABI for cbreason.
//!
//! Objects are opaque handles created by `cbr_*_new`/`cbr_*_load` style
//! functions and released with the matching `cbr_*_free`. Every fallible
//! call returns a [`CbrStatus`]; on failure [`cbr_last_error`] describes the
//! problem. Masks are row-major `uint8_t` arrays where any nonzero byte is
//! foreground.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cbreason::io::{self, DetectionRecord};
use cbreason::provider::{OracleProvider, Scene};
use cbreason::reasoning::{discover, Discovery, ReasoningConfig};
use cbreason::{fields, BinaryMask, Error, ScalarField};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EmptyMask = 3,
    DegenerateMask = 4,
    ZeroGradient = 5,
    Io = 6,
    Parse = 7,
    BudgetExhausted = 8,
    OutOfRange = 9,
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> CbrStatus {
    match err {
        Error::EmptyMask | Error::AllOnes => CbrStatus::EmptyMask,
        Error::DegenerateMask
        | Error::DegenerateField(_)
        | Error::NoBackground
        | Error::EmptyUnion => CbrStatus::DegenerateMask,
        Error::ZeroGradient { .. } => CbrStatus::ZeroGradient,
        Error::Io { .. } => CbrStatus::Io,
        Error::Parse { .. } | Error::CorruptFile { .. } | Error::MissingEntry(_) => {
            CbrStatus::Parse
        }
        Error::BudgetExhausted(_) => CbrStatus::BudgetExhausted,
        Error::Shape { .. } | Error::Invalid(_) => CbrStatus::InvalidArgument,
    }
}

struct Fail(CbrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CbrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CbrStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CbrStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(CbrStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(CbrStatus::InvalidArgument, msg.into())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn mask_arg(data: *const u8, height: usize, width: usize) -> Result<BinaryMask, Fail> {
    if data.is_null() {
        return Err(null("mask"));
    }
    if height == 0 || width == 0 {
        return Err(invalid("mask dimensions must be positive"));
    }
    let len = height
        .checked_mul(width)
        .ok_or_else(|| invalid("mask too large"))?;
    let bytes = std::slice::from_raw_parts(data, len);
    Ok(BinaryMask::from_fn(height, width, |r, c| {
        bytes[r * width + c] != 0
    }))
}

unsafe fn out_slice<'a, T>(out: *mut T, len: usize) -> Result<&'a mut [T], Fail> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    Ok(std::slice::from_raw_parts_mut(out, len))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cbr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cbr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------- fields

/// Exact Euclidean distance of every pixel to the nearest background pixel.
/// `out` holds `height * width` floats.
///
/// # Safety
/// `mask` and `out` must point to `height * width` elements.
#[no_mangle]
pub unsafe extern "C" fn cbr_distance_transform(
    mask: *const u8,
    height: usize,
    width: usize,
    out: *mut f32,
) -> CbrStatus {
    guard(|| {
        let m = mask_arg(mask, height, width)?;
        let d = cbreason::edt::distance_to_zero(&m)?;
        out_slice(out, height * width)?.copy_from_slice(d.data());
        Ok(())
    })
}

/// Separately normalized boundary field in `[-1, 1]`.
///
/// # Safety
/// `mask` and `out` must point to `height * width` elements.
#[no_mangle]
pub unsafe extern "C" fn cbr_boundary_field(
    mask: *const u8,
    height: usize,
    width: usize,
    out: *mut f32,
) -> CbrStatus {
    guard(|| {
        let m = mask_arg(mask, height, width)?;
        let f = fields::boundary_field(&m)?;
        out_slice(out, height * width)?.copy_from_slice(f.data());
        Ok(())
    })
}

/// Unit center field, interleaved `(row, col)` pairs: `out` holds
/// `2 * height * width` floats.
///
/// # Safety
/// `mask` must point to `height * width` bytes and `out` to twice as many floats.
#[no_mangle]
pub unsafe extern "C" fn cbr_center_field(
    mask: *const u8,
    height: usize,
    width: usize,
    out: *mut f32,
) -> CbrStatus {
    guard(|| {
        let m = mask_arg(mask, height, width)?;
        let f = fields::center_field(&m)?;
        let dst = out_slice(out, 2 * height * width)?;
        for (pair, v) in dst.chunks_exact_mut(2).zip(f.data()) {
            pair.copy_from_slice(v);
        }
        Ok(())
    })
}

/// Maximum interior distance recovered from a boundary field at one pixel.
///
/// # Safety
/// `field` must point to `height * width` floats and `out` to one double.
#[no_mangle]
pub unsafe extern "C" fn cbr_recover_max_distance(
    field: *const f32,
    height: usize,
    width: usize,
    row: usize,
    col: usize,
    out: *mut f64,
) -> CbrStatus {
    guard(|| {
        if field.is_null() {
            return Err(null("field"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let values = std::slice::from_raw_parts(field, height * width).to_vec();
        let f = ScalarField::from_vec(height, width, values)?;
        *out = fields::recover_max_distance(&f, (row, col))?;
        Ok(())
    })
}

// ---------------------------------------------------------------- scenes

/// Instance masks of one scene.
pub struct CbrScene {
    scene: Scene,
}

/// Creates an empty scene. Returns null on invalid arguments.
///
/// # Safety
/// `id` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cbr_scene_new(
    id: *const c_char,
    height: usize,
    width: usize,
) -> *mut CbrScene {
    let mut handle = ptr::null_mut();
    guard(|| {
        let id = str_arg(id, "id")?;
        let scene = Scene::new(id, (height, width), Vec::new())?;
        handle = Box::into_raw(Box::new(CbrScene { scene }));
        Ok(())
    });
    handle
}

/// Loads a scene file written by `cbreason synth`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cbr_scene_load(path: *const c_char, out: *mut *mut CbrScene) -> CbrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let scene = io::read_scene(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(CbrScene { scene }));
        Ok(())
    })
}

/// Appends an instance; the mask must match the scene size and be nonempty.
///
/// # Safety
/// `scene` must come from this library and `mask` point to `height * width` bytes.
#[no_mangle]
pub unsafe extern "C" fn cbr_scene_add_instance(
    scene: *mut CbrScene,
    mask: *const u8,
) -> CbrStatus {
    guard(|| {
        let s = scene.as_mut().ok_or_else(|| null("scene"))?;
        let (h, w) = s.scene.size();
        let m = mask_arg(mask, h, w)?;
        let mut instances = s.scene.instances().to_vec();
        instances.push(m);
        s.scene = Scene::new(s.scene.id.clone(), (h, w), instances)?;
        Ok(())
    })
}

/// Number of instances, or 0 for a null scene.
///
/// # Safety
/// `scene` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn cbr_scene_instance_count(scene: *const CbrScene) -> usize {
    scene.as_ref().map_or(0, |s| s.scene.instances().len())
}

/// # Safety
/// `scene` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cbr_scene_free(scene: *mut CbrScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

// ---------------------------------------------------------------- config

/// Reasoning engine settings.
pub struct CbrConfig {
    config: ReasoningConfig,
}

#[no_mangle]
pub extern "C" fn cbr_config_default() -> *mut CbrConfig {
    Box::into_raw(Box::new(CbrConfig {
        config: ReasoningConfig::default(),
    }))
}

/// Parses a TOML settings document; missing keys keep their defaults.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cbr_config_from_toml(
    text: *const c_char,
    out: *mut *mut CbrConfig,
) -> CbrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = ReasoningConfig::from_toml(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(CbrConfig { config }));
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn cbr_config_set_seed(config: *mut CbrConfig, seed: u64) -> CbrStatus {
    guard(|| {
        config.as_mut().ok_or_else(|| null("config"))?.config.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cbr_config_free(config: *mut CbrConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

// ---------------------------------------------------------------- discovery

/// Result of one discovery run.
pub struct CbrDiscovery {
    scene_id: String,
    discovery: Discovery,
}

/// Box, confidence factors and size of one detection.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CbrDetection {
    pub u1: usize,
    pub v1: usize,
    pub u2: usize,
    pub v2: usize,
    pub confidence: f64,
    pub existence: f64,
    pub max_center_norm: f64,
    pub max_boundary: f64,
    pub area_factor: f64,
    pub iterations: usize,
    pub area: usize,
}

/// Runs discovery with the oracle provider. `threads` 0 uses every core.
/// When the proposal budget runs out the partial result is still stored in
/// `out` and the call returns `BudgetExhausted`.
///
/// # Safety
/// `scene` and `config` must come from this library (config may be null
/// for defaults) and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cbr_discover(
    scene: *const CbrScene,
    config: *const CbrConfig,
    threads: usize,
    out: *mut *mut CbrDiscovery,
) -> CbrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = scene.as_ref().ok_or_else(|| null("scene"))?;
        let default = ReasoningConfig::default();
        let cfg = config.as_ref().map_or(&default, |c| &c.config);
        let discovery = discover(&OracleProvider::new(&s.scene), cfg, threads)?;
        let check = discovery.check_budget();
        *out = Box::into_raw(Box::new(CbrDiscovery {
            scene_id: s.scene.id.clone(),
            discovery,
        }));
        check.map_err(Fail::from)
    })
}

/// Number of detections, or 0 for a null handle.
///
/// # Safety
/// `d` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn cbr_discovery_count(d: *const CbrDiscovery) -> usize {
    d.as_ref().map_or(0, |d| d.discovery.detections.len())
}

/// # Safety
/// `d` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cbr_discovery_get(
    d: *const CbrDiscovery,
    index: usize,
    out: *mut CbrDetection,
) -> CbrStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("discovery"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let det = d.discovery.detections.get(index).ok_or_else(|| {
            Fail(
                CbrStatus::OutOfRange,
                format!("index {index} of {}", d.discovery.detections.len()),
            )
        })?;
        *out = CbrDetection {
            u1: det.bbox.u1,
            v1: det.bbox.v1,
            u2: det.bbox.u2,
            v2: det.bbox.v2,
            confidence: det.confidence,
            existence: det.parts.existence,
            max_center_norm: det.parts.max_center_norm,
            max_boundary: det.parts.max_boundary,
            area_factor: det.parts.area_factor,
            iterations: det.iterations,
            area: det.mask.count(),
        };
        Ok(())
    })
}

/// Copies a detection's scene-sized mask (0/1 bytes) into `out`, which
/// holds `len` bytes; `len` must equal the scene's `height * width`.
///
/// # Safety
/// `d` must come from this library and `out` point to `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cbr_discovery_mask(
    d: *const CbrDiscovery,
    index: usize,
    out: *mut u8,
    len: usize,
) -> CbrStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("discovery"))?;
        let det = d
            .discovery
            .detections
            .get(index)
            .ok_or_else(|| Fail(CbrStatus::OutOfRange, format!("index {index}")))?;
        if len != det.mask.len() {
            return Err(invalid(format!(
                "buffer holds {len} bytes, mask has {}",
                det.mask.len()
            )));
        }
        for (o, &m) in out_slice(out, len)?.iter_mut().zip(det.mask.data()) {
            *o = m as u8;
        }
        Ok(())
    })
}

/// Writes the detections in the JSON detection format.
///
/// # Safety
/// `d` must come from this library and `path` be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cbr_discovery_write_json(
    d: *const CbrDiscovery,
    path: *const c_char,
) -> CbrStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("discovery"))?;
        let path = str_arg(path, "path")?;
        let records: Vec<DetectionRecord> = d
            .discovery
            .detections
            .iter()
            .map(|x| DetectionRecord::from_detection(&d.scene_id, x))
            .collect();
        io::write_detections(Path::new(path), &records)?;
        Ok(())
    })
}

/// # Safety
/// `d` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cbr_discovery_free(d: *mut CbrDiscovery) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}
