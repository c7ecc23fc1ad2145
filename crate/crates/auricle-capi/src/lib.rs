//! C ABI over the toolbox: opaque handles for images, extraction
//! contexts, and feature vectors, plus the distance and equal-error-rate
//! helpers needed to score them. Every fallible call returns an
//! `AuricleStatus`; the message behind the most recent failure on the
//! current thread is available from `auricle_last_error`.
//!
//! The generated header lands in `include/auricle.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use auricle::descriptors::bsif::BsifSource;
use auricle::descriptors::{Descriptor, Extractor};
use auricle::error::Error;
use auricle::eval::{eer, roc};
use auricle::imgproc::{load_grayscale, GrayImage, Preprocessor};
use auricle::matching::{chi_square, cosine_distance};

/// Outcome of a call. Anything but `Ok` leaves a human-readable message
/// in `auricle_last_error`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuricleStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument violated a documented precondition.
    InvalidArgument = 2,
    /// Reading or decoding a file failed.
    IoError = 3,
    /// The library failed internally.
    RuntimeError = 4,
}

/// A grayscale image held by the library.
pub struct AuricleImage(GrayImage);

/// A reusable extraction context: preprocessing chain, filter banks,
/// and convolution plans for one target geometry.
pub struct AuricleExtractor {
    pre: Preprocessor,
    inner: Extractor,
}

/// A fixed-length feature vector produced by `auricle_extract`.
pub struct AuricleFeatures(Vec<f64>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl std::fmt::Display) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> AuricleStatus {
    match err {
        Error::Io { .. } | Error::ImageDecode { .. } => AuricleStatus::IoError,
        Error::Format { .. } | Error::Validation(_) | Error::Config(_) => {
            AuricleStatus::InvalidArgument
        }
        Error::Protocol(_) => AuricleStatus::RuntimeError,
    }
}

fn fail(err: Error) -> AuricleStatus {
    let status = status_of(&err);
    set_error(err);
    status
}

fn null_argument(what: &str) -> AuricleStatus {
    set_error(format!("{what} must not be null"));
    AuricleStatus::NullArgument
}

/// Runs `f`, converting a panic into `RuntimeError` instead of
/// unwinding across the C boundary.
fn guarded(f: impl FnOnce() -> AuricleStatus) -> AuricleStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            AuricleStatus::RuntimeError
        }
    }
}

/// Message describing the most recent failure on the calling thread, as
/// a NUL-terminated UTF-8 string. Empty when no call has failed yet. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn auricle_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn auricle_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ----------------------------------------------------------------- image

/// Loads an image file (PNG, JPEG, or BMP) and converts it to grayscale.
/// On success stores a new handle in `*out`; free it with
/// `auricle_image_free`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn auricle_image_load(
    path: *const c_char,
    out: *mut *mut AuricleImage,
) -> AuricleStatus {
    if path.is_null() {
        return null_argument("path");
    }
    if out.is_null() {
        return null_argument("out");
    }
    guarded(|| {
        let path = match unsafe { CStr::from_ptr(path) }.to_str() {
            Ok(s) => PathBuf::from(s),
            Err(_) => {
                set_error("path is not valid UTF-8");
                return AuricleStatus::InvalidArgument;
            }
        };
        match load_grayscale(&path) {
            Ok(img) => {
                unsafe { *out = Box::into_raw(Box::new(AuricleImage(img))) };
                AuricleStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Wraps a row-major 8-bit grayscale buffer of `width * height` pixels.
/// The buffer is copied. Free the handle with `auricle_image_free`.
///
/// # Safety
/// `pixels` must point at `width * height` readable bytes and `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn auricle_image_from_gray(
    pixels: *const u8,
    width: u32,
    height: u32,
    out: *mut *mut AuricleImage,
) -> AuricleStatus {
    if pixels.is_null() {
        return null_argument("pixels");
    }
    if out.is_null() {
        return null_argument("out");
    }
    guarded(|| {
        let n = width as usize * height as usize;
        let data = unsafe { std::slice::from_raw_parts(pixels, n) }.to_vec();
        match GrayImage::new(width, height, data) {
            Ok(img) => {
                unsafe { *out = Box::into_raw(Box::new(AuricleImage(img))) };
                AuricleStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Width in pixels, or 0 for a null handle.
///
/// # Safety
/// `img` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn auricle_image_width(img: *const AuricleImage) -> u32 {
    match unsafe { img.as_ref() } {
        Some(img) => img.0.width(),
        None => 0,
    }
}

/// Height in pixels, or 0 for a null handle.
///
/// # Safety
/// `img` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn auricle_image_height(img: *const AuricleImage) -> u32 {
    match unsafe { img.as_ref() } {
        Some(img) => img.0.height(),
        None => 0,
    }
}

/// Releases an image handle. Null is ignored.
///
/// # Safety
/// `img` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn auricle_image_free(img: *mut AuricleImage) {
    if !img.is_null() {
        drop(unsafe { Box::from_raw(img) });
    }
}

// ------------------------------------------------------------- extractor

/// Builds an extraction context: images are resized to
/// `target_width x target_height`, histogram equalized, and passed to
/// the descriptors. `bsif_seed` pins the learned sign-code filters.
/// Free the handle with `auricle_extractor_free`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn auricle_extractor_new(
    target_width: u32,
    target_height: u32,
    bsif_seed: u64,
    out: *mut *mut AuricleExtractor,
) -> AuricleStatus {
    if out.is_null() {
        return null_argument("out");
    }
    guarded(|| {
        let pre = match Preprocessor::standard(target_width, target_height) {
            Ok(pre) => pre,
            Err(e) => return fail(e),
        };
        match Extractor::new(target_width, target_height, &BsifSource::Seed(bsif_seed)) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(AuricleExtractor { pre, inner })) };
                AuricleStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases an extractor handle. Null is ignored.
///
/// # Safety
/// `extractor` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn auricle_extractor_free(extractor: *mut AuricleExtractor) {
    if !extractor.is_null() {
        drop(unsafe { Box::from_raw(extractor) });
    }
}

/// Preprocesses `img` and computes one descriptor. `descriptor` is one
/// of: "lbp", "lpq", "rilpq", "bsif", "poem", "hog", "dsift", "gabor"
/// (case-insensitive). On success stores a new handle in `*out`; free
/// it with `auricle_features_free`.
///
/// # Safety
/// All pointers must be valid; `descriptor` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn auricle_extract(
    extractor: *const AuricleExtractor,
    img: *const AuricleImage,
    descriptor: *const c_char,
    out: *mut *mut AuricleFeatures,
) -> AuricleStatus {
    let Some(extractor) = (unsafe { extractor.as_ref() }) else {
        return null_argument("extractor");
    };
    let Some(img) = (unsafe { img.as_ref() }) else {
        return null_argument("img");
    };
    if descriptor.is_null() {
        return null_argument("descriptor");
    }
    if out.is_null() {
        return null_argument("out");
    }
    guarded(|| {
        let name = match unsafe { CStr::from_ptr(descriptor) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("descriptor name is not valid UTF-8");
                return AuricleStatus::InvalidArgument;
            }
        };
        let descriptor: Descriptor = match name.parse() {
            Ok(d) => d,
            Err(e) => return fail(e),
        };
        let result = extractor
            .pre
            .apply(&img.0)
            .and_then(|normalized| extractor.inner.extract(&normalized, descriptor));
        match result {
            Ok(features) => {
                unsafe { *out = Box::into_raw(Box::new(AuricleFeatures(features.into_values()))) };
                AuricleStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// -------------------------------------------------------------- features

/// Number of values in the vector, or 0 for a null handle.
///
/// # Safety
/// `features` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn auricle_features_len(features: *const AuricleFeatures) -> usize {
    match unsafe { features.as_ref() } {
        Some(f) => f.0.len(),
        None => 0,
    }
}

/// Borrowed pointer to the values, valid while the handle lives. Null
/// for a null handle.
///
/// # Safety
/// `features` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn auricle_features_data(features: *const AuricleFeatures) -> *const f64 {
    match unsafe { features.as_ref() } {
        Some(f) => f.0.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Copies the vector into `dst`, which must hold exactly
/// `auricle_features_len` values.
///
/// # Safety
/// `dst` must point at `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn auricle_features_copy(
    features: *const AuricleFeatures,
    dst: *mut f64,
    len: usize,
) -> AuricleStatus {
    let Some(features) = (unsafe { features.as_ref() }) else {
        return null_argument("features");
    };
    if dst.is_null() {
        return null_argument("dst");
    }
    if len != features.0.len() {
        set_error(format!(
            "destination holds {len} values, feature vector has {}",
            features.0.len()
        ));
        return AuricleStatus::InvalidArgument;
    }
    unsafe { std::ptr::copy_nonoverlapping(features.0.as_ptr(), dst, len) };
    AuricleStatus::Ok
}

/// Releases a feature handle. Null is ignored.
///
/// # Safety
/// `features` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn auricle_features_free(features: *mut AuricleFeatures) {
    if !features.is_null() {
        drop(unsafe { Box::from_raw(features) });
    }
}

// --------------------------------------------------------------- scoring

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() {
        None
    } else {
        Some(unsafe { std::slice::from_raw_parts(ptr, len) })
    }
}

/// Chi-square distance between two non-negative histograms of `len`
/// values, written to `*out`.
///
/// # Safety
/// `a` and `b` must point at `len` readable doubles; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn auricle_chi_square(
    a: *const f64,
    b: *const f64,
    len: usize,
    out: *mut f64,
) -> AuricleStatus {
    let (Some(a), Some(b)) = (unsafe { slice_arg(a, len) }, unsafe { slice_arg(b, len) }) else {
        return null_argument("a and b");
    };
    if out.is_null() {
        return null_argument("out");
    }
    guarded(|| match chi_square(a, b) {
        Ok(d) => {
            unsafe { *out = d };
            AuricleStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Cosine distance between two vectors of `len` values, written to
/// `*out`.
///
/// # Safety
/// `a` and `b` must point at `len` readable doubles; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn auricle_cosine_distance(
    a: *const f64,
    b: *const f64,
    len: usize,
    out: *mut f64,
) -> AuricleStatus {
    let (Some(a), Some(b)) = (unsafe { slice_arg(a, len) }, unsafe { slice_arg(b, len) }) else {
        return null_argument("a and b");
    };
    if out.is_null() {
        return null_argument("out");
    }
    guarded(|| match cosine_distance(a, b) {
        Ok(d) => {
            unsafe { *out = d };
            AuricleStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Equal error rate of a verification experiment: the operating point
/// where the false-acceptance and false-rejection rates meet, swept
/// over the pooled distance scores and linearly interpolated between
/// thresholds. Both pools must be non-empty and free of NaN.
///
/// # Safety
/// `genuine` and `impostor` must point at `n_genuine` and `n_impostor`
/// readable doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn auricle_eer(
    genuine: *const f64,
    n_genuine: usize,
    impostor: *const f64,
    n_impostor: usize,
    out: *mut f64,
) -> AuricleStatus {
    let Some(genuine) = (unsafe { slice_arg(genuine, n_genuine) }) else {
        return null_argument("genuine");
    };
    let Some(impostor) = (unsafe { slice_arg(impostor, n_impostor) }) else {
        return null_argument("impostor");
    };
    if out.is_null() {
        return null_argument("out");
    }
    guarded(|| match roc(genuine, impostor) {
        Ok(curve) => {
            unsafe { *out = eer(&curve) };
            AuricleStatus::Ok
        }
        Err(e) => fail(e),
    })
}
