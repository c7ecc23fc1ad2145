//! Image loading and the fixed preprocessing chain.
//!
//! Every image entering the pipeline goes through the same two steps:
//! bilinear resize to the target geometry, then photometric normalization
//! (histogram equalization by default). Descriptors always see the output
//! of this chain, so its conventions are pinned down here:
//!
//! * color inputs collapse to luma with BT.601 weights (0.299, 0.587, 0.114),
//! * resize samples at pixel centers with edge clamping,
//! * equalization remaps through the 256-level CDF anchored at the first
//!   occupied level.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// 8-bit single-channel image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    /// Wraps raw row-major luma data. Both dimensions must be positive and
    /// `data.len()` must equal `width * height`.
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::validation(format!(
                "pixel buffer has {} bytes, {width}x{height} needs {expected}",
                data.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y)` over the grid.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Result<Self> {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage::new(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    /// Pixels widened to f64 in row-major order; most descriptor math
    /// starts from this.
    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&v| v as f64).collect()
    }
}

/// BT.601 luma of an sRGB triplet, rounded to the nearest level.
pub fn rgb_to_luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    y.round() as u8
}

/// Decodes an image file and collapses it to 8-bit grayscale.
///
/// Native 8-bit luma planes pass through untouched (alpha is dropped);
/// everything else is converted to 8-bit RGB first and reduced with
/// [`rgb_to_luma`], so color handling does not depend on the decoder's
/// own grayscale conversion.
pub fn load_grayscale(path: &Path) -> Result<GrayImage> {
    let dynamic = image::open(path).map_err(|e| Error::ImageDecode {
        path: path.to_path_buf(),
        source: Box::new(e),
    })?;
    let (width, height) = (dynamic.width(), dynamic.height());
    if width == 0 || height == 0 {
        return Err(Error::validation(format!(
            "image {} has zero area",
            path.display()
        )));
    }
    let data = match dynamic {
        image::DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        image::DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        other => {
            let rgb = other.to_rgb8();
            rgb.pixels()
                .map(|p| rgb_to_luma(p.0[0], p.0[1], p.0[2]))
                .collect()
        }
    };
    GrayImage::new(width, height, data)
}

/// Bilinear resize with pixel-center alignment.
///
/// Output pixel `(ox, oy)` samples the source at
/// `((ox + 0.5) * sw / ow - 0.5, (oy + 0.5) * sh / oh - 0.5)`; samples
/// falling outside the source are clamped to the border row/column.
/// Resizing to the source geometry reproduces the input exactly.
pub fn resize_bilinear(src: &GrayImage, out_w: u32, out_h: u32) -> Result<GrayImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::validation(format!(
            "resize target must be positive, got {out_w}x{out_h}"
        )));
    }
    let sw = src.width() as f64;
    let sh = src.height() as f64;
    let max_x = src.width() - 1;
    let max_y = src.height() - 1;
    let mut data = Vec::with_capacity(out_w as usize * out_h as usize);
    for oy in 0..out_h {
        let sy = (oy as f64 + 0.5) * sh / out_h as f64 - 0.5;
        let y0 = sy.floor();
        let fy = sy - y0;
        let ya = (y0.max(0.0) as u32).min(max_y);
        let yb = ((y0 + 1.0).max(0.0) as u32).min(max_y);
        for ox in 0..out_w {
            let sx = (ox as f64 + 0.5) * sw / out_w as f64 - 0.5;
            let x0 = sx.floor();
            let fx = sx - x0;
            let xa = (x0.max(0.0) as u32).min(max_x);
            let xb = ((x0 + 1.0).max(0.0) as u32).min(max_x);
            let v00 = src.get(xa, ya) as f64;
            let v10 = src.get(xb, ya) as f64;
            let v01 = src.get(xa, yb) as f64;
            let v11 = src.get(xb, yb) as f64;
            let top = v00 + fx * (v10 - v00);
            let bot = v01 + fx * (v11 - v01);
            let v = top + fy * (bot - top);
            data.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(out_w, out_h, data)
}

/// Global histogram equalization over 256 levels.
///
/// Maps level `v` to `round(255 * (cdf(v) - cdf_min) / (n - cdf_min))`
/// where `cdf_min` is the CDF at the first occupied level. A constant
/// image has `n == cdf_min` and is returned unchanged.
pub fn equalize_histogram(src: &GrayImage) -> GrayImage {
    let mut hist = [0u64; 256];
    for &v in src.as_slice() {
        hist[v as usize] += 1;
    }
    let n = src.as_slice().len() as u64;
    let cdf_min = hist.iter().copied().find(|&c| c > 0).unwrap_or(0);
    if n == cdf_min {
        return src.clone();
    }
    let denom = (n - cdf_min) as f64;
    let mut lut = [0u8; 256];
    let mut cdf = 0u64;
    for (v, &count) in hist.iter().enumerate() {
        cdf += count;
        let num = cdf.saturating_sub(cdf_min) as f64;
        lut[v] = (255.0 * num / denom).round().clamp(0.0, 255.0) as u8;
    }
    let data = src.as_slice().iter().map(|&v| lut[v as usize]).collect();
    GrayImage::new(src.width(), src.height(), data).expect("same geometry as source")
}

/// Photometric normalization step of the preprocessing chain.
pub type NormalizeFn = fn(&GrayImage) -> GrayImage;

fn normalize_none(img: &GrayImage) -> GrayImage {
    img.clone()
}

/// Name-keyed registry of normalization functions, so alternative
/// photometric schemes can slot into the chain without touching callers.
pub struct NormalizerRegistry {
    entries: BTreeMap<String, NormalizeFn>,
}

impl NormalizerRegistry {
    /// Registry with the built-in schemes: `histeq` and `none`.
    pub fn standard() -> Self {
        let mut reg = NormalizerRegistry {
            entries: BTreeMap::new(),
        };
        reg.register("histeq", equalize_histogram);
        reg.register("none", normalize_none);
        reg
    }

    pub fn register(&mut self, name: &str, f: NormalizeFn) {
        self.entries.insert(name.to_string(), f);
    }

    pub fn get(&self, name: &str) -> Result<NormalizeFn> {
        self.entries.get(name).copied().ok_or_else(|| {
            Error::config(format!(
                "unknown normalization {name:?}, available: {:?}",
                self.entries.keys().collect::<Vec<_>>()
            ))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// The fixed geometry-then-photometry chain applied before extraction.
#[derive(Clone, Copy)]
pub struct Preprocessor {
    target_w: u32,
    target_h: u32,
    normalize: NormalizeFn,
}

impl Preprocessor {
    /// Chain with the default normalization (histogram equalization).
    pub fn standard(target_w: u32, target_h: u32) -> Result<Self> {
        Preprocessor::with_normalization(target_w, target_h, "histeq")
    }

    /// Chain with a normalization looked up by name in the standard registry.
    pub fn with_normalization(target_w: u32, target_h: u32, normalization: &str) -> Result<Self> {
        if target_w == 0 || target_h == 0 {
            return Err(Error::validation(format!(
                "preprocessing target must be positive, got {target_w}x{target_h}"
            )));
        }
        let normalize = NormalizerRegistry::standard().get(normalization)?;
        Ok(Preprocessor {
            target_w,
            target_h,
            normalize,
        })
    }

    pub fn target(&self) -> (u32, u32) {
        (self.target_w, self.target_h)
    }

    pub fn apply(&self, img: &GrayImage) -> Result<GrayImage> {
        let resized = resize_bilinear(img, self.target_w, self.target_h)?;
        Ok((self.normalize)(&resized))
    }
}

/// Resize to `(target_w, target_h)` and equalize: the default chain.
pub fn preprocess(img: &GrayImage, target_w: u32, target_h: u32) -> Result<GrayImage> {
    Preprocessor::standard(target_w, target_h)?.apply(img)
}
