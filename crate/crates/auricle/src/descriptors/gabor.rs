//! Gabor magnitude features over an 8-orientation, 5-scale kernel bank.
//!
//! Kernels follow the standard wavelet layout: peak frequency 0.25
//! cycles/pixel halving every other scale (factor sqrt(2) per step),
//! envelope width sigma = 2*pi, and a DC-corrected real part. Responses
//! are computed by zero-padded FFT convolution; only magnitudes are used,
//! which are identical for convolution and correlation because the
//! kernels are conjugate-symmetric.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::descriptors::{BankKind, Descriptor, FeatureVector, FilterBank};
use crate::error::{Error, Result};
use crate::imgproc::GrayImage;

pub const GABOR_ORIENTATIONS: usize = 8;
pub const GABOR_SCALES: usize = 5;
/// Default kernel side; must be odd and at least 31 so the largest
/// envelope fits.
pub const GABOR_KERNEL_SIZE: usize = 31;
pub const GABOR_MAX_FREQUENCY: f64 = 0.25;
/// Magnitude maps are sampled every 8 pixels, starting at half a stride.
pub const GABOR_SAMPLE_STRIDE: usize = 8;

fn sigma() -> f64 {
    2.0 * std::f64::consts::PI
}

/// Peak frequency of scale `v`: 0.25 / sqrt(2)^v cycles per pixel.
pub fn gabor_frequency(scale: usize) -> f64 {
    GABOR_MAX_FREQUENCY / 2.0f64.sqrt().powi(scale as i32)
}

/// Builds the 40-kernel bank, scale-major: kernel `v * 8 + u` has scale
/// `v` and orientation `u * pi / 8`.
pub fn make_gabor_bank(size: usize) -> Result<FilterBank> {
    if size.is_multiple_of(2) || size < GABOR_KERNEL_SIZE {
        return Err(Error::validation(format!(
            "Gabor kernel side must be odd and >= {GABOR_KERNEL_SIZE}, got {size}"
        )));
    }
    let half = (size / 2) as isize;
    let s = sigma();
    let mut kernels = Vec::with_capacity(GABOR_SCALES * GABOR_ORIENTATIONS);
    for v in 0..GABOR_SCALES {
        let k = 2.0 * std::f64::consts::PI * gabor_frequency(v);
        for u in 0..GABOR_ORIENTATIONS {
            let theta = std::f64::consts::PI * u as f64 / GABOR_ORIENTATIONS as f64;
            let (ct, st) = (theta.cos(), theta.sin());
            let mut re = Vec::with_capacity(size * size);
            let mut im = Vec::with_capacity(size * size);
            for y in -half..=half {
                for x in -half..=half {
                    let (xf, yf) = (x as f64, y as f64);
                    let envelope =
                        (k * k / (s * s)) * (-(k * k) * (xf * xf + yf * yf) / (2.0 * s * s)).exp();
                    let carrier = k * (xf * ct + yf * st);
                    re.push(envelope * carrier.cos());
                    im.push(envelope * carrier.sin());
                }
            }
            let mean = re.iter().sum::<f64>() / re.len() as f64;
            for t in &mut re {
                *t -= mean;
            }
            kernels.push((re, im));
        }
    }
    FilterBank::new(BankKind::Gabor, size, kernels)
}

/// Size-specific convolution plans plus the bank's kernel spectra, built
/// once and shared across images of the planned geometry.
pub struct GaborConvolver {
    width: usize,
    height: usize,
    pad_w: usize,
    pad_h: usize,
    margin: usize,
    n_kernels: usize,
    fwd_row: Arc<dyn Fft<f64>>,
    inv_row: Arc<dyn Fft<f64>>,
    fwd_col: Arc<dyn Fft<f64>>,
    inv_col: Arc<dyn Fft<f64>>,
    kernel_spectra: Vec<Vec<Complex<f64>>>,
}

fn fft_2d(
    buf: &mut [Complex<f64>],
    pad_w: usize,
    pad_h: usize,
    row: &Arc<dyn Fft<f64>>,
    col: &Arc<dyn Fft<f64>>,
) {
    row.process(buf);
    let mut column = vec![Complex::new(0.0, 0.0); pad_h];
    for x in 0..pad_w {
        for (y, c) in column.iter_mut().enumerate() {
            *c = buf[y * pad_w + x];
        }
        col.process(&mut column);
        for (y, c) in column.iter().enumerate() {
            buf[y * pad_w + x] = *c;
        }
    }
}

impl GaborConvolver {
    pub fn new(bank: &FilterBank, width: usize, height: usize) -> Result<Self> {
        if bank.kind() != BankKind::Gabor {
            return Err(Error::validation(
                "Gabor convolution requires a Gabor filter bank",
            ));
        }
        let size = bank.size();
        let start = GABOR_SAMPLE_STRIDE / 2;
        if width <= start || height <= start {
            return Err(Error::validation(format!(
                "{width}x{height} image too small for stride-{GABOR_SAMPLE_STRIDE} sampling"
            )));
        }
        let pad_w = width + size - 1;
        let pad_h = height + size - 1;
        let mut planner = FftPlanner::new();
        let fwd_row = planner.plan_fft_forward(pad_w);
        let inv_row = planner.plan_fft_inverse(pad_w);
        let fwd_col = planner.plan_fft_forward(pad_h);
        let inv_col = planner.plan_fft_inverse(pad_h);
        let mut kernel_spectra = Vec::with_capacity(bank.len());
        for kernel in bank.kernels() {
            let mut buf = vec![Complex::new(0.0, 0.0); pad_w * pad_h];
            for y in 0..size {
                for x in 0..size {
                    buf[y * pad_w + x] =
                        Complex::new(kernel.re()[y * size + x], kernel.im()[y * size + x]);
                }
            }
            fft_2d(&mut buf, pad_w, pad_h, &fwd_row, &fwd_col);
            kernel_spectra.push(buf);
        }
        Ok(GaborConvolver {
            width,
            height,
            pad_w,
            pad_h,
            margin: size / 2,
            n_kernels: bank.len(),
            fwd_row,
            inv_row,
            fwd_col,
            inv_col,
            kernel_spectra,
        })
    }

    pub fn fits(&self, img: &GrayImage) -> bool {
        img.width() as usize == self.width && img.height() as usize == self.height
    }

    /// Magnitude of the zero-padded convolution with kernel `f`, cropped
    /// to the image geometry ("same" alignment on the kernel center).
    fn magnitude_maps(&self, img: &GrayImage) -> Vec<Vec<f64>> {
        let mut spectrum = vec![Complex::new(0.0, 0.0); self.pad_w * self.pad_h];
        for y in 0..self.height {
            for x in 0..self.width {
                spectrum[y * self.pad_w + x] =
                    Complex::new(img.get(x as u32, y as u32) as f64, 0.0);
            }
        }
        fft_2d(
            &mut spectrum,
            self.pad_w,
            self.pad_h,
            &self.fwd_row,
            &self.fwd_col,
        );
        let scale = 1.0 / (self.pad_w as f64 * self.pad_h as f64);
        let mut maps = Vec::with_capacity(self.n_kernels);
        let mut work = vec![Complex::new(0.0, 0.0); self.pad_w * self.pad_h];
        for spec in &self.kernel_spectra {
            for (w, (s, k)) in work.iter_mut().zip(spectrum.iter().zip(spec.iter())) {
                *w = s * k;
            }
            fft_2d(
                &mut work,
                self.pad_w,
                self.pad_h,
                &self.inv_row,
                &self.inv_col,
            );
            let mut map = Vec::with_capacity(self.width * self.height);
            for y in 0..self.height {
                for x in 0..self.width {
                    let c = work[(y + self.margin) * self.pad_w + x + self.margin];
                    map.push(c.norm() * scale);
                }
            }
            maps.push(map);
        }
        maps
    }
}

/// Per-filter magnitude maps sampled on the regular grid, z-normalized
/// over each filter's own samples, concatenated in bank order. Flat
/// responses (std below 1e-12 relative to the mean scale) become zeros.
pub fn extract_gabor_with(
    img: &GrayImage,
    bank: &FilterBank,
    conv: &GaborConvolver,
) -> Result<FeatureVector> {
    if bank.kind() != BankKind::Gabor {
        return Err(Error::validation(
            "Gabor extraction requires a Gabor filter bank",
        ));
    }
    if bank.len() != conv.n_kernels {
        return Err(Error::validation(
            "convolver was planned for a different bank",
        ));
    }
    if !conv.fits(img) {
        return Err(Error::validation(format!(
            "convolver planned for {}x{}, image is {}x{}",
            conv.width,
            conv.height,
            img.width(),
            img.height()
        )));
    }
    let start = GABOR_SAMPLE_STRIDE / 2;
    let xs: Vec<usize> = (start..conv.width).step_by(GABOR_SAMPLE_STRIDE).collect();
    let ys: Vec<usize> = (start..conv.height).step_by(GABOR_SAMPLE_STRIDE).collect();
    let maps = conv.magnitude_maps(img);
    let mut values = Vec::with_capacity(maps.len() * xs.len() * ys.len());
    for map in &maps {
        let begin = values.len();
        for &y in &ys {
            for &x in &xs {
                values.push(map[y * conv.width + x]);
            }
        }
        let samples = &mut values[begin..];
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        if std < 1e-12 * mean.abs().max(1.0) {
            samples.fill(0.0);
        } else {
            for v in samples.iter_mut() {
                *v = (*v - mean) / std;
            }
        }
    }
    Ok(FeatureVector::new(Descriptor::Gabor, values))
}

/// One-shot extraction: plans a convolver for this image's geometry.
pub fn extract_gabor(img: &GrayImage, bank: &FilterBank) -> Result<FeatureVector> {
    let conv = GaborConvolver::new(bank, img.width() as usize, img.height() as usize)?;
    extract_gabor_with(img, bank, &conv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: u32, h: u32) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| {
            ((x * 29 + y * 47 + (x * x + y) % 53) % 256) as u8
        })
        .unwrap()
    }

    #[test]
    fn bank_has_40_dc_free_kernels() {
        let bank = make_gabor_bank(31).unwrap();
        assert_eq!(bank.len(), 40);
        for k in bank.kernels() {
            let sum: f64 = k.re().iter().sum();
            assert!(sum.abs() < 1e-9);
        }
    }

    #[test]
    fn kernel_size_is_validated() {
        assert!(make_gabor_bank(30).is_err());
        assert!(make_gabor_bank(29).is_err());
        assert!(make_gabor_bank(33).is_ok());
    }

    #[test]
    fn frequencies_halve_every_two_scales() {
        assert_eq!(gabor_frequency(0), 0.25);
        for v in 0..4 {
            let ratio = gabor_frequency(v + 1) / gabor_frequency(v);
            assert!((ratio - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn quarter_turn_rotates_kernels_onto_each_other() {
        // Orientation u+4 is u rotated by 90 degrees, so its taps at
        // (x, y) equal orientation u's taps at the rotated grid point
        // (y, -x). The envelope is radial and unaffected.
        let bank = make_gabor_bank(31).unwrap();
        let size = bank.size() as isize;
        let half = size / 2;
        for v in 0..GABOR_SCALES {
            for u in 0..4 {
                let a = bank.kernel(v * GABOR_ORIENTATIONS + u);
                let b = bank.kernel(v * GABOR_ORIENTATIONS + u + 4);
                for y in -half..=half {
                    for x in -half..=half {
                        let i = ((y + half) * size + x + half) as usize;
                        let (rx, ry) = (y, -x);
                        let j = ((ry + half) * size + rx + half) as usize;
                        assert!((b.re()[i] - a.re()[j]).abs() < 1e-12);
                        assert!((b.im()[i] - a.im()[j]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn fft_convolution_matches_direct_evaluation() {
        let img = textured(24, 20);
        let bank = make_gabor_bank(31).unwrap();
        let conv = GaborConvolver::new(&bank, 24, 20).unwrap();
        let maps = conv.magnitude_maps(&img);
        let size = bank.size();
        let margin = size / 2;
        // Direct zero-padded convolution for a few kernels.
        for &f in &[0usize, 13, 27, 39] {
            let kernel = bank.kernel(f);
            for y in 0..20usize {
                for x in 0..24usize {
                    let mut re = 0.0;
                    let mut im = 0.0;
                    for ky in 0..size {
                        for kx in 0..size {
                            let sx = x as isize + margin as isize - kx as isize;
                            let sy = y as isize + margin as isize - ky as isize;
                            if (0..24).contains(&sx) && (0..20).contains(&sy) {
                                let px = img.get(sx as u32, sy as u32) as f64;
                                re += px * kernel.re()[ky * size + kx];
                                im += px * kernel.im()[ky * size + kx];
                            }
                        }
                    }
                    let want = (re * re + im * im).sqrt();
                    let got = maps[f][y * 24 + x];
                    assert!(
                        (want - got).abs() < 1e-6 * want.abs().max(1.0),
                        "kernel {f} at ({x},{y}): direct {want}, fft {got}"
                    );
                }
            }
        }
    }

    #[test]
    fn dimension_for_100x100_input() {
        let bank = make_gabor_bank(31).unwrap();
        let fv = extract_gabor(&textured(100, 100), &bank).unwrap();
        assert_eq!(fv.dim(), 5760);
    }

    #[test]
    fn samples_are_z_normalized_per_filter() {
        let bank = make_gabor_bank(31).unwrap();
        let fv = extract_gabor(&textured(100, 100), &bank).unwrap();
        for chunk in fv.values().chunks(144) {
            let n = chunk.len() as f64;
            let mean = chunk.iter().sum::<f64>() / n;
            let var = chunk.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_image_interior_responses_vanish() {
        // DC-free real parts and odd imaginary parts reject a constant
        // interior; only samples within kernel reach of the zero padding
        // respond. Check a sample farther than the margin from every edge.
        let img = GrayImage::from_fn(64, 64, |_, _| 200).unwrap();
        let bank = make_gabor_bank(31).unwrap();
        let conv = GaborConvolver::new(&bank, 64, 64).unwrap();
        let maps = conv.magnitude_maps(&img);
        for map in &maps {
            assert!(map[32 * 64 + 32].abs() < 1e-6);
        }
    }

    #[test]
    fn extraction_is_deterministic() {
        let img = textured(48, 40);
        let bank = make_gabor_bank(31).unwrap();
        let a = extract_gabor(&img, &bank).unwrap();
        let b = extract_gabor(&img, &bank).unwrap();
        assert_eq!(a.values(), b.values());
    }
}
