//! Rotation-invariant local phase quantization.
//!
//! A circular window keeps the analysis region isotropic. At each pixel a
//! characteristic orientation is estimated from the imaginary (odd) STFT
//! responses along 12 probe directions, quantized to one of 12 steps, and
//! the regular four-point phase code is then computed with the frequency
//! points rotated into that frame. No coefficient decorrelation is
//! applied in this variant.

use std::sync::OnceLock;

use crate::descriptors::blocks::{block_histograms, BlockSpec, CodeMap};
use crate::descriptors::{Descriptor, FeatureVector};
use crate::error::{Error, Result};
use crate::imgproc::GrayImage;

pub const RILPQ_BINS: usize = 256;
/// Radius of the circular analysis window.
pub const RILPQ_RADIUS: usize = 6;
/// Number of probe directions, which is also the orientation step count.
pub const RILPQ_ORIENTATIONS: usize = 12;
const BLOCK: usize = 16;

/// Frequency magnitude: one cycle across the window diameter.
fn base_frequency() -> f64 {
    1.0 / (2 * RILPQ_RADIUS + 1) as f64
}

fn disc_offsets() -> Vec<(isize, isize)> {
    let r = RILPQ_RADIUS as isize;
    let mut offs = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                offs.push((dx, dy));
            }
        }
    }
    offs
}

struct DiscStencils {
    offsets: Vec<(isize, isize)>,
    /// Odd STFT taps per probe direction: `-sin(2*pi*u_i . p)`.
    orient: Vec<Vec<f64>>,
    /// Complex taps for the four frequency points in each rotated frame,
    /// indexed `[orientation][frequency]` as (re, im) pairs.
    code: Vec<[Vec<(f64, f64)>; 4]>,
}

fn base_frequency_points() -> [(f64, f64); 4] {
    let a = base_frequency();
    [(a, 0.0), (0.0, a), (a, a), (a, -a)]
}

fn stencils() -> &'static DiscStencils {
    static CELL: OnceLock<DiscStencils> = OnceLock::new();
    CELL.get_or_init(|| {
        let offsets = disc_offsets();
        let a = base_frequency();
        let tau = 2.0 * std::f64::consts::PI;
        let orient = (0..RILPQ_ORIENTATIONS)
            .map(|i| {
                let theta = tau * i as f64 / RILPQ_ORIENTATIONS as f64;
                let (ux, uy) = (a * theta.cos(), a * theta.sin());
                offsets
                    .iter()
                    .map(|&(dx, dy)| -(tau * (ux * dx as f64 + uy * dy as f64)).sin())
                    .collect()
            })
            .collect();
        let base = base_frequency_points();
        let code = (0..RILPQ_ORIENTATIONS)
            .map(|j| {
                let phi = tau * j as f64 / RILPQ_ORIENTATIONS as f64;
                let (c, s) = (phi.cos(), phi.sin());
                std::array::from_fn(|f| {
                    let (ux, uy) = base[f];
                    let ru = (ux * c - uy * s, ux * s + uy * c);
                    offsets
                        .iter()
                        .map(|&(dx, dy)| {
                            let phase = -tau * (ru.0 * dx as f64 + ru.1 * dy as f64);
                            (phase.cos(), phase.sin())
                        })
                        .collect()
                })
            })
            .collect();
        DiscStencils {
            offsets,
            orient,
            code,
        }
    })
}

/// Orientation index from gathered window pixels: the odd responses vote
/// with their signed magnitude along their probe direction, and the
/// resulting vector's angle is rounded to the nearest of the 12 steps.
fn orientation_index(window_px: &[f64], st: &DiscStencils) -> usize {
    let tau = 2.0 * std::f64::consts::PI;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (i, taps) in st.orient.iter().enumerate() {
        let m: f64 = taps.iter().zip(window_px).map(|(t, p)| t * p).sum();
        let theta = tau * i as f64 / RILPQ_ORIENTATIONS as f64;
        vx += m * theta.cos();
        vy += m * theta.sin();
    }
    let xi = vy.atan2(vx);
    let step = tau / RILPQ_ORIENTATIONS as f64;
    let j = (xi / step).round() as isize;
    j.rem_euclid(RILPQ_ORIENTATIONS as isize) as usize
}

/// Orientation index at one pixel; exposed for targeted tests.
#[cfg(test)]
fn orientation_index_at(data: &[f64], w: usize, x: usize, y: usize) -> usize {
    let st = stencils();
    let px: Vec<f64> = st
        .offsets
        .iter()
        .map(|&(dx, dy)| data[(y as isize + dy) as usize * w + (x as isize + dx) as usize])
        .collect();
    orientation_index(&px, st)
}

/// Labels every pixel whose disc fits inside the image, so the map
/// shrinks by the radius on each side.
pub fn rilpq_code_map(data: &[f64], w: usize, h: usize) -> Result<CodeMap> {
    let margin = RILPQ_RADIUS;
    if w < 2 * margin + 1 || h < 2 * margin + 1 {
        return Err(Error::validation(format!(
            "{w}x{h} image too small for a radius-{margin} disc window"
        )));
    }
    if data.len() != w * h {
        return Err(Error::validation("pixel buffer does not match geometry"));
    }
    let st = stencils();
    let n_taps = st.offsets.len();
    let out_w = w - 2 * margin;
    let out_h = h - 2 * margin;
    let mut codes = Vec::with_capacity(out_w * out_h);
    let mut px = vec![0.0f64; n_taps];
    for y in margin..h - margin {
        for x in margin..w - margin {
            for (i, &(dx, dy)) in st.offsets.iter().enumerate() {
                px[i] = data[(y as isize + dy) as usize * w + (x as isize + dx) as usize];
            }
            let j = orientation_index(&px, st);
            let mut code = 0u16;
            for (f, taps) in st.code[j].iter().enumerate() {
                let mut re = 0.0;
                let mut im = 0.0;
                for (t, &p) in taps.iter().zip(px.iter()) {
                    re += t.0 * p;
                    im += t.1 * p;
                }
                if re >= 0.0 {
                    code |= 1 << (2 * f);
                }
                if im >= 0.0 {
                    code |= 1 << (2 * f + 1);
                }
            }
            codes.push(code);
        }
    }
    CodeMap::new(out_w, out_h, RILPQ_BINS, codes)
}

/// Rotation-invariant LPQ histogram descriptor pooled over 16x16 blocks.
pub fn extract_rilpq(img: &GrayImage) -> Result<FeatureVector> {
    let data = img.to_f64();
    let map = rilpq_code_map(&data, img.width() as usize, img.height() as usize)?;
    let spec = BlockSpec::new(BLOCK, BLOCK, 0)?;
    let values = block_histograms(&map, &spec)?;
    Ok(FeatureVector::new(Descriptor::Rilpq, values))
}
