//! Uniform local binary patterns on a radius-2 ring of 8 neighbors.

use std::sync::OnceLock;

use crate::descriptors::blocks::{block_histograms, BlockSpec, CodeMap};
use crate::descriptors::{Descriptor, FeatureVector};
use crate::error::{Error, Result};
use crate::imgproc::GrayImage;

pub const LBP_RADIUS: f64 = 2.0;
pub const LBP_NEIGHBORS: usize = 8;
/// 58 uniform patterns plus one shared bin for the rest.
pub const LBP_BINS: usize = 59;
const BLOCK: usize = 8;

/// Number of circular 0/1 transitions in an 8-bit pattern.
fn transitions(pattern: u8) -> u32 {
    let rotated = pattern.rotate_right(1);
    (pattern ^ rotated).count_ones()
}

/// A pattern is uniform when its circular bit string has at most two
/// transitions.
pub fn is_uniform(pattern: u8) -> bool {
    transitions(pattern) <= 2
}

/// Maps each of the 256 patterns to its histogram bin: uniform patterns
/// get bins 0..57 in ascending numeric order, all others share bin 58.
pub fn uniform_lbp_table() -> &'static [u16; 256] {
    static TABLE: OnceLock<[u16; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0u16; 256];
        let mut next = 0u16;
        for p in 0..=255u8 {
            table[p as usize] = if is_uniform(p) {
                let bin = next;
                next += 1;
                bin
            } else {
                (LBP_BINS - 1) as u16
            };
        }
        debug_assert_eq!(next as usize, LBP_BINS - 1);
        table
    })
}

/// Offsets of the 8 sampling points: neighbor `k` sits at angle
/// `2*pi*k/8` on the radius-2 circle, y axis pointing down.
fn neighbor_offsets() -> [(f64, f64); LBP_NEIGHBORS] {
    let mut offs = [(0.0, 0.0); LBP_NEIGHBORS];
    for (k, o) in offs.iter_mut().enumerate() {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / LBP_NEIGHBORS as f64;
        *o = (LBP_RADIUS * angle.cos(), LBP_RADIUS * angle.sin());
    }
    offs
}

/// Bilinear sample at `(x, y)`, which must lie inside the image. When a
/// coordinate is exactly integral its fractional weight is zero, so the
/// far index is clamped instead of read past the edge.
#[inline]
fn bilinear(data: &[f64], w: usize, h: usize, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let xi = x0 as usize;
    let yi = y0 as usize;
    let xj = (xi + 1).min(w - 1);
    let yj = (yi + 1).min(h - 1);
    let v00 = data[yi * w + xi];
    let v10 = data[yi * w + xj];
    let v01 = data[yj * w + xi];
    let v11 = data[yj * w + xj];
    let top = v00 + fx * (v10 - v00);
    let bot = v01 + fx * (v11 - v01);
    top + fy * (bot - top)
}

/// Labels every pixel whose full sampling ring fits inside the image, so
/// the map shrinks by the radius on each side. Bit `k` is set when the
/// bilinearly sampled neighbor is `>=` the center.
pub fn lbp_code_map(data: &[f64], w: usize, h: usize) -> Result<CodeMap> {
    let margin = LBP_RADIUS as usize;
    if w < 2 * margin + 1 || h < 2 * margin + 1 {
        return Err(Error::validation(format!(
            "{w}x{h} image too small for radius-{margin} patterns"
        )));
    }
    if data.len() != w * h {
        return Err(Error::validation("pixel buffer does not match geometry"));
    }
    let offs = neighbor_offsets();
    let table = uniform_lbp_table();
    let out_w = w - 2 * margin;
    let out_h = h - 2 * margin;
    let mut codes = Vec::with_capacity(out_w * out_h);
    for y in margin..h - margin {
        for x in margin..w - margin {
            let center = data[y * w + x];
            let mut pattern = 0u8;
            for (k, &(dx, dy)) in offs.iter().enumerate() {
                let v = bilinear(data, w, h, x as f64 + dx, y as f64 + dy);
                if v >= center {
                    pattern |= 1 << k;
                }
            }
            codes.push(table[pattern as usize]);
        }
    }
    CodeMap::new(out_w, out_h, LBP_BINS, codes)
}

/// Uniform LBP histogram descriptor: radius-2 code map pooled over
/// non-overlapping 8x8 blocks.
pub fn extract_lbp(img: &GrayImage) -> Result<FeatureVector> {
    let data = img.to_f64();
    let map = lbp_code_map(&data, img.width() as usize, img.height() as usize)?;
    let spec = BlockSpec::new(BLOCK, BLOCK, 0)?;
    let values = block_histograms(&map, &spec)?;
    Ok(FeatureVector::new(Descriptor::Lbp, values))
}
