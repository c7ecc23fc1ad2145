//! Dense SIFT: upright 128-dimensional patch descriptors on a regular
//! grid, concatenated into one vector.

use crate::descriptors::gradient::gradient_maps;
use crate::descriptors::{Descriptor, FeatureVector};
use crate::error::{Error, Result};
use crate::imgproc::GrayImage;

pub const DSIFT_GRID: usize = 10;
pub const DSIFT_PATCH: usize = 16;
/// Spatial cells per patch axis.
const CELLS: usize = 4;
const CELL_PX: usize = DSIFT_PATCH / CELLS;
pub const DSIFT_ORIENTATIONS: usize = 8;
const CLIP: f64 = 0.2;
/// Gaussian weighting scale: half the patch side, the standard choice.
const SIGMA: f64 = 8.0;

/// Top-left corners of an evenly spread `n`-point grid of `patch`-sized
/// windows along an axis of length `extent`, endpoints flush with the
/// borders.
fn grid_positions(extent: usize, patch: usize, n: usize) -> Vec<usize> {
    let span = (extent - patch) as f64;
    (0..n)
        .map(|i| (span * i as f64 / (n - 1) as f64).round() as usize)
        .collect()
}

/// One upright SIFT descriptor for the patch with top-left `(px, py)`.
/// Gradient votes are weighted by a Gaussian centered on the patch and
/// shared bilinearly across the 4x4 spatial cells and linearly across the
/// 8 orientation bins (circular, centers at k*2*pi/8).
fn patch_descriptor(gx: &[f64], gy: &[f64], w: usize, px: usize, py: usize, out: &mut [f64]) {
    out.fill(0.0);
    let cx = px as f64 + (DSIFT_PATCH - 1) as f64 / 2.0;
    let cy = py as f64 + (DSIFT_PATCH - 1) as f64 / 2.0;
    let tau = 2.0 * std::f64::consts::PI;
    let obin_width = tau / DSIFT_ORIENTATIONS as f64;
    for y in py..py + DSIFT_PATCH {
        for x in px..px + DSIFT_PATCH {
            let i = y * w + x;
            let m = (gx[i] * gx[i] + gy[i] * gy[i]).sqrt();
            if m == 0.0 {
                continue;
            }
            let weight = (-((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2))
                / (2.0 * SIGMA * SIGMA))
                .exp();
            let mut phi = gy[i].atan2(gx[i]);
            if phi < 0.0 {
                phi += tau;
            }
            let ob = phi / obin_width;
            let o0 = ob.floor();
            let of = ob - o0;
            let o0 = (o0 as usize) % DSIFT_ORIENTATIONS;
            let o1 = (o0 + 1) % DSIFT_ORIENTATIONS;

            // Cell coordinates: cell j is centered at pixel offset
            // 4*j + 1.5 within the patch.
            let u = ((x - px) as f64 - 1.5) / CELL_PX as f64;
            let v = ((y - py) as f64 - 1.5) / CELL_PX as f64;
            let u0 = u.floor();
            let v0 = v.floor();
            let uf = u - u0;
            let vf = v - v0;
            let vote = m * weight;
            for (du, wu) in [(0i64, 1.0 - uf), (1, uf)] {
                let cu = u0 as i64 + du;
                if !(0..CELLS as i64).contains(&cu) {
                    continue;
                }
                for (dv, wv) in [(0i64, 1.0 - vf), (1, vf)] {
                    let cv = v0 as i64 + dv;
                    if !(0..CELLS as i64).contains(&cv) {
                        continue;
                    }
                    let cell = (cv as usize * CELLS + cu as usize) * DSIFT_ORIENTATIONS;
                    out[cell + o0] += vote * wu * wv * (1.0 - of);
                    out[cell + o1] += vote * wu * wv * of;
                }
            }
        }
    }
    // L2 normalize, clip, renormalize; empty patches stay zero.
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    for v in out.iter_mut() {
        *v = (*v / norm).min(CLIP);
    }
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in out.iter_mut() {
            *v /= norm;
        }
    }
}

/// Dense SIFT over a 10x10 grid of 16x16 patches, row-major patch order.
pub fn extract_dsift(img: &GrayImage) -> Result<FeatureVector> {
    let w = img.width() as usize;
    let h = img.height() as usize;
    if w < DSIFT_PATCH || h < DSIFT_PATCH {
        return Err(Error::validation(format!(
            "{w}x{h} image too small for {DSIFT_PATCH}x{DSIFT_PATCH} patches"
        )));
    }
    let (gx, gy) = gradient_maps(img);
    let xs = grid_positions(w, DSIFT_PATCH, DSIFT_GRID);
    let ys = grid_positions(h, DSIFT_PATCH, DSIFT_GRID);
    let dim_per = CELLS * CELLS * DSIFT_ORIENTATIONS;
    let mut values = vec![0.0f64; DSIFT_GRID * DSIFT_GRID * dim_per];
    for (iy, &py) in ys.iter().enumerate() {
        for (ix, &px) in xs.iter().enumerate() {
            let at = (iy * DSIFT_GRID + ix) * dim_per;
            patch_descriptor(&gx, &gy, w, px, py, &mut values[at..at + dim_per]);
        }
    }
    Ok(FeatureVector::new(Descriptor::Dsift, values))
}
