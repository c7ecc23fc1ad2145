//! Patterns of oriented edge magnitudes.
//!
//! Gradient magnitudes are split into three unsigned orientation planes,
//! each plane is accumulated over a 7x7 neighborhood, and the uniform LBP
//! operator then encodes the local structure of every accumulated plane.

use crate::descriptors::blocks::{block_histograms, BlockSpec};
use crate::descriptors::gradient::gradient_maps;
use crate::descriptors::lbp::lbp_code_map;
use crate::descriptors::{Descriptor, FeatureVector};
use crate::error::Result;
use crate::imgproc::GrayImage;

pub const POEM_ORIENTATIONS: usize = 3;
/// Side of the square magnitude accumulation window.
pub const POEM_CELL: usize = 7;
const BLOCK: usize = 12;

/// Unsigned orientation bin of a gradient: angles are folded into
/// `[0, pi)` and split into `POEM_ORIENTATIONS` equal sectors.
fn orientation_bin(gx: f64, gy: f64) -> usize {
    let mut phi = gy.atan2(gx);
    if phi < 0.0 {
        phi += std::f64::consts::PI;
    }
    if phi >= std::f64::consts::PI {
        phi = 0.0;
    }
    let bin = (phi / (std::f64::consts::PI / POEM_ORIENTATIONS as f64)) as usize;
    bin.min(POEM_ORIENTATIONS - 1)
}

/// Box-sums `data` over a `(2*radius+1)^2` window clipped at the image
/// borders, via an integral image.
pub(crate) fn box_accumulate(data: &[f64], w: usize, h: usize, radius: usize) -> Vec<f64> {
    let mut integral = vec![0.0f64; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += data[y * w + x];
            integral[(y + 1) * (w + 1) + x + 1] = integral[y * (w + 1) + x + 1] + row;
        }
    }
    let mut out = vec![0.0f64; w * h];
    let r = radius as isize;
    for y in 0..h {
        let y0 = (y as isize - r).max(0) as usize;
        let y1 = ((y as isize + r) as usize).min(h - 1) + 1;
        for x in 0..w {
            let x0 = (x as isize - r).max(0) as usize;
            let x1 = ((x as isize + r) as usize).min(w - 1) + 1;
            out[y * w + x] = integral[y1 * (w + 1) + x1]
                - integral[y0 * (w + 1) + x1]
                - integral[y1 * (w + 1) + x0]
                + integral[y0 * (w + 1) + x0];
        }
    }
    out
}

/// POEM descriptor: per-orientation accumulated edge magnitude planes,
/// LBP-coded and pooled over 12x12 blocks, concatenated in orientation
/// order.
pub fn extract_poem(img: &GrayImage) -> Result<FeatureVector> {
    let w = img.width() as usize;
    let h = img.height() as usize;
    let (gx, gy) = gradient_maps(img);
    let mut planes = vec![vec![0.0f64; w * h]; POEM_ORIENTATIONS];
    for i in 0..w * h {
        let m = (gx[i] * gx[i] + gy[i] * gy[i]).sqrt();
        if m > 0.0 {
            planes[orientation_bin(gx[i], gy[i])][i] = m;
        }
    }
    let spec = BlockSpec::new(BLOCK, BLOCK, 0)?;
    let mut values = Vec::new();
    for plane in &planes {
        let accumulated = box_accumulate(plane, w, h, POEM_CELL / 2);
        let map = lbp_code_map(&accumulated, w, h)?;
        values.extend(block_histograms(&map, &spec)?);
    }
    Ok(FeatureVector::new(Descriptor::Poem, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_bins_split_the_half_circle() {
        // Horizontal gradient: angle 0, first sector.
        assert_eq!(orientation_bin(5.0, 0.0), 0);
        // Vertical gradient: angle pi/2, second sector.
        assert_eq!(orientation_bin(0.0, 5.0), 1);
        // Angle 3*pi/4 after folding: third sector.
        assert_eq!(orientation_bin(-5.0, 5.0), 2);
        // Negative angles fold by adding pi: -pi/4 -> 3*pi/4.
        assert_eq!(orientation_bin(5.0, -5.0), 2);
        // -pi folds to 0.
        assert_eq!(orientation_bin(-5.0, 0.0), 0);
    }

    #[test]
    fn box_accumulate_matches_naive_sums() {
        let w = 13;
        let h = 9;
        let data: Vec<f64> = (0..w * h).map(|i| ((i * 37) % 101) as f64 * 0.25).collect();
        let fast = box_accumulate(&data, w, h, 3);
        for y in 0..h {
            for x in 0..w {
                let mut want = 0.0;
                for yy in y.saturating_sub(3)..=(y + 3).min(h - 1) {
                    for xx in x.saturating_sub(3)..=(x + 3).min(w - 1) {
                        want += data[yy * w + xx];
                    }
                }
                assert!((fast[y * w + x] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn window_is_clipped_at_borders() {
        let data = vec![1.0; 10 * 10];
        let acc = box_accumulate(&data, 10, 10, 3);
        assert_eq!(acc[0], 16.0); // 4x4 corner window
        assert_eq!(acc[5 * 10 + 5], 49.0); // full 7x7 inside
    }

    #[test]
    fn dimension_for_100x100_input() {
        let img =
            GrayImage::from_fn(100, 100, |x, y| ((x * 13 + y * 29 + x * y) % 256) as u8).unwrap();
        let fv = extract_poem(&img).unwrap();
        assert_eq!(fv.dim(), 11328);
    }

    #[test]
    fn horizontal_edges_stay_in_the_first_plane() {
        // A vertical step edge produces horizontal gradients (bin 0), so
        // the other planes stay empty and their LBP maps are the
        // constant-plane code everywhere.
        let img = GrayImage::from_fn(30, 30, |x, _| if x < 15 { 10 } else { 240 }).unwrap();
        let fv = extract_poem(&img).unwrap();
        let third = fv.dim() / POEM_ORIENTATIONS;
        let all_ones_bin = crate::descriptors::lbp::uniform_lbp_table()[0xff] as usize;
        for plane in 1..POEM_ORIENTATIONS {
            let part = &fv.values()[plane * third..(plane + 1) * third];
            for (i, &v) in part.iter().enumerate() {
                if i % 59 == all_ones_bin {
                    assert!((v - 1.0).abs() < 1e-12);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }
}
