//! Histograms of oriented gradients with block-level L2-hys contrast
//! normalization.

use crate::descriptors::gradient::gradient_maps;
use crate::descriptors::{Descriptor, FeatureVector};
use crate::error::{Error, Result};
use crate::imgproc::GrayImage;

pub const HOG_BINS: usize = 9;
pub const HOG_CELL: usize = 8;
/// Cells per block along each axis; blocks slide by one cell.
pub const HOG_BLOCK_CELLS: usize = 2;
const CLIP: f64 = 0.2;

/// Splits a magnitude vote between the two orientation bins adjacent to
/// the unsigned angle. Bin centers sit at `(k + 0.5) * pi / 9`, and the
/// bin axis wraps circularly since orientation is modulo pi.
fn vote(phi: f64, magnitude: f64, hist: &mut [f64]) {
    let bin_width = std::f64::consts::PI / HOG_BINS as f64;
    let b = phi / bin_width - 0.5;
    let b0 = b.floor();
    let frac = b - b0;
    let k0 = (b0 as isize).rem_euclid(HOG_BINS as isize) as usize;
    let k1 = (k0 + 1) % HOG_BINS;
    hist[k0] += magnitude * (1.0 - frac);
    hist[k1] += magnitude * frac;
}

/// HOG descriptor: 8x8-pixel cells over the largest covered grid, 2x2-cell
/// blocks sliding by one cell, each block L2-normalized, clipped at 0.2
/// and renormalized. Pixels outside complete cells are ignored.
pub fn extract_hog(img: &GrayImage) -> Result<FeatureVector> {
    let w = img.width() as usize;
    let h = img.height() as usize;
    let cells_x = w / HOG_CELL;
    let cells_y = h / HOG_CELL;
    if cells_x < HOG_BLOCK_CELLS || cells_y < HOG_BLOCK_CELLS {
        return Err(Error::validation(format!(
            "{w}x{h} image too small for {HOG_BLOCK_CELLS}x{HOG_BLOCK_CELLS} blocks of {HOG_CELL}x{HOG_CELL} cells"
        )));
    }
    let (gx, gy) = gradient_maps(img);
    let mut cells = vec![[0.0f64; HOG_BINS]; cells_x * cells_y];
    for y in 0..cells_y * HOG_CELL {
        for x in 0..cells_x * HOG_CELL {
            let i = y * w + x;
            let m = (gx[i] * gx[i] + gy[i] * gy[i]).sqrt();
            if m == 0.0 {
                continue;
            }
            let mut phi = gy[i].atan2(gx[i]);
            if phi < 0.0 {
                phi += std::f64::consts::PI;
            }
            if phi >= std::f64::consts::PI {
                phi = 0.0;
            }
            let cell = (y / HOG_CELL) * cells_x + x / HOG_CELL;
            vote(phi, m, &mut cells[cell]);
        }
    }
    let blocks_x = cells_x - HOG_BLOCK_CELLS + 1;
    let blocks_y = cells_y - HOG_BLOCK_CELLS + 1;
    let block_dim = HOG_BLOCK_CELLS * HOG_BLOCK_CELLS * HOG_BINS;
    let mut values = Vec::with_capacity(blocks_x * blocks_y * block_dim);
    let mut block = vec![0.0f64; block_dim];
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let mut i = 0;
            for cy in by..by + HOG_BLOCK_CELLS {
                for cx in bx..bx + HOG_BLOCK_CELLS {
                    block[i..i + HOG_BINS].copy_from_slice(&cells[cy * cells_x + cx]);
                    i += HOG_BINS;
                }
            }
            l2_hys(&mut block);
            values.extend_from_slice(&block);
        }
    }
    Ok(FeatureVector::new(Descriptor::Hog, values))
}

/// L2 normalize, clip every component at `CLIP`, renormalize. All-zero
/// blocks stay zero.
fn l2_hys(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    for x in v.iter_mut() {
        *x = (*x / norm).min(CLIP);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vote_splits_between_adjacent_bins() {
        let bin_width = std::f64::consts::PI / 9.0;
        // Exactly at the center of bin 3: the whole vote lands there.
        let mut hist = [0.0; 9];
        vote(3.5 * bin_width, 2.0, &mut hist);
        assert!((hist[3] - 2.0).abs() < 1e-12);
        assert!(hist.iter().enumerate().all(|(k, &v)| k == 3 || v == 0.0));
        // Halfway between centers 3 and 4: an even split.
        let mut hist = [0.0; 9];
        vote(4.0 * bin_width, 2.0, &mut hist);
        assert!((hist[3] - 1.0).abs() < 1e-12 && (hist[4] - 1.0).abs() < 1e-12);
        // Angle 0 sits halfway between the wrapped centers 8 and 0.
        let mut hist = [0.0; 9];
        vote(0.0, 2.0, &mut hist);
        assert!((hist[8] - 1.0).abs() < 1e-12 && (hist[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn votes_conserve_magnitude() {
        let mut hist = [0.0; 9];
        for i in 0..50 {
            vote(i as f64 * 0.0628, 1.0, &mut hist);
        }
        assert!((hist.iter().sum::<f64>() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_for_100x100_input() {
        let img =
            GrayImage::from_fn(100, 100, |x, y| ((x * 3 + y * 7 + x * y) % 256) as u8).unwrap();
        let fv = extract_hog(&img).unwrap();
        assert_eq!(fv.dim(), 4356);
    }

    #[test]
    fn constant_image_yields_zero_descriptor() {
        let img = GrayImage::from_fn(32, 32, |_, _| 128).unwrap();
        let fv = extract_hog(&img).unwrap();
        assert!(fv.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn block_norms_are_bounded_by_one() {
        let img =
            GrayImage::from_fn(64, 48, |x, y| ((x * 11 + y * 31 + x * y) % 256) as u8).unwrap();
        let fv = extract_hog(&img).unwrap();
        for block in fv.values().chunks(36) {
            let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm <= 1.0 + 1e-9);
            assert!(block.iter().all(|&v| (0.0..=1.0 + 1e-9).contains(&v)));
        }
    }

    #[test]
    fn too_small_images_are_rejected() {
        let img = GrayImage::from_fn(15, 15, |x, y| (x + y) as u8).unwrap();
        assert!(extract_hog(&img).is_err());
    }
}
