//! Central-difference image gradients shared by POEM, HOG and DSIFT.

use crate::imgproc::GrayImage;

/// Per-pixel central differences with indices clamped at the borders, so
/// the gradient maps keep the image geometry.
pub fn gradient_maps(img: &GrayImage) -> (Vec<f64>, Vec<f64>) {
    let w = img.width() as usize;
    let h = img.height() as usize;
    let data = img.as_slice();
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        let up = y.saturating_sub(1);
        let down = (y + 1).min(h - 1);
        for x in 0..w {
            let left = x.saturating_sub(1);
            let right = (x + 1).min(w - 1);
            gx[y * w + x] = data[y * w + right] as f64 - data[y * w + left] as f64;
            gy[y * w + x] = data[down * w + x] as f64 - data[up * w + x] as f64;
        }
    }
    (gx, gy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizontal_ramp_has_constant_gx_inside() {
        let img = GrayImage::from_fn(6, 4, |x, _| (x * 10) as u8).unwrap();
        let (gx, gy) = gradient_maps(&img);
        // Interior: (x+1)*10 - (x-1)*10 = 20. Borders use clamped taps: 10.
        for y in 0..4 {
            assert_eq!(gx[y * 6], 10.0);
            assert_eq!(gx[y * 6 + 5], 10.0);
            for x in 1..5 {
                assert_eq!(gx[y * 6 + x], 20.0);
            }
        }
        assert!(gy.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_ramp_has_constant_gy_inside() {
        let img = GrayImage::from_fn(4, 6, |_, y| (y * 7) as u8).unwrap();
        let (gx, gy) = gradient_maps(&img);
        assert!(gx.iter().all(|&v| v == 0.0));
        for x in 0..4 {
            assert_eq!(gy[x], 7.0);
            assert_eq!(gy[5 * 4 + x], 7.0);
            for y in 1..5 {
                assert_eq!(gy[y * 4 + x], 14.0);
            }
        }
    }
}
