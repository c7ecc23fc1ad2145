//! Local phase quantization over a short-term Fourier transform window.
//!
//! Four low frequency points are evaluated on a square window around each
//! pixel; the signs of the eight real/imaginary components form a byte.
//! Before binarization the 8-vector is optionally decorrelated with a
//! whitening transform derived from an exponential image-correlation model.

use nalgebra::{DMatrix, SMatrix, SVector};

use crate::descriptors::blocks::{block_histograms, BlockSpec, CodeMap};
use crate::descriptors::{Descriptor, FeatureVector};
use crate::error::{Error, Result};
use crate::imgproc::GrayImage;

pub const LPQ_BINS: usize = 256;
const BLOCK: usize = 18;

#[derive(Debug, Clone, Copy)]
pub struct LpqParams {
    /// Side of the square STFT window; must be odd and at least 3.
    pub window: usize,
    /// First-order correlation coefficient of the image model used to
    /// build the whitening transform.
    pub rho: f64,
    /// Whether to decorrelate the coefficient vector before binarization.
    pub decorrelate: bool,
}

impl Default for LpqParams {
    fn default() -> Self {
        LpqParams {
            window: 5,
            rho: 0.9,
            decorrelate: true,
        }
    }
}

/// The four analyzed frequency points for window side `m`, in units of
/// cycles per pixel: (a,0), (0,a), (a,a), (a,-a) with a = 1/m.
fn frequency_points(window: usize) -> [(f64, f64); 4] {
    let a = 1.0 / window as f64;
    [(a, 0.0), (0.0, a), (a, a), (a, -a)]
}

/// Complex STFT stencils, one per frequency point, as (re, im) tap pairs
/// in row-major window order. Tap at offset `p` is `exp(-j*2*pi*u.p)`.
fn stencils(window: usize) -> [Vec<(f64, f64)>; 4] {
    let r = (window / 2) as isize;
    let freqs = frequency_points(window);
    std::array::from_fn(|f| {
        let (ux, uy) = freqs[f];
        let mut taps = Vec::with_capacity(window * window);
        for dy in -r..=r {
            for dx in -r..=r {
                let phase = -2.0 * std::f64::consts::PI * (ux * dx as f64 + uy * dy as f64);
                taps.push((phase.cos(), phase.sin()));
            }
        }
        taps
    })
}

/// Whitening transform for the 8-vector of STFT components.
///
/// Window pixels are modeled as unit-variance with correlation
/// `rho^distance`; the coefficient covariance is `D = B C B^T` where `B`
/// stacks the real and imaginary stencil rows. Columns of the returned
/// matrix are the eigenvectors of `D` ordered by descending eigenvalue,
/// each with its largest-magnitude component made positive so the
/// transform is deterministic.
fn whitening_transform(window: usize, rho: f64) -> SMatrix<f64, 8, 8> {
    let n = window * window;
    let r = (window / 2) as isize;
    let mut positions = Vec::with_capacity(n);
    for dy in -r..=r {
        for dx in -r..=r {
            positions.push((dx as f64, dy as f64));
        }
    }
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let d = ((positions[i].0 - positions[j].0).powi(2)
                + (positions[i].1 - positions[j].1).powi(2))
            .sqrt();
            c[(i, j)] = rho.powf(d);
        }
    }
    let taps = stencils(window);
    let mut b = DMatrix::zeros(8, n);
    for f in 0..4 {
        for (i, &(re, im)) in taps[f].iter().enumerate() {
            b[(2 * f, i)] = re;
            b[(2 * f + 1, i)] = im;
        }
    }
    let d = &b * &c * b.transpose();
    let sym = SMatrix::<f64, 8, 8>::from_fn(|i, j| 0.5 * (d[(i, j)] + d[(j, i)]));
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..8).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("eigenvalues of a real symmetric matrix are finite")
    });
    let mut v = SMatrix::<f64, 8, 8>::zeros();
    for (col, &src) in order.iter().enumerate() {
        let mut vec: SVector<f64, 8> = eig.eigenvectors.column(src).into();
        let lead = (0..8).fold(0, |best, i| {
            if vec[i].abs() > vec[best].abs() {
                i
            } else {
                best
            }
        });
        if vec[lead] < 0.0 {
            vec = -vec;
        }
        v.set_column(col, &vec);
    }
    v
}

/// Labels every pixel whose window fits inside the image with the byte of
/// component signs (bit set when the component is `>= 0`). Bits are
/// ordered re/im per frequency point.
pub fn lpq_code_map(data: &[f64], w: usize, h: usize, params: &LpqParams) -> Result<CodeMap> {
    if params.window < 3 || params.window.is_multiple_of(2) {
        return Err(Error::validation(format!(
            "LPQ window must be odd and >= 3, got {}",
            params.window
        )));
    }
    if !(0.0..1.0).contains(&params.rho) {
        return Err(Error::validation(format!(
            "LPQ correlation must lie in [0, 1), got {}",
            params.rho
        )));
    }
    if data.len() != w * h {
        return Err(Error::validation("pixel buffer does not match geometry"));
    }
    let m = params.window;
    if w < m || h < m {
        return Err(Error::validation(format!(
            "{w}x{h} image too small for a {m}x{m} window"
        )));
    }
    let taps = stencils(m);
    let transform = params
        .decorrelate
        .then(|| whitening_transform(m, params.rho));
    let out_w = w - m + 1;
    let out_h = h - m + 1;
    let mut codes = Vec::with_capacity(out_w * out_h);
    let mut window_px = vec![0.0; m * m];
    for y in 0..out_h {
        for x in 0..out_w {
            let mut i = 0;
            for wy in 0..m {
                let row = (y + wy) * w + x;
                window_px[i..i + m].copy_from_slice(&data[row..row + m]);
                i += m;
            }
            let mut v = [0.0f64; 8];
            for f in 0..4 {
                let mut re = 0.0;
                let mut im = 0.0;
                for (tap, &px) in taps[f].iter().zip(&window_px) {
                    re += tap.0 * px;
                    im += tap.1 * px;
                }
                v[2 * f] = re;
                v[2 * f + 1] = im;
            }
            let signs = match &transform {
                Some(t) => {
                    let tv = t.transpose() * SVector::<f64, 8>::from_row_slice(&v);
                    let mut s = [0.0f64; 8];
                    s.copy_from_slice(tv.as_slice());
                    s
                }
                None => v,
            };
            let mut code = 0u16;
            for (k, &s) in signs.iter().enumerate() {
                if s >= 0.0 {
                    code |= 1 << k;
                }
            }
            codes.push(code);
        }
    }
    CodeMap::new(out_w, out_h, LPQ_BINS, codes)
}

/// LPQ histogram descriptor with explicit parameters.
pub fn extract_lpq_with(img: &GrayImage, params: &LpqParams) -> Result<FeatureVector> {
    let data = img.to_f64();
    let map = lpq_code_map(&data, img.width() as usize, img.height() as usize, params)?;
    let spec = BlockSpec::new(BLOCK, BLOCK, 0)?;
    let values = block_histograms(&map, &spec)?;
    Ok(FeatureVector::new(Descriptor::Lpq, values))
}

/// LPQ with the default 5x5 window, rho 0.9 and decorrelation on.
pub fn extract_lpq(img: &GrayImage) -> Result<FeatureVector> {
    extract_lpq_with(img, &LpqParams::default())
}
