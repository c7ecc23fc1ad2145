//! The eight texture descriptors and their shared plumbing.
//!
//! Each descriptor consumes a preprocessed grayscale image and emits a
//! fixed-length `f64` feature vector; for a 100x100 input the lengths are
//! pinned by unit tests (LBP 8496, LPQ 6400, RILPQ 6400, BSIF 6400,
//! POEM 11328, HOG 4356, DSIFT 12800, Gabor 5760).

pub mod blocks;
pub mod bsif;
pub mod dsift;
pub mod gabor;
mod gradient;
pub mod hog;
pub mod lbp;
pub mod lpq;
pub mod poem;
pub mod rilpq;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::GrayImage;
use crate::matching::Measure;

/// Identifier of one of the supported texture descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Descriptor {
    Lbp,
    Lpq,
    Rilpq,
    Bsif,
    Poem,
    Hog,
    Dsift,
    Gabor,
}

impl Descriptor {
    pub const ALL: [Descriptor; 8] = [
        Descriptor::Lbp,
        Descriptor::Lpq,
        Descriptor::Rilpq,
        Descriptor::Bsif,
        Descriptor::Poem,
        Descriptor::Hog,
        Descriptor::Dsift,
        Descriptor::Gabor,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Descriptor::Lbp => "lbp",
            Descriptor::Lpq => "lpq",
            Descriptor::Rilpq => "rilpq",
            Descriptor::Bsif => "bsif",
            Descriptor::Poem => "poem",
            Descriptor::Hog => "hog",
            Descriptor::Dsift => "dsift",
            Descriptor::Gabor => "gabor",
        }
    }

    /// Distance measure the descriptor is evaluated with by default:
    /// chi-square for the histogram families, cosine for Gabor.
    pub fn default_measure(&self) -> Measure {
        match self {
            Descriptor::Gabor => Measure::Cosine,
            _ => Measure::ChiSquare,
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Descriptor::ALL
            .iter()
            .copied()
            .find(|d| d.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::validation(format!("unknown descriptor {s:?}")))
    }
}

/// What a filter bank's kernels encode, used to reject banks passed to
/// the wrong extractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankKind {
    Bsif,
    Gabor,
}

/// One complex convolution kernel as separate real/imaginary tap planes,
/// row-major. Real kernels carry an all-zero imaginary plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Kernel {
    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }
}

/// A named set of convolution kernels with uniform square geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    kind: BankKind,
    size: usize,
    kernels: Vec<Kernel>,
}

impl FilterBank {
    /// Builds a bank from (re, im) tap planes. The side must be odd, all
    /// kernels must cover `size * size` taps, and BSIF kernels must be
    /// real with zero mean (the sign filters are defined DC-free).
    pub fn new(kind: BankKind, size: usize, taps: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        if size < 3 || size.is_multiple_of(2) {
            return Err(Error::validation(format!(
                "kernel side must be odd and >= 3, got {size}"
            )));
        }
        if taps.is_empty() {
            return Err(Error::validation("filter bank cannot be empty"));
        }
        let n = size * size;
        let mut kernels = Vec::with_capacity(taps.len());
        for (i, (re, im)) in taps.into_iter().enumerate() {
            if re.len() != n || im.len() != n {
                return Err(Error::validation(format!(
                    "kernel {i} has {}+{} taps, expected {n} per plane",
                    re.len(),
                    im.len()
                )));
            }
            if kind == BankKind::Bsif {
                if im.iter().any(|&v| v != 0.0) {
                    return Err(Error::validation(format!("BSIF kernel {i} must be real")));
                }
                let mean = re.iter().sum::<f64>() / n as f64;
                if mean.abs() > 1e-9 {
                    return Err(Error::validation(format!(
                        "BSIF kernel {i} has mean {mean:e}, must be zero-mean"
                    )));
                }
            }
            kernels.push(Kernel { re, im });
        }
        Ok(FilterBank {
            kind,
            size,
            kernels,
        })
    }

    pub fn kind(&self) -> BankKind {
        self.kind
    }

    /// Side length of every kernel.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn kernel(&self, i: usize) -> &Kernel {
        &self.kernels[i]
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }
}

/// A descriptor output: which extractor produced it plus the values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    descriptor: Descriptor,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(descriptor: Descriptor, values: Vec<f64>) -> Self {
        FeatureVector { descriptor, values }
    }

    pub fn descriptor(&self) -> Descriptor {
        self.descriptor
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Extraction context holding the filter banks and size-specific plans
/// that are expensive to rebuild per image.
pub struct Extractor {
    bsif_bank: FilterBank,
    gabor_bank: FilterBank,
    gabor_conv: gabor::GaborConvolver,
    lpq_decorrelate: bool,
}

impl Extractor {
    /// Standard banks: BSIF filters from `bsif_source`, the 40-kernel Gabor
    /// bank, LPQ decorrelation enabled. Convolution plans are laid out for
    /// `target_w x target_h` inputs; other sizes still work via a slow path.
    pub fn new(target_w: u32, target_h: u32, bsif_source: &bsif::BsifSource) -> Result<Self> {
        let bsif_bank = bsif::learn_or_load_bsif_bank(bsif_source)?;
        let gabor_bank = gabor::make_gabor_bank(gabor::GABOR_KERNEL_SIZE)?;
        let gabor_conv =
            gabor::GaborConvolver::new(&gabor_bank, target_w as usize, target_h as usize)?;
        Ok(Extractor {
            bsif_bank,
            gabor_bank,
            gabor_conv,
            lpq_decorrelate: true,
        })
    }

    pub fn lpq_decorrelate(mut self, on: bool) -> Self {
        self.lpq_decorrelate = on;
        self
    }

    pub fn bsif_bank(&self) -> &FilterBank {
        &self.bsif_bank
    }

    pub fn extract(&self, img: &GrayImage, descriptor: Descriptor) -> Result<FeatureVector> {
        match descriptor {
            Descriptor::Lbp => lbp::extract_lbp(img),
            Descriptor::Lpq => lpq::extract_lpq_with(
                img,
                &lpq::LpqParams {
                    decorrelate: self.lpq_decorrelate,
                    ..lpq::LpqParams::default()
                },
            ),
            Descriptor::Rilpq => rilpq::extract_rilpq(img),
            Descriptor::Bsif => bsif::extract_bsif(img, &self.bsif_bank),
            Descriptor::Poem => poem::extract_poem(img),
            Descriptor::Hog => hog::extract_hog(img),
            Descriptor::Dsift => dsift::extract_dsift(img),
            Descriptor::Gabor => {
                if self.gabor_conv.fits(img) {
                    gabor::extract_gabor_with(img, &self.gabor_bank, &self.gabor_conv)
                } else {
                    gabor::extract_gabor(img, &self.gabor_bank)
                }
            }
        }
    }
}
