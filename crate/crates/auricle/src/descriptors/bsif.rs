//! Binarized statistical image features.
//!
//! Eight 11x11 zero-mean filters respond to the mean-centered image; the
//! sign of each response contributes one bit of the per-pixel code.
//! Filters come from a bank file when one is supplied, otherwise a
//! deterministic surrogate bank is generated from a seed: Gaussian taps,
//! centered, then orthonormalized, which preserves the zero-mean and
//! decorrelation properties the learned banks rely on.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::descriptors::blocks::{block_histograms, BlockSpec, CodeMap};
use crate::descriptors::{BankKind, Descriptor, FeatureVector, FilterBank};
use crate::error::{Error, Result};
use crate::imgproc::GrayImage;

pub const BSIF_FILTERS: usize = 8;
pub const BSIF_SIZE: usize = 11;
pub const BSIF_BINS: usize = 1 << BSIF_FILTERS;
/// Bank used when no filter file is configured.
pub const DEFAULT_BSIF_SEED: u64 = 0xB51F;
const BLOCK: usize = 18;

/// Where the filter bank comes from.
#[derive(Debug, Clone)]
pub enum BsifSource {
    File(PathBuf),
    Seed(u64),
}

/// Parses a bank file: the token `BSIF`, the filter count, the kernel
/// side, then `count * side * side` real taps in filter-major row-major
/// order, all separated by arbitrary whitespace. Only 8 filters of 11x11
/// are accepted. Each filter is re-centered to exact zero mean on load,
/// absorbing serialization rounding.
pub fn load_bsif_bank(path: &Path) -> Result<FilterBank> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut tokens = text.split_whitespace();
    let magic = tokens
        .next()
        .ok_or_else(|| Error::format(path.display(), "empty filter file"))?;
    if magic != "BSIF" {
        return Err(Error::format(
            path.display(),
            format!("expected leading token BSIF, found {magic:?}"),
        ));
    }
    let mut read_usize = |name: &str| -> Result<usize> {
        let tok = tokens
            .next()
            .ok_or_else(|| Error::format(path.display(), format!("missing {name}")))?;
        tok.parse::<usize>().map_err(|_| {
            Error::format(path.display(), format!("{name} is not an integer: {tok:?}"))
        })
    };
    let count = read_usize("filter count")?;
    let size = read_usize("kernel side")?;
    if count != BSIF_FILTERS || size != BSIF_SIZE {
        return Err(Error::validation(format!(
            "bank must hold {BSIF_FILTERS} filters of {BSIF_SIZE}x{BSIF_SIZE}, file declares {count} of {size}x{size}"
        )));
    }
    let taps_per = size * size;
    let mut filters = Vec::with_capacity(count);
    for f in 0..count {
        let mut taps = Vec::with_capacity(taps_per);
        for i in 0..taps_per {
            let tok = tokens.next().ok_or_else(|| {
                Error::format(
                    path.display(),
                    format!("filter {f} truncated at tap {i}: expected {taps_per} taps"),
                )
            })?;
            let v: f64 = tok.parse().map_err(|_| {
                Error::format(
                    path.display(),
                    format!("filter {f} tap {i} is not a number: {tok:?}"),
                )
            })?;
            taps.push(v);
        }
        let mean = taps.iter().sum::<f64>() / taps_per as f64;
        for t in &mut taps {
            *t -= mean;
        }
        filters.push((taps, vec![0.0; taps_per]));
    }
    if let Some(extra) = tokens.next() {
        return Err(Error::format(
            path.display(),
            format!("trailing data after the last tap: {extra:?}"),
        ));
    }
    FilterBank::new(BankKind::Bsif, BSIF_SIZE, filters)
}

/// Deterministic surrogate bank: 8 Gaussian 11x11 filters from the seed,
/// each centered to zero mean, then orthonormalized with modified
/// Gram-Schmidt (centering survives, as the span of zero-mean vectors is
/// zero-mean).
pub fn learn_bsif_bank(seed: u64) -> FilterBank {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = BSIF_SIZE * BSIF_SIZE;
    let mut filters: Vec<Vec<f64>> = (0..BSIF_FILTERS)
        .map(|_| {
            let mut taps: Vec<f64> = (0..n)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            let mean = taps.iter().sum::<f64>() / n as f64;
            for t in &mut taps {
                *t -= mean;
            }
            taps
        })
        .collect();
    for i in 0..filters.len() {
        for j in 0..i {
            let dot: f64 = filters[i].iter().zip(&filters[j]).map(|(a, b)| a * b).sum();
            let (left, right) = filters.split_at_mut(i);
            for (t, &q) in right[0].iter_mut().zip(&left[j]) {
                *t -= dot * q;
            }
        }
        let norm = filters[i].iter().map(|t| t * t).sum::<f64>().sqrt();
        assert!(
            norm > 1e-9,
            "random Gaussian filters collapsed during orthonormalization"
        );
        for t in &mut filters[i] {
            *t /= norm;
        }
    }
    let taps = filters.into_iter().map(|re| {
        let n = re.len();
        (re, vec![0.0; n])
    });
    FilterBank::new(BankKind::Bsif, BSIF_SIZE, taps.collect())
        .expect("generated bank satisfies its own invariants")
}

pub fn learn_or_load_bsif_bank(source: &BsifSource) -> Result<FilterBank> {
    match source {
        BsifSource::File(path) => load_bsif_bank(path),
        BsifSource::Seed(seed) => Ok(learn_bsif_bank(*seed)),
    }
}

/// Labels every pixel whose 11x11 neighborhood fits inside the image.
/// Bit `k` is set when filter `k`'s response is strictly positive.
///
/// Pixels are centered in scaled integer form (`v * n - sum`, both exact
/// in f64) so a global intensity shift cancels exactly before the filters
/// see the data; response signs are unaffected by the scaling.
pub fn bsif_code_map(data: &[u8], w: usize, h: usize, bank: &FilterBank) -> Result<CodeMap> {
    if bank.kind() != BankKind::Bsif {
        return Err(Error::validation(
            "BSIF extraction requires a BSIF filter bank",
        ));
    }
    if data.len() != w * h {
        return Err(Error::validation("pixel buffer does not match geometry"));
    }
    let size = bank.size();
    let margin = size / 2;
    if w < size || h < size {
        return Err(Error::validation(format!(
            "{w}x{h} image too small for {size}x{size} filters"
        )));
    }
    let n = (w * h) as f64;
    let sum: f64 = data.iter().map(|&v| v as u64).sum::<u64>() as f64;
    let centered: Vec<f64> = data.iter().map(|&v| v as f64 * n - sum).collect();
    let out_w = w - 2 * margin;
    let out_h = h - 2 * margin;
    let mut codes = vec![0u16; out_w * out_h];
    for (k, kernel) in bank.kernels().iter().enumerate() {
        let taps = kernel.re();
        let bit = 1u16 << k;
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut resp = 0.0;
                for ky in 0..size {
                    let row = (oy + ky) * w + ox;
                    let trow = ky * size;
                    for kx in 0..size {
                        resp += taps[trow + kx] * centered[row + kx];
                    }
                }
                if resp > 0.0 {
                    codes[oy * out_w + ox] |= bit;
                }
            }
        }
    }
    CodeMap::new(out_w, out_h, 1 << bank.len(), codes)
}

/// BSIF histogram descriptor pooled over 18x18 blocks.
pub fn extract_bsif(img: &GrayImage, bank: &FilterBank) -> Result<FeatureVector> {
    let map = bsif_code_map(
        img.as_slice(),
        img.width() as usize,
        img.height() as usize,
        bank,
    )?;
    let spec = BlockSpec::new(BLOCK, BLOCK, 0)?;
    let values = block_histograms(&map, &spec)?;
    Ok(FeatureVector::new(Descriptor::Bsif, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: u32, h: u32) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| ((x * 41 + y * 23 + (x * y) % 37) % 200) as u8).unwrap()
    }

    #[test]
    fn learned_bank_is_zero_mean_and_orthonormal() {
        let bank = learn_bsif_bank(DEFAULT_BSIF_SEED);
        assert_eq!(bank.len(), BSIF_FILTERS);
        assert_eq!(bank.size(), BSIF_SIZE);
        for i in 0..bank.len() {
            let fi = bank.kernel(i).re();
            let mean = fi.iter().sum::<f64>() / fi.len() as f64;
            assert!(mean.abs() < 1e-12, "filter {i} mean {mean:e}");
            for j in 0..=i {
                let dot: f64 = fi.iter().zip(bank.kernel(j).re()).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-9, "dot({i},{j}) = {dot}");
            }
        }
    }

    #[test]
    fn learning_is_deterministic_in_the_seed() {
        assert_eq!(learn_bsif_bank(7), learn_bsif_bank(7));
        assert_ne!(learn_bsif_bank(7), learn_bsif_bank(8));
    }

    fn write_bank_file(bank: &FilterBank, path: &Path) {
        let mut text = format!("BSIF {} {}\n", bank.len(), bank.size());
        for k in bank.kernels() {
            for t in k.re() {
                text.push_str(&format!("{t} "));
            }
            text.push('\n');
        }
        std::fs::write(path, text).unwrap();
    }

    #[test]
    fn bank_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bank.txt");
        let bank = learn_bsif_bank(3);
        write_bank_file(&bank, &path);
        let loaded = load_bsif_bank(&path).unwrap();
        assert_eq!(loaded.len(), bank.len());
        for (a, b) in loaded.kernels().iter().zip(bank.kernels()) {
            for (x, y) in a.re().iter().zip(b.re()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loader_recenters_biased_filters() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("biased.txt");
        let mut text = String::from("BSIF 8 11\n");
        for f in 0..8 {
            for i in 0..121 {
                text.push_str(&format!("{} ", (f + i) as f64 * 0.01 + 5.0));
            }
        }
        std::fs::write(&path, text).unwrap();
        let bank = load_bsif_bank(&path).unwrap();
        for k in bank.kernels() {
            let mean = k.re().iter().sum::<f64>() / k.re().len() as f64;
            assert!(mean.abs() < 1e-9);
        }
    }

    #[test]
    fn loader_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, body: &str| {
            let p = dir.path().join(name);
            std::fs::write(&p, body).unwrap();
            p
        };
        let bad_magic = write("magic.txt", "BANK 8 11 0.0");
        assert!(matches!(
            load_bsif_bank(&bad_magic),
            Err(Error::Format { .. })
        ));
        let bad_count = write(
            "count.txt",
            &format!("BSIF 7 11 {}", "0.1 ".repeat(7 * 121)),
        );
        assert!(matches!(
            load_bsif_bank(&bad_count),
            Err(Error::Validation(_))
        ));
        let truncated = write("short.txt", "BSIF 8 11 0.5 -0.5");
        assert!(matches!(
            load_bsif_bank(&truncated),
            Err(Error::Format { .. })
        ));
        let not_a_number = write(
            "nan.txt",
            &format!("BSIF 8 11 {} zebra", "0.1 ".repeat(8 * 121 - 1)),
        );
        assert!(matches!(
            load_bsif_bank(&not_a_number),
            Err(Error::Format { .. })
        ));
        let trailing = write(
            "extra.txt",
            &format!("BSIF 8 11 {} 9.9", "0.1 ".repeat(8 * 121)),
        );
        assert!(matches!(
            load_bsif_bank(&trailing),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let gabor = crate::descriptors::gabor::make_gabor_bank(31).unwrap();
        let img = textured(32, 32);
        assert!(matches!(
            extract_bsif(&img, &gabor),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn dimension_for_100x100_input() {
        let bank = learn_bsif_bank(DEFAULT_BSIF_SEED);
        let fv = extract_bsif(&textured(100, 100), &bank).unwrap();
        assert_eq!(fv.dim(), 6400);
    }

    #[test]
    fn shift_invariance_is_exact() {
        let bank = learn_bsif_bank(11);
        let img = textured(24, 24);
        let shifted = GrayImage::from_fn(24, 24, |x, y| img.get(x, y) + 55).unwrap();
        let a = bsif_code_map(img.as_slice(), 24, 24, &bank).unwrap();
        let b = bsif_code_map(shifted.as_slice(), 24, 24, &bank).unwrap();
        assert_eq!(a.codes(), b.codes());
    }

    #[test]
    fn negation_flips_every_bit() {
        let bank = learn_bsif_bank(11);
        let img = textured(24, 24);
        let negated = GrayImage::from_fn(24, 24, |x, y| 255 - img.get(x, y)).unwrap();
        let a = bsif_code_map(img.as_slice(), 24, 24, &bank).unwrap();
        let b = bsif_code_map(negated.as_slice(), 24, 24, &bank).unwrap();
        for (&ca, &cb) in a.codes().iter().zip(b.codes()) {
            assert_eq!(ca ^ cb, 0xff);
        }
    }
}
