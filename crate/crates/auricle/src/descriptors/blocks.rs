//! Block-histogram pooling shared by all code-map descriptors.

use crate::error::{Error, Result};

/// Dense map of discrete codes produced by a descriptor's labeling stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMap {
    width: usize,
    height: usize,
    n_bins: usize,
    codes: Vec<u16>,
}

impl CodeMap {
    /// Wraps row-major codes. Every code must be below `n_bins` and the
    /// buffer must cover `width * height` cells exactly.
    pub fn new(width: usize, height: usize, n_bins: usize, codes: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 || n_bins == 0 {
            return Err(Error::validation(format!(
                "code map needs positive geometry and bin count, got {width}x{height}, {n_bins} bins"
            )));
        }
        if codes.len() != width * height {
            return Err(Error::validation(format!(
                "code buffer has {} entries, {width}x{height} needs {}",
                codes.len(),
                width * height
            )));
        }
        if let Some(&bad) = codes.iter().find(|&&c| c as usize >= n_bins) {
            return Err(Error::validation(format!(
                "code {bad} out of range for {n_bins} bins"
            )));
        }
        Ok(CodeMap {
            width,
            height,
            n_bins,
            codes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    #[inline]
    pub fn code(&self, x: usize, y: usize) -> u16 {
        debug_assert!(x < self.width && y < self.height);
        self.codes[y * self.width + x]
    }

    pub fn codes(&self) -> &[u16] {
        &self.codes
    }
}

/// Square-grid tiling parameters: block geometry plus overlap between
/// consecutive blocks along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpec {
    block_w: usize,
    block_h: usize,
    overlap: usize,
}

impl BlockSpec {
    /// Overlap must leave a positive stride: `overlap < min(block_w, block_h)`.
    pub fn new(block_w: usize, block_h: usize, overlap: usize) -> Result<Self> {
        if block_w == 0 || block_h == 0 {
            return Err(Error::validation(format!(
                "blocks need positive geometry, got {block_w}x{block_h}"
            )));
        }
        if overlap >= block_w.min(block_h) {
            return Err(Error::validation(format!(
                "overlap {overlap} must be smaller than the block side {}",
                block_w.min(block_h)
            )));
        }
        Ok(BlockSpec {
            block_w,
            block_h,
            overlap,
        })
    }

    pub fn block_w(&self) -> usize {
        self.block_w
    }

    pub fn block_h(&self) -> usize {
        self.block_h
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn stride_x(&self) -> usize {
        self.block_w - self.overlap
    }

    pub fn stride_y(&self) -> usize {
        self.block_h - self.overlap
    }

    /// Number of complete blocks along one axis of length `extent`.
    /// Trailing cells that do not fill a block are discarded.
    pub fn count_along(&self, extent: usize, block: usize, stride: usize) -> usize {
        if extent < block {
            0
        } else {
            (extent - block) / stride + 1
        }
    }

    pub fn grid(&self, map_w: usize, map_h: usize) -> (usize, usize) {
        (
            self.count_along(map_w, self.block_w, self.stride_x()),
            self.count_along(map_h, self.block_h, self.stride_y()),
        )
    }
}

/// Tiles the map left-to-right, top-to-bottom and concatenates one
/// histogram per block, each L1-normalized to sum 1.
///
/// Output length is `blocks_x * blocks_y * n_bins`. The map must admit at
/// least one complete block.
pub fn block_histograms(map: &CodeMap, spec: &BlockSpec) -> Result<Vec<f64>> {
    let (bx, by) = spec.grid(map.width(), map.height());
    if bx == 0 || by == 0 {
        return Err(Error::validation(format!(
            "{}x{} map does not fit one {}x{} block",
            map.width(),
            map.height(),
            spec.block_w(),
            spec.block_h()
        )));
    }
    let n_bins = map.n_bins();
    let mut out = Vec::with_capacity(bx * by * n_bins);
    let cells_per_block = (spec.block_w() * spec.block_h()) as f64;
    for gy in 0..by {
        let y0 = gy * spec.stride_y();
        for gx in 0..bx {
            let x0 = gx * spec.stride_x();
            let start = out.len();
            out.resize(start + n_bins, 0.0);
            let hist = &mut out[start..];
            for y in y0..y0 + spec.block_h() {
                for x in x0..x0 + spec.block_w() {
                    hist[map.code(x, y) as usize] += 1.0;
                }
            }
            for v in hist.iter_mut() {
                *v /= cells_per_block;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_from(codes: Vec<u16>, w: usize, h: usize, bins: usize) -> CodeMap {
        CodeMap::new(w, h, bins, codes).unwrap()
    }

    #[test]
    fn code_map_validates_codes_and_geometry() {
        assert!(CodeMap::new(0, 2, 4, vec![]).is_err());
        assert!(CodeMap::new(2, 2, 4, vec![0, 1, 2]).is_err());
        assert!(CodeMap::new(2, 2, 4, vec![0, 1, 2, 4]).is_err());
        assert!(CodeMap::new(2, 2, 4, vec![0, 1, 2, 3]).is_ok());
    }

    #[test]
    fn block_spec_requires_positive_stride() {
        assert!(BlockSpec::new(8, 8, 8).is_err());
        assert!(BlockSpec::new(8, 8, 7).is_ok());
        assert!(BlockSpec::new(0, 8, 0).is_err());
    }

    #[test]
    fn sixteen_by_eight_map_with_eight_blocks_yields_two() {
        let map = map_from(vec![0; 16 * 8], 16, 8, 2);
        let spec = BlockSpec::new(8, 8, 0).unwrap();
        assert_eq!(spec.grid(16, 8), (2, 1));
        let h = block_histograms(&map, &spec).unwrap();
        assert_eq!(h.len(), 2 * 2);
    }

    #[test]
    fn trailing_pixels_are_discarded() {
        // 17 columns with 8-wide stride-8 blocks: the 17th column is
        // dropped, so a differing code there must not show up.
        let mut codes = vec![1; 17 * 8];
        for y in 0..8 {
            codes[y * 17 + 16] = 0;
        }
        let map = map_from(codes, 17, 8, 2);
        let spec = BlockSpec::new(8, 8, 0).unwrap();
        assert_eq!(spec.grid(17, 8), (2, 1));
        let h = block_histograms(&map, &spec).unwrap();
        assert_eq!(h, vec![0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn overlap_shrinks_stride() {
        let spec = BlockSpec::new(8, 8, 4).unwrap();
        assert_eq!(spec.stride_x(), 4);
        // 16 wide: blocks at 0, 4, 8 -> 3 blocks.
        assert_eq!(spec.grid(16, 8), (3, 1));
    }

    #[test]
    fn map_smaller_than_block_is_rejected() {
        let map = map_from(vec![0; 4 * 4], 4, 4, 2);
        let spec = BlockSpec::new(8, 8, 0).unwrap();
        assert!(block_histograms(&map, &spec).is_err());
    }

    #[test]
    fn histograms_count_codes_and_sum_to_one() {
        // 2x2 map, one block: codes 0,1,1,3 of 4 bins.
        let map = map_from(vec![0, 1, 1, 3], 2, 2, 4);
        let spec = BlockSpec::new(2, 2, 0).unwrap();
        let h = block_histograms(&map, &spec).unwrap();
        assert_eq!(h, vec![0.25, 0.5, 0.0, 0.25]);
    }

    #[test]
    fn blocks_concatenate_in_scan_order() {
        // 4x2 map, two 2x2 blocks: left all code 0, right all code 1.
        let map = map_from(vec![0, 0, 1, 1, 0, 0, 1, 1], 4, 2, 2);
        let spec = BlockSpec::new(2, 2, 0).unwrap();
        let h = block_histograms(&map, &spec).unwrap();
        assert_eq!(h, vec![1.0, 0.0, 0.0, 1.0]);
    }
}
