//! Distance measures and probe-vs-gallery score matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptors::FeatureVector;
use crate::error::{Error, Result};

/// Supported dissimilarity measures. Lower is always more similar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    ChiSquare,
    Cosine,
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::ChiSquare => "chi2",
            Measure::Cosine => "cosine",
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Measure::ChiSquare => chi_square(a, b),
            Measure::Cosine => cosine_distance(a, b),
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chi2" | "chi-square" | "chisquare" => Ok(Measure::ChiSquare),
            "cosine" => Ok(Measure::Cosine),
            other => Err(Error::validation(format!("unknown measure {other:?}"))),
        }
    }
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "vectors disagree in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::validation("vectors must be non-empty"));
    }
    Ok(())
}

/// Chi-square histogram distance: `sum (a_i - b_i)^2 / (a_i + b_i)`.
/// Terms with a zero denominator contribute zero. Entries must be
/// non-negative; the result is symmetric, zero on identical inputs.
pub fn chi_square(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    let mut total = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        if x < 0.0 || y < 0.0 {
            return Err(Error::validation(
                "chi-square requires non-negative histogram entries",
            ));
        }
        let denom = x + y;
        if denom > 0.0 {
            let d = x - y;
            total += d * d / denom;
        }
    }
    Ok(total)
}

/// Cosine distance: `1 - (a.b) / (|a| |b|)`. If either vector has zero
/// norm the distance is defined as 1 (maximally dissimilar).
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - dot / (na.sqrt() * nb.sqrt()))
}

/// All pairwise probe-vs-gallery distances plus the identities on both
/// axes, row-major with probes as rows.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    n_probes: usize,
    n_gallery: usize,
    scores: Vec<f64>,
    probe_labels: Vec<String>,
    gallery_labels: Vec<String>,
}

impl ScoreMatrix {
    pub fn n_probes(&self) -> usize {
        self.n_probes
    }

    pub fn n_gallery(&self) -> usize {
        self.n_gallery
    }

    #[inline]
    pub fn score(&self, probe: usize, gallery: usize) -> f64 {
        self.scores[probe * self.n_gallery + gallery]
    }

    pub fn row(&self, probe: usize) -> &[f64] {
        &self.scores[probe * self.n_gallery..(probe + 1) * self.n_gallery]
    }

    pub fn probe_labels(&self) -> &[String] {
        &self.probe_labels
    }

    pub fn gallery_labels(&self) -> &[String] {
        &self.gallery_labels
    }
}

/// Scores every probe against every gallery vector with `measure`.
/// Rows are computed in parallel; the layout is deterministic regardless
/// of thread scheduling. All vectors must share one dimension and both
/// sides must be non-empty and label-aligned.
pub fn score_matrix(
    probes: &[FeatureVector],
    probe_labels: &[String],
    gallery: &[FeatureVector],
    gallery_labels: &[String],
    measure: Measure,
) -> Result<ScoreMatrix> {
    if probes.is_empty() || gallery.is_empty() {
        return Err(Error::validation(
            "probe and gallery sets must be non-empty",
        ));
    }
    if probes.len() != probe_labels.len() || gallery.len() != gallery_labels.len() {
        return Err(Error::validation(
            "labels must align one-to-one with feature vectors",
        ));
    }
    let dim = probes[0].dim();
    for fv in probes.iter().chain(gallery) {
        if fv.dim() != dim {
            return Err(Error::validation(format!(
                "mixed dimensions: expected {dim}, found {}",
                fv.dim()
            )));
        }
    }
    let rows: Vec<Vec<f64>> = probes
        .par_iter()
        .map(|p| {
            gallery
                .iter()
                .map(|g| measure.distance(p.values(), g.values()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut scores = Vec::with_capacity(probes.len() * gallery.len());
    for row in rows {
        scores.extend(row);
    }
    Ok(ScoreMatrix {
        n_probes: probes.len(),
        n_gallery: gallery.len(),
        scores,
        probe_labels: probe_labels.to_vec(),
        gallery_labels: gallery_labels.to_vec(),
    })
}
