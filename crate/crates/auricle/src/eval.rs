//! Identification and verification metrics plus protocol machinery:
//! CMC/rank-1, ROC/EER, stratified fold construction and bootstrap
//! statistics.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::DatasetIndex;
use crate::error::{Error, Result};
use crate::matching::ScoreMatrix;

/// Cumulative match characteristic: `points()[r - 1]` is the fraction of
/// probes whose true identity ranks within the best `r` gallery
/// identities.
#[derive(Debug, Clone, PartialEq)]
pub struct CmcCurve {
    points: Vec<f64>,
}

impl CmcCurve {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One swept operating point of a verification experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// Decision threshold: comparisons with distance <= threshold are
    /// accepted. The leading sentinel uses negative infinity.
    pub threshold: f64,
    /// Fraction of impostor comparisons accepted.
    pub far: f64,
    /// Fraction of genuine comparisons accepted.
    pub vr: f64,
}

impl RocPoint {
    /// False-rejection rate at this threshold.
    pub fn frr(&self) -> f64 {
        1.0 - self.vr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<RocPoint>,
}

impl RocCurve {
    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }
}

/// Splits the pooled comparisons of a score matrix by label agreement:
/// genuine where probe and gallery identities match, impostor otherwise.
/// The caller's matrix construction is responsible for excluding
/// self-comparisons of identical images.
pub fn pool_scores(m: &ScoreMatrix) -> (Vec<f64>, Vec<f64>) {
    let mut genuine = Vec::new();
    let mut impostor = Vec::new();
    for (p, p_label) in m.probe_labels().iter().enumerate() {
        let row = m.row(p);
        for (g_label, &score) in m.gallery_labels().iter().zip(row) {
            if p_label == g_label {
                genuine.push(score);
            } else {
                impostor.push(score);
            }
        }
    }
    (genuine, impostor)
}

/// Identification experiment: for each probe, gallery identities are
/// ranked by their best (minimum) distance, ties broken by first
/// occurrence in gallery order; the probe scores at the rank of its true
/// identity.
pub fn cmc(m: &ScoreMatrix) -> Result<CmcCurve> {
    let mut id_index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut n_ids = 0usize;
    let mut column_id = Vec::with_capacity(m.n_gallery());
    for label in m.gallery_labels() {
        let id = *id_index.entry(label.as_str()).or_insert_with(|| {
            let id = n_ids;
            n_ids += 1;
            id
        });
        column_id.push(id);
    }
    let mut hits = vec![0usize; n_ids];
    let mut best = vec![f64::INFINITY; n_ids];
    for (p, p_label) in m.probe_labels().iter().enumerate() {
        let Some(&true_id) = id_index.get(p_label.as_str()) else {
            return Err(Error::protocol(format!(
                "probe identity {p_label:?} has no gallery image"
            )));
        };
        best.fill(f64::INFINITY);
        for (&id, &score) in column_id.iter().zip(m.row(p)) {
            if score < best[id] {
                best[id] = score;
            }
        }
        let true_best = best[true_id];
        // Identity ids equal first-occurrence order, so `id < true_id`
        // is exactly the stable tie-break.
        let rank = 1 + best
            .iter()
            .enumerate()
            .filter(|&(id, &b)| b < true_best || (b == true_best && id < true_id))
            .count();
        hits[rank - 1] += 1;
    }
    let n = m.n_probes() as f64;
    let mut cumulative = 0usize;
    let points = hits
        .iter()
        .map(|&h| {
            cumulative += h;
            cumulative as f64 / n
        })
        .collect();
    Ok(CmcCurve { points })
}

/// Rank-1 recognition rate: the first CMC point.
pub fn rank1(c: &CmcCurve) -> f64 {
    c.points.first().copied().unwrap_or(0.0)
}

/// Sweeps the acceptance threshold over every distinct score, preceded
/// by a sentinel below all scores so the curve starts at (0, 0). A
/// comparison is accepted when its distance is <= the threshold.
pub fn roc(genuine: &[f64], impostor: &[f64]) -> Result<RocCurve> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(Error::validation(
            "ROC needs non-empty genuine and impostor score lists",
        ));
    }
    if genuine.iter().chain(impostor).any(|v| v.is_nan()) {
        return Err(Error::validation("scores must not be NaN"));
    }
    let mut g = genuine.to_vec();
    let mut i = impostor.to_vec();
    g.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN after validation"));
    i.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN after validation"));
    let mut points = vec![RocPoint {
        threshold: f64::NEG_INFINITY,
        far: 0.0,
        vr: 0.0,
    }];
    let (mut gi, mut ii) = (0usize, 0usize);
    let (ng, ni) = (g.len() as f64, i.len() as f64);
    while gi < g.len() || ii < i.len() {
        let t = match (g.get(gi), i.get(ii)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while gi < g.len() && g[gi] <= t {
            gi += 1;
        }
        while ii < i.len() && i[ii] <= t {
            ii += 1;
        }
        points.push(RocPoint {
            threshold: t,
            far: ii as f64 / ni,
            vr: gi as f64 / ng,
        });
    }
    Ok(RocCurve { points })
}

/// Equal error rate: the FAR where FAR = FRR along the swept curve. If
/// no swept point crosses exactly, the two points bracketing the sign
/// change of (FAR - FRR) are linearly interpolated. The leading (0, 0)
/// sentinel has FAR - FRR = -1 and the final point (1, 1) has +1, so a
/// crossing always exists.
pub fn eer(r: &RocCurve) -> f64 {
    let pts = r.points();
    let mut prev = pts[0];
    let mut prev_d = prev.far - prev.frr();
    if prev_d >= 0.0 {
        return prev.far.max(prev.frr());
    }
    for &p in &pts[1..] {
        let d = p.far - p.frr();
        if d == 0.0 {
            return p.far;
        }
        if d > 0.0 {
            let lambda = prev_d / (prev_d - d);
            return prev.far + lambda * (p.far - prev.far);
        }
        prev = p;
        prev_d = d;
    }
    // Unreachable for curves built by `roc`; treat a curve that never
    // crosses as ending at its last point's worst rate.
    prev.far.max(prev.frr())
}

/// Assignment of every image to one cross-validation fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    fold_of_image: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn new(k: usize, fold_of_image: BTreeMap<String, usize>) -> Result<Self> {
        if k < 2 {
            return Err(Error::validation(format!(
                "fold count must be >= 2, got {k}"
            )));
        }
        if let Some((id, &f)) = fold_of_image.iter().find(|&(_, &f)| f >= k) {
            return Err(Error::validation(format!(
                "image {id:?} assigned to fold {f}, but k = {k}"
            )));
        }
        Ok(FoldAssignment { k, fold_of_image })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, image_id: &str) -> Option<usize> {
        self.fold_of_image.get(image_id).copied()
    }

    pub fn len(&self) -> usize {
        self.fold_of_image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of_image.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.fold_of_image.iter().map(|(id, &f)| (id.as_str(), f))
    }

    /// Number of images in each fold.
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for (_, f) in self.iter() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment: subjects are visited in sorted label
/// order, each subject's images are shuffled with the seeded generator
/// and dealt round-robin, with the dealing origin rotating by subject so
/// fold sizes stay balanced across subjects.
pub fn kfold_split(index: &DatasetIndex, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::validation(format!(
            "fold count must be >= 2, got {k}"
        )));
    }
    if index.is_empty() {
        return Err(Error::validation("cannot fold an empty index"));
    }
    let mut by_subject: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for entry in index.entries() {
        by_subject
            .entry(entry.label.as_str())
            .or_default()
            .push(entry.image_id.as_str());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of_image = BTreeMap::new();
    for (s_idx, (_, mut images)) in by_subject.into_iter().enumerate() {
        images.sort_unstable();
        shuffle(&mut images, &mut rng);
        let start = s_idx % k;
        for (m, id) in images.into_iter().enumerate() {
            fold_of_image.insert(id.to_string(), (start + m) % k);
        }
    }
    FoldAssignment::new(k, fold_of_image)
}

/// Fisher-Yates with the caller's generator, used instead of the rand
/// helpers so the byte-for-byte shuffle order is pinned by this crate.
fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// A metric reported as mean and standard deviation over per-fold or
/// per-bootstrap values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub values: Vec<f64>,
}

impl MetricSummary {
    /// Mean and sample standard deviation (n - 1 denominator; zero for a
    /// single value) of `values`.
    pub fn from_values(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("metric summary needs at least one value"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Ok(MetricSummary {
            name: name.into(),
            mean,
            std,
            values,
        })
    }
}

/// Defaults echoing the protocol style for test-set statistics.
pub const BOOTSTRAP_SETS: usize = 100;
pub const BOOTSTRAP_FRACTION: f64 = 0.6;

/// Draws `n_sets` subsamples of `ceil(fraction * N)` values without
/// replacement (seeded, deterministic), applies `metric` to each, and
/// summarizes the per-set results. Each subsample is presented to the
/// metric in source order, so a full-fraction subsample is the input
/// itself and any sane metric then has zero spread.
pub fn bootstrap_stats<F>(
    name: &str,
    values: &[f64],
    n_sets: usize,
    fraction: f64,
    seed: u64,
    metric: F,
) -> Result<MetricSummary>
where
    F: Fn(&[f64]) -> f64,
{
    if values.is_empty() {
        return Err(Error::validation("bootstrap source must be non-empty"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::validation(format!(
            "bootstrap fraction must lie in (0, 1], got {fraction}"
        )));
    }
    if n_sets == 0 {
        return Err(Error::validation("bootstrap needs at least one set"));
    }
    let size = ((fraction * values.len() as f64).ceil() as usize).clamp(1, values.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..values.len()).collect();
    let mut per_set = Vec::with_capacity(n_sets);
    let mut subset = Vec::with_capacity(size);
    for _ in 0..n_sets {
        partial_shuffle(&mut indices, size, &mut rng);
        indices[..size].sort_unstable();
        subset.clear();
        subset.extend(indices[..size].iter().map(|&i| values[i]));
        per_set.push(metric(&subset));
    }
    MetricSummary::from_values(name, per_set)
}

/// Verification-rate style bootstrap over paired score pools: each set
/// subsamples both pools at `fraction` and recomputes the EER.
pub fn bootstrap_eer(
    genuine: &[f64],
    impostor: &[f64],
    n_sets: usize,
    fraction: f64,
    seed: u64,
) -> Result<MetricSummary> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(Error::validation("bootstrap source must be non-empty"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::validation(format!(
            "bootstrap fraction must lie in (0, 1], got {fraction}"
        )));
    }
    if n_sets == 0 {
        return Err(Error::validation("bootstrap needs at least one set"));
    }
    let g_size = ((fraction * genuine.len() as f64).ceil() as usize).clamp(1, genuine.len());
    let i_size = ((fraction * impostor.len() as f64).ceil() as usize).clamp(1, impostor.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g_idx: Vec<usize> = (0..genuine.len()).collect();
    let mut i_idx: Vec<usize> = (0..impostor.len()).collect();
    let mut per_set = Vec::with_capacity(n_sets);
    for _ in 0..n_sets {
        partial_shuffle(&mut g_idx, g_size, &mut rng);
        partial_shuffle(&mut i_idx, i_size, &mut rng);
        let g: Vec<f64> = g_idx[..g_size].iter().map(|&i| genuine[i]).collect();
        let i: Vec<f64> = i_idx[..i_size].iter().map(|&i| impostor[i]).collect();
        per_set.push(eer(&roc(&g, &i)?));
    }
    MetricSummary::from_values("eer", per_set)
}

/// Moves a uniform random `size`-subset into `indices[..size]`.
fn partial_shuffle(indices: &mut [usize], size: usize, rng: &mut ChaCha8Rng) {
    for i in 0..size.min(indices.len().saturating_sub(1)) {
        let j = rng.random_range(i..indices.len());
        indices.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::{Descriptor, FeatureVector};
    use crate::matching::{score_matrix, Measure};

    /// Chi-square distance between one-hot vectors is 0 when equal and 2
    /// when different, which is enough to steer ranks in these tests.
    fn one_hot(dim: usize, at: usize) -> FeatureVector {
        let mut v = vec![0.0; dim];
        v[at] = 1.0;
        FeatureVector::new(Descriptor::Lbp, v)
    }

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn cmc_on_a_hand_ranked_toy_matrix() {
        // Probe A matches its identity first; probe B's identity comes
        // second. Distances via 2-d vectors under cosine:
        // probe a = (1,0); gallery a = (1,0) -> 0, gallery b = (1,1) -> 1-1/sqrt(2).
        // probe b = (0.9,0.45)... simpler: craft with one_hots:
        // probe A: dist(A)=0 < dist(B)=2 -> rank 1.
        // probe B: use vector equal to gallery A's axis -> dist(A)=0 < dist(B) -> rank 2.
        let probes = vec![one_hot(2, 0), one_hot(2, 0)];
        let gallery = vec![one_hot(2, 0), one_hot(2, 1)];
        let m = score_matrix(
            &probes,
            &labels(&["a", "b"]),
            &gallery,
            &labels(&["a", "b"]),
            Measure::ChiSquare,
        )
        .unwrap();
        let curve = cmc(&m).unwrap();
        assert_eq!(curve.points(), &[0.5, 1.0]);
        assert_eq!(rank1(&curve), 0.5);
    }

    #[test]
    fn cmc_perfect_diagonal_is_all_ones() {
        let probes = vec![one_hot(3, 0), one_hot(3, 1), one_hot(3, 2)];
        let m = score_matrix(
            &probes,
            &labels(&["x", "y", "z"]),
            &probes.clone(),
            &labels(&["x", "y", "z"]),
            Measure::ChiSquare,
        )
        .unwrap();
        let curve = cmc(&m).unwrap();
        assert_eq!(curve.points(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn cmc_uses_best_score_per_identity() {
        // Gallery has two images of identity a; the better one must
        // represent it. Probe a: dist to a#1 = 2, a#2 = 0, b = 2.
        let probes = vec![one_hot(3, 0)];
        let gallery = vec![one_hot(3, 1), one_hot(3, 0), one_hot(3, 2)];
        let m = score_matrix(
            &probes,
            &labels(&["a"]),
            &gallery,
            &labels(&["a", "a", "b"]),
            Measure::ChiSquare,
        )
        .unwrap();
        let curve = cmc(&m).unwrap();
        assert_eq!(curve.points(), &[1.0, 1.0]);
    }

    #[test]
    fn cmc_breaks_ties_by_gallery_order() {
        // Probe equidistant (distance 2) from identities a and b: the
        // earlier gallery identity wins the tie.
        let probes = vec![one_hot(3, 0)];
        let gallery = vec![one_hot(3, 1), one_hot(3, 2)];
        let m = score_matrix(
            &probes,
            &labels(&["b"]),
            &gallery,
            &labels(&["a", "b"]),
            Measure::ChiSquare,
        )
        .unwrap();
        // true identity b ties with a but a comes first -> rank 2.
        let curve = cmc(&m).unwrap();
        assert_eq!(curve.points(), &[0.0, 1.0]);
    }

    #[test]
    fn cmc_rejects_probe_without_gallery_identity() {
        let probes = vec![one_hot(2, 0)];
        let gallery = vec![one_hot(2, 0)];
        let m = score_matrix(
            &probes,
            &labels(&["ghost"]),
            &gallery,
            &labels(&["a"]),
            Measure::ChiSquare,
        )
        .unwrap();
        assert!(matches!(cmc(&m), Err(Error::Protocol(_))));
    }

    #[test]
    fn pool_scores_splits_by_label() {
        let probes = vec![one_hot(2, 0), one_hot(2, 1)];
        let m = score_matrix(
            &probes,
            &labels(&["a", "b"]),
            &probes.clone(),
            &labels(&["a", "b"]),
            Measure::ChiSquare,
        )
        .unwrap();
        let (g, i) = pool_scores(&m);
        assert_eq!(g.len() + i.len(), 4);
        assert_eq!(g, vec![0.0, 0.0]);
        assert_eq!(i, vec![2.0, 2.0]);
    }

    #[test]
    fn roc_sweeps_all_distinct_thresholds() {
        let curve = roc(&[0.1, 0.3], &[0.2, 0.4]).unwrap();
        // Sentinel + 4 distinct scores.
        assert_eq!(curve.points().len(), 5);
        let p = curve.points();
        assert_eq!((p[0].far, p[0].vr), (0.0, 0.0));
        assert_eq!((p[1].far, p[1].vr), (0.0, 0.5)); // t = 0.1
        assert_eq!((p[2].far, p[2].vr), (0.5, 0.5)); // t = 0.2
        assert_eq!((p[3].far, p[3].vr), (0.5, 1.0)); // t = 0.3
        assert_eq!((p[4].far, p[4].vr), (1.0, 1.0)); // t = 0.4
                                                     // FAR monotone, coordinates in range.
        for w in curve.points().windows(2) {
            assert!(w[1].far >= w[0].far);
        }
        assert!(curve
            .points()
            .iter()
            .all(|p| (0.0..=1.0).contains(&p.far) && (0.0..=1.0).contains(&p.vr)));
    }

    #[test]
    fn roc_perfect_separation_reaches_corner() {
        let curve = roc(&[0.1, 0.2], &[0.5, 0.9]).unwrap();
        assert!(curve.points().iter().any(|p| p.far == 0.0 && p.vr == 1.0));
        assert_eq!(eer(&curve), 0.0);
    }

    #[test]
    fn roc_identical_distributions_lie_on_the_diagonal() {
        let scores = [0.2, 0.4, 0.6];
        let curve = roc(&scores, &scores).unwrap();
        for p in curve.points() {
            assert_eq!(p.far, p.vr);
        }
        assert!((eer(&curve) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn roc_rejects_empty_and_nan() {
        assert!(roc(&[], &[0.1]).is_err());
        assert!(roc(&[0.1], &[]).is_err());
        assert!(roc(&[f64::NAN], &[0.1]).is_err());
    }

    #[test]
    fn eer_crosses_exactly_on_a_swept_point() {
        // genuine {0.1, 0.3}, impostor {0.2, 0.4}: at t=0.2 FAR=FRR=0.5.
        let curve = roc(&[0.1, 0.3], &[0.2, 0.4]).unwrap();
        assert_eq!(eer(&curve), 0.5);
    }

    #[test]
    fn eer_interpolates_between_swept_points() {
        // 3 genuine, 3 impostor, no exact crossing:
        // t=0.25: FAR=1/3, FRR=2/3; t=0.3: FAR=2/3, FRR=1/3.
        // Interpolation meets at 0.5.
        let curve = roc(&[0.1, 0.3, 0.5], &[0.25, 0.3, 0.6]).unwrap();
        let e = eer(&curve);
        // d jumps from -1/3 (t=0.25) to +1/3 (t=0.3): lambda = 0.5,
        // far goes 1/3 -> 2/3, so EER = 0.5.
        assert!((e - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kfold_balances_100_subjects_by_6_images() {
        let index = DatasetIndex::synthetic("toy", 100, 6);
        let folds = kfold_split(&index, 5, 7).unwrap();
        assert_eq!(folds.fold_sizes(), vec![120; 5]);
        // Stratification: every subject present in every fold.
        let mut seen: BTreeMap<(String, usize), usize> = BTreeMap::new();
        for entry in index.entries() {
            let f = folds.fold_of(&entry.image_id).unwrap();
            *seen.entry((entry.label.clone(), f)).or_default() += 1;
        }
        for s in 0..100 {
            for f in 0..5 {
                let label = format!("{s:03}");
                assert!(seen.contains_key(&(label, f)));
            }
        }
    }

    #[test]
    fn kfold_is_deterministic_and_seed_sensitive() {
        let index = DatasetIndex::synthetic("toy", 10, 10);
        let a = kfold_split(&index, 5, 3).unwrap();
        let b = kfold_split(&index, 5, 3).unwrap();
        let c = kfold_split(&index, 5, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn kfold_partitions_disjoint_and_covering() {
        let index = DatasetIndex::synthetic("toy", 7, 9);
        let folds = kfold_split(&index, 5, 11).unwrap();
        assert_eq!(folds.len(), 63);
        for entry in index.entries() {
            assert!(folds.fold_of(&entry.image_id).is_some());
        }
    }

    #[test]
    fn kfold_rejects_bad_k_and_empty_index() {
        let index = DatasetIndex::synthetic("toy", 3, 4);
        assert!(kfold_split(&index, 1, 0).is_err());
        let empty = DatasetIndex::synthetic("none", 0, 0);
        assert!(kfold_split(&empty, 5, 0).is_err());
    }

    #[test]
    fn metric_summary_recomputes() {
        let s = MetricSummary::from_values("r1", vec![0.4, 0.6, 0.5]).unwrap();
        assert!((s.mean - 0.5).abs() < 1e-12);
        let n = s.values.len() as f64;
        let mean = s.values.iter().sum::<f64>() / n;
        let var = s.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((s.std - var.sqrt()).abs() < 1e-12);
        assert_eq!(
            MetricSummary::from_values("one", vec![0.7]).unwrap().std,
            0.0
        );
        assert!(MetricSummary::from_values("none", vec![]).is_err());
    }

    #[test]
    fn bootstrap_full_fraction_has_zero_std_for_mean_metric() {
        let values = vec![0.1, 0.2, 0.3, 0.4];
        let s = bootstrap_stats("m", &values, 20, 1.0, 5, |v| {
            v.iter().sum::<f64>() / v.len() as f64
        })
        .unwrap();
        assert!((s.mean - 0.25).abs() < 1e-12);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.values.len(), 20);
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let values: Vec<f64> = (0..50).map(|i| i as f64 * 0.02).collect();
        let a = bootstrap_stats("m", &values, 100, 0.6, 9, |v| v[0]).unwrap();
        let b = bootstrap_stats("m", &values, 100, 0.6, 9, |v| v[0]).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_stats("m", &values, 100, 0.6, 10, |v| v[0]).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn bootstrap_validates_inputs() {
        assert!(bootstrap_stats("m", &[], 10, 0.5, 0, |_| 0.0).is_err());
        assert!(bootstrap_stats("m", &[1.0], 10, 0.0, 0, |_| 0.0).is_err());
        assert!(bootstrap_stats("m", &[1.0], 10, 1.5, 0, |_| 0.0).is_err());
        assert!(bootstrap_stats("m", &[1.0], 0, 0.5, 0, |_| 0.0).is_err());
    }

    #[test]
    fn bootstrap_eer_runs_on_pools() {
        let genuine: Vec<f64> = (0..40).map(|i| 0.1 + i as f64 * 0.005).collect();
        let impostor: Vec<f64> = (0..60).map(|i| 0.2 + i as f64 * 0.01).collect();
        let s = bootstrap_eer(&genuine, &impostor, 50, 0.6, 13).unwrap();
        assert_eq!(s.values.len(), 50);
        assert!(s.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
