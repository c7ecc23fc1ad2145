//! Orchestration behind the CLI subcommands: extraction to CSV caches,
//! the cross-validation evaluation protocol with curve and report
//! emission, split-list generation, and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::dataset::{
    apply_split, export_features, generate_split, import_features, parse_split_list,
    scan_directory, write_split_list, DatasetIndex, FeatureCache, FeatureRow, SplitList,
    DEV_FRACTION,
};
use crate::descriptors::{Descriptor, Extractor};
use crate::error::{Error, Result};
use crate::eval::{cmc, eer, kfold_split, pool_scores, rank1, roc, FoldAssignment, MetricSummary};
use crate::imgproc::{load_grayscale, Preprocessor};
use crate::matching::score_matrix;

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";

/// What `extract` produced, for CLI summaries.
#[derive(Debug)]
pub struct ExtractOutcome {
    pub n_images: usize,
    pub cache_files: BTreeMap<Descriptor, PathBuf>,
    pub warnings: Vec<String>,
}

/// Per-descriptor evaluation results plus emitted artifact paths
/// (relative to the output directory).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DescriptorReport {
    pub descriptor: String,
    pub measure: String,
    pub rank1: MetricSummary,
    pub eer: MetricSummary,
    pub cmc_files: Vec<String>,
    pub roc_files: Vec<String>,
}

/// Machine-readable evaluation summary, mirrored to report.json. The
/// descriptor list is ranked by mean rank-1 rate descending, ties by
/// name.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub dataset: String,
    pub n_images: usize,
    pub n_subjects: usize,
    pub n_dev: usize,
    pub n_test: usize,
    pub k: usize,
    pub identification_trials: usize,
    pub genuine_trials: usize,
    pub impostor_trials: usize,
    pub descriptors: Vec<DescriptorReport>,
    pub config: serde_json::Value,
    pub warnings: Vec<String>,
}

fn features_path(out: &Path, descriptor: Descriptor) -> PathBuf {
    out.join("features").join(format!("{descriptor}.csv"))
}

/// Runs preprocessing and all configured descriptors over every image,
/// in parallel, with deterministic row order. Any per-image failure
/// aborts the whole extraction, naming the failing images.
fn extract_caches(
    config: &ExperimentConfig,
    index: &DatasetIndex,
) -> Result<BTreeMap<Descriptor, FeatureCache>> {
    let pre = Preprocessor::with_normalization(
        config.target_width,
        config.target_height,
        &config.normalize,
    )?;
    let extractor = Extractor::new(
        config.target_width,
        config.target_height,
        &config.bsif_source(),
    )?;
    let per_image: Vec<Result<Vec<Vec<f64>>>> = index
        .entries()
        .par_iter()
        .map(|entry| {
            let img = load_grayscale(&entry.path)?;
            let img = pre.apply(&img)?;
            config
                .descriptors
                .iter()
                .map(|&d| Ok(extractor.extract(&img, d)?.into_values()))
                .collect()
        })
        .collect();
    let mut failures = Vec::new();
    let mut rows: BTreeMap<Descriptor, Vec<FeatureRow>> = BTreeMap::new();
    for (entry, result) in index.entries().iter().zip(per_image) {
        match result {
            Err(e) => failures.push(format!("{}: {e}", entry.image_id)),
            Ok(vectors) => {
                for (&d, values) in config.descriptors.iter().zip(vectors) {
                    rows.entry(d).or_default().push(FeatureRow {
                        image_id: entry.image_id.clone(),
                        label: entry.label.clone(),
                        values,
                    });
                }
            }
        }
    }
    if !failures.is_empty() {
        let shown = failures
            .iter()
            .take(10)
            .cloned()
            .collect::<Vec<_>>()
            .join("\n  ");
        let more = failures.len().saturating_sub(10);
        let tail = if more > 0 {
            format!("\n  ... and {more} more")
        } else {
            String::new()
        };
        return Err(Error::validation(format!(
            "feature extraction failed for {} of {} images:\n  {shown}{tail}",
            failures.len(),
            index.len()
        )));
    }
    rows.into_iter()
        .map(|(d, rows)| {
            let dim = rows.first().map(|r| r.values.len()).unwrap_or(0);
            Ok((d, FeatureCache::new(d, dim, rows)?))
        })
        .collect()
}

/// Scans the dataset, extracts every configured descriptor, and writes
/// one CSV cache per descriptor under `<out>/features/`.
pub fn cmd_extract(config: &ExperimentConfig) -> Result<ExtractOutcome> {
    let index = scan_directory(config.dataset()?)?;
    let caches = extract_caches(config, &index)?;
    let mut cache_files = BTreeMap::new();
    for (d, cache) in &caches {
        let path = features_path(&config.out, *d);
        export_features(cache, &path)?;
        cache_files.insert(*d, path);
    }
    Ok(ExtractOutcome {
        n_images: index.len(),
        cache_files,
        warnings: index.warnings().to_vec(),
    })
}

/// Loads cached features for the configured descriptors, extracting and
/// persisting them first when any cache file is missing.
fn load_or_extract_caches(
    config: &ExperimentConfig,
    index: &DatasetIndex,
) -> Result<BTreeMap<Descriptor, FeatureCache>> {
    let all_present = config
        .descriptors
        .iter()
        .all(|&d| features_path(&config.out, d).exists());
    if !all_present {
        let caches = extract_caches(config, index)?;
        for (d, cache) in &caches {
            export_features(cache, &features_path(&config.out, *d))?;
        }
        return Ok(caches);
    }
    let mut caches = BTreeMap::new();
    for &d in &config.descriptors {
        let cache = import_features(&features_path(&config.out, d), d)?;
        caches.insert(d, cache);
    }
    Ok(caches)
}

/// The dev/test split to evaluate under: the configured list file, or a
/// generated seeded 60/40 stratified split.
fn resolve_split(config: &ExperimentConfig, index: &DatasetIndex) -> Result<SplitList> {
    match &config.splits {
        Some(path) => parse_split_list(path),
        None => generate_split(index, DEV_FRACTION, config.seed),
    }
}

/// Fold assignment for the dev images: folds carried by the split list
/// win; otherwise a seeded stratified k-fold is generated.
fn resolve_folds(
    config: &ExperimentConfig,
    list: &SplitList,
    dev: &DatasetIndex,
) -> Result<FoldAssignment> {
    match list.fold_assignment()? {
        Some(folds) => Ok(folds),
        None => kfold_split(dev, config.k, config.seed),
    }
}

struct FoldSets {
    /// Per fold: indices into `dev.entries()` for probes and gallery.
    probe: Vec<Vec<usize>>,
    gallery: Vec<Vec<usize>>,
}

fn build_fold_sets(dev: &DatasetIndex, folds: &FoldAssignment) -> Result<FoldSets> {
    let k = folds.k();
    let mut probe = vec![Vec::new(); k];
    let mut gallery = vec![Vec::new(); k];
    for (i, entry) in dev.entries().iter().enumerate() {
        let Some(f) = folds.fold_of(&entry.image_id) else {
            return Err(Error::protocol(format!(
                "dev image {:?} has no fold assignment",
                entry.image_id
            )));
        };
        for g in 0..k {
            if g == f {
                probe[g].push(i);
            } else {
                gallery[g].push(i);
            }
        }
    }
    for (f, p) in probe.iter().enumerate() {
        if p.is_empty() {
            return Err(Error::protocol(format!("fold {f} has no probe images")));
        }
        if gallery[f].is_empty() {
            return Err(Error::protocol(format!("fold {f} has an empty gallery")));
        }
    }
    Ok(FoldSets { probe, gallery })
}

fn write_curve(path: &Path, points: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut text = String::from("x,y\n");
    for (x, y) in points {
        writeln!(text, "{x},{y}").expect("string write cannot fail");
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a two-column curve CSV written by the evaluator.
pub fn read_curve(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some("x,y") {
        return Err(Error::format(
            path.display(),
            "curve files start with an x,y header",
        ));
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let Some((x, y)) = line.split_once(',') else {
            return Err(Error::format(
                path.display(),
                format!("line {}: expected x,y", i + 2),
            ));
        };
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                Error::format(path.display(), format!("line {}: non-numeric {s:?}", i + 2))
            })
        };
        points.push((parse(x)?, parse(y)?));
    }
    Ok(points)
}

/// Runs the full fold protocol (per fold: probe = fold images, gallery
/// = remaining dev images) for every configured descriptor, emits
/// per-fold CMC/ROC point files plus report.txt / report.json, and
/// returns the report.
pub fn cmd_evaluate(config: &ExperimentConfig) -> Result<Report> {
    let index = scan_directory(config.dataset()?)?;
    let caches = load_or_extract_caches(config, &index)?;
    let list = resolve_split(config, &index)?;
    let (dev, test) = apply_split(&index, &list)?;
    let folds = resolve_folds(config, &list, &dev)?;
    let sets = build_fold_sets(&dev, &folds)?;
    let k = folds.k();

    let mut genuine_trials = 0usize;
    let mut impostor_trials = 0usize;
    for f in 0..k {
        for &p in &sets.probe[f] {
            let p_label = &dev.entries()[p].label;
            let same = sets.gallery[f]
                .iter()
                .filter(|&&g| &dev.entries()[g].label == p_label)
                .count();
            genuine_trials += same;
            impostor_trials += sets.gallery[f].len() - same;
        }
    }

    let mut descriptor_reports = Vec::new();
    for &d in &config.descriptors {
        let cache = &caches[&d];
        let vectors: Vec<crate::descriptors::FeatureVector> = dev
            .entries()
            .iter()
            .map(|e| {
                let row = cache.get(&e.image_id).ok_or_else(|| {
                    Error::validation(format!(
                        "feature cache for {d} is missing image {:?}; rerun extract",
                        e.image_id
                    ))
                })?;
                Ok(crate::descriptors::FeatureVector::new(
                    d,
                    row.values.clone(),
                ))
            })
            .collect::<Result<_>>()?;
        let labels: Vec<String> = dev.entries().iter().map(|e| e.label.clone()).collect();
        let measure = config.measure_for(d);

        let mut r1_values = Vec::with_capacity(k);
        let mut eer_values = Vec::with_capacity(k);
        let mut cmc_files = Vec::with_capacity(k);
        let mut roc_files = Vec::with_capacity(k);
        for f in 0..k {
            let pick = |ids: &[usize]| -> (Vec<crate::descriptors::FeatureVector>, Vec<String>) {
                (
                    ids.iter().map(|&i| vectors[i].clone()).collect(),
                    ids.iter().map(|&i| labels[i].clone()).collect(),
                )
            };
            let (probes, probe_labels) = pick(&sets.probe[f]);
            let (gallery, gallery_labels) = pick(&sets.gallery[f]);
            let matrix = score_matrix(&probes, &probe_labels, &gallery, &gallery_labels, measure)?;
            let curve = cmc(&matrix)
                .map_err(|e| Error::protocol(format!("fold {f}, descriptor {d}: {e}")))?;
            r1_values.push(rank1(&curve));
            let (genuine, impostor) = pool_scores(&matrix);
            let roc_curve = roc(&genuine, &impostor)
                .map_err(|e| Error::protocol(format!("fold {f}, descriptor {d}: {e}")))?;
            eer_values.push(eer(&roc_curve));

            let cmc_rel = format!("curves/{d}_cmc_fold{f}.csv");
            write_curve(
                &config.out.join(&cmc_rel),
                curve
                    .points()
                    .iter()
                    .enumerate()
                    .map(|(r, &v)| ((r + 1) as f64, v)),
            )?;
            cmc_files.push(cmc_rel);
            let roc_rel = format!("curves/{d}_roc_fold{f}.csv");
            write_curve(
                &config.out.join(&roc_rel),
                roc_curve.points().iter().map(|p| (p.far, p.vr)),
            )?;
            roc_files.push(roc_rel);
        }
        descriptor_reports.push(DescriptorReport {
            descriptor: d.to_string(),
            measure: measure.name().to_string(),
            rank1: MetricSummary::from_values("rank1", r1_values)?,
            eer: MetricSummary::from_values("eer", eer_values)?,
            cmc_files,
            roc_files,
        });
    }
    descriptor_reports.sort_by(|a, b| {
        b.rank1
            .mean
            .partial_cmp(&a.rank1.mean)
            .expect("fold means are finite")
            .then_with(|| a.descriptor.cmp(&b.descriptor))
    });

    let report = Report {
        dataset: index.name().to_string(),
        n_images: index.len(),
        n_subjects: index.n_subjects(),
        n_dev: dev.len(),
        n_test: test.len(),
        k,
        identification_trials: sets.probe.iter().map(Vec::len).sum(),
        genuine_trials,
        impostor_trials,
        descriptors: descriptor_reports,
        config: serde_json::to_value(config)
            .map_err(|e| Error::config(format!("config echo: {e}")))?,
        warnings: index.warnings().to_vec(),
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::config(format!("report serialization: {e}")))?;
    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let json_path = config.out.join(REPORT_JSON);
    fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;
    let txt_path = config.out.join(REPORT_TXT);
    fs::write(&txt_path, render_report(&report)).map_err(|e| Error::io(&txt_path, e))?;
    Ok(report)
}

/// Generates a seeded 60/40 split with a stratified k-fold over the dev
/// half and writes it to the configured splits path (default
/// `<out>/split.csv`). Returns the written path.
pub fn cmd_split(config: &ExperimentConfig) -> Result<PathBuf> {
    let index = scan_directory(config.dataset()?)?;
    let list = generate_split(&index, DEV_FRACTION, config.seed)?;
    let (dev, _) = apply_split(&index, &list)?;
    let folds = kfold_split(&dev, config.k, config.seed)?;
    let list = list.with_folds(&folds)?;
    let path = config
        .splits
        .clone()
        .unwrap_or_else(|| config.out.join("split.csv"));
    write_split_list(&list, &path)?;
    Ok(path)
}

/// Renders the text table: dataset line, trial counts, one row per
/// descriptor (already ranked), file inventory.
pub fn render_report(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "dataset {}: {} images, {} subjects (dev {}, test {}), k = {}",
        report.dataset, report.n_images, report.n_subjects, report.n_dev, report.n_test, report.k
    );
    let _ = writeln!(
        s,
        "identification trials: {}; genuine trials: {}; impostor trials: {}",
        report.identification_trials, report.genuine_trials, report.impostor_trials
    );
    if !report.warnings.is_empty() {
        let _ = writeln!(s, "warnings: {}", report.warnings.len());
        for w in &report.warnings {
            let _ = writeln!(s, "  {w}");
        }
    }
    s.push('\n');
    let _ = writeln!(
        s,
        "{:<12} {:<10} {:>16} {:>16}",
        "descriptor", "measure", "rank1", "eer"
    );
    for d in &report.descriptors {
        let _ = writeln!(
            s,
            "{:<12} {:<10} {:>16} {:>16}",
            d.descriptor,
            d.measure,
            format!("{:.3} +- {:.3}", d.rank1.mean, d.rank1.std),
            format!("{:.3} +- {:.3}", d.eer.mean, d.eer.std),
        );
    }
    s.push('\n');
    let _ = writeln!(s, "files:");
    for d in &report.descriptors {
        for f in d.cmc_files.iter().chain(&d.roc_files) {
            let _ = writeln!(s, "  {f}");
        }
    }
    s
}

/// Loads report.json from a completed evaluation and renders the table.
pub fn cmd_report(out_dir: &Path) -> Result<String> {
    let path = out_dir.join(REPORT_JSON);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let report: Report = serde_json::from_str(&text)
        .map_err(|e| Error::format(path.display(), format!("not a report: {e}")))?;
    Ok(render_report(&report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{load_config, Overrides};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Writes n_subjects x images_per_subject PNGs where every image of
    /// a subject is the same seeded random texture, so within-class
    /// distances are exactly zero.
    fn write_perfect_dataset(root: &Path, n_subjects: usize, images_per_subject: usize, side: u32) {
        for s in 0..n_subjects {
            let dir = root.join(format!("{s:03}"));
            fs::create_dir_all(&dir).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(s as u64);
            let pixels: Vec<u8> = (0..side * side).map(|_| rng.random()).collect();
            let img = image::ImageBuffer::<image::Luma<u8>, Vec<u8>>::from_raw(side, side, pixels)
                .unwrap();
            for i in 0..images_per_subject {
                img.save(dir.join(format!("{i:02}.png"))).unwrap();
            }
        }
    }

    fn test_config(dataset: &Path, out: &Path) -> ExperimentConfig {
        load_config(
            None,
            Overrides {
                dataset: Some(dataset.to_path_buf()),
                out: Some(out.to_path_buf()),
                descriptors: Some(vec![Descriptor::Lbp, Descriptor::Hog]),
                k: Some(3),
                seed: Some(11),
                ..Overrides::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn extract_writes_deterministic_caches() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        write_perfect_dataset(&data, 3, 2, 100);
        let config = test_config(&data, &dir.path().join("out"));
        let outcome = cmd_extract(&config).unwrap();
        assert_eq!(outcome.n_images, 6);
        assert_eq!(outcome.cache_files.len(), 2);
        let lbp_path = &outcome.cache_files[&Descriptor::Lbp];
        let first = fs::read(lbp_path).unwrap();
        let cache = import_features(lbp_path, Descriptor::Lbp).unwrap();
        assert_eq!(cache.len(), 6);
        assert_eq!(cache.dim(), 8496);
        cmd_extract(&config).unwrap();
        assert_eq!(fs::read(lbp_path).unwrap(), first);
    }

    #[test]
    fn extract_aborts_listing_undecodable_images() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        write_perfect_dataset(&data, 2, 2, 100);
        fs::write(data.join("000/broken.png"), b"not a png").unwrap();
        let config = test_config(&data, &dir.path().join("out"));
        let err = cmd_extract(&config).unwrap_err().to_string();
        assert!(err.contains("broken.png"), "{err}");
        assert!(err.contains("1 of 5"), "{err}");
    }

    #[test]
    fn evaluate_perfect_dataset_is_perfect() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        // 4 subjects x 5 images; dev = 3 per subject, k = 3 -> every
        // fold holds one image of every subject.
        write_perfect_dataset(&data, 4, 5, 100);
        let out = dir.path().join("out");
        let config = test_config(&data, &out);
        let report = cmd_evaluate(&config).unwrap();

        assert_eq!(report.n_images, 20);
        assert_eq!(report.n_subjects, 4);
        assert_eq!(report.n_dev, 12);
        assert_eq!(report.n_test, 8);
        assert_eq!(report.k, 3);
        assert_eq!(report.identification_trials, 12);
        // Per fold: 4 probes x 8 gallery, 2 genuine per probe.
        assert_eq!(report.genuine_trials, 3 * 4 * 2);
        assert_eq!(report.impostor_trials, 3 * 4 * 6);
        assert_eq!(report.descriptors.len(), 2);
        for d in &report.descriptors {
            assert_eq!(d.rank1.mean, 1.0);
            assert_eq!(d.rank1.std, 0.0);
            assert_eq!(d.eer.mean, 0.0);
            assert_eq!(d.rank1.values.len(), 3);
            for f in d.cmc_files.iter().chain(&d.roc_files) {
                let points = read_curve(&out.join(f)).unwrap();
                assert!(!points.is_empty());
                assert!(points
                    .iter()
                    .all(|&(x, y)| x.is_finite() && (0.0..=1.0).contains(&y)));
            }
        }
        assert!(out.join(REPORT_JSON).exists());
        assert!(out.join(REPORT_TXT).exists());

        // Byte-identical rerun, reusing the caches written above.
        let json = fs::read(out.join(REPORT_JSON)).unwrap();
        cmd_evaluate(&config).unwrap();
        assert_eq!(fs::read(out.join(REPORT_JSON)).unwrap(), json);
    }

    #[test]
    fn evaluate_honors_a_written_split_list() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        write_perfect_dataset(&data, 4, 5, 100);
        let out = dir.path().join("out");
        let mut config = test_config(&data, &out);
        config.splits = Some(dir.path().join("lists/protocol.csv"));
        let written = cmd_split(&config).unwrap();
        assert_eq!(written, dir.path().join("lists/protocol.csv"));
        let report = cmd_evaluate(&config).unwrap();
        assert_eq!(report.n_dev, 12);
        assert_eq!(report.k, 3);
        for d in &report.descriptors {
            assert_eq!(d.rank1.mean, 1.0);
        }
    }

    #[test]
    fn report_renders_ranked_table() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        write_perfect_dataset(&data, 4, 5, 100);
        let out = dir.path().join("out");
        let config = test_config(&data, &out);
        cmd_evaluate(&config).unwrap();
        let text = cmd_report(&out).unwrap();
        assert!(text.contains("lbp"), "{text}");
        assert!(text.contains("hog"), "{text}");
        assert!(text.contains("identification trials: 12"), "{text}");
        assert_eq!(text, fs::read_to_string(out.join(REPORT_TXT)).unwrap());
        assert!(cmd_report(&dir.path().join("nowhere")).is_err());
    }

    #[test]
    fn report_ranks_by_rank1_then_name() {
        fn summary(mean: f64) -> MetricSummary {
            MetricSummary::from_values("m", vec![mean]).unwrap()
        }
        fn entry(name: &str, r1: f64) -> DescriptorReport {
            DescriptorReport {
                descriptor: name.to_string(),
                measure: "chi2".to_string(),
                rank1: summary(r1),
                eer: summary(0.1),
                cmc_files: vec![],
                roc_files: vec![],
            }
        }
        let mut rows = [entry("b", 0.5), entry("a", 0.5), entry("c", 0.9)];
        rows.sort_by(|a, b| {
            b.rank1
                .mean
                .partial_cmp(&a.rank1.mean)
                .unwrap()
                .then_with(|| a.descriptor.cmp(&b.descriptor))
        });
        let names: Vec<&str> = rows.iter().map(|r| r.descriptor.as_str()).collect();
        assert_eq!(names, vec!["c", "a", "b"]);
    }
}
