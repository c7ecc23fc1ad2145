//! Dataset plumbing: directory scanning into a labelled image index,
//! annotation parsing, dev/test split lists with fold columns, and the
//! CSV feature cache.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::descriptors::Descriptor;
use crate::error::{Error, Result};
use crate::eval::FoldAssignment;

pub const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp"];

/// One discovered image: id is the root-relative path with `/`
/// separators, label is the top-level class directory name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub image_id: String,
    pub path: PathBuf,
    pub label: String,
}

/// Immutable inventory of labelled images, sorted by image id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetIndex {
    name: String,
    entries: Vec<IndexEntry>,
    warnings: Vec<String>,
}

impl DatasetIndex {
    /// Sorts entries by image id and checks id uniqueness. Emptiness is
    /// legal here (subset views can be empty); scans reject it.
    pub fn new(
        name: impl Into<String>,
        mut entries: Vec<IndexEntry>,
        warnings: Vec<String>,
    ) -> Result<Self> {
        entries.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        for w in entries.windows(2) {
            if w[0].image_id == w[1].image_id {
                return Err(Error::validation(format!(
                    "duplicate image id {:?}",
                    w[0].image_id
                )));
            }
        }
        Ok(DatasetIndex {
            name: name.into(),
            entries,
            warnings,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn get(&self, image_id: &str) -> Option<&IndexEntry> {
        self.entries
            .binary_search_by(|e| e.image_id.as_str().cmp(image_id))
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Sorted distinct subject labels.
    pub fn subjects(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.entries.iter().map(|e| e.label.as_str()).collect();
        set.into_iter().collect()
    }

    pub fn n_subjects(&self) -> usize {
        self.subjects().len()
    }

    /// In-memory index for tests and synthetic experiments: subjects
    /// "000".., images "<subject>/img_<i>.png".
    pub fn synthetic(name: &str, n_subjects: usize, images_per_subject: usize) -> DatasetIndex {
        let mut entries = Vec::new();
        for s in 0..n_subjects {
            let label = format!("{s:03}");
            for i in 0..images_per_subject {
                let image_id = format!("{label}/img_{i:02}.png");
                entries.push(IndexEntry {
                    path: PathBuf::from(name).join(&image_id),
                    image_id,
                    label: label.clone(),
                });
            }
        }
        DatasetIndex::new(name, entries, Vec::new()).expect("synthetic ids are unique")
    }

    /// The sub-index of entries whose id is in `ids`, keeping paths and
    /// labels.
    fn subset(&self, name: impl Into<String>, ids: &BTreeSet<&str>) -> DatasetIndex {
        let entries = self
            .entries
            .iter()
            .filter(|e| ids.contains(e.image_id.as_str()))
            .cloned()
            .collect();
        DatasetIndex {
            name: name.into(),
            entries,
            warnings: Vec::new(),
        }
    }
}

/// Walks a directory-per-class tree: every immediate subdirectory of
/// `root` is one subject, images inside it (any nesting) are found by
/// extension (png/jpg/jpeg/bmp, case-insensitive). Unreadable entries
/// and stray root-level files become warnings, never aborts.
pub fn scan_directory(root: &Path) -> Result<DatasetIndex> {
    let name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    let mut dir_entries: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|r| match r {
            Ok(d) => Some(d.path()),
            Err(e) => {
                warnings.push(format!(
                    "unreadable directory entry under {}: {e}",
                    root.display()
                ));
                None
            }
        })
        .collect();
    dir_entries.sort();
    for path in dir_entries {
        if path.is_dir() {
            let Some(label) = path.file_name().and_then(|n| n.to_str()) else {
                warnings.push(format!(
                    "skipped non-UTF-8 directory name: {}",
                    path.display()
                ));
                continue;
            };
            let label = label.to_string();
            walk_class_dir(&path, root, &label, &mut entries, &mut warnings);
        } else {
            warnings.push(format!(
                "ignored file outside class folders: {}",
                path.display()
            ));
        }
    }
    if entries.is_empty() {
        return Err(Error::validation(format!(
            "no class folders with images under {}",
            root.display()
        )));
    }
    DatasetIndex::new(name, entries, warnings)
}

fn walk_class_dir(
    dir: &Path,
    root: &Path,
    label: &str,
    entries: &mut Vec<IndexEntry>,
    warnings: &mut Vec<String>,
) {
    let listing = match fs::read_dir(dir) {
        Ok(l) => l,
        Err(e) => {
            warnings.push(format!("unreadable directory {}: {e}", dir.display()));
            return;
        }
    };
    for item in listing {
        let path = match item {
            Ok(d) => d.path(),
            Err(e) => {
                warnings.push(format!(
                    "unreadable directory entry under {}: {e}",
                    dir.display()
                ));
                continue;
            }
        };
        if path.is_dir() {
            walk_class_dir(&path, root, label, entries, warnings);
            continue;
        }
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
            .unwrap_or(false);
        if !is_image {
            continue;
        }
        let relative = path.strip_prefix(root).expect("walk stays under root");
        let Some(image_id) = relative_id(relative) else {
            warnings.push(format!("skipped non-UTF-8 file name: {}", path.display()));
            continue;
        };
        entries.push(IndexEntry {
            image_id,
            path,
            label: label.to_string(),
        });
    }
}

/// Root-relative path as a portable id with `/` separators.
fn relative_id(relative: &Path) -> Option<String> {
    let mut parts = Vec::new();
    for c in relative.components() {
        parts.push(c.as_os_str().to_str()?);
    }
    Some(parts.join("/"))
}

macro_rules! labeled_enum {
    ($name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const LABELS: &'static [&'static str] = &[$($label),+];
            pub const VALUES: &'static [$name] = &[$($name::$variant),+];

            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($label => Ok($name::$variant),)+
                    other => Err(format!(
                        "unknown label {other:?}, expected one of {:?}",
                        Self::LABELS
                    )),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

labeled_enum!(Gender {
    Male => "Male",
    Female => "Female",
});

labeled_enum!(Ethnicity {
    White => "White",
    Asian => "Asian",
    SouthAsian => "South Asian",
    Black => "Black",
    MiddleEastern => "Middle Eastern",
    SouthAmerican => "South American",
    Other => "Other",
});

labeled_enum!(Accessory {
    None => "None",
    Earrings => "Earrings",
    Other => "Other",
});

labeled_enum!(Occlusion {
    None => "None",
    Mild => "Mild",
    Severe => "Severe",
});

labeled_enum!(HeadPitch {
    UpTwo => "Up ++",
    UpOne => "Up +",
    Neutral => "Neutral",
    DownOne => "Down +",
    DownTwo => "Down ++",
});

labeled_enum!(HeadRoll {
    RightTwo => "To Right ++",
    RightOne => "To Right +",
    Neutral => "Neutral",
    LeftOne => "To Left +",
    LeftTwo => "To Left ++",
});

labeled_enum!(HeadYaw {
    FrontalLeft => "Frontal Left",
    MiddleLeft => "Middle Left",
    ProfileLeft => "Profile Left",
    ProfileRight => "Profile Right",
    MiddleRight => "Middle Right",
    FrontalRight => "Frontal Right",
});

labeled_enum!(HeadSide {
    Left => "Left",
    Right => "Right",
});

/// Per-image metadata: closed label vocabularies plus the tragus
/// landmark in pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub gender: Gender,
    pub ethnicity: Ethnicity,
    pub accessory: Accessory,
    pub occlusion: Occlusion,
    pub pitch: HeadPitch,
    pub roll: HeadRoll,
    pub yaw: HeadYaw,
    pub side: HeadSide,
    pub tragus: (f64, f64),
}

impl Annotation {
    /// Landmark sanity against a concrete image size, which is unknown
    /// at parse time.
    pub fn tragus_in_bounds(&self, width: u32, height: u32) -> bool {
        let (x, y) = self.tragus;
        x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64
    }
}

pub const ANNOTATION_HEADER: &str =
    "image,gender,ethnicity,accessory,occlusion,pitch,roll,yaw,side,tragus_x,tragus_y";

/// Parses the annotation CSV; unknown labels are rejected with the line
/// number and field name, never coerced.
pub fn parse_annotations(path: &Path) -> Result<BTreeMap<String, Annotation>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == ANNOTATION_HEADER => {}
        Some((_, header)) => {
            return Err(Error::format(
                path.display(),
                format!("bad header {header:?}, expected {ANNOTATION_HEADER:?}"),
            ))
        }
        None => return Err(Error::format(path.display(), "empty annotation file")),
    }
    let mut map = BTreeMap::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::format(
                path.display(),
                format!("line {line_no}: expected 11 fields, got {}", fields.len()),
            ));
        }
        let image = fields[0];
        if image.is_empty() {
            return Err(Error::format(
                path.display(),
                format!("line {line_no}: missing image id"),
            ));
        }
        fn field<T: FromStr<Err = String>>(
            path: &Path,
            line_no: usize,
            name: &str,
            raw: &str,
        ) -> Result<T> {
            raw.parse().map_err(|e| {
                Error::format(path.display(), format!("line {line_no}, field {name}: {e}"))
            })
        }
        fn coord(path: &Path, line_no: usize, name: &str, raw: &str) -> Result<f64> {
            let v: f64 = raw.parse().map_err(|_| {
                Error::format(
                    path.display(),
                    format!("line {line_no}, field {name}: not a number: {raw:?}"),
                )
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::format(
                    path.display(),
                    format!("line {line_no}, field {name}: coordinate must be finite and >= 0, got {raw}"),
                ));
            }
            Ok(v)
        }
        let annotation = Annotation {
            gender: field(path, line_no, "gender", fields[1])?,
            ethnicity: field(path, line_no, "ethnicity", fields[2])?,
            accessory: field(path, line_no, "accessory", fields[3])?,
            occlusion: field(path, line_no, "occlusion", fields[4])?,
            pitch: field(path, line_no, "pitch", fields[5])?,
            roll: field(path, line_no, "roll", fields[6])?,
            yaw: field(path, line_no, "yaw", fields[7])?,
            side: field(path, line_no, "side", fields[8])?,
            tragus: (
                coord(path, line_no, "tragus_x", fields[9])?,
                coord(path, line_no, "tragus_y", fields[10])?,
            ),
        };
        if map.insert(image.to_string(), annotation).is_some() {
            return Err(Error::format(
                path.display(),
                format!("line {line_no}: duplicate image id {image:?}"),
            ));
        }
    }
    Ok(map)
}

/// One cached feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub image_id: String,
    pub label: String,
    pub values: Vec<f64>,
}

/// All features of one descriptor over a dataset, held dense with
/// uniform dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCache {
    descriptor: Descriptor,
    dim: usize,
    rows: Vec<FeatureRow>,
}

impl FeatureCache {
    pub fn new(descriptor: Descriptor, dim: usize, rows: Vec<FeatureRow>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for row in &rows {
            if row.values.len() != dim {
                return Err(Error::validation(format!(
                    "row {:?} has {} values, cache dim is {dim}",
                    row.image_id,
                    row.values.len()
                )));
            }
            if !seen.insert(row.image_id.as_str()) {
                return Err(Error::validation(format!(
                    "duplicate image id {:?} in feature cache",
                    row.image_id
                )));
            }
            for s in [row.image_id.as_str(), row.label.as_str()] {
                if s.contains(',') || s.contains('\n') || s.contains('\r') {
                    return Err(Error::validation(format!(
                        "id or label {s:?} contains CSV delimiter characters"
                    )));
                }
            }
        }
        Ok(FeatureCache {
            descriptor,
            dim,
            rows,
        })
    }

    pub fn descriptor(&self) -> Descriptor {
        self.descriptor
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, image_id: &str) -> Option<&FeatureRow> {
        self.rows.iter().find(|r| r.image_id == image_id)
    }
}

/// Writes `image,label,v0,...` CSV with LF endings; floats use the
/// shortest decimal that round-trips.
pub fn export_features(cache: &FeatureCache, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    out.write_all(b"image,label").map_err(io_err)?;
    for i in 0..cache.dim {
        write!(out, ",v{i}").map_err(io_err)?;
    }
    out.write_all(b"\n").map_err(io_err)?;
    for row in &cache.rows {
        write!(out, "{},{}", row.image_id, row.label).map_err(io_err)?;
        for v in &row.values {
            write!(out, ",{v}").map_err(io_err)?;
        }
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Reads a feature CSV written by [`export_features`]. The file format
/// does not carry the descriptor identity (several descriptors share a
/// dimensionality), so the caller names it.
pub fn import_features(path: &Path, descriptor: Descriptor) -> Result<FeatureCache> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::format(path.display(), "empty feature file"));
    };
    let mut cols = header.split(',');
    if cols.next() != Some("image") || cols.next() != Some("label") {
        return Err(Error::format(
            path.display(),
            "header must start with image,label",
        ));
    }
    let mut dim = 0usize;
    for col in cols {
        if col != format!("v{dim}") {
            return Err(Error::format(
                path.display(),
                format!("bad header column {col:?}, expected \"v{dim}\""),
            ));
        }
        dim += 1;
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let image_id = fields.next().unwrap_or("").to_string();
        let Some(label) = fields.next() else {
            return Err(Error::format(
                path.display(),
                format!("line {line_no}: missing label"),
            ));
        };
        if image_id.is_empty() {
            return Err(Error::format(
                path.display(),
                format!("line {line_no}: missing image id"),
            ));
        }
        let mut values = Vec::with_capacity(dim);
        for cell in fields {
            let v: f64 = cell.parse().map_err(|_| {
                Error::format(
                    path.display(),
                    format!("line {line_no}: non-numeric cell {cell:?}"),
                )
            })?;
            values.push(v);
        }
        if values.len() != dim {
            return Err(Error::format(
                path.display(),
                format!(
                    "line {line_no}: {} values, header declares {dim}",
                    values.len()
                ),
            ));
        }
        rows.push(FeatureRow {
            image_id,
            label: label.to_string(),
            values,
        });
    }
    FeatureCache::new(descriptor, dim, rows).map_err(|e| match e {
        Error::Validation(m) => Error::format(path.display(), m),
        other => other,
    })
}

/// Which half of the experimental protocol an image belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPart {
    Dev,
    Test,
}

impl SplitPart {
    fn label(self) -> &'static str {
        match self {
            SplitPart::Dev => "dev",
            SplitPart::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitRecord {
    pub image_id: String,
    pub subject: String,
    pub part: SplitPart,
    /// Cross-validation fold for dev images; test images carry none.
    pub fold: Option<usize>,
}

/// A dev/test partition with optional fold assignments, loadable from
/// and writable to the list file format
/// `relative/image/path,subject_id,split,fold`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitList {
    records: Vec<SplitRecord>,
}

impl SplitList {
    pub fn new(records: Vec<SplitRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.image_id.as_str()) {
                return Err(Error::validation(format!(
                    "image {:?} listed more than once (dev and test must not overlap)",
                    r.image_id
                )));
            }
            if r.part == SplitPart::Test && r.fold.is_some() {
                return Err(Error::validation(format!(
                    "test image {:?} must not carry a fold",
                    r.image_id
                )));
            }
        }
        Ok(SplitList { records })
    }

    pub fn records(&self) -> &[SplitRecord] {
        &self.records
    }

    pub fn part_ids(&self, part: SplitPart) -> BTreeSet<&str> {
        self.records
            .iter()
            .filter(|r| r.part == part)
            .map(|r| r.image_id.as_str())
            .collect()
    }

    /// Fold assignment carried by the dev rows: None when no dev row has
    /// a fold, an error when only some do.
    pub fn fold_assignment(&self) -> Result<Option<FoldAssignment>> {
        let dev: Vec<&SplitRecord> = self
            .records
            .iter()
            .filter(|r| r.part == SplitPart::Dev)
            .collect();
        let with_fold = dev.iter().filter(|r| r.fold.is_some()).count();
        if with_fold == 0 {
            return Ok(None);
        }
        if with_fold != dev.len() {
            return Err(Error::validation(
                "split list has folds on some dev images but not all",
            ));
        }
        let mut map = BTreeMap::new();
        let mut max_fold = 0usize;
        for r in &dev {
            let f = r.fold.expect("checked above");
            max_fold = max_fold.max(f);
            map.insert(r.image_id.clone(), f);
        }
        FoldAssignment::new(max_fold + 1, map).map(Some)
    }

    /// Copies fold indices onto the dev rows; every dev image must be
    /// assigned.
    pub fn with_folds(&self, folds: &FoldAssignment) -> Result<SplitList> {
        let mut records = self.records.clone();
        for r in &mut records {
            if r.part == SplitPart::Dev {
                let Some(f) = folds.fold_of(&r.image_id) else {
                    return Err(Error::validation(format!(
                        "dev image {:?} missing from fold assignment",
                        r.image_id
                    )));
                };
                r.fold = Some(f);
            }
        }
        SplitList::new(records)
    }
}

/// Reads a split list: one `image,subject,split,fold` record per line,
/// no header, fold `-` meaning unassigned.
pub fn parse_split_list(path: &Path) -> Result<SplitList> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::format(
                path.display(),
                format!("line {line_no}: expected 4 fields, got {}", fields.len()),
            ));
        }
        let part = match fields[2] {
            "dev" => SplitPart::Dev,
            "test" => SplitPart::Test,
            other => {
                return Err(Error::format(
                    path.display(),
                    format!("line {line_no}: split must be dev or test, got {other:?}"),
                ))
            }
        };
        let fold = match fields[3] {
            "-" => None,
            digits => Some(digits.parse::<usize>().map_err(|_| {
                Error::format(
                    path.display(),
                    format!("line {line_no}: fold must be an integer or \"-\", got {digits:?}"),
                )
            })?),
        };
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::format(
                path.display(),
                format!("line {line_no}: empty image id or subject"),
            ));
        }
        records.push(SplitRecord {
            image_id: fields[0].to_string(),
            subject: fields[1].to_string(),
            part,
            fold,
        });
    }
    SplitList::new(records).map_err(|e| match e {
        Error::Validation(m) => Error::format(path.display(), m),
        other => other,
    })
}

pub fn write_split_list(list: &SplitList, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut out = String::new();
    for r in list.records() {
        let fold = r
            .fold
            .map(|f| f.to_string())
            .unwrap_or_else(|| "-".to_string());
        out.push_str(&format!(
            "{},{},{},{fold}\n",
            r.image_id,
            r.subject,
            r.part.label()
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub const DEV_FRACTION: f64 = 0.6;

/// Seeded stratified dev/test split: per subject, images are shuffled
/// and round(fraction * n) of them go to dev (6/4 for 10 images at
/// 0.6). Folds are left unassigned.
pub fn generate_split(index: &DatasetIndex, dev_fraction: f64, seed: u64) -> Result<SplitList> {
    if index.is_empty() {
        return Err(Error::validation("cannot split an empty index"));
    }
    if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
        return Err(Error::validation(format!(
            "dev fraction must lie in (0, 1), got {dev_fraction}"
        )));
    }
    let mut by_subject: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in index.entries() {
        by_subject
            .entry(e.label.as_str())
            .or_default()
            .push(e.image_id.as_str());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(index.len());
    for (subject, mut images) in by_subject {
        images.sort_unstable();
        for i in (1..images.len()).rev() {
            let j = rng.random_range(0..=i);
            images.swap(i, j);
        }
        let n_dev = ((dev_fraction * images.len() as f64).round() as usize).min(images.len());
        for (i, id) in images.into_iter().enumerate() {
            records.push(SplitRecord {
                image_id: id.to_string(),
                subject: subject.to_string(),
                part: if i < n_dev {
                    SplitPart::Dev
                } else {
                    SplitPart::Test
                },
                fold: None,
            });
        }
    }
    records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    SplitList::new(records)
}

/// Partitions the index into (dev, test) per the list. Every listed id
/// must exist with a matching subject, and every index image must be
/// listed: silent drops are treated as errors.
pub fn apply_split(index: &DatasetIndex, list: &SplitList) -> Result<(DatasetIndex, DatasetIndex)> {
    for r in list.records() {
        match index.get(&r.image_id) {
            None => {
                return Err(Error::validation(format!(
                    "split list names unknown image {:?}",
                    r.image_id
                )))
            }
            Some(e) if e.label != r.subject => {
                return Err(Error::validation(format!(
                    "split list assigns image {:?} to subject {:?}, index says {:?}",
                    r.image_id, r.subject, e.label
                )))
            }
            Some(_) => {}
        }
    }
    if list.records().len() != index.len() {
        let listed: BTreeSet<&str> = list.records().iter().map(|r| r.image_id.as_str()).collect();
        let missing: Vec<&str> = index
            .entries()
            .iter()
            .map(|e| e.image_id.as_str())
            .filter(|id| !listed.contains(id))
            .take(5)
            .collect();
        return Err(Error::validation(format!(
            "split list covers {} of {} images; first unlisted: {missing:?}",
            list.records().len(),
            index.len()
        )));
    }
    let dev_ids = list.part_ids(SplitPart::Dev);
    let test_ids = list.part_ids(SplitPart::Test);
    let dev = index.subset(format!("{}/dev", index.name()), &dev_ids);
    let test = index.subset(format!("{}/test", index.name()), &test_ids);
    Ok((dev, test))
}
