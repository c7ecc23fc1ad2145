//! Experiment configuration: an optional TOML file merged with
//! command-line overrides, where explicit flags win over file values
//! and anything left unset falls back to documented defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::descriptors::bsif::{BsifSource, DEFAULT_BSIF_SEED};
use crate::descriptors::Descriptor;
use crate::error::{Error, Result};
use crate::imgproc::NormalizerRegistry;
use crate::matching::Measure;

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TARGET: (u32, u32) = (100, 100);
pub const MIN_TARGET: u32 = 32;
pub const DEFAULT_OUT: &str = "out";
pub const DEFAULT_NORMALIZE: &str = "histeq";

/// Fully resolved experiment settings. `dataset` stays optional because
/// the report command runs on outputs alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dataset: Option<PathBuf>,
    pub splits: Option<PathBuf>,
    pub descriptors: Vec<Descriptor>,
    #[serde(serialize_with = "measures_by_name")]
    pub measures: BTreeMap<Descriptor, Measure>,
    pub k: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub target_width: u32,
    pub target_height: u32,
    pub normalize: String,
    pub bsif_filters: Option<PathBuf>,
    pub bsif_seed: u64,
}

/// Echoes the measure map with the short CLI names ("chi2", "cosine").
fn measures_by_name<S: Serializer>(
    measures: &BTreeMap<Descriptor, Measure>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut map = ser.serialize_map(Some(measures.len()))?;
    for (d, m) in measures {
        map.serialize_entry(d.name(), m.name())?;
    }
    map.end()
}

impl ExperimentConfig {
    /// The measure a descriptor is scored with: the configured override
    /// or the descriptor's default.
    pub fn measure_for(&self, descriptor: Descriptor) -> Measure {
        self.measures
            .get(&descriptor)
            .copied()
            .unwrap_or_else(|| descriptor.default_measure())
    }

    /// Dataset root, required by extract/evaluate/split.
    pub fn dataset(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .ok_or_else(|| Error::config("no dataset root given (--dataset or config file)"))
    }

    pub fn bsif_source(&self) -> BsifSource {
        match &self.bsif_filters {
            Some(path) => BsifSource::File(path.clone()),
            None => BsifSource::Seed(self.bsif_seed),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.descriptors.is_empty() {
            return Err(Error::config("descriptor list must not be empty"));
        }
        if self.k < 2 {
            return Err(Error::config(format!("k must be >= 2, got {}", self.k)));
        }
        if self.target_width < MIN_TARGET || self.target_height < MIN_TARGET {
            return Err(Error::config(format!(
                "target size must be at least {MIN_TARGET}x{MIN_TARGET}, got {}x{}",
                self.target_width, self.target_height
            )));
        }
        NormalizerRegistry::standard()
            .get(&self.normalize)
            .map_err(|_| Error::config(format!("unknown normalization {:?}", self.normalize)))?;
        Ok(())
    }
}

/// On-disk TOML shape; every key optional, unknown keys rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dataset: Option<PathBuf>,
    splits: Option<PathBuf>,
    descriptors: Option<Vec<Descriptor>>,
    measures: Option<BTreeMap<String, String>>,
    k: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    target_width: Option<u32>,
    target_height: Option<u32>,
    normalize: Option<String>,
    bsif_filters: Option<PathBuf>,
    bsif_seed: Option<u64>,
}

/// Values passed on the command line; `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub dataset: Option<PathBuf>,
    pub splits: Option<PathBuf>,
    pub descriptors: Option<Vec<Descriptor>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub k: Option<usize>,
}

/// Loads the optional file, applies overrides and defaults, validates.
pub fn load_config(file: Option<&Path>, overrides: Overrides) -> Result<ExperimentConfig> {
    let raw: RawConfig = match file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?
        }
        None => RawConfig::default(),
    };
    let mut measures = BTreeMap::new();
    for (key, value) in raw.measures.unwrap_or_default() {
        let descriptor: Descriptor = key
            .parse()
            .map_err(|_| Error::config(format!("measures: unknown descriptor {key:?}")))?;
        let measure: Measure = value
            .parse()
            .map_err(|_| Error::config(format!("measures.{key}: unknown measure {value:?}")))?;
        measures.insert(descriptor, measure);
    }
    let descriptors = dedup(
        overrides
            .descriptors
            .or(raw.descriptors)
            .unwrap_or_else(|| Descriptor::ALL.to_vec()),
    );
    let config = ExperimentConfig {
        dataset: overrides.dataset.or(raw.dataset),
        splits: overrides.splits.or(raw.splits),
        descriptors,
        measures,
        k: overrides.k.or(raw.k).unwrap_or(DEFAULT_K),
        seed: overrides.seed.or(raw.seed).unwrap_or(DEFAULT_SEED),
        out: overrides
            .out
            .or(raw.out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        target_width: raw.target_width.unwrap_or(DEFAULT_TARGET.0),
        target_height: raw.target_height.unwrap_or(DEFAULT_TARGET.1),
        normalize: raw
            .normalize
            .unwrap_or_else(|| DEFAULT_NORMALIZE.to_string()),
        bsif_filters: raw.bsif_filters,
        bsif_seed: raw.bsif_seed.unwrap_or(DEFAULT_BSIF_SEED),
    };
    config.validate()?;
    Ok(config)
}

/// Order-preserving duplicate removal so `lbp,lbp` runs LBP once.
fn dedup(descriptors: Vec<Descriptor>) -> Vec<Descriptor> {
    let mut seen = std::collections::BTreeSet::new();
    descriptors
        .into_iter()
        .filter(|d| seen.insert(*d))
        .collect()
}
