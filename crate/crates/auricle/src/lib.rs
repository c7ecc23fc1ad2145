//! Texture-descriptor toolbox for ear-image recognition experiments.
//!
//! The pipeline: grayscale conversion, resizing and photometric
//! normalization ([`imgproc`]), eight texture descriptors over a block
//! grid ([`descriptors`]), histogram distances and score matrices
//! ([`matching`]), identification/verification metrics with fold and
//! bootstrap protocols ([`eval`]), dataset indexing and CSV caches
//! ([`dataset`]), and a config-driven runner ([`runner`], [`config`]).

pub mod config;
pub mod dataset;
pub mod descriptors;
pub mod error;
pub mod eval;
pub mod imgproc;
pub mod matching;
pub mod runner;

pub use config::{load_config, ExperimentConfig, Overrides};
pub use dataset::{scan_directory, DatasetIndex, FeatureCache};
pub use descriptors::{Descriptor, Extractor, FeatureVector};
pub use error::{Error, Result};
pub use eval::{cmc, eer, kfold_split, rank1, roc, CmcCurve, MetricSummary, RocCurve};
pub use imgproc::{load_grayscale, preprocess, GrayImage, Preprocessor};
pub use matching::{chi_square, cosine_distance, score_matrix, Measure, ScoreMatrix};
