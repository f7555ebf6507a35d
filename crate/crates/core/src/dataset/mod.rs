//! Asset discovery, deterministic scene scheduling, parallel synthesis and
//! the on-disk dataset formats (PNG images, VOC XML, COCO JSON, blueprints
//! and a manifest).

mod assets;
pub mod coco;
mod config;
pub mod manifest;
pub mod seed;
mod synth;
pub mod voc;

use std::path::{Path, PathBuf};

pub use assets::{scan_assets, scan_objects, AssetIndex, AssetLibrary, ViewEntry};
pub use config::{AnnotationFormat, DatasetConfig, PathsConfig, ResolvedPaths, RunConfig, RunSection};
pub use manifest::{DatasetManifest, ImageRecord};
pub use synth::{image_file_name, scene_id, synthesize, SynthesisSummary, BLUEPRINTS_DIR, IMAGES_DIR, VOC_DIR};

use crate::blending::BlendError;
use crate::imgcore::ImgError;
use crate::placement::PlacementError;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unreadable image {}: {reason}", path.display())]
    UnreadableImage { path: PathBuf, reason: String },
    #[error("bad asset layout: {0}")]
    BadLayout(String),
    #[error("empty asset set: {0}")]
    EmptyAssets(String),
    #[error("asset error: {0}")]
    Asset(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("corrupt dataset: {0}")]
    Corrupt(String),
    #[error("{failed} scenes failed, budget is {budget} (first: {})", first.join(", "))]
    SceneFailures { failed: u64, budget: u64, first: Vec<String> },
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Blend(#[from] BlendError),
    #[error(transparent)]
    Image(#[from] ImgError),
}

impl DatasetError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        DatasetError::Io { path: path.as_ref().to_path_buf(), source }
    }
}
