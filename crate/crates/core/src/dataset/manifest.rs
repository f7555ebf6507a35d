use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DatasetError, RunConfig};
use crate::blending::RenderMeta;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const COCO_FILE: &str = "annotations/coco.json";

/// One rendered image. Paths are relative to the dataset root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub image: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voc: Option<String>,
    pub blueprint: String,
    pub blueprint_id: String,
    pub scene_index: u64,
    pub blend_mode: String,
    pub seed: String,
    pub background_ref: String,
    pub width: u32,
    pub height: u32,
    pub solver: RenderMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format_version: u32,
    /// The fully resolved run configuration; feeding it back reproduces the dataset.
    pub config: RunConfig,
    pub num_scenes: u64,
    pub blend_modes: Vec<String>,
    pub categories: Vec<String>,
    pub failed_scenes: Vec<u64>,
    pub records: Vec<ImageRecord>,
    /// SHA-256 over every artifact file, see [`content_digest`].
    pub content_digest: String,
}

impl DatasetManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn read(dataset_dir: &Path) -> Result<Self, DatasetError> {
        let path = dataset_dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| DatasetError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| DatasetError::Corrupt(format!("{}: {e}", path.display())))
    }

    /// Image count implied by the configuration and the failed-scene list.
    pub fn expected_records(&self) -> u64 {
        let ok = self.num_scenes.saturating_sub(self.failed_scenes.len() as u64);
        self.config.dataset.expected_images(ok)
    }

    /// Relative paths of every artifact the manifest refers to, sorted.
    pub fn artifact_paths(&self) -> Vec<String> {
        let mut paths: Vec<String> = self
            .records
            .iter()
            .flat_map(|r| [Some(r.image.clone()), r.voc.clone(), Some(r.blueprint.clone())])
            .flatten()
            .collect();
        if self.config.dataset.writes(super::AnnotationFormat::Coco) {
            paths.push(COCO_FILE.to_string());
        }
        paths.sort();
        paths.dedup();
        paths
    }
}

/// Hex SHA-256 over `(path, length, bytes)` of each file in `rel_paths` order.
pub fn content_digest(root: &Path, rel_paths: &[String]) -> Result<String, DatasetError> {
    let mut h = Sha256::new();
    for rel in rel_paths {
        let path = root.join(rel);
        let bytes = std::fs::read(&path).map_err(|e| DatasetError::io(&path, e))?;
        h.update(rel.as_bytes());
        h.update([0u8]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Hex SHA-256 of one file.
pub fn file_digest(path: &Path) -> Result<String, DatasetError> {
    let bytes = std::fs::read(path).map_err(|e| DatasetError::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}
