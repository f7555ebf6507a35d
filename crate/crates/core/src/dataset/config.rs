use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::blending::BlendMode;
use crate::maskgen::MaskParams;
use crate::placement::{AugmentConfig, ConstraintConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationFormat {
    Voc,
    Coco,
}

/// What to synthesize: scene counts, blend modes and the sampling recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub master_seed: u64,
    /// Defaults to `backgrounds × background_reuse`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_scenes: Option<u64>,
    /// Target number of scenes per background.
    pub background_reuse: u32,
    pub blend_modes: Vec<BlendMode>,
    /// Render every scene under every mode; otherwise scene `i` uses mode
    /// `i mod |blend_modes|`.
    pub same_image_multiblend: bool,
    pub formats: Vec<AnnotationFormat>,
    /// Scenes allowed to fail placement before the run is an error.
    pub failure_budget: u64,
    pub augment: AugmentConfig,
    pub constraints: ConstraintConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            num_scenes: None,
            background_reuse: 4,
            blend_modes: BlendMode::all_defaults(),
            same_image_multiblend: true,
            formats: vec![AnnotationFormat::Voc, AnnotationFormat::Coco],
            failure_budget: 0,
            augment: AugmentConfig::default(),
            constraints: ConstraintConfig::default(),
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| DatasetError::Config(m);
        if self.num_scenes == Some(0) {
            return Err(bad("num_scenes must be >= 1".into()));
        }
        if self.background_reuse == 0 {
            return Err(bad("background_reuse must be >= 1".into()));
        }
        if self.blend_modes.is_empty() {
            return Err(bad("blend_modes must not be empty".into()));
        }
        let mut tags = BTreeSet::new();
        for m in &self.blend_modes {
            m.validate().map_err(|e| bad(e.to_string()))?;
            if !tags.insert(m.tag()) {
                return Err(bad(format!("blend mode {} listed twice", m.tag())));
            }
        }
        self.augment.validate().map_err(|e| bad(e.to_string()))?;
        self.constraints.validate().map_err(|e| bad(e.to_string()))?;
        Ok(())
    }

    pub fn resolved_num_scenes(&self, num_backgrounds: usize) -> u64 {
        self.num_scenes
            .unwrap_or(num_backgrounds as u64 * self.background_reuse as u64)
    }

    pub fn writes(&self, f: AnnotationFormat) -> bool {
        self.formats.contains(&f)
    }

    /// Number of images a run produces from `scenes` successful scenes.
    pub fn expected_images(&self, scenes: u64) -> u64 {
        if self.same_image_multiblend {
            scenes * self.blend_modes.len() as u64
        } else {
            scenes
        }
    }
}

/// Where inputs live and where outputs go. Relative paths resolve against
/// the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub objects: PathBuf,
    /// Defaults to `masks` next to `objects`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<PathBuf>,
    pub backgrounds: PathBuf,
    pub output: PathBuf,
    #[serde(default)]
    pub distractors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Worker threads; `0` or absent means one per core.
    pub workers: Option<usize>,
}

/// A complete synthesis run as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub paths: PathsConfig,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub masks: MaskParams,
    /// Execution settings; never part of the dataset's identity.
    #[serde(default, skip_serializing)]
    pub run: RunSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, DatasetError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| DatasetError::Config(e.message().to_string()))?;
        cfg.dataset.validate()?;
        cfg.masks.validate().map_err(|e| DatasetError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            DatasetError::Config(m) => DatasetError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Absolute paths for a config read from a file in `base`.
    pub fn resolve(&self, base: &Path) -> ResolvedPaths {
        let abs = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        ResolvedPaths {
            objects: abs(&self.paths.objects),
            masks: self.paths.masks.as_deref().map(abs),
            backgrounds: abs(&self.paths.backgrounds),
            output: abs(&self.paths.output),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResolvedPaths {
    pub objects: PathBuf,
    pub masks: Option<PathBuf>,
    pub backgrounds: PathBuf,
    pub output: PathBuf,
}
