use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use crate::blending::{BlendError, RenderAssets};
use crate::imgcore::{Cutout, Raster};
use crate::maskgen::{extract_mask, MaskParams};
use crate::placement::{Footprint, PlacementError, SceneAssets};

use super::DatasetError;

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewEntry {
    pub view_id: String,
    pub color_path: PathBuf,
    pub mask_path: Option<PathBuf>,
}

/// Sorted listing of object views and background images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetIndex {
    pub objects: BTreeMap<String, Vec<ViewEntry>>,
    pub distractor_labels: BTreeSet<String>,
    pub backgrounds_dir: PathBuf,
    /// Background paths relative to `backgrounds_dir`, sorted.
    pub backgrounds: Vec<String>,
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn list_dir(dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    let rd = std::fs::read_dir(dir).map_err(|e| DatasetError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in rd {
        out.push(entry.map_err(|e| DatasetError::io(dir, e))?.path());
    }
    Ok(out)
}

fn check_readable(path: &Path) -> Result<(), DatasetError> {
    image::image_dimensions(path)
        .map(|_| ())
        .map_err(|e| DatasetError::UnreadableImage {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}

/// Group `(instance, path)` pairs into sorted views; the view id is the file stem.
fn group_views(
    object_files: Vec<(String, PathBuf)>,
    mask_lookup: impl Fn(&str, &str) -> Option<PathBuf>,
) -> Result<BTreeMap<String, Vec<ViewEntry>>, DatasetError> {
        let mut objects: BTreeMap<String, Vec<ViewEntry>> = BTreeMap::new();
        for (label, path) in object_files {
            let view_id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| DatasetError::BadLayout(format!("unusable file name {}", path.display())))?
                .to_string();
            let mask_path = mask_lookup(&label, &view_id);
            objects.entry(label).or_default().push(ViewEntry {
                view_id,
                color_path: path,
                mask_path,
            });
        }
        for views in objects.values_mut() {
            views.sort_by(|a, b| a.color_path.cmp(&b.color_path));
            for pair in views.windows(2) {
                if pair[0].view_id == pair[1].view_id {
                    return Err(DatasetError::BadLayout(format!(
                        "duplicate view id {} ({} and {})",
                        pair[0].view_id,
                        pair[0].color_path.display(),
                        pair[1].color_path.display()
                    )));
                }
            }
        }
        Ok(objects)
}

impl AssetIndex {
    pub fn target_labels(&self) -> Vec<String> {
        self.objects
            .keys()
            .filter(|l| !self.distractor_labels.contains(*l))
            .cloned()
            .collect()
    }

    pub fn background_path(&self, background_ref: &str) -> PathBuf {
        self.backgrounds_dir.join(background_ref)
    }

    /// Build an index from unordered file listings; the result does not
    /// depend on the order of `object_files` or `background_files`.
    ///
    /// `object_files` are `(instance, path)` pairs; the view id is the file
    /// stem. `mask_lookup` returns the mask file for `(instance, view)` if any.
    pub fn from_listing(
        object_files: Vec<(String, PathBuf)>,
        mask_lookup: impl Fn(&str, &str) -> Option<PathBuf>,
        backgrounds_dir: &Path,
        background_files: Vec<PathBuf>,
        distractors: &[String],
    ) -> Result<Self, DatasetError> {
        let objects = group_views(object_files, mask_lookup)?;
        let mut backgrounds: Vec<String> = background_files
            .iter()
            .map(|p| {
                p.strip_prefix(backgrounds_dir)
                    .unwrap_or(p)
                    .to_string_lossy()
                    .replace('\\', "/")
            })
            .collect();
        backgrounds.sort();
        if objects.is_empty() {
            return Err(DatasetError::EmptyAssets("no object images found".into()));
        }
        if backgrounds.is_empty() {
            return Err(DatasetError::EmptyAssets("no background images found".into()));
        }
        let distractor_labels: BTreeSet<String> = distractors.iter().cloned().collect();
        if let Some(missing) = distractor_labels.iter().find(|d| !objects.contains_key(*d)) {
            return Err(DatasetError::BadLayout(format!("distractor {missing} is not an object instance")));
        }
        let index = Self {
            objects,
            distractor_labels,
            backgrounds_dir: backgrounds_dir.to_path_buf(),
            backgrounds,
        };
        if index.target_labels().is_empty() {
            return Err(DatasetError::EmptyAssets("every instance is a distractor".into()));
        }
        Ok(index)
    }
}

fn list_object_files(objects_dir: &Path, masks_dir: Option<&Path>) -> Result<(Vec<(String, PathBuf)>, PathBuf), DatasetError> {
    let masks_dir = masks_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| objects_dir.parent().unwrap_or(Path::new(".")).join("masks"));
    let mut object_files = Vec::new();
    for inst in list_dir(objects_dir)? {
        if !inst.is_dir() {
            continue;
        }
        let label = inst
            .file_name()
            .and_then(|s| s.to_str())
            .ok_or_else(|| DatasetError::BadLayout(format!("unusable directory name {}", inst.display())))?
            .to_string();
        for f in list_dir(&inst)? {
            if f.is_file() && is_image(&f) {
                check_readable(&f)?;
                object_files.push((label.clone(), f));
            }
        }
    }
    Ok((object_files, masks_dir))
}

fn mask_for(masks_dir: &Path, label: &str, view: &str) -> Option<PathBuf> {
    let p = masks_dir.join(label).join(format!("{view}.png"));
    p.is_file().then_some(p)
}

/// Scan only the object views, as [`scan_assets`] does.
pub fn scan_objects(objects_dir: &Path, masks_dir: Option<&Path>) -> Result<BTreeMap<String, Vec<ViewEntry>>, DatasetError> {
    let (files, masks_dir) = list_object_files(objects_dir, masks_dir)?;
    group_views(files, |l, v| mask_for(&masks_dir, l, v))
}

/// Scan `objects/<instance>/<view>.<ext>` and a flat backgrounds directory.
///
/// Masks are looked up at `<masks_dir>/<instance>/<view>.png`; `masks_dir`
/// defaults to a `masks` directory next to `objects_dir`. Every image header
/// is decoded once to catch unreadable files early.
pub fn scan_assets(
    objects_dir: &Path,
    masks_dir: Option<&Path>,
    backgrounds_dir: &Path,
    distractors: &[String],
) -> Result<AssetIndex, DatasetError> {
    let (object_files, masks_dir) = list_object_files(objects_dir, masks_dir)?;
    let mut backgrounds = Vec::new();
    for f in list_dir(backgrounds_dir)? {
        if f.is_file() && is_image(&f) {
            check_readable(&f)?;
            backgrounds.push(f);
        }
    }
    AssetIndex::from_listing(
        object_files,
        |label, view| mask_for(&masks_dir, label, view),
        backgrounds_dir,
        backgrounds,
        distractors,
    )
}

/// Loads cutouts and backgrounds on first use; safe to share across workers.
pub struct AssetLibrary {
    index: AssetIndex,
    mask_params: MaskParams,
    targets: Vec<String>,
    distractors: Vec<String>,
    view_ids: BTreeMap<String, Vec<String>>,
    cutouts: BTreeMap<(String, String), (ViewEntry, OnceLock<Result<Arc<Cutout>, String>>)>,
    backgrounds: BTreeMap<String, OnceLock<Result<Arc<Raster>, String>>>,
}

impl AssetLibrary {
    pub fn new(index: AssetIndex, mask_params: MaskParams) -> Self {
        let targets = index.target_labels();
        let distractors = index.distractor_labels.iter().cloned().collect();
        let mut view_ids = BTreeMap::new();
        let mut cutouts = BTreeMap::new();
        for (label, views) in &index.objects {
            view_ids.insert(label.clone(), views.iter().map(|v| v.view_id.clone()).collect());
            for v in views {
                cutouts.insert((label.clone(), v.view_id.clone()), (v.clone(), OnceLock::new()));
            }
        }
        let backgrounds = index.backgrounds.iter().map(|b| (b.clone(), OnceLock::new())).collect();
        Self {
            index,
            mask_params,
            targets,
            distractors,
            view_ids,
            cutouts,
            backgrounds,
        }
    }

    pub fn index(&self) -> &AssetIndex {
        &self.index
    }

    fn load_cutout(&self, label: &str, entry: &ViewEntry) -> Result<Arc<Cutout>, String> {
        let color = Raster::load_rgb(&entry.color_path).map_err(|e| e.to_string())?;
        let mask = match &entry.mask_path {
            Some(p) => Raster::load_gray(p).map_err(|e| e.to_string())?,
            None => extract_mask(&color, &self.mask_params).map_err(|e| format!("{}: {e}", entry.color_path.display()))?,
        };
        Cutout::from_masked(&color, &mask, label, &entry.view_id)
            .map(Arc::new)
            .map_err(|e| format!("{}: {e}", entry.color_path.display()))
    }

    pub fn get_cutout(&self, label: &str, view: &str) -> Result<Arc<Cutout>, String> {
        let (entry, cell) = self
            .cutouts
            .get(&(label.to_string(), view.to_string()))
            .ok_or_else(|| format!("unknown view {label}/{view}"))?;
        cell.get_or_init(|| self.load_cutout(label, entry)).clone()
    }

    pub fn get_background(&self, background_ref: &str) -> Result<Arc<Raster>, String> {
        let cell = self
            .backgrounds
            .get(background_ref)
            .ok_or_else(|| format!("unknown background {background_ref}"))?;
        cell.get_or_init(|| {
            Raster::load_rgb(&self.index.background_path(background_ref))
                .map(Arc::new)
                .map_err(|e| e.to_string())
        })
        .clone()
    }
}

impl SceneAssets for AssetLibrary {
    fn target_labels(&self) -> &[String] {
        &self.targets
    }

    fn distractor_labels(&self) -> &[String] {
        &self.distractors
    }

    fn view_ids(&self, label: &str) -> &[String] {
        self.view_ids.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    fn footprint(&self, label: &str, view: &str, scale: f64, rotation_deg: f64) -> Result<(u32, u32), PlacementError> {
        let c = self
            .get_cutout(label, view)
            .map_err(PlacementError::UnknownRef)?;
        c.transformed_dims(scale, rotation_deg)
    }
}

impl RenderAssets for AssetLibrary {
    fn background(&self, background_ref: &str) -> Result<Arc<Raster>, BlendError> {
        self.get_background(background_ref).map_err(BlendError::Asset)
    }

    fn cutout(&self, label: &str, view: &str) -> Result<Arc<Cutout>, BlendError> {
        self.get_cutout(label, view).map_err(BlendError::Asset)
    }
}
