//! Re-derives every geometric and annotation guarantee of a dataset from the
//! files on disk. Box arithmetic here is done on integers from the blueprint
//! rather than through the placement code it is checking.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::EvalError;
use crate::blending::prepare_cutouts;
use crate::dataset::coco::CocoDataset;
use crate::dataset::manifest::COCO_FILE;
use crate::dataset::voc::{VocAnnotation, VocObject};
use crate::dataset::{AnnotationFormat, AssetLibrary, DatasetManifest, ImageRecord};
use crate::imgcore::Raster;
use crate::maskgen::morphology::{dilate, BinaryGrid};
use crate::placement::{ConstraintConfig, SceneBlueprint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    PairIou,
    Visibility,
    EmptyBox,
    CanvasMismatch,
    AnnotationMismatch,
    AnnotationInvariance,
    CocoMismatch,
    Locality,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub scene_id: String,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}: {}", self.scene_id, self.kind, self.detail)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerificationReport {
    pub scenes_checked: usize,
    pub images_checked: usize,
    pub pairs_checked: usize,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Integer box `[x0, y0, x1)` × `[y0, y1)`.
type IBox = [i64; 4];

fn area(b: &IBox) -> i64 {
    (b[2] - b[0]).max(0) * (b[3] - b[1]).max(0)
}

fn intersect(a: &IBox, b: &IBox) -> IBox {
    [a[0].max(b[0]), a[1].max(b[1]), a[2].min(b[2]), a[3].min(b[3])]
}

fn iou_exceeds(a: &IBox, b: &IBox, max: f64) -> Option<f64> {
    let inter = area(&intersect(a, b));
    let union = area(a) + area(b) - inter;
    let iou = inter as f64 / union as f64;
    (iou > max + 1e-12).then_some(iou)
}

struct Scene {
    id: String,
    blueprint: SceneBlueprint,
    records: Vec<ImageRecord>,
}

fn load_scenes(dir: &Path, manifest: &DatasetManifest) -> Result<Vec<Scene>, EvalError> {
    let mut by_id: BTreeMap<String, Vec<ImageRecord>> = BTreeMap::new();
    for r in &manifest.records {
        by_id.entry(r.blueprint_id.clone()).or_default().push(r.clone());
    }
    by_id
        .into_iter()
        .map(|(id, records)| {
            let path = dir.join(&records[0].blueprint);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| EvalError::CorruptDataset(format!("{}: {e}", path.display())))?;
            let blueprint = SceneBlueprint::from_text(&text)
                .map_err(|e| EvalError::CorruptDataset(format!("{}: {e}", path.display())))?;
            if blueprint.blueprint_id != id {
                return Err(EvalError::CorruptDataset(format!(
                    "{} holds blueprint {} but the manifest expects {id}",
                    path.display(),
                    blueprint.blueprint_id
                )));
            }
            Ok(Scene { id, blueprint, records })
        })
        .collect()
}

fn check_geometry(scene: &Scene, cfg: &ConstraintConfig, out: &mut Vec<Violation>) -> usize {
    let bp = &scene.blueprint;
    let [cw, ch] = bp.canvas;
    let canvas: IBox = [0, 0, cw as i64, ch as i64];
    let max_iou = cfg.effective_max_iou();
    let min_visible = cfg.effective_min_visible();
    let mut v = |kind, detail: String| out.push(Violation { scene_id: scene.id.clone(), kind, detail });
    let full: Vec<IBox> = bp
        .placements
        .iter()
        .map(|p| [p.anchor[0], p.anchor[1], p.anchor[0] + p.width as i64, p.anchor[1] + p.height as i64])
        .collect();
    let clipped: Vec<IBox> = full.iter().map(|b| intersect(b, &canvas)).collect();
    for (i, (f, c)) in full.iter().zip(&clipped).enumerate() {
        if area(c) == 0 {
            v(ViolationKind::EmptyBox, format!("placement {i} lies entirely off the canvas"));
            continue;
        }
        let frac = area(c) as f64 / area(f) as f64;
        if frac < min_visible - 1e-12 {
            v(ViolationKind::Visibility, format!("placement {i} visible fraction {frac:.4} < {min_visible}"));
        }
    }
    let mut pairs = 0;
    for i in 0..full.len() {
        for j in i + 1..full.len() {
            pairs += 1;
            for (which, a, b) in [("clipped", &clipped[i], &clipped[j]), ("unclipped", &full[i], &full[j])] {
                if let Some(o) = iou_exceeds(a, b, max_iou) {
                    v(ViolationKind::PairIou, format!("{which} iou({i},{j}) = {o:.4} > {max_iou}"));
                }
            }
        }
    }
    pairs
}

/// Annotated objects implied by the blueprint, in VOC integer form.
fn expected_objects(bp: &SceneBlueprint) -> Vec<(String, IBox)> {
    let canvas: IBox = [0, 0, bp.canvas[0] as i64, bp.canvas[1] as i64];
    bp.placements
        .iter()
        .filter(|p| !p.is_distractor)
        .filter_map(|p| {
            let b = intersect(
                &[p.anchor[0], p.anchor[1], p.anchor[0] + p.width as i64, p.anchor[1] + p.height as i64],
                &canvas,
            );
            (area(&b) > 0).then(|| (p.instance_label.clone(), b))
        })
        .collect()
}

fn check_voc(dir: &Path, scene: &Scene, out: &mut Vec<Violation>) -> Result<(), EvalError> {
    let expected: Vec<VocObject> = expected_objects(&scene.blueprint)
        .into_iter()
        .map(|(name, b)| VocObject { name, bndbox: [b[0] + 1, b[1] + 1, b[2], b[3]] })
        .collect();
    let mut first: Option<(String, Vec<VocObject>)> = None;
    for r in &scene.records {
        let Some(rel) = &r.voc else { continue };
        let path = dir.join(rel);
        let ann = VocAnnotation::read(&path).map_err(|e| EvalError::CorruptDataset(e.to_string()))?;
        let image_name = Path::new(&r.image).file_name().and_then(|s| s.to_str()).unwrap_or_default();
        let mut v = |kind, detail: String| out.push(Violation { scene_id: scene.id.clone(), kind, detail });
        if ann.filename != image_name {
            v(ViolationKind::AnnotationMismatch, format!("{rel}: filename {} != {image_name}", ann.filename));
        }
        if [ann.width, ann.height] != scene.blueprint.canvas || ann.depth != 3 {
            v(ViolationKind::AnnotationMismatch, format!("{rel}: size {}x{}x{}", ann.width, ann.height, ann.depth));
        }
        if ann.objects != expected {
            v(ViolationKind::AnnotationMismatch, format!("{rel}: objects differ from the blueprint"));
        }
        match &first {
            None => first = Some((rel.clone(), ann.objects)),
            Some((first_rel, objs)) if *objs != ann.objects => {
                v(ViolationKind::AnnotationInvariance, format!("{rel} differs from {first_rel}"));
            }
            Some(_) => {}
        }
    }
    Ok(())
}

fn check_coco(dir: &Path, manifest: &DatasetManifest, scenes: &[Scene], out: &mut Vec<Violation>) -> Result<(), EvalError> {
    let coco = CocoDataset::read(&dir.join(COCO_FILE))?;
    if coco.images.len() != manifest.records.len() {
        return Err(EvalError::CorruptDataset(format!(
            "{COCO_FILE} lists {} images, manifest has {}",
            coco.images.len(),
            manifest.records.len()
        )));
    }
    let by_id: BTreeMap<&str, &Scene> = scenes.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut anns: BTreeMap<u64, Vec<(String, [f64; 4])>> = BTreeMap::new();
    for a in &coco.annotations {
        let name = coco
            .category_name(a.category_id)
            .ok_or_else(|| EvalError::CorruptDataset(format!("annotation {} has unknown category", a.id)))?;
        anns.entry(a.image_id).or_default().push((name.to_string(), a.bbox));
    }
    for (img, r) in coco.images.iter().zip(&manifest.records) {
        let scene = by_id[r.blueprint_id.as_str()];
        let image_name = Path::new(&r.image).file_name().and_then(|s| s.to_str()).unwrap_or_default();
        let expected: Vec<(String, [f64; 4])> = expected_objects(&scene.blueprint)
            .into_iter()
            .map(|(l, b)| (l, [b[0] as f64, b[1] as f64, (b[2] - b[0]) as f64, (b[3] - b[1]) as f64]))
            .collect();
        let got = anns.remove(&img.id).unwrap_or_default();
        if img.file_name != image_name || got != expected || [img.width, img.height] != scene.blueprint.canvas {
            out.push(Violation {
                scene_id: scene.id.clone(),
                kind: ViolationKind::CocoMismatch,
                detail: format!("coco image {} ({}) disagrees with the blueprint", img.id, img.file_name),
            });
        }
    }
    if let Some((id, _)) = anns.into_iter().next() {
        return Err(EvalError::CorruptDataset(format!("{COCO_FILE}: annotations reference unknown image {id}")));
    }
    Ok(())
}

/// Check a dataset directory against `cfg` (normally the manifest's own
/// constraints). Unreadable or inconsistent files are errors; broken
/// guarantees are listed as violations.
pub fn verify_dataset(dir: &Path, cfg: &ConstraintConfig) -> Result<VerificationReport, EvalError> {
    let manifest = DatasetManifest::read(dir)?;
    let expected = manifest.expected_records();
    if manifest.records.len() as u64 != expected {
        return Err(EvalError::CorruptDataset(format!(
            "manifest lists {} images, configuration implies {expected}",
            manifest.records.len()
        )));
    }
    for r in &manifest.records {
        let p = dir.join(&r.image);
        if !p.is_file() {
            return Err(EvalError::CorruptDataset(format!("missing image {}", p.display())));
        }
    }
    let scenes = load_scenes(dir, &manifest)?;
    let mut report = VerificationReport {
        scenes_checked: scenes.len(),
        images_checked: manifest.records.len(),
        ..Default::default()
    };
    let per_scene: Vec<Result<(usize, Vec<Violation>), EvalError>> = scenes
        .par_iter()
        .map(|s| {
            let mut v = Vec::new();
            let pairs = check_geometry(s, cfg, &mut v);
            for r in &s.records {
                if [r.width, r.height] != s.blueprint.canvas {
                    v.push(Violation {
                        scene_id: s.id.clone(),
                        kind: ViolationKind::CanvasMismatch,
                        detail: format!("{} is {}x{}", r.image, r.width, r.height),
                    });
                }
            }
            check_voc(dir, s, &mut v)?;
            Ok((pairs, v))
        })
        .collect();
    for res in per_scene {
        let (pairs, v) = res?;
        report.pairs_checked += pairs;
        report.violations.extend(v);
    }
    if manifest.config.dataset.writes(AnnotationFormat::Coco) {
        check_coco(dir, &manifest, &scenes, &mut report.violations)?;
    }
    Ok(report)
}

fn outside_mask_differs(image: &Raster, background: &Raster, keep: &BinaryGrid) -> Option<(u32, u32)> {
    let w = image.width();
    for (i, (a, b)) in image.data().chunks_exact(3).zip(background.data().chunks_exact(3)).enumerate() {
        if !keep.cells[i] && a != b {
            return Some((i as u32 % w, i as u32 / w));
        }
    }
    None
}

/// Pixels outside every pasted mask, grown by the mode's spill radius, must
/// equal the background exactly.
pub fn verify_locality(dir: &Path, library: &AssetLibrary) -> Result<VerificationReport, EvalError> {
    let manifest = DatasetManifest::read(dir)?;
    let modes: BTreeMap<&str, _> = manifest.config.dataset.blend_modes.iter().map(|m| (m.tag(), *m)).collect();
    let max_spill = modes.values().map(|m| m.spill_radius()).max().unwrap_or(0);
    let scenes = load_scenes(dir, &manifest)?;
    let per_scene: Vec<Result<Vec<Violation>, EvalError>> = scenes
        .par_iter()
        .map(|s| {
            let bp = &s.blueprint;
            let bg = library
                .get_background(&bp.background_ref)
                .map_err(EvalError::CorruptDataset)?;
            let cutouts = prepare_cutouts(bp, library).map_err(|e| EvalError::CorruptDataset(e.to_string()))?;
            // Masks are drawn on a canvas padded by the largest spill radius so
            // that off-canvas parts of a truncated object still spill inward.
            let (cw, ch) = bp.canvas_dims();
            let pad = max_spill as i64;
            let (pw, ph) = (cw as i64 + 2 * pad, ch as i64 + 2 * pad);
            let mut mask = BinaryGrid::new(pw as usize, ph as usize);
            let mut placements: Vec<_> = bp.placements.iter().collect();
            placements.sort_by_key(|p| p.z_order);
            for (p, c) in placements.iter().zip(&cutouts) {
                let (w, h) = c.dims();
                for y in 0..h {
                    for x in 0..w {
                        let (gx, gy) = (p.anchor[0] + x as i64 + pad, p.anchor[1] + y as i64 + pad);
                        if c.is_foreground(x, y) && gx >= 0 && gy >= 0 && gx < pw && gy < ph {
                            mask.cells[gy as usize * pw as usize + gx as usize] = true;
                        }
                    }
                }
            }
            let mut out = Vec::new();
            for r in &s.records {
                let mode = modes
                    .get(r.blend_mode.as_str())
                    .ok_or_else(|| EvalError::CorruptDataset(format!("unknown blend mode {}", r.blend_mode)))?;
                let grown = dilate(&mask, mode.spill_radius() as usize);
                let keep = BinaryGrid {
                    width: cw as usize,
                    height: ch as usize,
                    cells: (0..ch as usize)
                        .flat_map(|y| {
                            let row = (y + pad as usize) * pw as usize + pad as usize;
                            grown.cells[row..row + cw as usize].iter().copied()
                        })
                        .collect(),
                };
                let image = Raster::load_rgb(&dir.join(&r.image)).map_err(|e| EvalError::CorruptDataset(e.to_string()))?;
                if image.dims() != bg.dims() {
                    return Err(EvalError::CorruptDataset(format!("{} does not match its background size", r.image)));
                }
                if let Some((x, y)) = outside_mask_differs(&image, &bg, &keep) {
                    out.push(Violation {
                        scene_id: s.id.clone(),
                        kind: ViolationKind::Locality,
                        detail: format!("{} changed pixel ({x}, {y}) outside the pasted region", r.image),
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut report = VerificationReport {
        scenes_checked: scenes.len(),
        images_checked: manifest.records.len(),
        ..Default::default()
    };
    for v in per_scene {
        report.violations.extend(v?);
    }
    Ok(report)
}
