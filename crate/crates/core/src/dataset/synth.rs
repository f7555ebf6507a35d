use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::coco::{write_coco, CocoRecord};
use super::manifest::{content_digest, DatasetManifest, ImageRecord, COCO_FILE, FORMAT_VERSION, MANIFEST_FILE};
use super::seed::{background_schedule, derive_scene_seed};
use super::voc::write_voc;
use super::{scan_assets, AnnotationFormat, AssetLibrary, DatasetError, RunConfig};
use crate::blending::{render_multiblend, Annotation, BlendMode};
use crate::placement::{compose_blueprint, PlacementError, SceneRequest};

pub const IMAGES_DIR: &str = "images";
pub const VOC_DIR: &str = "annotations/voc";
pub const BLUEPRINTS_DIR: &str = "blueprints";

pub fn scene_id(index: u64) -> String {
    format!("scene_{index:06}")
}

pub fn image_file_name(index: u64, mode_tag: &str) -> String {
    format!("scene_{index:06}_{mode_tag}.png")
}

#[derive(Debug)]
struct SceneOutput {
    records: Vec<ImageRecord>,
    annotations: Vec<Annotation>,
}

#[derive(Debug)]
enum SceneOutcome {
    Done(SceneOutput),
    Failed(u64),
}

#[derive(Debug, Clone)]
pub struct SynthesisSummary {
    pub output_dir: PathBuf,
    pub manifest: DatasetManifest,
}

fn process_scene(
    index: u64,
    background_index: usize,
    cfg: &RunConfig,
    library: &AssetLibrary,
    out: &Path,
) -> Result<SceneOutcome, DatasetError> {
    let started = Instant::now();
    let ds = &cfg.dataset;
    let seed = derive_scene_seed(ds.master_seed, index);
    let background_ref = library.index().backgrounds[background_index].clone();
    let background = library.get_background(&background_ref).map_err(DatasetError::Asset)?;
    let request = SceneRequest {
        blueprint_id: scene_id(index),
        background_ref: background_ref.clone(),
        canvas: background.dims(),
        scene_seed: seed,
    };
    let bp = match compose_blueprint(&request, library, &ds.augment, &ds.constraints) {
        Ok(bp) => bp,
        Err(PlacementError::SceneUnsatisfiable(id)) => {
            log::warn!("{id}: no target object could be placed");
            return Ok(SceneOutcome::Failed(index));
        }
        Err(e) => return Err(e.into()),
    };
    let modes: Vec<BlendMode> = if ds.same_image_multiblend {
        ds.blend_modes.clone()
    } else {
        vec![ds.blend_modes[(index % ds.blend_modes.len() as u64) as usize]]
    };
    let rendered = render_multiblend(&bp, &modes, library)?;

    let blueprint_rel = format!("{BLUEPRINTS_DIR}/{}.txt", bp.blueprint_id);
    let blueprint_path = out.join(&blueprint_rel);
    std::fs::write(&blueprint_path, bp.to_text()).map_err(|e| DatasetError::io(&blueprint_path, e))?;

    let mut records = Vec::with_capacity(rendered.len());
    for scene in &rendered {
        let name = image_file_name(index, &scene.blend_mode_tag);
        let image_rel = format!("{IMAGES_DIR}/{name}");
        scene.image.save_png(&out.join(&image_rel))?;
        let voc = if ds.writes(AnnotationFormat::Voc) {
            let (w, h) = scene.image.dims();
            write_voc(&name, w, h, &scene.annotations, &out.join(VOC_DIR))?;
            Some(format!("{VOC_DIR}/{}.xml", name.trim_end_matches(".png")))
        } else {
            None
        };
        records.push(ImageRecord {
            image: image_rel,
            voc,
            blueprint: blueprint_rel.clone(),
            blueprint_id: bp.blueprint_id.clone(),
            scene_index: index,
            blend_mode: scene.blend_mode_tag.clone(),
            seed: format!("{seed:#018x}"),
            background_ref: background_ref.clone(),
            width: scene.image.width(),
            height: scene.image.height(),
            solver: scene.meta,
        });
    }
    let solver_iters: u64 = rendered.iter().map(|r| r.meta.solver_iterations).sum();
    let unconverged = rendered.iter().any(|r| r.meta.unconverged);
    log::info!(
        "scene={} bg={} placements={} annotations={} images={} solver_iters={} unconverged={} ms={}",
        bp.blueprint_id,
        background_ref,
        bp.placements.len(),
        rendered[0].annotations.len(),
        rendered.len(),
        solver_iters,
        unconverged,
        started.elapsed().as_millis()
    );
    Ok(SceneOutcome::Done(SceneOutput {
        records,
        annotations: rendered[0].annotations.clone(),
    }))
}

/// Generate a dataset. `base_dir` anchors relative paths in `cfg`.
///
/// Output bytes depend only on the configuration and the assets: scenes
/// are seeded by index, written to per-scene files, and collected in index
/// order before the manifest and COCO file are assembled.
pub fn synthesize(cfg: &RunConfig, base_dir: &Path, workers: usize) -> Result<SynthesisSummary, DatasetError> {
    cfg.dataset.validate()?;
    let paths = cfg.resolve(base_dir);
    let index = scan_assets(&paths.objects, paths.masks.as_deref(), &paths.backgrounds, &cfg.paths.distractors)?;
    let categories = index.target_labels();
    let library = AssetLibrary::new(index, cfg.masks.clone());
    let ds = &cfg.dataset;
    let num_scenes = ds.resolved_num_scenes(library.index().backgrounds.len());
    let schedule = background_schedule(library.index().backgrounds.len(), num_scenes, ds.background_reuse, ds.master_seed);

    let out = &paths.output;
    for sub in [IMAGES_DIR, VOC_DIR, BLUEPRINTS_DIR] {
        let d = out.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| DatasetError::io(&d, e))?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| DatasetError::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<SceneOutcome, DatasetError>> = pool.install(|| {
        (0..num_scenes)
            .into_par_iter()
            .map(|i| process_scene(i, schedule[i as usize], cfg, &library, out))
            .collect()
    });

    let mut records = Vec::new();
    let mut coco_annotations: Vec<Vec<Annotation>> = Vec::new();
    let mut failed = Vec::new();
    for outcome in outcomes {
        match outcome? {
            SceneOutcome::Done(s) => {
                for r in s.records {
                    coco_annotations.push(s.annotations.clone());
                    records.push(r);
                }
            }
            SceneOutcome::Failed(i) => failed.push(i),
        }
    }
    if failed.len() as u64 > ds.failure_budget {
        return Err(DatasetError::SceneFailures {
            failed: failed.len() as u64,
            budget: ds.failure_budget,
            first: failed.iter().take(10).map(|&i| scene_id(i)).collect(),
        });
    }

    if ds.writes(AnnotationFormat::Coco) {
        let names: Vec<String> = records
            .iter()
            .map(|r| r.image.trim_start_matches(&format!("{IMAGES_DIR}/")).to_string())
            .collect();
        let coco_records: Vec<CocoRecord> = records
            .iter()
            .zip(&names)
            .zip(&coco_annotations)
            .map(|((r, name), anns)| CocoRecord {
                file_name: name.clone(),
                width: r.width,
                height: r.height,
                annotations: anns,
            })
            .collect();
        write_coco(&coco_records, &categories, &out.join(COCO_FILE))?;
    }

    let mut echo = cfg.clone();
    echo.dataset.num_scenes = Some(num_scenes);
    let mut manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        config: echo,
        num_scenes,
        blend_modes: ds.blend_modes.iter().map(|m| m.tag().to_string()).collect(),
        categories,
        failed_scenes: failed,
        records,
        content_digest: String::new(),
    };
    manifest.content_digest = content_digest(out, &manifest.artifact_paths())?;
    let manifest_path = out.join(MANIFEST_FILE);
    std::fs::write(&manifest_path, manifest.to_json()).map_err(|e| DatasetError::io(&manifest_path, e))?;
    log::info!(
        "wrote {} images from {} scenes ({} failed) to {}",
        manifest.records.len(),
        num_scenes,
        manifest.failed_scenes.len(),
        out.display()
    );
    Ok(SynthesisSummary { output_dir: out.clone(), manifest })
}
