//! Command-line front end. The binary is a one-line wrapper around [`run`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::dataset::{synthesize, AssetLibrary, DatasetError, RunConfig};
use crate::evaluator::{
    dataset_stats, evaluate, parse_detections, verify_dataset, verify_locality, EvalConfig, EvalError, Interpolation,
};
use crate::imgcore::Raster;
use crate::maskgen::{extract_mask, MaskParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cutpaste", version, about = "Cut-and-paste synthesis of instance detection datasets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InterpolationArg {
    Allpoint,
    Voc11,
}

impl From<InterpolationArg> for Interpolation {
    fn from(a: InterpolationArg) -> Self {
        match a {
            InterpolationArg::Allpoint => Interpolation::AllPoint,
            InterpolationArg::Voc11 => Interpolation::Voc11,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a foreground mask for every object image that lacks one.
    ExtractMasks {
        /// Run config; supplies the objects and masks directories and mask parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        objects: Option<PathBuf>,
        #[arg(long)]
        masks: Option<PathBuf>,
        /// Record failed images in `failures.txt` instead of exiting nonzero.
        #[arg(long)]
        skip_failures: bool,
    },
    /// Generate a dataset from a run config.
    Synthesize {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; 0 means one per core.
        #[arg(long)]
        workers: Option<usize>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-check constraints and annotations of a generated dataset.
    Verify {
        dataset: PathBuf,
        /// Also check blending locality against the assets named in this config.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print usage and geometry statistics.
    Stats {
        dataset: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Score COCO-style detections against the dataset's ground truth.
    Evaluate {
        dataset: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[arg(long, value_enum, default_value = "allpoint")]
        interpolation: InterpolationArg,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
    },
}

fn config_dir(path: &Path) -> &Path {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

fn load_config(path: &Path) -> Result<RunConfig, i32> {
    RunConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        match e {
            DatasetError::Io { .. } | DatasetError::Config(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    })
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.command {
        Command::ExtractMasks { config, objects, masks, skip_failures } => {
            cmd_extract_masks(config.as_deref(), objects, masks, skip_failures)
        }
        Command::Synthesize { config, workers, seed } => cmd_synthesize(&config, workers, seed),
        Command::Verify { dataset, config } => cmd_verify(&dataset, config.as_deref()),
        Command::Stats { dataset, json } => cmd_stats(&dataset, json),
        Command::Evaluate { dataset, detections, interpolation, iou } => {
            let cfg = EvalConfig { iou_threshold: iou, interpolation: interpolation.into(), ..EvalConfig::default() };
            cmd_evaluate(&dataset, &detections, &cfg)
        }
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct MaskRunSummary {
    pub written: usize,
    pub existing: usize,
    pub failed: Vec<(PathBuf, String)>,
}

/// Extract masks for every `objects/<instance>/<view>.<ext>` without a
/// matching `masks/<instance>/<view>.png`.
pub fn extract_missing_masks(objects: &Path, masks: &Path, params: &MaskParams) -> Result<MaskRunSummary, DatasetError> {
    params.validate().map_err(|e| DatasetError::Config(e.to_string()))?;
    let objects = crate::dataset::scan_objects(objects, Some(masks))?;
    let mut summary = MaskRunSummary::default();
    for (label, views) in &objects {
        for v in views {
            if v.mask_path.is_some() {
                summary.existing += 1;
                continue;
            }
            let out = masks.join(label).join(format!("{}.png", v.view_id));
            let color = Raster::load_rgb(&v.color_path)?;
            match extract_mask(&color, params) {
                Ok(m) => {
                    m.save_png(&out)?;
                    summary.written += 1;
                }
                Err(e) => summary.failed.push((v.color_path.clone(), e.to_string())),
            }
        }
    }
    Ok(summary)
}

pub fn cmd_extract_masks(config: Option<&Path>, objects: Option<PathBuf>, masks: Option<PathBuf>, skip_failures: bool) -> i32 {
    let (mut params, mut obj_dir, mut mask_dir) = (MaskParams::default(), None, None);
    if let Some(path) = config {
        let cfg = match load_config(path) {
            Ok(c) => c,
            Err(code) => return code,
        };
        let resolved = cfg.resolve(config_dir(path));
        params = cfg.masks.clone();
        mask_dir = Some(resolved.masks.unwrap_or_else(|| resolved.objects.parent().unwrap_or(Path::new(".")).join("masks")));
        obj_dir = Some(resolved.objects);
    }
    let Some(objects) = objects.or(obj_dir) else {
        eprintln!("error: give --objects or --config");
        return EXIT_USAGE;
    };
    let masks = masks
        .or(mask_dir)
        .unwrap_or_else(|| objects.parent().unwrap_or(Path::new(".")).join("masks"));
    let summary = match extract_missing_masks(&objects, &masks, &params) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    println!(
        "masks: {} written, {} already present, {} failed",
        summary.written,
        summary.existing,
        summary.failed.len()
    );
    if summary.failed.is_empty() {
        return EXIT_OK;
    }
    for (p, why) in &summary.failed {
        eprintln!("failed: {}: {why}", p.display());
    }
    if !skip_failures {
        return EXIT_FAILURE;
    }
    let report: String = summary.failed.iter().map(|(p, why)| format!("{}\t{why}\n", p.display())).collect();
    let path = masks.join("failures.txt");
    if let Err(e) = std::fs::create_dir_all(&masks).and_then(|_| std::fs::write(&path, report)) {
        eprintln!("error: {}: {e}", path.display());
        return EXIT_FAILURE;
    }
    println!("failures listed in {}", path.display());
    EXIT_OK
}

pub fn cmd_synthesize(config: &Path, workers: Option<usize>, seed: Option<u64>) -> i32 {
    let mut cfg = match load_config(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(s) = seed {
        cfg.dataset.master_seed = s;
    }
    let workers = match workers.or(cfg.run.workers) {
        None | Some(0) => default_workers(),
        Some(n) => n,
    };
    match synthesize(&cfg, config_dir(config), workers) {
        Ok(s) => {
            println!(
                "wrote {} images ({} scenes, {} failed) to {}",
                s.manifest.records.len(),
                s.manifest.num_scenes,
                s.manifest.failed_scenes.len(),
                s.output_dir.display()
            );
            println!("content digest {}", s.manifest.content_digest);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                DatasetError::Config(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

fn report_eval_error(e: EvalError) -> i32 {
    eprintln!("error: {e}");
    match e {
        EvalError::BadConfig(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

pub fn cmd_verify(dataset: &Path, config: Option<&Path>) -> i32 {
    let manifest = match crate::dataset::DatasetManifest::read(dataset) {
        Ok(m) => m,
        Err(e) => return report_eval_error(e.into()),
    };
    let mut report = match verify_dataset(dataset, &manifest.config.dataset.constraints) {
        Ok(r) => r,
        Err(e) => return report_eval_error(e),
    };
    if let Some(path) = config {
        let cfg = match load_config(path) {
            Ok(c) => c,
            Err(code) => return code,
        };
        let p = cfg.resolve(config_dir(path));
        let index = match crate::dataset::scan_assets(&p.objects, p.masks.as_deref(), &p.backgrounds, &cfg.paths.distractors) {
            Ok(i) => i,
            Err(e) => return report_eval_error(e.into()),
        };
        match verify_locality(dataset, &AssetLibrary::new(index, cfg.masks.clone())) {
            Ok(r) => report.violations.extend(r.violations),
            Err(e) => return report_eval_error(e),
        }
    }
    for v in &report.violations {
        println!("violation: {v}");
    }
    println!(
        "checked {} scenes, {} images, {} box pairs: {} violations",
        report.scenes_checked,
        report.images_checked,
        report.pairs_checked,
        report.violations.len()
    );
    if report.is_clean() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

pub fn cmd_stats(dataset: &Path, json: bool) -> i32 {
    match dataset_stats(dataset) {
        Ok(s) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&s).expect("stats serialize"));
            } else {
                print!("{}", s.to_text());
            }
            EXIT_OK
        }
        Err(e) => report_eval_error(e),
    }
}

pub fn cmd_evaluate(dataset: &Path, detections: &Path, cfg: &EvalConfig) -> i32 {
    let gt = match crate::dataset::coco::CocoDataset::read(&dataset.join(crate::dataset::manifest::COCO_FILE)) {
        Ok(g) => g,
        Err(e) => return report_eval_error(e.into()),
    };
    let dets = match std::fs::read_to_string(detections)
        .map_err(|e| EvalError::BadDetections(format!("{}: {e}", detections.display())))
        .and_then(|t| parse_detections(&t))
    {
        Ok(d) => d,
        Err(e) => return report_eval_error(e),
    };
    match evaluate(&gt, &dets, cfg) {
        Ok(r) => {
            let name = detections.file_stem().and_then(|s| s.to_str()).unwrap_or("detections");
            print!("{}", r.to_table(name));
            EXIT_OK
        }
        Err(e) => report_eval_error(e),
    }
}
