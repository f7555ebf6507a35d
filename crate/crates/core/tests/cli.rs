mod common;

use std::path::Path;
use std::process::{Command, Output};

use cutpaste::dataset::coco::CocoDataset;
use cutpaste::dataset::DatasetManifest;
use cutpaste::fixtures::{FixturePaths, FixtureSpec};
use cutpaste::imgcore::Raster;

fn cutpaste(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutpaste"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn small_assets(root: &Path) -> FixturePaths {
    let spec = FixtureSpec { backgrounds: 3, background_size: (320, 240), view_size: 96, ..FixtureSpec::default() };
    common::fixture_assets(root, &spec)
}

fn synthesize(base: &Path, assets: &FixturePaths, scenes: u64, workers: &str) -> Output {
    std::fs::create_dir_all(base).unwrap();
    let cfg = base.join("run.toml");
    std::fs::write(&cfg, common::config_text(assets, scenes, "")).unwrap();
    cutpaste(&["synthesize", "--config", cfg.to_str().unwrap(), "--workers", workers])
}

#[test]
fn synthesize_writes_scenes_times_modes_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let assets = small_assets(&dir.path().join("assets"));
    let base = dir.path().join("run");
    let o = synthesize(&base, &assets, 10, "2");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let images = std::fs::read_dir(base.join("dataset/images")).unwrap().count();
    assert_eq!(images, 30);
    let ds = base.join("dataset");
    let v = cutpaste(&["verify", ds.to_str().unwrap(), "--config", base.join("run.toml").to_str().unwrap()]);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stdout));
    let s = cutpaste(&["stats", ds.to_str().unwrap()]);
    assert_eq!(code(&s), 0);
    assert!(String::from_utf8_lossy(&s.stdout).contains("scenes 10 images 30"));
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let assets = small_assets(&dir.path().join("assets"));
    let mut digests = Vec::new();
    for workers in ["1", "2", "8"] {
        let base = dir.path().join(format!("w{workers}"));
        assert_eq!(code(&synthesize(&base, &assets, 8, workers)), 0);
        let manifest = std::fs::read(base.join("dataset/manifest.json")).unwrap();
        digests.push((manifest, common::read_tree(&base.join("dataset"))));
    }
    assert!(digests.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn echoed_config_reproduces_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let assets = small_assets(&dir.path().join("assets"));
    let first = dir.path().join("first");
    assert_eq!(code(&synthesize(&first, &assets, 6, "1")), 0);
    let manifest = DatasetManifest::read(&first.join("dataset")).unwrap();
    let second = dir.path().join("second");
    std::fs::create_dir_all(&second).unwrap();
    std::fs::write(second.join("echo.toml"), manifest.config.to_toml()).unwrap();
    let o = cutpaste(&["synthesize", "--config", second.join("echo.toml").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(common::read_tree(&first.join("dataset")), common::read_tree(&second.join("dataset")));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let assets = small_assets(&dir.path().join("assets"));
    let base = dir.path().join("run");
    assert_eq!(code(&synthesize(&base, &assets, 3, "1")), 0);
    let before = DatasetManifest::read(&base.join("dataset")).unwrap();
    let cfg = base.join("run.toml");
    assert_eq!(code(&cutpaste(&["synthesize", "--config", cfg.to_str().unwrap(), "--seed", "99"])), 0);
    let after = DatasetManifest::read(&base.join("dataset")).unwrap();
    assert_eq!(after.config.dataset.master_seed, 99);
    assert_ne!(before.content_digest, after.content_digest);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[paths]\nobjects='o'\nbackgrounds='b'\noutput='x'\n[dataset]\nnum_scences = 4\n").unwrap();
    let o = cutpaste(&["synthesize", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("num_scences"));
    assert_eq!(code(&cutpaste(&["synthesize"])), 2);
    assert_eq!(code(&cutpaste(&["no-such-command"])), 2);
}

#[test]
fn exhausted_failure_budget_fails_the_run() {
    let dir = tempfile::tempdir().unwrap();
    // one huge object on a tiny canvas that must stay fully inside
    let spec = FixtureSpec { instances: 1, distractors: 0, backgrounds: 1, background_size: (40, 40), view_size: 160, ..FixtureSpec::default() };
    let assets = common::fixture_assets(&dir.path().join("assets"), &spec);
    let base = dir.path().join("run");
    std::fs::create_dir_all(&base).unwrap();
    let text = common::config_text(
        &assets,
        2,
        "[dataset.constraints]\nallow_truncation = false\n[dataset.augment]\nscale_range = [0.9, 0.9]\n",
    );
    std::fs::write(base.join("run.toml"), &text).unwrap();
    let o = cutpaste(&["synthesize", "--config", base.join("run.toml").to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn verify_catches_injected_faults() {
    let dir = tempfile::tempdir().unwrap();
    let assets = small_assets(&dir.path().join("assets"));
    let base = dir.path().join("run");
    assert_eq!(code(&synthesize(&base, &assets, 4, "1")), 0);
    let ds = base.join("dataset");
    let manifest = DatasetManifest::read(&ds).unwrap();
    let voc = ds.join(manifest.records[1].voc.as_ref().unwrap());
    let original = std::fs::read_to_string(&voc).unwrap();

    // box moved in one blend variant
    let start = original.find("<xmin>").unwrap() + "<xmin>".len();
    let end = start + original[start..].find('<').unwrap();
    let moved: i64 = original[start..end].parse::<i64>().unwrap() + 3;
    std::fs::write(&voc, format!("{}{moved}{}", &original[..start], &original[end..])).unwrap();
    let o = cutpaste(&["verify", ds.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("AnnotationInvariance") && out.contains(&manifest.records[1].blueprint_id), "{out}");

    // unparseable XML
    std::fs::write(&voc, "<annotation><filename>").unwrap();
    let o = cutpaste(&["verify", ds.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains(voc.file_name().unwrap().to_str().unwrap()));
    std::fs::write(&voc, &original).unwrap();
    assert_eq!(code(&cutpaste(&["verify", ds.to_str().unwrap()])), 0);

    // manifest that no longer matches its own configuration
    let mut short = manifest.clone();
    short.records.pop();
    std::fs::write(ds.join("manifest.json"), short.to_json()).unwrap();
    let o = cutpaste(&["verify", ds.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("corrupt dataset"));
}

#[test]
fn evaluate_perfect_detector() {
    let dir = tempfile::tempdir().unwrap();
    // boxes must clear the 50x30 evaluation minimum
    let spec = FixtureSpec { backgrounds: 2, ..FixtureSpec::default() };
    let assets = common::fixture_assets(&dir.path().join("assets"), &spec);
    let base = dir.path().join("run");
    assert_eq!(code(&synthesize(&base, &assets, 4, "1")), 0);
    let ds = base.join("dataset");
    let gt = CocoDataset::read(&ds.join("annotations/coco.json")).unwrap();
    let dets: Vec<serde_json::Value> = gt
        .annotations
        .iter()
        .filter(|a| a.bbox[2] >= 50.0 && a.bbox[3] >= 30.0)
        .map(|a| serde_json::json!({"image_id": a.image_id, "category_id": a.category_id, "bbox": a.bbox, "score": 1.0}))
        .collect();
    assert!(!dets.is_empty());
    let path = dir.path().join("perfect.json");
    std::fs::write(&path, serde_json::to_string(&dets).unwrap()).unwrap();
    for interp in ["allpoint", "voc11"] {
        let o = cutpaste(&["evaluate", ds.to_str().unwrap(), "--detections", path.to_str().unwrap(), "--interpolation", interp]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let table = String::from_utf8_lossy(&o.stdout);
        assert!(table.lines().nth(1).unwrap().ends_with("| 100.0 |"), "{table}");
    }
    let o = cutpaste(&["evaluate", ds.to_str().unwrap(), "--detections", path.to_str().unwrap(), "--interpolation", "bogus"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn extract_masks_modes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = FixtureSpec { instances: 2, views_per_instance: 2, distractors: 0, backgrounds: 1, background_size: (64, 48), view_size: 96, ..FixtureSpec::default() };
    let assets = common::fixture_assets(dir.path(), &spec);
    let (objects, masks) = (assets.objects.to_str().unwrap(), assets.masks.to_str().unwrap());

    let o = cutpaste(&["extract-masks", "--objects", objects, "--masks", masks]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("4 written, 0 already present, 0 failed"));
    let m = Raster::load_gray(&assets.masks.join("object_00/view_00.png")).unwrap();
    assert_eq!(m.dims(), (96, 96));

    let o = cutpaste(&["extract-masks", "--objects", objects, "--masks", masks]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 written, 4 already present"));

    Raster::filled(80, 80, 3, 120).unwrap().save_png(&assets.objects.join("object_01/blank.png")).unwrap();
    assert_eq!(code(&cutpaste(&["extract-masks", "--objects", objects, "--masks", masks])), 1);
    let o = cutpaste(&["extract-masks", "--objects", objects, "--masks", masks, "--skip-failures"]);
    assert_eq!(code(&o), 0);
    let report = std::fs::read_to_string(assets.masks.join("failures.txt")).unwrap();
    assert!(report.contains("blank.png") && report.contains("no foreground"));
}
