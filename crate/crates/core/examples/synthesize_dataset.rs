//! End to end: procedural assets, a run config, parallel synthesis, then the
//! verifier and the statistics report over the written dataset.
//!
//! cargo run --release --example synthesize_dataset -- [out_dir] [scenes] [workers]

use std::path::PathBuf;

use cutpaste::dataset::{synthesize, RunConfig};
use cutpaste::evaluator::{dataset_stats, verify_dataset};
use cutpaste::fixtures::{write_fixture_assets, FixtureSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut args = std::env::args().skip(1);
    let root = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cutpaste-demo"));
    let scenes: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12);
    let workers: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);

    let spec = FixtureSpec { backgrounds: 3, ..FixtureSpec::default() };
    let assets = write_fixture_assets(&root.join("assets"), &spec)?;
    let config = format!(
        r#"
[paths]
objects = "assets/objects"
backgrounds = "assets/backgrounds"
output = "dataset"
distractors = {distractors:?}

[dataset]
master_seed = 2017
num_scenes = {scenes}
"#,
        distractors = assets.distractor_labels
    );
    let cfg = RunConfig::from_toml(&config)?;
    let summary = synthesize(&cfg, &root, workers)?;
    let m = &summary.manifest;
    println!("{} scenes -> {} images in {}", m.num_scenes, m.records.len(), summary.output_dir.display());
    println!("content digest {}", m.content_digest);

    let report = verify_dataset(&summary.output_dir, &cfg.dataset.constraints)?;
    println!(
        "verifier: {} scenes, {} box pairs, {} violations",
        report.scenes_checked,
        report.pairs_checked,
        report.violations.len()
    );
    print!("{}", dataset_stats(&summary.output_dir)?.to_text());
    Ok(())
}
