#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cutpaste::dataset::{synthesize, RunConfig, SynthesisSummary};
use cutpaste::fixtures::{write_fixture_assets, FixturePaths, FixtureSpec};

/// Run config text for fixture assets under `assets`, written relative to `base`.
pub fn config_text(assets: &FixturePaths, scenes: u64, extra_dataset: &str) -> String {
    format!(
        r#"[paths]
objects = {objects:?}
backgrounds = {backgrounds:?}
output = "dataset"
distractors = {distractors:?}

[dataset]
master_seed = 20170801
num_scenes = {scenes}
{extra_dataset}
"#,
        objects = assets.objects.to_string_lossy(),
        backgrounds = assets.backgrounds.to_string_lossy(),
        distractors = assets.distractor_labels,
    )
}

pub fn fixture_assets(root: &Path, spec: &FixtureSpec) -> FixturePaths {
    write_fixture_assets(root, spec).expect("fixture assets")
}

/// Synthesize into `<base>/dataset` from config text, also saving the config as `<base>/run.toml`.
pub fn run(base: &Path, config: &str, workers: usize) -> SynthesisSummary {
    std::fs::create_dir_all(base).unwrap();
    std::fs::write(base.join("run.toml"), config).unwrap();
    let cfg = RunConfig::from_toml(config).expect("config parses");
    synthesize(&cfg, base, workers).expect("synthesis succeeds")
}

/// Every file under `root` keyed by relative path.
pub fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p: PathBuf = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}
