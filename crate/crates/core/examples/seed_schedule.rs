//! Per-scene seeds and the background reuse schedule.
//!
//! With 1548 backgrounds and a reuse factor of 4 the default scene count is
//! 6192, and every background is used exactly four times.

use cutpaste::dataset::seed::{background_schedule, derive_scene_seed};
use cutpaste::dataset::DatasetConfig;

fn main() {
    for i in 0..4 {
        println!("scene {i}: seed {:#018x}", derive_scene_seed(2017, i));
    }
    let cfg = DatasetConfig::default();
    let backgrounds = 1548;
    let scenes = cfg.resolved_num_scenes(backgrounds);
    let schedule = background_schedule(backgrounds, scenes, cfg.background_reuse, cfg.master_seed);
    let mut uses = vec![0u32; backgrounds];
    for &b in &schedule {
        uses[b] += 1;
    }
    println!(
        "{backgrounds} backgrounds x {} -> {scenes} scenes, {} images; uses per background min {} max {}",
        cfg.background_reuse,
        cfg.expected_images(scenes),
        uses.iter().min().unwrap(),
        uses.iter().max().unwrap()
    );
}
