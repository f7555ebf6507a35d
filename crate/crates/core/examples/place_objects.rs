//! Constrained scene layout. A blueprint records where each object goes; no
//! pixels are touched. Boxes are then re-checked against the limits.

use cutpaste::dataset::{scan_assets, AssetLibrary};
use cutpaste::fixtures::{write_fixture_assets, FixtureSpec};
use cutpaste::imgcore::{iou, visible_fraction};
use cutpaste::maskgen::MaskParams;
use cutpaste::placement::{compose_blueprint, AugmentConfig, ConstraintConfig, SceneRequest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let fx = write_fixture_assets(dir.path(), &FixtureSpec { backgrounds: 1, ..FixtureSpec::default() })?;
    let index = scan_assets(&fx.objects, None, &fx.backgrounds, &fx.distractor_labels)?;
    let library = AssetLibrary::new(index, MaskParams::default());

    let aug = AugmentConfig::default();
    let cons = ConstraintConfig::default();
    let request = SceneRequest {
        blueprint_id: "demo".into(),
        background_ref: "bg_00000.png".into(),
        canvas: (640, 480),
        scene_seed: 42,
    };
    let bp = compose_blueprint(&request, &library, &aug, &cons)?;
    print!("{}", bp.to_text());

    let boxes: Vec<_> = bp.placements.iter().map(|p| p.bbox()).collect();
    let mut worst = 0.0f64;
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            worst = worst.max(iou(&boxes[i], &boxes[j]));
        }
    }
    let least_visible = boxes.iter().map(|b| visible_fraction(b, 640, 480)).fold(1.0, f64::min);
    println!(
        "# {} placements, max pair IoU {worst:.3} (limit {}), min visible {least_visible:.3} (limit {})",
        boxes.len(),
        cons.max_pair_iou,
        cons.min_visible_fraction
    );
    Ok(())
}
