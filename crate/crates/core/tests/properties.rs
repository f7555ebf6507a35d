//! Property tests over randomly generated inputs that cross module borders.

use proptest::prelude::*;

use cutpaste::blending::{paste_direct, paste_gaussian, paste_poisson, kernel_radius};
use cutpaste::evaluator::{average_precision, Interpolation};
use cutpaste::imgcore::{iou, visible_fraction, Cutout, Raster};
use cutpaste::placement::{
    compose_blueprint, AugmentConfig, ConstraintConfig, PlacementError, SceneAssets, SceneBlueprint, SceneRequest,
};

/// Fixed-size rectangles standing in for cutouts.
struct Rects {
    targets: Vec<String>,
    distractors: Vec<String>,
    views: Vec<String>,
    size: (u32, u32),
}

impl SceneAssets for Rects {
    fn target_labels(&self) -> &[String] {
        &self.targets
    }
    fn distractor_labels(&self) -> &[String] {
        &self.distractors
    }
    fn view_ids(&self, _: &str) -> &[String] {
        &self.views
    }
    fn footprint(&self, _: &str, _: &str, scale: f64, rot: f64) -> Result<(u32, u32), PlacementError> {
        Ok(cutpaste::imgcore::transformed_extent(self.size.0, self.size.1, scale, rot))
    }
}

fn blob_cutout(w: u32, h: u32, seed: u64) -> Cutout {
    let color = Raster::from_fn_rgb(w, h, |x, y| {
        let v = (x * 37 + y * 11 + seed as u32 * 7) % 256;
        [v as u8, (255 - v) as u8, ((x * y) % 256) as u8]
    })
    .unwrap();
    let mask = Raster::from_fn_mask(w, h, |x, y| {
        let u = (x as f64 + 0.5) / w as f64 - 0.5;
        let v = (y as f64 + 0.5) / h as f64 - 0.5;
        if u * u + v * v < 0.24 { 255 } else { 0 }
    })
    .unwrap();
    Cutout::from_masked(&color, &mask, "o", "v").unwrap()
}

fn changed_outside(before: &Raster, after: &Raster, cutout: &Cutout, anchor: (i64, i64), r: i64) -> bool {
    let (w, h) = cutout.dims();
    let near_mask = |x: i64, y: i64| {
        for dy in -r..=r {
            for dx in -r..=r {
                let (lx, ly) = (x - anchor.0 + dx, y - anchor.1 + dy);
                if lx >= 0 && ly >= 0 && lx < w as i64 && ly < h as i64 && cutout.is_foreground(lx as u32, ly as u32) {
                    return true;
                }
            }
        }
        false
    };
    for y in 0..before.height() {
        for x in 0..before.width() {
            if before.pixel(x, y) != after.pixel(x, y) && !near_mask(x as i64, y as i64) {
                return true;
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composed_scenes_respect_limits(
        seed in any::<u64>(),
        max_iou in 0.0..0.9f64,
        min_vis in 0.05..1.0f64,
        w in 20u32..200,
        h in 20u32..200,
        cw in 64u32..400,
        ch in 64u32..400,
    ) {
        let assets = Rects {
            targets: vec!["a".into(), "b".into()],
            distractors: vec!["d".into()],
            views: vec!["v0".into(), "v1".into()],
            size: (w, h),
        };
        let cons = ConstraintConfig { max_pair_iou: max_iou, min_visible_fraction: min_vis, ..ConstraintConfig::default() };
        let req = SceneRequest { blueprint_id: "s".into(), background_ref: "bg".into(), canvas: (cw, ch), scene_seed: seed };
        match compose_blueprint(&req, &assets, &AugmentConfig::default(), &cons) {
            Ok(bp) => {
                let boxes: Vec<_> = bp.placements.iter().map(|p| p.bbox()).collect();
                for (i, a) in boxes.iter().enumerate() {
                    prop_assert!(visible_fraction(a, cw, ch) >= min_vis - 1e-12);
                    let ca = a.clip_to(cw, ch).expect("on canvas");
                    for b in &boxes[i + 1..] {
                        prop_assert!(iou(a, b) <= max_iou + 1e-12);
                        prop_assert!(iou(&ca, &b.clip_to(cw, ch).unwrap()) <= max_iou + 1e-12);
                    }
                }
                let again = SceneBlueprint::from_text(&bp.to_text()).unwrap();
                prop_assert_eq!(again, bp);
            }
            Err(PlacementError::SceneUnsatisfiable(_)) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn pastes_stay_local(
        w in 6u32..40,
        h in 6u32..40,
        ax in -30i64..70,
        ay in -30i64..70,
        seed in 0u64..1000,
        sigma in 0.5..3.0f64,
    ) {
        let bg = Raster::from_fn_rgb(72, 64, |x, y| [(x * 3) as u8, (y * 3) as u8, ((x + y) * 2) as u8]).unwrap();
        let c = blob_cutout(w, h, seed);
        let a = (ax, ay);
        let (cw, chh) = c.dims();
        let overlaps = ax < 72 && ay < 64 && ax + cw as i64 > 0 && ay + chh as i64 > 0;
        prop_assume!(overlaps);
        let d = paste_direct(&bg, &c, a).unwrap();
        prop_assert!(!changed_outside(&bg, &d, &c, a, 0));
        let g = paste_gaussian(&bg, &c, a, sigma).unwrap();
        prop_assert!(!changed_outside(&bg, &g, &c, a, kernel_radius(sigma) as i64));
        let (p, _) = paste_poisson(&bg, &c, a, 1e-6, 10_000).unwrap();
        prop_assert!(!changed_outside(&bg, &p, &c, a, 0));
    }

    #[test]
    fn ap_depends_only_on_ranking(
        flags in proptest::collection::vec((0.0..1.0f64, any::<bool>()), 0..30),
        extra_gt in 0usize..5,
        k in 0.1..10.0f64,
        shift in -5.0..5.0f64,
    ) {
        let num_gt = flags.iter().filter(|f| f.1).count() + extra_gt;
        prop_assume!(num_gt > 0);
        for interp in [Interpolation::AllPoint, Interpolation::Voc11] {
            let ap = average_precision(&flags, num_gt, interp).unwrap();
            prop_assert!((0.0..=1.0).contains(&ap));
            let mapped: Vec<(f64, bool)> = flags.iter().map(|&(s, t)| ((k * s).exp() + shift, t)).collect();
            let ap2 = average_precision(&mapped, num_gt, interp).unwrap();
            prop_assert!((ap - ap2).abs() < 1e-12, "{ap} vs {ap2}");
        }
    }
}
