//! AP at IoU 0.5 with the 50x30 ground-truth size filter.
//!
//! Ground truth comes from a small COCO file; the detections are a perfect
//! copy, a jittered copy with a false positive, and a shuffled-score copy.

use cutpaste::blending::Annotation;
use cutpaste::dataset::coco::{CocoDataset, CocoRecord};
use cutpaste::evaluator::{evaluate, CocoDetection, EvalConfig, Interpolation};
use cutpaste::imgcore::BoundingBox;

fn boxed(label: &str, x: f64, y: f64, w: f64, h: f64) -> Annotation {
    Annotation { label: label.into(), bbox: BoundingBox::new(x, y, x + w, y + h).unwrap() }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let img0 = vec![boxed("cereal", 10.0, 10.0, 120.0, 80.0), boxed("mug", 200.0, 40.0, 60.0, 70.0)];
    // the 40x20 mug is below the size filter and never counts
    let img1 = vec![boxed("mug", 50.0, 300.0, 90.0, 90.0), boxed("mug", 400.0, 400.0, 40.0, 20.0)];
    let records = [
        CocoRecord { file_name: "a.png".into(), width: 640, height: 480, annotations: &img0 },
        CocoRecord { file_name: "b.png".into(), width: 640, height: 480, annotations: &img1 },
    ];
    let gt = CocoDataset::build(&records, &["cereal".into(), "mug".into()])?;

    let perfect: Vec<CocoDetection> = gt
        .annotations
        .iter()
        .map(|a| CocoDetection { image_id: a.image_id, category_id: a.category_id, bbox: a.bbox, score: 1.0 })
        .collect();
    let mut noisy: Vec<CocoDetection> = perfect
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let mut d = d.clone();
            d.bbox[0] += 6.0;
            d.score = 0.9 - 0.1 * i as f64;
            d
        })
        .collect();
    noisy.push(CocoDetection { image_id: 1, category_id: 2, bbox: [500.0, 10.0, 80.0, 80.0], score: 0.95 });

    for interpolation in [Interpolation::AllPoint, Interpolation::Voc11] {
        let cfg = EvalConfig { interpolation, ..EvalConfig::default() };
        println!("{interpolation:?}");
        print!("{}", evaluate(&gt, &perfect, &cfg)?.to_table("perfect"));
        let r = evaluate(&gt, &noisy, &cfg)?;
        print!("{}", r.to_table("noisy"));
        println!("ground truth counted after filtering: {:?}", r.num_gt);
    }
    Ok(())
}
