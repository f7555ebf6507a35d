use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ApResult, EvalConfig, EvalError, Interpolation};
use crate::dataset::coco::CocoDataset;
use crate::imgcore::{iou, BoundingBox};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: String,
    pub bbox: BoundingBox,
    pub score: f64,
}

/// A detection after matching, in descending-score order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchFlag {
    /// Position in the caller's detection list.
    pub index: usize,
    pub score: f64,
    pub true_positive: bool,
}

/// Stable descending sort by score: equal scores keep input order.
fn score_order(scores: impl Iterator<Item = f64>) -> Vec<usize> {
    let scores: Vec<f64> = scores.collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Keep ground truths at least `min_box` wide and tall.
pub fn filter_ground_truth<'a>(gts: &'a [(String, BoundingBox)], cfg: &EvalConfig) -> Vec<&'a (String, BoundingBox)> {
    gts.iter()
        .filter(|(_, b)| b.width() >= cfg.min_box.0 && b.height() >= cfg.min_box.1)
        .collect()
}

/// Greedy matching for one image. `gts` must already be size-filtered.
pub fn match_detections(dets: &[Detection], gts: &[(String, BoundingBox)], cfg: &EvalConfig) -> Vec<MatchFlag> {
    let mut used = vec![false; gts.len()];
    score_order(dets.iter().map(|d| d.score))
        .into_iter()
        .map(|i| {
            let d = &dets[i];
            let mut best: Option<(usize, f64)> = None;
            for (g, (label, gb)) in gts.iter().enumerate() {
                if used[g] || *label != d.label {
                    continue;
                }
                let o = iou(&d.bbox, gb);
                if best.is_none_or(|(_, b)| o > b) {
                    best = Some((g, o));
                }
            }
            let tp = match best {
                Some((g, o)) if o >= cfg.iou_threshold => {
                    used[g] = true;
                    true
                }
                _ => false,
            };
            MatchFlag { index: i, score: d.score, true_positive: tp }
        })
        .collect()
}

/// AP from `(score, is_tp)` pairs pooled across images for one class.
pub fn average_precision(flags: &[(f64, bool)], num_gt: usize, interpolation: Interpolation) -> Result<f64, EvalError> {
    if num_gt == 0 {
        return Err(EvalError::NoGroundTruth);
    }
    let order = score_order(flags.iter().map(|f| f.0));
    let mut tp = 0usize;
    let mut precision = Vec::with_capacity(order.len());
    let mut recall = Vec::with_capacity(order.len());
    for (k, &i) in order.iter().enumerate() {
        tp += flags[i].1 as usize;
        precision.push(tp as f64 / (k + 1) as f64);
        recall.push(tp as f64 / num_gt as f64);
    }
    // envelope[k] = max precision at any operating point from k onward
    let mut envelope = precision.clone();
    for k in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    let ap = match interpolation {
        Interpolation::AllPoint => {
            let mut area = 0.0;
            let mut prev_recall = 0.0;
            for k in 0..recall.len() {
                if recall[k] > prev_recall {
                    area += (recall[k] - prev_recall) * envelope[k];
                    prev_recall = recall[k];
                }
            }
            area
        }
        Interpolation::Voc11 => {
            let mut sum = 0.0;
            for t in 0..=10 {
                let r = t as f64 / 10.0;
                sum += recall
                    .iter()
                    .position(|&x| x >= r - 1e-12)
                    .map_or(0.0, |k| envelope[k]);
            }
            sum / 11.0
        }
    };
    Ok(ap)
}

/// One COCO-style detection result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoDetection {
    pub image_id: u64,
    pub category_id: u64,
    /// `[x, y, w, h]` in the half-open pixel convention.
    pub bbox: [f64; 4],
    pub score: f64,
}

pub fn parse_detections(text: &str) -> Result<Vec<CocoDetection>, EvalError> {
    let dets: Vec<CocoDetection> = serde_json::from_str(text).map_err(|e| EvalError::BadDetections(e.to_string()))?;
    if let Some(d) = dets.iter().find(|d| !d.score.is_finite()) {
        return Err(EvalError::BadDetections(format!("non-finite score on image {}", d.image_id)));
    }
    Ok(dets)
}

fn xywh_box(b: &[f64; 4]) -> Result<BoundingBox, EvalError> {
    BoundingBox::new(b[0], b[1], b[0] + b[2], b[1] + b[3]).map_err(|e| EvalError::BadDetections(e.to_string()))
}

/// Per-class AP over a COCO ground-truth file and a detection list.
pub fn evaluate(gt: &CocoDataset, dets: &[CocoDetection], cfg: &EvalConfig) -> Result<ApResult, EvalError> {
    cfg.validate()?;
    let label_of = |id: u64| {
        gt.category_name(id)
            .map(str::to_string)
            .ok_or_else(|| EvalError::BadDetections(format!("unknown category id {id}")))
    };
    let image_pos: BTreeMap<u64, usize> = gt.images.iter().enumerate().map(|(i, im)| (im.id, i)).collect();
    let mut per_image_gt: Vec<Vec<(String, BoundingBox)>> = vec![Vec::new(); gt.images.len()];
    for a in &gt.annotations {
        let pos = *image_pos
            .get(&a.image_id)
            .ok_or_else(|| EvalError::BadGroundTruth(format!("annotation {} names unknown image {}", a.id, a.image_id)))?;
        let b = xywh_box(&a.bbox).map_err(|e| EvalError::BadGroundTruth(e.to_string()))?;
        per_image_gt[pos].push((label_of(a.category_id)?, b));
    }
    let mut per_image_dets: Vec<Vec<Detection>> = vec![Vec::new(); gt.images.len()];
    for d in dets {
        let pos = *image_pos
            .get(&d.image_id)
            .ok_or_else(|| EvalError::BadDetections(format!("detection on unknown image {}", d.image_id)))?;
        per_image_dets[pos].push(Detection { label: label_of(d.category_id)?, bbox: xywh_box(&d.bbox)?, score: d.score });
    }

    let matched: Vec<(Vec<(String, bool, f64)>, Vec<String>)> = per_image_gt
        .par_iter()
        .zip(per_image_dets.par_iter())
        .map(|(gts, ds)| {
            let kept: Vec<(String, BoundingBox)> = filter_ground_truth(gts, cfg).into_iter().cloned().collect();
            let flags = match_detections(ds, &kept, cfg)
                .into_iter()
                .map(|m| (ds[m.index].label.clone(), m.true_positive, m.score))
                .collect();
            (flags, kept.into_iter().map(|(l, _)| l).collect())
        })
        .collect();

    let mut num_gt: BTreeMap<String, usize> = BTreeMap::new();
    let mut flags: BTreeMap<String, Vec<(f64, bool)>> = BTreeMap::new();
    for (image_flags, gt_labels) in matched {
        for l in gt_labels {
            *num_gt.entry(l).or_default() += 1;
        }
        for (l, tp, score) in image_flags {
            flags.entry(l).or_default().push((score, tp));
        }
    }
    let mut per_class = BTreeMap::new();
    let mut skipped = BTreeSet::new();
    let labels: BTreeSet<&String> = num_gt.keys().chain(flags.keys()).collect();
    for label in labels {
        let n = num_gt.get(label).copied().unwrap_or(0);
        let f = flags.get(label).map(Vec::as_slice).unwrap_or(&[]);
        match average_precision(f, n, cfg.interpolation) {
            Ok(ap) => {
                per_class.insert(label.clone(), ap);
            }
            Err(EvalError::NoGroundTruth) => {
                log::warn!("class {label} has detections but no ground truth; left out of mAP");
                skipped.insert(label.clone());
            }
            Err(e) => return Err(e),
        }
    }
    if per_class.is_empty() {
        return Err(EvalError::NoGroundTruth);
    }
    Ok(ApResult::new(per_class, num_gt, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    fn det(label: &str, bx: BoundingBox, score: f64) -> Detection {
        Detection { label: label.into(), bbox: bx, score }
    }

    #[test]
    fn single_match_cases() {
        let cfg = EvalConfig::default();
        let gt = vec![("a".to_string(), b(0.0, 0.0, 100.0, 100.0))];
        // IoU 0.6: 60x100 inside 100x100
        let m = match_detections(&[det("a", b(0.0, 0.0, 60.0, 100.0), 0.9)], &gt, &cfg);
        assert!(m[0].true_positive);
        let m = match_detections(&[det("a", b(0.0, 0.0, 40.0, 100.0), 0.9)], &gt, &cfg);
        assert!(!m[0].true_positive);
        let m = match_detections(&[det("b", b(0.0, 0.0, 100.0, 100.0), 0.9)], &gt, &cfg);
        assert!(!m[0].true_positive);
    }

    #[test]
    fn ground_truth_consumed_once() {
        let cfg = EvalConfig::default();
        let gt = vec![("a".to_string(), b(0.0, 0.0, 100.0, 100.0))];
        let dets = [det("a", b(0.0, 0.0, 90.0, 100.0), 0.5), det("a", b(0.0, 0.0, 100.0, 100.0), 0.8)];
        let m = match_detections(&dets, &gt, &cfg);
        assert_eq!((m[0].index, m[0].true_positive), (1, true));
        assert_eq!((m[1].index, m[1].true_positive), (0, false));
    }

    #[test]
    fn ties_keep_input_order() {
        let cfg = EvalConfig::default();
        let gt = vec![("a".to_string(), b(0.0, 0.0, 100.0, 100.0))];
        let dets = [det("a", b(0.0, 0.0, 90.0, 100.0), 0.5), det("a", b(0.0, 0.0, 100.0, 100.0), 0.5)];
        let m = match_detections(&dets, &gt, &cfg);
        assert_eq!(m.iter().map(|f| f.index).collect::<Vec<_>>(), vec![0, 1]);
        assert!(m[0].true_positive);
    }

    #[test]
    fn small_ap_cases() {
        let ap = |f: &[(f64, bool)], n| average_precision(f, n, Interpolation::AllPoint).unwrap();
        assert_eq!(ap(&[(1.0, true)], 1), 1.0);
        assert_eq!(ap(&[(0.9, false), (0.8, true)], 1), 0.5);
        assert_eq!(ap(&[], 3), 0.0);
        assert!(matches!(average_precision(&[(0.3, false)], 0, Interpolation::AllPoint), Err(EvalError::NoGroundTruth)));
    }

    #[test]
    fn voc11_on_half_recall() {
        // one TP of two GTs at precision 1: recall thresholds 0..0.5 score 1
        let ap = average_precision(&[(0.9, true)], 2, Interpolation::Voc11).unwrap();
        assert!((ap - 6.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn size_filter() {
        let cfg = EvalConfig::default();
        let gts = vec![
            ("a".to_string(), b(0.0, 0.0, 50.0, 30.0)),
            ("a".to_string(), b(0.0, 0.0, 49.0, 100.0)),
            ("a".to_string(), b(0.0, 0.0, 100.0, 29.5)),
        ];
        assert_eq!(filter_ground_truth(&gts, &cfg).len(), 1);
    }
}
