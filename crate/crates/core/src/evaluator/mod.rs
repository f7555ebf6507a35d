//! Detection scoring and independent re-checks of generated datasets.

mod ap;
mod stats;
mod verify;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use ap::{
    average_precision, evaluate, filter_ground_truth, match_detections, parse_detections, CocoDetection, Detection,
    MatchFlag,
};
pub use stats::{dataset_stats, Histogram, StatsReport};
pub use verify::{verify_dataset, verify_locality, Violation, ViolationKind, VerificationReport};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("no ground truth boxes to score against")]
    NoGroundTruth,
    #[error("invalid evaluation config: {0}")]
    BadConfig(String),
    #[error("bad detections: {0}")]
    BadDetections(String),
    #[error("bad ground truth: {0}")]
    BadGroundTruth(String),
    #[error("corrupt dataset: {0}")]
    CorruptDataset(String),
}

impl From<crate::dataset::DatasetError> for EvalError {
    fn from(e: crate::dataset::DatasetError) -> Self {
        EvalError::CorruptDataset(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    AllPoint,
    Voc11,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub iou_threshold: f64,
    /// Minimum ground-truth `(width, height)`; smaller boxes are dropped.
    pub min_box: (f64, f64),
    pub interpolation: Interpolation,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { iou_threshold: 0.5, min_box: (50.0, 30.0), interpolation: Interpolation::AllPoint }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold <= 1.0) {
            return Err(EvalError::BadConfig(format!("iou_threshold {} not in (0, 1]", self.iou_threshold)));
        }
        if !(self.min_box.0 >= 0.0 && self.min_box.1 >= 0.0) {
            return Err(EvalError::BadConfig("min_box must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApResult {
    pub per_class: BTreeMap<String, f64>,
    /// Mean over classes that have ground truth.
    pub map: f64,
    pub num_gt: BTreeMap<String, usize>,
    /// Classes with detections but no ground truth.
    pub skipped: BTreeSet<String>,
}

impl ApResult {
    pub fn new(per_class: BTreeMap<String, f64>, num_gt: BTreeMap<String, usize>, skipped: BTreeSet<String>) -> Self {
        let map = if per_class.is_empty() {
            0.0
        } else {
            per_class.values().sum::<f64>() / per_class.len() as f64
        };
        Self { per_class, map, num_gt, skipped }
    }

    /// One header row of class names and one row of AP percentages, then mAP.
    pub fn to_table(&self, row_name: &str) -> String {
        let mut head = String::from("| run |");
        let mut row = format!("| {row_name} |");
        for (label, ap) in &self.per_class {
            let _ = write!(head, " {label} |");
            let _ = write!(row, " {:.1} |", ap * 100.0);
        }
        head.push_str(" mAP |");
        let _ = write!(row, " {:.1} |", self.map * 100.0);
        let mut out = format!("{head}\n{row}\n");
        for s in &self.skipped {
            let _ = writeln!(out, "skipped {s}: no ground truth");
        }
        out
    }
}
