use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::EvalError;
use crate::dataset::DatasetManifest;
use crate::placement::SceneBlueprint;

/// Fixed-width bins over `[0, 1]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn unit(bins: usize) -> Self {
        Self {
            edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
            counts: vec![0; bins],
        }
    }

    pub fn add(&mut self, v: f64) {
        let bins = self.counts.len();
        let i = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        self.counts[i] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub scenes: usize,
    pub images: usize,
    /// Scenes per background that was used at least once.
    pub background_usage: BTreeMap<String, u64>,
    /// Placements per instance label.
    pub instance_frequency: BTreeMap<String, u64>,
    /// Placements per `label/view`.
    pub view_coverage: BTreeMap<String, u64>,
    /// `sqrt(box area / canvas area)` of every annotated box.
    pub box_scale: Histogram,
    /// Fraction of each annotated box covered by boxes pasted above it.
    pub occlusion: Histogram,
}

impl StatsReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenes {} images {}", self.scenes, self.images);
        let uses: BTreeSet<u64> = self.background_usage.values().copied().collect();
        let _ = writeln!(
            s,
            "backgrounds {} (uses per background: {})",
            self.background_usage.len(),
            uses.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
        );
        let total: u64 = self.instance_frequency.values().sum();
        let _ = writeln!(s, "instances:");
        for (k, v) in &self.instance_frequency {
            let _ = writeln!(s, "  {k} {v} ({:.1}%)", 100.0 * *v as f64 / total.max(1) as f64);
        }
        let _ = writeln!(s, "views:");
        for (k, v) in &self.view_coverage {
            let _ = writeln!(s, "  {k} {v}");
        }
        for (name, h) in [("box scale", &self.box_scale), ("occlusion", &self.occlusion)] {
            let _ = writeln!(s, "{name}:");
            for (i, c) in h.counts.iter().enumerate() {
                let _ = writeln!(s, "  [{:.1}, {:.1}) {c}", h.edges[i], h.edges[i + 1]);
            }
        }
        s
    }
}

/// Share of `target` covered by the union of `above`, counted on the pixel grid.
fn covered_fraction(target: [i64; 4], above: &[[i64; 4]]) -> f64 {
    let (w, h) = ((target[2] - target[0]) as usize, (target[3] - target[1]) as usize);
    if w == 0 || h == 0 {
        return 0.0;
    }
    let mut cov = vec![false; w * h];
    for b in above {
        let x0 = b[0].max(target[0]);
        let y0 = b[1].max(target[1]);
        let x1 = b[2].min(target[2]);
        let y1 = b[3].min(target[3]);
        for y in y0..y1 {
            let row = (y - target[1]) as usize * w;
            for x in x0..x1 {
                cov[row + (x - target[0]) as usize] = true;
            }
        }
    }
    cov.iter().filter(|&&c| c).count() as f64 / (w * h) as f64
}

/// Usage and geometry statistics computed from the manifest and blueprints.
pub fn dataset_stats(dir: &Path) -> Result<StatsReport, EvalError> {
    let manifest = DatasetManifest::read(dir)?;
    let mut blueprints: BTreeMap<&str, &str> = BTreeMap::new();
    for r in &manifest.records {
        blueprints.entry(&r.blueprint_id).or_insert(&r.blueprint);
    }
    let mut report = StatsReport {
        scenes: blueprints.len(),
        images: manifest.records.len(),
        background_usage: BTreeMap::new(),
        instance_frequency: BTreeMap::new(),
        view_coverage: BTreeMap::new(),
        box_scale: Histogram::unit(10),
        occlusion: Histogram::unit(10),
    };
    for rel in blueprints.values() {
        let path = dir.join(rel);
        let text = std::fs::read_to_string(&path).map_err(|e| EvalError::CorruptDataset(format!("{}: {e}", path.display())))?;
        let bp = SceneBlueprint::from_text(&text).map_err(|e| EvalError::CorruptDataset(format!("{}: {e}", path.display())))?;
        *report.background_usage.entry(bp.background_ref.clone()).or_default() += 1;
        let [cw, ch] = bp.canvas;
        let clip = |p: &crate::placement::Placement| {
            [
                p.anchor[0].max(0),
                p.anchor[1].max(0),
                (p.anchor[0] + p.width as i64).min(cw as i64),
                (p.anchor[1] + p.height as i64).min(ch as i64),
            ]
        };
        for p in &bp.placements {
            *report.instance_frequency.entry(p.instance_label.clone()).or_default() += 1;
            *report.view_coverage.entry(format!("{}/{}", p.instance_label, p.view_id)).or_default() += 1;
            if p.is_distractor {
                continue;
            }
            let b = clip(p);
            let area = ((b[2] - b[0]).max(0) * (b[3] - b[1]).max(0)) as f64;
            report.box_scale.add((area / (cw as f64 * ch as f64)).sqrt());
            let above: Vec<[i64; 4]> = bp.placements.iter().filter(|q| q.z_order > p.z_order).map(clip).collect();
            report.occlusion.add(covered_fraction(b, &above));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_edges() {
        let mut h = Histogram::unit(10);
        for v in [0.0, 0.05, 0.1, 0.99, 1.0] {
            h.add(v);
        }
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[9], 2);
    }

    #[test]
    fn coverage_union_not_sum() {
        let t = [0, 0, 10, 10];
        assert_eq!(covered_fraction(t, &[[0, 0, 5, 10], [0, 0, 5, 10]]), 0.5);
        assert_eq!(covered_fraction(t, &[[-5, -5, 20, 20]]), 1.0);
        assert_eq!(covered_fraction(t, &[]), 0.0);
    }
}
