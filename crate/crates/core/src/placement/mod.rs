//! Scene layout: where each cutout goes, at what scale and rotation.
//!
//! A [`SceneBlueprint`] is geometry only. Every blend mode renders the same
//! blueprint, and annotation boxes are derived from it rather than from pixels.

mod config;
mod sampler;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::imgcore::BoundingBox;
pub use config::{AugmentConfig, ConstraintConfig};
pub use sampler::{sample_placement, Footprint, PlacedGeometry};

#[derive(Debug, thiserror::Error)]
pub enum PlacementError {
    #[error("no valid position found within the attempt budget")]
    PlacementExhausted,
    #[error("transformed object has no foreground")]
    Degenerate,
    #[error("canvas {width}x{height} is smaller than 32x32")]
    CanvasTooSmall { width: u32, height: u32 },
    #[error("scene {0}: no target object could be placed")]
    SceneUnsatisfiable(String),
    #[error("asset library has no target instances")]
    NoTargets,
    #[error("unknown instance or view {0}")]
    UnknownRef(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("malformed blueprint: {0}")]
    Parse(String),
}

/// The object library as seen by the layout stage.
pub trait SceneAssets {
    /// Labels that receive annotations.
    fn target_labels(&self) -> &[String];
    /// Labels pasted as unannotated clutter.
    fn distractor_labels(&self) -> &[String];
    /// View ids of `label`, sorted; the first is the canonical view.
    fn view_ids(&self, label: &str) -> &[String];
    fn footprint(&self, label: &str, view: &str, scale: f64, rotation_deg: f64) -> Result<(u32, u32), PlacementError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub instance_label: String,
    pub view_id: String,
    pub scale: f64,
    /// Degrees, counter-clockwise as displayed.
    pub rotation: f64,
    /// Top-left corner of the transformed cutout on the background.
    pub anchor: [i64; 2],
    /// Size of the transformed cutout.
    pub width: u32,
    pub height: u32,
    pub z_order: u32,
    pub is_distractor: bool,
}

impl Placement {
    /// Unclipped box of the transformed cutout.
    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::from_anchor(self.anchor[0], self.anchor[1], self.width.max(1), self.height.max(1))
            .expect("positive dims")
    }
}

/// Limits that were in force when a blueprint was composed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppliedConstraints {
    pub max_pair_iou: f64,
    pub min_visible_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneBlueprint {
    pub blueprint_id: String,
    pub background_ref: String,
    pub canvas: [u32; 2],
    #[serde(with = "hex_seed")]
    pub scene_seed: u64,
    pub constraints: AppliedConstraints,
    #[serde(default)]
    pub placements: Vec<Placement>,
}

mod hex_seed {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:#018x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        let digits = s.strip_prefix("0x").ok_or_else(|| D::Error::custom("seed must start with 0x"))?;
        u64::from_str_radix(digits, 16).map_err(D::Error::custom)
    }
}

impl SceneBlueprint {
    /// Human-readable TOML. Equal blueprints serialize to equal bytes.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("blueprint fields are all serializable")
    }

    pub fn from_text(text: &str) -> Result<Self, PlacementError> {
        toml::from_str(text).map_err(|e| PlacementError::Parse(e.to_string()))
    }

    pub fn canvas_dims(&self) -> (u32, u32) {
        (self.canvas[0], self.canvas[1])
    }
}

/// What a scene is built from, before any randomness is spent.
#[derive(Debug, Clone)]
pub struct SceneRequest {
    pub blueprint_id: String,
    pub background_ref: String,
    pub canvas: (u32, u32),
    pub scene_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Target,
    Distractor,
}

fn count_in(rng: &mut impl Rng, [lo, hi]: [u32; 2]) -> u32 {
    rng.gen_range(lo..=hi)
}

/// Lay out one scene. All randomness comes from `request.scene_seed`.
///
/// Target and distractor slots are drawn, shuffled into a paste order, and
/// placed one at a time; objects whose placement attempts run out are
/// dropped. The scene fails only when no target lands.
pub fn compose_blueprint(
    request: &SceneRequest,
    assets: &impl SceneAssets,
    aug: &AugmentConfig,
    cons: &ConstraintConfig,
) -> Result<SceneBlueprint, PlacementError> {
    aug.validate()?;
    cons.validate()?;
    let targets = assets.target_labels();
    if targets.is_empty() {
        return Err(PlacementError::NoTargets);
    }
    let distractors = assets.distractor_labels();
    let mut rng = ChaCha8Rng::seed_from_u64(request.scene_seed);

    let n_targets = count_in(&mut rng, aug.objects_per_scene);
    let mut n_distractors = count_in(&mut rng, aug.distractors_per_scene);
    if distractors.is_empty() {
        n_distractors = 0;
    }
    let mut slots: Vec<Slot> = std::iter::repeat_n(Slot::Target, n_targets as usize)
        .chain(std::iter::repeat_n(Slot::Distractor, n_distractors as usize))
        .collect();
    slots.shuffle(&mut rng);

    let mut placements: Vec<Placement> = Vec::new();
    let mut boxes: Vec<BoundingBox> = Vec::new();
    for slot in slots {
        let pool = match slot {
            Slot::Target => targets,
            Slot::Distractor => distractors,
        };
        let label = &pool[rng.gen_range(0..pool.len())];
        let views = assets.view_ids(label);
        if views.is_empty() {
            return Err(PlacementError::UnknownRef(label.clone()));
        }
        let view = if aug.use_view_sampling {
            &views[rng.gen_range(0..views.len())]
        } else {
            &views[0]
        };
        let footprint = LibraryFootprint { assets, label, view };
        match sample_placement(&mut rng, &boxes, &footprint, request.canvas, aug, cons) {
            Ok(g) => {
                boxes.push(g.bbox());
                placements.push(Placement {
                    instance_label: label.clone(),
                    view_id: view.clone(),
                    scale: g.scale,
                    rotation: g.rotation,
                    anchor: [g.anchor.0, g.anchor.1],
                    width: g.width,
                    height: g.height,
                    z_order: placements.len() as u32,
                    is_distractor: slot == Slot::Distractor,
                });
            }
            Err(PlacementError::PlacementExhausted | PlacementError::Degenerate) => {
                log::debug!("{}: dropped {label}/{view}", request.blueprint_id);
            }
            Err(e) => return Err(e),
        }
    }
    if !placements.iter().any(|p| !p.is_distractor) {
        return Err(PlacementError::SceneUnsatisfiable(request.blueprint_id.clone()));
    }
    Ok(SceneBlueprint {
        blueprint_id: request.blueprint_id.clone(),
        background_ref: request.background_ref.clone(),
        canvas: [request.canvas.0, request.canvas.1],
        scene_seed: request.scene_seed,
        constraints: AppliedConstraints {
            max_pair_iou: cons.effective_max_iou(),
            min_visible_fraction: cons.effective_min_visible(),
        },
        placements,
    })
}

struct LibraryFootprint<'a, A> {
    assets: &'a A,
    label: &'a str,
    view: &'a str,
}

impl<A: SceneAssets> Footprint for LibraryFootprint<'_, A> {
    fn transformed_dims(&self, scale: f64, rotation_deg: f64) -> Result<(u32, u32), PlacementError> {
        self.assets.footprint(self.label, self.view, scale, rotation_deg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxRecord {
    pub label: String,
    pub bbox: BoundingBox,
    pub is_distractor: bool,
}

/// Canvas-clipped boxes of every placement, in paste order.
pub fn blueprint_boxes(bp: &SceneBlueprint, canvas: (u32, u32)) -> Vec<BoxRecord> {
    bp.placements
        .iter()
        .filter_map(|p| {
            p.bbox().clip_to(canvas.0, canvas.1).map(|bbox| BoxRecord {
                label: p.instance_label.clone(),
                bbox,
                is_distractor: p.is_distractor,
            })
        })
        .collect()
}
