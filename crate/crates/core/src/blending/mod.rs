//! Rendering blueprints into pixels under a chosen blend mode.

mod composite;
pub mod poisson;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::imgcore::{transform_cutout, BoundingBox, Cutout, ImgError, Raster};
use crate::placement::{blueprint_boxes, SceneBlueprint};
pub use composite::{blurred_alpha, gaussian_kernel, kernel_radius, paste_direct, paste_gaussian};
pub use poisson::{paste_poisson, solve_poisson, PoissonReport};

#[derive(Debug, thiserror::Error)]
pub enum BlendError {
    #[error("cutout does not overlap the canvas")]
    NoOverlap,
    #[error("background must have 3 channels, got {0}")]
    BadBackground(u8),
    #[error("invalid blend mode: {0}")]
    BadMode(String),
    #[error("poisson solve produced non-finite values")]
    SolverDiverged,
    #[error("asset lookup failed: {0}")]
    Asset(String),
    #[error("placement {index} expects a {expected:?} cutout, transform produced {actual:?}")]
    BlueprintMismatch { index: usize, expected: (u32, u32), actual: (u32, u32) },
    #[error("background is {actual:?} but blueprint canvas is {expected:?}")]
    CanvasMismatch { expected: (u32, u32), actual: (u32, u32) },
    #[error("no blend modes requested")]
    NoModes,
    #[error("scene {id}: {source}")]
    Scene {
        id: String,
        #[source]
        source: Box<BlendError>,
    },
    #[error(transparent)]
    Image(#[from] ImgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BlendMode {
    Direct,
    Gaussian {
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    Poisson {
        #[serde(default = "default_tolerance")]
        tolerance: f64,
        #[serde(default = "default_max_iters")]
        max_iters: u32,
    },
}

fn default_sigma() -> f64 {
    2.0
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_max_iters() -> u32 {
    10_000
}

impl BlendMode {
    pub fn gaussian() -> Self {
        BlendMode::Gaussian { sigma: default_sigma() }
    }

    pub fn poisson() -> Self {
        BlendMode::Poisson {
            tolerance: default_tolerance(),
            max_iters: default_max_iters(),
        }
    }

    /// The three modes of the standard same-scene multi-blend recipe.
    pub fn all_defaults() -> Vec<BlendMode> {
        vec![BlendMode::Direct, BlendMode::gaussian(), BlendMode::poisson()]
    }

    /// Short name used in file names and manifests.
    pub fn tag(&self) -> &'static str {
        match self {
            BlendMode::Direct => "direct",
            BlendMode::Gaussian { .. } => "gaussian",
            BlendMode::Poisson { .. } => "poisson",
        }
    }

    pub fn validate(&self) -> Result<(), BlendError> {
        match *self {
            BlendMode::Direct => Ok(()),
            BlendMode::Gaussian { sigma } if sigma > 0.0 && sigma.is_finite() => Ok(()),
            BlendMode::Poisson { tolerance, max_iters } if tolerance > 0.0 && max_iters >= 1 => Ok(()),
            other => Err(BlendError::BadMode(format!("{other:?}"))),
        }
    }

    /// How far outside a mask this mode may change pixels.
    pub fn spill_radius(&self) -> u32 {
        match *self {
            BlendMode::Gaussian { sigma } => kernel_radius(sigma),
            _ => 0,
        }
    }
}

/// Paste one cutout into `canvas` in place.
pub fn paste_in_place(
    canvas: &mut Raster,
    cutout: &Cutout,
    anchor: (i64, i64),
    mode: BlendMode,
) -> Result<Option<PoissonReport>, BlendError> {
    match mode {
        BlendMode::Direct => composite::paste_direct_in_place(canvas, cutout, anchor).map(|_| None),
        BlendMode::Gaussian { sigma } => composite::paste_gaussian_in_place(canvas, cutout, anchor, sigma).map(|_| None),
        BlendMode::Poisson { tolerance, max_iters } => {
            poisson::paste_poisson_in_place(canvas, cutout, anchor, tolerance, max_iters).map(Some)
        }
    }
}

/// Pixel sources needed to render a blueprint.
pub trait RenderAssets {
    fn background(&self, background_ref: &str) -> Result<Arc<Raster>, BlendError>;
    fn cutout(&self, label: &str, view: &str) -> Result<Arc<Cutout>, BlendError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: String,
    pub bbox: BoundingBox,
}

/// Solver bookkeeping for one rendered image.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RenderMeta {
    pub poisson_solves: u32,
    pub solver_iterations: u64,
    pub max_relative_residual: f64,
    pub unconverged: bool,
}

#[derive(Debug, Clone)]
pub struct RenderedScene {
    pub image: Raster,
    pub annotations: Vec<Annotation>,
    pub blueprint_id: String,
    pub blend_mode_tag: String,
    pub meta: RenderMeta,
}

/// Annotated boxes of a blueprint: every non-distractor placement, clipped.
pub fn blueprint_annotations(bp: &SceneBlueprint) -> Vec<Annotation> {
    blueprint_boxes(bp, bp.canvas_dims())
        .into_iter()
        .filter(|b| !b.is_distractor)
        .map(|b| Annotation {
            label: b.label,
            bbox: b.bbox,
        })
        .collect()
}

fn with_context(id: &str) -> impl Fn(BlendError) -> BlendError + '_ {
    move |e| BlendError::Scene {
        id: id.to_string(),
        source: Box::new(e),
    }
}

/// Transformed cutouts of a blueprint, checked against the reserved boxes.
pub fn prepare_cutouts(bp: &SceneBlueprint, assets: &impl RenderAssets) -> Result<Vec<Cutout>, BlendError> {
    let mut order: Vec<_> = bp.placements.iter().enumerate().collect();
    order.sort_by_key(|(_, p)| p.z_order);
    order
        .into_iter()
        .map(|(index, p)| {
            let src = assets.cutout(&p.instance_label, &p.view_id)?;
            let t = transform_cutout(&src, p.scale, p.rotation)?;
            if t.dims() != (p.width, p.height) {
                return Err(BlendError::BlueprintMismatch {
                    index,
                    expected: (p.width, p.height),
                    actual: t.dims(),
                });
            }
            Ok(t)
        })
        .collect()
}

fn render_prepared(
    bp: &SceneBlueprint,
    background: &Raster,
    cutouts: &[Cutout],
    mode: BlendMode,
) -> Result<RenderedScene, BlendError> {
    mode.validate()?;
    if background.dims() != bp.canvas_dims() {
        return Err(BlendError::CanvasMismatch {
            expected: bp.canvas_dims(),
            actual: background.dims(),
        });
    }
    let mut placements: Vec<_> = bp.placements.iter().collect();
    placements.sort_by_key(|p| p.z_order);
    let mut image = background.clone();
    let mut meta = RenderMeta::default();
    for (p, cutout) in placements.iter().zip(cutouts) {
        if let Some(report) = paste_in_place(&mut image, cutout, (p.anchor[0], p.anchor[1]), mode)? {
            if !report.fell_back {
                meta.poisson_solves += 1;
                meta.solver_iterations += report.iterations as u64;
                meta.max_relative_residual = meta.max_relative_residual.max(report.max_relative_residual);
                meta.unconverged |= report.unconverged;
            }
        }
    }
    Ok(RenderedScene {
        image,
        annotations: blueprint_annotations(bp),
        blueprint_id: bp.blueprint_id.clone(),
        blend_mode_tag: mode.tag().to_string(),
        meta,
    })
}

/// Paste every placement in z-order over the blueprint's background.
pub fn render_scene(bp: &SceneBlueprint, mode: BlendMode, assets: &impl RenderAssets) -> Result<RenderedScene, BlendError> {
    render_multiblend(bp, &[mode], assets).map(|mut v| v.remove(0))
}

/// Render one blueprint under several modes; every output shares the same
/// placements and annotations.
pub fn render_multiblend(
    bp: &SceneBlueprint,
    modes: &[BlendMode],
    assets: &impl RenderAssets,
) -> Result<Vec<RenderedScene>, BlendError> {
    if modes.is_empty() {
        return Err(BlendError::NoModes);
    }
    let ctx = with_context(&bp.blueprint_id);
    let background = assets.background(&bp.background_ref).map_err(&ctx)?;
    let cutouts = prepare_cutouts(bp, assets).map_err(&ctx)?;
    modes
        .iter()
        .map(|&m| render_prepared(bp, &background, &cutouts, m).map_err(&ctx))
        .collect()
}
