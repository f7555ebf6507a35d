use rand::Rng;

use super::{AugmentConfig, ConstraintConfig, PlacementError};
use crate::imgcore::{iou, transform_cutout, transformed_extent, visible_fraction, BoundingBox, Cutout};

/// Size of an object after a scale and rotation, used to reserve its box
/// before any pixels are touched.
pub trait Footprint {
    fn transformed_dims(&self, scale: f64, rotation_deg: f64) -> Result<(u32, u32), PlacementError>;
}

/// A plain `w × h` rectangle.
impl Footprint for (u32, u32) {
    fn transformed_dims(&self, scale: f64, rotation_deg: f64) -> Result<(u32, u32), PlacementError> {
        if !(scale > 0.0) {
            return Err(PlacementError::Degenerate);
        }
        Ok(transformed_extent(self.0, self.1, scale, rotation_deg))
    }
}

/// The exact tight box the renderer will paste.
impl Footprint for Cutout {
    fn transformed_dims(&self, scale: f64, rotation_deg: f64) -> Result<(u32, u32), PlacementError> {
        transform_cutout(self, scale, rotation_deg)
            .map(|c| c.dims())
            .map_err(|_| PlacementError::Degenerate)
    }
}

/// Geometry of one placement on the canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedGeometry {
    pub scale: f64,
    pub rotation: f64,
    pub anchor: (i64, i64),
    pub width: u32,
    pub height: u32,
}

impl PlacedGeometry {
    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::from_anchor(self.anchor.0, self.anchor.1, self.width, self.height)
            .expect("transformed dims are at least 1x1")
    }
}

fn uniform_in(rng: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo < hi {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Anchor interval along one axis keeping at least `min_visible` pixels of a
/// `len`-long span on a `canvas`-long axis.
fn anchor_interval(len: u32, canvas: u32, min_fraction: f64) -> Option<(i64, i64)> {
    let need = ((min_fraction * len as f64) - 1e-9).ceil().max(1.0) as i64;
    if need > (len.min(canvas)) as i64 {
        return None;
    }
    Some((need - len as i64, canvas as i64 - need))
}

/// Draw a scale and rotation, then search for an anchor satisfying the
/// visibility and pairwise-IoU limits against `existing` boxes.
///
/// Each attempt draws an anchor uniformly from the rectangle of positions
/// where both axes alone could meet the visibility limit; draws failing
/// either constraint are rejected.
pub fn sample_placement(
    rng: &mut impl Rng,
    existing: &[BoundingBox],
    footprint: &impl Footprint,
    canvas: (u32, u32),
    aug: &AugmentConfig,
    cons: &ConstraintConfig,
) -> Result<PlacedGeometry, PlacementError> {
    let (cw, ch) = canvas;
    if cw < 32 || ch < 32 {
        return Err(PlacementError::CanvasTooSmall { width: cw, height: ch });
    }
    let rotation = uniform_in(rng, aug.rotation_range);
    let scale = uniform_in(rng, aug.scale_range);
    let (w, h) = footprint.transformed_dims(scale, rotation)?;

    let min_visible = cons.effective_min_visible();
    let max_iou = cons.effective_max_iou();
    let (Some((x0, x1)), Some((y0, y1))) = (
        anchor_interval(w, cw, min_visible),
        anchor_interval(h, ch, min_visible),
    ) else {
        return Err(PlacementError::PlacementExhausted);
    };
    let clipped_existing: Vec<Option<BoundingBox>> = existing.iter().map(|b| b.clip_to(cw, ch)).collect();

    for _ in 0..cons.max_attempts_per_object {
        let anchor = (rng.gen_range(x0..=x1), rng.gen_range(y0..=y1));
        let geom = PlacedGeometry {
            scale,
            rotation,
            anchor,
            width: w,
            height: h,
        };
        let bbox = geom.bbox();
        if visible_fraction(&bbox, cw, ch) < min_visible {
            continue;
        }
        let Some(clipped) = bbox.clip_to(cw, ch) else {
            continue;
        };
        let overlaps = existing.iter().zip(&clipped_existing).any(|(e, ec)| {
            iou(&bbox, e) > max_iou || ec.is_some_and(|ec| iou(&clipped, &ec) > max_iou)
        });
        if !overlaps {
            return Ok(geom);
        }
    }
    Err(PlacementError::PlacementExhausted)
}
