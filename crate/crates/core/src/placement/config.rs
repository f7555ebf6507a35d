use serde::{Deserialize, Serialize};

use super::PlacementError;

/// Occlusion and truncation limits for pasted objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintConfig {
    /// Largest box IoU allowed between any two pasted objects.
    pub max_pair_iou: f64,
    /// Smallest fraction of an object's box that must land on the canvas.
    pub min_visible_fraction: f64,
    pub allow_truncation: bool,
    pub allow_occlusion: bool,
    pub max_attempts_per_object: u32,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        Self {
            max_pair_iou: 0.75,
            min_visible_fraction: 0.25,
            allow_truncation: true,
            allow_occlusion: true,
            max_attempts_per_object: 100,
        }
    }
}

impl ConstraintConfig {
    pub fn validate(&self) -> Result<(), PlacementError> {
        if !(0.0..=1.0).contains(&self.max_pair_iou) {
            return Err(PlacementError::BadConfig("max_pair_iou must lie in [0, 1]".into()));
        }
        if !(self.min_visible_fraction > 0.0 && self.min_visible_fraction <= 1.0) {
            return Err(PlacementError::BadConfig("min_visible_fraction must lie in (0, 1]".into()));
        }
        if self.max_attempts_per_object == 0 {
            return Err(PlacementError::BadConfig("max_attempts_per_object must be >= 1".into()));
        }
        Ok(())
    }

    /// Zero when occlusion is disabled.
    pub fn effective_max_iou(&self) -> f64 {
        if self.allow_occlusion {
            self.max_pair_iou
        } else {
            0.0
        }
    }

    /// One when truncation is disabled.
    pub fn effective_min_visible(&self) -> f64 {
        if self.allow_truncation {
            self.min_visible_fraction
        } else {
            1.0
        }
    }
}

/// Per-object random augmentation and per-scene object counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    /// In-plane rotation interval in degrees; must be symmetric about zero.
    pub rotation_range: [f64; 2],
    /// Scale interval relative to the source cutout size.
    pub scale_range: [f64; 2],
    /// Sample uniformly over every captured view of an instance instead of
    /// always using its first (canonical) view.
    pub use_view_sampling: bool,
    pub objects_per_scene: [u32; 2],
    pub distractors_per_scene: [u32; 2],
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            rotation_range: [-30.0, 30.0],
            scale_range: [0.3, 0.9],
            use_view_sampling: true,
            objects_per_scene: [3, 8],
            distractors_per_scene: [0, 3],
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<(), PlacementError> {
        let [r0, r1] = self.rotation_range;
        if !(r0.is_finite() && r1.is_finite()) || r0 > r1 || r0 != -r1 {
            return Err(PlacementError::BadConfig("rotation_range must be [-a, a] with a >= 0".into()));
        }
        let [s0, s1] = self.scale_range;
        if !(s0.is_finite() && s1.is_finite()) || s0 <= 0.0 || s0 > s1 {
            return Err(PlacementError::BadConfig("scale_range must be positive and ordered".into()));
        }
        if self.objects_per_scene[0] > self.objects_per_scene[1] || self.objects_per_scene[1] == 0 {
            return Err(PlacementError::BadConfig("objects_per_scene must be a non-empty interval with max >= 1".into()));
        }
        if self.distractors_per_scene[0] > self.distractors_per_scene[1] {
            return Err(PlacementError::BadConfig("distractors_per_scene must be ordered".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn switches_override_limits() {
        let mut c = ConstraintConfig::default();
        assert_eq!((c.effective_max_iou(), c.effective_min_visible()), (0.75, 0.25));
        c.allow_occlusion = false;
        c.allow_truncation = false;
        assert_eq!((c.effective_max_iou(), c.effective_min_visible()), (0.0, 1.0));
    }

    #[test]
    fn rejects_bad_intervals() {
        let mut a = AugmentConfig::default();
        a.rotation_range = [-10.0, 20.0];
        assert!(a.validate().is_err());
        let mut a = AugmentConfig::default();
        a.scale_range = [0.9, 0.3];
        assert!(a.validate().is_err());
        let mut c = ConstraintConfig::default();
        c.min_visible_fraction = 0.0;
        assert!(c.validate().is_err());
        assert!(AugmentConfig::default().validate().is_ok());
    }
}
