//! Foreground masks for object photos shot against a plain backdrop.
//!
//! Background color is estimated from a frame along the image border; pixels
//! far from it in RGB space become foreground. The raw mask is then cleaned
//! with an open/close pass, reduced to its largest 4-connected component and
//! optionally hole-filled.

pub mod morphology;

use serde::{Deserialize, Serialize};

use crate::imgcore::{ImgError, Raster};
use morphology::{fill_holes, largest_component, open_close, BinaryGrid};

/// Smallest image side accepted by [`extract_mask`].
pub const MIN_IMAGE_SIDE: u32 = 32;

#[derive(Debug, thiserror::Error)]
pub enum MaskError {
    #[error("border width {border} invalid for a {width}x{height} image")]
    BadBorder { border: u32, width: u32, height: u32 },
    #[error("image {width}x{height} is smaller than {min}x{min}", min = MIN_IMAGE_SIDE)]
    ImageTooSmall { width: u32, height: u32 },
    #[error("no foreground found")]
    NoForeground,
    #[error("morphology erased the whole mask")]
    MaskVanished,
    #[error("invalid mask parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Image(#[from] ImgError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskParams {
    pub border_width: u32,
    /// Euclidean RGB distance above which a pixel counts as foreground.
    pub color_threshold: f64,
    pub morph_radius: u32,
    pub fill_holes: bool,
}

impl Default for MaskParams {
    fn default() -> Self {
        Self {
            border_width: 10,
            color_threshold: 30.0,
            morph_radius: 2,
            fill_holes: true,
        }
    }
}

impl MaskParams {
    pub fn validate(&self) -> Result<(), MaskError> {
        if self.border_width < 1 {
            return Err(MaskError::BadParams("border_width must be >= 1".into()));
        }
        if !(1.0..=441.0).contains(&self.color_threshold) {
            return Err(MaskError::BadParams("color_threshold must lie in [1, 441]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundStats {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

/// Mean and population standard deviation of the border frame `border_width`
/// pixels wide.
pub fn estimate_background_color(img: &Raster, border_width: u32) -> Result<BackgroundStats, MaskError> {
    let (w, h) = img.dims();
    if img.channels() != 3 {
        return Err(ImgError::BadChannels(img.channels()).into());
    }
    if border_width == 0 || 2 * border_width >= w.min(h) {
        return Err(MaskError::BadBorder {
            border: border_width,
            width: w,
            height: h,
        });
    }
    let mut sum = [0f64; 3];
    let mut sum_sq = [0f64; 3];
    let mut n = 0f64;
    let mut add = |x: u32, y: u32| {
        let p = img.pixel(x, y);
        for c in 0..3 {
            let v = p[c] as f64;
            sum[c] += v;
            sum_sq[c] += v * v;
        }
        n += 1.0;
    };
    let b = border_width;
    for y in (0..b).chain(h - b..h) {
        for x in 0..w {
            add(x, y);
        }
    }
    for y in b..h - b {
        for x in (0..b).chain(w - b..w) {
            add(x, y);
        }
    }
    let mean = sum.map(|s| s / n);
    let mut std = [0f64; 3];
    for c in 0..3 {
        std[c] = (sum_sq[c] / n - mean[c] * mean[c]).max(0.0).sqrt();
    }
    Ok(BackgroundStats { mean, std })
}

fn grid_from_mask(mask: &Raster) -> BinaryGrid {
    BinaryGrid {
        width: mask.width() as usize,
        height: mask.height() as usize,
        cells: mask.data().iter().map(|&v| v != 0).collect(),
    }
}

fn mask_from_grid(g: &BinaryGrid) -> Raster {
    let data = g.cells.iter().map(|&c| if c { 255 } else { 0 }).collect();
    Raster::new(g.width as u32, g.height as u32, 1, data).expect("grid dimensions are nonzero")
}

/// Pixels farther than `threshold` from `background` in RGB space.
pub fn threshold_foreground(img: &Raster, background: [f64; 3], threshold: f64) -> Raster {
    let t2 = threshold * threshold;
    let data = img
        .data()
        .chunks_exact(3)
        .map(|p| {
            let d2: f64 = (0..3).map(|c| (p[c] as f64 - background[c]).powi(2)).sum();
            if d2 > t2 {
                255
            } else {
                0
            }
        })
        .collect();
    Raster::new(img.width(), img.height(), 1, data).expect("same dims as input")
}

/// Open then close `mask` with a square of radius `morph_radius`.
pub fn refine_mask(mask: &Raster, morph_radius: u32) -> Result<Raster, MaskError> {
    if mask.channels() != 1 {
        return Err(ImgError::BadChannels(mask.channels()).into());
    }
    if mask.count_nonzero() == 0 {
        return Err(ImgError::EmptyMask.into());
    }
    let out = open_close(&grid_from_mask(mask), morph_radius as usize);
    if out.count() == 0 {
        return Err(MaskError::MaskVanished);
    }
    Ok(mask_from_grid(&out))
}

/// Binary foreground mask (0/255) of an object photographed on a plain backdrop.
pub fn extract_mask(img: &Raster, params: &MaskParams) -> Result<Raster, MaskError> {
    params.validate()?;
    let (w, h) = img.dims();
    if w < MIN_IMAGE_SIDE || h < MIN_IMAGE_SIDE {
        return Err(MaskError::ImageTooSmall { width: w, height: h });
    }
    let bg = estimate_background_color(img, params.border_width)?;
    let raw = threshold_foreground(img, bg.mean, params.color_threshold);
    if raw.count_nonzero() == 0 {
        return Err(MaskError::NoForeground);
    }
    let cleaned = open_close(&grid_from_mask(&raw), params.morph_radius as usize);
    let mut mask = largest_component(&cleaned);
    if mask.count() == 0 {
        return Err(MaskError::NoForeground);
    }
    if params.fill_holes {
        mask = fill_holes(&mask);
    }
    Ok(mask_from_grid(&mask))
}
