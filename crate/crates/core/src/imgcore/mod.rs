//! Rasters, boxes and cutouts shared by every stage of the pipeline.

mod bbox;
mod cutout;
mod raster;

use std::path::PathBuf;

pub use bbox::{iou, visible_fraction, BoundingBox};
pub use cutout::{transform_cutout, transformed_extent, Cutout};
pub use raster::Raster;

#[derive(Debug, thiserror::Error)]
pub enum ImgError {
    #[error("raster must be at least 1x1")]
    EmptyRaster,
    #[error("unsupported channel count {0}")]
    BadChannels(u8),
    #[error("raster data length {actual} does not match expected {expected}")]
    BadLength { expected: usize, actual: usize },
    #[error("crop region outside raster")]
    BadCrop,
    #[error("invalid box ({xmin}, {ymin}, {xmax}, {ymax})")]
    InvalidBox { xmin: f64, ymin: f64, xmax: f64, ymax: f64 },
    #[error("color {color:?} and alpha {alpha:?} dimensions differ")]
    DimensionMismatch { color: (u32, u32), alpha: (u32, u32) },
    #[error("alpha mask has no foreground")]
    EmptyMask,
    #[error("alpha mask must be binary")]
    NonBinaryAlpha,
    #[error("cutout canvas is not tight around its mask")]
    NotTight,
    #[error("transform leaves no foreground pixels")]
    DegenerateTransform,
    #[error("cannot read image {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
    #[error("cannot write image {path}: {reason}")]
    Write { path: PathBuf, reason: String },
}
