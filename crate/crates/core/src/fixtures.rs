//! Procedural asset libraries for demos and tests.
//!
//! Object views are textured shapes on a flat light backdrop, so the
//! automatic mask extractor has a clean border to estimate from. Backgrounds
//! are smooth gradients with ripples and grain. Everything is a pure
//! function of the seed.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imgcore::{ImgError, Raster};

/// Backdrop color used behind every object view.
pub const BACKDROP: [u8; 3] = [236, 236, 232];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Ellipse,
    Box,
    Diamond,
}

#[derive(Debug, Clone)]
pub struct FixtureSpec {
    pub instances: usize,
    pub views_per_instance: usize,
    /// Extra instances named `distractor_<k>`.
    pub distractors: usize,
    pub backgrounds: usize,
    pub background_size: (u32, u32),
    /// Side length of the square object-view images.
    pub view_size: u32,
    /// Write ground-truth masks next to the objects instead of relying on extraction.
    pub write_masks: bool,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            instances: 3,
            views_per_instance: 2,
            distractors: 1,
            backgrounds: 4,
            background_size: (640, 480),
            view_size: 160,
            write_masks: false,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixturePaths {
    pub root: PathBuf,
    pub objects: PathBuf,
    pub masks: PathBuf,
    pub backgrounds: PathBuf,
    pub target_labels: Vec<String>,
    pub distractor_labels: Vec<String>,
}

/// An antialias-free disk of radius `r` centered at `(cx, cy)`; pixel
/// centers strictly inside count as foreground.
pub fn disk_image(w: u32, h: u32, cx: f64, cy: f64, r: f64, fg: [u8; 3], bg: [u8; 3]) -> Result<Raster, ImgError> {
    Raster::from_fn_rgb(w, h, |x, y| {
        let dx = x as f64 + 0.5 - cx;
        let dy = y as f64 + 0.5 - cy;
        if dx * dx + dy * dy < r * r {
            fg
        } else {
            bg
        }
    })
}

fn inside(shape: Shape, u: f64, v: f64) -> bool {
    match shape {
        Shape::Ellipse => u * u + v * v < 1.0,
        Shape::Box => u.abs() < 1.0 && v.abs() < 1.0,
        Shape::Diamond => u.abs() + v.abs() < 1.0,
    }
}

/// One textured object view and its exact mask.
pub fn object_view(size: u32, shape: Shape, base: [u8; 3], seed: u64) -> Result<(Raster, Raster), ImgError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = 20.0;
    let half = size as f64 / 2.0;
    let rx = (half - margin) * rng.gen_range(0.7..1.0);
    let ry = (half - margin) * rng.gen_range(0.7..1.0);
    let freq = rng.gen_range(0.08..0.2);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let stripe: [f64; 3] = [rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0)];
    let fg = |x: u32, y: u32| {
        let u = (x as f64 + 0.5 - half) / rx;
        let v = (y as f64 + 0.5 - half) / ry;
        inside(shape, u, v)
    };
    let color = Raster::from_fn_rgb(size, size, |x, y| {
        if !fg(x, y) {
            return BACKDROP;
        }
        let t = ((x as f64 + 0.6 * y as f64) * freq + phase).sin();
        let mut px = [0u8; 3];
        for c in 0..3 {
            px[c] = (base[c] as f64 + stripe[c] * t).clamp(0.0, 255.0).round() as u8;
        }
        px
    })?;
    let mask = Raster::from_fn_mask(size, size, |x, y| if fg(x, y) { 255 } else { 0 })?;
    Ok((color, mask))
}

/// A smooth textured background.
pub fn background(w: u32, h: u32, seed: u64) -> Result<Raster, ImgError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c0: [f64; 3] = [rng.gen_range(30.0..220.0), rng.gen_range(30.0..220.0), rng.gen_range(30.0..220.0)];
    let c1: [f64; 3] = [rng.gen_range(30.0..220.0), rng.gen_range(30.0..220.0), rng.gen_range(30.0..220.0)];
    let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let (dx, dy) = (angle.cos(), angle.sin());
    let freq = rng.gen_range(0.01..0.05);
    let amp = rng.gen_range(4.0..20.0);
    let diag = ((w * w + h * h) as f64).sqrt();
    let mut grain = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    Raster::from_fn_rgb(w, h, |x, y| {
        let t = ((x as f64 * dx + y as f64 * dy) / diag + 1.0) / 2.0;
        let ripple = amp * ((x as f64 * freq).sin() + (y as f64 * freq * 1.3).cos());
        let mut px = [0u8; 3];
        for c in 0..3 {
            let v = c0[c] * (1.0 - t) + c1[c] * t + ripple + grain.gen_range(-3.0..3.0);
            px[c] = v.clamp(0.0, 255.0).round() as u8;
        }
        px
    })
}

fn palette(i: usize) -> [u8; 3] {
    const COLORS: [[u8; 3]; 8] = [
        [200, 40, 40],
        [40, 120, 200],
        [40, 160, 70],
        [220, 160, 30],
        [140, 60, 170],
        [30, 170, 170],
        [90, 70, 50],
        [200, 80, 150],
    ];
    COLORS[i % COLORS.len()]
}

/// Write `objects/`, `backgrounds/` and optionally `masks/` under `root`.
pub fn write_fixture_assets(root: &Path, spec: &FixtureSpec) -> Result<FixturePaths, ImgError> {
    let paths = FixturePaths {
        root: root.to_path_buf(),
        objects: root.join("objects"),
        masks: root.join("masks"),
        backgrounds: root.join("backgrounds"),
        target_labels: (0..spec.instances).map(|i| format!("object_{i:02}")).collect(),
        distractor_labels: (0..spec.distractors).map(|i| format!("distractor_{i:02}")).collect(),
    };
    let shapes = [Shape::Ellipse, Shape::Box, Shape::Diamond];
    let labels = paths.target_labels.iter().chain(&paths.distractor_labels);
    for (i, label) in labels.enumerate() {
        for v in 0..spec.views_per_instance {
            let seed = spec.seed.wrapping_mul(1_000_003).wrapping_add((i * 97 + v) as u64);
            let (color, mask) = object_view(spec.view_size, shapes[(i + v) % 3], palette(i), seed)?;
            color.save_png(&paths.objects.join(label).join(format!("view_{v:02}.png")))?;
            if spec.write_masks {
                mask.save_png(&paths.masks.join(label).join(format!("view_{v:02}.png")))?;
            }
        }
    }
    let (w, h) = spec.background_size;
    for b in 0..spec.backgrounds {
        let seed = spec.seed.wrapping_mul(7_919).wrapping_add(b as u64);
        background(w, h, seed)?.save_png(&paths.backgrounds.join(format!("bg_{b:05}.png")))?;
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maskgen::{extract_mask, MaskParams};

    #[test]
    fn extracted_masks_match_drawn_masks() {
        for (i, shape) in [Shape::Ellipse, Shape::Box, Shape::Diamond].into_iter().enumerate() {
            let (color, mask) = object_view(160, shape, palette(i), i as u64).unwrap();
            let got = extract_mask(&color, &MaskParams::default()).unwrap();
            let (mut inter, mut union) = (0usize, 0usize);
            for (a, b) in got.data().iter().zip(mask.data()) {
                inter += (*a > 0 && *b > 0) as usize;
                union += (*a > 0 || *b > 0) as usize;
            }
            assert!(inter as f64 / union as f64 > 0.97, "{shape:?}");
        }
    }

    #[test]
    fn generation_is_seeded() {
        assert_eq!(background(64, 48, 3).unwrap().data(), background(64, 48, 3).unwrap().data());
        assert_ne!(background(64, 48, 3).unwrap().data(), background(64, 48, 4).unwrap().data());
    }
}
