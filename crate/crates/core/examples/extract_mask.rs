//! Foreground mask extraction from an object photo on a plain backdrop.
//!
//! cargo run --example extract_mask -- [out_dir]

use std::path::PathBuf;

use cutpaste::fixtures::{disk_image, object_view, Shape, BACKDROP};
use cutpaste::imgcore::Raster;
use cutpaste::maskgen::{estimate_background_color, extract_mask, MaskParams};

fn iou(a: &Raster, b: &Raster) -> f64 {
    let (mut i, mut u) = (0usize, 0usize);
    for (x, y) in a.data().iter().zip(b.data()) {
        i += (*x > 0 && *y > 0) as usize;
        u += (*x > 0 || *y > 0) as usize;
    }
    i as f64 / u as f64
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cutpaste-masks"));
    let params = MaskParams::default();

    let (photo, truth) = object_view(200, Shape::Diamond, [40, 120, 200], 11)?;
    let stats = estimate_background_color(&photo, params.border_width)?;
    println!("backdrop estimate {:?} (std {:?})", stats.mean, stats.std);
    let mask = extract_mask(&photo, &params)?;
    println!("textured diamond: mask IoU vs drawn shape {:.4}", iou(&mask, &truth));
    photo.save_png(&out.join("photo.png"))?;
    mask.save_png(&out.join("mask.png"))?;

    let disk = disk_image(128, 128, 64.0, 64.0, 40.0, [200, 40, 40], BACKDROP)?;
    let analytic = Raster::from_fn_mask(128, 128, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - 64.0, y as f64 + 0.5 - 64.0);
        if dx * dx + dy * dy < 1600.0 { 255 } else { 0 }
    })?;
    println!("disk: mask IoU vs analytic disk {:.4}", iou(&extract_mask(&disk, &params)?, &analytic));

    let blank = Raster::filled(96, 96, 3, 180)?;
    match extract_mask(&blank, &params) {
        Ok(_) => println!("uniform image unexpectedly produced a mask"),
        Err(e) => println!("uniform image: {e}"),
    }
    println!("wrote {}", out.display());
    Ok(())
}
