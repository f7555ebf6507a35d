//! Rotation and scale augmentation of a cutout. The output canvas is the
//! exact tight box of the transformed mask.

use cutpaste::fixtures::{object_view, Shape};
use cutpaste::imgcore::{transform_cutout, transformed_extent, Cutout};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (color, mask) = object_view(160, Shape::Box, [220, 160, 30], 3)?;
    let cutout = Cutout::from_masked(&color, &mask, "box", "front")?;
    let (w, h) = cutout.dims();
    println!("source cutout {w}x{h}");
    for (scale, rot) in [(1.0, 0.0), (0.5, 0.0), (1.0, 90.0), (0.7, 30.0), (0.7, -30.0), (0.3, 12.5)] {
        let t = transform_cutout(&cutout, scale, rot)?;
        let bound = transformed_extent(w, h, scale, rot);
        println!(
            "scale {scale:>4} rot {rot:>6}: {:?} (analytic bound {:?}), {} mask pixels",
            t.dims(),
            bound,
            t.alpha().count_nonzero()
        );
    }
    Ok(())
}
