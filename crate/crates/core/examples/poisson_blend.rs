//! Single-object pastes under the three blend modes, with the gradient-domain
//! solver's convergence report.
//!
//! cargo run --release --example poisson_blend -- [out_dir]

use std::path::PathBuf;

use cutpaste::blending::{paste_direct, paste_gaussian, paste_poisson, solve_poisson};
use cutpaste::fixtures::{background, object_view, Shape};
use cutpaste::imgcore::Cutout;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cutpaste-blend"));
    let bg = background(320, 240, 5)?;
    let (color, mask) = object_view(140, Shape::Ellipse, [200, 40, 40], 9)?;
    let cutout = Cutout::from_masked(&color, &mask, "mug", "v0")?;
    let anchor = (100, 60);

    paste_direct(&bg, &cutout, anchor)?.save_png(&out.join("direct.png"))?;
    paste_gaussian(&bg, &cutout, anchor, 2.0)?.save_png(&out.join("gaussian.png"))?;
    let (poisson, report) = paste_poisson(&bg, &cutout, anchor, 1e-6, 10_000)?;
    poisson.save_png(&out.join("poisson.png"))?;
    println!(
        "poisson: {} unknowns, {} iterations over 3 channels, max relative residual {:.2e}, converged {}",
        report.unknowns, report.iterations, report.max_relative_residual, !report.unconverged
    );

    // Pasting the background onto itself: the solution is the background.
    // from_masked crops to the mask, so the anchor moves by the crop offset.
    let same = Cutout::from_masked(&bg.crop(100, 60, 240, 200)?, &mask, "self", "v0")?;
    let (x0, y0, _, _) = mask.nonzero_bounds().expect("mask is non-empty");
    let offset = (anchor.0 + x0 as i64, anchor.1 + y0 as i64);
    let sol = solve_poisson(&bg, &same, offset, 1e-8, 10_000)?.expect("interior exists");
    let mut worst = 0.0f64;
    for (i, &(x, y)) in sol.region.unknowns.iter().enumerate() {
        for c in 0..3 {
            worst = worst.max((sol.values[c][i] - bg.pixel(x, y)[c] as f64 / 255.0).abs());
        }
    }
    println!("identity paste: max deviation {:.2e} (1/255 = {:.2e})", worst, 1.0 / 255.0);
    println!("wrote {}", out.display());
    Ok(())
}
