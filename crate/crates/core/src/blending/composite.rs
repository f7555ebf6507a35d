use crate::imgcore::{Cutout, Raster};

use super::BlendError;

/// Canvas span `[lo, hi)` covered by a length-`len` run starting at `anchor`
/// and widened by `pad` on both sides.
fn span(anchor: i64, len: u32, pad: i64, canvas: u32) -> (i64, i64) {
    let lo = (anchor - pad).max(0);
    let hi = (anchor + len as i64 + pad).min(canvas as i64);
    (lo, hi)
}

pub(crate) fn check_overlap(bg: &Raster, cutout: &Cutout, anchor: (i64, i64)) -> Result<(), BlendError> {
    let (w, h) = cutout.dims();
    let (x0, x1) = span(anchor.0, w, 0, bg.width());
    let (y0, y1) = span(anchor.1, h, 0, bg.height());
    if x0 >= x1 || y0 >= y1 {
        return Err(BlendError::NoOverlap);
    }
    Ok(())
}

fn check_color(bg: &Raster) -> Result<(), BlendError> {
    if bg.channels() != 3 {
        return Err(BlendError::BadBackground(bg.channels()));
    }
    Ok(())
}

/// Copy source pixels wherever the binary mask is set.
pub fn paste_direct(bg: &Raster, cutout: &Cutout, anchor: (i64, i64)) -> Result<Raster, BlendError> {
    let mut out = bg.clone();
    paste_direct_in_place(&mut out, cutout, anchor)?;
    Ok(out)
}

pub(crate) fn paste_direct_in_place(out: &mut Raster, cutout: &Cutout, anchor: (i64, i64)) -> Result<(), BlendError> {
    check_color(out)?;
    check_overlap(out, cutout, anchor)?;
    let (w, h) = cutout.dims();
    let (x0, x1) = span(anchor.0, w, 0, out.width());
    let (y0, y1) = span(anchor.1, h, 0, out.height());
    for cy in y0..y1 {
        for cx in x0..x1 {
            let (lx, ly) = ((cx - anchor.0) as u32, (cy - anchor.1) as u32);
            if cutout.is_foreground(lx, ly) {
                out.pixel_mut(cx as u32, cy as u32).copy_from_slice(cutout.color().pixel(lx, ly));
            }
        }
    }
    Ok(())
}

/// Half-width of the Gaussian kernel used for standard deviation `sigma`.
pub fn kernel_radius(sigma: f64) -> u32 {
    (3.0 * sigma).ceil().max(1.0) as u32
}

/// Normalized 1-D Gaussian taps `[-r ..= r]`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = kernel_radius(sigma) as i64;
    let taps: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Soft alpha of a cutout blurred by the 2-D Gaussian, on a canvas padded by
/// the kernel radius on every side. Returns `(alpha, padded_width)`.
pub fn blurred_alpha(cutout: &Cutout, sigma: f64) -> (Vec<f64>, usize) {
    let kernel = gaussian_kernel(sigma);
    let r = kernel_radius(sigma) as usize;
    let (w, h) = cutout.dims();
    let (pw, ph) = (w as usize + 2 * r, h as usize + 2 * r);
    let mut hard = vec![0f64; pw * ph];
    for y in 0..h as usize {
        for x in 0..w as usize {
            if cutout.is_foreground(x as u32, y as u32) {
                hard[(y + r) * pw + x + r] = 1.0;
            }
        }
    }
    let mut tmp = vec![0f64; pw * ph];
    for y in 0..ph {
        for x in 0..pw {
            let mut acc = 0.0;
            for (k, t) in kernel.iter().enumerate() {
                let sx = x as i64 + k as i64 - r as i64;
                if sx >= 0 && (sx as usize) < pw {
                    acc += t * hard[y * pw + sx as usize];
                }
            }
            tmp[y * pw + x] = acc;
        }
    }
    let mut soft = vec![0f64; pw * ph];
    for y in 0..ph {
        for x in 0..pw {
            let mut acc = 0.0;
            for (k, t) in kernel.iter().enumerate() {
                let sy = y as i64 + k as i64 - r as i64;
                if sy >= 0 && (sy as usize) < ph {
                    acc += t * tmp[sy as usize * pw + x];
                }
            }
            soft[y * pw + x] = acc;
        }
    }
    (soft, pw)
}

/// Composite with the binary mask blurred by a normalized Gaussian.
pub fn paste_gaussian(bg: &Raster, cutout: &Cutout, anchor: (i64, i64), sigma: f64) -> Result<Raster, BlendError> {
    let mut out = bg.clone();
    paste_gaussian_in_place(&mut out, cutout, anchor, sigma)?;
    Ok(out)
}

pub(crate) fn paste_gaussian_in_place(
    out: &mut Raster,
    cutout: &Cutout,
    anchor: (i64, i64),
    sigma: f64,
) -> Result<(), BlendError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(BlendError::BadMode(format!("gaussian sigma {sigma}")));
    }
    check_color(out)?;
    check_overlap(out, cutout, anchor)?;
    let r = kernel_radius(sigma) as i64;
    let (alpha, pw) = blurred_alpha(cutout, sigma);
    let (w, h) = cutout.dims();
    let (x0, x1) = span(anchor.0, w, r, out.width());
    let (y0, y1) = span(anchor.1, h, r, out.height());
    let color = cutout.color();
    for cy in y0..y1 {
        for cx in x0..x1 {
            let (px, py) = ((cx - anchor.0 + r) as usize, (cy - anchor.1 + r) as usize);
            let a = alpha[py * pw + px];
            if a <= 0.0 {
                continue;
            }
            let lx = (cx - anchor.0).clamp(0, w as i64 - 1) as u32;
            let ly = (cy - anchor.1).clamp(0, h as i64 - 1) as u32;
            let src = color.pixel(lx, ly);
            let dst = out.pixel_mut(cx as u32, cy as u32);
            if a >= 1.0 - 1e-12 {
                dst.copy_from_slice(src);
                continue;
            }
            for c in 0..3 {
                let v = a * src[c] as f64 + (1.0 - a) * dst[c] as f64;
                dst[c] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_cutout(r: f64, color: [u8; 3]) -> Cutout {
        let size = (2.0 * r).ceil() as u32 + 2;
        let c = size as f64 / 2.0;
        let img = Raster::from_fn_rgb(size, size, |_, _| color).unwrap();
        let mask = Raster::from_fn_mask(size, size, |x, y| {
            let (dx, dy) = (x as f64 + 0.5 - c, y as f64 + 0.5 - c);
            if dx * dx + dy * dy <= r * r {
                255
            } else {
                0
            }
        })
        .unwrap();
        Cutout::from_masked(&img, &mask, "disk", "v").unwrap()
    }

    fn white(w: u32, h: u32) -> Raster {
        Raster::filled(w, h, 3, 255).unwrap()
    }

    #[test]
    fn kernel_is_normalized() {
        for sigma in [0.3, 1.0, 2.0, 3.7] {
            let k = gaussian_kernel(sigma);
            assert_eq!(k.len(), 2 * kernel_radius(sigma) as usize + 1);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(kernel_radius(2.0), 6);
    }

    #[test]
    fn direct_full_alpha_copies_source() {
        let color = Raster::from_fn_rgb(10, 6, |x, y| [x as u8, y as u8, 9]).unwrap();
        let c = Cutout::new(color.clone(), Raster::filled(10, 6, 1, 255).unwrap(), "a", "v").unwrap();
        let out = paste_direct(&white(40, 40), &c, (5, 7)).unwrap();
        for y in 0..6 {
            for x in 0..10 {
                assert_eq!(out.pixel(x + 5, y + 7), color.pixel(x, y));
            }
        }
        assert_eq!(out.pixel(4, 7), &[255, 255, 255]);
    }

    #[test]
    fn direct_single_pixel_mask() {
        let c = Cutout::new(Raster::filled(1, 1, 3, 0).unwrap(), Raster::filled(1, 1, 1, 255).unwrap(), "a", "v").unwrap();
        let bg = white(20, 20);
        let out = paste_direct(&bg, &c, (3, 4)).unwrap();
        let changed = bg.data().chunks(3).zip(out.data().chunks(3)).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 1);
        assert_eq!(out.pixel(3, 4), &[0, 0, 0]);
    }

    #[test]
    fn direct_clips_off_canvas() {
        let c = Cutout::new(Raster::filled(10, 10, 3, 0).unwrap(), Raster::filled(10, 10, 1, 255).unwrap(), "a", "v").unwrap();
        let out = paste_direct(&white(20, 20), &c, (-4, 15)).unwrap();
        let changed = out.data().chunks(3).filter(|p| p[0] == 0).count();
        assert_eq!(changed, 6 * 5);
        assert!(matches!(paste_direct(&white(20, 20), &c, (20, 0)), Err(BlendError::NoOverlap)));
        assert!(matches!(paste_direct(&white(20, 20), &c, (-10, 0)), Err(BlendError::NoOverlap)));
    }

    #[test]
    fn gaussian_interior_and_exterior_exact() {
        let c = disk_cutout(20.0, [10, 200, 30]);
        let sigma = 2.0;
        let r = kernel_radius(sigma) as i64;
        let anchor = (30i64, 25i64);
        let out = paste_gaussian(&white(120, 100), &c, anchor, sigma).unwrap();
        let (w, h) = c.dims();
        for cy in 0..100i64 {
            for cx in 0..120i64 {
                // Chebyshev distance to the nearest pixel of the opposite mask state
                let inside = |x: i64, y: i64| {
                    let (lx, ly) = (x - anchor.0, y - anchor.1);
                    lx >= 0 && ly >= 0 && lx < w as i64 && ly < h as i64 && c.is_foreground(lx as u32, ly as u32)
                };
                let me = inside(cx, cy);
                let near_edge = (-r..=r).any(|dy| (-r..=r).any(|dx| inside(cx + dx, cy + dy) != me));
                if near_edge {
                    continue;
                }
                let px = out.pixel(cx as u32, cy as u32);
                if me {
                    assert_eq!(px, &[10, 200, 30]);
                } else {
                    assert_eq!(px, &[255, 255, 255]);
                }
            }
        }
    }

    #[test]
    fn narrow_gaussian_close_to_direct() {
        let c = disk_cutout(24.0, [0, 0, 0]);
        let bg = white(80, 80);
        let d = paste_direct(&bg, &c, (14, 14)).unwrap();
        let g = paste_gaussian(&bg, &c, (14, 14), 0.3).unwrap();
        let max = d.data().iter().zip(g.data()).map(|(a, b)| (*a as i32 - *b as i32).abs()).max().unwrap();
        assert!(max <= 2, "max diff {max}");
        assert!(max > 0);
    }
}
