use super::{ImgError, Raster};

/// A segmented view of one object instance: color plus a binary alpha mask,
/// stored cropped to the tight box of the mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cutout {
    color: Raster,
    alpha: Raster,
    instance_label: String,
    view_id: String,
}

impl Cutout {
    /// Build from already-tight rasters. `alpha` must be binary (0 or 255).
    pub fn new(
        color: Raster,
        alpha: Raster,
        instance_label: impl Into<String>,
        view_id: impl Into<String>,
    ) -> Result<Self, ImgError> {
        if color.channels() != 3 {
            return Err(ImgError::BadChannels(color.channels()));
        }
        if alpha.channels() != 1 {
            return Err(ImgError::BadChannels(alpha.channels()));
        }
        if color.dims() != alpha.dims() {
            return Err(ImgError::DimensionMismatch {
                color: color.dims(),
                alpha: alpha.dims(),
            });
        }
        if alpha.data().iter().any(|&a| a != 0 && a != 255) {
            return Err(ImgError::NonBinaryAlpha);
        }
        match alpha.nonzero_bounds() {
            None => return Err(ImgError::EmptyMask),
            Some(b) if b != (0, 0, alpha.width(), alpha.height()) => return Err(ImgError::NotTight),
            Some(_) => {}
        }
        Ok(Self {
            color,
            alpha,
            instance_label: instance_label.into(),
            view_id: view_id.into(),
        })
    }

    /// Binarize `mask` at 128 and crop both rasters to the mask's tight box.
    pub fn from_masked(
        color: &Raster,
        mask: &Raster,
        instance_label: impl Into<String>,
        view_id: impl Into<String>,
    ) -> Result<Self, ImgError> {
        if color.dims() != mask.dims() {
            return Err(ImgError::DimensionMismatch {
                color: color.dims(),
                alpha: mask.dims(),
            });
        }
        let binary = Raster::from_fn_mask(mask.width(), mask.height(), |x, y| {
            if mask.get(x, y) >= 128 {
                255
            } else {
                0
            }
        })?;
        let (x0, y0, x1, y1) = binary.nonzero_bounds().ok_or(ImgError::EmptyMask)?;
        Self::new(
            color.crop(x0, y0, x1, y1)?,
            binary.crop(x0, y0, x1, y1)?,
            instance_label,
            view_id,
        )
    }

    pub fn color(&self) -> &Raster {
        &self.color
    }

    pub fn alpha(&self) -> &Raster {
        &self.alpha
    }

    pub fn instance_label(&self) -> &str {
        &self.instance_label
    }

    pub fn view_id(&self) -> &str {
        &self.view_id
    }

    pub fn dims(&self) -> (u32, u32) {
        self.color.dims()
    }

    #[inline]
    pub fn is_foreground(&self, x: u32, y: u32) -> bool {
        self.alpha.get(x, y) != 0
    }
}

/// `(cos, sin)` with exact values at multiples of 90 degrees.
fn rotation_terms(degrees: f64) -> (f64, f64) {
    let r = degrees.rem_euclid(360.0);
    if r == 0.0 {
        (1.0, 0.0)
    } else if r == 90.0 {
        (0.0, 1.0)
    } else if r == 180.0 {
        (-1.0, 0.0)
    } else if r == 270.0 {
        (0.0, -1.0)
    } else {
        let (s, c) = degrees.to_radians().sin_cos();
        (c, s)
    }
}

/// Canvas size that holds a `w × h` raster after rotation and scaling,
/// before cropping to the transformed mask.
pub fn transformed_extent(w: u32, h: u32, scale: f64, rotation_deg: f64) -> (u32, u32) {
    let (c, s) = rotation_terms(rotation_deg);
    let (c, s) = (c.abs(), s.abs());
    let ew = scale * (c * w as f64 + s * h as f64);
    let eh = scale * (s * w as f64 + c * h as f64);
    let snap = |v: f64| ((v - 1e-9).ceil().max(1.0)) as u32;
    (snap(ew), snap(eh))
}

/// Lower sample index and fractional weight for continuous coordinate `u`,
/// where sample `i` is centered at `i + 0.5`.
fn bilinear_weights(u: f64) -> (i64, f64) {
    let p = u - 0.5;
    let i = p.floor();
    (i as i64, p - i)
}

/// Rotate a cutout about its center (counter-clockwise as displayed, i.e. with
/// the y axis pointing down) and then scale it.
///
/// Color is resampled bilinearly with edge clamping. Alpha is resampled
/// bilinearly with zero outside the source, then re-binarized at 128. The
/// result is cropped to the tight box of the new mask.
pub fn transform_cutout(c: &Cutout, scale: f64, rotation_deg: f64) -> Result<Cutout, ImgError> {
    if !(scale.is_finite() && scale > 0.0) || !rotation_deg.is_finite() {
        return Err(ImgError::DegenerateTransform);
    }
    let (sw, sh) = c.dims();
    let (ow, oh) = transformed_extent(sw, sh, scale, rotation_deg);
    let (cos, sin) = rotation_terms(rotation_deg);
    let (scx, scy) = (sw as f64 / 2.0, sh as f64 / 2.0);
    let (ocx, ocy) = (ow as f64 / 2.0, oh as f64 / 2.0);

    let src_color = c.color();
    let src_alpha = c.alpha();
    let alpha_at = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= sw as i64 || y >= sh as i64 {
            0.0
        } else {
            src_alpha.get(x as u32, y as u32) as f64
        }
    };
    let color_at = |x: i64, y: i64, ch: usize| -> f64 {
        let xc = x.clamp(0, sw as i64 - 1) as u32;
        let yc = y.clamp(0, sh as i64 - 1) as u32;
        src_color.pixel(xc, yc)[ch] as f64
    };

    let mut color = vec![0u8; ow as usize * oh as usize * 3];
    let mut alpha = vec![0u8; ow as usize * oh as usize];
    for j in 0..oh {
        for i in 0..ow {
            let dx = i as f64 + 0.5 - ocx;
            let dy = j as f64 + 0.5 - ocy;
            let u = (dx * cos - dy * sin) / scale + scx;
            let v = (dx * sin + dy * cos) / scale + scy;
            let (x0, fx) = bilinear_weights(u);
            let (y0, fy) = bilinear_weights(v);
            let w00 = (1.0 - fx) * (1.0 - fy);
            let w10 = fx * (1.0 - fy);
            let w01 = (1.0 - fx) * fy;
            let w11 = fx * fy;
            let a = w00 * alpha_at(x0, y0)
                + w10 * alpha_at(x0 + 1, y0)
                + w01 * alpha_at(x0, y0 + 1)
                + w11 * alpha_at(x0 + 1, y0 + 1);
            let idx = j as usize * ow as usize + i as usize;
            if a.round() >= 128.0 {
                alpha[idx] = 255;
            }
            for ch in 0..3 {
                let v = w00 * color_at(x0, y0, ch)
                    + w10 * color_at(x0 + 1, y0, ch)
                    + w01 * color_at(x0, y0 + 1, ch)
                    + w11 * color_at(x0 + 1, y0 + 1, ch);
                color[idx * 3 + ch] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    let color = Raster::new(ow, oh, 3, color)?;
    let alpha = Raster::new(ow, oh, 1, alpha)?;
    let (x0, y0, x1, y1) = alpha.nonzero_bounds().ok_or(ImgError::DegenerateTransform)?;
    Cutout::new(
        color.crop(x0, y0, x1, y1)?,
        alpha.crop(x0, y0, x1, y1)?,
        c.instance_label(),
        c.view_id(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn full_cutout(w: u32, h: u32) -> Cutout {
        let color = Raster::from_fn_rgb(w, h, |x, y| [(x * 7 % 256) as u8, (y * 5 % 256) as u8, 90]).unwrap();
        let alpha = Raster::filled(w, h, 1, 255).unwrap();
        Cutout::new(color, alpha, "obj", "v0").unwrap()
    }

    fn ellipse_cutout(w: u32, h: u32) -> Cutout {
        let color = Raster::from_fn_rgb(w, h, |x, y| [x as u8, y as u8, 200]).unwrap();
        let mask = Raster::from_fn_mask(w, h, |x, y| {
            let dx = (x as f64 + 0.5 - w as f64 / 2.0) / (w as f64 / 2.0);
            let dy = (y as f64 + 0.5 - h as f64 / 2.0) / (h as f64 / 2.0);
            if dx * dx + dy * dy <= 1.0 {
                255
            } else {
                0
            }
        })
        .unwrap();
        Cutout::from_masked(&color, &mask, "ell", "v1").unwrap()
    }

    #[test]
    fn identity_is_byte_exact() {
        for c in [full_cutout(37, 21), ellipse_cutout(40, 26)] {
            let t = transform_cutout(&c, 1.0, 0.0).unwrap();
            assert_eq!(t, c);
        }
    }

    #[test]
    fn quarter_turn_swaps_axes() {
        let c = full_cutout(40, 24);
        let t = transform_cutout(&c, 1.0, 90.0).unwrap();
        assert_eq!(t.dims(), (24, 40));
        assert_eq!(t.alpha().count_nonzero(), 24 * 40);
        // counter-clockwise on screen: the source's top-right corner lands top-left
        assert_eq!(t.color().pixel(0, 0), c.color().pixel(39, 0));
    }

    #[test]
    fn half_scale_halves_dims() {
        let t = transform_cutout(&full_cutout(100, 60), 0.5, 0.0).unwrap();
        assert_eq!(t.dims(), (50, 30));
    }

    #[test]
    fn vanishing_scale_is_degenerate() {
        // two corner pixels; a 1x1 output samples only the empty center
        let color = Raster::filled(9, 9, 3, 10).unwrap();
        let alpha = Raster::from_fn_mask(9, 9, |x, y| if (x, y) == (0, 0) || (x, y) == (8, 8) { 255 } else { 0 }).unwrap();
        let c = Cutout::new(color, alpha, "a", "b").unwrap();
        assert!(matches!(transform_cutout(&c, 0.01, 10.0), Err(ImgError::DegenerateTransform)));
        assert!(matches!(transform_cutout(&c, 0.0, 0.0), Err(ImgError::DegenerateTransform)));
    }

    #[test]
    fn cutout_rejects_loose_canvas() {
        let color = Raster::filled(5, 5, 3, 0).unwrap();
        let alpha = Raster::from_fn_mask(5, 5, |x, _| if x < 4 { 255 } else { 0 }).unwrap();
        assert!(matches!(Cutout::new(color, alpha, "a", "b"), Err(ImgError::NotTight)));
    }

    proptest! {
        #[test]
        fn output_is_tight(w in 3u32..40, h in 3u32..40, scale in 0.3..1.8f64, rot in -180.0..180.0f64) {
            let c = ellipse_cutout(w, h);
            if let Ok(t) = transform_cutout(&c, scale, rot) {
                let (tw, th) = t.dims();
                prop_assert_eq!(t.alpha().nonzero_bounds(), Some((0, 0, tw, th)));
                prop_assert!(t.alpha().data().iter().all(|&a| a == 0 || a == 255));
            }
        }
    }
}
