use serde::{Deserialize, Serialize};

use super::ImgError;

/// Axis-aligned box in continuous pixel coordinates, half-open:
/// `[xmin, xmax) × [ymin, ymax)` with the origin at the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl BoundingBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self, ImgError> {
        let finite = [xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite());
        if !finite || xmax <= xmin || ymax <= ymin {
            return Err(ImgError::InvalidBox {
                xmin,
                ymin,
                xmax,
                ymax,
            });
        }
        Ok(Self {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    /// Box of a `w × h` raster whose top-left corner sits at `(x, y)`.
    pub fn from_anchor(x: i64, y: i64, w: u32, h: u32) -> Result<Self, ImgError> {
        Self::new(x as f64, y as f64, x as f64 + w as f64, y as f64 + h as f64)
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Area of the overlap with `other`; zero when disjoint or touching.
    pub fn intersection_area(&self, other: &BoundingBox) -> f64 {
        let w = self.xmax.min(other.xmax) - self.xmin.max(other.xmin);
        let h = self.ymax.min(other.ymax) - self.ymin.max(other.ymin);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// The part of this box inside `[0,w)×[0,h)`, if any.
    pub fn clip_to(&self, canvas_w: u32, canvas_h: u32) -> Option<BoundingBox> {
        let xmin = self.xmin.max(0.0);
        let ymin = self.ymin.max(0.0);
        let xmax = self.xmax.min(canvas_w as f64);
        let ymax = self.ymax.min(canvas_h as f64);
        BoundingBox::new(xmin, ymin, xmax, ymax).ok()
    }
}

/// Intersection over union of two boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Fraction of `bbox`'s area that lies on a `canvas_w × canvas_h` canvas.
pub fn visible_fraction(bbox: &BoundingBox, canvas_w: u32, canvas_h: u32) -> f64 {
    match bbox.clip_to(canvas_w, canvas_h) {
        Some(c) => (c.area() / bbox.area()).clamp(0.0, 1.0),
        None => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn iou_examples() {
        assert_eq!(iou(&b(0., 0., 10., 10.), &b(0., 0., 10., 10.)), 1.0);
        assert_eq!(iou(&b(0., 0., 10., 10.), &b(20., 20., 30., 30.)), 0.0);
        let third = iou(&b(0., 0., 10., 10.), &b(5., 0., 15., 10.));
        assert!((third - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn visible_fraction_examples() {
        assert_eq!(visible_fraction(&b(10., 10., 20., 20.), 100, 100), 1.0);
        assert_eq!(visible_fraction(&b(200., 10., 220., 20.), 100, 100), 0.0);
        assert_eq!(visible_fraction(&b(-5., 0., 5., 10.), 100, 100), 0.5);
    }

    #[test]
    fn invalid_boxes_rejected() {
        assert!(BoundingBox::new(1., 0., 1., 5.).is_err());
        assert!(BoundingBox::new(0., 3., 1., 2.).is_err());
        assert!(BoundingBox::new(f64::NAN, 0., 1., 1.).is_err());
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (-50.0..150.0f64, -50.0..150.0f64, 0.5..80.0f64, 0.5..80.0f64)
            .prop_map(|(x, y, w, h)| b(x, y, x + w, y + h))
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_reflexive(a in arb_box(), c in arb_box()) {
            prop_assert_eq!(iou(&a, &c), iou(&c, &a));
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
            let v = iou(&a, &c);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn visible_fraction_monotone_away_from_center(
            w in 1.0..60.0f64, h in 1.0..60.0f64, steps in proptest::collection::vec(0.0..15.0f64, 1..12),
            horizontal in any::<bool>(),
        ) {
            // start centered on a 100×80 canvas and drift outward
            let (cw, ch) = (100u32, 80u32);
            let mut x = 50.0 - w / 2.0;
            let mut y = 40.0 - h / 2.0;
            let mut prev = visible_fraction(&b(x, y, x + w, y + h), cw, ch);
            for s in steps {
                if horizontal { x += s } else { y += s }
                let cur = visible_fraction(&b(x, y, x + w, y + h), cw, ch);
                prop_assert!(cur <= prev + 1e-12);
                prev = cur;
            }
        }
    }
}
