use std::path::Path;

use image::{GrayImage, RgbImage};

use super::ImgError;

/// An 8-bit raster, row-major with a top-left origin.
///
/// One channel holds masks, three hold color.
#[derive(Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<u8>,
}

impl std::fmt::Debug for Raster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Raster")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl Raster {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self, ImgError> {
        if width == 0 || height == 0 {
            return Err(ImgError::EmptyRaster);
        }
        if channels != 1 && channels != 3 {
            return Err(ImgError::BadChannels(channels));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(ImgError::BadLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// A raster with every sample set to `value`.
    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Result<Self, ImgError> {
        let len = width as usize * height as usize * channels as usize;
        Self::new(width, height, channels, vec![value; len])
    }

    pub fn from_fn_rgb(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> [u8; 3],
    ) -> Result<Self, ImgError> {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, 3, data)
    }

    pub fn from_fn_mask(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> u8,
    ) -> Result<Self, ImgError> {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, 1, data)
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> u8 {
        self.channels
    }

    #[inline]
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize
    }

    /// Samples of the pixel at `(x, y)`. Panics when out of bounds.
    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let o = self.offset(x, y);
        &self.data[o..o + self.channels as usize]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: u32, y: u32) -> &mut [u8] {
        let o = self.offset(x, y);
        let c = self.channels as usize;
        &mut self.data[o..o + c]
    }

    /// First-channel sample; the natural accessor for masks.
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[self.offset(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        let o = self.offset(x, y);
        self.data[o] = value;
    }

    /// Number of nonzero samples in a single-channel raster.
    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// Tight pixel box `(x0, y0, x1, y1)` (half-open) of nonzero first-channel samples.
    pub fn nonzero_bounds(&self) -> Option<(u32, u32, u32, u32)> {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) != 0 {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x + 1);
                    y1 = y1.max(y + 1);
                }
            }
        }
        (x0 != u32::MAX).then_some((x0, y0, x1, y1))
    }

    /// Copy of the half-open pixel region `[x0,x1)×[y0,y1)`.
    pub fn crop(&self, x0: u32, y0: u32, x1: u32, y1: u32) -> Result<Self, ImgError> {
        if x1 <= x0 || y1 <= y0 || x1 > self.width || y1 > self.height {
            return Err(ImgError::BadCrop);
        }
        let c = self.channels as usize;
        let mut data = Vec::with_capacity((x1 - x0) as usize * (y1 - y0) as usize * c);
        for y in y0..y1 {
            let start = self.offset(x0, y);
            data.extend_from_slice(&self.data[start..start + (x1 - x0) as usize * c]);
        }
        Self::new(x1 - x0, y1 - y0, self.channels, data)
    }

    pub fn to_rgb_image(&self) -> Result<RgbImage, ImgError> {
        if self.channels != 3 {
            return Err(ImgError::BadChannels(self.channels));
        }
        RgbImage::from_raw(self.width, self.height, self.data.clone()).ok_or(ImgError::BadLength {
            expected: self.data.len(),
            actual: self.data.len(),
        })
    }

    pub fn to_gray_image(&self) -> Result<GrayImage, ImgError> {
        if self.channels != 1 {
            return Err(ImgError::BadChannels(self.channels));
        }
        GrayImage::from_raw(self.width, self.height, self.data.clone()).ok_or(ImgError::BadLength {
            expected: self.data.len(),
            actual: self.data.len(),
        })
    }

    pub fn from_rgb_image(img: RgbImage) -> Result<Self, ImgError> {
        let (w, h) = img.dimensions();
        Self::new(w, h, 3, img.into_raw())
    }

    pub fn from_gray_image(img: GrayImage) -> Result<Self, ImgError> {
        let (w, h) = img.dimensions();
        Self::new(w, h, 1, img.into_raw())
    }

    /// Decode any supported image file as 3-channel color.
    pub fn load_rgb(path: &Path) -> Result<Self, ImgError> {
        let img = image::open(path).map_err(|e| ImgError::Unreadable {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_rgb_image(img.into_rgb8())
    }

    /// Decode any supported image file as a single-channel mask.
    pub fn load_gray(path: &Path) -> Result<Self, ImgError> {
        let img = image::open(path).map_err(|e| ImgError::Unreadable {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_gray_image(img.into_luma8())
    }

    /// Write as PNG, choosing RGB or grayscale from the channel count.
    /// Missing parent directories are created.
    pub fn save_png(&self, path: &Path) -> Result<(), ImgError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| ImgError::Write {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
        }
        let res = match self.channels {
            3 => self.to_rgb_image()?.save_with_format(path, image::ImageFormat::Png),
            _ => self.to_gray_image()?.save_with_format(path, image::ImageFormat::Png),
        };
        res.map_err(|e| ImgError::Write {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lengths() {
        assert!(matches!(
            Raster::new(2, 2, 3, vec![0; 11]),
            Err(ImgError::BadLength { expected: 12, .. })
        ));
        assert!(matches!(Raster::new(0, 2, 1, vec![]), Err(ImgError::EmptyRaster)));
        assert!(matches!(Raster::new(1, 1, 2, vec![0; 2]), Err(ImgError::BadChannels(2))));
    }

    #[test]
    fn crop_and_bounds() {
        let m = Raster::from_fn_mask(10, 8, |x, y| if (3..6).contains(&x) && (2..7).contains(&y) { 255 } else { 0 })
            .unwrap();
        assert_eq!(m.nonzero_bounds(), Some((3, 2, 6, 7)));
        let c = m.crop(3, 2, 6, 7).unwrap();
        assert_eq!(c.dims(), (3, 5));
        assert_eq!(c.count_nonzero(), 15);
        assert!(Raster::filled(4, 4, 1, 0).unwrap().nonzero_bounds().is_none());
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = Raster::from_fn_rgb(7, 5, |x, y| [x as u8 * 30, y as u8 * 40, 7]).unwrap();
        let p = dir.path().join("a.png");
        img.save_png(&p).unwrap();
        assert_eq!(Raster::load_rgb(&p).unwrap(), img);
    }
}
