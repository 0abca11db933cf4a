use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[u8; 3]>,
}

/// Binary image, row-major; `true` marks a hole pixel (white).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskImage {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl RasterImage {
    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![color; (width * height) as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, c: [u8; 3]) {
        self.pixels[(y * self.width + x) as usize] = c;
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::open(path.as_ref())?.to_rgb8();
        let (width, height) = img.dimensions();
        let pixels = img.pixels().map(|p| p.0).collect();
        Ok(Self { width, height, pixels })
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let raw: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        let img = image::RgbImage::from_raw(self.width, self.height, raw)
            .ok_or_else(|| Error::InvalidArgument("pixel buffer does not match dimensions".into()))?;
        img.save_with_format(path.as_ref(), image::ImageFormat::Png)?;
        Ok(())
    }

    pub fn check_same_size(&self, w: u32, h: u32) -> Result<()> {
        if (self.width, self.height) != (w, h) {
            return Err(Error::DimensionMismatch(self.width, self.height, w, h));
        }
        Ok(())
    }

    pub fn transformed(&self, t: Orientation) -> Self {
        let (w, h, pixels) = transform_grid(self.width, self.height, &self.pixels, t);
        Self {
            width: w,
            height: h,
            pixels,
        }
    }
}

impl MaskImage {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; (width * height) as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[(y * self.width + x) as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Grayscale PNG; any value ≥ 128 reads as hole.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::open(path.as_ref())?.to_luma8();
        let (width, height) = img.dimensions();
        let bits = img.pixels().map(|p| p.0[0] >= 128).collect();
        Ok(Self { width, height, bits })
    }

    /// Grayscale PNG, 255 = hole, 0 = known.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let raw: Vec<u8> = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        let img = image::GrayImage::from_raw(self.width, self.height, raw)
            .ok_or_else(|| Error::InvalidArgument("mask buffer does not match dimensions".into()))?;
        img.save_with_format(path.as_ref(), image::ImageFormat::Png)?;
        Ok(())
    }

    pub fn transformed(&self, t: Orientation) -> Self {
        let (w, h, bits) = transform_grid(self.width, self.height, &self.bits, t);
        Self {
            width: w,
            height: h,
            bits,
        }
    }
}

/// The rigid pixel-grid symmetries used for augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    FlipH,
    FlipV,
}

impl Orientation {
    pub const ALL: [Orientation; 6] = [
        Self::Identity,
        Self::Rot90,
        Self::Rot180,
        Self::Rot270,
        Self::FlipH,
        Self::FlipV,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Identity => "id",
            Self::Rot90 => "rot90",
            Self::Rot180 => "rot180",
            Self::Rot270 => "rot270",
            Self::FlipH => "fliph",
            Self::FlipV => "flipv",
        }
    }
}

/// Rotations are clockwise in image coordinates (y down).
fn transform_grid<T: Copy>(w: u32, h: u32, data: &[T], t: Orientation) -> (u32, u32, Vec<T>) {
    let (nw, nh) = match t {
        Orientation::Rot90 | Orientation::Rot270 => (h, w),
        _ => (w, h),
    };
    let mut out = Vec::with_capacity(data.len());
    for y in 0..nh {
        for x in 0..nw {
            let (sx, sy) = match t {
                Orientation::Identity => (x, y),
                Orientation::Rot90 => (y, h - 1 - x),
                Orientation::Rot180 => (w - 1 - x, h - 1 - y),
                Orientation::Rot270 => (w - 1 - y, x),
                Orientation::FlipH => (w - 1 - x, y),
                Orientation::FlipV => (x, h - 1 - y),
            };
            out.push(data[(sy * w + sx) as usize]);
        }
    }
    (nw, nh, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: u32, h: u32) -> RasterImage {
        let mut img = RasterImage::filled(w, h, [0; 3]);
        for y in 0..h {
            for x in 0..w {
                img.set(x, y, [x as u8, y as u8, (x * y) as u8]);
            }
        }
        img
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = ramp(7, 5);
        img.save_png(dir.path().join("a.png")).unwrap();
        assert_eq!(RasterImage::load_png(dir.path().join("a.png")).unwrap(), img);
        let mut m = MaskImage::empty(7, 5);
        m.set(3, 2, true);
        m.save_png(dir.path().join("m.png")).unwrap();
        assert_eq!(MaskImage::load_png(dir.path().join("m.png")).unwrap(), m);
    }

    #[test]
    fn rotations_compose() {
        let img = ramp(6, 4);
        assert_eq!(
            img.transformed(Orientation::Rot180).transformed(Orientation::Rot180),
            img
        );
        let r = img.transformed(Orientation::Rot90);
        assert_eq!((r.width, r.height), (4, 6));
        assert_eq!(r.transformed(Orientation::Rot270), img);
        assert_eq!(r.transformed(Orientation::Rot90), img.transformed(Orientation::Rot180));
        assert_eq!(img.transformed(Orientation::FlipH).transformed(Orientation::FlipH), img);
        // Clockwise: the top-left pixel moves to the top-right corner.
        assert_eq!(r.get(3, 0), img.get(0, 0));
    }
}
