use std::time::Duration;

use super::InpaintBackend;
use crate::chart::{MaskImage, RasterImage};
use crate::{Error, Result};

/// Harmonic (membrane) fill solved by red-black successive over-relaxation.
#[derive(Debug, Clone, Copy)]
pub struct BuiltinBackend {
    /// Stop once every masked pixel is within this of its neighbor mean.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for BuiltinBackend {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_sweeps: 200_000,
        }
    }
}

impl InpaintBackend for BuiltinBackend {
    fn id(&self) -> String {
        "builtin".into()
    }

    fn inpaint(&self, image: &RasterImage, mask: &MaskImage, _timeout: Duration) -> Result<RasterImage> {
        self.solve(image, mask)
    }
}

/// Fills masked pixels with the solution of the 5-point Laplace equation,
/// Dirichlet data from the surrounding known pixels. Pixels at the image
/// border use only their in-image neighbors.
pub fn inpaint_builtin(image: &RasterImage, mask: &MaskImage) -> Result<RasterImage> {
    BuiltinBackend::default().solve(image, mask)
}

impl BuiltinBackend {
    fn solve(&self, image: &RasterImage, mask: &MaskImage) -> Result<RasterImage> {
        image.check_same_size(mask.width, mask.height)?;
        let (w, h) = (image.width as usize, image.height as usize);
        let unknown: Vec<usize> = (0..w * h).filter(|&i| mask.bits[i]).collect();
        if unknown.is_empty() {
            return Ok(image.clone());
        }
        if unknown.len() == w * h {
            return Err(Error::InvalidArgument(
                "mask covers the whole image; nothing to diffuse from".into(),
            ));
        }
        let mut value: Vec<[f64; 3]> = image.pixels.iter().map(|p| p.map(f64::from)).collect();
        let neighbors = |i: usize| {
            let (x, y) = (i % w, i / w);
            let mut out = [usize::MAX; 4];
            if x > 0 {
                out[0] = i - 1;
            }
            if x + 1 < w {
                out[1] = i + 1;
            }
            if y > 0 {
                out[2] = i - w;
            }
            if y + 1 < h {
                out[3] = i + w;
            }
            out
        };

        // Start from the mean of the known rim.
        let mut rim_sum = [0.0; 3];
        let mut rim_count = 0usize;
        for &i in &unknown {
            for j in neighbors(i) {
                if j != usize::MAX && !mask.bits[j] {
                    for c in 0..3 {
                        rim_sum[c] += value[j][c];
                    }
                    rim_count += 1;
                }
            }
        }
        let start = if rim_count > 0 {
            rim_sum.map(|s| s / rim_count as f64)
        } else {
            [0.0; 3]
        };
        for &i in &unknown {
            value[i] = start;
        }

        let (mut x0, mut x1, mut y0, mut y1) = (w, 0, h, 0);
        for &i in &unknown {
            let (x, y) = (i % w, i / w);
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let extent = (x1 - x0).max(y1 - y0) + 1;
        let omega = 2.0 / (1.0 + (std::f64::consts::PI / (extent as f64 + 1.0)).sin());
        let (red, black): (Vec<usize>, Vec<usize>) = unknown.iter().partition(|&&i| (i % w + i / w) % 2 == 0);

        let relax = |set: &[usize], value: &mut Vec<[f64; 3]>, omega: f64| -> f64 {
            let mut worst = 0.0f64;
            for &i in set {
                let mut sum = [0.0; 3];
                let mut n = 0.0;
                for j in neighbors(i) {
                    if j != usize::MAX {
                        for c in 0..3 {
                            sum[c] += value[j][c];
                        }
                        n += 1.0;
                    }
                }
                for c in 0..3 {
                    let r = sum[c] / n - value[i][c];
                    worst = worst.max(r.abs());
                    value[i][c] += omega * r;
                }
            }
            worst
        };
        let mut converged = false;
        for _ in 0..self.max_sweeps {
            let a = relax(&red, &mut value, omega);
            let b = relax(&black, &mut value, omega);
            if a.max(b) < self.tolerance {
                converged = true;
                break;
            }
        }
        if !converged {
            log::warn!("builtin inpainting hit the sweep cap before reaching tolerance");
        }
        let mut out = image.clone();
        for &i in &unknown {
            out.pixels[i] = value[i].map(|v| v.round().clamp(0.0, 255.0) as u8);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn square_mask(w: u32, x0: u32, x1: u32) -> MaskImage {
        let mut m = MaskImage::empty(w, w);
        for y in x0..x1 {
            for x in x0..x1 {
                m.set(x, y, true);
            }
        }
        m
    }

    #[test]
    fn constants_are_reproduced() {
        let img = RasterImage::filled(32, 32, [12, 200, 77]);
        assert_eq!(inpaint_builtin(&img, &square_mask(32, 5, 20)).unwrap(), img);
    }

    #[test]
    fn empty_mask_is_identity() {
        let mut img = RasterImage::filled(9, 9, [0; 3]);
        img.set(3, 3, [1, 2, 3]);
        assert_eq!(inpaint_builtin(&img, &MaskImage::empty(9, 9)).unwrap(), img);
    }

    #[test]
    fn linear_gradient_is_reproduced() {
        let w = 64;
        let mut img = RasterImage::filled(w, w, [0; 3]);
        for y in 0..w {
            for x in 0..w {
                img.set(x, y, [(x * 4) as u8, 100, (255 - x * 2) as u8]);
            }
        }
        let mask = square_mask(w, 16, 48);
        let mut damaged = img.clone();
        for i in 0..damaged.pixels.len() {
            if mask.bits[i] {
                damaged.pixels[i] = [0, 0, 0];
            }
        }
        let out = inpaint_builtin(&damaged, &mask).unwrap();
        for (a, b) in out.pixels.iter().zip(&img.pixels) {
            for c in 0..3 {
                assert!((a[c] as i32 - b[c] as i32).abs() <= 1);
            }
        }
    }

    #[test]
    fn full_mask_is_an_error() {
        let img = RasterImage::filled(4, 4, [0; 3]);
        let mut m = MaskImage::empty(4, 4);
        m.bits.iter_mut().for_each(|b| *b = true);
        assert!(inpaint_builtin(&img, &m).is_err());
    }

    #[test]
    fn maximum_principle_on_random_inputs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let w = 24;
            let mut img = RasterImage::filled(w, w, [0; 3]);
            for p in &mut img.pixels {
                *p = [rng.random(), rng.random(), rng.random()];
            }
            let x0 = rng.random_range(1..10);
            let x1 = rng.random_range(x0 + 2..w - 1);
            let mask = square_mask(w, x0, x1);
            let out = inpaint_builtin(&img, &mask).unwrap();
            let mut lo = [255u8; 3];
            let mut hi = [0u8; 3];
            for y in 0..w {
                for x in 0..w {
                    if mask.get(x, y) {
                        continue;
                    }
                    let touches = [(1i32, 0i32), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| {
                        let (nx, ny) = (x as i32 + dx, y as i32 + dy);
                        nx >= 0 && ny >= 0 && nx < w as i32 && ny < w as i32 && mask.get(nx as u32, ny as u32)
                    });
                    if touches {
                        for c in 0..3 {
                            lo[c] = lo[c].min(img.get(x, y)[c]);
                            hi[c] = hi[c].max(img.get(x, y)[c]);
                        }
                    }
                }
            }
            for i in 0..out.pixels.len() {
                if mask.bits[i] {
                    for c in 0..3 {
                        assert!(out.pixels[i][c] >= lo[c] && out.pixels[i][c] <= hi[c]);
                    }
                } else {
                    assert_eq!(out.pixels[i], img.pixels[i]);
                }
            }
        }
    }
}
