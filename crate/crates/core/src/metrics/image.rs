use serde::{Deserialize, Serialize};

use crate::chart::RasterImage;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageMetricResult {
    /// Mean absolute channel difference scaled to `[0, 1]`.
    pub l1: f64,
    /// Peak signal-to-noise ratio in dB, infinite for identical images.
    pub psnr: f64,
    pub ssim: f64,
}

pub fn image_metrics(a: &RasterImage, b: &RasterImage) -> Result<ImageMetricResult> {
    a.check_same_size(b.width, b.height)?;
    let n = (a.pixels.len() * 3) as f64;
    let (mut abs, mut sq) = (0.0, 0.0);
    for (p, q) in a.pixels.iter().zip(&b.pixels) {
        for c in 0..3 {
            let d = p[c] as f64 - q[c] as f64;
            abs += d.abs();
            sq += d * d;
        }
    }
    let mse = sq / n;
    let psnr = if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    };
    Ok(ImageMetricResult {
        l1: abs / n / 255.0,
        psnr,
        ssim: ssim(a, b)?,
    })
}

const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;
const PEAK: f64 = 255.0;

fn gaussian_taps() -> [f64; WINDOW] {
    let half = (WINDOW / 2) as f64;
    let mut taps = [0.0; WINDOW];
    for (i, t) in taps.iter_mut().enumerate() {
        let x = i as f64 - half;
        *t = (-x * x / (2.0 * SIGMA * SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.map(|t| t / sum)
}

/// Separable Gaussian filter over the valid region.
fn filter(values: &[f64], w: usize, h: usize, taps: &[f64; WINDOW]) -> Vec<f64> {
    let (ow, oh) = (w - WINDOW + 1, h - WINDOW + 1);
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = (0..WINDOW).map(|k| taps[k] * values[y * w + x + k]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..WINDOW).map(|k| taps[k] * rows[(y + k) * ow + x]).sum();
        }
    }
    out
}

/// Mean structural similarity over all valid 11×11 windows (Gaussian
/// weights, σ = 1.5), averaged over the three channels.
pub fn ssim(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    a.check_same_size(b.width, b.height)?;
    let (w, h) = (a.width as usize, a.height as usize);
    if w < WINDOW || h < WINDOW {
        return Err(Error::InvalidArgument(format!(
            "SSIM needs images of at least {WINDOW}x{WINDOW} pixels"
        )));
    }
    let taps = gaussian_taps();
    let c1 = (K1 * PEAK).powi(2);
    let c2 = (K2 * PEAK).powi(2);
    let mut total = 0.0;
    for c in 0..3 {
        let x: Vec<f64> = a.pixels.iter().map(|p| p[c] as f64).collect();
        let y: Vec<f64> = b.pixels.iter().map(|p| p[c] as f64).collect();
        let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
        let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
        let (mx, my) = (filter(&x, w, h, &taps), filter(&y, w, h, &taps));
        let (sxx, syy, sxy) = (
            filter(&xx, w, h, &taps),
            filter(&yy, w, h, &taps),
            filter(&xy, w, h, &taps),
        );
        let mut sum = 0.0;
        for i in 0..mx.len() {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            sum += ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
        }
        total += sum / mx.len() as f64;
    }
    Ok(total / 3.0)
}
