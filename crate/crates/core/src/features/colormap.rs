//! Rainbow colormap `hue = 240°·(1 − t)` at full saturation and value:
//! blue (low, convex) → green (flat) → red (high, concave).

/// Knots of the piecewise-linear RGB curve at t = 0, ¼, ½, ¾, 1.
const KNOTS: [[f64; 3]; 5] = [
    [0.0, 0.0, 255.0],
    [0.0, 255.0, 255.0],
    [0.0, 255.0, 0.0],
    [255.0, 255.0, 0.0],
    [255.0, 0.0, 0.0],
];

/// Unquantized color for `t`, channels in `[0, 255]`. Out-of-range `t` is clamped.
pub fn colormap_rgb(t: f64) -> [f64; 3] {
    let t = if t.is_nan() { 0.5 } else { t.clamp(0.0, 1.0) };
    let s = ((t * 4.0).floor() as usize).min(3);
    let lambda = t * 4.0 - s as f64;
    let (a, b) = (KNOTS[s], KNOTS[s + 1]);
    [0, 1, 2].map(|c| a[c] + lambda * (b[c] - a[c]))
}

pub fn curvature_to_color(t: f64) -> [u8; 3] {
    colormap_rgb(t).map(|c| c.round() as u8)
}

/// Parameter of the nearest point on the colormap curve. Exact inverse of
/// [`colormap_rgb`]; ties go to the smaller `t`.
pub fn color_to_curvature_rgb(rgb: [f64; 3]) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for s in 0..4 {
        let (a, b) = (KNOTS[s], KNOTS[s + 1]);
        let d: [f64; 3] = [0, 1, 2].map(|c| b[c] - a[c]);
        let len2: f64 = d.iter().map(|x| x * x).sum();
        let along: f64 = (0..3).map(|c| (rgb[c] - a[c]) * d[c]).sum();
        let lambda = (along / len2).clamp(0.0, 1.0);
        let dist2: f64 = (0..3).map(|c| (a[c] + lambda * d[c] - rgb[c]).powi(2)).sum();
        if dist2 < best.0 {
            best = (dist2, (s as f64 + lambda) / 4.0);
        }
    }
    best.1
}

pub fn color_to_curvature(rgb: [u8; 3]) -> f64 {
    color_to_curvature_rgb(rgb.map(f64::from))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_colors() {
        assert_eq!(curvature_to_color(0.0), [0, 0, 255]);
        assert_eq!(curvature_to_color(0.5), [0, 255, 0]);
        assert_eq!(curvature_to_color(1.0), [255, 0, 0]);
        assert_eq!(curvature_to_color(-3.0), [0, 0, 255]);
        assert_eq!(curvature_to_color(7.0), [255, 0, 0]);
        assert_eq!(color_to_curvature([0, 255, 0]), 0.5);
    }

    #[test]
    fn matches_hsv_definition() {
        // Oracle: textbook HSV→RGB with S = V = 1.
        fn hsv(h: f64) -> [f64; 3] {
            let x = 1.0 - ((h / 60.0) % 2.0 - 1.0).abs();
            let (r, g, b) = match (h / 60.0) as u32 {
                0 => (1.0, x, 0.0),
                1 => (x, 1.0, 0.0),
                2 => (0.0, 1.0, x),
                3 => (0.0, x, 1.0),
                _ => (0.0, 0.0, 1.0),
            };
            [r * 255.0, g * 255.0, b * 255.0]
        }
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let (a, b) = (colormap_rgb(t), hsv(240.0 * (1.0 - t)));
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-9, "t={t}");
            }
        }
    }

    #[test]
    fn round_trip_within_quantization() {
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            assert!((color_to_curvature(curvature_to_color(t)) - t).abs() <= 1.0 / 510.0);
        }
        for i in 0..=4096 {
            let t = i as f64 / 4096.0;
            assert!((color_to_curvature_rgb(colormap_rgb(t)) - t).abs() < 1e-12);
        }
    }

    #[test]
    fn quantized_map_is_injective() {
        let mut seen = std::collections::HashSet::new();
        // 4 segments × 255 steps reach every representable color once.
        for i in 0..=1020 {
            seen.insert(curvature_to_color(i as f64 / 1020.0));
        }
        assert_eq!(seen.len(), 1021);
    }

    #[test]
    fn off_curve_projection_matches_sampled_oracle() {
        let dist2 = |a: [f64; 3], b: [f64; 3]| (0..3).map(|c| (a[c] - b[c]).powi(2)).sum::<f64>();
        for rgb in [
            [128.0, 128.0, 128.0],
            [200.0, 30.0, 90.0],
            [10.0, 100.0, 240.0],
            [255.0, 255.0, 255.0],
        ] {
            let oracle = (0..1024)
                .map(|i| dist2(colormap_rgb(i as f64 / 1023.0), rgb))
                .fold(f64::INFINITY, f64::min);
            let ours = dist2(colormap_rgb(color_to_curvature_rgb(rgb)), rgb);
            assert!(ours <= oracle + 1e-9, "{rgb:?}: {ours} vs {oracle}");
            // Sample spacing bounds how far the oracle can trail the exact projection.
            assert!(oracle.sqrt() - ours.sqrt() < 255.0 * 4.0 / 1023.0);
        }
    }
}
