use super::{MaskImage, PatchChart, RasterImage};
use crate::features::{curvature_to_color, ScalarField};

/// Pixels outside the chart.
pub const BACKGROUND: [u8; 3] = [0, 0, 0];

/// Local face covering each pixel center, `None` outside the chart. On shared
/// edges the lower face index wins.
pub fn coverage(chart: &PatchChart) -> Vec<Option<usize>> {
    let res = chart.resolution as usize;
    let mut out = vec![None; res * res];
    for f in 0..chart.patch.mesh.num_faces() {
        for_each_covered_pixel(chart, f, |idx, _| {
            if out[idx].is_none() {
                out[idx] = Some(f);
            }
        });
    }
    out
}

/// Calls `visit(pixel_index, barycentric)` for every pixel center inside
/// face `f` (closed triangle).
fn for_each_covered_pixel(chart: &PatchChart, f: usize, mut visit: impl FnMut(usize, [f64; 3])) {
    let res = chart.resolution as f64;
    let [a, b, c] = chart.patch.mesh.faces()[f].map(|v| chart.uv[v]);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    if det == 0.0 {
        return;
    }
    let lo_u = a[0].min(b[0]).min(c[0]);
    let hi_u = a[0].max(b[0]).max(c[0]);
    let lo_v = a[1].min(b[1]).min(c[1]);
    let hi_v = a[1].max(b[1]).max(c[1]);
    let span = |lo: f64, hi: f64| {
        let first = ((lo * res - 0.5).ceil().max(0.0)) as usize;
        let last = ((hi * res - 0.5).floor().min(res - 1.0)).max(-1.0);
        (first, last)
    };
    let (x0, x1) = span(lo_u, hi_u);
    let (y0, y1) = span(lo_v, hi_v);
    if x1 < 0.0 || y1 < 0.0 {
        return;
    }
    let eps = 1e-12;
    for y in y0..=(y1 as usize) {
        let pv = (y as f64 + 0.5) / res;
        for x in x0..=(x1 as usize) {
            let pu = (x as f64 + 0.5) / res;
            let l1 = ((pu - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (pv - a[1])) / det;
            let l2 = ((b[0] - a[0]) * (pv - a[1]) - (pu - a[0]) * (b[1] - a[1])) / det;
            let l0 = 1.0 - l1 - l2;
            if l0 >= -eps && l1 >= -eps && l2 >= -eps {
                visit(y * chart.resolution as usize + x, [l0, l1, l2]);
            }
        }
    }
}

/// Draws per-vertex colors with barycentric interpolation.
pub fn rasterize_colors(chart: &PatchChart, colors: &[[u8; 3]]) -> RasterImage {
    let res = chart.resolution;
    let mut img = RasterImage::filled(res, res, BACKGROUND);
    let mut done = vec![false; (res * res) as usize];
    for f in 0..chart.patch.mesh.num_faces() {
        let corner = chart.patch.mesh.faces()[f].map(|v| colors[v]);
        for_each_covered_pixel(chart, f, |idx, l| {
            if done[idx] {
                return;
            }
            done[idx] = true;
            let mut px = [0u8; 3];
            for (ch, out) in px.iter_mut().enumerate() {
                let v = l[0] * corner[0][ch] as f64 + l[1] * corner[1][ch] as f64 + l[2] * corner[2][ch] as f64;
                *out = v.round().clamp(0.0, 255.0) as u8;
            }
            img.pixels[idx] = px;
        });
    }
    img
}

/// Curvature image of a chart. `normalized` holds one `[0, 1]` value per
/// local chart vertex.
pub fn rasterize(chart: &PatchChart, normalized: &ScalarField) -> RasterImage {
    let colors: Vec<[u8; 3]> = normalized.values().iter().map(|&t| curvature_to_color(t)).collect();
    rasterize_colors(chart, &colors)
}

/// White where a pixel center is covered by one of `hole_faces` (local face
/// ids), black elsewhere.
pub fn rasterize_mask(chart: &PatchChart, hole_faces: &[usize]) -> MaskImage {
    let res = chart.resolution;
    let mut is_hole = vec![false; chart.patch.mesh.num_faces()];
    for &f in hole_faces {
        is_hole[f] = true;
    }
    let mut mask = MaskImage::empty(res, res);
    for (bit, face) in mask.bits.iter_mut().zip(coverage(chart)) {
        *bit = face.is_some_and(|f| is_hole[f]);
    }
    mask
}

/// Bilinear lookup at a UV position; the four taps are pixel centers.
pub fn sample_image_at_uv(image: &RasterImage, uv: [f64; 2]) -> [f64; 3] {
    let (w, h) = (image.width as f64, image.height as f64);
    let px = (uv[0].clamp(0.0, 1.0) * w - 0.5).clamp(0.0, w - 1.0);
    let py = (uv[1].clamp(0.0, 1.0) * h - 0.5).clamp(0.0, h - 1.0);
    let (x0, y0) = (px.floor() as u32, py.floor() as u32);
    let x1 = (x0 + 1).min(image.width - 1);
    let y1 = (y0 + 1).min(image.height - 1);
    let (fx, fy) = (px - x0 as f64, py - y0 as f64);
    let tap = |x: u32, y: u32| image.get(x, y).map(f64::from);
    let (c00, c10, c01, c11) = (tap(x0, y0), tap(x1, y0), tap(x0, y1), tap(x1, y1));
    [0, 1, 2].map(|c| (1.0 - fy) * ((1.0 - fx) * c00[c] + fx * c10[c]) + fy * ((1.0 - fx) * c01[c] + fx * c11[c]))
}

pub fn sample_image_at_vertex(chart: &PatchChart, image: &RasterImage, vertex: usize) -> [f64; 3] {
    sample_image_at_uv(image, chart.uv[vertex])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{parametrize, patch::build_patch};
    use crate::mesh::{primitives, TriMesh, Vec3};

    fn chart_of(mesh: &TriMesh, res: u32) -> PatchChart {
        parametrize(build_patch(mesh, &vec![true; mesh.num_faces()]), res).unwrap()
    }

    #[test]
    fn constant_field_is_flat_green() {
        let c = chart_of(&primitives::grid(6, 6, 1.0), 64);
        let img = rasterize(&c, &ScalarField(vec![0.5; c.uv.len()]));
        let cov = coverage(&c);
        for (px, f) in img.pixels.iter().zip(&cov) {
            assert_eq!(*px, if f.is_some() { [0, 255, 0] } else { BACKGROUND });
        }
        // Every vertex samples back the same color when its neighborhood is covered.
        for v in 0..c.uv.len() {
            let s = sample_image_at_vertex(&c, &img, v);
            let r = ((c.uv[v][0] - 0.5).powi(2) + (c.uv[v][1] - 0.5).powi(2)).sqrt();
            if r < 0.44 {
                assert_eq!(s, [0.0, 255.0, 0.0]);
            }
        }
    }

    #[test]
    fn one_triangle_pixel_count_matches_area() {
        let m = TriMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], vec![[0, 1, 2]]).unwrap();
        let c = chart_of(&m, 200);
        let covered = coverage(&c).iter().filter(|f| f.is_some()).count() as f64;
        let area = c.signed_uv_area(0) * 200.0 * 200.0;
        // Oracle: independent point-in-triangle test over all pixel centers.
        let [a, b, d] = [c.uv[0], c.uv[1], c.uv[2]];
        let side =
            |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]);
        let mut brute = 0;
        for y in 0..200 {
            for x in 0..200 {
                let p = [(x as f64 + 0.5) / 200.0, (y as f64 + 0.5) / 200.0];
                if side(a, b, p) >= 0.0 && side(b, d, p) >= 0.0 && side(d, a, p) >= 0.0 {
                    brute += 1;
                }
            }
        }
        assert_eq!(covered as usize, brute);
        let perimeter = 200.0 * 3.0 * 0.45 * 3f64.sqrt();
        assert!((covered - area).abs() <= perimeter);
    }

    #[test]
    fn linear_field_gives_monotone_hue() {
        let g = primitives::grid(20, 2, 1.0);
        let c = chart_of(&g, 128);
        let t: Vec<f64> = g.positions().iter().map(|p| p.x / 20.0).collect();
        let img = rasterize(&c, &ScalarField(t));
        // Along the chart, hue parameter should increase with the x of the grid.
        let decode = |v: usize| crate::features::color_to_curvature_rgb(sample_image_at_vertex(&c, &img, v));
        let mid: Vec<usize> = (0..=20).map(|i| 21 + i).collect(); // row j = 1
        let values: Vec<f64> = mid.iter().map(|&v| decode(v)).collect();
        for w in values.windows(2) {
            assert!(w[1] >= w[0] - 1e-3, "{values:?}");
        }
        assert!(values[20] > values[0] + 0.5);
    }

    #[test]
    fn mask_subsets() {
        let c = chart_of(&primitives::grid(6, 6, 1.0), 96);
        let cov = coverage(&c);
        let none = rasterize_mask(&c, &[]);
        assert_eq!(none.count(), 0);
        let all: Vec<usize> = (0..c.patch.mesh.num_faces()).collect();
        let full = rasterize_mask(&c, &all);
        assert_eq!(full.bits, cov.iter().map(|f| f.is_some()).collect::<Vec<_>>());
    }

    #[test]
    fn bilinear_sampling() {
        let mut img = RasterImage::filled(4, 4, [0; 3]);
        img.set(1, 1, [100, 50, 10]);
        img.set(2, 1, [200, 150, 30]);
        assert_eq!(sample_image_at_uv(&img, [1.5 / 4.0, 1.5 / 4.0]), [100.0, 50.0, 10.0]);
        assert_eq!(sample_image_at_uv(&img, [2.0 / 4.0, 1.5 / 4.0]), [150.0, 100.0, 20.0]);
        // Clamped outside the unit square.
        assert_eq!(sample_image_at_uv(&img, [-3.0, 7.0]), [0.0; 3]);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn bilinear_matches_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut img = RasterImage::filled(16, 16, [0; 3]);
        for p in &mut img.pixels {
            *p = [rng.random(), rng.random(), rng.random()];
        }
        for _ in 0..200 {
            let uv = [rng.random_range(0.04..0.96), rng.random_range(0.04..0.96)];
            // Oracle: weighted sum over all pixels with tent weights.
            let mut expect = [0.0; 3];
            for y in 0..16 {
                for x in 0..16 {
                    let wx = (1.0 - ((x as f64 + 0.5) - uv[0] * 16.0).abs()).max(0.0);
                    let wy = (1.0 - ((y as f64 + 0.5) - uv[1] * 16.0).abs()).max(0.0);
                    for ch in 0..3 {
                        expect[ch] += wx * wy * img.get(x, y)[ch] as f64;
                    }
                }
            }
            let got = sample_image_at_uv(&img, uv);
            for ch in 0..3 {
                assert!((got[ch] - expect[ch]).abs() < 1e-9);
            }
        }
    }
}
