use approx::assert_relative_eq;
use curvrepair::chart::{extract_patch_from, parametrize, rasterize_mask};
use curvrepair::features::{mean_curvature, segment_by_seeds, synthesize_holes};
use curvrepair::mesh::{boundary_loops, load_mesh, normalize, primitives, save_mesh};
use curvrepair::metrics::mesh_distance;
use curvrepair::repair::coarse_fill;

#[test]
fn sampled_distance_converges_with_density() {
    let truth = primitives::icosphere(4);
    let candidate = primitives::bumpy_sphere(3, 0.03, 3.0, 0.2);
    let coarse = mesh_distance(&candidate, &truth, 20_000.0, 1).unwrap();
    let fine = mesh_distance(&candidate, &truth, 40_000.0, 1).unwrap();
    assert!(fine.samples > coarse.samples);
    assert_relative_eq!(coarse.mean, fine.mean, max_relative = 0.05);
}

#[test]
fn obj_and_ply_round_trips_keep_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let m = primitives::bumpy_sphere(2, 0.1, 2.0, 0.0);
    for name in ["m.obj", "m.ply"] {
        let p = dir.path().join(name);
        save_mesh(&p, &m).unwrap();
        let back = load_mesh(&p).unwrap();
        assert_eq!(back.faces(), m.faces());
        for (a, b) in back.positions().iter().zip(m.positions()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }
}

#[test]
fn curvature_is_invariant_to_normalization_up_to_scale() {
    let m = primitives::ellipsoid(3, [2.0, 1.0, 0.5]);
    let (n, t) = normalize(&m).unwrap();
    let (h, hn) = (mean_curvature(&m), mean_curvature(&n));
    let scale = (n.position(1) - n.position(0)).norm() / (m.position(1) - m.position(0)).norm();
    for (a, b) in h.values().iter().zip(hn.values()) {
        assert_relative_eq!(*a, b * scale, max_relative = 1e-9, epsilon = 1e-12);
    }
    let back = t.invert_mesh(&n);
    for (a, b) in back.positions().iter().zip(m.positions()) {
        assert_relative_eq!(a, b, epsilon = 1e-12);
    }
}

#[test]
fn segments_cover_the_mesh() {
    let m = primitives::bumpy_sphere(3, 0.05, 2.0, 0.3);
    for k in [2, 5, 10] {
        let s = segment_by_seeds(&m, k, 4).unwrap();
        assert_eq!(s.num_patches(), k);
        let total: usize = (0..k).map(|p| s.members(p).len()).sum();
        assert_eq!(total, m.num_vertices());
    }
}

#[test]
fn hole_chart_and_mask_line_up_with_the_fill() {
    let (holed, _) = synthesize_holes(&primitives::icosphere(4), 1, 6).unwrap();
    let hole = boundary_loops(&holed).remove(0);
    let (filled, fill) = coarse_fill(&holed, &hole).unwrap();
    let filled_loop = boundary_loops(&filled);
    assert!(filled_loop.is_empty());
    let mut seeds = fill.hole_loop.vertices.clone();
    seeds.extend(&fill.new_vertices);
    let patch = extract_patch_from(&filled, &seeds, 6, None).unwrap();
    assert!(patch.is_disk());
    let local_new: Vec<usize> = patch
        .parent_faces
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= holed.num_faces())
        .map(|(i, _)| i)
        .collect();
    assert_eq!(local_new.len(), fill.new_faces.len());
    let chart = parametrize(patch, 128).unwrap();
    assert_eq!(chart.flipped_triangles(), 0);
    let mask = rasterize_mask(&chart, &local_new);
    assert!(mask.count() > 0 && mask.count() < 128 * 128);
}
