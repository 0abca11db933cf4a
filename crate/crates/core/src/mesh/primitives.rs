//! Procedural meshes used as fixtures and ground truth.

use std::collections::HashMap;

use super::{edge_key, TriMesh, Vec3};

pub fn tetrahedron() -> TriMesh {
    let p = vec![
        Vec3::new(1.0, 1.0, 1.0),
        Vec3::new(1.0, -1.0, -1.0),
        Vec3::new(-1.0, 1.0, -1.0),
        Vec3::new(-1.0, -1.0, 1.0),
    ];
    TriMesh::from_parts(p, vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
}

/// Unit cube `[0,1]³`, two triangles per side.
pub fn cube() -> TriMesh {
    let p = (0..8)
        .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    let faces = vec![
        [0, 2, 1],
        [1, 2, 3],
        [4, 5, 6],
        [5, 7, 6],
        [0, 1, 4],
        [1, 5, 4],
        [2, 6, 3],
        [3, 6, 7],
        [0, 4, 2],
        [2, 4, 6],
        [1, 3, 5],
        [3, 7, 5],
    ];
    TriMesh::from_parts(p, faces)
}

/// Unit-radius icosphere. `subdivisions = n` gives `10·4ⁿ + 2` vertices.
pub fn icosphere(subdivisions: u32) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut positions: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, positions: &mut Vec<Vec3>| {
            *midpoints.entry(edge_key(a, b)).or_insert_with(|| {
                positions.push(((positions[a] + positions[b]) * 0.5).normalize());
                positions.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut positions);
            let bc = midpoint(b, c, &mut positions);
            let ca = midpoint(c, a, &mut positions);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::from_parts(positions, faces)
}

/// Flat `nx × ny` grid of quads in the z = 0 plane, split along alternating
/// diagonals, facing +z.
pub fn grid(nx: usize, ny: usize, spacing: f64) -> TriMesh {
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut positions = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            positions.push(Vec3::new(i as f64 * spacing, j as f64 * spacing, 0.0));
        }
    }
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            if (i + j) % 2 == 0 {
                faces.extend([[a, b, c], [a, c, d]]);
            } else {
                faces.extend([[a, b, d], [b, c, d]]);
            }
        }
    }
    TriMesh::from_parts(positions, faces)
}

/// Icosphere with a smooth radial bump field, `r = 1 + amplitude·Σ sin(...)`.
/// Gives sphere-like but non-constant curvature for fixtures.
pub fn bumpy_sphere(subdivisions: u32, amplitude: f64, frequency: f64, phase: f64) -> TriMesh {
    let base = icosphere(subdivisions);
    let positions = base
        .positions()
        .iter()
        .map(|p| {
            let bump =
                (frequency * p.x + phase).sin() * (frequency * p.y).cos() + 0.5 * (frequency * p.z - phase).sin();
            p * (1.0 + amplitude * bump)
        })
        .collect();
    base.with_positions(positions)
}

/// Axis-aligned ellipsoid from a unit icosphere.
pub fn ellipsoid(subdivisions: u32, radii: [f64; 3]) -> TriMesh {
    let base = icosphere(subdivisions);
    let positions = base
        .positions()
        .iter()
        .map(|p| Vec3::new(p.x * radii[0], p.y * radii[1], p.z * radii[2]))
        .collect();
    base.with_positions(positions)
}
