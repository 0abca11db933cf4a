use serde::{Deserialize, Serialize};

use super::{BoundaryLoop, TriMesh};

/// Every boundary cycle of `mesh`, longest first. Each boundary edge lands
/// in exactly one loop. A closed mesh yields no loops.
pub fn boundary_loops(mesh: &TriMesh) -> Vec<BoundaryLoop> {
    let half_edges = mesh.boundary_half_edges();
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_vertices()];
    for (i, &(a, _)) in half_edges.iter().enumerate() {
        outgoing[a].push(i);
    }
    let mut used = vec![false; half_edges.len()];
    let mut loops = Vec::new();
    for start in 0..half_edges.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (origin, mut cur) = half_edges[start];
        let mut vertices = vec![origin];
        while cur != origin {
            vertices.push(cur);
            match outgoing[cur].iter().copied().find(|&h| !used[h]) {
                Some(h) => {
                    used[h] = true;
                    cur = half_edges[h].1;
                }
                // Inconsistent orientation leaves an open chain.
                None => break,
            }
        }
        loops.push(BoundaryLoop { vertices });
    }
    loops.sort_by_key(|l| std::cmp::Reverse(l.len()));
    loops
}

/// Labels faces by edge-connected component. Returns `(labels, count)`.
pub fn connected_components(mesh: &TriMesh) -> (Vec<usize>, usize) {
    let topo = mesh.topology();
    let mut label = vec![usize::MAX; mesh.num_faces()];
    let mut count = 0;
    let mut stack = Vec::new();
    for seed in 0..mesh.num_faces() {
        if label[seed] != usize::MAX {
            continue;
        }
        label[seed] = count;
        stack.push(seed);
        while let Some(f) = stack.pop() {
            let face = mesh.faces()[f];
            for k in 0..3 {
                for &g in topo.edge_faces(face[k], face[(k + 1) % 3]) {
                    if label[g] == usize::MAX {
                        label[g] = count;
                        stack.push(g);
                    }
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Number of edge-connected fans around `v`; 1 for a manifold vertex.
pub(crate) fn vertex_fan_count(mesh: &TriMesh, v: usize) -> usize {
    let faces = mesh.vertex_faces(v);
    if faces.is_empty() {
        return 0;
    }
    let topo = mesh.topology();
    let mut seen = vec![false; faces.len()];
    let mut fans = 0;
    for s in 0..faces.len() {
        if seen[s] {
            continue;
        }
        fans += 1;
        seen[s] = true;
        let mut stack = vec![faces[s]];
        while let Some(f) = stack.pop() {
            for &w in &mesh.faces()[f] {
                if w == v {
                    continue;
                }
                for &g in topo.edge_faces(v, w) {
                    if let Some(i) = faces.iter().position(|&x| x == g) {
                        if !seen[i] {
                            seen[i] = true;
                            stack.push(g);
                        }
                    }
                }
            }
        }
    }
    fans
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub manifold: bool,
    pub watertight: bool,
    pub single_component: bool,
    pub orientable: bool,
    pub vertices: usize,
    pub faces: usize,
    pub edges: usize,
    pub boundary_loops: usize,
    pub components: usize,
    pub euler_characteristic: i64,
}

impl ValidityReport {
    /// The curation criteria for a repairable or dataset-ready model.
    pub fn is_clean(&self) -> bool {
        self.manifold && self.watertight && self.single_component && self.orientable
    }
}

pub fn validate(mesh: &TriMesh) -> ValidityReport {
    let topo = mesh.topology();
    let edge_manifold = topo.edges().iter().all(|e| e.faces.len() <= 2);
    let vertex_manifold = (0..mesh.num_vertices()).all(|v| vertex_fan_count(mesh, v) <= 1);
    let watertight = !topo.edges().is_empty() && topo.edges().iter().all(|e| e.faces.len() == 2);
    let orientable = topo.edges().iter().all(|e| match e.faces.as_slice() {
        [_] => true,
        [f, g] => {
            let dir = |face: usize| {
                let t = mesh.faces()[face];
                (0..3).any(|k| t[k] == e.vertices[0] && t[(k + 1) % 3] == e.vertices[1])
            };
            dir(*f) != dir(*g)
        }
        _ => false,
    });
    let (_, components) = connected_components(mesh);
    ValidityReport {
        manifold: edge_manifold && vertex_manifold,
        watertight,
        single_component: components == 1,
        orientable,
        vertices: mesh.num_vertices(),
        faces: mesh.num_faces(),
        edges: topo.num_edges(),
        boundary_loops: if edge_manifold { boundary_loops(mesh).len() } else { 0 },
        components,
        euler_characteristic: mesh.euler_characteristic(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{primitives, Vec3};

    #[test]
    fn tetrahedron_is_clean() {
        let m = primitives::tetrahedron();
        assert!(boundary_loops(&m).is_empty());
        let r = validate(&m);
        assert!(r.is_clean(), "{r:?}");
        assert_eq!(r.euler_characteristic, 2);
    }

    #[test]
    fn single_triangle_has_one_loop() {
        let m = TriMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], vec![[0, 1, 2]]).unwrap();
        let loops = boundary_loops(&m);
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].vertices, vec![0, 1, 2]);
        assert_eq!(m.boundary_half_edges().len(), 3);
    }

    #[test]
    fn two_triangles_are_two_components() {
        let p = (0..6).map(|i| Vec3::new(i as f64, (i % 3) as f64, 0.0)).collect();
        let m = TriMesh::new(p, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        let r = validate(&m);
        assert!(!r.single_component);
        assert_eq!(r.components, 2);
    }

    #[test]
    fn fin_edge_is_not_manifold() {
        // Three faces hinge on edge (0, 1).
        let p = vec![
            Vec3::zeros(),
            Vec3::x(),
            Vec3::y(),
            Vec3::z(),
            Vec3::new(0.5, -1.0, 0.0),
        ];
        let m = TriMesh::new(p, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap();
        // Oracle: count faces per undirected edge by brute force.
        let mut max_share = 0;
        for a in 0..5 {
            for b in a + 1..5 {
                let n = m.faces().iter().filter(|f| f.contains(&a) && f.contains(&b)).count();
                max_share = max_share.max(n);
            }
        }
        assert_eq!(max_share, 3);
        let r = validate(&m);
        assert!(!r.manifold);
        assert!(!r.orientable);
    }

    #[test]
    fn bowtie_vertex_is_not_manifold() {
        let p = vec![
            Vec3::zeros(),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(-1.0, 1.0, 0.0),
            Vec3::new(1.0, -1.0, 0.0),
            Vec3::new(-1.0, -1.0, 0.0),
        ];
        let m = TriMesh::new(p, vec![[0, 1, 2], [0, 4, 3]]).unwrap();
        assert_eq!(vertex_fan_count(&m, 0), 2);
        assert!(!validate(&m).manifold);
    }

    #[test]
    fn sphere_with_two_caps_has_two_loops() {
        let m = primitives::icosphere(3);
        let keep: Vec<bool> = (0..m.num_faces())
            .map(|f| {
                let c = m.corners(f).iter().sum::<Vec3>() / 3.0;
                c.z.abs() < 0.8
            })
            .collect();
        let (cut, _) = m.retain_faces(&keep);
        let loops = boundary_loops(&cut);
        assert_eq!(loops.len(), 2);
        // Oracle: loops partition the boundary edge set.
        let mut from_loops: Vec<(usize, usize)> = loops.iter().flat_map(|l| l.edges().collect::<Vec<_>>()).collect();
        let mut boundary = cut.boundary_half_edges();
        from_loops.sort_unstable();
        boundary.sort_unstable();
        assert_eq!(from_loops, boundary);
        for l in &loops {
            let mut vs = l.vertices.clone();
            vs.sort_unstable();
            vs.dedup();
            assert_eq!(vs.len(), l.len(), "loop is not simple");
        }
    }
}
