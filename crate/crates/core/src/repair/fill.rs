use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::linalg::TripletBuilder;
use crate::mesh::{BoundaryLoop, TriMesh, Vec3};
use crate::{Error, Result};

/// What [`coarse_fill`] added to the mesh. New vertices and faces are
/// appended after the existing ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseFill {
    pub new_vertices: Vec<usize>,
    pub new_faces: Vec<usize>,
    pub hole_loop: BoundaryLoop,
    /// Set when the triangulation had to accept a questionable loop.
    pub warning: Option<String>,
}

const MAX_REFINE_PASSES: usize = 24;

/// Closes a boundary loop.
///
/// 1. Minimum-weight triangulation of the loop polygon, where a triangle's
///    weight is (largest dihedral angle to its neighbors, area), compared
///    lexicographically.
/// 2. Refinement: fill edges longer than √2 × the mean loop edge length are
///    split at their midpoint, then edges are flipped toward Delaunay.
/// 3. Fairing: new vertices are placed at the average of their neighbors
///    (a membrane surface spanning the loop).
///
/// Existing vertices are never moved and no existing face is removed.
pub fn coarse_fill(mesh: &TriMesh, hole: &BoundaryLoop) -> Result<(TriMesh, CoarseFill)> {
    let n = hole.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "boundary loop of length {n} cannot be filled"
        )));
    }
    let topo = mesh.topology();
    for (a, b) in hole.edges() {
        if !topo.is_boundary_edge(a, b) {
            return Err(Error::InvalidArgument(format!(
                "edge ({a}, {b}) of the loop is not a boundary edge"
            )));
        }
    }
    let (triangles, warning) = min_weight_triangulation(mesh, hole)?;
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    let mut fill = FillState::new(mesh, triangles);
    let rim_edges: Vec<f64> = hole
        .edges()
        .map(|(a, b)| (mesh.position(a) - mesh.position(b)).norm())
        .collect();
    let threshold = std::f64::consts::SQRT_2 * rim_edges.iter().sum::<f64>() / n as f64;
    for _ in 0..MAX_REFINE_PASSES {
        fill.fair()?;
        if fill.split_long_edges(threshold) == 0 {
            break;
        }
        fill.delaunay_flips();
    }
    fill.fair()?;

    let (mut positions, mut faces) = mesh.clone().into_parts();
    let first_vertex = positions.len();
    let first_face = faces.len();
    positions.extend(fill.positions.drain(first_vertex..));
    faces.extend(fill.faces.iter().copied());
    let out = TriMesh::new(positions, faces)?;
    let report = CoarseFill {
        new_vertices: (first_vertex..out.num_vertices()).collect(),
        new_faces: (first_face..out.num_faces()).collect(),
        hole_loop: hole.clone(),
        warning,
    };
    Ok((out, report))
}

fn unit_normal(a: Vec3, b: Vec3, c: Vec3) -> Option<Vec3> {
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    (len > 0.0).then(|| n / len)
}

fn angle_between(n1: Option<Vec3>, n2: Option<Vec3>) -> f64 {
    match (n1, n2) {
        (Some(a), Some(b)) => a.dot(&b).clamp(-1.0, 1.0).acos(),
        _ => std::f64::consts::PI,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Weight {
    angle: f64,
    area: f64,
}

impl Weight {
    const INFINITE: Self = Self {
        angle: f64::INFINITY,
        area: f64::INFINITY,
    };

    fn better_than(&self, other: &Self) -> bool {
        self.angle < other.angle || (self.angle == other.angle && self.area < other.area)
    }
}

/// Dynamic program over polygon sub-chains `(i, k)`. Triangle `(i, m, k)`
/// becomes face `[v_i, v_k, v_m]`, opposite to the loop direction, which
/// follows the existing faces.
fn min_weight_triangulation(mesh: &TriMesh, hole: &BoundaryLoop) -> Result<(Vec<[usize; 3]>, Option<String>)> {
    let v = &hole.vertices;
    let n = v.len();
    if n == 3 {
        return Ok((vec![[v[0], v[2], v[1]]], None));
    }
    let p = |i: usize| mesh.position(v[i]);
    let topo = mesh.topology();
    // Normal of the existing face across loop edge (i, i+1).
    let outside: Vec<Option<Vec3>> = (0..n)
        .map(|i| {
            let f = topo.edge_faces(v[i], v[(i + 1) % n])[0];
            Some(mesh.face_normal(f)).filter(|n| n.norm() > 0.0)
        })
        .collect();
    let idx = |i: usize, k: usize| i * n + k;
    let mut weight = vec![Weight::INFINITE; n * n];
    let mut split = vec![usize::MAX; n * n];
    for i in 0..n - 1 {
        weight[idx(i, i + 1)] = Weight { angle: 0.0, area: 0.0 };
    }
    let chord_allowed =
        |i: usize, k: usize| v[i] != v[k] && ((i == 0 && k == n - 1) || topo.edge(v[i], v[k]).is_none());
    let tri_normal = |i: usize, m: usize, k: usize| unit_normal(p(i), p(k), p(m));
    for gap in 2..n {
        for i in 0..n - gap {
            let k = i + gap;
            if !chord_allowed(i, k) {
                continue;
            }
            let mut best = Weight::INFINITE;
            let mut best_m = usize::MAX;
            for m in i + 1..k {
                let (left, right) = (weight[idx(i, m)], weight[idx(m, k)]);
                if left.angle.is_infinite() || right.angle.is_infinite() || v[i] == v[m] || v[m] == v[k] {
                    continue;
                }
                let normal = tri_normal(i, m, k);
                let neighbor_left = if m == i + 1 {
                    outside[i]
                } else {
                    tri_normal(i, split[idx(i, m)], m)
                };
                let neighbor_right = if k == m + 1 {
                    outside[m]
                } else {
                    tri_normal(m, split[idx(m, k)], k)
                };
                let mut angle = angle_between(normal, neighbor_left).max(angle_between(normal, neighbor_right));
                if i == 0 && k == n - 1 {
                    angle = angle.max(angle_between(normal, outside[n - 1]));
                }
                let area = (p(k) - p(i)).cross(&(p(m) - p(i))).norm() / 2.0;
                let w = Weight {
                    angle: angle.max(left.angle).max(right.angle),
                    area: area + left.area + right.area,
                };
                if w.better_than(&best) {
                    best = w;
                    best_m = m;
                }
            }
            weight[idx(i, k)] = best;
            split[idx(i, k)] = best_m;
        }
    }
    if split[idx(0, n - 1)] == usize::MAX {
        return Err(Error::Topology(format!(
            "no valid triangulation exists for a boundary loop of length {n}"
        )));
    }
    let mut triangles = Vec::with_capacity(n - 2);
    let mut stack = vec![(0, n - 1)];
    while let Some((i, k)) = stack.pop() {
        if k <= i + 1 {
            continue;
        }
        let m = split[idx(i, k)];
        triangles.push([v[i], v[k], v[m]]);
        stack.push((i, m));
        stack.push((m, k));
    }
    let warning = (weight[idx(0, n - 1)].angle >= std::f64::consts::FRAC_PI_2 * 1.9).then(|| {
        format!("boundary loop of length {n} has folded or self-intersecting geometry; fill may overlap itself")
    });
    Ok((triangles, warning))
}

/// Working copy of the fill region during refinement.
struct FillState<'a> {
    mesh: &'a TriMesh,
    positions: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    /// Undirected fill edge → fill faces using it.
    edge_faces: BTreeMap<(usize, usize), Vec<usize>>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Rotates `f` so that directed edge `a → b` comes first.
fn rotate_to(f: [usize; 3], a: usize, b: usize) -> Option<[usize; 3]> {
    (0..3)
        .map(|k| [f[k], f[(k + 1) % 3], f[(k + 2) % 3]])
        .find(|r| r[0] == a && r[1] == b)
}

impl<'a> FillState<'a> {
    fn new(mesh: &'a TriMesh, faces: Vec<[usize; 3]>) -> Self {
        let mut s = Self {
            mesh,
            positions: mesh.positions().to_vec(),
            faces: Vec::new(),
            edge_faces: BTreeMap::new(),
        };
        for f in faces {
            s.push_face(f);
        }
        s
    }

    fn push_face(&mut self, f: [usize; 3]) {
        let id = self.faces.len();
        self.faces.push(f);
        self.index_face(id);
    }

    fn index_face(&mut self, id: usize) {
        let f = self.faces[id];
        for k in 0..3 {
            self.edge_faces.entry(key(f[k], f[(k + 1) % 3])).or_default().push(id);
        }
    }

    fn unindex_face(&mut self, id: usize) {
        let f = self.faces[id];
        for k in 0..3 {
            let e = key(f[k], f[(k + 1) % 3]);
            if let Some(list) = self.edge_faces.get_mut(&e) {
                list.retain(|&g| g != id);
                if list.is_empty() {
                    self.edge_faces.remove(&e);
                }
            }
        }
    }

    fn replace_face(&mut self, id: usize, f: [usize; 3]) {
        self.unindex_face(id);
        self.faces[id] = f;
        self.index_face(id);
    }

    fn edge_exists(&self, a: usize, b: usize) -> bool {
        self.edge_faces.contains_key(&key(a, b))
            || (a.max(b) < self.mesh.num_vertices() && self.mesh.topology().edge(a, b).is_some())
    }

    /// Fill edges shared by two fill faces, in a deterministic order.
    fn interior_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .edge_faces
            .iter()
            .filter(|(_, f)| f.len() == 2)
            .map(|(&e, _)| e)
            .collect();
        edges.sort_unstable();
        edges
    }

    fn length(&self, (a, b): (usize, usize)) -> f64 {
        (self.positions[a] - self.positions[b]).norm()
    }

    fn split_long_edges(&mut self, threshold: f64) -> usize {
        let mut long: Vec<((usize, usize), f64)> = self
            .interior_edges()
            .into_iter()
            .map(|e| (e, self.length(e)))
            .filter(|&(_, l)| l > threshold)
            .collect();
        long.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        let mut count = 0;
        for ((a, b), _) in long {
            let Some(faces) = self.edge_faces.get(&(a, b)).cloned() else {
                continue;
            };
            if faces.len() != 2 {
                continue;
            }
            let m = self.positions.len();
            self.positions.push((self.positions[a] + self.positions[b]) * 0.5);
            for f in faces {
                let r = rotate_to(self.faces[f], a, b)
                    .or_else(|| rotate_to(self.faces[f], b, a))
                    .expect("face holds its edge");
                let [x, y, z] = r;
                self.replace_face(f, [x, m, z]);
                self.push_face([m, y, z]);
            }
            count += 1;
        }
        count
    }

    fn corner_angle(&self, at: usize, u: usize, w: usize) -> f64 {
        let (p, a, b) = (self.positions[at], self.positions[u], self.positions[w]);
        let (e1, e2) = (a - p, b - p);
        e1.cross(&e2).norm().atan2(e1.dot(&e2))
    }

    /// Flips interior fill edges whose opposite angles sum past π.
    fn delaunay_flips(&mut self) {
        let limit = 8 * self.faces.len().max(1);
        let mut flips = 0;
        let mut changed = true;
        while changed && flips < limit {
            changed = false;
            for (a, b) in self.interior_edges() {
                let Some(faces) = self.edge_faces.get(&(a, b)).cloned() else {
                    continue;
                };
                if faces.len() != 2 {
                    continue;
                }
                let (f1, f2) = match rotate_to(self.faces[faces[0]], a, b) {
                    Some(_) => (faces[0], faces[1]),
                    None => (faces[1], faces[0]),
                };
                let (Some([_, _, c]), Some([_, _, d])) =
                    (rotate_to(self.faces[f1], a, b), rotate_to(self.faces[f2], b, a))
                else {
                    continue;
                };
                if c == d || self.edge_exists(c, d) {
                    continue;
                }
                let opposite = self.corner_angle(c, a, b) + self.corner_angle(d, a, b);
                if opposite <= std::f64::consts::PI + 1e-9 {
                    continue;
                }
                let (p, q) = ([a, d, c], [d, b, c]);
                let p_ok = unit_normal(self.positions[p[0]], self.positions[p[1]], self.positions[p[2]]);
                let q_ok = unit_normal(self.positions[q[0]], self.positions[q[1]], self.positions[q[2]]);
                match (p_ok, q_ok) {
                    (Some(n1), Some(n2)) if n1.dot(&n2) > 0.0 => {}
                    _ => continue,
                }
                self.replace_face(f1, p);
                self.replace_face(f2, q);
                flips += 1;
                changed = true;
            }
        }
    }

    /// Solves `x_i = mean(neighbors)` for every new vertex with the loop
    /// vertices held fixed.
    fn fair(&mut self) -> Result<()> {
        let first = self.mesh.num_vertices();
        let count = self.positions.len() - first;
        if count == 0 {
            return Ok(());
        }
        let mut neighbors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); count];
        for &(a, b) in self.edge_faces.keys() {
            if a >= first {
                neighbors[a - first].insert(b);
            }
            if b >= first {
                neighbors[b - first].insert(a);
            }
        }
        let mut builder = TripletBuilder::new(count);
        let mut rhs = vec![[0.0; 3]; count];
        for (i, nb) in neighbors.iter().enumerate() {
            builder.add(i, i, nb.len() as f64);
            for &j in nb {
                if j >= first {
                    builder.add(i, j - first, -1.0);
                } else {
                    let q = self.positions[j];
                    for d in 0..3 {
                        rhs[i][d] += q[d];
                    }
                }
            }
        }
        let guess: Vec<[f64; 3]> = self.positions[first..].iter().map(|p| [p.x, p.y, p.z]).collect();
        let solved = builder.build().solve_columns(&rhs, &guess)?;
        for (i, s) in solved.into_iter().enumerate() {
            self.positions[first + i] = Vec3::new(s[0], s[1], s[2]);
        }
        Ok(())
    }
}
