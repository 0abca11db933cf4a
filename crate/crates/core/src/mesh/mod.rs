//! Indexed triangle meshes and the topology queries every other stage builds on.

mod io;
mod normalize;
pub mod primitives;
mod topology;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use io::{load_mesh, load_mesh_with_stats, save_mesh, save_ply_colored, LoadStats};
pub use normalize::{normalize, NormalizationTransform};
pub(crate) use topology::vertex_fan_count;
pub use topology::{boundary_loops, connected_components, validate, ValidityReport};

pub type Vec3 = nalgebra::Vector3<f64>;

/// An undirected edge and the faces bordering it.
#[derive(Debug, Clone)]
pub struct EdgeRecord {
    pub vertices: [usize; 2],
    pub faces: Vec<usize>,
}

/// Adjacency derived from the face list. Built on first use and shared by
/// meshes that differ only in vertex positions.
#[derive(Debug)]
pub struct Topology {
    vertex_faces: Vec<Vec<usize>>,
    vertex_neighbors: Vec<Vec<usize>>,
    edges: Vec<EdgeRecord>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl Topology {
    fn build(num_vertices: usize, faces: &[[usize; 3]]) -> Self {
        let mut vertex_faces = vec![Vec::new(); num_vertices];
        let mut edges: Vec<EdgeRecord> = Vec::new();
        let mut edge_index = HashMap::with_capacity(faces.len() * 3 / 2 + 1);
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                vertex_faces[f[k]].push(fi);
                let key = edge_key(f[k], f[(k + 1) % 3]);
                let ei = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(EdgeRecord {
                        vertices: [key.0, key.1],
                        faces: Vec::with_capacity(2),
                    });
                    edges.len() - 1
                });
                edges[ei].faces.push(fi);
            }
        }
        let mut vertex_neighbors = vec![Vec::new(); num_vertices];
        for e in &edges {
            vertex_neighbors[e.vertices[0]].push(e.vertices[1]);
            vertex_neighbors[e.vertices[1]].push(e.vertices[0]);
        }
        for n in &mut vertex_neighbors {
            n.sort_unstable();
        }
        Self {
            vertex_faces,
            vertex_neighbors,
            edges,
            edge_index,
        }
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    /// Neighbors of `v`, sorted by index.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.vertex_neighbors[v]
    }

    /// Edges in order of first appearance in the face list.
    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&EdgeRecord> {
        self.edge_index.get(&edge_key(a, b)).map(|&i| &self.edges[i])
    }

    pub fn edge_faces(&self, a: usize, b: usize) -> &[usize] {
        self.edge(a, b).map_or(&[], |e| &e.faces)
    }

    pub fn is_boundary_edge(&self, a: usize, b: usize) -> bool {
        self.edge_faces(a, b).len() == 1
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Indexed triangle surface. Faces are counterclockwise seen from outside.
#[derive(Clone)]
pub struct TriMesh {
    positions: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    topology: OnceLock<Arc<Topology>>,
}

impl fmt::Debug for TriMesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TriMesh")
            .field("vertices", &self.positions.len())
            .field("faces", &self.faces.len())
            .finish()
    }
}

impl PartialEq for TriMesh {
    fn eq(&self, other: &Self) -> bool {
        self.positions == other.positions && self.faces == other.faces
    }
}

impl TriMesh {
    /// Builds a mesh after checking that every face references three distinct,
    /// valid vertices. Manifoldness is not required here; see [`validate`].
    pub fn new(positions: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = positions.len();
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= n) {
                return Err(Error::InvalidMesh(format!(
                    "face {fi} references a vertex outside 0..{n}"
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!("face {fi} repeats a vertex")));
            }
        }
        if positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh("non-finite vertex coordinate".into()));
        }
        Ok(Self::from_parts(positions, faces))
    }

    pub(crate) fn from_parts(positions: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        Self {
            positions,
            faces,
            topology: OnceLock::new(),
        }
    }

    /// Same connectivity, new positions. The cached topology is shared.
    pub fn with_positions(&self, positions: Vec<Vec3>) -> Self {
        assert_eq!(positions.len(), self.positions.len());
        let topology = OnceLock::new();
        if let Some(t) = self.topology.get() {
            let _ = topology.set(Arc::clone(t));
        }
        Self {
            positions,
            faces: self.faces.clone(),
            topology,
        }
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> Vec3 {
        self.positions[v]
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn into_parts(self) -> (Vec<Vec3>, Vec<[usize; 3]>) {
        (self.positions, self.faces)
    }

    pub fn topology(&self) -> &Topology {
        self.topology
            .get_or_init(|| Arc::new(Topology::build(self.positions.len(), &self.faces)))
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        self.topology().neighbors(v)
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        self.topology().vertex_faces(v)
    }

    pub fn corners(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.positions[a], self.positions[b], self.positions[c]]
    }

    /// Unnormalized face normal; its length is twice the face area.
    pub fn face_cross(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.corners(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    /// Unit face normal, zero for degenerate faces.
    pub fn face_normal(&self, f: usize) -> Vec3 {
        let n = self.face_cross(f);
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Vec3::zeros()
        }
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Area-weighted average of incident face normals, normalized. Vertices
    /// with no (or only degenerate) incident faces get the zero vector.
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        let mut acc = vec![Vec3::zeros(); self.positions.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            let n = self.face_cross(fi);
            for &v in f {
                acc[v] += n;
            }
        }
        acc.into_iter()
            .map(|n| {
                let len = n.norm();
                if len > 0.0 {
                    n / len
                } else {
                    Vec3::zeros()
                }
            })
            .collect()
    }

    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.positions.first()?;
        Some(
            self.positions
                .iter()
                .fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))),
        )
    }

    pub fn bbox_diagonal(&self) -> f64 {
        self.bounding_box().map_or(0.0, |(lo, hi)| (hi - lo).norm())
    }

    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.topology().edges();
        if edges.is_empty() {
            return 0.0;
        }
        edges
            .iter()
            .map(|e| (self.positions[e.vertices[0]] - self.positions[e.vertices[1]]).norm())
            .sum::<f64>()
            / edges.len() as f64
    }

    /// Vertices referenced by at least one face.
    pub fn referenced_vertices(&self) -> usize {
        let mut used = vec![false; self.positions.len()];
        for f in &self.faces {
            for &v in f {
                used[v] = true;
            }
        }
        used.into_iter().filter(|&u| u).count()
    }

    /// V − E + F over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        self.referenced_vertices() as i64 - self.topology().num_edges() as i64 + self.faces.len() as i64
    }

    /// Directed boundary half-edges `(a, b)` in the orientation of their face.
    pub fn boundary_half_edges(&self) -> Vec<(usize, usize)> {
        let topo = self.topology();
        let mut out = Vec::new();
        for e in topo.edges() {
            if e.faces.len() == 1 {
                let f = self.faces[e.faces[0]];
                for k in 0..3 {
                    let (a, b) = (f[k], f[(k + 1) % 3]);
                    if edge_key(a, b) == (e.vertices[0], e.vertices[1]) {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }

    /// Keeps the faces flagged in `keep` and drops vertices no kept face
    /// references. Surviving vertices keep their relative order. Returns the
    /// new mesh and the old→new vertex map.
    pub fn retain_faces(&self, keep: &[bool]) -> (TriMesh, Vec<Option<usize>>) {
        let mut used = vec![false; self.positions.len()];
        for (f, _) in self.faces.iter().zip(keep).filter(|(_, &k)| k) {
            for &v in f {
                used[v] = true;
            }
        }
        let mut map = vec![None; self.positions.len()];
        let mut positions = Vec::new();
        for (v, _) in used.iter().enumerate().filter(|(_, &u)| u) {
            map[v] = Some(positions.len());
            positions.push(self.positions[v]);
        }
        let faces = self
            .faces
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(f, _)| f.map(|v| map[v].unwrap()))
            .collect();
        (TriMesh::from_parts(positions, faces), map)
    }
}

/// A closed chain of boundary vertices, ordered along the face orientation of
/// the boundary edges (each `(v[i], v[i+1])` is traversed that way by its face).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub vertices: Vec<usize>,
}

impl BoundaryLoop {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Consecutive vertex pairs, wrapping around.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}
