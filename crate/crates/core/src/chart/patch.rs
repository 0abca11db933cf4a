use crate::mesh::{boundary_loops, connected_components, BoundaryLoop, TriMesh};
use crate::{Error, Result};

/// A connected piece of a parent mesh with back-references.
#[derive(Debug, Clone)]
pub struct Patch {
    pub mesh: TriMesh,
    /// Local vertex → parent vertex.
    pub parent_vertices: Vec<usize>,
    /// Local face → parent face.
    pub parent_faces: Vec<usize>,
    /// Boundary loops of the patch that are holes of the parent (open
    /// boundary the patch surrounds rather than a cut through the surface).
    pub holes: Vec<BoundaryLoop>,
}

impl Patch {
    /// Parent vertex → local vertex.
    pub fn local_index(&self) -> impl Fn(usize) -> Option<usize> + '_ {
        move |p| self.parent_vertices.binary_search(&p).ok()
    }

    /// Euler characteristic with every parent hole inside the patch capped.
    pub fn capped_euler_characteristic(&self) -> i64 {
        self.mesh.euler_characteristic() + self.holes.len() as i64
    }

    /// Disk topology with no uncapped holes: one boundary loop, χ = 1.
    pub fn is_disk(&self) -> bool {
        self.holes.is_empty() && self.mesh.euler_characteristic() == 1 && boundary_loops(&self.mesh).len() == 1
    }
}

/// Faces within `rings` breadth-first rings of a boundary loop. Ring 0 is
/// the faces touching the loop. Growth stops at the last ring for which the
/// patch, with the hole capped, is still a disk, and never crosses the
/// boundary of another hole.
pub fn extract_patch(mesh: &TriMesh, hole: &BoundaryLoop, rings: usize) -> Result<Patch> {
    extract_patch_from(mesh, &hole.vertices, rings, None)
}

/// Ring growth from an arbitrary seed vertex set, optionally restricted to
/// the faces flagged in `allowed`. Parent boundary edges may only appear in
/// the patch when both endpoints are seeds.
pub fn extract_patch_from(mesh: &TriMesh, seeds: &[usize], rings: usize, allowed: Option<&[bool]>) -> Result<Patch> {
    let n = mesh.num_vertices();
    let topo = mesh.topology();
    let mut is_seed = vec![false; n];
    for &s in seeds {
        is_seed[s] = true;
    }
    let admissible = |f: usize| -> bool {
        if allowed.is_some_and(|a| !a[f]) {
            return false;
        }
        let t = mesh.faces()[f];
        (0..3).all(|k| {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            !topo.is_boundary_edge(a, b) || (is_seed[a] && is_seed[b])
        })
    };
    let grow = |selected: &[bool], from: &[usize]| -> Vec<bool> {
        let mut next = selected.to_vec();
        for &v in from {
            for &f in mesh.vertex_faces(v) {
                if !next[f] && admissible(f) {
                    next[f] = true;
                }
            }
        }
        next
    };
    let vertices_of = |selected: &[bool]| -> Vec<usize> {
        let mut vs: Vec<usize> = selected
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .flat_map(|(f, _)| mesh.faces()[f])
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    };

    let empty = vec![false; mesh.num_faces()];
    let first = close_fans(mesh, grow(&empty, seeds), &admissible);
    if !first.iter().any(|&s| s) {
        return Err(Error::Topology("no admissible faces around the seed vertices".into()));
    }
    let mut current = build_patch(mesh, &first);
    if !disk_with_caps(&current) {
        return Err(Error::Topology(
            "patch around the hole is not a disk even at ring 0".into(),
        ));
    }
    let mut selected = first;
    let mut ring = 0;
    while ring < rings {
        let candidate = close_fans(mesh, grow(&selected, &vertices_of(&selected)), &admissible);
        if candidate == selected {
            break;
        }
        let patch = build_patch(mesh, &candidate);
        if !disk_with_caps(&patch) {
            break;
        }
        selected = candidate;
        current = patch;
        ring += 1;
    }
    Ok(current)
}

/// Adds the admissible faces around vertices whose selected faces form more
/// than one fan, a few rounds at most.
fn close_fans(mesh: &TriMesh, mut selected: Vec<bool>, admissible: &impl Fn(usize) -> bool) -> Vec<bool> {
    let topo = mesh.topology();
    for _ in 0..4 {
        let mut pinched = Vec::new();
        let mut seen = vec![false; mesh.num_vertices()];
        for (f, _) in selected.iter().enumerate().filter(|(_, &s)| s) {
            for &v in &mesh.faces()[f] {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                let faces = mesh.vertex_faces(v);
                let inside = faces.iter().filter(|&&g| selected[g]).count();
                if inside == faces.len() {
                    continue;
                }
                let joined = mesh
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| {
                        let ef = topo.edge_faces(v, w);
                        ef.len() == 2 && ef.iter().all(|&g| selected[g])
                    })
                    .count();
                if inside - joined > 1 {
                    pinched.push(v);
                }
            }
        }
        if pinched.is_empty() {
            break;
        }
        let mut changed = false;
        for v in pinched {
            for &f in mesh.vertex_faces(v) {
                if !selected[f] && admissible(f) {
                    selected[f] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    selected
}

pub(crate) fn build_patch(mesh: &TriMesh, selected: &[bool]) -> Patch {
    let (sub, map) = mesh.retain_faces(selected);
    let mut parent_vertices = vec![0; sub.num_vertices()];
    for (old, new) in map.iter().enumerate() {
        if let Some(n) = new {
            parent_vertices[*n] = old;
        }
    }
    let parent_faces: Vec<usize> = (0..mesh.num_faces()).filter(|&f| selected[f]).collect();
    let parent_topo = mesh.topology();
    let loops = boundary_loops(&sub);
    let total = loops.len();
    let mut holes: Vec<BoundaryLoop> = loops
        .into_iter()
        .filter(|l| {
            l.edges()
                .all(|(a, b)| parent_topo.is_boundary_edge(parent_vertices[a], parent_vertices[b]))
        })
        .collect();
    // With no cut boundary at all, the longest parent boundary is the outline.
    if !holes.is_empty() && holes.len() == total {
        holes.remove(0);
    }
    Patch {
        mesh: sub,
        parent_vertices,
        parent_faces,
        holes,
    }
}

/// One outer boundary, manifold, connected, and χ = 1 once holes are capped.
fn disk_with_caps(p: &Patch) -> bool {
    let m = &p.mesh;
    let topo = m.topology();
    if topo.edges().iter().any(|e| e.faces.len() > 2) {
        return false;
    }
    if (0..m.num_vertices()).any(|v| crate::mesh::vertex_fan_count(m, v) != 1) {
        return false;
    }
    if connected_components(m).1 != 1 {
        return false;
    }
    let loops = boundary_loops(m);
    loops.len() == p.holes.len() + 1 && p.capped_euler_characteristic() == 1
}
