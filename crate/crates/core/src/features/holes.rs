use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{farthest_point_sample, seeded_rng};
use crate::mesh::{boundary_loops, connected_components, validate, TriMesh};
use crate::{Error, Result};

/// One synthetic hole, in the vertex/face indexing of the intact mesh.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoleSpec {
    pub seed_vertex: usize,
    pub removed_vertices: Vec<usize>,
    pub removed_faces: Vec<usize>,
}

/// Cuts `n_holes` disjoint holes into a watertight single-component mesh.
///
/// Seeds come from farthest point sampling. Each hole grows in breadth-first
/// order from its seed towards a random vertex count in `(0, 0.10·V/n]`,
/// stopping early before it would come within two rings of an earlier hole.
/// Every incident face of a removed vertex goes, and rim vertices left
/// pinched or dangling are removed as well, so the result stays manifold with
/// exactly one boundary loop per hole. Returns the damaged mesh (unreferenced
/// vertices dropped, survivors in original order) and the hole records.
pub fn synthesize_holes(mesh: &TriMesh, n_holes: usize, rng_seed: u64) -> Result<(TriMesh, Vec<HoleSpec>)> {
    if n_holes == 0 {
        return Ok((mesh.clone(), Vec::new()));
    }
    let report = validate(mesh);
    if !(report.manifold && report.watertight && report.single_component) {
        return Err(Error::InvalidArgument(
            "hole synthesis needs a watertight, manifold, single-component mesh".into(),
        ));
    }
    let n = mesh.num_vertices();
    if n_holes > n {
        return Err(Error::InvalidArgument(format!(
            "mesh with {n} vertices cannot host {n_holes} holes"
        )));
    }
    let seeds = farthest_point_sample(mesh, n_holes, rng_seed)?;
    let budget = 0.10 * n as f64 / n_holes as f64;
    // Largest count strictly below the per-hole budget, but at least the seed.
    let cap = ((budget.ceil() as usize).saturating_sub(1)).max(1);
    let mut rng = seeded_rng(rng_seed, 1);

    let mut state = RemovalState::new(mesh);
    let mut forbidden = vec![false; n];
    let mut holes = Vec::with_capacity(n_holes);
    for (h, &seed) in seeds.iter().enumerate() {
        let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
        let target = ((u * budget).ceil() as usize).saturating_sub(1).clamp(1, cap);
        if forbidden[seed] || state.owner[seed].is_some() {
            return Err(Error::InvalidArgument(format!(
                "mesh too small to host {n_holes} disjoint holes (hole {h} has no room)"
            )));
        }
        let mut members = state
            .try_grow(&[seed], h, cap, &forbidden)
            .ok_or_else(|| Error::InvalidArgument(format!("mesh too small to host {n_holes} disjoint holes")))?;
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut queued = vec![false; n];
        for &m in &members {
            queued[m] = true;
        }
        for &m in &members {
            for &w in mesh.neighbors(m) {
                if !queued[w] {
                    queued[w] = true;
                    queue.push_back(w);
                }
            }
        }
        while members.len() < target {
            let Some(c) = queue.pop_front() else { break };
            if state.owner[c] == Some(h) {
                continue;
            }
            if forbidden[c] || state.owner[c].is_some() {
                break;
            }
            let Some(added) = state.try_grow(&[c], h, cap - members.len(), &forbidden) else {
                break;
            };
            for &a in &added {
                for &w in mesh.neighbors(a) {
                    if !queued[w] {
                        queued[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            members.extend(added);
        }
        // Later holes keep at least two rings of distance.
        let mut ring: Vec<usize> = members.clone();
        for _ in 0..2 {
            let mut next = Vec::new();
            for &v in &ring {
                for &w in mesh.neighbors(v) {
                    if !forbidden[w] {
                        forbidden[w] = true;
                        next.push(w);
                    }
                }
            }
            ring = next;
        }
        for &m in &members {
            forbidden[m] = true;
        }
        members.sort_unstable();
        let mut faces: Vec<usize> = members
            .iter()
            .flat_map(|&v| mesh.vertex_faces(v).iter().copied())
            .collect();
        faces.sort_unstable();
        faces.dedup();
        holes.push(HoleSpec {
            seed_vertex: seed,
            removed_vertices: members,
            removed_faces: faces,
        });
    }
    let keep: Vec<bool> = state.face_removed.iter().map(|&r| !r).collect();
    let (damaged, _) = mesh.retain_faces(&keep);
    let loops = boundary_loops(&damaged).len();
    if loops != n_holes {
        return Err(Error::Topology(format!(
            "hole synthesis produced {loops} boundary loops instead of {n_holes}"
        )));
    }
    Ok((damaged, holes))
}

struct RemovalState<'a> {
    mesh: &'a TriMesh,
    owner: Vec<Option<usize>>,
    face_removed: Vec<bool>,
}

impl<'a> RemovalState<'a> {
    fn new(mesh: &'a TriMesh) -> Self {
        Self {
            mesh,
            owner: vec![None; mesh.num_vertices()],
            face_removed: vec![false; mesh.num_faces()],
        }
    }

    /// Removes `start` plus whatever is needed to keep the remainder
    /// manifold and connected. Rolls back and returns `None` if that needs
    /// more than `room` vertices or touches a forbidden vertex.
    fn try_grow(&mut self, start: &[usize], hole: usize, room: usize, forbidden: &[bool]) -> Option<Vec<usize>> {
        let mut added: Vec<usize> = Vec::new();
        let mut touched_faces: Vec<usize> = Vec::new();
        let mut pending: Vec<usize> = start.to_vec();
        let ok = loop {
            while let Some(v) = pending.pop() {
                if self.owner[v].is_some() {
                    continue;
                }
                if forbidden[v] || added.len() == room {
                    break;
                }
                self.owner[v] = Some(hole);
                added.push(v);
                for &f in self.mesh.vertex_faces(v) {
                    if !self.face_removed[f] {
                        self.face_removed[f] = true;
                        touched_faces.push(f);
                    }
                }
            }
            if !pending.is_empty() {
                break false;
            }
            // Rim vertices that are now dangling or pinched.
            let mut bad: Vec<usize> = Vec::new();
            for &a in &added {
                for &w in self.mesh.neighbors(a) {
                    if self.owner[w].is_none() && !self.rim_vertex_ok(w) {
                        bad.push(w);
                    }
                }
            }
            bad.sort_unstable();
            bad.dedup();
            if bad.is_empty() {
                // Enclosed islands join the hole.
                let keep: Vec<bool> = self.face_removed.iter().map(|&r| !r).collect();
                let islands = self.island_vertices(&keep);
                if islands.is_empty() {
                    break true;
                }
                pending = islands;
            } else {
                pending = bad;
            }
            pending.reverse();
        };
        if ok {
            Some(added)
        } else {
            for v in added {
                self.owner[v] = None;
            }
            for f in touched_faces {
                self.face_removed[f] = false;
            }
            None
        }
    }

    /// The surviving faces around `v` form one non-empty fan.
    fn rim_vertex_ok(&self, v: usize) -> bool {
        let faces = self.mesh.vertex_faces(v);
        let remaining = faces.iter().filter(|&&f| !self.face_removed[f]).count();
        if remaining == 0 {
            return false;
        }
        if remaining == faces.len() {
            return true;
        }
        let topo = self.mesh.topology();
        let joined = self
            .mesh
            .neighbors(v)
            .iter()
            .filter(|&&w| topo.edge_faces(v, w).iter().all(|&f| !self.face_removed[f]))
            .count();
        remaining - joined == 1
    }

    /// Vertices of every surviving component except the largest.
    fn island_vertices(&self, keep: &[bool]) -> Vec<usize> {
        let (sub, map) = self.mesh.retain_faces(keep);
        let (labels, count) = connected_components(&sub);
        if count <= 1 {
            return Vec::new();
        }
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l] += 1;
        }
        let main = (0..count).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).unwrap();
        let mut inverse = vec![0; sub.num_vertices()];
        for (old, new) in map.iter().enumerate() {
            if let Some(n) = new {
                inverse[*n] = old;
            }
        }
        let mut out: Vec<usize> = sub
            .faces()
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l != main)
            .flat_map(|(f, _)| f.iter().map(|&v| inverse[v]))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    #[test]
    fn tetrahedron_single_vertex_hole() {
        let m = primitives::tetrahedron();
        let (damaged, holes) = synthesize_holes(&m, 1, 3).unwrap();
        assert_eq!(holes[0].removed_vertices.len(), 1);
        assert_eq!(holes[0].removed_faces.len(), 3);
        assert_eq!(damaged.num_faces(), 1);
        let loops = boundary_loops(&damaged);
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].len(), 3);
    }

    #[test]
    fn five_holes_on_icosphere() {
        let m = primitives::icosphere(4);
        let (damaged, holes) = synthesize_holes(&m, 5, 17).unwrap();
        assert_eq!(holes.len(), 5);
        assert_eq!(boundary_loops(&damaged).len(), 5);
        let total: usize = holes.iter().map(|h| h.removed_vertices.len()).sum();
        assert!((total as f64) < 0.10 * 2562.0);
        // Oracle: pairwise disjoint removal sets.
        let mut all: Vec<usize> = holes.iter().flat_map(|h| h.removed_vertices.clone()).collect();
        let len = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), len);
        assert!(validate(&damaged).manifold);
        assert!(validate(&damaged).single_component);
    }

    #[test]
    fn holes_are_connected() {
        let m = primitives::icosphere(4);
        let (_, holes) = synthesize_holes(&m, 5, 2).unwrap();
        for h in &holes {
            let set: std::collections::HashSet<usize> = h.removed_vertices.iter().copied().collect();
            let mut seen = std::collections::HashSet::from([h.seed_vertex]);
            let mut stack = vec![h.seed_vertex];
            while let Some(v) = stack.pop() {
                for &w in m.neighbors(v) {
                    if set.contains(&w) && seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
            assert_eq!(seen.len(), set.len());
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let m = primitives::icosphere(3);
        let a = synthesize_holes(&m, 5, 99).unwrap();
        let b = synthesize_holes(&m, 5, 99).unwrap();
        assert_eq!(a.1, b.1);
        assert_eq!(a.0, b.0);
    }

    #[test]
    fn too_many_holes_is_an_error() {
        let m = primitives::icosphere(0);
        assert!(synthesize_holes(&m, 12, 1).is_err());
    }

    #[test]
    fn open_mesh_is_rejected() {
        let g = primitives::grid(4, 4, 1.0);
        assert!(synthesize_holes(&g, 1, 0).is_err());
    }
}
