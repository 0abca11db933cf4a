use serde::{Deserialize, Serialize};

use super::farthest_point_sample;
use crate::mesh::TriMesh;
use crate::Result;

/// Vertex partition into patches grown from seeds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentLabeling {
    /// Patch id per vertex; patch `i` grows from `seeds[i]`.
    pub labels: Vec<usize>,
    pub seeds: Vec<usize>,
}

impl SegmentLabeling {
    pub fn num_patches(&self) -> usize {
        self.seeds.len()
    }

    pub fn members(&self, patch: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&v| self.labels[v] == patch).collect()
    }
}

/// Graph-distance Voronoi cells around `k` farthest-point seeds.
pub fn segment_by_seeds(mesh: &TriMesh, k: usize, rng_seed: u64) -> Result<SegmentLabeling> {
    let seeds = farthest_point_sample(mesh, k, rng_seed)?;
    Ok(segment_from_seeds(mesh, &seeds))
}

/// Multi-source breadth-first growth. A vertex joins the nearest seed by hop
/// count, ties going to the lower seed id. Vertices unreachable from every
/// seed fall into patch 0.
pub fn segment_from_seeds(mesh: &TriMesh, seeds: &[usize]) -> SegmentLabeling {
    let n = mesh.num_vertices();
    let mut labels = vec![usize::MAX; n];
    let mut frontier = Vec::new();
    for (id, &s) in seeds.iter().enumerate() {
        if labels[s] == usize::MAX {
            labels[s] = id;
            frontier.push(s);
        }
    }
    // Level-synchronous so that every vertex of a level sees all of its
    // predecessors before choosing.
    while !frontier.is_empty() {
        let mut next: Vec<usize> = Vec::new();
        let mut proposal: Vec<(usize, usize)> = Vec::new();
        for &v in &frontier {
            for &w in mesh.neighbors(v) {
                if labels[w] == usize::MAX {
                    proposal.push((w, labels[v]));
                }
            }
        }
        proposal.sort_unstable();
        for (w, label) in proposal {
            if labels[w] == usize::MAX {
                labels[w] = label;
                next.push(w);
            }
        }
        frontier = next;
    }
    for l in &mut labels {
        if *l == usize::MAX {
            *l = 0;
        }
    }
    SegmentLabeling {
        labels,
        seeds: seeds.to_vec(),
    }
}
