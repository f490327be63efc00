//! Breadth-first distance fields from the source face.
//!
//! One BFS per source vertex, run in parallel. This costs O(nk) overall,
//! which is fine at the scales this crate targets (n up to ~10^5, k up to
//! ~10^3) and keeps the construction simple; only distances are exposed,
//! so queue tie order does not matter.

use crate::instance::{OSInstance, SubdividedInstance};
use crate::planar::{PlanarGraph, Vertex};
use rayon::prelude::*;
use std::collections::VecDeque;

pub fn bfs_distances(g: &PlanarGraph, src: Vertex) -> Vec<u32> {
    let mut dist = vec![u32::MAX; g.n()];
    let mut queue = VecDeque::new();
    dist[src as usize] = 0;
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &v in g.neighbors(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = du + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Hop counts from every source to every vertex. `dist[i][v]` is the
/// distance from the i-th source.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub sources: Vec<Vertex>,
    pub dist: Vec<Vec<u32>>,
    /// True when the field was computed on a subdivided instance
    /// (sources = S'), which is what binary patterns require.
    pub subdivided: bool,
}

impl DistanceField {
    pub fn source_count(&self) -> usize {
        self.sources.len()
    }
}

fn field(g: &PlanarGraph, sources: &[Vertex], subdivided: bool) -> DistanceField {
    let dist: Vec<Vec<u32>> = sources
        .par_iter()
        .map(|&s| bfs_distances(g, s))
        .collect();
    DistanceField {
        sources: sources.to_vec(),
        dist,
        subdivided,
    }
}

/// One BFS tree per vertex of S.
pub fn all_source_bfs(inst: &OSInstance) -> DistanceField {
    field(&inst.graph, &inst.sources, false)
}

/// One BFS tree per vertex of S' on the subdivided graph.
pub fn all_source_bfs_subdivided(sub: &SubdividedInstance) -> DistanceField {
    field(&sub.inst.graph, &sub.inst.sources, true)
}
