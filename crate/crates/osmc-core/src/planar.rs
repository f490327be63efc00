//! Combinatorial embeddings of simple planar graphs and their duals.
//!
//! A graph is given by a rotation system: for every vertex, the cyclic
//! counterclockwise order of its neighbors. Every undirected edge `e`
//! contributes the two darts `2e` (discovery direction) and `2e + 1`
//! (reverse), so `rev(d) = d ^ 1` and no lookup table is needed.
//!
//! Faces are traced with `face_next(d) = rot_next(rev(d))`. Under this
//! convention `face_of(d)` is the face lying to the *left* of `d`, and a
//! connected rotation system describes a sphere embedding exactly when
//! Euler's formula `n - m + f = 2` holds for the traced faces. That check
//! is what rejects non-planar inputs: no planarity test is run, callers
//! must supply rotations.

use crate::error::{Error, Result};
use std::collections::HashMap;

pub type Vertex = u32;
pub type Dart = u32;
pub type FaceId = u32;

#[derive(Debug, Clone)]
pub struct PlanarGraph {
    n: usize,
    /// head[d] = vertex the dart points at; tail(d) = head[d ^ 1].
    head: Vec<Vertex>,
    /// Next dart counterclockwise around tail(d).
    rot_next: Vec<Dart>,
    face_of: Vec<FaceId>,
    /// Boundary darts of each face in trace order.
    faces: Vec<Vec<Dart>>,
    f_inf: FaceId,
    /// CSR adjacency in rotation order, plus the dart to each neighbor.
    adj_off: Vec<u32>,
    adj: Vec<Vertex>,
    adj_dart: Vec<Dart>,
}

impl PlanarGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.head.len() / 2
    }

    pub fn dart_count(&self) -> usize {
        self.head.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    #[inline]
    pub fn rev(&self, d: Dart) -> Dart {
        d ^ 1
    }

    #[inline]
    pub fn head(&self, d: Dart) -> Vertex {
        self.head[d as usize]
    }

    #[inline]
    pub fn tail(&self, d: Dart) -> Vertex {
        self.head[(d ^ 1) as usize]
    }

    #[inline]
    pub fn edge_of(&self, d: Dart) -> u32 {
        d >> 1
    }

    #[inline]
    pub fn rot_next(&self, d: Dart) -> Dart {
        self.rot_next[d as usize]
    }

    /// Next dart around the face of `d` (the face to its left).
    #[inline]
    pub fn face_next(&self, d: Dart) -> Dart {
        self.rot_next[(d ^ 1) as usize]
    }

    #[inline]
    pub fn face_of(&self, d: Dart) -> FaceId {
        self.face_of[d as usize]
    }

    pub fn face(&self, f: FaceId) -> &[Dart] {
        &self.faces[f as usize]
    }

    pub fn f_inf(&self) -> FaceId {
        self.f_inf
    }

    pub fn set_infinite_face(&mut self, f: FaceId) {
        assert!((f as usize) < self.faces.len());
        self.f_inf = f;
    }

    /// Neighbors of `v` in counterclockwise rotation order.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let (a, b) = self.adj_range(v);
        &self.adj[a..b]
    }

    /// Outgoing darts of `v` in counterclockwise rotation order.
    pub fn darts_from(&self, v: Vertex) -> &[Dart] {
        let (a, b) = self.adj_range(v);
        &self.adj_dart[a..b]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        let (a, b) = self.adj_range(v);
        b - a
    }

    fn adj_range(&self, v: Vertex) -> (usize, usize) {
        (
            self.adj_off[v as usize] as usize,
            self.adj_off[v as usize + 1] as usize,
        )
    }

    pub fn dart_between(&self, u: Vertex, v: Vertex) -> Option<Dart> {
        let (a, b) = self.adj_range(u);
        (a..b).find(|&i| self.adj[i] == v).map(|i| self.adj_dart[i])
    }

    /// Vertices of a face in trace order (tails of its boundary darts).
    pub fn face_vertices(&self, f: FaceId) -> Vec<Vertex> {
        self.faces[f as usize].iter().map(|&d| self.tail(d)).collect()
    }
}

/// Build an embedded graph from per-vertex neighbor cycles.
///
/// Rejects self-loops and parallel edges, one-sided adjacencies,
/// disconnected graphs, and rotation systems whose face count fails
/// Euler's formula.
pub fn build_embedding(n: usize, rotations: &[Vec<Vertex>]) -> Result<PlanarGraph> {
    if rotations.len() != n {
        return Err(Error::Format(format!(
            "expected {n} rotation lists, got {}",
            rotations.len()
        )));
    }
    if n < 2 {
        return Err(Error::Format("graph needs at least 2 vertices".into()));
    }

    for (u, rot) in rotations.iter().enumerate() {
        let mut seen = rot.clone();
        seen.sort_unstable();
        for w in seen.windows(2) {
            if w[0] == w[1] {
                return Err(Error::NotSimple(format!(
                    "vertex {u} lists neighbor {} twice",
                    w[0]
                )));
            }
        }
        for &v in rot {
            if v as usize >= n {
                return Err(Error::Format(format!(
                    "rotations[{u}]: neighbor {v} out of range (n = {n})"
                )));
            }
            if v as usize == u {
                return Err(Error::NotSimple(format!("vertex {u} has a self-loop")));
            }
        }
    }

    // Assign edge ids in deterministic scan order and darts per direction.
    let mut dart_of: HashMap<(Vertex, Vertex), Dart> = HashMap::new();
    let mut heads: Vec<Vertex> = Vec::new();
    for (u, rot) in rotations.iter().enumerate() {
        let u = u as Vertex;
        for &v in rot {
            if dart_of.contains_key(&(u, v)) {
                continue;
            }
            if !rotations[v as usize].contains(&u) {
                return Err(Error::InconsistentRotation(format!(
                    "vertex {u} lists {v} but {v} does not list {u}"
                )));
            }
            let d = heads.len() as Dart;
            heads.push(v);
            heads.push(u);
            dart_of.insert((u, v), d);
            dart_of.insert((v, u), d + 1);
        }
    }
    let m = heads.len() / 2;
    if m == 0 {
        return Err(Error::Format("graph has no edges".into()));
    }

    // Per-vertex dart lists in rotation order.
    let mut adj_off = Vec::with_capacity(n + 1);
    let mut adj = Vec::with_capacity(2 * m);
    let mut adj_dart = Vec::with_capacity(2 * m);
    adj_off.push(0u32);
    for (u, rot) in rotations.iter().enumerate() {
        for &v in rot {
            adj.push(v);
            adj_dart.push(dart_of[&(u as Vertex, v)]);
        }
        adj_off.push(adj.len() as u32);
    }

    let mut rot_next = vec![0 as Dart; 2 * m];
    for u in 0..n {
        let a = adj_off[u] as usize;
        let b = adj_off[u + 1] as usize;
        for i in a..b {
            let next = if i + 1 == b { a } else { i + 1 };
            rot_next[adj_dart[i] as usize] = adj_dart[next];
        }
    }

    // Connectivity.
    let mut visited = vec![false; n];
    let mut stack = vec![0 as Vertex];
    visited[0] = true;
    let mut reached = 1usize;
    while let Some(u) = stack.pop() {
        let a = adj_off[u as usize] as usize;
        let b = adj_off[u as usize + 1] as usize;
        for &v in &adj[a..b] {
            if !visited[v as usize] {
                visited[v as usize] = true;
                reached += 1;
                stack.push(v);
            }
        }
    }
    if reached != n {
        let v = visited.iter().position(|&x| !x).unwrap() as Vertex;
        return Err(Error::Disconnected(v));
    }

    // Trace faces.
    let mut face_of = vec![u32::MAX; 2 * m];
    let mut faces: Vec<Vec<Dart>> = Vec::new();
    for d0 in 0..2 * m as Dart {
        if face_of[d0 as usize] != u32::MAX {
            continue;
        }
        let f = faces.len() as FaceId;
        let mut cycle = Vec::new();
        let mut d = d0;
        loop {
            face_of[d as usize] = f;
            cycle.push(d);
            d = rot_next[(d ^ 1) as usize];
            if d == d0 {
                break;
            }
        }
        faces.push(cycle);
    }

    let required = 2 + m as i64 - n as i64;
    if faces.len() as i64 != required {
        return Err(Error::NonPlanarRotation {
            n,
            m,
            traced: faces.len(),
            required,
        });
    }

    Ok(PlanarGraph {
        n,
        head: heads,
        rot_next,
        face_of,
        faces,
        f_inf: 0,
        adj_off,
        adj,
        adj_dart,
    })
}

/// View of the dual graph: one vertex per primal face, one arc per primal
/// dart. The dual arc of `d` runs from the face right of `d` to the face
/// left of `d`, so `dual_tail(d) = face_of(rev(d))` and
/// `dual_head(d) = face_of(d)`. The dual of a dual arc corresponds to the
/// *reverse* of the original dart; with darts shared between the two
/// graphs this is just `rev`.
#[derive(Debug, Clone, Copy)]
pub struct DualGraph<'a> {
    g: &'a PlanarGraph,
}

pub fn build_dual(g: &PlanarGraph) -> DualGraph<'_> {
    DualGraph { g }
}

impl<'a> DualGraph<'a> {
    pub fn vertex_count(&self) -> usize {
        self.g.face_count()
    }

    pub fn arc_count(&self) -> usize {
        self.g.dart_count()
    }

    #[inline]
    pub fn tail(&self, d: Dart) -> FaceId {
        self.g.face_of(d ^ 1)
    }

    #[inline]
    pub fn head(&self, d: Dart) -> FaceId {
        self.g.face_of(d)
    }

    /// Primal dart a dual arc crosses; identity under the shared-id scheme.
    #[inline]
    pub fn primal_of(&self, d: Dart) -> Dart {
        d
    }

    /// Degree of a dual vertex equals the primal face length.
    pub fn degree(&self, f: FaceId) -> usize {
        self.g.face(f).len()
    }

    /// Outgoing dual arcs at face `f`, in boundary trace order.
    pub fn arcs_out(&self, f: FaceId) -> impl Iterator<Item = Dart> + 'a {
        self.g.face(f).iter().map(|&b| b ^ 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn c4_rotations() -> Vec<Vec<Vertex>> {
        vec![vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]]
    }

    // Planar K4: triangle 0,1,2 with 3 in the middle.
    fn k4_rotations() -> Vec<Vec<Vertex>> {
        vec![vec![1, 3, 2], vec![2, 3, 0], vec![0, 3, 1], vec![2, 0, 1]]
    }

    #[test]
    fn c4_has_two_faces() {
        let g = build_embedding(4, &c4_rotations()).unwrap();
        assert_eq!(g.m(), 4);
        assert_eq!(g.face_count(), 2);
    }

    #[test]
    fn planar_k4_has_four_faces() {
        let g = build_embedding(4, &k4_rotations()).unwrap();
        assert_eq!(g.m(), 6);
        assert_eq!(g.face_count(), 4);
    }

    #[test]
    fn k5_rotation_is_rejected() {
        let rot: Vec<Vec<Vertex>> = (0..5u32)
            .map(|u| (0..5u32).filter(|&v| v != u).collect())
            .collect();
        match build_embedding(5, &rot) {
            Err(Error::NonPlanarRotation { required, .. }) => assert_eq!(required, 7),
            other => panic!("expected NonPlanarRotation, got {other:?}"),
        }
    }

    #[test]
    fn one_sided_adjacency_is_rejected() {
        let rot = vec![vec![1, 2], vec![0], vec![0, 1]];
        assert!(matches!(
            build_embedding(3, &rot),
            Err(Error::InconsistentRotation(_))
        ));
    }

    #[test]
    fn self_loop_and_parallel_edges_are_rejected() {
        assert!(matches!(
            build_embedding(2, [vec![0, 1], vec![0]].as_ref()),
            Err(Error::NotSimple(_))
        ));
        assert!(matches!(
            build_embedding(2, [vec![1, 1], vec![0, 0]].as_ref()),
            Err(Error::NotSimple(_))
        ));
    }

    #[test]
    fn disconnected_is_rejected() {
        let rot = vec![vec![1], vec![0], vec![3], vec![2]];
        assert!(matches!(build_embedding(4, &rot), Err(Error::Disconnected(_))));
    }

    #[test]
    fn every_dart_in_exactly_one_face() {
        let g = build_embedding(4, &k4_rotations()).unwrap();
        let total: usize = (0..g.face_count()).map(|f| g.face(f as FaceId).len()).sum();
        assert_eq!(total, g.dart_count());
        for d in 0..g.dart_count() as Dart {
            let f = g.face_of(d);
            assert!(g.face(f).contains(&d));
        }
    }

    #[test]
    fn dual_of_c4_is_two_vertices_with_four_parallel_edges() {
        let g = build_embedding(4, &c4_rotations()).unwrap();
        let dual = build_dual(&g);
        assert_eq!(dual.vertex_count(), 2);
        assert_eq!(dual.arc_count(), 8);
        for d in 0..8 as Dart {
            assert_ne!(dual.tail(d), dual.head(d));
        }
    }

    #[test]
    fn single_edge_dual_is_a_loop() {
        let g = build_embedding(2, [vec![1], vec![0]].as_ref()).unwrap();
        assert_eq!(g.face_count(), 1);
        let dual = build_dual(&g);
        assert_eq!(dual.tail(0), dual.head(0));
    }

    #[test]
    fn dual_degree_matches_face_length() {
        let g = build_embedding(4, &k4_rotations()).unwrap();
        let dual = build_dual(&g);
        for f in 0..g.face_count() as FaceId {
            assert_eq!(dual.degree(f), g.face(f).len());
            for d in dual.arcs_out(f) {
                assert_eq!(dual.tail(d), f);
            }
        }
    }

    #[test]
    fn dual_of_dual_arc_is_reverse() {
        // Walking the shared-id scheme: the arc dual to (uv)* is rev(uv).
        let g = build_embedding(4, &k4_rotations()).unwrap();
        let dual = build_dual(&g);
        for d in 0..g.dart_count() as Dart {
            assert_eq!(dual.primal_of(d) ^ 1, g.rev(d));
        }
    }
}
