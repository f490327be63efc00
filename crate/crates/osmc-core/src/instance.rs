//! Problem instances: an embedded planar graph, the ordered source face S,
//! and the terminal set T, plus the edge-subdivision transform and the
//! `.osg` JSON file format.

use crate::error::{Error, Result};
use crate::planar::{build_embedding, FaceId, PlanarGraph, Vertex};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// An instance of the source-face distance problem: `sources` is the full
/// vertex cycle of one face (the designated infinite face), `terminals`
/// the query set.
#[derive(Debug, Clone)]
pub struct OSInstance {
    pub graph: PlanarGraph,
    /// s_1 .. s_k in face trace order, starting at the caller's s_1.
    pub sources: Vec<Vertex>,
    /// Sorted, deduplicated.
    pub terminals: Vec<Vertex>,
}

impl OSInstance {
    /// Wrap a graph with a source cycle and terminals.
    ///
    /// `sources` must list the vertices of one face; if it is given in the
    /// orientation opposite to the face trace it is normalized by
    /// reversing (keeping s_1 first). The matched face becomes f_inf.
    pub fn new(mut graph: PlanarGraph, sources: Vec<Vertex>, terminals: Vec<Vertex>) -> Result<Self> {
        let k = sources.len();
        if k < 3 {
            return Err(Error::KTooSmall(k));
        }
        let mut sorted = sources.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::SNotFullFace(format!("vertex {} listed twice in S", w[0])));
            }
        }
        for &s in &sources {
            if s as usize >= graph.n() {
                return Err(Error::SNotFullFace(format!("vertex {s} out of range")));
            }
        }

        let face = find_source_face(&graph, &sources)?;
        let canonical = rotate_trace_to(&graph, face, sources[0]);
        graph.set_infinite_face(face);

        let mut terminals = terminals;
        terminals.sort_unstable();
        terminals.dedup();
        if let Some(&t) = terminals.iter().find(|&&t| t as usize >= graph.n()) {
            return Err(Error::BadTerminal(t));
        }

        Ok(OSInstance {
            graph,
            sources: canonical,
            terminals,
        })
    }

    pub fn k(&self) -> usize {
        self.sources.len()
    }

    /// Re-run the structural checks and report every violation found.
    pub fn validate(&self) -> ValidationReport {
        let mut problems = Vec::new();
        if self.k() < 3 {
            problems.push(format!("source face has only {} vertices", self.k()));
        }
        match find_source_face(&self.graph, &self.sources) {
            Ok(f) => {
                if f != self.graph.f_inf() {
                    problems.push("designated infinite face does not match S".into());
                }
            }
            Err(e) => problems.push(e.to_string()),
        }
        for &t in &self.terminals {
            if t as usize >= self.graph.n() {
                problems.push(format!("terminal {t} out of range"));
            }
        }
        ValidationReport {
            ok: problems.is_empty(),
            problems,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub problems: Vec<String>,
}

fn find_source_face(graph: &PlanarGraph, sources: &[Vertex]) -> Result<FaceId> {
    let k = sources.len();
    for f in 0..graph.face_count() as FaceId {
        if graph.face(f).len() != k {
            continue;
        }
        let tails = graph.face_vertices(f);
        if cyclic_eq(&tails, sources) {
            return Ok(f);
        }
        let mut rev = tails.clone();
        rev.reverse();
        if cyclic_eq(&rev, sources) {
            return Ok(f);
        }
    }
    Err(Error::SNotFullFace(format!(
        "no face of length {k} traces the given cycle (first vertex {})",
        sources[0]
    )))
}

fn cyclic_eq(a: &[Vertex], b: &[Vertex]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    match a.iter().position(|&x| x == b[0]) {
        None => false,
        Some(off) => (0..n).all(|i| a[(off + i) % n] == b[i]),
    }
}

fn rotate_trace_to(graph: &PlanarGraph, face: FaceId, first: Vertex) -> Vec<Vertex> {
    let tails = graph.face_vertices(face);
    let off = tails.iter().position(|&v| v == first).unwrap();
    let n = tails.len();
    (0..n).map(|i| tails[(off + i) % n]).collect()
}

/// The instance after subdividing every edge once. Base vertices keep
/// their ids; the midpoint of base edge `e` is vertex `n_base + e`.
/// Distances double: d'(u, v) = 2 d(u, v) for base vertices.
#[derive(Debug, Clone)]
pub struct SubdividedInstance {
    pub base: OSInstance,
    /// Subdivided instance; `inst.sources` is S' = s_1, w_1, ..., s_k, w_k.
    pub inst: OSInstance,
    n_base: usize,
}

impl SubdividedInstance {
    pub fn source_count(&self) -> usize {
        self.inst.sources.len()
    }

    pub fn k(&self) -> usize {
        self.base.k()
    }

    /// Length of binary patterns: 2k - 1.
    pub fn pattern_len(&self) -> usize {
        self.source_count() - 1
    }

    pub fn is_midpoint(&self, v: Vertex) -> bool {
        (v as usize) >= self.n_base
    }

    pub fn base_edge_of(&self, v: Vertex) -> Option<u32> {
        if self.is_midpoint(v) {
            Some(v - self.n_base as u32)
        } else {
            None
        }
    }

    pub fn midpoint_of(&self, base_edge: u32) -> Vertex {
        self.n_base as u32 + base_edge
    }
}

/// Replace every edge {u, v} with a two-edge path through a fresh
/// midpoint, inheriting the rotation system.
pub fn subdivide(inst: &OSInstance) -> Result<SubdividedInstance> {
    let g = &inst.graph;
    let n = g.n();
    let m = g.m();

    let mut rotations: Vec<Vec<Vertex>> = Vec::with_capacity(n + m);
    for u in 0..n as Vertex {
        rotations.push(
            g.darts_from(u)
                .iter()
                .map(|&d| n as Vertex + g.edge_of(d))
                .collect(),
        );
    }
    for e in 0..m as u32 {
        let d = 2 * e;
        rotations.push(vec![g.tail(d), g.head(d)]);
    }
    let graph2 = build_embedding(n + m, &rotations)?;

    let k = inst.k();
    let mut s_prime = Vec::with_capacity(2 * k);
    for i in 0..k {
        let u = inst.sources[i];
        let v = inst.sources[(i + 1) % k];
        let d = g
            .dart_between(u, v)
            .ok_or_else(|| Error::InvariantBreach(format!("source face edge {u}-{v} missing")))?;
        s_prime.push(u);
        s_prime.push(n as Vertex + g.edge_of(d));
    }

    let sub_inst = OSInstance::new(graph2, s_prime, inst.terminals.clone())?;
    Ok(SubdividedInstance {
        base: inst.clone(),
        inst: sub_inst,
        n_base: n,
    })
}

/// On-disk form of an instance (`.osg`, JSON).
#[derive(Debug, Serialize, Deserialize)]
pub struct OsgFile {
    pub n: usize,
    pub rotations: Vec<Vec<Vertex>>,
    pub outer_face: Vec<Vertex>,
    pub terminals: Vec<Vertex>,
}

pub fn to_osg(inst: &OSInstance) -> OsgFile {
    let g = &inst.graph;
    OsgFile {
        n: g.n(),
        rotations: (0..g.n() as Vertex).map(|v| g.neighbors(v).to_vec()).collect(),
        outer_face: inst.sources.clone(),
        terminals: inst.terminals.clone(),
    }
}

pub fn instance_from_osg(file: &OsgFile) -> Result<OSInstance> {
    let graph = build_embedding(file.n, &file.rotations)?;
    OSInstance::new(graph, file.outer_face.clone(), file.terminals.clone())
}

pub fn parse_osg(text: &str) -> Result<OSInstance> {
    let file: OsgFile = serde_json::from_str(text)
        .map_err(|e| Error::Format(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    instance_from_osg(&file)
}

pub fn load_osg(path: &Path) -> Result<OSInstance> {
    let text = std::fs::read_to_string(path)?;
    parse_osg(&text)
}

pub fn save_osg(inst: &OSInstance, path: &Path) -> Result<()> {
    let text = serde_json::to_string(&to_osg(inst)).expect("osg serialization cannot fail");
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::bfs_distances;

    fn c4() -> OSInstance {
        let rot = vec![vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]];
        let g = build_embedding(4, &rot).unwrap();
        OSInstance::new(g, vec![0, 1, 2, 3], vec![0, 1, 2, 3]).unwrap()
    }

    #[test]
    fn c4_instance_is_valid() {
        let inst = c4();
        assert_eq!(inst.k(), 4);
        assert!(inst.validate().ok);
    }

    #[test]
    fn reversed_source_cycle_is_normalized() {
        let rot = vec![vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]];
        let g = build_embedding(4, &rot).unwrap();
        let a = OSInstance::new(g.clone(), vec![0, 1, 2, 3], vec![]).unwrap();
        let b = OSInstance::new(g, vec![0, 3, 2, 1], vec![]).unwrap();
        // Both normalize to the trace order of the matched face.
        assert_eq!(a.sources, b.sources);
        assert_eq!(a.sources[0], 0);
    }

    #[test]
    fn missing_boundary_vertex_is_rejected() {
        let inst = crate::generate::gen_grid(3, 3, crate::generate::TerminalPolicy::All, 0);
        let mut s = inst.sources.clone();
        s.pop();
        let err = OSInstance::new(inst.graph.clone(), s, vec![]).unwrap_err();
        assert!(matches!(err, Error::SNotFullFace(_)));
    }

    #[test]
    fn path_graph_face_walk_is_not_a_source_cycle() {
        // A path's single face walks interior vertices twice, so no face
        // trace can equal a duplicate-free S.
        let g = build_embedding(3, &[vec![1], vec![0, 2], vec![1]].to_vec()).unwrap();
        assert!(matches!(
            OSInstance::new(g, vec![0, 1, 2], vec![]),
            Err(Error::SNotFullFace(_))
        ));
    }

    #[test]
    fn tiny_source_face_is_rejected() {
        let rot = vec![vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]];
        let g = build_embedding(4, &rot).unwrap();
        assert!(matches!(
            OSInstance::new(g, vec![0, 1], vec![]),
            Err(Error::KTooSmall(2))
        ));
    }

    #[test]
    fn subdividing_c4_gives_c8() {
        let sub = subdivide(&c4()).unwrap();
        assert_eq!(sub.inst.graph.n(), 8);
        assert_eq!(sub.inst.graph.m(), 8);
        assert_eq!(sub.source_count(), 8);
        assert_eq!(sub.inst.sources[0], 0);
        assert!(sub.is_midpoint(sub.inst.sources[1]));
    }

    #[test]
    fn subdividing_grid_adds_one_vertex_per_edge() {
        let inst = crate::generate::gen_grid(3, 3, crate::generate::TerminalPolicy::All, 0);
        let sub = subdivide(&inst).unwrap();
        assert_eq!(sub.inst.graph.n(), 9 + 12);
    }

    #[test]
    fn subdivision_doubles_distances() {
        let inst = crate::generate::gen_grid(4, 3, crate::generate::TerminalPolicy::All, 0);
        let sub = subdivide(&inst).unwrap();
        for src in 0..inst.graph.n() as Vertex {
            let base = bfs_distances(&inst.graph, src);
            let doubled = bfs_distances(&sub.inst.graph, src);
            for v in 0..inst.graph.n() {
                assert_eq!(doubled[v], 2 * base[v]);
            }
        }
    }

    #[test]
    fn osg_round_trip() {
        let inst = crate::generate::gen_grid(4, 4, crate::generate::TerminalPolicy::All, 0);
        let text = serde_json::to_string(&to_osg(&inst)).unwrap();
        let back = parse_osg(&text).unwrap();
        assert_eq!(back.sources, inst.sources);
        assert_eq!(back.terminals, inst.terminals);
        assert_eq!(back.graph.n(), inst.graph.n());
    }

    #[test]
    fn osg_parse_error_is_line_anchored() {
        let err = parse_osg("{\n  \"n\": 4,\n  oops\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "got: {msg}");
    }
}
