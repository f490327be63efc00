//! Deduplicated pattern tree.
//!
//! A spanning tree of the subdivided graph is labeled edge by edge with
//! the (at most two) pattern positions that flip across it. Walking the
//! tree depth-first while mirroring the flips in a fingerprint tree gives
//! each vertex's fingerprint in O(log k); a dictionary hit collapses the
//! vertex into the earlier node carrying the same pattern, so the result
//! has exactly one node per distinct pattern. Every hit is verified by
//! exact pattern comparison: a verified mismatch (a true hash collision)
//! aborts the attempt and the build reruns with a fresh base.

use crate::error::{Error, Result};
use crate::fingerprint::FingerprintTree;
use crate::instance::SubdividedInstance;
use crate::pattern::{Pattern, PatternMode, PatternSet};
use crate::planar::Vertex;
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct PatternTreeNode {
    pub parent: Option<u32>,
    /// Pattern positions flipped on the edge from the parent (0-based).
    pub flips: Vec<u16>,
    pub children: Vec<u32>,
    /// First vertex that produced this node.
    pub rep_vertex: Vertex,
}

#[derive(Debug, Clone)]
pub struct PatternTree {
    pub nodes: Vec<PatternTreeNode>,
    /// Deduplicated node per subdivided vertex.
    pub node_of_vertex: Vec<u32>,
    pub root_pattern: Pattern,
    /// Base actually used after collision retries.
    pub seed_used: u64,
}

impl PatternTree {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// BFS spanning tree of the subdivided graph rooted at the first source
/// vertex; deterministic because neighbors come in rotation order.
fn spanning_tree(sub: &SubdividedInstance, root: Vertex) -> (Vec<Option<Vertex>>, Vec<Vec<Vertex>>) {
    let g = &sub.inst.graph;
    let n = g.n();
    let mut parent: Vec<Option<Vertex>> = vec![None; n];
    let mut order: Vec<Vertex> = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    seen[root as usize] = true;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &v in g.neighbors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                parent[v as usize] = Some(u);
                queue.push_back(v);
            }
        }
    }
    debug_assert_eq!(order.len(), n);
    let mut children: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for &v in &order {
        if let Some(p) = parent[v as usize] {
            children[p as usize].push(v);
        }
    }
    (parent, children)
}

pub fn build_pattern_tree(
    sub: &SubdividedInstance,
    patterns: &PatternSet,
    seed: u64,
) -> Result<PatternTree> {
    let mut err = None;
    for attempt in 0..4u64 {
        let attempt_seed = seed.wrapping_add(attempt);
        match try_build(sub, patterns, attempt_seed, None) {
            Ok(t) => return Ok(t),
            Err(e @ Error::FingerprintCollisionDetected { .. }) => err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(err.unwrap())
}

/// Single attempt with an explicit modulus override (tests force tiny
/// moduli to exercise the collision path).
pub fn try_build(
    sub: &SubdividedInstance,
    patterns: &PatternSet,
    seed: u64,
    modulus_override: Option<(u64, u64)>,
) -> Result<PatternTree> {
    if patterns.mode() != PatternMode::Binary {
        return Err(Error::ModeMismatch("the pattern tree is built over binary patterns".into()));
    }
    let g = &sub.inst.graph;
    let n = g.n();
    if patterns.vertex_count() != n {
        return Err(Error::ModeMismatch("pattern set does not cover the graph".into()));
    }
    let root = sub.inst.sources[0];
    let (_parent, children) = spanning_tree(sub, root);

    let l = patterns.len();
    let root_bits: Vec<bool> = (0..l).map(|j| patterns.entry(root, j) == 1).collect();
    let mut tree = match modulus_override {
        Some((base, q)) => FingerprintTree::with_modulus(root_bits, base, q),
        None => FingerprintTree::new(root_bits, seed),
    };

    let mut nodes: Vec<PatternTreeNode> = vec![PatternTreeNode {
        parent: None,
        flips: Vec::new(),
        children: Vec::new(),
        rep_vertex: root,
    }];
    let mut node_of_vertex = vec![u32::MAX; n];
    node_of_vertex[root as usize] = 0;
    let mut dict: HashMap<u64, u32> = HashMap::new();
    dict.insert(tree.root(), 0);

    // Depth-first over the spanning tree; flips are applied descending an
    // edge and reapplied ascending it (they are involutions).
    enum Frame {
        Enter(Vertex, Vertex), // (vertex, tree parent)
        Exit(Vec<u16>),
    }
    let mut stack: Vec<Frame> = children[root as usize]
        .iter()
        .rev()
        .map(|&c| Frame::Enter(c, root))
        .collect();

    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Exit(flips) => {
                for &f in &flips {
                    tree.flip(f as usize);
                }
            }
            Frame::Enter(v, p) => {
                let flips = patterns.diff_positions(p, v);
                if flips.len() > 2 {
                    return Err(Error::InvariantBreach(format!(
                        "adjacent vertices {p} and {v} differ in {} pattern positions",
                        flips.len()
                    )));
                }
                for &f in &flips {
                    tree.flip(f as usize);
                }
                let fp = tree.root();
                let node = match dict.get(&fp) {
                    Some(&w) => {
                        let rep = nodes[w as usize].rep_vertex;
                        if !patterns.rows_equal(rep, v) {
                            return Err(Error::FingerprintCollisionDetected { u: rep, v });
                        }
                        w
                    }
                    None => {
                        let parent_node = node_of_vertex[p as usize];
                        let id = nodes.len() as u32;
                        nodes.push(PatternTreeNode {
                            parent: Some(parent_node),
                            flips: flips.clone(),
                            children: Vec::new(),
                            rep_vertex: v,
                        });
                        nodes[parent_node as usize].children.push(id);
                        dict.insert(fp, id);
                        id
                    }
                };
                node_of_vertex[v as usize] = node;
                stack.push(Frame::Exit(flips));
                for &c in children[v as usize].iter().rev() {
                    stack.push(Frame::Enter(c, v));
                }
            }
        }
    }

    Ok(PatternTree {
        nodes,
        node_of_vertex,
        root_pattern: patterns.pattern(root),
        seed_used: seed,
    })
}

/// One Euler-tour step: the node arrived at and the flips applied.
#[derive(Debug, Clone)]
pub struct TourStep {
    pub node: u32,
    pub flips: Vec<u16>,
}

/// Euler tour of the deduplicated tree: every edge is walked down and
/// back up, 2(x-1) steps in total. Position 0 is the root before any
/// step; `first_pos[v]` is the first position whose pattern equals node
/// v's pattern.
pub fn euler_tour(tree: &PatternTree) -> (Vec<TourStep>, Vec<u32>) {
    let x = tree.node_count();
    let mut steps = Vec::with_capacity(2 * x.saturating_sub(1));
    let mut first_pos = vec![0u32; x];

    enum Frame {
        Down(u32),
        Up(u32),
    }
    let mut stack: Vec<Frame> = tree.nodes[0]
        .children
        .iter()
        .rev()
        .map(|&c| Frame::Down(c))
        .collect();
    while let Some(f) = stack.pop() {
        match f {
            Frame::Down(v) => {
                steps.push(TourStep {
                    node: v,
                    flips: tree.nodes[v as usize].flips.clone(),
                });
                first_pos[v as usize] = steps.len() as u32;
                stack.push(Frame::Up(v));
                for &c in tree.nodes[v as usize].children.iter().rev() {
                    stack.push(Frame::Down(c));
                }
            }
            Frame::Up(v) => {
                let parent = tree.nodes[v as usize].parent.unwrap();
                steps.push(TourStep {
                    node: parent,
                    flips: tree.nodes[v as usize].flips.clone(),
                });
            }
        }
    }
    (steps, first_pos)
}
