//! Seeded instance factories. Every generator emits a rotation system (no
//! planarity testing anywhere) and every emitted instance passes
//! validation; fixed seeds give byte-identical `.osg` output.

use crate::error::{Error, Result};
use crate::instance::OSInstance;
use crate::planar::{build_embedding, Vertex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalPolicy {
    All,
    /// The source face itself.
    Boundary,
    /// Each vertex kept independently with this probability.
    RandomFraction(f64),
    /// A BFS ball around a random center covering this fraction of the
    /// vertices; always induces a connected subgraph.
    ConnectedBlob(f64),
}

fn pick_terminals(
    n: usize,
    sources: &[Vertex],
    neighbors: impl Fn(Vertex) -> Vec<Vertex>,
    policy: TerminalPolicy,
    rng: &mut ChaCha8Rng,
) -> Vec<Vertex> {
    match policy {
        TerminalPolicy::All => (0..n as Vertex).collect(),
        TerminalPolicy::Boundary => sources.to_vec(),
        TerminalPolicy::RandomFraction(p) => (0..n as Vertex)
            .filter(|_| rng.random_bool(p.clamp(0.0, 1.0)))
            .collect(),
        TerminalPolicy::ConnectedBlob(p) => {
            let target = ((n as f64 * p.clamp(0.0, 1.0)).ceil() as usize).max(1);
            let start = rng.random_range(0..n) as Vertex;
            let mut seen = vec![false; n];
            let mut queue = std::collections::VecDeque::from([start]);
            seen[start as usize] = true;
            let mut out = Vec::new();
            while let Some(u) = queue.pop_front() {
                out.push(u);
                if out.len() >= target {
                    break;
                }
                for v in neighbors(u) {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        queue.push_back(v);
                    }
                }
            }
            out
        }
    }
}

/// The k-cycle with S = all vertices.
pub fn gen_cycle(k: usize) -> OSInstance {
    assert!(k >= 3);
    let rotations: Vec<Vec<Vertex>> = (0..k)
        .map(|v| {
            vec![
                ((v + k - 1) % k) as Vertex,
                ((v + 1) % k) as Vertex,
            ]
        })
        .collect();
    let g = build_embedding(k, &rotations).expect("cycle rotation is planar");
    let s: Vec<Vertex> = (0..k as Vertex).collect();
    let t: Vec<Vertex> = (0..k as Vertex).collect();
    OSInstance::new(g, s, t).expect("cycle instance is valid")
}

fn grid_rotations(w: usize, h: usize) -> Vec<Vec<Vertex>> {
    assert!(w >= 2 && h >= 2);
    let id = |r: usize, c: usize| (r * w + c) as Vertex;
    let mut rotations = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            // Counterclockwise with x right and y up (rows grow upward):
            // east, north, west, south.
            let mut rot = Vec::with_capacity(4);
            if c + 1 < w {
                rot.push(id(r, c + 1));
            }
            if r + 1 < h {
                rot.push(id(r + 1, c));
            }
            if c > 0 {
                rot.push(id(r, c - 1));
            }
            if r > 0 {
                rot.push(id(r - 1, c));
            }
            rotations.push(rot);
        }
    }
    rotations
}

fn grid_boundary(w: usize, h: usize) -> Vec<Vertex> {
    let id = |r: usize, c: usize| (r * w + c) as Vertex;
    let mut s = Vec::new();
    for c in 0..w {
        s.push(id(0, c));
    }
    for r in 1..h {
        s.push(id(r, w - 1));
    }
    for c in (0..w - 1).rev() {
        s.push(id(h - 1, c));
    }
    for r in (1..h - 1).rev() {
        s.push(id(r, 0));
    }
    s
}

/// w x h grid, S = the outer boundary cycle (k = 2(w+h) - 4).
pub fn gen_grid(w: usize, h: usize, policy: TerminalPolicy, seed: u64) -> OSInstance {
    let rotations = grid_rotations(w, h);
    let g = build_embedding(w * h, &rotations).expect("grid rotation is planar");
    let s = grid_boundary(w, h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = {
        let g_ref = &g;
        pick_terminals(
            w * h,
            &s,
            |v| g_ref.neighbors(v).to_vec(),
            policy,
            &mut rng,
        )
    };
    OSInstance::new(g, s, t).expect("grid instance is valid")
}

/// Grid with interior-interior edges deleted at the given rate. A
/// deletion is rejected if it would disconnect the graph; edges touching
/// the boundary are never candidates, so S survives intact.
pub fn gen_random_planar(
    seed: u64,
    w: usize,
    h: usize,
    rate: f64,
    policy: TerminalPolicy,
) -> OSInstance {
    assert!(rate < 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = w * h;
    let id = |r: usize, c: usize| (r * w + c) as Vertex;
    let interior = |v: Vertex| {
        let (r, c) = ((v as usize) / w, (v as usize) % w);
        r > 0 && r + 1 < h && c > 0 && c + 1 < w
    };

    let mut adj: Vec<Vec<Vertex>> = grid_rotations(w, h);
    let mut candidates: Vec<(Vertex, Vertex)> = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let u = id(r, c);
            if c + 1 < w {
                let v = id(r, c + 1);
                if interior(u) && interior(v) {
                    candidates.push((u, v));
                }
            }
            if r + 1 < h {
                let v = id(r + 1, c);
                if interior(u) && interior(v) {
                    candidates.push((u, v));
                }
            }
        }
    }
    candidates.shuffle(&mut rng);
    let target = (candidates.len() as f64 * rate).floor() as usize;

    let connected_without = |adj: &[Vec<Vertex>], skip: (Vertex, Vertex)| {
        let mut seen = vec![false; n];
        let mut stack = vec![0 as Vertex];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u as usize] {
                if (u, v) == skip || (v, u) == skip {
                    continue;
                }
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    };

    let mut deleted = 0;
    for &(u, v) in &candidates {
        if deleted >= target {
            break;
        }
        if connected_without(&adj, (u, v)) {
            adj[u as usize].retain(|&x| x != v);
            adj[v as usize].retain(|&x| x != u);
            deleted += 1;
        }
    }

    let g = build_embedding(n, &adj).expect("edge-deleted grid remains embedded");
    let s = grid_boundary(w, h);
    let t = {
        let g_ref = &g;
        pick_terminals(n, &s, |v| g_ref.neighbors(v).to_vec(), policy, &mut rng)
    };
    OSInstance::new(g, s, t).expect("random planar instance is valid")
}

struct TreeNode {
    parent: Option<usize>,
    children: Vec<usize>,
}

/// Random embedded tree with no internal vertex of degree 2, plus a cycle
/// through its leaves in embedding order; S is the leaf cycle.
pub fn gen_halin(seed: u64, leaves: usize, policy: TerminalPolicy) -> OSInstance {
    assert!(leaves >= 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Grow: start from a root with three children, then repeatedly expand
    // a leaf into an internal vertex with 2 or 3 children.
    let mut nodes: Vec<TreeNode> = vec![TreeNode {
        parent: None,
        children: Vec::new(),
    }];
    let mut leaf_ids: Vec<usize> = Vec::new();
    for _ in 0..3 {
        let c = nodes.len();
        nodes.push(TreeNode {
            parent: Some(0),
            children: Vec::new(),
        });
        nodes[0].children.push(c);
        leaf_ids.push(c);
    }
    while leaf_ids.len() < leaves {
        let pos = rng.random_range(0..leaf_ids.len());
        let v = leaf_ids.swap_remove(pos);
        let want = leaves - leaf_ids.len();
        let fan = if want >= 3 && rng.random_bool(0.4) { 3 } else { 2 };
        for _ in 0..fan {
            let c = nodes.len();
            nodes.push(TreeNode {
                parent: Some(v),
                children: Vec::new(),
            });
            nodes[v].children.push(c);
            leaf_ids.push(c);
        }
    }

    // Leaves in depth-first order define the cycle.
    let mut order = Vec::new();
    let mut stack = vec![0usize];
    let mut dfs_leaves = Vec::new();
    while let Some(v) = stack.pop() {
        order.push(v);
        if nodes[v].children.is_empty() {
            dfs_leaves.push(v);
        }
        for &c in nodes[v].children.iter().rev() {
            stack.push(c);
        }
    }

    build_leaf_cycle_instance(&nodes, &dfs_leaves, &[], policy, &mut rng)
}

/// Assemble rotations for a tree plus a cycle through `cycle_vertices`
/// (tree leaves and optional extra path vertices, in cycle order).
/// Internal vertices rotate (parent, children in order); cycle vertices
/// rotate (next, tree neighbors, prev).
fn build_leaf_cycle_instance(
    nodes: &[TreeNode],
    dfs_leaves: &[usize],
    extra_path: &[usize],
    policy: TerminalPolicy,
    rng: &mut ChaCha8Rng,
) -> OSInstance {
    let n_tree = nodes.len();
    let n = n_tree + extra_path.len();
    let cycle: Vec<usize> = dfs_leaves.iter().chain(extra_path.iter()).copied().collect();
    let on_cycle = |v: usize| cycle.contains(&v);

    let cyc_pos: std::collections::HashMap<usize, usize> =
        cycle.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let next = |v: usize| cycle[(cyc_pos[&v] + 1) % cycle.len()];
    let prev = |v: usize| cycle[(cyc_pos[&v] + cycle.len() - 1) % cycle.len()];

    let mut rotations: Vec<Vec<Vertex>> = Vec::with_capacity(n);
    for v in 0..n {
        let mut rot: Vec<Vertex> = Vec::new();
        if v < n_tree {
            if nodes[v].children.is_empty() {
                // Tree leaf on the cycle.
                rot.push(next(v) as Vertex);
                if let Some(p) = nodes[v].parent {
                    rot.push(p as Vertex);
                }
                rot.push(prev(v) as Vertex);
            } else {
                if let Some(p) = nodes[v].parent {
                    rot.push(p as Vertex);
                }
                for &c in &nodes[v].children {
                    rot.push(c as Vertex);
                }
                debug_assert!(!on_cycle(v));
            }
        } else {
            // Plain cycle vertex.
            rot.push(next(v) as Vertex);
            rot.push(prev(v) as Vertex);
        }
        rotations.push(rot);
    }

    let g = build_embedding(n, &rotations).expect("leaf-cycle rotation is planar");
    let s: Vec<Vertex> = cycle.iter().map(|&v| v as Vertex).collect();
    let t = {
        let g_ref = &g;
        pick_terminals(n, &s, |v| g_ref.neighbors(v).to_vec(), policy, rng)
    };
    let inst = OSInstance::new(g, s.clone(), t.clone()).expect("leaf-cycle instance is valid");
    // The source cycle must come out in the order we listed it, not
    // reversed, so that position-sensitive checks see the intended S. If
    // the trace runs the other way, mirror the embedding.
    if inst.sources == s {
        return inst;
    }
    let mirrored: Vec<Vec<Vertex>> = rotations.iter().map(|r| {
        let mut x = r.clone();
        x.reverse();
        x
    }).collect();
    let g = build_embedding(n, &mirrored).expect("mirrored rotation is planar");
    let inst = OSInstance::new(g, s.clone(), t).expect("mirrored instance is valid");
    assert_eq!(inst.sources, s, "source cycle orientation");
    inst
}

/// Vertex ids of the quadratic lower-bound family: the root is 0, path
/// vertex (i, j) for 1 <= j <= i is contiguous, the extra path follows.
pub fn shalin_vertex_id(i: usize, j: usize) -> Vertex {
    if j == 0 {
        0
    } else {
        (1 + i * (i - 1) / 2 + (j - 1)) as Vertex
    }
}

pub fn shalin_q_id(k_prime: usize, t: usize) -> Vertex {
    (1 + k_prime * (k_prime + 1) / 2 + (t - 1)) as Vertex
}

/// The quadratic lower-bound family: paths P_1..P_{k'} of lengths 1..k'
/// from a common root, embedded in order, plus a return path of length
/// k'+1 closing the leaf cycle. S starts at the tip of P_1. Requires even
/// k >= 4.
pub fn gen_shalin_lower(k: usize, policy: TerminalPolicy) -> Result<OSInstance> {
    if k < 4 || !k.is_multiple_of(2) {
        return Err(Error::OddK(k));
    }
    let kp = k / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let n_tree = 1 + kp * (kp + 1) / 2;
    let n = n_tree + kp;
    let mut rotations: Vec<Vec<Vertex>> = vec![Vec::new(); n];

    // Root: first vertex of every path, in path order.
    rotations[0] = (1..=kp).map(|i| shalin_vertex_id(i, 1)).collect();
    for i in 1..=kp {
        for j in 1..=i {
            let v = shalin_vertex_id(i, j) as usize;
            if j < i {
                // Interior path vertex.
                rotations[v] = vec![shalin_vertex_id(i, j - 1), shalin_vertex_id(i, j + 1)];
            } else {
                // Leaf v_{i,i}: (cycle next, parent, cycle prev).
                let next = if i < kp {
                    shalin_vertex_id(i + 1, i + 1)
                } else {
                    shalin_q_id(kp, 1)
                };
                let prev = if i > 1 {
                    shalin_vertex_id(i - 1, i - 1)
                } else {
                    shalin_q_id(kp, kp)
                };
                rotations[v] = vec![next, shalin_vertex_id(i, j - 1), prev];
            }
        }
    }
    for t in 1..=kp {
        let v = shalin_q_id(kp, t) as usize;
        let next = if t < kp {
            shalin_q_id(kp, t + 1)
        } else {
            shalin_vertex_id(1, 1)
        };
        let prev = if t > 1 {
            shalin_q_id(kp, t - 1)
        } else {
            shalin_vertex_id(kp, kp)
        };
        rotations[v] = vec![next, prev];
    }

    let s: Vec<Vertex> = (1..=kp)
        .map(|i| shalin_vertex_id(i, i))
        .chain((1..=kp).map(|t| shalin_q_id(kp, t)))
        .collect();

    let g = build_embedding(n, &rotations)?;
    let t = {
        let g_ref = &g;
        pick_terminals(n, &s, |v| g_ref.neighbors(v).to_vec(), policy, &mut rng)
    };
    let inst = OSInstance::new(g, s.clone(), t.clone())?;
    if inst.sources == s {
        return Ok(inst);
    }
    let mirrored: Vec<Vec<Vertex>> = rotations.iter().map(|r| {
        let mut x = r.clone();
        x.reverse();
        x
    }).collect();
    let g = build_embedding(n, &mirrored)?;
    let inst = OSInstance::new(g, s.clone(), t)?;
    if inst.sources != s {
        return Err(Error::InvariantBreach("source cycle orientation".into()));
    }
    Ok(inst)
}

/// The expected pattern of v_{i,j} in the lower-bound family, over the
/// original sources: 1^{i-j-1} (-1)^j 1^{k'+j+1-i} (-1)^{k'-j-1}.
pub fn shalin_expected_pattern(k: usize, i: usize, j: usize) -> Vec<i8> {
    let kp = k / 2;
    let mut p = Vec::with_capacity(k - 1);
    p.extend(std::iter::repeat_n(1i8, i - j - 1));
    p.extend(std::iter::repeat_n(-1i8, j));
    p.extend(std::iter::repeat_n(1i8, kp + j + 1 - i));
    p.extend(std::iter::repeat_n(-1i8, kp - j - 1));
    debug_assert_eq!(p.len(), k - 1);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::bfs_distances;
    use crate::instance::to_osg;

    #[test]
    fn grid_counts() {
        let g3 = gen_grid(3, 3, TerminalPolicy::All, 0);
        assert_eq!(g3.k(), 8);
        assert_eq!(g3.graph.n(), 9);
        let g2 = gen_grid(2, 2, TerminalPolicy::All, 0);
        assert_eq!(g2.k(), 4);
        assert_eq!(g2.graph.m(), 4);
    }

    #[test]
    fn blob_terminals_induce_a_connected_subgraph() {
        let inst = gen_grid(10, 10, TerminalPolicy::ConnectedBlob(0.2), 3);
        assert!(!inst.terminals.is_empty());
        let set: std::collections::HashSet<_> = inst.terminals.iter().copied().collect();
        let mut seen = std::collections::HashSet::from([inst.terminals[0]]);
        let mut stack = vec![inst.terminals[0]];
        while let Some(u) = stack.pop() {
            for &v in inst.graph.neighbors(u) {
                if set.contains(&v) && seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        assert_eq!(seen.len(), inst.terminals.len());
    }

    #[test]
    fn zero_rate_is_a_plain_grid() {
        let a = gen_random_planar(1, 5, 4, 0.0, TerminalPolicy::All);
        let b = gen_grid(5, 4, TerminalPolicy::All, 1);
        assert_eq!(a.graph.m(), b.graph.m());
    }

    #[test]
    fn fixed_seed_reproduces_bytes() {
        let a = gen_random_planar(9, 6, 6, 0.3, TerminalPolicy::RandomFraction(0.4));
        let b = gen_random_planar(9, 6, 6, 0.3, TerminalPolicy::RandomFraction(0.4));
        let ja = serde_json::to_string(&to_osg(&a)).unwrap();
        let jb = serde_json::to_string(&to_osg(&b)).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn random_planar_samples_validate() {
        for seed in 0..30 {
            let inst = gen_random_planar(seed, 6, 5, 0.3, TerminalPolicy::All);
            assert!(inst.validate().ok, "seed {seed}");
        }
    }

    #[test]
    fn smallest_halin_is_the_wheel() {
        let inst = gen_halin(0, 3, TerminalPolicy::All);
        assert_eq!(inst.graph.n(), 4);
        assert_eq!(inst.graph.m(), 6);
        assert_eq!(inst.graph.face_count(), 4);
        assert_eq!(inst.k(), 3);
    }

    #[test]
    fn halin_internal_degrees_are_at_least_three() {
        for seed in 0..10 {
            let inst = gen_halin(seed, 12, TerminalPolicy::All);
            assert_eq!(inst.k(), 12);
            let on_cycle: std::collections::HashSet<_> = inst.sources.iter().copied().collect();
            for v in 0..inst.graph.n() as Vertex {
                if !on_cycle.contains(&v) {
                    assert!(inst.graph.degree(v) >= 3, "internal vertex {v}");
                }
            }
            assert!(inst.validate().ok);
        }
    }

    #[test]
    fn shalin_structure() {
        let inst = gen_shalin_lower(8, TerminalPolicy::All).unwrap();
        // |C| = k and the tree contributes k'(k'+1)/2 + 1 vertices.
        assert_eq!(inst.k(), 8);
        assert_eq!(inst.graph.n(), 1 + 10 + 4);
        assert_eq!(inst.sources[0], shalin_vertex_id(1, 1));
        assert_eq!(inst.sources[1], shalin_vertex_id(2, 2));
        assert!(matches!(
            gen_shalin_lower(7, TerminalPolicy::All),
            Err(Error::OddK(7))
        ));
        assert!(matches!(
            gen_shalin_lower(2, TerminalPolicy::All),
            Err(Error::OddK(2))
        ));
    }

    #[test]
    fn shalin_tip_distances() {
        // d(v_{i,j}, v_{t,t}) = j + t while the path detour through the
        // root pays off, i.e. for t <= i - j.
        let inst = gen_shalin_lower(8, TerminalPolicy::All).unwrap();
        for (i, j) in [(3usize, 1usize), (4, 1), (4, 2)] {
            let d = bfs_distances(&inst.graph, shalin_vertex_id(i, j));
            for t in 1..=(i - j) {
                assert_eq!(
                    d[shalin_vertex_id(t, t) as usize] as usize,
                    j + t,
                    "i={i} j={j} t={t}"
                );
            }
        }
    }

    #[test]
    fn shalin_expected_pattern_example() {
        assert_eq!(
            shalin_expected_pattern(8, 3, 1),
            vec![1, -1, 1, 1, 1, -1, -1]
        );
    }
}
