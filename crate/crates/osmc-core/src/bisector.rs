//! Bisectors: the dual cycles bounding pattern cuts.
//!
//! The bisector of cut A_i is the set of dual arcs of primal darts leaving
//! A_i. When both cut sides are connected this set forms one directed
//! simple cycle in the dual; the walk below orders it starting at the dual
//! of the source-face arc `(S'[i+1] S'[i])*` and reports any structural
//! violation instead of guessing.

use crate::cut::Cut;
use crate::error::{Error, Result};
use crate::instance::SubdividedInstance;
use crate::planar::{Dart, FaceId, PlanarGraph};
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct Bisector {
    /// 1-based pattern position.
    pub index: usize,
    /// Dual arcs in cycle order; `darts[0] = (S'[i+1] S'[i])*`, whose dual
    /// tail is the infinite face.
    pub darts: Vec<Dart>,
}

impl Bisector {
    pub fn len(&self) -> usize {
        self.darts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }

    /// Dual vertices in visit order (tails of the cycle arcs).
    pub fn dual_vertices<'a>(&'a self, g: &'a PlanarGraph) -> impl Iterator<Item = FaceId> + 'a {
        self.darts.iter().map(move |&d| g.face_of(d ^ 1))
    }

    /// Number of arcs whose dual tail or head is the given face.
    pub fn incidences_with(&self, g: &PlanarGraph, f: FaceId) -> usize {
        self.darts
            .iter()
            .filter(|&&d| g.face_of(d) == f || g.face_of(d ^ 1) == f)
            .count()
    }
}

pub fn extract_bisector(sub: &SubdividedInstance, cut: &Cut) -> Result<Bisector> {
    let g = &sub.inst.graph;
    let index = cut.index;

    // Dual arcs leaving the cut: primal darts with tail inside, head outside.
    let mut boundary: Vec<Dart> = Vec::new();
    for d in 0..g.dart_count() as Dart {
        if cut.contains(g.tail(d)) && !cut.contains(g.head(d)) {
            boundary.push(d);
        }
    }

    // Out-arc per dual vertex. More than one means the cycle would revisit
    // a dual vertex, so it cannot be simple.
    let mut out_at: HashMap<FaceId, Dart> = HashMap::with_capacity(boundary.len());
    for &d in &boundary {
        let tail_face = g.face_of(d ^ 1);
        if out_at.insert(tail_face, d).is_some() {
            return Err(Error::NotASimpleCycle {
                index,
                reason: format!("two cut arcs leave dual vertex {tail_face}"),
            });
        }
    }

    let s_hi = sub.inst.sources[index];
    let s_lo = sub.inst.sources[index - 1];
    let first = g.dart_between(s_hi, s_lo).ok_or_else(|| Error::InvariantBreach(format!(
        "source face edge between positions {index} and {} missing",
        index + 1
    )))?;
    if !boundary.contains(&first) {
        return Err(Error::NotASimpleCycle {
            index,
            reason: "the source-face arc is not on the cut boundary".into(),
        });
    }

    let mut darts = Vec::with_capacity(boundary.len());
    let mut cur = first;
    loop {
        darts.push(cur);
        let head_face = g.face_of(cur);
        match out_at.get(&head_face) {
            None => {
                return Err(Error::NotASimpleCycle {
                    index,
                    reason: format!("walk dead-ends at dual vertex {head_face}"),
                })
            }
            Some(&next) => {
                if next == first {
                    break;
                }
                if darts.len() > boundary.len() {
                    return Err(Error::NotASimpleCycle {
                        index,
                        reason: "walk does not close after consuming the boundary".into(),
                    });
                }
                cur = next;
            }
        }
    }

    if darts.len() != boundary.len() {
        return Err(Error::NotASimpleCycle {
            index,
            reason: format!(
                "cycle uses {} of {} boundary arcs",
                darts.len(),
                boundary.len()
            ),
        });
    }

    Ok(Bisector { index, darts })
}

pub fn extract_all_bisectors(sub: &SubdividedInstance, cuts: &[Cut]) -> Result<Vec<Bisector>> {
    use rayon::prelude::*;
    cuts.par_iter().map(|c| extract_bisector(sub, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut::compute_cuts;
    use crate::generate::{gen_cycle, gen_grid, TerminalPolicy};
    use crate::instance::subdivide;
    use crate::pattern::compute_binary_patterns;
    use std::collections::HashSet;

    fn bisectors_of(sub: &SubdividedInstance) -> Vec<Bisector> {
        let pats = compute_binary_patterns(sub).unwrap();
        let cuts = compute_cuts(sub, &pats).unwrap();
        extract_all_bisectors(sub, &cuts).unwrap()
    }

    #[test]
    fn subdivided_c4_bisector_is_a_two_cycle() {
        let sub = subdivide(&gen_cycle(4)).unwrap();
        let g = &sub.inst.graph;
        let s = &sub.inst.sources;
        let bs = bisectors_of(&sub);
        for b in &bs {
            assert_eq!(b.len(), 2, "bisector {}", b.index);
            let first = g.dart_between(s[b.index], s[b.index - 1]).unwrap();
            assert_eq!(b.darts[0], first);
            // Second arc crosses the antipodal cycle edge, leaving the cut.
            let second = b.darts[1];
            let i = b.index; // 1-based; antipodal edge joins positions i+4, i+5 (1-based, mod 8)
            let u = s[(i + 3) % 8];
            let v = s[(i + 4) % 8];
            assert_eq!(g.dart_between(u, v).unwrap(), second);
            // One of the two dual vertices is the infinite face.
            assert_eq!(b.incidences_with(g, g.f_inf()), 2);
        }
    }

    #[test]
    fn first_arc_leaves_the_infinite_face() {
        let sub = subdivide(&gen_grid(3, 3, TerminalPolicy::All, 0)).unwrap();
        let g = &sub.inst.graph;
        for b in bisectors_of(&sub) {
            assert_eq!(g.face_of(b.darts[0] ^ 1), g.f_inf());
            assert_eq!(b.incidences_with(g, g.f_inf()), 2);
        }
    }

    #[test]
    fn bisectors_are_simple_and_arc_disjoint() {
        let sub = subdivide(&gen_grid(4, 4, TerminalPolicy::All, 0)).unwrap();
        let g = &sub.inst.graph;
        let bs = bisectors_of(&sub);
        let mut used: HashSet<Dart> = HashSet::new();
        for b in &bs {
            let mut faces = HashSet::new();
            for f in b.dual_vertices(g) {
                assert!(faces.insert(f), "bisector {} revisits dual vertex {f}", b.index);
            }
            for &d in &b.darts {
                assert!(used.insert(d), "dual arc {d} used by two bisectors");
            }
        }
    }

    #[test]
    fn each_face_sees_at_most_two_arcs_per_bisector() {
        let sub = subdivide(&gen_grid(4, 3, TerminalPolicy::All, 0)).unwrap();
        let g = &sub.inst.graph;
        for b in bisectors_of(&sub) {
            for f in 0..g.face_count() as FaceId {
                assert!(b.incidences_with(g, f) <= 2);
            }
        }
    }
}
