//! Crossing structure of bisector pairs.
//!
//! Two bisectors never share an arc, but one may contain reversed arcs of
//! the other and they may meet at dual vertices. A *part* is a maximal
//! common subpath when orientation is ignored: a connected component of
//! shared dual vertices joined by shared (reversed) arcs. A part is a
//! *crossing* when the arcs of the second cycle immediately before and
//! after it lie on opposite sides of the first cycle, and a *touch*
//! otherwise. Sides are decided combinatorially from cut membership: an
//! arc adjacent to a maximal part is not on the first bisector, so both
//! primal endpoints of the edge it crosses sit on one side of the cut.
//!
//! Parts containing the infinite face are classified and participate in
//! the parity sanity check but are excluded from the crossing count r.

use crate::bisector::Bisector;
use crate::cut::Cut;
use crate::error::{Error, Result};
use crate::planar::{Dart, FaceId, PlanarGraph};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartKind {
    Cross,
    Touch,
}

#[derive(Debug, Clone)]
pub struct CrossingPart {
    pub dual_vertices: Vec<FaceId>,
    pub kind: PartKind,
    pub contains_f_inf: bool,
    /// Entire support shared: the two cycles coincide as undirected curves.
    pub whole_cycle: bool,
    /// First position of the part along each cycle (meaningful for parts
    /// away from the infinite face, which cannot wrap past position 0).
    pub pos_i: u32,
    pub pos_j: u32,
}

#[derive(Debug, Clone)]
pub struct CrossingReport {
    pub i: usize,
    pub j: usize,
    pub parts: Vec<CrossingPart>,
    /// Crossing parts away from the infinite face.
    pub r: usize,
}

impl CrossingReport {
    pub fn total_crossings(&self) -> usize {
        self.parts.iter().filter(|p| p.kind == PartKind::Cross).count()
    }

    pub fn parity_even(&self) -> bool {
        self.total_crossings().is_multiple_of(2)
    }
}

/// Precomputed lookups for one bisector.
pub struct BisectorCtx<'a> {
    pub b: &'a Bisector,
    pos: HashMap<FaceId, u32>,
    darts: HashSet<Dart>,
}

impl<'a> BisectorCtx<'a> {
    pub fn new(g: &PlanarGraph, b: &'a Bisector) -> Self {
        let mut pos = HashMap::with_capacity(b.len());
        for (p, &d) in b.darts.iter().enumerate() {
            pos.insert(g.face_of(d ^ 1), p as u32);
        }
        BisectorCtx {
            b,
            pos,
            darts: b.darts.iter().copied().collect(),
        }
    }

    fn len(&self) -> usize {
        self.b.len()
    }

    fn in_dart(&self, v: FaceId) -> Dart {
        let p = self.pos[&v] as usize;
        self.b.darts[(p + self.len() - 1) % self.len()]
    }

    fn out_dart(&self, v: FaceId) -> Dart {
        self.b.darts[self.pos[&v] as usize]
    }
}

pub fn enumerate_crossings(
    g: &PlanarGraph,
    cut_i: &Cut,
    b_i: &Bisector,
    b_j: &Bisector,
) -> Result<CrossingReport> {
    let ci = BisectorCtx::new(g, b_i);
    let cj = BisectorCtx::new(g, b_j);
    enumerate_crossings_prepared(g, cut_i, &ci, &cj)
}

pub fn enumerate_crossings_prepared(
    g: &PlanarGraph,
    cut_i: &Cut,
    ci: &BisectorCtx,
    cj: &BisectorCtx,
) -> Result<CrossingReport> {
    if ci.b.index == cj.b.index {
        return Err(Error::InvariantBreach(
            "crossing enumeration needs two distinct bisectors".into(),
        ));
    }
    let f_inf = g.f_inf();

    // Shared dual vertices and shared undirected arcs.
    let shared: Vec<FaceId> = ci
        .b
        .dual_vertices(g)
        .filter(|v| cj.pos.contains_key(v))
        .collect();
    let mut shared_edges: HashSet<u32> = HashSet::new();
    for &d in &ci.b.darts {
        if cj.darts.contains(&(d ^ 1)) || cj.darts.contains(&d) {
            shared_edges.insert(d >> 1);
        }
    }

    // Components of the intersection. Adjacency only through shared arcs.
    let shared_set: HashSet<FaceId> = shared.iter().copied().collect();
    let mut comp_of: HashMap<FaceId, u32> = HashMap::new();
    let mut components: Vec<(Vec<FaceId>, Vec<u32>)> = Vec::new();
    for &v0 in &shared {
        if comp_of.contains_key(&v0) {
            continue;
        }
        let id = components.len() as u32;
        let mut verts = Vec::new();
        let mut edges = Vec::new();
        let mut stack = vec![v0];
        comp_of.insert(v0, id);
        while let Some(v) = stack.pop() {
            verts.push(v);
            for d in [ci.in_dart(v), ci.out_dart(v)] {
                if !shared_edges.contains(&(d >> 1)) {
                    continue;
                }
                edges.push(d >> 1);
                let other = if g.face_of(d ^ 1) == v {
                    g.face_of(d)
                } else {
                    g.face_of(d ^ 1)
                };
                debug_assert!(shared_set.contains(&other));
                if let std::collections::hash_map::Entry::Vacant(e) = comp_of.entry(other) {
                    e.insert(id);
                    stack.push(other);
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        components.push((verts, edges));
    }

    let mut parts = Vec::with_capacity(components.len());
    for (verts, edges) in &components {
        let contains_f_inf = verts.contains(&f_inf);
        if edges.len() >= verts.len() {
            // A cyclic component: the two cycles coincide entirely.
            parts.push(CrossingPart {
                dual_vertices: verts.clone(),
                kind: PartKind::Touch,
                contains_f_inf,
                whole_cycle: true,
                pos_i: 0,
                pos_j: 0,
            });
            continue;
        }
        let edge_set: HashSet<u32> = edges.iter().copied().collect();
        let mut enter = None;
        let mut leave = None;
        for &v in verts {
            let ind = cj.in_dart(v);
            if !edge_set.contains(&(ind >> 1)) {
                debug_assert!(enter.is_none());
                enter = Some(ind);
            }
            let outd = cj.out_dart(v);
            if !edge_set.contains(&(outd >> 1)) {
                debug_assert!(leave.is_none());
                leave = Some(outd);
            }
        }
        let (enter, leave) = match (enter, leave) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::InvariantBreach(format!(
                    "part of bisectors {} and {} has no boundary arcs",
                    ci.b.index, cj.b.index
                )))
            }
        };
        let side = |d: Dart| {
            let t = cut_i.contains(g.tail(d));
            debug_assert_eq!(t, cut_i.contains(g.head(d)), "boundary arc touches the cut");
            t
        };
        let kind = if side(enter) != side(leave) {
            PartKind::Cross
        } else {
            PartKind::Touch
        };
        let pos_i = verts.iter().map(|v| ci.pos[v]).min().unwrap();
        let pos_j = verts.iter().map(|v| cj.pos[v]).min().unwrap();
        parts.push(CrossingPart {
            dual_vertices: verts.clone(),
            kind,
            contains_f_inf,
            whole_cycle: false,
            pos_i,
            pos_j,
        });
    }

    let r = parts
        .iter()
        .filter(|p| p.kind == PartKind::Cross && !p.contains_f_inf)
        .count();
    Ok(CrossingReport {
        i: ci.b.index,
        j: cj.b.index,
        parts,
        r,
    })
}

/// True iff the crossing parts away from the infinite face appear along
/// the second cycle in exactly the reverse of their order along the first.
pub fn verify_crossing_order(report: &CrossingReport) -> bool {
    let mut crossings: Vec<(u32, u32)> = report
        .parts
        .iter()
        .filter(|p| p.kind == PartKind::Cross && !p.contains_f_inf)
        .map(|p| (p.pos_i, p.pos_j))
        .collect();
    crossings.sort_unstable();
    crossings.windows(2).all(|w| w[0].1 > w[1].1)
}

#[derive(Debug, Clone, Default)]
pub struct CrossingTotals {
    /// Sum of r over all enumerated pairs.
    pub t: u64,
    pub max_r: usize,
    pub histogram: BTreeMap<usize, u64>,
    pub pairs: usize,
}

pub fn crossing_totals<'a>(reports: impl Iterator<Item = &'a CrossingReport>) -> CrossingTotals {
    let mut out = CrossingTotals::default();
    for rep in reports {
        out.t += rep.r as u64;
        out.max_r = out.max_r.max(rep.r);
        *out.histogram.entry(rep.r).or_insert(0) += 1;
        out.pairs += 1;
    }
    out
}

#[derive(Debug, Clone)]
pub struct PairSurvey {
    pub totals: CrossingTotals,
    pub all_orders_reversed: bool,
    pub all_parities_even: bool,
    pub order_violation: Option<(usize, usize)>,
    pub parity_violation: Option<(usize, usize)>,
    /// True when every pair was enumerated, false under a sampling cap.
    pub exhaustive: bool,
}

/// Enumerate crossings for all (or a seeded sample of) bisector pairs.
pub fn survey_pairs(
    g: &PlanarGraph,
    cuts: &[Cut],
    bisectors: &[Bisector],
    pair_cap: Option<usize>,
    seed: u64,
) -> Result<PairSurvey> {
    let ctxs: Vec<BisectorCtx> = bisectors.iter().map(|b| BisectorCtx::new(g, b)).collect();
    let mut pairs: Vec<(usize, usize)> = (0..bisectors.len())
        .flat_map(|a| (a + 1..bisectors.len()).map(move |b| (a, b)))
        .collect();
    let mut exhaustive = true;
    if let Some(cap) = pair_cap {
        if pairs.len() > cap {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            pairs.shuffle(&mut rng);
            pairs.truncate(cap);
            pairs.sort_unstable();
            exhaustive = false;
        }
    }

    let summaries: Vec<(usize, bool, bool, usize, usize)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let rep = enumerate_crossings_prepared(g, &cuts[a], &ctxs[a], &ctxs[b])?;
            Ok((
                rep.r,
                verify_crossing_order(&rep),
                rep.parity_even(),
                rep.i,
                rep.j,
            ))
        })
        .collect::<Result<_>>()?;

    let mut totals = CrossingTotals::default();
    let mut all_orders = true;
    let mut all_parities = true;
    let mut order_violation = None;
    let mut parity_violation = None;
    for (r, order_ok, parity_ok, i, j) in summaries {
        totals.t += r as u64;
        totals.max_r = totals.max_r.max(r);
        *totals.histogram.entry(r).or_insert(0) += 1;
        totals.pairs += 1;
        if !order_ok {
            all_orders = false;
            order_violation.get_or_insert((i, j));
        }
        if !parity_ok {
            all_parities = false;
            parity_violation.get_or_insert((i, j));
        }
    }
    Ok(PairSurvey {
        totals,
        all_orders_reversed: all_orders,
        all_parities_even: all_parities,
        order_violation,
        parity_violation,
        exhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisector::extract_all_bisectors;
    use crate::cut::compute_cuts;
    use crate::generate::{gen_cycle, gen_grid, gen_shalin_lower, TerminalPolicy};
    use crate::instance::{subdivide, SubdividedInstance};
    use crate::pattern::compute_binary_patterns;

    fn setup(sub: &SubdividedInstance) -> (Vec<Cut>, Vec<Bisector>) {
        let pats = compute_binary_patterns(sub).unwrap();
        let cuts = compute_cuts(sub, &pats).unwrap();
        let bs = extract_all_bisectors(sub, &cuts).unwrap();
        (cuts, bs)
    }

    #[test]
    fn adjacent_bisectors_of_a_cycle_cross_once_at_the_inner_face() {
        let sub = subdivide(&gen_cycle(4)).unwrap();
        let g = &sub.inst.graph;
        let (cuts, bs) = setup(&sub);
        let rep = enumerate_crossings(g, &cuts[0], &bs[0], &bs[1]).unwrap();
        assert_eq!(rep.r, 1);
        let inner: Vec<_> = rep.parts.iter().filter(|p| !p.contains_f_inf).collect();
        assert_eq!(inner.len(), 1);
        assert_eq!(inner[0].kind, PartKind::Cross);
        assert_eq!(inner[0].dual_vertices.len(), 1);
        assert!(rep.parity_even());
    }

    #[test]
    fn same_index_pair_is_rejected() {
        let sub = subdivide(&gen_cycle(4)).unwrap();
        let (cuts, bs) = setup(&sub);
        assert!(enumerate_crossings(&sub.inst.graph, &cuts[0], &bs[0], &bs[0]).is_err());
    }

    #[test]
    fn antipodal_bisectors_of_a_cycle_share_their_whole_support() {
        // In the subdivided 4-cycle, bisectors 1 and 5 run along the same
        // two dual edges in opposite directions: r must be 0.
        let sub = subdivide(&gen_cycle(4)).unwrap();
        let (cuts, bs) = setup(&sub);
        let rep = enumerate_crossings(&sub.inst.graph, &cuts[0], &bs[0], &bs[4]).unwrap();
        assert_eq!(rep.r, 0);
        assert!(rep.parts.iter().any(|p| p.whole_cycle));
        assert!(rep.parity_even());
    }

    #[test]
    fn cycle_totals_match_interleaving_count() {
        // Independent oracle: on the subdivided 4-cycle each bisector uses
        // boundary edges {i, i+4 mod 8}; a pair crosses away from the
        // infinite face exactly when those edge pairs interleave.
        let sub = subdivide(&gen_cycle(4)).unwrap();
        let (cuts, bs) = setup(&sub);
        let survey = survey_pairs(&sub.inst.graph, &cuts, &bs, None, 0).unwrap();
        let mut expected = 0u64;
        for i in 1..=7usize {
            for j in i + 1..=7 {
                let (a1, a2) = (i % 8, (i + 4) % 8);
                let (b1, b2) = (j % 8, (j + 4) % 8);
                let between = |x: usize, lo: usize, hi: usize| {
                    // strictly between lo and hi walking forward mod 8
                    let span = (hi + 8 - lo) % 8;
                    let off = (x + 8 - lo) % 8;
                    off > 0 && off < span
                };
                if between(b1, a1, a2) != between(b2, a1, a2) {
                    expected += 1;
                }
            }
        }
        assert_eq!(expected, 18);
        assert_eq!(survey.totals.t, expected);
        assert!(survey.all_orders_reversed);
        assert!(survey.all_parities_even);
        assert_eq!(survey.totals.max_r, 1);
    }

    #[test]
    fn grid_pairs_have_reversed_orders_and_even_parity() {
        let sub = subdivide(&gen_grid(4, 4, TerminalPolicy::All, 0)).unwrap();
        let (cuts, bs) = setup(&sub);
        let survey = survey_pairs(&sub.inst.graph, &cuts, &bs, None, 0).unwrap();
        assert!(survey.all_orders_reversed);
        assert!(survey.all_parities_even);
    }

    #[test]
    fn parts_include_reversed_arc_runs() {
        // Any subdivided edge whose endpoint patterns differ in exactly two
        // positions i and j puts (uv)* on one of the two bisectors and
        // (vu)* on the other, so their common parts include whole shared
        // subpaths, not just isolated dual vertices. Make sure the
        // enumeration actually sees such runs on a grid.
        let sub = subdivide(&gen_grid(6, 6, TerminalPolicy::All, 0)).unwrap();
        let (cuts, bs) = setup(&sub);
        let mut multi = 0usize;
        let mut max_len = 0usize;
        for a in 0..bs.len() {
            for b in a + 1..bs.len() {
                let rep = enumerate_crossings(&sub.inst.graph, &cuts[a], &bs[a], &bs[b]).unwrap();
                for p in &rep.parts {
                    if !p.whole_cycle && p.dual_vertices.len() > 1 {
                        multi += 1;
                        max_len = max_len.max(p.dual_vertices.len());
                    }
                }
            }
        }
        assert!(multi > 0, "expected shared reversed-arc runs on a grid");
        assert!(max_len >= 2);
    }

    #[test]
    fn halin_lower_family_crossing_bound() {
        let inst = gen_shalin_lower(8, TerminalPolicy::All).unwrap();
        let sub = subdivide(&inst).unwrap();
        let (cuts, bs) = setup(&sub);
        let survey = survey_pairs(&sub.inst.graph, &cuts, &bs, None, 0).unwrap();
        assert!(survey.totals.max_r <= 8 / 2 + 2);
        assert!(survey.all_orders_reversed);
    }

    #[test]
    fn shuffled_part_order_fails_the_reversal_check() {
        let mk = |pos_i: u32, pos_j: u32| CrossingPart {
            dual_vertices: vec![pos_i],
            kind: PartKind::Cross,
            contains_f_inf: false,
            whole_cycle: false,
            pos_i,
            pos_j,
        };
        let good = CrossingReport {
            i: 1,
            j: 2,
            parts: vec![mk(1, 9), mk(4, 6), mk(7, 2)],
            r: 3,
        };
        assert!(verify_crossing_order(&good));
        let bad = CrossingReport {
            i: 1,
            j: 2,
            parts: vec![mk(1, 6), mk(4, 9), mk(7, 2)],
            r: 3,
        };
        assert!(!verify_crossing_order(&bad));
    }
}
