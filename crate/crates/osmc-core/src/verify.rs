//! Property verification suites, the brute-force distance oracle,
//! shattering checks, size baselines and the growth probe.
//!
//! Every failed check carries a reproducer payload (instance label plus
//! the offending vertices or indices); exit-code policy lives in the CLI.

use crate::bisector::{extract_all_bisectors, Bisector};
use crate::bits::Bits;
use crate::crossing::{survey_pairs, PairSurvey};
use crate::cut::{compute_cuts, Cut};
use crate::distance::{all_source_bfs, bfs_distances, DistanceField};
use crate::encoding::{build_encoding, size_report, ModeRequest};
use crate::error::{Error, Result};
use crate::generate::{shalin_expected_pattern, shalin_vertex_id};
use crate::instance::{subdivide, OSInstance, SubdividedInstance};
use crate::pattern::{
    column_masks, compute_binary_patterns, compute_patterns, distinct_patterns, ColumnMasks,
    DistinctPatterns, PatternMode, PatternSet,
};
use crate::planar::{Dart, FaceId, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn pass(name: &str, detail: impl Into<String>) -> PropertyCheck {
    PropertyCheck {
        name: name.into(),
        pass: true,
        detail: detail.into(),
    }
}

fn fail(name: &str, detail: impl Into<String>) -> PropertyCheck {
    PropertyCheck {
        name: name.into(),
        pass: false,
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Metrics {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub t_count: usize,
    pub n_subdivided: usize,
    /// Distinct binary patterns over all subdivided vertices.
    pub x: usize,
    /// Distinct ternary patterns over all original vertices.
    pub x_ternary: usize,
    pub max_pattern_class_size: usize,
    pub crossings_total: Option<u64>,
    pub max_r: Option<usize>,
    /// max_r - k/2, the realized additive constant of the crossing bound.
    pub crossing_slack_realized: Option<f64>,
    pub encoding_words: Option<usize>,
    pub naive_matrix_words: usize,
    pub pattern_table_words: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub instance: String,
    pub ok: bool,
    pub checks: Vec<PropertyCheck>,
    pub metrics: Metrics,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Additive slack allowed over k/2 in the pairwise crossing bound.
    pub crossing_slack: f64,
    /// (u, i) samples for the containment and path-disjointness checks.
    pub containment_samples: usize,
    /// Cap on enumerated bisector pairs (None = all pairs).
    pub pair_cap: Option<usize>,
    /// Column-subset budget for the shattering checks.
    pub shatter_budget: u64,
    /// Run the crossing suites (quadratic in k).
    pub crossings: bool,
    /// Sources given full-field treatment before sampling kicks in.
    pub max_full_sources: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            crossing_slack: 2.0,
            containment_samples: 20,
            pair_cap: None,
            shatter_budget: 200_000,
            crossings: true,
            max_full_sources: 512,
            seed: 0,
        }
    }
}

/// Run every structural property suite against one instance.
pub fn verify_instance(inst: &OSInstance, label: &str, opts: &VerifyOptions) -> VerificationReport {
    let mut checks: Vec<PropertyCheck> = Vec::new();
    let mut metrics = Metrics {
        n: inst.graph.n(),
        m: inst.graph.m(),
        k: inst.k(),
        t_count: inst.terminals.len(),
        naive_matrix_words: inst.k() * inst.terminals.len(),
        ..Metrics::default()
    };

    let v = inst.validate();
    checks.push(if v.ok {
        pass("instance-valid", "")
    } else {
        fail("instance-valid", v.problems.join("; "))
    });

    let field = all_source_bfs(inst);
    checks.push(check_source_distance_bound(inst, &field));

    let sub = match subdivide(inst) {
        Ok(s) => s,
        Err(e) => {
            checks.push(fail("subdivision", e.to_string()));
            return VerificationReport {
                instance: label.into(),
                ok: false,
                checks,
                metrics,
            };
        }
    };
    metrics.n_subdivided = sub.inst.graph.n();
    checks.push(check_distance_doubling(inst, &sub, opts.seed));

    let ternary = match compute_patterns(&field, PatternMode::Ternary) {
        Ok(t) => {
            checks.push(pass("ternary-range", "all entries in {-1,0,1}"));
            Some(t)
        }
        Err(e) => {
            checks.push(fail("ternary-range", e.to_string()));
            None
        }
    };
    let binary = match compute_binary_patterns(&sub) {
        Ok(b) => {
            checks.push(pass("binary-range", "all subdivided differences are +-1"));
            Some(b)
        }
        Err(e) => {
            checks.push(fail("binary-range", e.to_string()));
            None
        }
    };

    // Full subdivided field when affordable; otherwise sampled sources.
    let full_sub_field = if sub.source_count() <= opts.max_full_sources {
        Some(crate::distance::all_source_bfs_subdivided(&sub))
    } else {
        None
    };
    checks.push(check_parity(&sub, full_sub_field.as_ref()));
    if let Some(t) = &ternary {
        checks.push(check_reconstruct_ternary(inst, &field, t));
    }
    if let (Some(b), Some(f)) = (&binary, &full_sub_field) {
        checks.push(check_reconstruct_binary(&sub, f, b));
    }

    let (binary, distinct) = match binary {
        Some(b) => {
            let d = distinct_patterns(&b);
            metrics.x = d.count;
            metrics.max_pattern_class_size = d.max_class_size;
            (b, d)
        }
        None => {
            return VerificationReport {
                instance: label.into(),
                ok: checks.iter().all(|c| c.pass),
                checks,
                metrics,
            }
        }
    };
    if let Some(t) = &ternary {
        metrics.x_ternary = distinct_patterns(t).count;
        metrics.pattern_table_words = pattern_table_words(inst, t);
    }

    checks.push(check_adjacent_patterns(&sub, &binary));

    // Cuts and bisectors.
    let cuts = match compute_cuts(&sub, &binary) {
        Ok(c) => {
            checks.push(pass(
                "cut-sides-connected",
                format!("{} cuts, both sides connected", c.len()),
            ));
            checks.push(pass("pattern-side-coherence", "membership matches entries"));
            Some(c)
        }
        Err(e) => {
            checks.push(fail("cut-sides-connected", e.to_string()));
            None
        }
    };

    let bisectors = cuts.as_ref().and_then(|cuts| {
        match extract_all_bisectors(&sub, cuts) {
            Ok(bs) => {
                checks.push(pass(
                    "bisector-simple-cycle",
                    format!("{} simple dual cycles", bs.len()),
                ));
                Some(bs)
            }
            Err(e) => {
                checks.push(fail("bisector-simple-cycle", e.to_string()));
                None
            }
        }
    });

    if let Some(bs) = &bisectors {
        checks.push(check_two_infinite_darts(&sub, bs));
        checks.push(check_arc_disjoint(bs));
        checks.push(check_face_incidence(&sub, bs));
        if let Some(cuts) = &cuts {
            checks.push(check_path_containment(&sub, cuts, opts));
            checks.push(check_path_bisector_disjoint(&sub, cuts, bs, opts));
            if opts.crossings {
                match survey_pairs(&sub.inst.graph, cuts, bs, opts.pair_cap, opts.seed) {
                    Ok(survey) => {
                        metrics.crossings_total = Some(survey.totals.t);
                        metrics.max_r = Some(survey.totals.max_r);
                        metrics.crossing_slack_realized =
                            Some(survey.totals.max_r as f64 - inst.k() as f64 / 2.0);
                        checks.extend(crossing_checks(inst, &survey, &distinct, opts));
                    }
                    Err(e) => checks.push(fail("crossing-survey", e.to_string())),
                }
            }
        }
    }

    checks.push(check_cubic_bound(inst, &distinct));
    checks.extend(shatter_checks(&binary, &distinct, opts));

    match build_encoding(inst, ModeRequest::Auto, opts.seed) {
        Ok(enc) => {
            metrics.encoding_words = Some(size_report(&enc).total());
            checks.push(check_queries_against_oracle(inst, &enc, opts.seed));
        }
        Err(e) => checks.push(fail("encoding-build", e.to_string())),
    }

    VerificationReport {
        instance: label.into(),
        ok: checks.iter().all(|c| c.pass),
        checks,
        metrics,
    }
}

fn check_source_distance_bound(inst: &OSInstance, field: &DistanceField) -> PropertyCheck {
    let k = inst.k();
    for (i, row) in field.dist.iter().enumerate() {
        for (j, &s) in inst.sources.iter().enumerate() {
            if row[s as usize] as usize > k / 2 {
                return fail(
                    "source-distance-bound",
                    format!(
                        "d(s_{}, s_{}) = {} > {}",
                        i + 1,
                        j + 1,
                        row[s as usize],
                        k / 2
                    ),
                );
            }
        }
    }
    pass("source-distance-bound", format!("all pairs within {}", k / 2))
}

fn check_distance_doubling(inst: &OSInstance, sub: &SubdividedInstance, seed: u64) -> PropertyCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd0b1);
    let n = inst.graph.n();
    for _ in 0..10 {
        let u = rng.random_range(0..n) as Vertex;
        let base = bfs_distances(&inst.graph, u);
        let dsub = bfs_distances(&sub.inst.graph, u);
        let v = rng.random_range(0..n);
        if dsub[v] != 2 * base[v] {
            return fail(
                "subdivision-doubles-distances",
                format!("d'({u},{v}) = {} but d = {}", dsub[v], base[v]),
            );
        }
    }
    pass("subdivision-doubles-distances", "10 sampled pairs")
}

fn check_parity(sub: &SubdividedInstance, full: Option<&DistanceField>) -> PropertyCheck {
    let rows: Vec<(usize, Vec<u32>)> = match full {
        Some(f) => f.dist.iter().cloned().enumerate().collect(),
        None => {
            // Sampled sources: every fourth plus the first two.
            let mut idx: Vec<usize> = (0..sub.source_count()).step_by(4).collect();
            idx.extend([0, 1]);
            idx.sort_unstable();
            idx.dedup();
            idx.into_iter()
                .map(|i| (i, bfs_distances(&sub.inst.graph, sub.inst.sources[i])))
                .collect()
        }
    };
    let n = sub.inst.graph.n();
    for u in 0..n {
        let base_parity = rows[0].1[u] & 1 ^ (rows[0].0 as u32 & 1);
        for (i, row) in &rows {
            let expect = base_parity ^ (*i as u32 & 1);
            if row[u] & 1 != expect {
                return fail(
                    "subdivided-parity",
                    format!("vertex {u}: parity breaks at source position {}", i + 1),
                );
            }
        }
    }
    pass("subdivided-parity", format!("{} sources checked", rows.len()))
}

fn check_reconstruct_ternary(
    inst: &OSInstance,
    field: &DistanceField,
    pats: &PatternSet,
) -> PropertyCheck {
    let k = inst.k();
    for v in 0..inst.graph.n() {
        let mut acc = field.dist[0][v] as i64;
        for i in 2..=k {
            acc += pats.entry(v as Vertex, i - 2) as i64;
            if acc != field.dist[i - 1][v] as i64 {
                return fail(
                    "reconstruct-exact-ternary",
                    format!("vertex {v}, source {i}: got {acc}, oracle {}", field.dist[i - 1][v]),
                );
            }
        }
    }
    pass("reconstruct-exact-ternary", "every (v, i) pair")
}

fn check_reconstruct_binary(
    sub: &SubdividedInstance,
    field: &DistanceField,
    pats: &PatternSet,
) -> PropertyCheck {
    let l = sub.pattern_len();
    for v in 0..sub.inst.graph.n() {
        let mut acc = field.dist[0][v] as i64;
        for j in 0..l {
            acc += pats.entry(v as Vertex, j) as i64;
            if acc != field.dist[j + 1][v] as i64 {
                return fail(
                    "reconstruct-exact-binary",
                    format!("vertex {v}, position {}", j + 1),
                );
            }
        }
    }
    pass("reconstruct-exact-binary", "every (v, position) pair")
}

fn check_adjacent_patterns(sub: &SubdividedInstance, pats: &PatternSet) -> PropertyCheck {
    let g = &sub.inst.graph;
    for e in 0..g.m() as u32 {
        let d = 2 * e;
        let (u, v) = (g.tail(d), g.head(d));
        let h = pats.hamming(u, v);
        if h > 2 {
            return fail(
                "adjacent-patterns-two-bits",
                format!("edge {u}-{v} flips {h} positions"),
            );
        }
    }
    pass(
        "adjacent-patterns-two-bits",
        format!("{} subdivided edges", g.m()),
    )
}

fn check_two_infinite_darts(sub: &SubdividedInstance, bs: &[Bisector]) -> PropertyCheck {
    let g = &sub.inst.graph;
    let f_inf = g.f_inf();
    for b in bs {
        let c = b.incidences_with(g, f_inf);
        if c != 2 {
            return fail(
                "bisector-two-infinite-darts",
                format!("bisector {} touches the infinite face {c} times", b.index),
            );
        }
    }
    pass("bisector-two-infinite-darts", format!("{} bisectors", bs.len()))
}

fn check_arc_disjoint(bs: &[Bisector]) -> PropertyCheck {
    let mut owner: HashMap<Dart, usize> = HashMap::new();
    for b in bs {
        for &d in &b.darts {
            if let Some(prev) = owner.insert(d, b.index) {
                return fail(
                    "bisectors-arc-disjoint",
                    format!("dual arc {d} used by bisectors {prev} and {}", b.index),
                );
            }
        }
    }
    pass("bisectors-arc-disjoint", format!("{} arcs", owner.len()))
}

fn check_face_incidence(sub: &SubdividedInstance, bs: &[Bisector]) -> PropertyCheck {
    let g = &sub.inst.graph;
    for b in bs {
        let mut counts: HashMap<FaceId, usize> = HashMap::new();
        for &d in &b.darts {
            *counts.entry(g.face_of(d)).or_insert(0) += 1;
            *counts.entry(g.face_of(d ^ 1)).or_insert(0) += 1;
        }
        if let Some((f, c)) = counts.iter().find(|&(_, &c)| c > 2) {
            return fail(
                "bisector-face-incidence",
                format!("bisector {} has {c} arcs at face {f}", b.index),
            );
        }
    }
    pass("bisector-face-incidence", "at most two arcs per face")
}

fn check_path_containment(
    sub: &SubdividedInstance,
    cuts: &[Cut],
    opts: &VerifyOptions,
) -> PropertyCheck {
    let g = &sub.inst.graph;
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xc047);
    for _ in 0..opts.containment_samples {
        let u = rng.random_range(0..n) as Vertex;
        let idx = rng.random_range(0..cuts.len());
        let cut = &cuts[idx];
        let inside = cut.contains(u);
        // Vertices on any shortest path from u to its side's source stay
        // on that side.
        let target = if inside {
            sub.inst.sources[cut.index]
        } else {
            sub.inst.sources[cut.index - 1]
        };
        let du = bfs_distances(g, u);
        let dt = bfs_distances(g, target);
        let total = du[target as usize];
        for v in 0..n {
            if du[v] != u32::MAX && du[v] + dt[v] == total && cut.contains(v as Vertex) != inside {
                return fail(
                    "shortest-path-containment",
                    format!(
                        "cut {}, u={u}: vertex {v} lies on a shortest path to {target} but crosses sides",
                        cut.index
                    ),
                );
            }
        }
    }
    pass(
        "shortest-path-containment",
        format!("{} sampled (u, i) pairs", opts.containment_samples),
    )
}

fn check_path_bisector_disjoint(
    sub: &SubdividedInstance,
    cuts: &[Cut],
    bs: &[Bisector],
    opts: &VerifyOptions,
) -> PropertyCheck {
    let g = &sub.inst.graph;
    let n = g.n();
    let mut owner: HashMap<Dart, usize> = HashMap::new();
    for b in bs {
        for &d in &b.darts {
            owner.insert(d, b.index);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9a7e);
    for _ in 0..opts.containment_samples {
        let u = rng.random_range(0..n) as Vertex;
        let idx = rng.random_range(0..cuts.len());
        let cut = &cuts[idx];
        let target = if cut.contains(u) {
            sub.inst.sources[cut.index]
        } else {
            sub.inst.sources[cut.index - 1]
        };
        let dt = bfs_distances(g, target);
        // Greedy certificate path: always step closer to the target.
        let mut at = u;
        while at != target {
            let next_dart = g
                .darts_from(at)
                .iter()
                .copied()
                .find(|&d| dt[g.head(d) as usize] + 1 == dt[at as usize])
                .expect("a vertex closer to the target always exists");
            for d in [next_dart, next_dart ^ 1] {
                if owner.get(&d) == Some(&cut.index) {
                    return fail(
                        "path-bisector-disjoint",
                        format!(
                            "cut {}: certificate path from {u} crosses its own bisector at dart {d}",
                            cut.index
                        ),
                    );
                }
            }
            at = g.head(next_dart);
        }
    }
    pass(
        "path-bisector-disjoint",
        format!("{} sampled certificate paths", opts.containment_samples),
    )
}

fn crossing_checks(
    inst: &OSInstance,
    survey: &PairSurvey,
    distinct: &DistinctPatterns,
    opts: &VerifyOptions,
) -> Vec<PropertyCheck> {
    let mut out = Vec::new();
    let scope = if survey.exhaustive {
        format!("{} pairs", survey.totals.pairs)
    } else {
        format!("{} sampled pairs", survey.totals.pairs)
    };
    out.push(match survey.order_violation {
        None => pass("crossing-order-reversal", scope.clone()),
        Some((i, j)) => fail(
            "crossing-order-reversal",
            format!("bisectors {i} and {j} violate the reversal order"),
        ),
    });
    out.push(match survey.parity_violation {
        None => pass("crossing-parity", scope.clone()),
        Some((i, j)) => fail(
            "crossing-parity",
            format!("bisectors {i} and {j} cross an odd number of times"),
        ),
    });

    let k = inst.k() as f64;
    let bound = k / 2.0 + opts.crossing_slack;
    out.push(if (survey.totals.max_r as f64) <= bound {
        pass(
            "crossing-count-bound",
            format!("max_r = {} <= k/2 + {}", survey.totals.max_r, opts.crossing_slack),
        )
    } else {
        fail(
            "crossing-count-bound",
            format!("max_r = {} exceeds k/2 + {}", survey.totals.max_r, opts.crossing_slack),
        )
    });

    // Charging bound: every pattern is charged to a crossing or to the
    // infinite-face arcs, at most twice each.
    if survey.exhaustive {
        let lim = 2 * survey.totals.t as usize + 2 * inst.k();
        out.push(if distinct.count <= lim {
            pass(
                "patterns-vs-crossings",
                format!("x = {} <= 2t + 2k = {lim}", distinct.count),
            )
        } else {
            fail(
                "patterns-vs-crossings",
                format!("x = {} > 2t + 2k = {lim}", distinct.count),
            )
        });
    }
    out
}

fn check_cubic_bound(inst: &OSInstance, distinct: &DistinctPatterns) -> PropertyCheck {
    let k = inst.k();
    let lim = 8 * k * k * k;
    if distinct.count <= lim {
        pass("patterns-cubic-bound", format!("x = {} <= 8k^3 = {lim}", distinct.count))
    } else {
        fail("patterns-cubic-bound", format!("x = {} > 8k^3 = {lim}", distinct.count))
    }
}

fn shatter_checks(
    binary: &PatternSet,
    distinct: &DistinctPatterns,
    opts: &VerifyOptions,
) -> Vec<PropertyCheck> {
    let masks = column_masks(binary, distinct);
    let mut out = Vec::new();
    match forbidden_configuration_check(&masks, ShatterMode::Auto, opts.shatter_budget, opts.seed)
    {
        Ok(outcome) => out.push(match outcome.witness {
            None => pass(
                "forbidden-configuration",
                format!(
                    "{} column quadruples checked{}",
                    outcome.subsets_checked,
                    if outcome.exhaustive { "" } else { " (sampled)" }
                ),
            ),
            Some(w) => fail(
                "forbidden-configuration",
                format!("columns {:?} realize the alternating pair", w.columns),
            ),
        }),
        Err(e) => out.push(fail("forbidden-configuration", e.to_string())),
    }
    match shattering_check(&masks, 4, ShatterMode::Auto, opts.shatter_budget, opts.seed) {
        Ok(outcome) => out.push(match outcome.witness {
            None => pass(
                "no-four-column-shattering",
                format!(
                    "{} subsets checked{}",
                    outcome.subsets_checked,
                    if outcome.exhaustive { "" } else { " (sampled)" }
                ),
            ),
            Some(w) => fail(
                "no-four-column-shattering",
                format!("columns {:?} are shattered", w.columns),
            ),
        }),
        Err(e) => out.push(fail("no-four-column-shattering", e.to_string())),
    }
    out
}

fn check_queries_against_oracle(inst: &OSInstance, enc: &crate::encoding::Encoding, seed: u64) -> PropertyCheck {
    if inst.terminals.is_empty() {
        return pass("query-exact", "no terminals");
    }
    let mut oracle = DistanceOracle::new(inst);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0de1);
    let samples = 2_000.min(inst.terminals.len() * inst.k());
    for _ in 0..samples {
        let v = inst.terminals[rng.random_range(0..inst.terminals.len())];
        let i = rng.random_range(1..=inst.k());
        let got = match enc.query(v, i) {
            Ok(g) => g,
            Err(e) => return fail("query-exact", format!("query({v},{i}) failed: {e}")),
        };
        let want = oracle.distance(v, i);
        if got != want {
            return fail(
                "query-exact",
                format!("query({v},{i}) = {got}, oracle says {want}"),
            );
        }
    }
    pass("query-exact", format!("{samples} sampled queries"))
}

// ---------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------

/// Ground truth for acceptance tests: plain BFS over its own adjacency
/// lists, memoized per source, independent of the pattern and encoding
/// code paths.
pub struct DistanceOracle {
    adj: Vec<Vec<Vertex>>,
    sources: Vec<Vertex>,
    cache: HashMap<usize, Vec<u32>>,
}

impl DistanceOracle {
    pub fn new(inst: &OSInstance) -> Self {
        let g = &inst.graph;
        let mut adj = vec![Vec::new(); g.n()];
        for e in 0..g.m() as u32 {
            let d = 2 * e;
            let (u, v) = (g.tail(d), g.head(d));
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        DistanceOracle {
            adj,
            sources: inst.sources.clone(),
            cache: HashMap::new(),
        }
    }

    fn bfs(&self, src: Vertex) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.adj.len()];
        let mut queue = std::collections::VecDeque::from([src]);
        dist[src as usize] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u as usize] {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = dist[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// d(v, s_i), 1-based i.
    pub fn distance(&mut self, v: Vertex, i: usize) -> u32 {
        assert!(i >= 1 && i <= self.sources.len());
        let src = self.sources[i - 1];
        if !self.cache.contains_key(&(i - 1)) {
            let d = self.bfs(src);
            self.cache.insert(i - 1, d);
        }
        self.cache[&(i - 1)][v as usize]
    }
}

/// One-shot oracle distance.
pub fn oracle_distance(inst: &OSInstance, v: Vertex, i: usize) -> u32 {
    DistanceOracle::new(inst).distance(v, i)
}

// ---------------------------------------------------------------------
// Shattering and forbidden-configuration checks
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShatterMode {
    /// Exhaustive when within budget, otherwise a seeded sample.
    Auto,
    /// Error out rather than sample.
    Exhaustive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShatterWitness {
    pub columns: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShatterOutcome {
    pub witness: Option<ShatterWitness>,
    pub exhaustive: bool,
    pub subsets_checked: u64,
}

fn combination_count(n: usize, d: usize) -> u64 {
    if d > n {
        return 0;
    }
    let mut acc = 1u128;
    for i in 0..d {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc.min(u64::MAX as u128) as u64
}

fn for_each_subset(
    len: usize,
    d: usize,
    budget: u64,
    mode: ShatterMode,
    seed: u64,
    mut f: impl FnMut(&[usize]) -> bool,
) -> Result<(bool, u64)> {
    let total = combination_count(len, d);
    if total <= budget {
        // Lexicographic enumeration.
        let mut idx: Vec<usize> = (0..d).collect();
        let mut checked = 0u64;
        if len < d {
            return Ok((true, 0));
        }
        loop {
            checked += 1;
            if f(&idx) {
                return Ok((true, checked));
            }
            // advance
            let mut i = d;
            loop {
                if i == 0 {
                    return Ok((true, checked));
                }
                i -= 1;
                if idx[i] != i + len - d {
                    break;
                }
            }
            if idx[i] == i + len - d {
                return Ok((true, checked));
            }
            idx[i] += 1;
            for j in i + 1..d {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    if mode == ShatterMode::Exhaustive {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x54a7);
    let mut checked = 0u64;
    for _ in 0..budget {
        let mut pick: Vec<usize> = Vec::with_capacity(d);
        while pick.len() < d {
            let c = rng.random_range(0..len);
            if !pick.contains(&c) {
                pick.push(c);
            }
        }
        pick.sort_unstable();
        checked += 1;
        if f(&pick) {
            return Ok((false, checked));
        }
    }
    Ok((false, checked))
}

/// Is there a distinct-pattern row with the given signs at `cols`?
/// Bit b of `signs` set asks for -1 at cols[b].
fn sign_row_exists(masks: &ColumnMasks, ones: &Bits, cols: &[usize], signs: u32) -> bool {
    let mut acc = ones.clone();
    let mut next = Bits::new(masks.rows);
    for (b, &c) in cols.iter().enumerate() {
        let neg_wanted = (signs >> b) & 1 == 1;
        acc.and_into(false, &masks.neg[c], !neg_wanted, &mut next);
        std::mem::swap(&mut acc, &mut next);
        if !acc.any() {
            return false;
        }
    }
    true
}

/// Search for d columns of the distinct-pattern matrix realizing all 2^d
/// sign rows. Planar pattern matrices never shatter 4 columns.
pub fn shattering_check(
    masks: &ColumnMasks,
    d: usize,
    mode: ShatterMode,
    budget: u64,
    seed: u64,
) -> Result<ShatterOutcome> {
    assert!((1..=4).contains(&d));
    if masks.rows == 0 || masks.len < d {
        return Ok(ShatterOutcome {
            witness: None,
            exhaustive: true,
            subsets_checked: 0,
        });
    }
    let mut witness = None;
    let ones = Bits::ones(masks.rows);
    let (exhaustive, checked) = for_each_subset(masks.len, d, budget, mode, seed, |cols| {
        if (0..1u32 << d).all(|m| sign_row_exists(masks, &ones, cols, m)) {
            witness = Some(ShatterWitness {
                columns: cols.to_vec(),
            });
            true
        } else {
            false
        }
    })?;
    Ok(ShatterOutcome {
        witness,
        exhaustive,
        subsets_checked: checked,
    })
}

/// Search 4-column subsets for the alternating configuration: one row
/// showing (-1, 1, -1, 1) and another (1, -1, 1, -1).
pub fn forbidden_configuration_check(
    masks: &ColumnMasks,
    mode: ShatterMode,
    budget: u64,
    seed: u64,
) -> Result<ShatterOutcome> {
    if masks.rows == 0 || masks.len < 4 {
        return Ok(ShatterOutcome {
            witness: None,
            exhaustive: true,
            subsets_checked: 0,
        });
    }
    let mut witness = None;
    let ones = Bits::ones(masks.rows);
    let (exhaustive, checked) = for_each_subset(masks.len, 4, budget, mode, seed, |cols| {
        // signs as bit masks: 0b0101 = (-1, +1, -1, +1).
        if sign_row_exists(masks, &ones, cols, 0b0101)
            && sign_row_exists(masks, &ones, cols, 0b1010)
        {
            witness = Some(ShatterWitness {
                columns: cols.to_vec(),
            });
            true
        } else {
            false
        }
    })?;
    Ok(ShatterOutcome {
        witness,
        exhaustive,
        subsets_checked: checked,
    })
}

// ---------------------------------------------------------------------
// Lower-bound family pattern check
// ---------------------------------------------------------------------

/// Check that every interior path vertex of the quadratic lower-bound
/// family carries exactly its closed-form ternary pattern and that those
/// patterns are pairwise distinct. Returns how many vertices were checked.
pub fn shalin_lower_pattern_check(inst: &OSInstance, k: usize) -> Result<usize> {
    let kp = k / 2;
    let field = all_source_bfs(inst);
    let pats = compute_patterns(&field, PatternMode::Ternary)?;
    let mut seen: Vec<Vec<i8>> = Vec::new();
    let mut count = 0;
    for i in 1..=kp {
        for j in 1..i {
            let v = shalin_vertex_id(i, j);
            let got = pats.pattern(v).entries();
            let want = shalin_expected_pattern(k, i, j);
            if got != want {
                return Err(Error::InvariantBreach(format!(
                    "vertex ({i},{j}): pattern {got:?}, expected {want:?}"
                )));
            }
            if seen.contains(&got) {
                return Err(Error::InvariantBreach(format!(
                    "vertex ({i},{j}): pattern repeats an earlier one"
                )));
            }
            seen.push(got);
            count += 1;
        }
    }
    if count != kp * (kp - 1) / 2 {
        return Err(Error::InvariantBreach(format!(
            "expected {} interior vertices, saw {count}",
            kp * (kp - 1) / 2
        )));
    }
    Ok(count)
}

// ---------------------------------------------------------------------
// Size baselines and the growth probe
// ---------------------------------------------------------------------

fn pattern_table_words(inst: &OSInstance, ternary: &PatternSet) -> usize {
    // Distinct patterns among the terminals only.
    let mut rows: Vec<&[u64]> = inst.terminals.iter().map(|&t| ternary.row(t)).collect();
    rows.sort_unstable();
    rows.dedup();
    let words_per_pattern = (2 * (inst.k() - 1)).div_ceil(64);
    rows.len() * words_per_pattern + 2 * inst.terminals.len()
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineReport {
    pub k: usize,
    pub t_count: usize,
    /// Full terminal-by-source distance matrix.
    pub naive_matrix_words: usize,
    /// Two-table scheme: packed distinct terminal patterns plus one
    /// pointer and one base distance per terminal.
    pub pattern_table_words: usize,
    /// This crate's encoding (auto mode), by component.
    pub encoding_words: usize,
    pub encoding_mode: String,
}

pub fn baseline_sizes(inst: &OSInstance, seed: u64) -> Result<BaselineReport> {
    let field = all_source_bfs(inst);
    let ternary = compute_patterns(&field, PatternMode::Ternary)?;
    let enc = build_encoding(inst, ModeRequest::Auto, seed)?;
    Ok(BaselineReport {
        k: inst.k(),
        t_count: inst.terminals.len(),
        naive_matrix_words: inst.k() * inst.terminals.len(),
        pattern_table_words: pattern_table_words(inst, &ternary),
        encoding_words: size_report(&enc).total(),
        encoding_mode: format!("{:?}", enc.mode),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub instance_id: String,
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub x: usize,
    pub t: u64,
    pub max_r: usize,
    pub x_over_k2: f64,
    pub x_over_k3: f64,
}

pub fn probe_instance(
    instance_id: &str,
    family: &str,
    inst: &OSInstance,
    crossings: bool,
    pair_cap: Option<usize>,
    seed: u64,
) -> Result<ProbeRow> {
    let sub = subdivide(inst)?;
    let binary = compute_binary_patterns(&sub)?;
    let d = distinct_patterns(&binary);
    let (t, max_r) = if crossings {
        let cuts = compute_cuts(&sub, &binary)?;
        let bs = extract_all_bisectors(&sub, &cuts)?;
        let survey = survey_pairs(&sub.inst.graph, &cuts, &bs, pair_cap, seed)?;
        (survey.totals.t, survey.totals.max_r)
    } else {
        (0, 0)
    };
    let k = inst.k() as f64;
    Ok(ProbeRow {
        instance_id: instance_id.into(),
        family: family.into(),
        n: inst.graph.n(),
        m: inst.graph.m(),
        k: inst.k(),
        x: d.count,
        t,
        max_r,
        x_over_k2: d.count as f64 / (k * k),
        x_over_k3: d.count as f64 / (k * k * k),
    })
}

/// Least-squares slope of ln(y) against ln(x).
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
