//! Distance patterns: per-vertex difference vectors over the source face.
//!
//! The ternary pattern of v has k-1 entries d(v, s_{i+1}) - d(v, s_i), each
//! in {-1, 0, 1}. On the subdivided graph all consecutive differences are
//! +-1, giving binary patterns of length 2k-1 over S'. Both modes are kept
//! explicit; nothing silently re-lengths one into the other. Patterns are
//! stored bit-packed (1 bit per binary entry, 2 bits per ternary entry) so
//! size accounting stays honest.

use crate::distance::{bfs_distances, DistanceField};
use crate::error::{Error, Result};
use crate::instance::SubdividedInstance;
use crate::planar::Vertex;
use rayon::prelude::*;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternMode {
    Ternary,
    Binary,
}

/// A single pattern vector, bit-packed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    mode: PatternMode,
    len: usize,
    words: Vec<u64>,
}

fn words_per_row(mode: PatternMode, len: usize) -> usize {
    match mode {
        PatternMode::Binary => len.div_ceil(64),
        PatternMode::Ternary => (2 * len).div_ceil(64),
    }
}

#[inline]
fn pack_ternary(v: i8) -> u64 {
    // 0 = -1, 1 = 0, 2 = +1
    (v + 1) as u64
}

impl Pattern {
    pub fn from_entries(mode: PatternMode, entries: &[i8]) -> Result<Pattern> {
        let mut words = vec![0u64; words_per_row(mode, entries.len())];
        for (j, &e) in entries.iter().enumerate() {
            match mode {
                PatternMode::Binary => {
                    if e != 1 && e != -1 {
                        return Err(Error::ModeMismatch(format!(
                            "binary entry {j} is {e}, expected -1 or +1"
                        )));
                    }
                    if e == 1 {
                        words[j >> 6] |= 1 << (j & 63);
                    }
                }
                PatternMode::Ternary => {
                    if !(-1..=1).contains(&e) {
                        return Err(Error::ModeMismatch(format!(
                            "ternary entry {j} is {e}, expected -1, 0 or +1"
                        )));
                    }
                    let b = 2 * j;
                    words[b >> 6] |= pack_ternary(e) << (b & 63);
                }
            }
        }
        Ok(Pattern {
            mode,
            len: entries.len(),
            words,
        })
    }

    pub fn mode(&self) -> PatternMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// 0-based entry access.
    #[inline]
    pub fn entry(&self, j: usize) -> i8 {
        debug_assert!(j < self.len);
        match self.mode {
            PatternMode::Binary => {
                if self.words[j >> 6] >> (j & 63) & 1 == 1 {
                    1
                } else {
                    -1
                }
            }
            PatternMode::Ternary => {
                let b = 2 * j;
                (self.words[b >> 6] >> (b & 63) & 3) as i8 - 1
            }
        }
    }

    pub fn entries(&self) -> Vec<i8> {
        (0..self.len).map(|j| self.entry(j)).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Ternary entry i is the half-sum of binary entries 2i-1 and 2i
/// (1-based), so a binary pattern of length 2k-1 folds to a ternary one of
/// length k-1.
pub fn binary_to_ternary(p: &Pattern) -> Result<Pattern> {
    if p.mode() != PatternMode::Binary {
        return Err(Error::ModeMismatch("binary_to_ternary needs a binary pattern".into()));
    }
    if p.len() % 2 != 1 {
        return Err(Error::ModeMismatch(format!(
            "binary pattern length {} is not of the form 2k-1",
            p.len()
        )));
    }
    let k1 = p.len() / 2; // k - 1
    let entries: Vec<i8> = (0..k1)
        .map(|i| (p.entry(2 * i) + p.entry(2 * i + 1)) / 2)
        .collect();
    Pattern::from_entries(PatternMode::Ternary, &entries)
}

/// d(v, s_i) recovered from d(v, s_1) and the pattern: the prefix sum of
/// the first i-1 ternary entries, or half the prefix sum of the first
/// 2(i-1) binary entries.
pub fn reconstruct_distance(base: u32, p: &Pattern, i: usize) -> Result<u32> {
    let k = match p.mode() {
        PatternMode::Ternary => p.len() + 1,
        PatternMode::Binary => p.len().div_ceil(2),
    };
    if i < 1 || i > k {
        return Err(Error::IndexOutOfRange { index: i, max: k });
    }
    let sum: i64 = match p.mode() {
        PatternMode::Ternary => (0..i - 1).map(|j| p.entry(j) as i64).sum(),
        PatternMode::Binary => {
            let s: i64 = (0..2 * (i - 1)).map(|j| p.entry(j) as i64).sum();
            debug_assert_eq!(s % 2, 0);
            s / 2
        }
    };
    let d = base as i64 + sum;
    if d < 0 {
        return Err(Error::InvariantBreach(format!(
            "reconstructed distance {d} is negative"
        )));
    }
    Ok(d as u32)
}

/// Patterns of all vertices, one bit-packed row per vertex.
#[derive(Debug, Clone)]
pub struct PatternSet {
    mode: PatternMode,
    len: usize,
    n: usize,
    wpr: usize,
    bits: Vec<u64>,
}

impl PatternSet {
    fn zeroed(mode: PatternMode, len: usize, n: usize) -> PatternSet {
        let wpr = words_per_row(mode, len);
        PatternSet {
            mode,
            len,
            n,
            wpr,
            bits: vec![0u64; wpr * n],
        }
    }

    /// Build a set from `n` rows of `len` entries laid out flat.
    pub fn from_rows(mode: PatternMode, len: usize, n: usize, entries: &[i8]) -> Result<PatternSet> {
        if entries.len() != n * len {
            return Err(Error::ModeMismatch(format!(
                "expected {} entries, got {}",
                n * len,
                entries.len()
            )));
        }
        let mut set = PatternSet::zeroed(mode, len, n);
        for v in 0..n {
            let row = &entries[v * len..(v + 1) * len];
            let p = Pattern::from_entries(mode, row)?;
            let a = v * set.wpr;
            set.bits[a..a + set.wpr].copy_from_slice(&p.words);
        }
        Ok(set)
    }

    pub fn mode(&self) -> PatternMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, v: Vertex) -> &[u64] {
        let a = v as usize * self.wpr;
        &self.bits[a..a + self.wpr]
    }

    #[inline]
    pub fn entry(&self, v: Vertex, j: usize) -> i8 {
        debug_assert!(j < self.len);
        let row = self.row(v);
        match self.mode {
            PatternMode::Binary => {
                if row[j >> 6] >> (j & 63) & 1 == 1 {
                    1
                } else {
                    -1
                }
            }
            PatternMode::Ternary => {
                let b = 2 * j;
                (row[b >> 6] >> (b & 63) & 3) as i8 - 1
            }
        }
    }

    pub fn pattern(&self, v: Vertex) -> Pattern {
        Pattern {
            mode: self.mode,
            len: self.len,
            words: self.row(v).to_vec(),
        }
    }

    pub fn rows_equal(&self, u: Vertex, v: Vertex) -> bool {
        self.row(u) == self.row(v)
    }

    /// Number of entry positions where the two rows differ.
    pub fn hamming(&self, u: Vertex, v: Vertex) -> u32 {
        let (a, b) = (self.row(u), self.row(v));
        match self.mode {
            PatternMode::Binary => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x ^ y).count_ones())
                .sum(),
            PatternMode::Ternary => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let d = x ^ y;
                    ((d | d >> 1) & 0x5555_5555_5555_5555).count_ones()
                })
                .sum(),
        }
    }

    /// Entry positions where the two rows differ, in increasing order.
    pub fn diff_positions(&self, u: Vertex, v: Vertex) -> Vec<u16> {
        let (a, b) = (self.row(u), self.row(v));
        let mut out = Vec::new();
        match self.mode {
            PatternMode::Binary => {
                for (w, (&x, &y)) in a.iter().zip(b).enumerate() {
                    let mut d = x ^ y;
                    while d != 0 {
                        let bit = d.trailing_zeros() as usize;
                        let pos = w * 64 + bit;
                        if pos < self.len {
                            out.push(pos as u16);
                        }
                        d &= d - 1;
                    }
                }
            }
            PatternMode::Ternary => {
                for j in 0..self.len {
                    if self.entry(u, j) != self.entry(v, j) {
                        out.push(j as u16);
                    }
                }
            }
        }
        out
    }

    fn set_binary_bit(&mut self, v: usize, j: usize) {
        self.bits[v * self.wpr + (j >> 6)] |= 1 << (j & 63);
    }

    fn row_hash(&self, v: Vertex) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.row(v).hash(&mut h);
        h.finish()
    }
}

/// Extract per-vertex patterns from a distance field.
///
/// Binary mode demands a field computed on a subdivided instance, where
/// every consecutive difference is +-1.
pub fn compute_patterns(field: &DistanceField, mode: PatternMode) -> Result<PatternSet> {
    if mode == PatternMode::Binary && !field.subdivided {
        return Err(Error::ModeMismatch(
            "binary patterns require a subdivided distance field".into(),
        ));
    }
    let s = field.source_count();
    if s < 2 {
        return Err(Error::ModeMismatch("need at least 2 sources".into()));
    }
    let len = s - 1;
    let n = field.dist[0].len();
    let mut set = PatternSet::zeroed(mode, len, n);
    for j in 0..len {
        let (a, b) = (&field.dist[j], &field.dist[j + 1]);
        for v in 0..n {
            let d = b[v] as i64 - a[v] as i64;
            match mode {
                PatternMode::Binary => {
                    if d == 1 {
                        set.set_binary_bit(v, j);
                    } else if d != -1 {
                        return Err(Error::ModeMismatch(format!(
                            "difference {d} at vertex {v}, position {j}; binary entries must be +-1"
                        )));
                    }
                }
                PatternMode::Ternary => {
                    if !(-1..=1).contains(&d) {
                        return Err(Error::InvariantBreach(format!(
                            "difference {d} at vertex {v}, position {j} violates the triangle inequality"
                        )));
                    }
                    let b2 = 2 * j;
                    set.bits[v * set.wpr + (b2 >> 6)] |= pack_ternary(d as i8) << (b2 & 63);
                }
            }
        }
    }
    Ok(set)
}

/// Binary patterns of every subdivided vertex, computed source by source
/// without materializing the full distance field. Chunks of consecutive
/// pattern positions are farmed out to worker threads; each worker runs
/// the BFS sweeps for its own source range.
pub fn compute_binary_patterns(sub: &SubdividedInstance) -> Result<PatternSet> {
    let g = &sub.inst.graph;
    let n = g.n();
    let l = sub.pattern_len();
    let sources = &sub.inst.sources;
    let col_words = n.div_ceil(64);

    let chunk_cols = 8usize;
    let n_chunks = l.div_ceil(chunk_cols);
    let columns: Vec<Vec<u64>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let c0 = ci * chunk_cols;
            let c1 = (c0 + chunk_cols).min(l);
            let mut out = vec![0u64; (c1 - c0) * col_words];
            let mut prev = bfs_distances(g, sources[c0]);
            for c in c0..c1 {
                let cur = bfs_distances(g, sources[c + 1]);
                let words = &mut out[(c - c0) * col_words..(c - c0 + 1) * col_words];
                for v in 0..n {
                    let d = cur[v] as i64 - prev[v] as i64;
                    debug_assert!(d == 1 || d == -1);
                    if d == 1 {
                        words[v >> 6] |= 1 << (v & 63);
                    }
                }
                prev = cur;
            }
            out
        })
        .collect();

    let mut set = PatternSet::zeroed(PatternMode::Binary, l, n);
    let wpr = set.wpr;
    set.bits
        .par_chunks_mut(wpr)
        .enumerate()
        .for_each(|(v, row)| {
            for c in 0..l {
                let chunk = &columns[c / chunk_cols];
                let words = &chunk[(c % chunk_cols) * col_words..(c % chunk_cols + 1) * col_words];
                if words[v >> 6] >> (v & 63) & 1 == 1 {
                    row[c >> 6] |= 1 << (c & 63);
                }
            }
        });
    Ok(set)
}

/// Deduplication of a pattern set by exact comparison (hash then verify).
#[derive(Debug, Clone)]
pub struct DistinctPatterns {
    /// Number of distinct patterns.
    pub count: usize,
    /// Class index per vertex; classes numbered by first occurrence.
    pub class_of: Vec<u32>,
    /// First vertex carrying each class.
    pub representative: Vec<Vertex>,
    pub max_class_size: usize,
}

pub fn distinct_patterns(set: &PatternSet) -> DistinctPatterns {
    let mut by_hash: HashMap<u64, Vec<u32>> = HashMap::new();
    let mut class_of = vec![0u32; set.vertex_count()];
    let mut representative: Vec<Vertex> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for v in 0..set.vertex_count() as Vertex {
        let h = set.row_hash(v);
        let classes = by_hash.entry(h).or_default();
        let mut found = None;
        for &c in classes.iter() {
            if set.rows_equal(representative[c as usize], v) {
                found = Some(c);
                break;
            }
        }
        let c = match found {
            Some(c) => c,
            None => {
                let c = representative.len() as u32;
                representative.push(v);
                sizes.push(0);
                classes.push(c);
                c
            }
        };
        class_of[v as usize] = c;
        sizes[c as usize] += 1;
    }
    DistinctPatterns {
        count: representative.len(),
        max_class_size: sizes.iter().copied().max().unwrap_or(0),
        class_of,
        representative,
    }
}

/// Column masks over the distinct rows of a pattern set: `neg[j]` has a
/// bit per distinct pattern set iff that pattern is -1 at position j.
/// Shared by the shattering and forbidden-configuration checks.
pub struct ColumnMasks {
    pub len: usize,
    pub rows: usize,
    pub neg: Vec<crate::bits::Bits>,
}

pub fn column_masks(set: &PatternSet, distinct: &DistinctPatterns) -> ColumnMasks {
    let rows = distinct.count;
    let mut neg = Vec::with_capacity(set.len());
    for j in 0..set.len() {
        let mut b = crate::bits::Bits::new(rows);
        for (c, &rep) in distinct.representative.iter().enumerate() {
            if set.entry(rep, j) == -1 {
                b.set(c, true);
            }
        }
        neg.push(b);
    }
    ColumnMasks {
        len: set.len(),
        rows,
        neg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{all_source_bfs, all_source_bfs_subdivided};
    use crate::generate::{gen_cycle, gen_grid, TerminalPolicy};
    use crate::instance::subdivide;

    #[test]
    fn c4_first_source_pattern() {
        let inst = gen_cycle(4);
        let f = all_source_bfs(&inst);
        let set = compute_patterns(&f, PatternMode::Ternary).unwrap();
        assert_eq!(set.pattern(inst.sources[0]).entries(), vec![1, 1, -1]);
    }

    #[test]
    fn binary_to_ternary_folds_pairs() {
        let hat = Pattern::from_entries(
            PatternMode::Binary,
            &[1, -1, 1, 1, -1, -1, 1, -1, 1, 1, 1, 1, -1, -1, -1],
        )
        .unwrap();
        let p = binary_to_ternary(&hat).unwrap();
        assert_eq!(p.entries(), vec![0, 1, -1, 0, 1, 1, -1]);
    }

    #[test]
    fn source_vertex_pattern_on_cycle_flips_once() {
        // From s_1 on a cycle the consecutive differences are +1 out to the
        // antipode and -1 afterwards.
        for k in [4usize, 6, 8] {
            let inst = gen_cycle(k);
            let f = all_source_bfs(&inst);
            let set = compute_patterns(&f, PatternMode::Ternary).unwrap();
            let p = set.pattern(inst.sources[0]);
            let entries = p.entries();
            let flip = entries.iter().position(|&e| e != 1).unwrap();
            assert!(entries[..flip].iter().all(|&e| e == 1));
            assert!(entries[flip..].iter().all(|&e| e == -1 || e == 0));
        }
    }

    #[test]
    fn reconstruct_examples() {
        let p = Pattern::from_entries(PatternMode::Ternary, &[1, -1, 0]).unwrap();
        assert_eq!(reconstruct_distance(5, &p, 3).unwrap(), 5);
        assert_eq!(reconstruct_distance(5, &p, 1).unwrap(), 5);
        assert!(matches!(
            reconstruct_distance(5, &p, 9),
            Err(crate::error::Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn reconstruct_matches_bfs_everywhere() {
        for (w, h) in [(3, 3), (5, 4)] {
            let inst = gen_grid(w, h, TerminalPolicy::All, 0);
            let f = all_source_bfs(&inst);
            let set = compute_patterns(&f, PatternMode::Ternary).unwrap();
            let k = inst.k();
            for v in 0..inst.graph.n() as Vertex {
                let p = set.pattern(v);
                let base = f.dist[0][v as usize];
                for i in 1..=k {
                    assert_eq!(
                        reconstruct_distance(base, &p, i).unwrap(),
                        f.dist[i - 1][v as usize]
                    );
                }
            }
        }
    }

    #[test]
    fn binary_reconstruct_matches_bfs() {
        // The base is the distance in the *original* graph, i.e. half the
        // subdivided one, so only original vertices are queryable.
        let inst = gen_grid(3, 3, TerminalPolicy::All, 0);
        let sub = subdivide(&inst).unwrap();
        let f = all_source_bfs_subdivided(&sub);
        let set = compute_patterns(&f, PatternMode::Binary).unwrap();
        let k = inst.k();
        for v in 0..inst.graph.n() as Vertex {
            let p = set.pattern(v);
            let base = f.dist[0][v as usize] / 2;
            for i in 1..=k {
                assert_eq!(
                    reconstruct_distance(base, &p, i).unwrap(),
                    f.dist[2 * (i - 1)][v as usize] / 2
                );
            }
        }
    }

    #[test]
    fn binary_mode_requires_subdivided_field() {
        let inst = gen_grid(3, 3, TerminalPolicy::All, 0);
        let f = all_source_bfs(&inst);
        assert!(matches!(
            compute_patterns(&f, PatternMode::Binary),
            Err(crate::error::Error::ModeMismatch(_))
        ));
    }

    #[test]
    fn streaming_binary_patterns_match_field_path() {
        let inst = gen_grid(4, 5, TerminalPolicy::All, 0);
        let sub = subdivide(&inst).unwrap();
        let a = compute_binary_patterns(&sub).unwrap();
        let f = all_source_bfs_subdivided(&sub);
        let b = compute_patterns(&f, PatternMode::Binary).unwrap();
        for v in 0..sub.inst.graph.n() as Vertex {
            assert_eq!(a.row(v), b.row(v));
        }
    }

    #[test]
    fn subdivided_c4_has_eight_distinct_patterns() {
        let inst = gen_cycle(4);
        let sub = subdivide(&inst).unwrap();
        let set = compute_binary_patterns(&sub).unwrap();
        let d = distinct_patterns(&set);
        assert_eq!(d.count, 8);
        assert_eq!(d.max_class_size, 1);
    }

    #[test]
    fn distinct_classes_are_consistent() {
        let inst = gen_grid(5, 5, TerminalPolicy::All, 1);
        let sub = subdivide(&inst).unwrap();
        let set = compute_binary_patterns(&sub).unwrap();
        let d = distinct_patterns(&set);
        for v in 0..set.vertex_count() as Vertex {
            let c = d.class_of[v as usize];
            assert!(set.rows_equal(v, d.representative[c as usize]));
        }
        let total: usize = {
            let mut sizes = vec![0usize; d.count];
            for &c in &d.class_of {
                sizes[c as usize] += 1;
            }
            assert_eq!(sizes.iter().copied().max().unwrap(), d.max_class_size);
            sizes.iter().sum()
        };
        assert_eq!(total, set.vertex_count());
    }
}
