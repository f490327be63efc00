//! Persistent prefix sums over one pattern's entries.
//!
//! A balanced tree over the 2k-1 leaf values (+-1). Toggling a set of
//! positions copies the affected root-to-leaf paths and registers the
//! resulting root as a new version; old versions stay untouched and keep
//! answering queries, which is exactly what the per-terminal version
//! pointers rely on.

use crate::error::{Error, Result};

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Node {
    sum: i32,
    left: u32,
    right: u32,
}

#[derive(Debug, Clone)]
pub struct VersionedPrefixIndex {
    len: usize,
    nodes: Vec<Node>,
    versions: Vec<u32>,
}

impl VersionedPrefixIndex {
    /// Build version 0 from the initial +-1 leaf values.
    pub fn build(leaves: &[i8]) -> Self {
        assert!(!leaves.is_empty());
        let mut idx = VersionedPrefixIndex {
            len: leaves.len(),
            nodes: Vec::with_capacity(2 * leaves.len()),
            versions: Vec::new(),
        };
        let root = idx.build_rec(leaves, 0, leaves.len());
        idx.versions.push(root);
        idx
    }

    fn build_rec(&mut self, leaves: &[i8], lo: usize, hi: usize) -> u32 {
        if hi - lo == 1 {
            return self.alloc(Node {
                sum: leaves[lo] as i32,
                left: NIL,
                right: NIL,
            });
        }
        let mid = (lo + hi) / 2;
        let l = self.build_rec(leaves, lo, mid);
        let r = self.build_rec(leaves, mid, hi);
        let sum = self.nodes[l as usize].sum + self.nodes[r as usize].sum;
        self.alloc(Node { sum, left: l, right: r })
    }

    fn alloc(&mut self, n: Node) -> u32 {
        self.nodes.push(n);
        (self.nodes.len() - 1) as u32
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn version_count(&self) -> usize {
        self.versions.len()
    }

    /// Negate the leaves at `positions`, starting from `version`. All
    /// flips together produce a single new version whose id is returned.
    pub fn toggle_step(&mut self, version: usize, positions: &[usize]) -> usize {
        assert!(version < self.versions.len());
        let mut root = self.versions[version];
        for &p in positions {
            assert!(p < self.len);
            root = self.toggle_rec(root, 0, self.len, p);
        }
        self.versions.push(root);
        self.versions.len() - 1
    }

    fn toggle_rec(&mut self, node: u32, lo: usize, hi: usize, p: usize) -> u32 {
        let n = self.nodes[node as usize];
        if hi - lo == 1 {
            return self.alloc(Node {
                sum: -n.sum,
                left: NIL,
                right: NIL,
            });
        }
        let mid = (lo + hi) / 2;
        let (l, r) = if p < mid {
            (self.toggle_rec(n.left, lo, mid, p), n.right)
        } else {
            (n.left, self.toggle_rec(n.right, mid, hi, p))
        };
        let sum = self.nodes[l as usize].sum + self.nodes[r as usize].sum;
        self.alloc(Node { sum, left: l, right: r })
    }

    /// Sum of the first `count` leaves of the given version.
    pub fn prefix_sum(&self, version: usize, count: usize) -> Result<i32> {
        if version >= self.versions.len() {
            return Err(Error::IndexOutOfRange {
                index: version,
                max: self.versions.len().saturating_sub(1),
            });
        }
        if count > self.len {
            return Err(Error::IndexOutOfRange {
                index: count,
                max: self.len,
            });
        }
        Ok(self.prefix_rec(self.versions[version], 0, self.len, count))
    }

    fn prefix_rec(&self, node: u32, lo: usize, hi: usize, count: usize) -> i32 {
        if count == 0 {
            return 0;
        }
        let n = self.nodes[node as usize];
        if count >= hi - lo {
            return n.sum;
        }
        let mid = (lo + hi) / 2;
        let left_len = mid - lo;
        if count <= left_len {
            self.prefix_rec(n.left, lo, mid, count)
        } else {
            self.nodes[n.left as usize].sum + self.prefix_rec(n.right, mid, hi, count - left_len)
        }
    }

    /// Leaf value at `pos` in the given version (test and debug helper).
    pub fn leaf(&self, version: usize, pos: usize) -> Result<i32> {
        Ok(self.prefix_sum(version, pos + 1)? - self.prefix_sum(version, pos)?)
    }

    pub(crate) fn from_parts(len: usize, raw_nodes: &[(i32, u32, u32)], versions: Vec<u32>) -> Result<Self> {
        let n = raw_nodes.len() as u32;
        let mut nodes = Vec::with_capacity(raw_nodes.len());
        for (i, &(sum, left, right)) in raw_nodes.iter().enumerate() {
            if (left == NIL) != (right == NIL) {
                return Err(Error::CorruptEncoding("half-leaf index node".into()));
            }
            if left != NIL && (left >= n || right >= n) {
                return Err(Error::CorruptEncoding("index node child out of range".into()));
            }
            // Children are always allocated before their parent, which
            // also rules out pointer cycles.
            if left != NIL && (left as usize >= i || right as usize >= i) {
                return Err(Error::CorruptEncoding("index node child after parent".into()));
            }
            nodes.push(Node { sum, left, right });
        }
        if versions.iter().any(|&v| v >= n) {
            return Err(Error::CorruptEncoding("version root out of range".into()));
        }
        if len == 0 || versions.is_empty() {
            return Err(Error::CorruptEncoding("empty index".into()));
        }
        let idx = VersionedPrefixIndex {
            len,
            nodes,
            versions,
        };
        idx.validate_shape()?;
        Ok(idx)
    }

    /// Each shared subtree covers the same leaf range in every version,
    /// so one pass with a memoized span per node confirms that every
    /// descent the query path can take ends at a real leaf.
    fn validate_shape(&self) -> Result<()> {
        let mut span_of = vec![0u32; self.nodes.len()];
        let mut stack: Vec<u32> = Vec::new();
        let claim = |span_of: &mut Vec<u32>, stack: &mut Vec<u32>, node: u32, span: u32| {
            let slot = &mut span_of[node as usize];
            if *slot == 0 {
                *slot = span;
                stack.push(node);
                Ok(())
            } else if *slot != span {
                Err(Error::CorruptEncoding("index node spans disagree".into()))
            } else {
                Ok(())
            }
        };
        for &root in &self.versions {
            claim(&mut span_of, &mut stack, root, self.len as u32)?;
            while let Some(i) = stack.pop() {
                let span = span_of[i as usize];
                let node = self.nodes[i as usize];
                if node.left == NIL {
                    if span != 1 {
                        return Err(Error::CorruptEncoding("leaf node with a wide span".into()));
                    }
                    continue;
                }
                if span < 2 {
                    return Err(Error::CorruptEncoding("internal node with a unit span".into()));
                }
                let left_span = span / 2;
                claim(&mut span_of, &mut stack, node.left, left_span)?;
                claim(&mut span_of, &mut stack, node.right, span - left_span)?;
            }
        }
        Ok(())
    }

    pub(crate) fn raw_nodes(&self) -> impl Iterator<Item = (i32, u32, u32)> + '_ {
        self.nodes.iter().map(|n| (n.sum, n.left, n.right))
    }

    pub(crate) fn raw_versions(&self) -> &[u32] {
        &self.versions
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn naive_prefix(vals: &[i8], count: usize) -> i32 {
        vals[..count].iter().map(|&v| v as i32).sum()
    }

    #[test]
    fn prefix_sums_match_naive_across_versions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for len in [1usize, 2, 7, 33, 101] {
            let mut vals: Vec<i8> = (0..len).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
            let mut idx = VersionedPrefixIndex::build(&vals);
            let mut history = vec![vals.clone()];
            for _ in 0..15 {
                let flips: Vec<usize> = (0..rng.random_range(1..=2.min(len)))
                    .map(|_| rng.random_range(0..len))
                    .collect();
                for &f in &flips {
                    vals[f] = -vals[f];
                }
                let v = idx.toggle_step(idx.version_count() - 1, &flips);
                assert_eq!(v, history.len());
                history.push(vals.clone());
            }
            for (v, vals) in history.iter().enumerate() {
                for c in 0..=len {
                    assert_eq!(idx.prefix_sum(v, c).unwrap(), naive_prefix(vals, c));
                }
            }
        }
    }

    #[test]
    fn old_versions_are_unaffected_by_updates() {
        let vals = vec![1i8, -1, 1, 1, -1, 1, -1];
        let mut idx = VersionedPrefixIndex::build(&vals);
        let before: Vec<i32> = (0..=7).map(|c| idx.prefix_sum(0, c).unwrap()).collect();
        let mut v = 0;
        for p in 0..7 {
            v = idx.toggle_step(v, &[p]);
        }
        let after: Vec<i32> = (0..=7).map(|c| idx.prefix_sum(0, c).unwrap()).collect();
        assert_eq!(before, after);
        // The fully-toggled version is the negation.
        for c in 0..=7 {
            assert_eq!(idx.prefix_sum(v, c).unwrap(), -before[c]);
        }
    }

    #[test]
    fn one_step_many_flips_is_one_version() {
        let vals = vec![1i8; 16];
        let mut idx = VersionedPrefixIndex::build(&vals);
        idx.toggle_step(0, &[0, 5, 9, 15]);
        assert_eq!(idx.version_count(), 2);
        assert_eq!(idx.prefix_sum(1, 16).unwrap(), 16 - 8);
    }
}
