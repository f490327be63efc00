//! Cuts induced by binary pattern positions.
//!
//! For pattern position i (1-based), A_i is the set of subdivided vertices
//! whose i-th binary entry is -1, i.e. the vertices closer to `S'[i+1]` than
//! to `S'[i]`. Both A_i and its complement induce connected subgraphs; a
//! disconnected side means the input embedding is invalid or a computation
//! upstream is wrong, and is reported as an error rather than accepted.

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::instance::SubdividedInstance;
use crate::pattern::{PatternMode, PatternSet};
use crate::planar::Vertex;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct Cut {
    /// 1-based pattern position.
    pub index: usize,
    /// Membership of A_index over subdivided vertices.
    pub in_a: Bits,
}

impl Cut {
    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        self.in_a.get(v as usize)
    }
}

/// One cut per pattern position 1..=2k-1, with both sides checked for
/// connectivity.
pub fn compute_cuts(sub: &SubdividedInstance, patterns: &PatternSet) -> Result<Vec<Cut>> {
    if patterns.mode() != PatternMode::Binary {
        return Err(Error::ModeMismatch("cuts are defined on binary patterns".into()));
    }
    if patterns.vertex_count() != sub.inst.graph.n() {
        return Err(Error::ModeMismatch(
            "pattern set does not cover the subdivided vertex set".into(),
        ));
    }
    let l = sub.pattern_len();
    (1..=l)
        .into_par_iter()
        .map(|i| build_cut(sub, patterns, i))
        .collect()
}

pub fn build_cut(sub: &SubdividedInstance, patterns: &PatternSet, index: usize) -> Result<Cut> {
    let g = &sub.inst.graph;
    let n = g.n();
    let mut in_a = Bits::new(n);
    for v in 0..n {
        if patterns.entry(v as Vertex, index - 1) == -1 {
            in_a.set(v, true);
        }
    }

    let s_lo = sub.inst.sources[index - 1];
    let s_hi = sub.inst.sources[index];
    if !in_a.get(s_hi as usize) || in_a.get(s_lo as usize) {
        return Err(Error::InvariantBreach(format!(
            "cut {index}: defining face edge endpoints fall on the wrong sides"
        )));
    }

    let cut = Cut { index, in_a };
    check_side_connected(sub, &cut, true)?;
    check_side_connected(sub, &cut, false)?;
    Ok(cut)
}

fn check_side_connected(sub: &SubdividedInstance, cut: &Cut, inside: bool) -> Result<()> {
    let g = &sub.inst.graph;
    let n = g.n();
    let side = |v: Vertex| cut.contains(v) == inside;
    let start = match (0..n as Vertex).find(|&v| side(v)) {
        Some(v) => v,
        None => {
            return Err(Error::InvariantBreach(format!(
                "cut {}: one side is empty",
                cut.index
            )))
        }
    };
    let mut seen = Bits::new(n);
    let mut stack = vec![start];
    seen.set(start as usize, true);
    let mut count = 1usize;
    while let Some(u) = stack.pop() {
        for &v in g.neighbors(u) {
            if side(v) && !seen.get(v as usize) {
                seen.set(v as usize, true);
                count += 1;
                stack.push(v);
            }
        }
    }
    let total = if inside {
        cut.in_a.count_ones()
    } else {
        n - cut.in_a.count_ones()
    };
    if count != total {
        let missing = (0..n as Vertex)
            .find(|&v| side(v) && !seen.get(v as usize))
            .unwrap();
        return Err(Error::DisconnectedCutSide {
            index: cut.index,
            side: if inside { "A" } else { "complement" },
            vertex: missing,
        });
    }
    Ok(())
}
