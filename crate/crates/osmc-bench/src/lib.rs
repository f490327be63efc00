//! Benchmark-only crate; see `benches/compression.rs`.
//!
//! Shared helpers for the benchmarks live here so the bench target stays
//! small.

use osmc_core::generate::{gen_grid, TerminalPolicy};
use osmc_core::instance::OSInstance;

pub fn bench_grid(side: usize) -> OSInstance {
    gen_grid(side, side, TerminalPolicy::All, 0)
}
