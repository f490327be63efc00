//! Stress: single-face encodings on the largest inner faces of
//! deletion-heavy instances.

use osmc_core::encoding::{build_encoding, ModeRequest};
use osmc_core::generate::{gen_random_planar, TerminalPolicy};
use osmc_core::verify::DistanceOracle;

#[test]
fn large_inner_faces_stay_within_the_change_budget() {
    let mut checked = 0;
    for seed in 0..12u64 {
        let inst = gen_random_planar(seed, 12, 12, 0.55, TerminalPolicy::All);
        let g = &inst.graph;
        // Largest face besides the outer one, by distinct base vertices.
        let mut best: Option<(usize, Vec<u32>)> = None;
        for f in 0..g.face_count() as u32 {
            if f == g.f_inf() {
                continue;
            }
            let mut verts = g.face_vertices(f);
            verts.sort_unstable();
            verts.dedup();
            if best.as_ref().map_or(true, |(n, _)| verts.len() > *n) {
                best = Some((verts.len(), verts));
            }
        }
        let (sz, verts) = best.unwrap();
        if sz < 6 {
            continue;
        }
        let mut inst = inst;
        inst.terminals = verts;
        let enc = build_encoding(&inst, ModeRequest::SingleFaceT, seed).unwrap();
        assert!(
            enc.stats.pattern_changes <= 2 * inst.k(),
            "seed {seed}: face of {sz} vertices sees {} changes > 2k = {}",
            enc.stats.pattern_changes,
            2 * inst.k()
        );
        let mut oracle = DistanceOracle::new(&inst);
        for &v in inst.terminals.iter().step_by(2) {
            for i in (1..=inst.k()).step_by(5) {
                assert_eq!(enc.query(v, i).unwrap(), oracle.distance(v, i));
            }
        }
        checked += 1;
        println!(
            "seed {seed}: inner face with {sz} vertices, {} changes vs 2k = {}",
            enc.stats.pattern_changes,
            2 * inst.k()
        );
    }
    assert!(checked >= 6, "only {checked} large faces found");
}
