//! The generated corpus: determinism, parallel and sequential agreement,
//! and the size and variable bounds of samples.

mod common;

use cdgl_core::corpus::{evaluate_seeds, evaluate_seeds_sequential, sample, Summary, MAX_GAME_DEPTH};
use cdgl_core::par::{init_pool, with_stack};
use cdgl_core::syntax::Formula;

use common::game_depth;

#[test]
fn samples_are_deterministic() {
    for seed in [0u64, 1, 17, 999] {
        let (a, b) = (sample(seed), sample(seed));
        assert_eq!(a.goal, b.goal);
        assert_eq!(a.proof, b.proof);
    }
}

#[test]
fn parallel_and_sequential_runs_agree() {
    let (par, seq) = with_stack(|| {
        init_pool();
        (evaluate_seeds(0..60), evaluate_seeds_sequential(0..60))
    });
    assert_eq!(par, seq);
    let s = Summary::of(&par);
    assert_eq!(s.generated, 60);
    assert!(s.accepted >= 45, "{s:?}");
    assert_eq!(s.compiled, s.system_test);
    assert_eq!(s.is_system, s.compiled);
    assert_eq!(s.transfer, s.compiled);
    assert_eq!(s.refinement + s.refinement_unsupported, s.compiled);
}

#[test]
fn samples_respect_the_size_bounds() {
    for seed in 0..300u64 {
        let s = sample(seed);
        let Formula::Box(g, _) = &s.goal else { continue };
        assert!(game_depth(g) <= MAX_GAME_DEPTH + 1, "seed {seed}: depth {}", game_depth(g));
        let names: std::collections::BTreeSet<String> = s.goal.all_vars().into_iter().map(|v| v.name).collect();
        assert!(names.len() <= 3, "seed {seed}: {names:?}");
    }
}
