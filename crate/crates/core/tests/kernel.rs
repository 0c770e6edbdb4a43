//! Hand-written proofs that must be accepted or rejected, and stability of
//! verdicts over generated proofs.

use proptest::prelude::*;

use cdgl_core::corpus::sample;
use cdgl_core::kernel::{check_proof, CheckReport, KernelError, Verdict};
use cdgl_core::par::with_stack;
use cdgl_core::surface::{parse_file, parse_proof, print_proof, SourceFile};

const CASES: &str = r"
proof inc : h: x >= 0 |- [x:=x+1] x > 0 := asgn(y, x, e => qe(x > 0))
proof incTooStrong : h: x >= 0 |- [x:=x+1] x > 1 := asgn(y, x, e => qe(x > 1))
proof both : |- [x:=1 ++ x:=2] x >= 1 := (asgn(y, x, e => qe(x >= 1)), asgn(y, x, e => qe(x >= 1)))
proof pickRight : |- <x:=1 ++ x:=2> x = 2 := injR(asgn(y, x, e => qe(x = 2)))
proof pickLeft : |- <x:=1 ++ x:=2> x = 2 := injL(asgn(y, x, e => qe(x = 2)))
proof demonPicks : |- [{x:=1 ++ x:=2}^d] x = 1 := dual(injL(asgn(y, x, e => qe(x = 1))))
proof loop : h: x >= 0 |- [{x:=x+1}*] x >= 0 := rep(qe(x >= 0), p: x >= 0 => asgn(y, x, e => qe(x >= 0)), q => q)
proof notInductive : h: x >= 0 |- [{x:=x-1}*] x >= 0 := rep(qe(x >= 0), p: x >= 0 => asgn(y, x, e => qe(x >= 0)), q => q)
proof flow : h: x >= 0 |- [{x'=1}] x >= 0 := di(qe(x >= 0), lamR(v => lamP(t: tt => asgn(w, x', e => qe(x' >= 0)))))
proof flowDown : h: x >= 0 |- [{x'=-1}] x >= 0 := di(qe(x >= 0), lamR(v => lamP(t: tt => asgn(w, x', e => qe(x' >= 0)))))
proof wall : h: x <= 1 |- [{x'=1 & x <= 1}] x <= 1 := dw(lamR(v => asgn(w, x', e => lamP(t: x <= 1 => qe(x <= 1)))))
proof modalQe : |- [x:=1] x = 1 := qe([x:=1] x = 1)
proof wrongTarget : |- [x:=1] x = 1 := asgn(y, x, e => qe(x = 2))
proof unbound : |- x = x := missing
proof nonlinear : |- x * x >= 0 := qe(x * x >= 0)
";

fn cases() -> SourceFile {
    parse_file(CASES).expect("cases parse")
}

fn report(name: &str) -> CheckReport {
    let file = cases();
    let (seq, p) = file.proof(name).unwrap_or_else(|| panic!("no case {name}"));
    check_proof(&seq.ctx, p, &seq.goal)
}

fn reason(name: &str) -> KernelError {
    match report(name).verdict {
        Verdict::Rejected { reason, .. } => reason,
        Verdict::Accepted => panic!("{name} was accepted"),
    }
}

#[test]
fn sound_proofs_are_accepted() {
    for name in ["inc", "both", "pickRight", "demonPicks", "loop", "flow", "wall"] {
        let r = report(name);
        assert!(r.fully_discharged(), "{name}:\n{}", r.render());
    }
}

#[test]
fn false_obligations_reject() {
    for name in ["incTooStrong", "pickLeft", "notInductive", "flowDown"] {
        assert!(matches!(reason(name), KernelError::FalseObligation(_)), "{name}: {:?}", reason(name));
    }
}

#[test]
fn structural_errors_reject() {
    assert!(matches!(reason("modalQe"), KernelError::SideCondition { .. }), "{:?}", reason("modalQe"));
    assert!(matches!(reason("wrongTarget"), KernelError::GoalMismatch { .. }), "{:?}", reason("wrongTarget"));
    assert!(!report("unbound").accepted());
}

#[test]
fn nonlinear_obligations_are_counted_as_assumed() {
    let r = report("nonlinear");
    assert!(r.accepted());
    assert_eq!(r.n_assumed(), 1);
    assert!(!r.fully_discharged());
    assert_eq!(r.render().lines().last(), Some("VERDICT ACCEPTED 1"));
}

#[test]
fn report_lists_obligations_then_verdict() {
    let text = report("inc").render();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("OBLIGATION DECIDED "));
    assert!(lines[0].ends_with("⊢ x > 0"));
    assert_eq!(lines[1], "VERDICT ACCEPTED 0");
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(48) })]

    #[test]
    fn verdicts_survive_printing(seed in 0u64..100_000) {
        let (direct, reparsed) = with_stack(move || {
            let s = sample(seed);
            let p = parse_proof(&print_proof(&s.proof)).expect("printed proofs parse");
            (check_proof(&s.ctx, &s.proof, &s.goal), check_proof(&s.ctx, &p, &s.goal))
        });
        prop_assert_eq!(direct, reparsed);
    }

    #[test]
    fn checking_is_deterministic(seed in 0u64..100_000) {
        let (a, b) = with_stack(move || {
            let s = sample(seed);
            (check_proof(&s.ctx, &s.proof, &s.goal), check_proof(&s.ctx, &s.proof, &s.goal))
        });
        prop_assert_eq!(a, b);
    }
}
