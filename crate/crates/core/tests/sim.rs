//! Simulator properties: replay, integrator accuracy against analytic
//! solutions, and safety of inlined systems against random Demons.

use std::path::Path;

use proptest::prelude::*;
use rand::Rng;

use cdgl_core::corpus::{evaluate, sample};
use cdgl_core::gen::rng;
use cdgl_core::par::with_stack;
use cdgl_core::sim::{run_random, run_system, RandomDemon, Script, SimOptions, State, Verdict};
use cdgl_core::surface::{parse_file, parse_formula, parse_game};
use cdgl_core::syntax::{Formula, Game};
use cdgl_core::term::ratio;
use num_traits::ToPrimitive;

fn pp_system() -> Game {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models/pp_system.cdgl");
    let file = parse_file(&std::fs::read_to_string(path).unwrap()).unwrap();
    file.game("PPsys").unwrap().clone()
}

/// A state satisfying `x_l < x_r & x_l <= x0 & x0 = x & x <= x_r`.
fn pp_init(r: &mut impl Rng) -> State {
    let xl = r.gen_range(-20..=20);
    let xr = xl + r.gen_range(1..=20);
    let x = ratio(r.gen_range(4 * xl..=4 * xr), 4);
    State::from_pairs([
        ("x_l", ratio(xl, 1)),
        ("x_r", ratio(xr, 1)),
        ("x", x.clone()),
        ("x0", x),
        ("L", ratio(0, 1)),
        ("R", ratio(0, 1)),
    ])
}

fn f64_of(s: &State, v: &str) -> f64 {
    s.value(v).unwrap().to_f64().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn recorded_scripts_replay_exactly(seed in any::<u64>()) {
        let g = pp_system();
        let post = parse_formula("x = x0").unwrap();
        let mut r = rng(seed);
        let init = pp_init(&mut r);
        let mut demon = RandomDemon::new(&mut r);
        let (script, trace) = run_random(&g, &init, &mut demon, 1000, &post, &SimOptions::default()).unwrap();
        prop_assert_eq!(&trace.verdict, &Verdict::PostconditionHolds);
        let replay = run_system(&g, &init, &script, &post, &SimOptions::default()).unwrap();
        prop_assert_eq!(&replay, &trace);
        let reparsed = Script::parse(&script.to_text()).unwrap();
        prop_assert_eq!(reparsed.decisions, script.decisions);
    }

    #[test]
    fn rk4_agrees_with_the_closed_form(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = ratio(r.gen_range(-40..=40), 4);
        let d = ratio(r.gen_range(0..=16), 8);
        let init = State::from_pairs([("x", ratio(r.gen_range(-40..=40), 3)), ("y", ratio(r.gen_range(-40..=40), 3)), ("k", k)]);
        let g = parse_game("{x'=k, y'=2*k - 1 & x <= 1000}").unwrap();
        let script = Script::parse(&format!("D {d}")).unwrap();
        let tt = parse_formula("0 = 0").unwrap();
        let exact = run_system(&g, &init, &script, &tt, &SimOptions::default()).unwrap();
        let numeric = run_system(&g, &init, &script, &tt, &SimOptions { force_rk4: true, ..SimOptions::default() }).unwrap();
        prop_assert_eq!(&exact.verdict, &Verdict::PostconditionHolds);
        prop_assert_eq!(&numeric.verdict, &Verdict::PostconditionHolds);
        let (a, b) = (exact.final_state().unwrap(), numeric.final_state().unwrap());
        prop_assert!(a.is_exact(&cdgl_core::term::Var::plain("x")));
        for v in ["x", "y"] {
            let (p, q) = (f64_of(a, v), f64_of(b, v));
            prop_assert!((p - q).abs() <= 1e-9 * (1.0 + p.abs()), "{v}: {p} vs {q}");
        }
    }
}

#[test]
fn rk4_tracks_the_harmonic_oscillator() {
    let g = parse_game("{x'=y, y'=-x}").unwrap();
    let init = State::from_pairs([("x", ratio(1, 1)), ("y", ratio(0, 1))]);
    for d in [ratio(1, 2), ratio(1, 1), ratio(3, 1)] {
        let script = Script::parse(&format!("D {d}")).unwrap();
        let t = run_system(&g, &init, &script, &parse_formula("0 = 0").unwrap(), &SimOptions::default()).unwrap();
        let s = t.final_state().unwrap();
        let time = d.to_f64().unwrap();
        assert!((f64_of(s, "x") - time.cos()).abs() < 1e-9, "x at {time}");
        assert!((f64_of(s, "y") + time.sin()).abs() < 1e-9, "y at {time}");
    }
}

#[test]
fn loops_stop_at_the_cap() {
    let g = parse_game("{x:=x+1}*").unwrap();
    let init = State::from_pairs([("x", ratio(0, 1))]);
    let mut script = Script::parse("C\nC\nC\nC\nC").unwrap();
    script.cap = 2;
    let t = run_system(&g, &init, &script, &parse_formula("x = 2").unwrap(), &SimOptions::default()).unwrap();
    assert_eq!(t.verdict, Verdict::PostconditionHolds);
}

#[test]
fn exhausted_scripts_and_failed_tests_are_reported() {
    let init = State::from_pairs([("x", ratio(0, 1))]);
    let post = parse_formula("x = 0").unwrap();
    let choice = parse_game("x:=1 ++ x:=2").unwrap();
    let t = run_system(&choice, &init, &Script::parse("").unwrap(), &post, &SimOptions::default()).unwrap();
    assert_eq!(t.verdict, Verdict::ScriptExhausted);
    let test = parse_game("?x > 0").unwrap();
    let t = run_system(&test, &init, &Script::parse("").unwrap(), &post, &SimOptions::default()).unwrap();
    assert!(matches!(t.verdict, Verdict::TestFailed(..)));
    let wrong = run_system(&choice, &init, &Script::parse("D 1").unwrap(), &post, &SimOptions::default());
    assert!(wrong.is_err());
}

#[test]
fn state_and_script_errors_carry_lines() {
    let e = State::parse("x = 1\ny = what").unwrap_err();
    assert_eq!(e.line, 2);
    let e = Script::parse("L\nD -1").unwrap_err();
    assert_eq!(e.line, 2);
}

/// Inlined systems of generated proofs never end in a state violating the
/// proved postcondition when started inside the proof's context.
#[test]
fn inlined_generated_systems_keep_their_postconditions() {
    let (runs, holds) = with_stack(|| {
        let (mut runs, mut holds) = (0, 0);
        for seed in 0..150u64 {
            let s = sample(seed);
            let out = evaluate(seed, &s);
            let Some(system) = out.system.filter(|_| out.transfer_rechecks) else { continue };
            let Formula::Box(_, post) = &s.goal else { continue };
            let mut r = rng(seed ^ 0x51u64);
            for _ in 0..4 {
                let init = State::from_pairs([
                    ("x", ratio(r.gen_range(0..=40), 4)),
                    ("y", ratio(r.gen_range(-40..=40), 4)),
                    ("z", ratio(r.gen_range(-40..=40), 4)),
                ]);
                let mut demon = RandomDemon::new(&mut r);
                demon.p_continue = 0.6;
                let Ok((_, t)) = run_random(&system, &init, &mut demon, 50, post, &SimOptions::default()) else {
                    continue;
                };
                runs += 1;
                assert!(!matches!(t.verdict, Verdict::PostconditionFails(_)), "seed {seed}: {}", t.verdict);
                holds += (t.verdict == Verdict::PostconditionHolds) as usize;
            }
        }
        (runs, holds)
    });
    assert!(runs >= 200, "only {runs} runs completed");
    assert!(holds > 0);
}

#[test]
fn exact_rationals_survive_decimal_input() {
    let s = State::parse("x = 0.1\ny = 1/3").unwrap();
    assert_eq!(s.value("x"), Some(&ratio(1, 10)));
    assert_eq!(s.value("y"), Some(&ratio(1, 3)));
}
