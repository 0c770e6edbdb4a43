//! The arithmetic decision procedure against rational evaluation.

use proptest::prelude::*;
use rand::Rng;

use cdgl_core::arith::{decide, holds, Status};
use cdgl_core::gen::{atom, point, rng, term, GenRng};
use cdgl_core::surface::parse_formula;
use cdgl_core::syntax::Formula;
use cdgl_core::term::{eval, poly_eq, poly_normalize, Rat, Var};

const XY: [&str; 2] = ["x", "y"];

fn linear_qf(rng: &mut GenRng, depth: usize) -> Formula {
    if depth <= 1 || rng.gen_bool(0.4) {
        return atom(rng, &XY, 2);
    }
    match rng.gen_range(0..3) {
        0 => Formula::and(linear_qf(rng, depth - 1), linear_qf(rng, depth - 1)),
        1 => Formula::or(linear_qf(rng, depth - 1), linear_qf(rng, depth - 1)),
        _ => Formula::implies(linear_qf(rng, depth - 1), linear_qf(rng, depth - 1)),
    }
}

fn at(values: &[(Var, Rat)]) -> impl Fn(&Var) -> Option<Rat> + '_ {
    |v| values.iter().find(|(w, _)| w == v).map(|(_, q)| q.clone())
}

fn decided(hyps: &[&str], claim: &str) -> Status {
    let hyps: Vec<Formula> = hyps.iter().map(|h| parse_formula(h).unwrap()).collect();
    decide(&hyps, &parse_formula(claim).unwrap())
}

#[test]
fn linear_facts_are_decided() {
    assert_eq!(decided(&["x_l < x_r", "x = x0"], "x = x0"), Status::Decided(true));
    assert_eq!(decided(&[], "x > x"), Status::Decided(false));
    assert_eq!(decided(&["x >= 0", "y >= x"], "y >= 0"), Status::Decided(true));
    assert_eq!(decided(&["x >= 0"], "x > 0"), Status::Decided(false));
    assert_eq!(decided(&["x > 0 | x < 0"], "x != 0"), Status::Decided(true));
    assert_eq!(decided(&["2*x + y <= 4", "x - y <= 2"], "x <= 2"), Status::Decided(true));
    assert_eq!(decided(&["2*x + y <= 4", "x - y >= 2"], "x <= 2"), Status::Decided(false));
    assert_eq!(decided(&["x > 3", "x < 2"], "y = 7"), Status::Decided(true));
}

#[test]
fn nonlinear_claims_are_assumed() {
    assert_eq!(decided(&[], "x * x >= 0"), Status::Assumed);
    assert_eq!(decided(&["x > 1"], "x * y > y"), Status::Assumed);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(256) })]

    #[test]
    fn poly_normalize_preserves_values(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = term(&mut r, &["x", "y", "z"], 5);
        let n = poly_normalize(&t).unwrap();
        for _ in 0..20 {
            let p = point(&mut r, &["x", "y", "z"]);
            prop_assert_eq!(eval(&t, &at(&p)).unwrap(), eval(&n, &at(&p)).unwrap());
        }
        prop_assert!(poly_eq(&t, &n).unwrap());
        prop_assert_eq!(poly_normalize(&n).unwrap(), n);
    }

    #[test]
    fn valid_verdicts_survive_sampling(seed in any::<u64>()) {
        let mut r = rng(seed);
        let hyp = linear_qf(&mut r, 2);
        let claim = linear_qf(&mut r, 3);
        if decide(std::slice::from_ref(&hyp), &claim) == Status::Decided(true) {
            for _ in 0..40 {
                let p = point(&mut r, &XY);
                if holds(&hyp, &at(&p)) == Some(true) {
                    prop_assert_eq!(holds(&claim, &at(&p)), Some(true), "{} |- {} at {:?}", hyp, claim, p);
                }
            }
        }
    }

    #[test]
    fn sampled_counterexamples_are_never_valid(seed in any::<u64>()) {
        let mut r = rng(seed);
        let claim = linear_qf(&mut r, 3);
        let p = point(&mut r, &XY);
        if holds(&claim, &at(&p)) == Some(false) {
            prop_assert_ne!(decide(&[], &claim), Status::Decided(true));
        }
    }

    #[test]
    fn ground_claims_are_evaluated(a in -50i64..50, b in 1i64..9, c in -50i64..50, op in 0usize..6) {
        let ops = ["<", "<=", "=", "!=", ">=", ">"];
        let text = format!("{a}/{b} {} {c}", ops[op]);
        let f = parse_formula(&text).unwrap();
        let truth = holds(&f, &|_: &Var| None).unwrap();
        prop_assert_eq!(decide(&[], &f), Status::Decided(truth));
    }
}
