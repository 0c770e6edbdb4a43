//! Differentials against the sum and product rules, by point evaluation.

use num_traits::Signed;
use proptest::prelude::*;
use rand::Rng;

use cdgl_core::gen::{rng, term, GenRng, VARS};
use cdgl_core::term::{differentiate, eval, ratio, Rat, Term, Var};

fn point(r: &mut GenRng) -> Vec<(Var, Rat)> {
    let mut out = Vec::new();
    for v in VARS {
        out.push((Var::plain(v), ratio(r.gen_range(-20..=20), r.gen_range(1..=4))));
        out.push((Var::prime(v), ratio(r.gen_range(-20..=20), r.gen_range(1..=4))));
    }
    out
}

fn value(t: &Term, p: &[(Var, Rat)]) -> Rat {
    eval(t, &|v: &Var| p.iter().find(|(w, _)| w == v).map(|(_, q)| q.clone())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(256) })]

    #[test]
    fn leibniz_rule(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = term(&mut r, &VARS, 3);
        let g = term(&mut r, &VARS, 3);
        let lhs = differentiate(&Term::mul(f.clone(), g.clone())).unwrap();
        let rhs = Term::add(
            Term::mul(differentiate(&f).unwrap(), g.clone()),
            Term::mul(f.clone(), differentiate(&g).unwrap()),
        );
        for _ in 0..10 {
            let p = point(&mut r);
            prop_assert_eq!(value(&lhs, &p), value(&rhs, &p));
        }
    }

    #[test]
    fn linearity(seed in any::<u64>(), a in -5i64..5, b in -5i64..5) {
        let mut r = rng(seed);
        let f = term(&mut r, &VARS, 3);
        let g = term(&mut r, &VARS, 3);
        let combo = Term::add(Term::mul(Term::lit(a), f.clone()), Term::mul(Term::lit(b), g.clone()));
        let lhs = differentiate(&combo).unwrap();
        let rhs = Term::add(
            Term::mul(Term::lit(a), differentiate(&f).unwrap()),
            Term::mul(Term::lit(b), differentiate(&g).unwrap()),
        );
        for _ in 0..10 {
            let p = point(&mut r);
            prop_assert_eq!(value(&lhs, &p), value(&rhs, &p));
        }
    }
}

/// For a polynomial p and a direction d, (p(x + h·d) - p(x)) / h tends to
/// the differential at x with primes set to d; with exact rationals the error
/// is a polynomial in h without constant term, so halving h halves it at least.
#[test]
fn differential_is_the_directional_derivative() {
    let mut r = rng(7);
    for _ in 0..100 {
        let t = term(&mut r, &VARS, 4);
        let d = differentiate(&t).unwrap();
        let p = point(&mut r);
        let exact = value(&d, &p);
        let shifted = |h: &Rat| -> Vec<(Var, Rat)> {
            VARS.iter()
                .map(|v| {
                    let x = p.iter().find(|(w, _)| *w == Var::plain(v)).unwrap().1.clone();
                    let dx = p.iter().find(|(w, _)| *w == Var::prime(v)).unwrap().1.clone();
                    (Var::plain(v), x + h * dx)
                })
                .collect()
        };
        let quotient = |h: Rat| (value(&t, &shifted(&h)) - value(&t, &p)) / h;
        let e1 = (quotient(ratio(1, 1 << 20)) - exact.clone()).abs();
        let e2 = (quotient(ratio(1, 1 << 21)) - exact.clone()).abs();
        assert!(e2 <= e1, "{t}: {e1} then {e2}");
        assert!(e1 * Rat::from_integer(1000.into()) <= Rat::from_integer(1.into()) + exact.abs(), "{t}");
    }
}
