//! Substitution, renaming and free-variable laws on random syntax.

use std::collections::BTreeMap;

use proptest::prelude::*;

use cdgl_core::arith::holds;
use cdgl_core::gen::{atom, formula, game, point, rng, term, GenRng, VARS};
use cdgl_core::syntax::{substitute, substitute_term, transpose, Formula};
use cdgl_core::term::{eval, Rat, Var};
use rand::Rng;

/// Quantifier-free formulas: atoms under conjunction, disjunction and negation.
fn qf(rng: &mut GenRng, depth: usize) -> Formula {
    if depth <= 1 || rng.gen_bool(0.3) {
        return atom(rng, &VARS, 2);
    }
    match rng.gen_range(0..3) {
        0 => Formula::and(qf(rng, depth - 1), qf(rng, depth - 1)),
        1 => Formula::or(qf(rng, depth - 1), qf(rng, depth - 1)),
        _ => Formula::not(qf(rng, depth - 1)),
    }
}

fn env(values: &BTreeMap<Var, Rat>) -> impl Fn(&Var) -> Option<Rat> + '_ {
    |v| values.get(v).cloned()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(256) })]

    #[test]
    fn substitution_matches_updating_the_state(seed in any::<u64>()) {
        let mut r = rng(seed);
        let phi = qf(&mut r, 4);
        let f = term(&mut r, &VARS, 3);
        let x = Var::plain(VARS[r.gen_range(0..3)]);
        let values: BTreeMap<Var, Rat> = point(&mut r, &VARS).into_iter().collect();
        let substituted = substitute(&phi, &x, &f).expect("quantifier-free formulas admit every substitution");
        let mut updated = values.clone();
        updated.insert(x.clone(), eval(&f, &env(&values)).unwrap());
        let expected = holds(&phi, &env(&updated));
        prop_assert!(expected.is_some());
        prop_assert_eq!(holds(&substituted, &env(&values)), expected);
    }

    #[test]
    fn term_substitution_matches_evaluation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = term(&mut r, &VARS, 4);
        let f = term(&mut r, &VARS, 3);
        let x = Var::plain("y");
        let values: BTreeMap<Var, Rat> = point(&mut r, &VARS).into_iter().collect();
        let mut updated = values.clone();
        updated.insert(x.clone(), eval(&f, &env(&values)).unwrap());
        prop_assert_eq!(eval(&substitute_term(&t, &x, &f), &env(&values)), eval(&t, &env(&updated)));
    }

    #[test]
    fn renaming_is_an_involution(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = formula(&mut r, &VARS, 4);
        let g = game(&mut r, &VARS, 4);
        prop_assert_eq!(f.rename("x", "w").rename("x", "w"), f.clone());
        prop_assert_eq!(g.rename("z", "x").rename("z", "x"), g.clone());
    }

    #[test]
    fn renaming_transposes_free_variables(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = formula(&mut r, &VARS, 4);
        let g = game(&mut r, &VARS, 4);
        let moved = |s: std::collections::BTreeSet<Var>| s.iter().map(|v| transpose(v, "x", "w")).collect();
        prop_assert_eq!(f.rename("x", "w").free_vars(), moved(f.free_vars()));
        prop_assert_eq!(g.rename("x", "w").free_vars(), moved(g.free_vars()));
    }

    #[test]
    fn must_bound_variables_are_bound(seed in any::<u64>()) {
        let g = game(&mut rng(seed), &VARS, 5);
        prop_assert!(g.must_bound_vars().is_subset(&g.bound_vars()));
        prop_assert!(g.free_vars_must().is_subset(&g.free_vars()));
    }
}

#[test]
fn substitution_refuses_to_capture() {
    let phi = cdgl_core::surface::parse_formula("[y:=*] x <= y").unwrap();
    let f = cdgl_core::surface::parse_term("y + 1").unwrap();
    assert!(substitute(&phi, &Var::plain("x"), &f).is_err());
    let ok = substitute(&phi, &Var::plain("x"), &cdgl_core::surface::parse_term("z").unwrap()).unwrap();
    assert_eq!(ok, cdgl_core::surface::parse_formula("[y:=*] z <= y").unwrap());
}
