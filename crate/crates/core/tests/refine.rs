//! Refinement derivations: worked examples, rejections, and agreement of
//! accepted conclusions with brute-force semantics.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use cdgl_core::gen::{finite_game, rng};
use cdgl_core::kernel::{CheckReport, Verdict};
use cdgl_core::proof::{Derivation, Dir, Meta, Premise, Rule};
use cdgl_core::refine::{apply_rule, check_refinement, derive_conclusion};
use cdgl_core::surface::parse_file;
use cdgl_core::syntax::{Context, Formula, Game};

use common::Finite;

const CASES: &str = r"
derivation swap : |- {x:=1 ++ x:=0} =< {x:=0 ++ x:=1} := choiceComm{a := {x:=1}, b := {x:=0}}
derivation pick : |- {x:=1 ++ x:=0} =< {x:=1} := refChoiceL1{a := {x:=1}, b := {x:=0}}
derivation pickBackwards : |- {x:=1} =< {x:=1 ++ x:=0} := refChoiceL1{a := {x:=1}, b := {x:=0}}
derivation pickOther : |- {x:=1 ++ x:=0} =< {x:=0} := refTrans{a := {x:=1 ++ x:=0}, b := {x:=0 ++ x:=1}, c := {x:=0}}(
  choiceComm{a := {x:=1}, b := {x:=0}},
  refChoiceL1{a := {x:=0}, b := {x:=1}})
derivation same : |- {x:=1; y:=0} =< {x:=1; y:=0} := refRefl{a := {x:=1; y:=0}}
derivation doubleDual : |- {{x:=1}^d}^d =< {x:=1} := dualDNE{a := {x:=1}}
derivation doubleDualBack : |- {x:=1} =< {{x:=1}^d}^d := rev dualDNE{a := {x:=1}}
derivation wrongInstance : |- {x:=1 ++ x:=0} =< {x:=1} := refChoiceL1{a := {x:=0}, b := {x:=1}}
";

fn report(name: &str) -> CheckReport {
    let file = parse_file(CASES).expect("cases parse");
    let (seq, d) = file.derivation(name).unwrap_or_else(|| panic!("no case {name}"));
    check_refinement(&seq.ctx, d, &seq.goal)
}

#[test]
fn worked_examples_check() {
    for name in ["swap", "pick", "pickOther", "same", "doubleDual", "doubleDualBack"] {
        let r = report(name);
        assert!(r.fully_discharged(), "{name}:\n{}\n{:?}", r.render(), r.verdict);
    }
}

#[test]
fn mismatched_conclusions_reject() {
    for name in ["pickBackwards", "wrongInstance"] {
        assert!(matches!(report(name).verdict, Verdict::Rejected { .. }), "{name}");
    }
}

#[test]
fn worked_examples_are_semantic_refinements() {
    let fin = Finite::new(&["x", "y"]);
    let file = parse_file(CASES).unwrap();
    for name in ["swap", "pick", "pickOther", "same", "doubleDual", "doubleDualBack"] {
        let (seq, _) = file.derivation(name).unwrap();
        let Formula::Refine(_, a, b) = &seq.goal else { panic!("{name}") };
        assert!(fin.refines(a, b), "{name}");
    }
    let (seq, _) = file.derivation("pickBackwards").unwrap();
    let Formula::Refine(_, a, b) = &seq.goal else { panic!() };
    assert!(!fin.refines(a, b));
}

fn games(seed: u64) -> (Game, Game, Game) {
    let mut r = rng(seed);
    let vars = ["x", "y"];
    (finite_game(&mut r, &vars, 3), finite_game(&mut r, &vars, 3), finite_game(&mut r, &vars, 3))
}

fn inst(pairs: &[(&str, &Game)]) -> BTreeMap<String, Meta> {
    pairs.iter().map(|(k, g)| (k.to_string(), Meta::Game((*g).clone()))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    /// Premise-free choice rules produce conclusions the oracle confirms.
    #[test]
    fn choice_rules_are_semantically_sound(seed in any::<u64>()) {
        let fin = Finite::new(&["x", "y"]);
        let (a, b, _) = games(seed);
        for rule in [Rule::RefChoiceL1, Rule::RefChoiceL2, Rule::ChoiceComm, Rule::ChoiceIdem] {
            let metas: Vec<(&str, &Game)> = [("a", &a), ("b", &b)].into_iter().take(rule.keys().len()).collect();
            let ri = apply_rule(rule, Dir::Fwd, &inst(&metas)).unwrap();
            prop_assert!(ri.premises.is_empty());
            let Formula::Refine(_, lhs, rhs) = &ri.conclusion else { panic!() };
            prop_assert!(fin.refines(lhs, rhs), "{}", rule.name());
            let d = Derivation::new(rule, metas.iter().map(|(k, g)| (*k, Meta::Game((*g).clone()))).collect(), vec![]);
            let r = check_refinement(&Context::new(), &d, &ri.conclusion);
            prop_assert!(r.fully_discharged(), "{}: {:?}", rule.name(), r.verdict);
        }
    }

    /// Chaining two accepted steps with transitivity is accepted and sound.
    #[test]
    fn transitivity_chains(seed in any::<u64>()) {
        let fin = Finite::new(&["x", "y"]);
        let (a, b, c) = games(seed);
        let ab = Game::choice(a.clone(), b.clone());
        let left = Game::choice(ab.clone(), c.clone());
        let first = Derivation::new(
            Rule::RefChoiceL1,
            vec![("a", Meta::Game(ab.clone())), ("b", Meta::Game(c.clone()))],
            vec![],
        );
        let second = Derivation::new(Rule::RefChoiceL1, vec![("a", Meta::Game(a.clone())), ("b", Meta::Game(b.clone()))], vec![]);
        let chain = Derivation::new(
            Rule::RefTrans,
            vec![("a", Meta::Game(left.clone())), ("b", Meta::Game(ab)), ("c", Meta::Game(a.clone()))],
            vec![Premise::Derivation(first), Premise::Derivation(second)],
        );
        let (conclusion, report) = derive_conclusion(&Context::new(), &chain);
        prop_assert!(report.fully_discharged(), "{:?}", report.verdict);
        let goal = Formula::refine(None, left.clone(), a.clone());
        prop_assert!(conclusion.is_some_and(|f| f.eq_mod_rank(&goal)));
        prop_assert!(fin.refines(&left, &a));
    }

    /// Only mutual rules take a direction.
    #[test]
    fn reversed_one_way_rules_are_refused(seed in any::<u64>()) {
        let (a, b, _) = games(seed);
        let d = Derivation::new(Rule::RefChoiceL1, vec![("a", Meta::Game(a.clone())), ("b", Meta::Game(b.clone()))], vec![]).rev();
        let goal = Formula::refine(None, a.clone(), Game::choice(a.clone(), b.clone()));
        let r = check_refinement(&Context::new(), &d, &goal);
        prop_assert!(!r.accepted());
    }
}
