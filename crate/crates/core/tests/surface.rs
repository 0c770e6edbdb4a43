//! Parser and printer: fixed examples, precedence, aliases, error positions
//! and round-trips on random syntax.

use proptest::prelude::*;

use cdgl_core::corpus::sample;
use cdgl_core::gen::{formula, game, rng, term, VARS};
use cdgl_core::par::with_stack;
use cdgl_core::surface::{parse_file, parse_proof, print_file, print_proof};
use cdgl_core::surface::{parse_formula, parse_game, parse_term, print_formula, print_game, print_term};
use cdgl_core::syntax::{CmpOp, Formula, Game};
use cdgl_core::term::Term;

#[test]
fn choice_then_test() {
    let g = parse_game("{x:=1 ++ x:=2}; ?x>=1").unwrap();
    let want = Game::seq(
        Game::choice(Game::assign("x", Term::lit(1)), Game::assign("x", Term::lit(2))),
        Game::test(Formula::cmp(CmpOp::Ge, Term::var("x"), Term::lit(1))),
    );
    assert_eq!(g, want);
    assert_eq!(print_game(&g), "{x:=1 ++ x:=2}; ?x >= 1");
}

#[test]
fn push_pull_game_roundtrips() {
    let src = "{{L:=-1 ++ L:=1}; {{R:=-1 ++ R:=1}}^d; {x'=L+R & x_l<=x & x<=x_r}}*";
    let g = parse_game(src).unwrap();
    let printed = print_game(&g);
    assert_eq!(parse_game(&printed).unwrap(), g, "{printed}");
    println!("{printed}");
}

#[test]
fn terms_roundtrip() {
    for s in ["x - 1", "-x*y", "-(x*y)", "a - (-x)", "x*-1", "-1*2", "(x + y)'", "2/3*x - -1/2", "x - (y + z)"] {
        let t = parse_term(s).unwrap();
        let p = print_term(&t);
        assert_eq!(parse_term(&p).unwrap(), t, "{s} -> {p}");
    }
}

#[test]
fn formulas_roundtrip() {
    for s in [
        "x > 0 & y > 0 -> z = 1",
        "!(x > 0 | y > 0)",
        "x > 0 <-> y < 1",
        "\\forall x x >= 0",
        "[x:=1]<y:=*>y = x",
        "{x:=1} =<[0] {x:=*}",
        "{x:=1} =<> {x:=*}",
        "<?x > 0 ++ ?y > 0>z = 1",
    ] {
        let f = parse_formula(s).unwrap_or_else(|e| panic!("{s}: {e}"));
        let p = print_formula(&f);
        assert_eq!(parse_formula(&p).unwrap(), f, "{s} -> {p}");
    }
}

#[test]
fn precedence_binds_dual_then_star_then_seq_then_choice() {
    let g = parse_game("x:=1 ++ y:=1; z:=1*^d").unwrap();
    let want = Game::choice(
        Game::assign("x", Term::lit(1)),
        Game::seq(Game::assign("y", Term::lit(1)), Game::dual(Game::repeat(Game::assign("z", Term::lit(1))))),
    );
    assert_eq!(g, want);
}

#[test]
fn unicode_aliases_parse_like_ascii() {
    assert_eq!(parse_game("x:=1 ∪ x:=2").unwrap(), parse_game("x:=1 ++ x:=2").unwrap());
    assert_eq!(
        parse_formula("x ≤ 1 ∧ y ≠ 2 → ¬(z ≥ 0 ∨ z = 1)").unwrap(),
        parse_formula("x <= 1 & y != 2 -> !(z >= 0 | z = 1)").unwrap()
    );
}

#[test]
fn errors_report_line_and_column() {
    let e = parse_file("game G := x:=1\n\ngame H := {x:=1 ++").unwrap_err();
    assert_eq!(e.line, 3);
    assert!(e.col > 1, "{e}");
    assert!(e.to_string().starts_with("3:"), "{e}");
    let e = parse_term("x + * 2").unwrap_err();
    assert_eq!((e.line, e.col), (1, 5));
}

#[test]
fn differentials_outside_derivatives_are_rejected() {
    assert!(parse_term("(x + y)'").is_ok());
    assert!(parse_formula("(x + y)' >= 0").is_err());
    assert!(parse_game("x:=(y*y)'").is_err());
    assert!(parse_formula("x' >= 0").is_ok());
}

#[test]
fn file_printing_is_a_fixed_point() {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/pp.cdgl")).unwrap();
    let once = print_file(&parse_file(&src).unwrap());
    let twice = print_file(&parse_file(&once).unwrap());
    assert_eq!(once, twice);
    assert!(once.starts_with("-- Push-pull cart."));
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(256) })]

    #[test]
    fn random_syntax_roundtrips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = term(&mut r, &VARS, 5);
        prop_assert_eq!(parse_term(&print_term(&t)).unwrap(), t);
        let f = formula(&mut r, &VARS, 4);
        prop_assert_eq!(parse_formula(&print_formula(&f)).unwrap(), f);
        let g = game(&mut r, &VARS, 4);
        prop_assert_eq!(parse_game(&print_game(&g)).unwrap(), g);
    }

    #[test]
    fn generated_proofs_roundtrip(seed in 0u64..100_000) {
        let (p, back) = with_stack(move || {
            let p = sample(seed).proof;
            let back = parse_proof(&print_proof(&p));
            (p, back)
        });
        prop_assert_eq!(back.unwrap(), p);
    }
}
