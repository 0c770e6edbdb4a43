//! The inliner on the push-pull model and on shapes it must refuse.

use cdgl_core::inline::{compile, is_system_test_proof, to_normal_shape, InlineError};
use cdgl_core::kernel::check_proof;
use cdgl_core::refine::check_refinement;
use cdgl_core::surface::{parse_file, parse_formula, parse_game, parse_proof, print_game, print_proof};
use cdgl_core::syntax::{Context, Formula};

fn pp() -> cdgl_core::surface::SourceFile {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/pp.cdgl")).unwrap();
    parse_file(&src).unwrap()
}

#[test]
fn push_pull_inlines_to_the_mirroring_system() {
    let file = pp();
    let (s, p) = file.proof("ppSafe").unwrap();
    assert!(is_system_test_proof(&s.ctx, p, &s.goal));
    let shape = to_normal_shape(&s.ctx, p, &s.goal).unwrap();
    let out = compile(&shape).unwrap();
    let want = parse_game("{{L:=-1; R:=1; {x'=L+R & x_l<=x & x<=x_r}} ++ {L:=1; R:=-1; {x'=L+R & x_l<=x & x<=x_r}}}*")
        .unwrap();
    assert_eq!(out.system, want, "{}", print_game(&out.system));
    assert!(out.system.is_system());

    let Formula::Box(game, post) = &s.goal else { panic!("box goal") };
    let tgoal = Formula::boxf(out.system.clone(), (**post).clone());
    let report = check_proof(&s.ctx, &out.transfer, &tgoal);
    assert!(report.fully_discharged(), "{}\n{}", report.render(), print_proof(&out.transfer));

    let d = out.refinement.unwrap();
    let rgoal = Formula::refine(None, out.system.clone(), (**game).clone());
    let report = check_refinement(&s.ctx, &d, &rgoal);
    assert!(report.fully_discharged(), "{}", report.render());
}

#[test]
fn beta_redex_is_not_normal() {
    let ctx = Context::new();
    let goal = parse_formula("x >= 0 -> x >= 0").unwrap();
    let p = parse_proof("lamP(h: x >= 0 => app(lamP(k: x >= 0 => k), h))").unwrap();
    assert!(check_proof(&ctx, &p, &goal).accepted());
    assert!(matches!(to_normal_shape(&ctx, &p, &goal), Err(InlineError::NotNormalForm(_))));
}

#[test]
fn case_analysis_becomes_guarded_choice() {
    let file = parse_file(
        "proof absval : |- <y:=x ++ y:=-x> y >= 0 := case(qe(x >= 0 | x < 0), a => injL(asgn(w, y, e => qe(y >= 0))), b => injR(asgn(w, y, e => qe(y >= 0))))",
    )
    .unwrap();
    let (s, p) = file.proof("absval").unwrap();
    assert!(check_proof(&s.ctx, p, &s.goal).fully_discharged());
    let out = compile(&to_normal_shape(&s.ctx, p, &s.goal).unwrap()).unwrap();
    assert_eq!(out.system, parse_game("{?x >= 0; y:=x} ++ {?x < 0; y:=-x}").unwrap());
    let Formula::Diamond(game, post) = &s.goal else { panic!("diamond goal") };
    let tgoal = Formula::boxf(out.system.clone(), (**post).clone());
    assert!(check_proof(&s.ctx, &out.transfer, &tgoal).fully_discharged());
    let rgoal = Formula::refine(None, out.system.clone(), cdgl_core::syntax::Game::dual((**game).clone()));
    assert!(check_refinement(&s.ctx, &out.refinement.unwrap(), &rgoal).fully_discharged());
}
