//! Acceptance suite: one `PASS` or `FAIL` line per criterion.
//!
//! Runs on a large-stack thread because unoptimized builds recurse deeply
//! while checking generated proofs.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

mod common;

use cdgl_core::corpus::{evaluate_seeds, Outcome, Summary};
use cdgl_core::gen::{finite_formula, finite_game, finite_term, formula, game, point, rng, term, VARS};
use cdgl_core::inline::{compile, to_normal_shape, Compiled};
use cdgl_core::kernel::check_proof;
use cdgl_core::par::{self, prelude::*};
use cdgl_core::proof::{Dir, Meta, MetaKind, Rule};
use cdgl_core::refine::{apply_rule, check_refinement};
use cdgl_core::sim::{run_batch, Decision, Script, SimOptions, State, Verdict};
use cdgl_core::surface::{
    parse_file, parse_formula, parse_game, parse_term, print_formula, print_game, print_term, SourceFile,
};
use cdgl_core::syntax::{transpose, Context, Formula, Game};
use cdgl_core::term::{eval, poly_normalize, rat, ratio, Rat, Term, Var};
use common::{game_depth, Finite};
use rand::Rng;

const CORPUS_SEEDS: u64 = 1400;
const CORPUS_TARGET: usize = 1000;
const LAW_INSTANCES: usize = 200;
const SCRIPTS: usize = 100;
const ROUNDS: usize = 100;
const AST_SAMPLES: u64 = 10_000;
const POINTS: usize = 100;

struct Line {
    ok: bool,
    name: &'static str,
    detail: String,
}

fn main() -> ExitCode {
    let lines = par::with_stack(|| {
        par::init_pool();
        let pp = Pp::load();
        let start = Instant::now();
        let outcomes = evaluate_seeds(0..CORPUS_SEEDS);
        let corpus_time = start.elapsed();
        let timed = |f: &dyn Fn() -> Line| {
            let t = Instant::now();
            let mut l = f();
            l.detail = format!("{} [{:.1}s]", l.detail, t.elapsed().as_secs_f64());
            l
        };
        let mut lines = vec![
            timed(&|| pp_accepted(&pp)),
            timed(&|| pp_inlines(&pp)),
            timed(&|| systemhood(&outcomes)),
            timed(&|| transfer(&pp, &outcomes)),
            timed(&|| refinement(&pp, &outcomes)),
            timed(&algebraic_laws),
            timed(&|| simulator(&pp)),
            timed(&infrastructure),
        ];
        for l in &mut lines[2..5] {
            l.detail = format!("{} [corpus {:.1}s]", l.detail, corpus_time.as_secs_f64());
        }
        lines
    });
    let mut all = true;
    for (i, l) in lines.iter().enumerate() {
        all &= l.ok;
        println!("{} {} {}: {}", if l.ok { "PASS" } else { "FAIL" }, i + 1, l.name, l.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

struct Pp {
    ctx: Context,
    goal: Formula,
    compiled: Compiled,
}

impl Pp {
    fn load() -> Pp {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/pp.cdgl"))
            .expect("read pp.cdgl");
        let file: SourceFile = parse_file(&src).expect("parse pp.cdgl");
        let (stmt, proof) = file.proof("ppSafe").expect("ppSafe");
        let shape = to_normal_shape(&stmt.ctx, proof, &stmt.goal).expect("normal shape");
        let compiled = compile(&shape).expect("compile");
        Pp { ctx: stmt.ctx.clone(), goal: stmt.goal.clone(), compiled }
    }

    fn post(&self) -> Formula {
        match &self.goal {
            Formula::Box(_, p) => (**p).clone(),
            _ => panic!("ppSafe proves a box"),
        }
    }

    fn game(&self) -> Game {
        match &self.goal {
            Formula::Box(g, _) => (**g).clone(),
            _ => panic!("ppSafe proves a box"),
        }
    }
}

fn pp_accepted(_: &Pp) -> Line {
    let src =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/pp.cdgl")).expect("read pp.cdgl");
    let file = parse_file(&src).expect("parse pp.cdgl");
    let (stmt, proof) = file.proof("ppSafe").expect("ppSafe");
    let report = check_proof(&stmt.ctx, proof, &stmt.goal);
    Line {
        ok: report.fully_discharged(),
        name: "push-pull proof",
        detail: format!(
            "accepted={} assumed={} obligations={}",
            report.accepted(),
            report.n_assumed(),
            report.obligations.len()
        ),
    }
}

fn pp_inlines(pp: &Pp) -> Line {
    let want = parse_game("{{L:=-1; R:=1; {x'=L+R & x_l<=x & x<=x_r}} ++ {L:=1; R:=-1; {x'=L+R & x_l<=x & x<=x_r}}}*")
        .expect("expected system parses");
    let printed = print_game(&pp.compiled.system);
    let reparsed = parse_game(&printed).ok();
    Line {
        ok: pp.compiled.system == want && reparsed.as_ref() == Some(&want),
        name: "push-pull inlining",
        detail: printed,
    }
}

fn corpus_of(outcomes: &[Outcome]) -> Vec<&Outcome> {
    outcomes.iter().filter(|o| o.accepted && o.system_test).collect()
}

fn systemhood(outcomes: &[Outcome]) -> Line {
    let corpus = corpus_of(outcomes);
    let s = Summary::of(outcomes);
    let shapes_ok = (0..CORPUS_SEEDS).into_par_iter().all(|seed| {
        let sample = cdgl_core::corpus::sample(seed);
        let Formula::Box(g, _) = &sample.goal else { return false };
        let vars: std::collections::BTreeSet<String> = sample.goal.all_vars().into_iter().map(|v| v.name).collect();
        game_depth(g) <= 6 && vars.len() <= 3
    });
    let good = corpus.iter().filter(|o| o.compiled.is_ok() && o.is_system).count();
    Line {
        ok: corpus.len() >= CORPUS_TARGET && good == corpus.len() && shapes_ok,
        name: "systemhood",
        detail: format!(
            "{good}/{} inlined games are systems ({} generated, {} accepted, depth<=6 and <=3 vars: {shapes_ok})",
            corpus.len(),
            s.generated,
            s.accepted
        ),
    }
}

fn transfer(pp: &Pp, outcomes: &[Outcome]) -> Line {
    let corpus = corpus_of(outcomes);
    let good = corpus.iter().filter(|o| o.transfer_rechecks).count();
    let tgoal = Formula::boxf(pp.compiled.system.clone(), pp.post());
    let pp_ok = check_proof(&pp.ctx, &pp.compiled.transfer, &tgoal).fully_discharged();
    Line {
        ok: corpus.len() >= CORPUS_TARGET && good == corpus.len() && pp_ok,
        name: "transfer proofs",
        detail: format!("{good}/{} re-check; push-pull: {pp_ok}", corpus.len()),
    }
}

fn refinement(pp: &Pp, outcomes: &[Outcome]) -> Line {
    let corpus = corpus_of(outcomes);
    let good = corpus.iter().filter(|o| o.refinement_rechecks == Ok(true)).count();
    let unsupported = corpus.iter().filter(|o| o.refinement_rechecks.is_err()).count();
    let pp_ok = match &pp.compiled.refinement {
        Ok(d) => {
            let goal = Formula::refine(None, pp.compiled.system.clone(), pp.game());
            check_refinement(&pp.ctx, d, &goal).fully_discharged()
        }
        Err(_) => false,
    };
    Line {
        ok: corpus.len() >= CORPUS_TARGET && good == corpus.len() && pp_ok,
        name: "refinement certificates",
        detail: format!("{good}/{} re-check ({unsupported} not synthesized); push-pull: {pp_ok}", corpus.len()),
    }
}

fn algebraic_laws() -> Line {
    let vars = ["x", "y"];
    let fin = Finite::new(&vars);
    let mut checked = Vec::new();
    let mut outside = Vec::new();
    let mut disagreements = Vec::new();
    for rule in Rule::ALL.into_iter().filter(|r| r.is_mutual()) {
        let needs_ode = rule == Rule::RefDC;
        if needs_ode
            || rule
                .keys()
                .iter()
                .any(|(_, k)| !matches!(k, MetaKind::Game | MetaKind::Formula | MetaKind::Term | MetaKind::Var))
        {
            outside.push(rule.name());
            continue;
        }
        let mut r = rng(0xA1 ^ rule as u64);
        let (mut n, mut attempts) = (0, 0);
        while n < LAW_INSTANCES && attempts < 20 * LAW_INSTANCES {
            attempts += 1;
            let inst: BTreeMap<String, Meta> = rule
                .keys()
                .iter()
                .map(|(k, kind)| {
                    let m = match kind {
                        MetaKind::Game => Meta::Game(finite_game(&mut r, &vars, 3)),
                        MetaKind::Formula => Meta::Formula(finite_formula(&mut r, &vars)),
                        MetaKind::Term => Meta::Term(finite_term(&mut r, &vars)),
                        MetaKind::Var => Meta::Var(Var::plain(vars[r.gen_range(0..vars.len())])),
                        _ => unreachable!(),
                    };
                    (k.to_string(), m)
                })
                .collect();
            let Ok(ri) = apply_rule(rule, Dir::Fwd, &inst) else { continue };
            if !ri.premises.is_empty() {
                continue;
            }
            let Formula::Refine(_, lhs, rhs) = &ri.conclusion else { panic!("{} concludes a refinement", rule.name()) };
            n += 1;
            if !fin.equivalent(lhs, rhs) {
                disagreements.push(format!("{}: {} vs {}", rule.name(), print_game(lhs), print_game(rhs)));
            }
        }
        checked.push((rule.name(), n));
    }
    let short: Vec<_> = checked.iter().filter(|(_, n)| *n < LAW_INSTANCES).collect();
    Line {
        ok: disagreements.is_empty() && short.is_empty() && !checked.is_empty(),
        name: "algebraic laws",
        detail: format!(
            "{} rules x {LAW_INSTANCES} instances, {} disagreements{}{}; outside the two-point domain: {}",
            checked.len(),
            disagreements.len(),
            if short.is_empty() { String::new() } else { format!(", too few instances: {short:?}") },
            disagreements.first().map(|d| format!(", first: {d}")).unwrap_or_default(),
            outside.join(", ")
        ),
    }
}

fn simulator(pp: &Pp) -> Line {
    let mut r = rng(7);
    let scripts: Vec<Script> = (0..SCRIPTS)
        .map(|_| {
            let mut ds = Vec::with_capacity(3 * ROUNDS + 1);
            for _ in 0..ROUNDS {
                ds.push(Decision::Continue);
                ds.push(if r.gen_bool(0.5) { Decision::Left } else { Decision::Right });
                let den = r.gen_range(1..=16);
                ds.push(Decision::Duration(ratio(r.gen_range(0..=den), den)));
            }
            ds.push(Decision::Stop);
            Script::new(ds)
        })
        .collect();
    let init = State::from_pairs([("x", rat(3)), ("x0", rat(3)), ("x_l", rat(0)), ("x_r", rat(10))]);
    let post = pp.post();
    let exact = SimOptions::default();
    let numeric = SimOptions { force_rk4: true, ..SimOptions::default() };
    let gap = |s: &State| -> Rat { s.value("x").expect("x") - s.value("x0").expect("x0") };

    let closed = run_batch(&pp.compiled.system, &init, &scripts, &post, &exact);
    let closed_ok = closed.iter().all(|t| match t {
        Ok(t) => {
            let s = t.final_state().expect("steps ran");
            t.verdict == Verdict::PostconditionHolds && gap(s) == rat(0) && s.is_exact(&Var::plain("x"))
        }
        Err(_) => false,
    });
    let rk = run_batch(&pp.compiled.system, &init, &scripts, &post, &numeric);
    let mut worst = 0f64;
    let rk_ok = rk.iter().all(|t| match t {
        Ok(t) => {
            let g = num_traits::ToPrimitive::to_f64(&gap(t.final_state().expect("steps ran")))
                .unwrap_or(f64::INFINITY)
                .abs();
            worst = worst.max(g);
            t.verdict == Verdict::PostconditionHolds && g <= 1e-9
        }
        Err(_) => false,
    });
    let replay = run_batch(&pp.compiled.system, &init, &scripts, &post, &exact) == closed;
    Line {
        ok: closed_ok && rk_ok && replay,
        name: "simulator",
        detail: format!(
            "{SCRIPTS} scripts x {ROUNDS} rounds: closed form exact {closed_ok}, RK4 max |x - x0| = {worst:e}, replay identical {replay}"
        ),
    }
}

fn infrastructure() -> Line {
    let roundtrip = (0..AST_SAMPLES)
        .into_par_iter()
        .filter(|&seed| {
            let mut r = rng(seed);
            let t = term(&mut r, &VARS, 5);
            let f = formula(&mut r, &VARS, 4);
            let g = game(&mut r, &VARS, 4);
            parse_term(&print_term(&t)).ok() == Some(t)
                && parse_formula(&print_formula(&f)).ok() == Some(f)
                && parse_game(&print_game(&g)).ok() == Some(g)
        })
        .count();
    let involution = (0..AST_SAMPLES)
        .into_par_iter()
        .filter(|&seed| {
            let mut r = rng(seed ^ 0x5EED);
            let t = term(&mut r, &VARS, 5);
            let f = formula(&mut r, &VARS, 4);
            let g = game(&mut r, &VARS, 4);
            let (x, y) = if r.gen_bool(0.5) { ("x", "y") } else { ("z", "w") };
            let rt = |t: &Term| t.map_vars(&|v| transpose(v, x, y));
            rt(&rt(&t)) == t && f.rename(x, y).rename(x, y) == f && g.rename(x, y).rename(x, y) == g
        })
        .count();
    let normal = (0..AST_SAMPLES)
        .into_par_iter()
        .filter(|&seed| {
            let mut r = rng(seed ^ 0xB0B);
            let t = term(&mut r, &VARS, 6);
            let Ok(n) = poly_normalize(&t) else { return false };
            (0..POINTS).all(|_| {
                let pt: BTreeMap<Var, Rat> = point(&mut r, &VARS).into_iter().collect();
                let env = |v: &Var| pt.get(v).cloned();
                eval(&t, &env).ok() == eval(&n, &env).ok()
            })
        })
        .count();
    let n = AST_SAMPLES as usize;
    Line {
        ok: roundtrip == n && involution == n && normal == n,
        name: "infrastructure laws",
        detail: format!(
            "round-trip {roundtrip}/{n}, rename involution {involution}/{n}, poly_normalize {normal}/{n} x {POINTS} points"
        ),
    }
}
