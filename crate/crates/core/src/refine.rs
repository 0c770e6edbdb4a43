//! Refinement derivations.
//!
//! Every calculus rule is a schema over named metavariables.
//! [`apply_rule`] instantiates a schema into its conclusion and the
//! premises it requires, and the checker then discharges each premise with
//! a sub-derivation, a proof term, or an arithmetic obligation.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::kernel::{self, CheckReport, Checker, KernelError, R};
use crate::proof::{Derivation, Dir, Meta, MetaKind, Premise, Rule};
use crate::syntax::{CmpOp, Context, Formula, Game, Ode};
use crate::term::{is_positive, Rat, Term, Var};

/// The context a premise is checked in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CtxSpec {
    Same,
    Empty,
    Replace(Context),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PremiseKind {
    Derivation,
    Proof,
    /// Discharged by arithmetic, not supplied by the derivation.
    Obligation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PremiseSchema {
    pub kind: PremiseKind,
    pub ctx: CtxSpec,
    pub goal: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleInstance {
    pub conclusion: Formula,
    pub premises: Vec<PremiseSchema>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SchemaMismatch {
    #[error("{rule}: missing metavariable `{key}`")]
    MissingKey { rule: &'static str, key: String },
    #[error("{rule}: metavariable `{key}` must be a {expected:?}")]
    WrongKind { rule: &'static str, key: String, expected: MetaKind },
    #[error("{rule}: unknown metavariable `{key}`")]
    UnknownKey { rule: &'static str, key: String },
    #[error("{rule} is not a mutual refinement and takes no direction")]
    Direction { rule: &'static str },
    #[error("{rule}: {detail}")]
    SideCondition { rule: &'static str, detail: String },
}

fn kind_of(m: &Meta) -> MetaKind {
    match m {
        Meta::Game(_) => MetaKind::Game,
        Meta::Formula(_) => MetaKind::Formula,
        Meta::Term(_) => MetaKind::Term,
        Meta::Var(_) => MetaKind::Var,
        Meta::Name(_) => MetaKind::Name,
        Meta::Rat(_) => MetaKind::Rat,
        Meta::Sln(_) => MetaKind::Sln,
    }
}

struct Inst<'a> {
    rule: &'static str,
    map: &'a BTreeMap<String, Meta>,
}

impl Inst<'_> {
    fn game(&self, k: &str) -> Game {
        match &self.map[k] {
            Meta::Game(g) => g.clone(),
            _ => unreachable!("kinds are validated"),
        }
    }

    fn formula(&self, k: &str) -> Formula {
        match &self.map[k] {
            Meta::Formula(f) => f.clone(),
            _ => unreachable!("kinds are validated"),
        }
    }

    fn term(&self, k: &str) -> Term {
        match &self.map[k] {
            Meta::Term(t) => t.clone(),
            _ => unreachable!("kinds are validated"),
        }
    }

    fn var(&self, k: &str) -> Var {
        match &self.map[k] {
            Meta::Var(v) => v.clone(),
            _ => unreachable!("kinds are validated"),
        }
    }

    fn name(&self, k: &str) -> String {
        match &self.map[k] {
            Meta::Name(n) => n.clone(),
            _ => unreachable!("kinds are validated"),
        }
    }

    fn rat(&self, k: &str) -> Rat {
        match &self.map[k] {
            Meta::Rat(q) => q.clone(),
            _ => unreachable!("kinds are validated"),
        }
    }

    fn sln(&self, k: &str) -> Vec<(String, Term)> {
        match &self.map[k] {
            Meta::Sln(s) => s.clone(),
            _ => unreachable!("kinds are validated"),
        }
    }

    fn side<T>(&self, detail: impl Into<String>) -> Result<T, SchemaMismatch> {
        Err(SchemaMismatch::SideCondition { rule: self.rule, detail: detail.into() })
    }

    fn ode<'g>(&self, g: &'g Game) -> Result<&'g Ode, SchemaMismatch> {
        match g {
            Game::Ode(o) => Ok(o),
            _ => self.side(format!("{g} is not a differential equation")),
        }
    }

    fn system(&self, g: &Game) -> Result<(), SchemaMismatch> {
        if g.is_system() {
            Ok(())
        } else {
            self.side(format!("{g} is not a hybrid system"))
        }
    }
}

fn r(a: Game, b: Game) -> Formula {
    Formula::refine(None, a, b)
}

fn d(a: Game) -> Game {
    Game::dual(a)
}

fn premise(kind: PremiseKind, ctx: CtxSpec, goal: Formula) -> PremiseSchema {
    PremiseSchema { kind, ctx, goal }
}

fn deriv(goal: Formula) -> PremiseSchema {
    premise(PremiseKind::Derivation, CtxSpec::Same, goal)
}

fn proof(goal: Formula) -> PremiseSchema {
    premise(PremiseKind::Proof, CtxSpec::Same, goal)
}

fn oblige(goal: Formula) -> PremiseSchema {
    premise(PremiseKind::Obligation, CtxSpec::Same, goal)
}

fn test(f: Formula) -> Game {
    Game::test(f)
}

/// Instantiates a rule schema.
pub fn apply_rule(rule: Rule, dir: Dir, inst: &BTreeMap<String, Meta>) -> Result<RuleInstance, SchemaMismatch> {
    let name = rule.name();
    for (k, kind) in rule.keys() {
        match inst.get(*k) {
            None => return Err(SchemaMismatch::MissingKey { rule: name, key: k.to_string() }),
            Some(m) if kind_of(m) != *kind => {
                return Err(SchemaMismatch::WrongKind { rule: name, key: k.to_string(), expected: *kind })
            }
            Some(_) => {}
        }
    }
    if let Some(k) = inst.keys().find(|k| !rule.keys().iter().any(|(k2, _)| k2 == k)) {
        return Err(SchemaMismatch::UnknownKey { rule: name, key: k.clone() });
    }
    if !rule.is_mutual() && dir != Dir::Fwd {
        return Err(SchemaMismatch::Direction { rule: name });
    }
    let i = Inst { rule: name, map: inst };
    let one = |conclusion: Formula, premises: Vec<PremiseSchema>| Ok(RuleInstance { conclusion, premises });
    let mutual = |lhs: Game, rhs: Game, premises: Vec<PremiseSchema>| {
        let conclusion = match dir {
            Dir::Fwd => r(lhs, rhs),
            Dir::Rev => r(rhs, lhs),
            Dir::Both => Formula::and(r(lhs.clone(), rhs.clone()), r(rhs, lhs)),
        };
        Ok(RuleInstance { conclusion, premises })
    };
    match rule {
        Rule::DiamondRef => {
            let (a, b, p) = (i.game("a"), i.game("b"), i.formula("p"));
            one(
                Formula::diamond(b.clone(), p.clone()),
                vec![proof(Formula::diamond(a.clone(), p)), deriv(r(d(a), d(b)))],
            )
        }
        Rule::BoxRef => {
            let (a, b, p) = (i.game("a"), i.game("b"), i.formula("p"));
            one(Formula::boxf(b.clone(), p.clone()), vec![proof(Formula::boxf(a.clone(), p)), deriv(r(a, b))])
        }
        Rule::ArefTest => {
            let (p, q) = (i.formula("p"), i.formula("q"));
            one(r(d(test(p.clone())), d(test(q.clone()))), vec![proof(Formula::implies(p, q))])
        }
        Rule::DrefTest => {
            let (p, q) = (i.formula("p"), i.formula("q"));
            one(r(test(p.clone()), test(q.clone())), vec![proof(Formula::implies(q, p))])
        }
        Rule::ArefRand => {
            let (x, f) = (i.var("x"), i.term("f"));
            one(r(d(Game::Assign(x.clone(), f)), d(Game::NondetAssign(x))), vec![])
        }
        Rule::DrefRand => {
            let (x, f) = (i.var("x"), i.term("f"));
            one(r(Game::NondetAssign(x.clone()), Game::Assign(x, f)), vec![])
        }
        Rule::RefChoiceL1 | Rule::RefChoiceL2 => {
            let (a, b) = (i.game("a"), i.game("b"));
            let pick = if rule == Rule::RefChoiceL1 { a.clone() } else { b.clone() };
            one(r(Game::choice(a, b), pick), vec![])
        }
        Rule::RefChoiceR => {
            let (a, b, c) = (i.game("a"), i.game("b"), i.game("c"));
            one(r(a.clone(), Game::choice(b.clone(), c.clone())), vec![deriv(r(a.clone(), b)), deriv(r(a, c))])
        }
        Rule::ArefChoiceR1 | Rule::ArefChoiceR2 => {
            let (a, b) = (i.game("a"), i.game("b"));
            let pick = if rule == Rule::ArefChoiceR1 { a.clone() } else { b.clone() };
            one(r(d(pick), d(Game::choice(a, b))), vec![])
        }
        Rule::ArefChoiceL => {
            let (a, b, c) = (i.game("a"), i.game("b"), i.game("c"));
            one(r(d(Game::choice(a.clone(), b.clone())), c.clone()), vec![deriv(r(d(a), c.clone())), deriv(r(d(b), c))])
        }
        Rule::RefSeq | Rule::RefSeqG => {
            let (a1, a2, b1, b2) = (i.game("a1"), i.game("a2"), i.game("b1"), i.game("b2"));
            let second = if rule == Rule::RefSeq {
                i.system(&a1)?;
                proof(Formula::boxf(a1.clone(), r(b1.clone(), b2.clone())))
            } else {
                premise(PremiseKind::Derivation, CtxSpec::Empty, r(b1.clone(), b2.clone()))
            };
            one(r(Game::seq(a1.clone(), b1), Game::seq(a2.clone(), b2)), vec![deriv(r(a1, a2)), second])
        }
        Rule::RefUnloop => {
            let (a, b) = (i.game("a"), i.game("b"));
            i.system(&a)?;
            one(
                r(Game::repeat(a.clone()), Game::repeat(b.clone())),
                vec![proof(Formula::boxf(Game::repeat(a.clone()), r(a, b)))],
            )
        }
        Rule::UnrollL => {
            let a = i.game("a");
            mutual(Game::choice(Game::skip(), Game::seq(a.clone(), Game::repeat(a.clone()))), Game::repeat(a), vec![])
        }
        Rule::UnrollLd => {
            let a = i.game("a");
            mutual(
                d(Game::choice(Game::skip(), Game::seq(a.clone(), Game::repeat(a.clone())))),
                d(Game::repeat(a)),
                vec![],
            )
        }
        Rule::DualSkip => mutual(d(Game::skip()), Game::skip(), vec![]),
        Rule::DualSeq => {
            let (a, b) = (i.game("a"), i.game("b"));
            mutual(d(Game::seq(a.clone(), b.clone())), Game::seq(d(a), d(b)), vec![])
        }
        Rule::DualAssign => {
            let (x, f) = (i.var("x"), i.term("f"));
            mutual(d(Game::Assign(x.clone(), f.clone())), Game::Assign(x, f), vec![])
        }
        Rule::DualDNE => {
            let a = i.game("a");
            mutual(d(d(a.clone())), a, vec![])
        }
        Rule::RefTrans => {
            let (a, b, c) = (i.game("a"), i.game("b"), i.game("c"));
            one(r(a.clone(), c.clone()), vec![deriv(r(a, b.clone())), deriv(r(b, c))])
        }
        Rule::RefRefl => {
            let a = i.game("a");
            one(r(a.clone(), a), vec![])
        }
        Rule::SeqIdL => {
            let a = i.game("a");
            mutual(Game::seq(Game::skip(), a.clone()), a, vec![])
        }
        Rule::SeqIdR => {
            let a = i.game("a");
            mutual(Game::seq(a.clone(), Game::skip()), a, vec![])
        }
        Rule::AnnihL => {
            let a = i.game("a");
            mutual(Game::seq(test(Formula::ff()), a), test(Formula::ff()), vec![])
        }
        Rule::NopAssign => {
            let x = i.var("x");
            mutual(Game::Assign(x.clone(), x.to_term()), Game::skip(), vec![])
        }
        Rule::SeqDistR => {
            let (a, b, c) = (i.game("a"), i.game("b"), i.game("c"));
            mutual(
                Game::seq(Game::choice(a.clone(), b.clone()), c.clone()),
                Game::choice(Game::seq(a, c.clone()), Game::seq(b, c)),
                vec![],
            )
        }
        Rule::SeqAssoc => {
            let (a, b, c) = (i.game("a"), i.game("b"), i.game("c"));
            mutual(Game::seq(Game::seq(a.clone(), b.clone()), c.clone()), Game::seq(a, Game::seq(b, c)), vec![])
        }
        Rule::AssignCancel => {
            let (x, f, g) = (i.var("x"), i.term("f"), i.term("g"));
            if g.vars().contains(&x) {
                return i.side(format!("{g} reads {x}"));
            }
            mutual(
                Game::seq(Game::Assign(x.clone(), f), Game::Assign(x.clone(), g.clone())),
                Game::Assign(x, g),
                vec![],
            )
        }
        Rule::ChoiceAssoc => {
            let (a, b, c) = (i.game("a"), i.game("b"), i.game("c"));
            mutual(
                Game::choice(Game::choice(a.clone(), b.clone()), c.clone()),
                Game::choice(a, Game::choice(b, c)),
                vec![],
            )
        }
        Rule::ChoiceComm => {
            let (a, b) = (i.game("a"), i.game("b"));
            mutual(Game::choice(a.clone(), b.clone()), Game::choice(b, a), vec![])
        }
        Rule::ChoiceIdem => {
            let a = i.game("a");
            mutual(Game::choice(a.clone(), a.clone()), a, vec![])
        }
        Rule::TestChoice => {
            let (p, q) = (i.formula("p"), i.formula("q"));
            mutual(Game::choice(test(p.clone()), test(q.clone())), test(Formula::or(p, q)), vec![])
        }
        Rule::RefDC => {
            let (a, p) = (i.game("a"), i.formula("p"));
            let o = i.ode(&a)?;
            let cut = Game::Ode(Ode {
                eqs: o.eqs.clone(),
                constraint: Box::new(Formula::and((*o.constraint).clone(), p.clone())),
            });
            mutual(a.clone(), cut, vec![proof(Formula::boxf(a, p))])
        }
        Rule::RefDW => {
            let a = i.game("a");
            let o = i.ode(&a)?;
            let mut games: Vec<Game> = o.vars().map(|x| Game::random(x)).collect();
            games.extend(o.eqs.iter().map(|(x, f)| Game::Assign(Var::prime(x), f.clone())));
            games.push(test((*o.constraint).clone()));
            one(r(Game::seq_all(games), a.clone()), vec![])
        }
        Rule::RefSolve => {
            let (a, s, dur, sln) = (i.game("a"), i.name("s"), i.term("d"), i.sln("sln"));
            let o = i.ode(&a)?;
            if let Err(e) = kernel::check_sln_shape(o, &s, &sln) {
                return i.side(e);
            }
            if a.all_vars().iter().any(|v| v.name == s) {
                return i.side(format!("time variable {s} occurs in {a}"));
            }
            if dur.mentions_primed() || dur.vars().iter().any(|v| v.name == s || o.vars().any(|x| *x == v.name)) {
                return i.side("duration must not mention the time, ODE variables or primes");
            }
            let mut games: Vec<Game> =
                kernel::dsolve_final(&s, &dur, &sln).into_iter().map(|(x, f)| Game::assign(&x, f)).collect();
            games.extend(o.eqs.iter().map(|(x, f)| Game::Assign(Var::prime(x), f.clone())));
            let mut premises = vec![proof(kernel::dsolve_dom(o, &s, &dur, &sln))];
            premises.push(oblige(Formula::cmp(CmpOp::Ge, dur.clone(), Term::zero())));
            match kernel::solution_claims(o, &s, &sln) {
                Ok(claims) => premises.extend(claims.into_iter().map(oblige)),
                Err(e) => return i.side(e),
            }
            one(r(Game::seq_all(games), d(a.clone())), premises)
        }
        Rule::RefDG => {
            let (a, y, y0, ca, cb) = (i.game("a"), i.name("y"), i.term("y0"), i.term("ca"), i.term("cb"));
            let o = i.ode(&a)?;
            if a.all_vars().iter().any(|v| v.name == y) {
                return i.side(format!("{y} occurs in {a}"));
            }
            for t in [&y0, &ca, &cb] {
                if t.mentions_primed() || t.vars().iter().any(|v| v.name == y) {
                    return i.side(format!("{t} must not mention {y} or primes"));
                }
            }
            let mut eqs = o.eqs.clone();
            eqs.push((y.clone(), Term::add(Term::mul(ca, Term::var(&y)), cb)));
            let ghosted = Game::Ode(Ode { eqs, constraint: o.constraint.clone() });
            let forget = d(Game::seq(Game::random(&y), Game::NondetAssign(Var::prime(&y))));
            one(r(Game::seq(Game::assign(&y, y0), ghosted), Game::seq(a.clone(), forget)), vec![])
        }
        Rule::LoopInline => {
            let (a, sigma, m, j) = (i.game("a"), i.game("sigma"), i.term("m"), i.formula("j"));
            let (m0, eps, p, q) = (i.name("m0"), i.rat("eps"), i.name("p"), i.name("q"));
            i.system(&sigma)?;
            if !is_positive(&eps) {
                return i.side("eps must be positive");
            }
            if p == q {
                return i.side("labels must differ");
            }
            if m.mentions_primed() {
                return i.side("metric must not mention primes");
            }
            let mut used = kernel::used_names(&Context::new(), &[&j], &[&m]);
            used.extend(a.all_vars().into_iter().map(|v| v.name));
            used.extend(sigma.all_vars().into_iter().map(|v| v.name));
            if used.contains(&m0) {
                return i.side(format!("`{m0}` is not fresh"));
            }
            let step_ctx = Context::from_entries(vec![(p.clone(), j.clone()), (q, kernel::for_step_hyp(&m0, &m))]);
            let positive = test(Formula::cmp(CmpOp::Gt, m.clone(), Term::zero()));
            let lhs = Game::seq(Game::repeat(Game::seq(positive, sigma.clone())), test(kernel::for_post_hyp(&m)));
            one(
                r(lhs, d(Game::repeat(a.clone()))),
                vec![
                    proof(j.clone()),
                    premise(
                        PremiseKind::Proof,
                        CtxSpec::Replace(step_ctx.clone()),
                        Formula::boxf(sigma.clone(), kernel::for_step_post(&j, &m, &eps, &m0)),
                    ),
                    premise(PremiseKind::Derivation, CtxSpec::Replace(step_ctx), r(sigma, d(a))),
                    premise(
                        PremiseKind::Obligation,
                        CtxSpec::Replace(Context::from_entries(vec![(p, j)])),
                        Formula::cmp(CmpOp::Ge, m, Term::zero()),
                    ),
                ],
            )
        }
        Rule::SysK | Rule::SysKd | Rule::SysBoxAnd => {
            let (a, p, q) = (i.game("a"), i.formula("p"), i.formula("q"));
            i.system(&a)?;
            let bx = |f: Formula| Formula::boxf(a.clone(), f);
            let conclusion = match rule {
                Rule::SysK => {
                    Formula::implies(bx(Formula::implies(p.clone(), q.clone())), Formula::implies(bx(p), bx(q)))
                }
                Rule::SysKd => Formula::implies(
                    bx(Formula::implies(p.clone(), q.clone())),
                    Formula::implies(Formula::diamond(a.clone(), p), Formula::diamond(a.clone(), q)),
                ),
                _ => Formula::implies(Formula::and(bx(p.clone()), bx(q.clone())), bx(Formula::and(p, q))),
            };
            one(conclusion, vec![])
        }
    }
}

/// Checks a derivation under `ctx` and returns its conclusion.
pub(crate) fn derive(c: &mut Checker, ctx: &Context, dv: &Derivation) -> R<Formula> {
    let name = dv.rule.name();
    let inst = match apply_rule(dv.rule, dv.dir, &dv.inst) {
        Ok(i) => i,
        Err(e) => return c.side(name, e.to_string()),
    };
    let needed = inst.premises.iter().filter(|p| p.kind != PremiseKind::Obligation).count();
    if dv.premises.len() != needed {
        return c.side(name, format!("expects {needed} premises, got {}", dv.premises.len()));
    }
    let mut given = dv.premises.iter();
    for (k, schema) in inst.premises.iter().enumerate() {
        let pctx = match &schema.ctx {
            CtxSpec::Same => ctx.clone(),
            CtxSpec::Empty => Context::new(),
            CtxSpec::Replace(c2) => c.fresh_ctx(name, c2.entries().to_vec())?,
        };
        let seg = format!("{name}.{k}");
        match schema.kind {
            PremiseKind::Obligation => c.oblige(name, &pctx, &schema.goal)?,
            PremiseKind::Derivation => match given.next() {
                Some(Premise::Derivation(sub)) => {
                    let f = c.at(seg, |c| derive(c, &pctx, sub))?;
                    if !f.eq_mod_rank(&schema.goal) {
                        return c.fail(KernelError::GoalMismatch {
                            rule: name.into(),
                            found: f.to_string(),
                            goal: schema.goal.to_string(),
                        });
                    }
                }
                _ => return c.side(name, format!("premise {k} must be a derivation")),
            },
            PremiseKind::Proof => match given.next() {
                Some(Premise::Proof(p)) => c.at(seg, |c| c.check(&pctx, p, &schema.goal))?,
                _ => return c.side(name, format!("premise {k} must be a proof")),
            },
        }
    }
    Ok(inst.conclusion)
}

/// Checks that `dv` derives `goal` under `ctx`.
pub fn check_refinement(ctx: &Context, dv: &Derivation, goal: &Formula) -> CheckReport {
    let mut c = Checker::new();
    let r = derive(&mut c, ctx, dv).and_then(|f| {
        if f.eq_mod_rank(goal) {
            Ok(())
        } else {
            c.fail(KernelError::GoalMismatch {
                rule: dv.rule.name().into(),
                found: f.to_string(),
                goal: goal.to_string(),
            })
        }
    });
    c.report(r)
}

/// The conclusion of `dv` under `ctx`, with the report of checking it.
pub fn derive_conclusion(ctx: &Context, dv: &Derivation) -> (Option<Formula>, CheckReport) {
    let mut c = Checker::new();
    match derive(&mut c, ctx, dv) {
        Ok(f) => (Some(f), c.report(Ok(()))),
        Err(e) => (None, c.report(Err(e))),
    }
}
