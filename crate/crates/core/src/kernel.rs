//! Proof checking.
//!
//! The checker is goal directed: introduction rules are checked against a
//! given goal, while hypotheses and elimination forms infer their
//! conclusion, which is then compared with the goal up to rank annotations.
//! Arithmetic side conditions become [`Obligation`]s that are decided when
//! linear and assumed otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, Status};
use crate::proof::{ForProof, Proof};
use crate::solution;
use crate::syntax::{substitute, transpose_atoms, CmpOp, Context, Formula, Game, Ode};
use crate::term::{differentiate, is_positive, Rat, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum KernelError {
    #[error("{rule} does not apply to {goal}")]
    RuleMismatch { rule: String, goal: String },
    #[error("{rule}: {detail}")]
    SideCondition { rule: String, detail: String },
    #[error("unbound label `{0}`")]
    UnboundLabel(String),
    #[error("the conclusion of {0} cannot be inferred")]
    CannotInfer(String),
    #[error("{rule} proves {found}, expected {goal}")]
    GoalMismatch { rule: String, found: String, goal: String },
    #[error("false arithmetic obligation {0}")]
    FalseObligation(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obligation {
    /// First-order assumptions available to the claim.
    pub context: Context,
    pub claim: Formula,
    pub status: Status,
    /// Rule name and proof path that produced the obligation.
    pub origin: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accepted,
    Rejected { reason: KernelError, path: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub obligations: Vec<Obligation>,
}

impl CheckReport {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }

    pub fn n_assumed(&self) -> usize {
        self.obligations.iter().filter(|o| o.status == Status::Assumed).count()
    }

    /// Accepted with every obligation decided.
    pub fn fully_discharged(&self) -> bool {
        self.accepted() && self.n_assumed() == 0
    }

    /// One `OBLIGATION` line per obligation, then the `VERDICT` line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for o in &self.obligations {
            let status = match o.status {
                Status::Decided(true) => "DECIDED",
                Status::Decided(false) => "REFUTED",
                Status::Assumed => "ASSUMED",
            };
            out.push_str(&format!("OBLIGATION {status} {} ⊢ {}\n", o.origin, o.claim));
        }
        let verdict = if self.accepted() { "ACCEPTED" } else { "REJECTED" };
        out.push_str(&format!("VERDICT {verdict} {}\n", self.n_assumed()));
        out
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// A rejection together with the proof path where it happened.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub reason: KernelError,
    pub path: String,
}

pub(crate) type R<T> = Result<T, Rejection>;

/// A formula added to a context while checking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Introduced {
    pub formula: Formula,
    /// Introduced by a branch of `case`.
    pub case_branch: bool,
}

/// What a traced check saw, for analyses that follow the checker.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub introduced: Vec<Introduced>,
    /// Refinement eliminations as (rank-erased refinement, postcondition).
    pub eliminations: Vec<(Formula, Formula)>,
}

pub struct Checker {
    obligations: Vec<Obligation>,
    path: Vec<String>,
    trace: Option<Trace>,
}

impl Default for Checker {
    fn default() -> Self {
        Checker::new()
    }
}

/// Checks `ctx ⊢ p : goal`.
pub fn check_proof(ctx: &Context, p: &Proof, goal: &Formula) -> CheckReport {
    let mut c = Checker::new();
    let r = c.check(ctx, p, goal);
    c.report(r)
}

/// Like [`check_proof`], also returning what the check traversed.
pub fn check_proof_traced(ctx: &Context, p: &Proof, goal: &Formula) -> (CheckReport, Trace) {
    let mut c = Checker::new();
    c.trace = Some(Trace::default());
    let r = c.check(ctx, p, goal);
    let trace = c.trace.take().unwrap_or_default();
    (c.report(r), trace)
}

/// Infers the conclusion of an inferable proof term.
pub fn infer_proof(ctx: &Context, p: &Proof) -> Result<(Formula, Vec<Obligation>), Rejection> {
    let mut c = Checker::new();
    let f = c.infer(ctx, p)?;
    Ok((f, c.obligations))
}

pub(crate) fn fo_context(ctx: &Context) -> Context {
    Context::from_entries(ctx.entries().iter().filter(|(_, f)| arith::is_first_order(f)).cloned().collect())
}

fn names_of(vars: impl IntoIterator<Item = Var>) -> BTreeSet<String> {
    vars.into_iter().map(|v| v.name).collect()
}

/// Base names of every variable in the given context, formulas and terms.
pub(crate) fn used_names(ctx: &Context, formulas: &[&Formula], terms: &[&Term]) -> BTreeSet<String> {
    let mut s = names_of(ctx.all_vars());
    for f in formulas {
        s.extend(names_of(f.all_vars()));
    }
    for t in terms {
        s.extend(names_of(t.vars()));
    }
    s
}

/// `base_k` for the least `k ≥ 1` not in `used`.
pub fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    (1..).map(|k| format!("{base}_{k}")).find(|n| !used.contains(n)).expect("unbounded")
}

pub fn cmp(op: CmpOp, a: Term, b: Term) -> Formula {
    Formula::cmp(op, a, b)
}

/// Step hypothesis of a convergence proof: `m0 = M ∧ M > 0`.
pub fn for_step_hyp(m0: &str, metric: &Term) -> Formula {
    Formula::and(cmp(CmpOp::Eq, Term::var(m0), metric.clone()), cmp(CmpOp::Gt, metric.clone(), Term::zero()))
}

/// Step postcondition of a convergence proof: `J ∧ M + eps ≤ m0`.
pub fn for_step_post(variant: &Formula, metric: &Term, eps: &Rat, m0: &str) -> Formula {
    Formula::and(variant.clone(), cmp(CmpOp::Le, Term::add(metric.clone(), Term::Lit(eps.clone())), Term::var(m0)))
}

/// Exit hypothesis of a convergence proof: `M = 0`.
pub fn for_post_hyp(metric: &Term) -> Formula {
    cmp(CmpOp::Eq, metric.clone(), Term::zero())
}

fn boxes(games: Vec<Game>, post: Formula) -> Formula {
    games.into_iter().rev().fold(post, |f, g| Formula::boxf(g, f))
}

fn diamonds(games: Vec<Game>, post: Formula) -> Formula {
    games.into_iter().rev().fold(post, |f, g| Formula::diamond(g, f))
}

fn prime_assigns(o: &Ode) -> Vec<Game> {
    o.eqs.iter().map(|(x, f)| Game::Assign(Var::prime(x), f.clone())).collect()
}

fn randoms(o: &Ode) -> Vec<Game> {
    o.vars().map(|x| Game::random(x)).collect()
}

fn sln_assigns(sln: &[(String, Term)]) -> Vec<Game> {
    sln.iter().map(|(x, f)| Game::assign(x, f.clone())).collect()
}

/// Differential of a comparison, or of a conjunction or disjunction of them.
pub fn formula_derivative(f: &Formula) -> Result<Formula, String> {
    if let Formula::Compare(op, a, b) = f {
        let op2 = match op {
            CmpOp::Gt | CmpOp::Ge => CmpOp::Ge,
            CmpOp::Lt | CmpOp::Le => CmpOp::Le,
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ne => return Err("differential invariants cannot use ≠".into()),
        };
        let da = differentiate(a).map_err(|e| e.to_string())?;
        let db = differentiate(b).map_err(|e| e.to_string())?;
        return Ok(cmp(op2, da, db));
    }
    if let Some((a, b)) = f.as_and().or_else(|| f.as_or()) {
        return Ok(Formula::and(formula_derivative(a)?, formula_derivative(b)?));
    }
    Err(format!("{f} is not a comparison, conjunction or disjunction"))
}

/// Induction premise of a differential invariant:
/// `[x:=*][?ψ][x':=f][c':=0](φ)'` for the other variables `c` of `φ`.
pub fn di_premise(o: &Ode, post: &Formula) -> Result<Formula, String> {
    if post.all_vars().iter().any(|v| v.primed) {
        return Err("postcondition mentions a differential symbol".into());
    }
    let d = formula_derivative(post)?;
    let ode_vars: BTreeSet<&String> = o.vars().collect();
    let consts: BTreeSet<String> =
        post.free_vars().into_iter().filter(|v| !ode_vars.contains(&v.name)).map(|v| v.name).collect();
    let mut games = randoms(o);
    games.push(Game::test((*o.constraint).clone()));
    games.extend(prime_assigns(o));
    games.extend(consts.iter().map(|c| Game::Assign(Var::prime(c), Term::zero())));
    Ok(boxes(games, d))
}

/// Weakening premise: `[x:=*][x':=f][?ψ]φ`.
pub fn dw_premise(o: &Ode, post: &Formula) -> Formula {
    let mut games = randoms(o);
    games.extend(prime_assigns(o));
    games.push(Game::test((*o.constraint).clone()));
    boxes(games, post.clone())
}

/// Premise of the box solution rule.
pub fn bsolve_premise(o: &Ode, s: &str, r: &str, sln: &[(String, Term)], post: &Formula) -> Formula {
    let range = Formula::and(cmp(CmpOp::Le, Term::zero(), Term::var(r)), cmp(CmpOp::Le, Term::var(r), Term::var(s)));
    let mut dom_games = vec![Game::random(r), Game::test(range), Game::assign(s, Term::var(r))];
    dom_games.extend(sln_assigns(sln));
    let dom = boxes(dom_games, (*o.constraint).clone());
    let mut games = vec![Game::random(s), Game::test(cmp(CmpOp::Ge, Term::var(s), Term::zero())), Game::test(dom)];
    games.extend(sln_assigns(sln));
    games.extend(prime_assigns(o));
    boxes(games, post.clone())
}

/// Domain premise of the diamond solution rule.
pub fn dsolve_dom(o: &Ode, s: &str, d: &Term, sln: &[(String, Term)]) -> Formula {
    let range = Formula::and(cmp(CmpOp::Le, Term::zero(), Term::var(s)), cmp(CmpOp::Le, Term::var(s), d.clone()));
    Formula::boxf(
        Game::random(s),
        Formula::boxf(Game::test(range), diamonds(sln_assigns(sln), (*o.constraint).clone())),
    )
}

/// The final-state solution assignments `x := sln[s := d]`.
pub fn dsolve_final(s: &str, d: &Term, sln: &[(String, Term)]) -> Vec<(String, Term)> {
    sln.iter().map(|(x, f)| (x.clone(), f.replace(&Var::plain(s), d))).collect()
}

/// Postcondition premise of the diamond solution rule.
pub fn dsolve_post(o: &Ode, s: &str, d: &Term, sln: &[(String, Term)], post: &Formula) -> Formula {
    let mut games = sln_assigns(&dsolve_final(s, d, sln));
    games.extend(prime_assigns(o));
    diamonds(games, post.clone())
}

/// Structural conditions on a solution: it covers exactly the ODE's
/// variables in order, is primed-free, and each component reads no variable
/// assigned before it.
pub fn check_sln_shape(o: &Ode, s: &str, sln: &[(String, Term)]) -> Result<(), String> {
    let xs: Vec<&String> = o.vars().collect();
    let ys: Vec<&String> = sln.iter().map(|(x, _)| x).collect();
    if xs != ys {
        return Err("solution must list the ODE's variables in order".into());
    }
    if xs.iter().any(|x| *x == s) {
        return Err(format!("time variable {s} is an ODE variable"));
    }
    for (j, (_, f)) in sln.iter().enumerate() {
        if f.mentions_primed() {
            return Err("solution mentions a differential symbol".into());
        }
        for (x, _) in &sln[..j] {
            if f.vars().contains(&Var::plain(x)) {
                return Err(format!("solution for {} reads {x}, which is assigned earlier", sln[j].0));
            }
        }
    }
    Ok(())
}

/// Claims that remain for a solution that is not syntactically valid.
pub fn solution_claims(o: &Ode, s: &str, sln: &[(String, Term)]) -> Result<Vec<Formula>, String> {
    let res = solution::residuals(sln, &o.eqs, s).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (flow, at0) in res {
        for r in [flow, at0] {
            if r != Term::zero() {
                out.push(cmp(CmpOp::Eq, r, Term::zero()));
            }
        }
    }
    Ok(out)
}

fn as_ode(g: &Game) -> Option<&Ode> {
    match g {
        Game::Ode(o) => Some(o),
        _ => None,
    }
}

fn is_box(f: &Formula) -> bool {
    matches!(f, Formula::Box(..))
}

fn modality(is_box: bool, g: Game, f: Formula) -> Formula {
    if is_box {
        Formula::boxf(g, f)
    } else {
        Formula::diamond(g, f)
    }
}

pub(crate) fn proof_name(p: &Proof) -> &'static str {
    match p {
        Proof::Hyp(_) => "hyp",
        Proof::InjL(_) => "injL",
        Proof::InjR(_) => "injR",
        Proof::Case { .. } => "case",
        Proof::RepCase { .. } => "rcase",
        Proof::LamReal { .. } => "lamR",
        Proof::LamProof { .. } => "lamP",
        Proof::Pair(..) => "pair",
        Proof::AssignIntro { .. } => "asgn",
        Proof::DAssignIntro { .. } => "dasgn",
        Proof::SeqIntro(_) => "seq",
        Proof::DualIntro(_) => "dual",
        Proof::Rep { .. } => "rep",
        Proof::For(_) => "for",
        Proof::Stop(_) => "stop",
        Proof::Go(_) => "go",
        Proof::FP { .. } => "fp",
        Proof::App(..) => "app",
        Proof::AppTerm(..) => "appt",
        Proof::ProjL(_) => "projL",
        Proof::ProjR(_) => "projR",
        Proof::Unpack { .. } => "unpack",
        Proof::QE { .. } => "qe",
        Proof::Dec { .. } => "dec",
        Proof::Split { .. } => "split",
        Proof::Ghost { .. } => "ghost",
        Proof::Mon { .. } => "mon",
        Proof::DI { .. } => "di",
        Proof::DC { .. } => "dc",
        Proof::DW(_) => "dw",
        Proof::DG { .. } => "dg",
        Proof::BSolve { .. } => "bsolve",
        Proof::DSolve { .. } => "dsolve",
        Proof::SeqElim(_) => "seqE",
        Proof::DualElim(_) => "dualE",
        Proof::AssignElim { .. } => "asgnE",
        Proof::RefProof(_) => "ref",
        Proof::BoxRef { .. } => "boxref",
        Proof::DiamondRef { .. } => "diaref",
    }
}

/// The context after rebinding `x` with ghost name `y`, without freshness
/// checks: unchanged when `y` is `x` itself, otherwise with `x` and `y`
/// transposed. Also returns the ghost when it differs from `x`.
pub fn rebound_context(ctx: &Context, x: &Var, y: &str) -> (Context, Option<Var>) {
    if !x.primed && y == x.name {
        return (ctx.clone(), None);
    }
    let g = Var::plain(y);
    (ctx.map_formulas(|f| f.map_vars(&|v| transpose_atoms(v, x, &g))), Some(g))
}

/// The premise context of an assignment `x := f` introduced with ghost `y`
/// and equation label `label`.
pub fn assign_context(ctx: &Context, x: &Var, y: &str, label: &str, f: &Term) -> Context {
    let (c, g) = rebound_context(ctx, x, y);
    let old = match &g {
        Some(g) => f.map_vars(&|v| transpose_atoms(v, x, g)),
        None => f.clone(),
    };
    c.with(label, cmp(CmpOp::Eq, x.to_term(), old))
}

/// How a variable is rebound by an assignment-like rule.
struct Rebind {
    ctx: Context,
    /// The ghost standing for the old value, when it differs from the target.
    ghost: Option<Var>,
}

impl Rebind {
    fn old(&self, x: &Var, t: &Term) -> Term {
        match &self.ghost {
            Some(y) => t.map_vars(&|v| transpose_atoms(v, x, y)),
            None => t.clone(),
        }
    }

    fn old_formula(&self, x: &Var, f: &Formula) -> Formula {
        match &self.ghost {
            Some(y) => f.map_vars(&|v| transpose_atoms(v, x, y)),
            None => f.clone(),
        }
    }
}

impl Checker {
    pub fn new() -> Checker {
        Checker { obligations: Vec::new(), path: vec!["root".into()], trace: None }
    }

    pub(crate) fn report(self, r: R<()>) -> CheckReport {
        let verdict = match r {
            Ok(()) => Verdict::Accepted,
            Err(Rejection { reason, path }) => Verdict::Rejected { reason, path },
        };
        CheckReport { verdict, obligations: self.obligations }
    }

    fn path(&self) -> String {
        self.path.join("/")
    }

    pub(crate) fn fail<T>(&self, reason: KernelError) -> R<T> {
        Err(Rejection { reason, path: self.path() })
    }

    pub(crate) fn side<T>(&self, rule: &str, detail: impl Into<String>) -> R<T> {
        self.fail(KernelError::SideCondition { rule: rule.into(), detail: detail.into() })
    }

    fn mismatch<T>(&self, rule: &str, goal: &Formula) -> R<T> {
        self.fail(KernelError::RuleMismatch { rule: rule.into(), goal: goal.to_string() })
    }

    pub(crate) fn at<T>(&mut self, seg: String, f: impl FnOnce(&mut Self) -> R<T>) -> R<T> {
        self.path.push(seg);
        let r = f(self);
        self.path.pop();
        r
    }

    fn introduce(&mut self, f: &Formula, case_branch: bool) {
        if let Some(t) = &mut self.trace {
            t.introduced.push(Introduced { formula: f.clone(), case_branch });
        }
    }

    pub(crate) fn extend(&mut self, rule: &str, ctx: &Context, label: &str, f: Formula) -> R<Context> {
        self.extend_as(rule, ctx, label, f, false)
    }

    fn extend_as(&mut self, rule: &str, ctx: &Context, label: &str, f: Formula, case_branch: bool) -> R<Context> {
        if ctx.has_label(label) {
            return self.side(rule, format!("label `{label}` is already in the context"));
        }
        self.introduce(&f, case_branch);
        Ok(ctx.with(label, f))
    }

    pub(crate) fn fresh_ctx(&mut self, rule: &str, entries: Vec<(String, Formula)>) -> R<Context> {
        let mut ctx = Context::new();
        for (l, f) in entries {
            ctx = self.extend(rule, &ctx, &l, f)?;
        }
        Ok(ctx)
    }

    /// Records an arithmetic obligation `FO(ctx) ⊢ claim`.
    pub(crate) fn oblige(&mut self, rule: &str, ctx: &Context, claim: &Formula) -> R<()> {
        let fo = fo_context(ctx);
        let status = match arith::check_arith(&fo, claim) {
            Ok(s) => s,
            Err(e) => return self.side(rule, e.to_string()),
        };
        let origin = format!("{rule}@{}", self.path());
        let refuted = status == Status::Decided(false);
        self.obligations.push(Obligation { context: fo, claim: claim.clone(), status, origin });
        if refuted {
            return self.fail(KernelError::FalseObligation(claim.to_string()));
        }
        Ok(())
    }

    pub(crate) fn record_elimination(&mut self, refinement: &Formula, post: &Formula) {
        if let Some(t) = &mut self.trace {
            t.eliminations.push((refinement.erase_ranks(), post.clone()));
        }
    }

    fn require_fresh(&self, rule: &str, name: &str, used: &BTreeSet<String>) -> R<()> {
        if used.contains(name) {
            return self.side(rule, format!("`{name}` is not fresh"));
        }
        Ok(())
    }

    /// Context for a rule that rebinds `x` with ghost name `y`. When `y` is
    /// `x` itself, `x` must not occur in the context or in `reads`.
    #[allow(clippy::too_many_arguments)]
    fn rebind(
        &self,
        rule: &str,
        ctx: &Context,
        goal: &Formula,
        x: &Var,
        y: &str,
        reads: &[&Term],
        more: &[&Formula],
    ) -> R<Rebind> {
        let ctx_vars = ctx.all_vars();
        if x.primed && ctx_vars.contains(x) {
            return self.side(rule, format!("cannot rebind {x}, which the context mentions"));
        }
        if !x.primed && y == x.name {
            if ctx_vars.contains(x) || reads.iter().any(|t| t.vars().contains(x)) {
                return self.side(rule, format!("ghost `{y}` must differ from {x} here"));
            }
            return Ok(Rebind { ctx: ctx.clone(), ghost: None });
        }
        let mut fs = vec![goal];
        fs.extend_from_slice(more);
        self.require_fresh(rule, y, &used_names(ctx, &fs, reads))?;
        let (ctx, ghost) = rebound_context(ctx, x, y);
        Ok(Rebind { ctx, ghost })
    }

    /// Checks `ctx ⊢ p : goal`.
    pub fn check(&mut self, ctx: &Context, p: &Proof, goal: &Formula) -> R<()> {
        let name = proof_name(p);
        let seg = |i: usize| format!("{name}.{i}");
        match p {
            Proof::InjL(m) | Proof::InjR(m) => match goal {
                Formula::Diamond(g, post) => match &**g {
                    Game::Choice(a, b) => {
                        let pick = if matches!(p, Proof::InjL(_)) { a } else { b };
                        let sub = Formula::diamond((**pick).clone(), (**post).clone());
                        self.at(seg(0), |c| c.check(ctx, m, &sub))
                    }
                    _ => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::Case { scrut, left, lsub, right, rsub } => {
                let s = self.at(seg(0), |c| c.infer(ctx, scrut))?;
                let (a, b, post) = match &s {
                    Formula::Diamond(g, post) => match &**g {
                        Game::Choice(a, b) => (a, b, post),
                        _ => return self.side(name, format!("scrutinee {s} is not an angelic choice")),
                    },
                    _ => return self.side(name, format!("scrutinee {s} is not an angelic choice")),
                };
                if left == right {
                    return self.side(name, "branch labels must differ");
                }
                let lctx = self.extend_as(name, ctx, left, Formula::diamond((**a).clone(), (**post).clone()), true)?;
                self.at(seg(1), |c| c.check(&lctx, lsub, goal))?;
                let rctx = self.extend_as(name, ctx, right, Formula::diamond((**b).clone(), (**post).clone()), true)?;
                self.at(seg(2), |c| c.check(&rctx, rsub, goal))
            }
            Proof::RepCase { scrut, stop, ssub, go, gsub } => {
                let s = self.at(seg(0), |c| c.infer(ctx, scrut))?;
                let (a, post) = match &s {
                    Formula::Diamond(g, post) => match &**g {
                        Game::Repeat(a) => (a, post),
                        _ => return self.side(name, format!("scrutinee {s} is not an angelic loop")),
                    },
                    _ => return self.side(name, format!("scrutinee {s} is not an angelic loop")),
                };
                let sctx = self.extend(name, ctx, stop, (**post).clone())?;
                self.at(seg(1), |c| c.check(&sctx, ssub, goal))?;
                let again = Formula::diamond((**a).clone(), s.clone());
                let gctx = self.extend(name, ctx, go, again)?;
                self.at(seg(2), |c| c.check(&gctx, gsub, goal))
            }
            Proof::LamReal { ghost, sub } => match goal {
                Formula::Box(g, post) => match &**g {
                    Game::NondetAssign(x) => {
                        let rb = self.rebind(name, ctx, goal, x, ghost, &[], &[])?;
                        self.at(seg(0), |c| c.check(&rb.ctx, sub, post))
                    }
                    _ => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::LamProof { label, hyp, sub } => match goal {
                Formula::Box(g, post) => match &**g {
                    Game::Test(a) if a.eq_mod_rank(hyp) => {
                        let c2 = self.extend(name, ctx, label, hyp.clone())?;
                        self.at(seg(0), |c| c.check(&c2, sub, post))
                    }
                    Game::Test(a) => self.side(name, format!("hypothesis {hyp} differs from test {a}")),
                    _ => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::Pair(m, n) => {
                let (l, r) = match goal {
                    Formula::Box(g, post) => match &**g {
                        Game::Choice(a, b) => (
                            Formula::boxf((**a).clone(), (**post).clone()),
                            Formula::boxf((**b).clone(), (**post).clone()),
                        ),
                        Game::Repeat(a) => ((**post).clone(), Formula::boxf((**a).clone(), goal.clone())),
                        _ => return self.mismatch(name, goal),
                    },
                    Formula::Diamond(g, post) => match &**g {
                        Game::Test(a) => ((**a).clone(), (**post).clone()),
                        _ => return self.mismatch(name, goal),
                    },
                    _ => return self.mismatch(name, goal),
                };
                self.at(seg(0), |c| c.check(ctx, m, &l))?;
                self.at(seg(1), |c| c.check(ctx, n, &r))
            }
            Proof::AssignIntro { ghost, target, label, sub } => {
                let (g, post) = match goal {
                    Formula::Box(g, post) | Formula::Diamond(g, post) => (g, post),
                    _ => return self.mismatch(name, goal),
                };
                match &**g {
                    Game::Assign(x, f) if x == target => {
                        self.assign_intro(name, ctx, goal, x, f, ghost, label, sub, post)
                    }
                    _ => self.mismatch(name, goal),
                }
            }
            Proof::DAssignIntro { witness, ghost, label, sub } => match goal {
                Formula::Diamond(g, post) => match &**g {
                    Game::NondetAssign(x) => self.assign_intro(name, ctx, goal, x, witness, ghost, label, sub, post),
                    _ => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::SeqIntro(m) => match goal {
                Formula::Box(g, post) | Formula::Diamond(g, post) => match &**g {
                    Game::Seq(a, b) => {
                        let bx = is_box(goal);
                        let sub = modality(bx, (**a).clone(), modality(bx, (**b).clone(), (**post).clone()));
                        self.at(seg(0), |c| c.check(ctx, m, &sub))
                    }
                    _ => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::DualIntro(m) => match goal {
                Formula::Box(g, post) | Formula::Diamond(g, post) => match &**g {
                    Game::Dual(a) => {
                        let sub = modality(!is_box(goal), (**a).clone(), (**post).clone());
                        self.at(seg(0), |c| c.check(ctx, m, &sub))
                    }
                    _ => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::SeqElim(m) => match goal {
                Formula::Box(a, inner) | Formula::Diamond(a, inner) => {
                    let bx = is_box(goal);
                    match &**inner {
                        Formula::Box(b, post) | Formula::Diamond(b, post) if is_box(inner) == bx => {
                            let sub = modality(bx, Game::seq((**a).clone(), (**b).clone()), (**post).clone());
                            self.at(seg(0), |c| c.check(ctx, m, &sub))
                        }
                        _ => self.infer_and_compare(ctx, p, goal),
                    }
                }
                _ => self.infer_and_compare(ctx, p, goal),
            },
            Proof::DualElim(m) => match goal {
                Formula::Box(a, post) | Formula::Diamond(a, post) => {
                    let sub = modality(!is_box(goal), Game::dual((**a).clone()), (**post).clone());
                    self.at(seg(0), |c| c.check(ctx, m, &sub))
                }
                _ => self.infer_and_compare(ctx, p, goal),
            },
            Proof::Rep { base, step_label, inv, step, post_label, post } => match goal {
                Formula::Box(g, phi) => match &**g {
                    Game::Repeat(a) => {
                        self.at(seg(0), |c| c.check(ctx, base, inv))?;
                        let sctx = self.fresh_ctx(name, vec![(step_label.clone(), inv.clone())])?;
                        let again = Formula::boxf((**a).clone(), inv.clone());
                        self.at(seg(1), |c| c.check(&sctx, step, &again))?;
                        let pctx = self.fresh_ctx(name, vec![(post_label.clone(), inv.clone())])?;
                        self.at(seg(2), |c| c.check(&pctx, post, phi))
                    }
                    _ => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::For(fp) => match goal {
                Formula::Diamond(g, phi) => match &**g {
                    Game::Repeat(a) => self.check_for(ctx, goal, a, phi, fp),
                    _ => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::Stop(m) | Proof::Go(m) => match goal {
                Formula::Diamond(g, phi) => match &**g {
                    Game::Repeat(a) => {
                        let sub = if matches!(p, Proof::Stop(_)) {
                            (**phi).clone()
                        } else {
                            Formula::diamond((**a).clone(), goal.clone())
                        };
                        self.at(seg(0), |c| c.check(ctx, m, &sub))
                    }
                    _ => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::FP { scrut, stop, ssub, go, gsub } => {
                let s = self.at(seg(0), |c| c.infer(ctx, scrut))?;
                let (a, phi) = match &s {
                    Formula::Diamond(g, phi) => match &**g {
                        Game::Repeat(a) => (a, phi),
                        _ => return self.side(name, format!("scrutinee {s} is not an angelic loop")),
                    },
                    _ => return self.side(name, format!("scrutinee {s} is not an angelic loop")),
                };
                let sctx = self.fresh_ctx(name, vec![(stop.clone(), (**phi).clone())])?;
                self.at(seg(1), |c| c.check(&sctx, ssub, goal))?;
                let gctx = self.fresh_ctx(name, vec![(go.clone(), Formula::diamond((**a).clone(), goal.clone()))])?;
                self.at(seg(2), |c| c.check(&gctx, gsub, goal))
            }
            Proof::Unpack { packed, ghost, label, sub } => {
                let s = self.at(seg(0), |c| c.infer(ctx, packed))?;
                let (x, psi) = match &s {
                    Formula::Diamond(g, psi) => match &**g {
                        Game::NondetAssign(x) => (x, psi),
                        _ => return self.side(name, format!("{s} is not an existential")),
                    },
                    _ => return self.side(name, format!("{s} is not an existential")),
                };
                let rb = self.rebind(name, ctx, goal, x, ghost, &[], &[psi])?;
                if rb.ghost.is_none() && goal.all_vars().contains(x) {
                    return self.side(name, format!("ghost `{ghost}` must differ from {x} here"));
                }
                // The witness is a new value of x; the goal keeps the old one.
                let (c2, goal2) = match &rb.ghost {
                    Some(y) => {
                        let swap = |f: &Formula| f.map_vars(&|v| transpose_atoms(v, x, y));
                        (self.extend(name, ctx, label, swap(psi))?, goal.clone())
                    }
                    None => (self.extend(name, ctx, label, (**psi).clone())?, goal.clone()),
                };
                self.at(seg(1), |c| c.check(&c2, sub, &goal2))
            }
            Proof::QE { target, .. } | Proof::Dec { target, .. } => {
                if !target.eq_mod_rank(goal) {
                    return self.fail(KernelError::GoalMismatch {
                        rule: name.into(),
                        found: target.to_string(),
                        goal: goal.to_string(),
                    });
                }
                self.infer(ctx, p).map(|_| ())
            }
            Proof::Split { .. } => self.infer_and_compare(ctx, p, goal),
            Proof::Ghost { var, rhs, label, sub } => {
                self.require_fresh(name, var, &used_names(ctx, &[goal], &[rhs]))?;
                let c2 = self.extend(name, ctx, label, cmp(CmpOp::Eq, Term::var(var), rhs.clone()))?;
                self.at(seg(0), |c| c.check(&c2, sub, goal))
            }
            Proof::Mon { main, mid, label, sub } => {
                let (g, post) = match goal {
                    Formula::Box(g, post) | Formula::Diamond(g, post) => (g, post),
                    _ => return self.mismatch(name, goal),
                };
                let first = modality(is_box(goal), (**g).clone(), mid.clone());
                self.at(seg(0), |c| c.check(ctx, main, &first))?;
                let mut used = used_names(ctx, &[goal, mid], &[]);
                let mut c2 = ctx.clone();
                for n in names_of(g.bound_vars()) {
                    let fresh = fresh_name(&n, &used);
                    used.insert(fresh.clone());
                    c2 = c2.rename(&n, &fresh);
                }
                let c2 = self.extend(name, &c2, label, mid.clone())?;
                self.at(seg(1), |c| c.check(&c2, sub, post))
            }
            Proof::DI { base, step } => match goal {
                Formula::Box(g, post) => match as_ode(g) {
                    Some(o) => {
                        let prem = match di_premise(o, post) {
                            Ok(f) => f,
                            Err(e) => return self.side(name, e),
                        };
                        self.at(seg(0), |c| c.check(ctx, base, post))?;
                        self.at(seg(1), |c| c.check(ctx, step, &prem))
                    }
                    None => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::DC { cut, show, use_ } => match goal {
                Formula::Box(g, post) => match as_ode(g) {
                    Some(o) => {
                        let shown = Formula::boxf((**g).clone(), cut.clone());
                        self.at(seg(0), |c| c.check(ctx, show, &shown))?;
                        let o2 = Ode {
                            eqs: o.eqs.clone(),
                            constraint: Box::new(Formula::and((*o.constraint).clone(), cut.clone())),
                        };
                        let used = Formula::boxf(Game::Ode(o2), (**post).clone());
                        self.at(seg(1), |c| c.check(ctx, use_, &used))
                    }
                    None => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::DW(m) => match goal {
                Formula::Box(g, post) => match as_ode(g) {
                    Some(o) => {
                        let prem = dw_premise(o, post);
                        self.at(seg(0), |c| c.check(ctx, m, &prem))
                    }
                    None => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::DG { var, init, a, b, label, sub } => match goal {
                Formula::Box(g, post) => match as_ode(g) {
                    Some(o) => {
                        self.require_fresh(name, var, &used_names(ctx, &[goal], &[]))?;
                        let y = Var::plain(var);
                        for t in [init, a, b] {
                            if t.vars().iter().any(|v| v.name == *var) || t.mentions_primed() {
                                return self.side(name, format!("{t} must not mention {var} or primes"));
                            }
                        }
                        let mut eqs = o.eqs.clone();
                        eqs.push((var.clone(), Term::add(Term::mul(a.clone(), y.to_term()), b.clone())));
                        let o2 = Ode { eqs, constraint: o.constraint.clone() };
                        let c2 = self.extend(name, ctx, label, cmp(CmpOp::Eq, y.to_term(), init.clone()))?;
                        let sub_goal = Formula::boxf(Game::Ode(o2), (**post).clone());
                        self.at(seg(0), |c| c.check(&c2, sub, &sub_goal))
                    }
                    None => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::BSolve { time, range, sln, sub } => match goal {
                Formula::Box(g, post) => match as_ode(g) {
                    Some(o) => {
                        let used = used_names(ctx, &[goal], &[]);
                        self.require_fresh(name, time, &used)?;
                        self.require_fresh(name, range, &used)?;
                        if time == range {
                            return self.side(name, "time and range variables must differ");
                        }
                        if let Err(e) = check_sln_shape(o, time, sln) {
                            return self.side(name, e);
                        }
                        self.solution_obligations(name, ctx, o, time, sln)?;
                        let prem = bsolve_premise(o, time, range, sln, post);
                        self.at(seg(0), |c| c.check(ctx, sub, &prem))
                    }
                    None => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::DSolve { time, duration, sln, dom, post } => match goal {
                Formula::Diamond(g, phi) => match as_ode(g) {
                    Some(o) => {
                        self.require_fresh(name, time, &used_names(ctx, &[goal], &[duration]))?;
                        if duration.mentions_primed() || duration.vars().iter().any(|v| o.vars().any(|x| *x == v.name))
                        {
                            return self.side(name, "duration must not mention ODE variables or primes");
                        }
                        if let Err(e) = check_sln_shape(o, time, sln) {
                            return self.side(name, e);
                        }
                        self.solution_obligations(name, ctx, o, time, sln)?;
                        self.oblige(name, ctx, &cmp(CmpOp::Ge, duration.clone(), Term::zero()))?;
                        let d = dsolve_dom(o, time, duration, sln);
                        self.at(seg(0), |c| c.check(ctx, dom, &d))?;
                        let q = dsolve_post(o, time, duration, sln, phi);
                        self.at(seg(1), |c| c.check(ctx, post, &q))
                    }
                    None => self.mismatch(name, goal),
                },
                _ => self.mismatch(name, goal),
            },
            Proof::AssignElim { main, ghost, eq_label, label, sub } => {
                let s = self.at(seg(0), |c| c.infer(ctx, main))?;
                let (x, f, phi) = match &s {
                    Formula::Box(g, phi) | Formula::Diamond(g, phi) => match &**g {
                        Game::Assign(x, f) => (x, f, phi),
                        _ => return self.side(name, format!("{s} is not an assignment modality")),
                    },
                    _ => return self.side(name, format!("{s} is not an assignment modality")),
                };
                let rb = self.rebind(name, ctx, goal, x, ghost, &[f], &[phi])?;
                if rb.ghost.is_none() && goal.all_vars().contains(x) {
                    return self.side(name, format!("ghost `{ghost}` must differ from {x} here"));
                }
                let goal2 = rb.old_formula(x, goal);
                let eq = cmp(CmpOp::Eq, x.to_term(), rb.old(x, f));
                let c2 = self.extend(name, &rb.ctx, eq_label, eq)?;
                let c2 = self.extend(name, &c2, label, (**phi).clone())?;
                self.at(seg(1), |c| c.check(&c2, sub, &goal2))
            }
            Proof::BoxRef { main, refinement } | Proof::DiamondRef { main, refinement } => {
                let bx = matches!(p, Proof::BoxRef { .. });
                let (b, phi) = match goal {
                    Formula::Box(b, phi) if bx => (b, phi),
                    Formula::Diamond(b, phi) if !bx => (b, phi),
                    _ => return self.mismatch(name, goal),
                };
                let r = self.at(seg(1), |c| c.infer(ctx, refinement))?;
                let (rank, a) = match &r {
                    Formula::Refine(i, a, b2) => {
                        let (a, b2) = if bx {
                            ((**a).clone(), (**b2).clone())
                        } else {
                            match (&**a, &**b2) {
                                (Game::Dual(a), Game::Dual(b2)) => ((**a).clone(), (**b2).clone()),
                                _ => return self.side(name, format!("{r} is not an angelic refinement")),
                            }
                        };
                        if b2.erase_ranks() != b.erase_ranks() {
                            return self.side(name, format!("{r} does not refine into {b}"));
                        }
                        (*i, a)
                    }
                    _ => return self.side(name, format!("{r} is not a refinement")),
                };
                if let Some(i) = rank {
                    if phi.rank() > i {
                        return self.side(name, format!("postcondition rank {} exceeds {i}", phi.rank()));
                    }
                }
                self.record_elimination(&r, phi);
                let first = modality(bx, a, (**phi).clone());
                self.at(seg(0), |c| c.check(ctx, main, &first))
            }
            // Modus ponens with a literal implication, which need not be inferable.
            Proof::App(m, n) if matches!(&**m, Proof::LamProof { .. }) => {
                let Proof::LamProof { hyp, .. } = &**m else { unreachable!() };
                let imp = Formula::implies(hyp.clone(), goal.clone());
                self.at(seg(0), |c| c.check(ctx, m, &imp))?;
                self.at(seg(1), |c| c.check(ctx, n, hyp))
            }
            Proof::Hyp(_)
            | Proof::App(..)
            | Proof::AppTerm(..)
            | Proof::ProjL(_)
            | Proof::ProjR(_)
            | Proof::RefProof(_) => self.infer_and_compare(ctx, p, goal),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_intro(
        &mut self,
        name: &str,
        ctx: &Context,
        goal: &Formula,
        x: &Var,
        f: &Term,
        ghost: &str,
        label: &str,
        sub: &Proof,
        post: &Formula,
    ) -> R<()> {
        let rb = self.rebind(name, ctx, goal, x, ghost, &[f], &[])?;
        let eq = cmp(CmpOp::Eq, x.to_term(), rb.old(x, f));
        let c2 = self.extend(name, &rb.ctx, label, eq)?;
        self.at(format!("{name}.0"), |c| c.check(&c2, sub, post))
    }

    fn check_for(&mut self, ctx: &Context, goal: &Formula, a: &Game, phi: &Formula, fp: &ForProof) -> R<()> {
        let name = "for";
        if !is_positive(&fp.eps) {
            return self.side(name, "eps must be positive");
        }
        let used = used_names(ctx, &[goal, &fp.variant], &[&fp.metric]);
        self.require_fresh(name, &fp.ghost, &used)?;
        if fp.metric.mentions_primed() {
            return self.side(name, "metric must not mention primes");
        }
        self.at("for.0".into(), |c| c.check(ctx, &fp.base, &fp.variant))?;
        let (p, q) = &fp.step_labels;
        let sctx = self
            .fresh_ctx(name, vec![(p.clone(), fp.variant.clone()), (q.clone(), for_step_hyp(&fp.ghost, &fp.metric))])?;
        let step_goal = Formula::diamond(a.clone(), for_step_post(&fp.variant, &fp.metric, &fp.eps, &fp.ghost));
        self.at("for.1".into(), |c| c.check(&sctx, &fp.step, &step_goal))?;
        let (p2, q2) = &fp.post_labels;
        let pctx =
            self.fresh_ctx(name, vec![(p2.clone(), fp.variant.clone()), (q2.clone(), for_post_hyp(&fp.metric))])?;
        self.at("for.2".into(), |c| c.check(&pctx, &fp.post, phi))?;
        let jctx = Context::from_entries(vec![(p.clone(), fp.variant.clone())]);
        self.oblige("METRIC-EPSILON", &jctx, &cmp(CmpOp::Ge, fp.metric.clone(), Term::zero()))
    }

    pub(crate) fn solution_obligations(
        &mut self,
        rule: &str,
        ctx: &Context,
        o: &Ode,
        s: &str,
        sln: &[(String, Term)],
    ) -> R<()> {
        let claims = match solution_claims(o, s, sln) {
            Ok(c) => c,
            Err(e) => return self.side(rule, e),
        };
        for c in claims {
            self.oblige(rule, ctx, &c)?;
        }
        Ok(())
    }

    fn infer_and_compare(&mut self, ctx: &Context, p: &Proof, goal: &Formula) -> R<()> {
        let f = self.infer(ctx, p)?;
        if f.eq_mod_rank(goal) {
            Ok(())
        } else {
            self.fail(KernelError::GoalMismatch {
                rule: proof_name(p).into(),
                found: f.to_string(),
                goal: goal.to_string(),
            })
        }
    }

    /// Infers the conclusion of a hypothesis or elimination form.
    pub fn infer(&mut self, ctx: &Context, p: &Proof) -> R<Formula> {
        let name = proof_name(p);
        let seg = |i: usize| format!("{name}.{i}");
        match p {
            Proof::Hyp(l) => match ctx.get(l) {
                Some(f) => Ok(f.clone()),
                None => self.fail(KernelError::UnboundLabel(l.clone())),
            },
            Proof::App(m, n) => {
                let f = self.at(seg(0), |c| c.infer(ctx, m))?;
                match &f {
                    Formula::Box(g, post) => match &**g {
                        Game::Test(a) => {
                            self.at(seg(1), |c| c.check(ctx, n, a))?;
                            Ok((**post).clone())
                        }
                        _ => self.side(name, format!("{f} is not an implication")),
                    },
                    _ => self.side(name, format!("{f} is not an implication")),
                }
            }
            Proof::AppTerm(m, t) => {
                let f = self.at(seg(0), |c| c.infer(ctx, m))?;
                match &f {
                    Formula::Box(g, post) => match &**g {
                        Game::NondetAssign(x) => match substitute(post, x, t) {
                            Ok(r) => Ok(r),
                            Err(e) => self.side(name, e.to_string()),
                        },
                        _ => self.side(name, format!("{f} is not universal")),
                    },
                    _ => self.side(name, format!("{f} is not universal")),
                }
            }
            Proof::ProjL(m) | Proof::ProjR(m) => {
                let left = matches!(p, Proof::ProjL(_));
                let f = self.at(seg(0), |c| c.infer(ctx, m))?;
                let out = match &f {
                    Formula::Box(g, post) => match &**g {
                        Game::Choice(a, b) => {
                            Some(Formula::boxf(if left { (**a).clone() } else { (**b).clone() }, (**post).clone()))
                        }
                        Game::Repeat(a) => {
                            Some(if left { (**post).clone() } else { Formula::boxf((**a).clone(), f.clone()) })
                        }
                        _ => None,
                    },
                    Formula::Diamond(g, post) => match &**g {
                        Game::Test(a) => Some(if left { (**a).clone() } else { (**post).clone() }),
                        _ => None,
                    },
                    _ => None,
                };
                match out {
                    Some(r) => Ok(r),
                    None => self.side(name, format!("{f} is not a pair")),
                }
            }
            Proof::SeqElim(m) => {
                let f = self.at(seg(0), |c| c.infer(ctx, m))?;
                match &f {
                    Formula::Box(g, post) | Formula::Diamond(g, post) => match &**g {
                        Game::Seq(a, b) => {
                            let bx = is_box(&f);
                            Ok(modality(bx, (**a).clone(), modality(bx, (**b).clone(), (**post).clone())))
                        }
                        _ => self.side(name, format!("{f} is not a sequence modality")),
                    },
                    _ => self.side(name, format!("{f} is not a sequence modality")),
                }
            }
            Proof::DualElim(m) => {
                let f = self.at(seg(0), |c| c.infer(ctx, m))?;
                match &f {
                    Formula::Box(g, post) | Formula::Diamond(g, post) => match &**g {
                        Game::Dual(a) => Ok(modality(!is_box(&f), (**a).clone(), (**post).clone())),
                        _ => self.side(name, format!("{f} is not a dual modality")),
                    },
                    _ => self.side(name, format!("{f} is not a dual modality")),
                }
            }
            Proof::QE { target, .. } | Proof::Dec { target, .. } => {
                let sub: Option<&Proof> = match p {
                    Proof::QE { sub, .. } => sub.as_deref(),
                    Proof::Dec { sub, .. } => Some(sub),
                    _ => None,
                };
                if !arith::is_first_order(target) {
                    return self.side(name, format!("{target} is not first-order"));
                }
                if matches!(p, Proof::Dec { .. }) && target.as_or_shape().is_none() {
                    return self.side(name, format!("{target} is not a disjunction"));
                }
                let mut octx = ctx.clone();
                if let Some(s) = sub {
                    let rho = self.at(seg(0), |c| c.infer(ctx, s))?;
                    if !arith::is_first_order(&rho) {
                        return self.side(name, format!("{rho} is not first-order"));
                    }
                    let used: BTreeSet<String> = ctx.entries().iter().map(|(l, _)| l.clone()).collect();
                    let l = fresh_name("_arith", &used);
                    octx = octx.with(&l, rho);
                }
                self.oblige(name, &octx, target)?;
                Ok(target.clone())
            }
            Proof::Split { left, right, eps, sub } => {
                self.at(seg(0), |c| c.check(ctx, sub, &cmp(CmpOp::Gt, eps.clone(), Term::zero())))?;
                Ok(Formula::or(
                    cmp(CmpOp::Gt, left.clone(), right.clone()),
                    cmp(CmpOp::Lt, left.clone(), Term::add(right.clone(), eps.clone())),
                ))
            }
            Proof::RefProof(d) => crate::refine::derive(self, ctx, d),
            _ => self.fail(KernelError::CannotInfer(name.into())),
        }
    }
}

/// Error from [`infer_ranks`].
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RankInferenceError {
    #[error("proof is not accepted: {0}")]
    NotAccepted(String),
    #[error("refinement {refinement} is annotated {annotated} but needs rank {needed}")]
    TooLow { refinement: String, annotated: u32, needed: u32 },
    #[error("refinement ranks do not stabilize")]
    Cyclic,
}

/// Annotates every unannotated refinement in the goal and proof with the
/// least rank that covers its games and every postcondition it is
/// eliminated with.
pub fn infer_ranks(ctx: &Context, p: &Proof, goal: &Formula) -> Result<(Proof, Formula), RankInferenceError> {
    let (report, trace) = check_proof_traced(ctx, p, goal);
    if let Verdict::Rejected { reason, path } = &report.verdict {
        return Err(RankInferenceError::NotAccepted(format!("{path}: {reason}")));
    }
    let mut ranks: BTreeMap<Formula, u32> = BTreeMap::new();
    for (r, _) in &trace.eliminations {
        if let Formula::Refine(_, a, b) = r {
            ranks.entry(r.clone()).or_insert(a.rank().max(b.rank()));
        }
    }
    let mut stable = false;
    for _ in 0..64 {
        stable = true;
        for (r, post) in &trace.eliminations {
            let need = annotate(post, &ranks).rank();
            let cur = ranks.get_mut(r).expect("seeded above");
            if need > *cur {
                *cur = need;
                stable = false;
            }
        }
        if stable {
            break;
        }
    }
    if !stable {
        return Err(RankInferenceError::Cyclic);
    }
    for (r, post) in &trace.eliminations {
        let need = annotate(post, &ranks).rank();
        if need > ranks[r] {
            return Err(RankInferenceError::Cyclic);
        }
    }
    check_annotations(goal, &ranks)?;
    for f in p.formulas() {
        check_annotations(f, &ranks)?;
    }
    Ok((p.map_formulas(&|f| annotate(f, &ranks)), annotate(goal, &ranks)))
}

fn check_annotations(f: &Formula, ranks: &BTreeMap<Formula, u32>) -> Result<(), RankInferenceError> {
    let mut err = None;
    visit_refinements(f, &mut |r| {
        if let Formula::Refine(Some(j), ..) = r {
            if let Some(need) = ranks.get(&r.erase_ranks()) {
                if need > j && err.is_none() {
                    err = Some(RankInferenceError::TooLow { refinement: r.to_string(), annotated: *j, needed: *need });
                }
            }
        }
    });
    err.map_or(Ok(()), Err)
}

fn visit_refinements(f: &Formula, k: &mut impl FnMut(&Formula)) {
    match f {
        Formula::Compare(..) => {}
        Formula::Box(g, p) | Formula::Diamond(g, p) => {
            visit_game_refinements(g, k);
            visit_refinements(p, k);
        }
        Formula::Refine(_, a, b) => {
            k(f);
            visit_game_refinements(a, k);
            visit_game_refinements(b, k);
        }
    }
}

fn visit_game_refinements(g: &Game, k: &mut impl FnMut(&Formula)) {
    match g {
        Game::Test(f) => visit_refinements(f, k),
        Game::Ode(o) => visit_refinements(&o.constraint, k),
        Game::Choice(a, b) | Game::Seq(a, b) => {
            visit_game_refinements(a, k);
            visit_game_refinements(b, k);
        }
        Game::Repeat(a) | Game::Dual(a) => visit_game_refinements(a, k),
        Game::Assign(..) | Game::NondetAssign(_) => {}
    }
}

fn annotate(f: &Formula, ranks: &BTreeMap<Formula, u32>) -> Formula {
    match f {
        Formula::Compare(..) => f.clone(),
        Formula::Box(g, p) => Formula::boxf(annotate_game(g, ranks), annotate(p, ranks)),
        Formula::Diamond(g, p) => Formula::diamond(annotate_game(g, ranks), annotate(p, ranks)),
        Formula::Refine(r, a, b) => {
            let a2 = annotate_game(a, ranks);
            let b2 = annotate_game(b, ranks);
            let rank = match r {
                Some(j) => *j,
                None => ranks.get(&f.erase_ranks()).copied().unwrap_or(a2.rank().max(b2.rank())),
            };
            Formula::refine(Some(rank), a2, b2)
        }
    }
}

fn annotate_game(g: &Game, ranks: &BTreeMap<Formula, u32>) -> Game {
    match g {
        Game::Test(f) => Game::test(annotate(f, ranks)),
        Game::Ode(o) => Game::Ode(Ode { eqs: o.eqs.clone(), constraint: Box::new(annotate(&o.constraint, ranks)) }),
        Game::Choice(a, b) => Game::choice(annotate_game(a, ranks), annotate_game(b, ranks)),
        Game::Seq(a, b) => Game::seq(annotate_game(a, ranks), annotate_game(b, ranks)),
        Game::Repeat(a) => Game::repeat(annotate_game(a, ranks)),
        Game::Dual(a) => Game::dual(annotate_game(a, ranks)),
        Game::Assign(..) | Game::NondetAssign(_) => g.clone(),
    }
}
