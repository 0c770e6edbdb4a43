//! Strategy compiler: turns a winning-strategy proof of a game into a
//! dual-free system, together with a proof that the system satisfies the
//! same postcondition and a derivation that it refines the game.
//!
//! The recursion works on a goal `m1 α1 m2 α2 … mk αk φ` whose first `k`
//! modalities form the game list; Demonic modalities contribute `αi`,
//! Angelic ones `αi^d`. A terminal list is represented by `None`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::kernel::{
    assign_context, check_proof_traced, for_post_hyp, for_step_hyp, for_step_post, fresh_name, infer_proof, proof_name,
    rebound_context, used_names,
};
use crate::proof::{Derivation, Dir, ForProof, Meta, Premise, Proof, Rule};
use crate::refine::apply_rule;
use crate::syntax::{CmpOp, Context, Formula, Game, Ode};
use crate::term::{Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InlineError {
    #[error("proof is not accepted: {0}")]
    NotAccepted(String),
    #[error("not in normal shape: {0}")]
    NotNormalForm(String),
    #[error("not system-test: {0}")]
    NotSystemTest(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// A game split at sequential compositions; `Terminal` stands for `?tt`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GameList {
    Terminal,
    Cons(Game, Box<GameList>),
}

impl GameList {
    /// Splits `g` at every top-level sequential composition, reassociating
    /// to the right.
    pub fn from_game(g: &Game) -> GameList {
        fn push(g: &Game, tail: GameList) -> GameList {
            match g {
                Game::Seq(a, b) => push(a, push(b, tail)),
                _ => GameList::Cons(g.clone(), Box::new(tail)),
            }
        }
        push(g, GameList::Terminal)
    }

    pub fn games(&self) -> Vec<&Game> {
        let mut out = Vec::new();
        let mut cur = self;
        while let GameList::Cons(g, rest) = cur {
            out.push(g);
            cur = rest;
        }
        out
    }

    /// The right-nested sequence of the list, `None` when terminal.
    pub fn to_game(&self) -> Option<Game> {
        let gs: Vec<Game> = self.games().into_iter().cloned().collect();
        (!gs.is_empty()).then(|| Game::seq_all(gs))
    }
}

/// A checked, system-test proof of `ctx ⊢ goal` with no detectable
/// β-redexes, paired with the game list of its goal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalShapeProof {
    pub ctx: Context,
    pub proof: Proof,
    pub goal: Formula,
    pub list: GameList,
}

/// The three outputs of compiling one proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compiled {
    pub system: Game,
    /// Proves `ctx ⊢ [system]φ`.
    pub transfer: Proof,
    /// Derives `ctx ⊢ system ≤ α` (or `≤ α^d` for a diamond goal).
    pub refinement: Result<Derivation, InlineError>,
}

/// Whether every modality of `f` is a box over a dual-free game, treating
/// conjunctions and disjunctions of such formulas as allowed.
pub fn is_system_test(f: &Formula) -> bool {
    match f {
        Formula::Compare(..) => true,
        Formula::Refine(..) => false,
        Formula::Box(g, p) => system_test_game(g) && is_system_test(p),
        Formula::Diamond(g, p) => match &**g {
            Game::Test(a) => is_system_test(a) && is_system_test(p),
            Game::Choice(l, r) => match (&**l, &**r) {
                (Game::Test(a), Game::Test(b)) => p.is_tt() && is_system_test(a) && is_system_test(b),
                _ => false,
            },
            _ => false,
        },
    }
}

fn system_test_game(g: &Game) -> bool {
    match g {
        Game::Test(f) => is_system_test(f),
        Game::Assign(..) | Game::NondetAssign(_) => true,
        Game::Ode(o) => is_system_test(&o.constraint),
        Game::Choice(a, b) | Game::Seq(a, b) => system_test_game(a) && system_test_game(b),
        Game::Repeat(a) => system_test_game(a),
        Game::Dual(_) => false,
    }
}

pub fn is_system_test_context(ctx: &Context) -> bool {
    ctx.formulas().all(is_system_test)
}

/// Whether `p` is an accepted proof of `ctx ⊢ goal` in which the context
/// and every formula introduced along the way are system-test.
pub fn is_system_test_proof(ctx: &Context, p: &Proof, goal: &Formula) -> bool {
    system_test_violation(ctx, p, goal).is_ok()
}

fn system_test_violation(ctx: &Context, p: &Proof, goal: &Formula) -> Result<(), InlineError> {
    if let Some(f) = ctx.formulas().find(|f| !is_system_test(f)) {
        return Err(InlineError::NotSystemTest(format!("context formula {f}")));
    }
    let mut rep_case = false;
    p.visit(&mut |q| rep_case |= matches!(q, Proof::RepCase { .. }));
    if rep_case {
        return Err(InlineError::NotSystemTest("case analysis on an Angelic loop".into()));
    }
    let (report, trace) = check_proof_traced(ctx, p, goal);
    if let crate::kernel::Verdict::Rejected { reason, path } = &report.verdict {
        return Err(InlineError::NotAccepted(format!("{reason} at {path}")));
    }
    match trace.introduced.iter().find(|i| !is_system_test(&i.formula)) {
        Some(i) => Err(InlineError::NotSystemTest(format!("introduced formula {}", i.formula))),
        None => Ok(()),
    }
}

/// Validates `p` for inlining: accepted, system-test, and free of the
/// β-redexes an introduction followed by its elimination would form.
pub fn to_normal_shape(ctx: &Context, p: &Proof, goal: &Formula) -> Result<NormalShapeProof, InlineError> {
    let game = match goal {
        Formula::Box(g, _) => (**g).clone(),
        Formula::Diamond(g, _) => Game::dual((**g).clone()),
        _ => return Err(InlineError::NotNormalForm(format!("goal {goal} has no modality"))),
    };
    let mut redex = None;
    p.visit(&mut |q| {
        if redex.is_none() {
            redex = beta_redex(q);
        }
    });
    if let Some(r) = redex {
        return Err(InlineError::NotNormalForm(r));
    }
    let mut layered = None;
    p.visit(&mut |q| {
        if let Proof::BSolve { sln, sub, .. } = q {
            if layered.is_none() {
                layered = solution_layer_violation(sub, 3 + 2 * sln.len());
            }
        }
    });
    if let Some(r) = layered {
        return Err(InlineError::NotNormalForm(r));
    }
    system_test_violation(ctx, p, goal)?;
    Ok(NormalShapeProof { ctx: ctx.clone(), proof: p.clone(), goal: goal.clone(), list: GameList::from_game(&game) })
}

/// The first of `n` solution layers of a solve premise that is not an
/// introduction.
fn solution_layer_violation(p: &Proof, n: usize) -> Option<String> {
    let mut cur = p;
    for _ in 0..n {
        cur = match cur {
            Proof::LamReal { sub, .. } | Proof::LamProof { sub, .. } | Proof::AssignIntro { sub, .. } => sub,
            q => return Some(format!("{} inside the layers of a solve premise", proof_name(q))),
        };
    }
    None
}

fn beta_redex(p: &Proof) -> Option<String> {
    let hit = match p {
        Proof::App(f, _) => matches!(&**f, Proof::LamProof { .. }),
        Proof::AppTerm(f, _) => matches!(&**f, Proof::LamReal { .. }),
        Proof::ProjL(m) | Proof::ProjR(m) => matches!(&**m, Proof::Pair(..)),
        Proof::SeqElim(m) => matches!(&**m, Proof::SeqIntro(_)),
        Proof::DualElim(m) => matches!(&**m, Proof::DualIntro(_)),
        Proof::Case { scrut, .. } => matches!(&**scrut, Proof::InjL(_) | Proof::InjR(_)),
        _ => false,
    };
    hit.then(|| {
        let inner = p.children().first().map(|c| proof_name(c)).unwrap_or("?");
        format!("{} applied to {inner}", proof_name(p))
    })
}

/// The inlined system of a normal-shape proof.
pub fn inline(shape: &NormalShapeProof) -> Result<Game, InlineError> {
    compile(shape).map(|c| c.system)
}

/// A proof of `ctx ⊢ [inline(shape)]φ`.
pub fn synthesize_transfer(shape: &NormalShapeProof) -> Result<Proof, InlineError> {
    compile(shape).map(|c| c.transfer)
}

/// A derivation of `ctx ⊢ inline(shape) ≤ α`.
pub fn synthesize_refinement(shape: &NormalShapeProof) -> Result<Derivation, InlineError> {
    compile(shape)?.refinement
}

/// Inlines a normal-shape proof and synthesizes both certificates.
pub fn compile(shape: &NormalShapeProof) -> Result<Compiled, InlineError> {
    let mut used = used_names(&shape.ctx, &[&shape.goal], &[]);
    used.extend(shape.ctx.entries().iter().map(|(l, _)| l.clone()));
    used.extend(shape.proof.binder_names());
    for f in shape.proof.formulas() {
        used.extend(f.all_vars().into_iter().map(|v| v.name));
    }
    let mut inl = Inliner { used };
    let out = inl.go(&shape.ctx, &shape.proof, &shape.goal, 1)?;
    let transfer = inl.box_sk(&out.game, out.transfer);
    Ok(Compiled { system: sk(&out.game), transfer, refinement: out.refine.map(|r| r.d) })
}

/// One modality of the game list.
#[derive(Clone, Debug)]
struct Elem {
    game: Game,
    angelic: bool,
}

impl Elem {
    fn as_game(&self) -> Game {
        if self.angelic {
            Game::dual(self.game.clone())
        } else {
            self.game.clone()
        }
    }
}

/// A derivation together with the two sides of the refinement it proves.
#[derive(Clone, Debug)]
struct Refn {
    lhs: Game,
    rhs: Game,
    d: Derivation,
}

type Res<T> = Result<T, InlineError>;

struct Out {
    game: Option<Game>,
    /// Proves `[sk(game)]φ`, or `φ` itself when `game` is `None`.
    transfer: Proof,
    /// Derives `sk(game) ≤ sk(list)`.
    refine: Res<Refn>,
}

fn sk(g: &Option<Game>) -> Game {
    g.clone().unwrap_or_else(Game::skip)
}

fn cat(e: Game, rest: &Option<Game>) -> Game {
    match rest {
        None => e,
        Some(r) => Game::seq(e, r.clone()),
    }
}

fn cat_all(items: &[Game], rest: &Option<Game>) -> Option<Game> {
    items.iter().rev().fold(rest.clone(), |acc, g| Some(cat(g.clone(), &acc)))
}

fn lg(elems: &[Elem]) -> Option<Game> {
    let gs: Vec<Game> = elems.iter().map(Elem::as_game).collect();
    cat_all(&gs, &None)
}

/// The first `k` modalities of `goal` and the formula under them.
fn peel(goal: &Formula, k: usize) -> Res<(Vec<Elem>, Formula)> {
    let mut elems = Vec::with_capacity(k);
    let mut cur = goal;
    for _ in 0..k {
        match cur {
            Formula::Box(g, f) => {
                elems.push(Elem { game: (**g).clone(), angelic: false });
                cur = f;
            }
            Formula::Diamond(g, f) => {
                elems.push(Elem { game: (**g).clone(), angelic: true });
                cur = f;
            }
            _ => return Err(InlineError::NotNormalForm(format!("{goal} has fewer than {k} modalities"))),
        }
    }
    Ok((elems, cur.clone()))
}

fn under(goal: &Formula) -> &Formula {
    match goal {
        Formula::Box(_, f) | Formula::Diamond(_, f) => f,
        _ => goal,
    }
}

fn modality(angelic: bool, g: Game, f: Formula) -> Formula {
    if angelic {
        Formula::diamond(g, f)
    } else {
        Formula::boxf(g, f)
    }
}

/// Wraps a proof of `[e][rest]φ` into one of `[e;rest]φ` when `rest` exists.
fn wrap(p: Proof, rest: &Option<Game>) -> Proof {
    if rest.is_some() {
        Proof::seq(p)
    } else {
        p
    }
}

fn mg(g: &Game) -> Meta {
    Meta::Game(g.clone())
}

fn mf(f: &Formula) -> Meta {
    Meta::Formula(f.clone())
}

fn dprem(r: Refn) -> Premise {
    Premise::Derivation(r.d)
}

fn pprem(p: Proof) -> Premise {
    Premise::Proof(p)
}

fn rule(rule: Rule, dir: Dir, inst: Vec<(&str, Meta)>, premises: Vec<Premise>) -> Res<Refn> {
    let mut d = Derivation::new(rule, inst, premises);
    d.dir = dir;
    let ri = apply_rule(rule, dir, &d.inst).map_err(|e| InlineError::Unsupported(e.to_string()))?;
    match ri.conclusion {
        Formula::Refine(_, a, b) => Ok(Refn { lhs: *a, rhs: *b, d }),
        f => Err(InlineError::Unsupported(format!("{} concludes {f}", rule.name()))),
    }
}

fn refl(a: &Game) -> Res<Refn> {
    rule(Rule::RefRefl, Dir::Fwd, vec![("a", mg(a))], vec![])
}

fn trans(r1: Refn, r2: Refn) -> Res<Refn> {
    debug_assert_eq!(r1.rhs, r2.lhs);
    let (a, b, c) = (r1.lhs.clone(), r1.rhs.clone(), r2.rhs.clone());
    rule(Rule::RefTrans, Dir::Fwd, vec![("a", mg(&a)), ("b", mg(&b)), ("c", mg(&c))], vec![dprem(r1), dprem(r2)])
}

/// `a1;b1 ≤ a2;b2` from `a1 ≤ a2` and a context-free `b1 ≤ b2`.
fn seq_g(r1: Refn, r2: Refn) -> Res<Refn> {
    let inst = vec![("a1", mg(&r1.lhs)), ("a2", mg(&r1.rhs)), ("b1", mg(&r2.lhs)), ("b2", mg(&r2.rhs))];
    rule(Rule::RefSeqG, Dir::Fwd, inst, vec![dprem(r1), dprem(r2)])
}

/// `x ∪ y ≤ b ∪ c` from `x ≤ b` and `y ≤ c`.
fn choice_congr(r1: Refn, r2: Refn) -> Res<Refn> {
    let (x, y) = (r1.lhs.clone(), r2.lhs.clone());
    let both = Game::choice(x.clone(), y.clone());
    let (b, c) = (r1.rhs.clone(), r2.rhs.clone());
    let left = trans(rule(Rule::RefChoiceL1, Dir::Fwd, vec![("a", mg(&x)), ("b", mg(&y))], vec![])?, r1)?;
    let right = trans(rule(Rule::RefChoiceL2, Dir::Fwd, vec![("a", mg(&x)), ("b", mg(&y))], vec![])?, r2)?;
    rule(
        Rule::RefChoiceR,
        Dir::Fwd,
        vec![("a", mg(&both)), ("b", mg(&b)), ("c", mg(&c))],
        vec![dprem(left), dprem(right)],
    )
}

/// `cat(e1, i) ≤ cat(e2, l)` from `head : e1 ≤ e2` and a proof of
/// `[e1](sk i ≤ sk l)`.
fn cat_ref(head: Refn, i: &Option<Game>, l: &Option<Game>, tail: Proof) -> Res<Refn> {
    let (e1, e2) = (head.lhs.clone(), head.rhs.clone());
    let inst = vec![("a1", mg(&e1)), ("a2", mg(&e2)), ("b1", mg(&sk(i))), ("b2", mg(&sk(l)))];
    let mut r = rule(Rule::RefSeq, Dir::Fwd, inst, vec![dprem(head), pprem(tail)])?;
    if i.is_none() {
        r = trans(rule(Rule::SeqIdR, Dir::Rev, vec![("a", mg(&e1))], vec![])?, r)?;
    }
    if l.is_none() {
        r = trans(r, rule(Rule::SeqIdR, Dir::Fwd, vec![("a", mg(&e2))], vec![])?)?;
    }
    Ok(r)
}

/// `i ≤ cat(e_to, l)` from `ih : i ≤ cat(e_from, l)` and `e_from ≤ e_to`.
fn head_swap(ih: Refn, de: Refn, l: &Option<Game>) -> Res<Refn> {
    match l {
        None => trans(ih, de),
        Some(l) => trans(ih, seq_g(de, refl(l)?)?),
    }
}

/// `i ≤ cat(e_to, l)` from `ih : i ≤ cat(e1, cat(e2, l))` and `e1;e2 ≤ e_to`.
fn head2_swap(ih: Refn, de: Refn, l: &Option<Game>) -> Res<Refn> {
    match l {
        None => trans(ih, de),
        Some(l) => {
            let (e1, e2) = match &de.lhs {
                Game::Seq(a, b) => ((**a).clone(), (**b).clone()),
                g => return Err(InlineError::Unsupported(format!("{g} is not a sequence"))),
            };
            let assoc = rule(Rule::SeqAssoc, Dir::Rev, vec![("a", mg(&e1)), ("b", mg(&e2)), ("c", mg(l))], vec![])?;
            trans(trans(ih, assoc)?, seq_g(de, refl(l)?)?)
        }
    }
}

/// `cat_all(items, l) ≤ seq_all(items);l`.
fn reassoc(items: &[Game], l: &Game) -> Res<Refn> {
    let rest = &items[1..];
    if rest.is_empty() {
        return refl(&Game::seq(items[0].clone(), l.clone()));
    }
    let ih = reassoc(rest, l)?;
    let s = Game::seq_all(rest.to_vec());
    let step = seq_g(refl(&items[0])?, ih)?;
    let assoc = rule(Rule::SeqAssoc, Dir::Rev, vec![("a", mg(&items[0])), ("b", mg(&s)), ("c", mg(l))], vec![])?;
    trans(step, assoc)
}

/// `cat_all(lhs of ds, l) ≤ cat_all(rhs of ds, l)` for context-free `ds`.
fn list_congr(ds: Vec<Refn>, l: &Option<Game>) -> Res<Refn> {
    let mut it = ds.into_iter().rev();
    let mut acc = match (it.next(), l) {
        (None, _) => return Err(InlineError::Unsupported("empty congruence".into())),
        (Some(d), None) => d,
        (Some(d), Some(l)) => seq_g(d, refl(l)?)?,
    };
    for d in it {
        acc = seq_g(d, acc)?;
    }
    Ok(acc)
}

/// Rebuilds an introduction-form prefix around a new inner proof.
#[derive(Clone, Debug)]
enum Layer {
    Rand(String),
    Test(String, Formula),
    Asgn(String, Var, String),
}

fn rebuild(layers: &[Layer], inner: Proof) -> Proof {
    layers.iter().rev().fold(inner, |p, l| match l {
        Layer::Rand(g) => Proof::lam_real(g, p),
        Layer::Test(label, hyp) => Proof::lam(label, hyp.clone(), p),
        Layer::Asgn(g, x, label) => Proof::asgn(g, x.clone(), label, p),
    })
}

struct Inliner {
    used: BTreeSet<String>,
}

impl Inliner {
    fn fresh(&mut self, base: &str) -> String {
        let n = fresh_name(base, &self.used);
        self.used.insert(n.clone());
        n
    }

    /// Descends `n` Demonic introductions, tracking the context.
    fn peel_layers<'p>(
        &self,
        ctx: &Context,
        p: &'p Proof,
        goal: &Formula,
        n: usize,
    ) -> Res<(Vec<Layer>, Context, &'p Proof, Formula)> {
        let mut layers = Vec::with_capacity(n);
        let (mut ctx, mut p, mut goal) = (ctx.clone(), p, goal.clone());
        for _ in 0..n {
            let (g, post) = match &goal {
                Formula::Box(g, post) => ((**g).clone(), (**post).clone()),
                _ => return Err(InlineError::NotNormalForm(format!("expected a box modality in {goal}"))),
            };
            match (&g, p) {
                (Game::NondetAssign(x), Proof::LamReal { ghost, sub }) => {
                    ctx = rebound_context(&ctx, x, ghost).0;
                    layers.push(Layer::Rand(ghost.clone()));
                    p = sub;
                }
                (Game::Test(_), Proof::LamProof { label, hyp, sub }) => {
                    ctx = ctx.with(label, hyp.clone());
                    layers.push(Layer::Test(label.clone(), hyp.clone()));
                    p = sub;
                }
                (Game::Assign(x, f), Proof::AssignIntro { ghost, target, label, sub }) if x == target => {
                    ctx = assign_context(&ctx, x, ghost, label, f);
                    layers.push(Layer::Asgn(ghost.clone(), x.clone(), label.clone()));
                    p = sub;
                }
                _ => {
                    return Err(InlineError::NotNormalForm(format!(
                        "{} where an introduction for {g} was expected",
                        proof_name(p)
                    )))
                }
            }
            goal = post;
        }
        Ok((layers, ctx, p, goal))
    }

    /// A proof of `[e1;…;ek]φ` from a proof `p` of `[e1]…[ek]φ`.
    fn seq_box(&mut self, p: Proof, elems: &[Elem], post: &Formula) -> Proof {
        if elems.len() == 1 {
            return p;
        }
        let mid = elems[1..].iter().rev().fold(post.clone(), |f, e| Formula::boxf(e.game.clone(), f));
        let label = self.fresh("h");
        let rest = self.seq_box(Proof::hyp(&label), &elems[1..], post);
        Proof::seq(Proof::Mon { main: Box::new(p), mid, label, sub: Box::new(rest) })
    }

    /// `[?tt]φ` from a proof of `φ` when the game is terminal.
    fn box_sk(&mut self, game: &Option<Game>, p: Proof) -> Proof {
        match game {
            Some(_) => p,
            None => {
                let l = self.fresh("t");
                Proof::lam(&l, Formula::tt(), p)
            }
        }
    }

    fn go(&mut self, ctx: &Context, p: &Proof, goal: &Formula, k: usize) -> Res<Out> {
        if k == 0 {
            return Ok(Out { game: None, transfer: p.clone(), refine: refl(&Game::skip()) });
        }
        let (elems, post) = peel(goal, k)?;
        let inner = under(goal);
        let rest = lg(&elems[1..]);
        if let Proof::Case { scrut, left, lsub, right, rsub } = p {
            return self.case(ctx, goal, k, &elems, scrut, (left, lsub), (right, rsub));
        }
        let first = &elems[0];
        match (first.angelic, &first.game, p) {
            (angelic, Game::Assign(x, f), Proof::AssignIntro { ghost, target, label, sub }) if x == target => {
                let c2 = assign_context(ctx, x, ghost, label, f);
                let o = self.go(&c2, sub, inner, k - 1)?;
                let e = Game::Assign(x.clone(), f.clone());
                let transfer = wrap(Proof::asgn(ghost, x.clone(), label, o.transfer), &o.game);
                let refine = o.refine.and_then(|r| {
                    let head = if angelic {
                        rule(
                            Rule::DualAssign,
                            Dir::Rev,
                            vec![("x", Meta::Var(x.clone())), ("f", Meta::Term(f.clone()))],
                            vec![],
                        )?
                    } else {
                        refl(&e)?
                    };
                    let tail = Proof::asgn(ghost, x.clone(), label, Proof::refproof(r.d));
                    cat_ref(head, &o.game, &rest, tail)
                });
                Ok(Out { game: Some(cat(e, &o.game)), transfer, refine })
            }
            (false, Game::NondetAssign(x), Proof::LamReal { ghost, sub }) => {
                let c2 = rebound_context(ctx, x, ghost).0;
                let o = self.go(&c2, sub, inner, k - 1)?;
                let e = Game::NondetAssign(x.clone());
                let transfer = wrap(Proof::lam_real(ghost, o.transfer), &o.game);
                let refine = o
                    .refine
                    .and_then(|r| cat_ref(refl(&e)?, &o.game, &rest, Proof::lam_real(ghost, Proof::refproof(r.d))));
                Ok(Out { game: Some(cat(e, &o.game)), transfer, refine })
            }
            (false, Game::Test(_), Proof::LamProof { label, hyp, sub }) => {
                let o = self.go(&ctx.with(label, hyp.clone()), sub, inner, k - 1)?;
                let e = Game::test(hyp.clone());
                let transfer = wrap(Proof::lam(label, hyp.clone(), o.transfer), &o.game);
                let refine = o.refine.and_then(|r| {
                    cat_ref(refl(&e)?, &o.game, &rest, Proof::lam(label, hyp.clone(), Proof::refproof(r.d)))
                });
                Ok(Out { game: Some(cat(e, &o.game)), transfer, refine })
            }
            (angelic, Game::Seq(a, b), Proof::SeqIntro(m)) => {
                let sub = modality(angelic, (**a).clone(), modality(angelic, (**b).clone(), inner.clone()));
                let o = self.go(ctx, m, &sub, k + 1)?;
                let (a, b) = ((**a).clone(), (**b).clone());
                let refine = o.refine.and_then(|r| {
                    let de = if angelic {
                        rule(Rule::DualSeq, Dir::Rev, vec![("a", mg(&a)), ("b", mg(&b))], vec![])?
                    } else {
                        refl(&Game::seq(a, b))?
                    };
                    head2_swap(r, de, &rest)
                });
                Ok(Out { game: o.game, transfer: o.transfer, refine })
            }
            (angelic, Game::Dual(a), Proof::DualIntro(m)) => {
                let sub = modality(!angelic, (**a).clone(), inner.clone());
                let o = self.go(ctx, m, &sub, k)?;
                if !angelic {
                    return Ok(o);
                }
                let a = (**a).clone();
                let refine = o
                    .refine
                    .and_then(|r| head_swap(r, rule(Rule::DualDNE, Dir::Rev, vec![("a", mg(&a))], vec![])?, &rest));
                Ok(Out { game: o.game, transfer: o.transfer, refine })
            }
            (false, Game::Choice(a, b), Proof::Pair(m, n)) => {
                let oa = self.go(ctx, m, &Formula::boxf((**a).clone(), inner.clone()), k)?;
                let ob = self.go(ctx, n, &Formula::boxf((**b).clone(), inner.clone()), k)?;
                let game = Game::choice(sk(&oa.game), sk(&ob.game));
                let transfer = Proof::pair(self.box_sk(&oa.game, oa.transfer), self.box_sk(&ob.game, ob.transfer));
                let (a, b) = ((**a).clone(), (**b).clone());
                let refine = oa.refine.and_then(|ra| {
                    let both = choice_congr(ra, ob.refine?)?;
                    match &rest {
                        None => Ok(both),
                        Some(l) => trans(
                            both,
                            rule(Rule::SeqDistR, Dir::Rev, vec![("a", mg(&a)), ("b", mg(&b)), ("c", mg(l))], vec![])?,
                        ),
                    }
                });
                Ok(Out { game: Some(game), transfer, refine })
            }
            (false, Game::Repeat(a), Proof::Rep { base, step_label, inv, step, post_label, post: pp }) => {
                let sctx = Context::from_entries(vec![(step_label.clone(), inv.clone())]);
                let on = self.go(&sctx, step, &Formula::boxf((**a).clone(), inv.clone()), 1)?;
                let pctx = Context::from_entries(vec![(post_label.clone(), inv.clone())]);
                let oo = self.go(&pctx, pp, inner, k - 1)?;
                let body = sk(&on.game);
                let lp = Game::repeat(body.clone());
                let step_t = self.box_sk(&on.game, on.transfer);
                let rep = |post_label: &str, step: Proof, post: Proof| Proof::Rep {
                    base: base.clone(),
                    step_label: step_label.clone(),
                    inv: inv.clone(),
                    step: Box::new(step),
                    post_label: post_label.to_string(),
                    post: Box::new(post),
                };
                let transfer = wrap(rep(post_label, step_t.clone(), oo.transfer), &oo.game);
                let a = (**a).clone();
                let refine = on.refine.and_then(|rn| {
                    let ro = oo.refine?;
                    let unloop = rep(step_label, step_t.clone(), Proof::refproof(rn.d));
                    let head =
                        rule(Rule::RefUnloop, Dir::Fwd, vec![("a", mg(&body)), ("b", mg(&a))], vec![pprem(unloop)])?;
                    cat_ref(head, &oo.game, &rest, rep(post_label, step_t, Proof::refproof(ro.d)))
                });
                Ok(Out { game: Some(cat(lp, &oo.game)), transfer, refine })
            }
            (false, Game::Repeat(a), Proof::Pair(m, n)) => {
                let om = self.go(ctx, m, inner, k - 1)?;
                let again = Formula::boxf((**a).clone(), Formula::boxf(Game::repeat((**a).clone()), inner.clone()));
                let on = self.go(ctx, n, &again, k + 1)?;
                let game = Game::choice(sk(&om.game), sk(&on.game));
                let transfer = Proof::pair(self.box_sk(&om.game, om.transfer), self.box_sk(&on.game, on.transfer));
                let a = (**a).clone();
                let refine = om.refine.and_then(|rm| Self::unroll_ref(rm, on.refine?, &a, &rest));
                Ok(Out { game: Some(game), transfer, refine })
            }
            (false, Game::Ode(o), Proof::BSolve { time, range, sln, sub }) => {
                self.bsolve(ctx, o, (time, range, sln, sub), inner, k, &rest)
            }
            (false, Game::Ode(o), Proof::DC { cut, show, use_ }) => {
                let o2 = Ode {
                    eqs: o.eqs.clone(),
                    constraint: Box::new(Formula::and((*o.constraint).clone(), cut.clone())),
                };
                let out = self.go(ctx, use_, &Formula::boxf(Game::Ode(o2), inner.clone()), k)?;
                let ode = Game::Ode(o.clone());
                let refine = out.refine.and_then(|r| {
                    let de = rule(
                        Rule::RefDC,
                        Dir::Rev,
                        vec![("a", mg(&ode)), ("p", mf(cut))],
                        vec![pprem((**show).clone())],
                    )?;
                    head_swap(r, de, &rest)
                });
                Ok(Out { game: out.game, transfer: out.transfer, refine })
            }
            (false, Game::Ode(o), Proof::DW(m)) => {
                let n = o.eqs.len();
                let prem = crate::kernel::dw_premise(o, inner);
                let out = self.go(ctx, m, &prem, k - 1 + 2 * n + 1)?;
                let (ws, _) = peel(&prem, 2 * n + 1)?;
                let ws: Vec<Game> = ws.into_iter().map(|e| e.game).collect();
                let ode = Game::Ode(o.clone());
                let refine = out.refine.and_then(|r| {
                    let dw = rule(Rule::RefDW, Dir::Fwd, vec![("a", mg(&ode))], vec![])?;
                    match &rest {
                        None => trans(r, dw),
                        Some(l) => trans(trans(r, reassoc(&ws, l)?)?, seq_g(dw, refl(l)?)?),
                    }
                });
                Ok(Out { game: out.game, transfer: out.transfer, refine })
            }
            (false, Game::Ode(o), Proof::DG { var, init, a, b, label, sub }) => {
                let y = Var::plain(var);
                let mut eqs = o.eqs.clone();
                eqs.push((var.clone(), Term::add(Term::mul(a.clone(), y.to_term()), b.clone())));
                let o2 = Ode { eqs, constraint: o.constraint.clone() };
                let c2 = ctx.with(label, Formula::cmp(CmpOp::Eq, y.to_term(), init.clone()));
                let out = self.go(&c2, sub, &Formula::boxf(Game::Ode(o2), inner.clone()), k)?;
                let game = Some(cat(Game::Assign(y.clone(), init.clone()), &out.game));
                let transfer = wrap(Proof::asgn(var, y, label, out.transfer), &out.game);
                let refine = Err(InlineError::Unsupported("refinement certificates for differential ghosts".into()));
                Ok(Out { game, transfer, refine })
            }
            (true, Game::NondetAssign(x), Proof::DAssignIntro { witness, ghost, label, sub }) => {
                let c2 = assign_context(ctx, x, ghost, label, witness);
                let o = self.go(&c2, sub, inner, k - 1)?;
                let e = Game::Assign(x.clone(), witness.clone());
                let transfer = wrap(Proof::asgn(ghost, x.clone(), label, o.transfer), &o.game);
                let refine = o.refine.and_then(|r| {
                    let inst = || vec![("x", Meta::Var(x.clone())), ("f", Meta::Term(witness.clone()))];
                    let head = trans(
                        rule(Rule::DualAssign, Dir::Rev, inst(), vec![])?,
                        rule(Rule::ArefRand, Dir::Fwd, inst(), vec![])?,
                    )?;
                    cat_ref(head, &o.game, &rest, Proof::asgn(ghost, x.clone(), label, Proof::refproof(r.d)))
                });
                Ok(Out { game: Some(cat(e, &o.game)), transfer, refine })
            }
            (true, Game::Test(psi), Proof::Pair(m, n)) => {
                let o = self.go(ctx, n, inner, k - 1)?;
                let (l1, l2) = (self.fresh("t"), self.fresh("t"));
                let refine = o.refine.and_then(|r| {
                    let skip = rule(Rule::DualSkip, Dir::Rev, vec![], vec![])?;
                    let test = rule(
                        Rule::ArefTest,
                        Dir::Fwd,
                        vec![("p", mf(&Formula::tt())), ("q", mf(psi))],
                        vec![pprem(Proof::lam(&l1, Formula::tt(), (**m).clone()))],
                    )?;
                    Self::skip_head(trans(skip, test)?, r, &o.game, &rest, &l2)
                });
                Ok(Out { game: o.game, transfer: o.transfer, refine })
            }
            (true, Game::Choice(a, b), Proof::InjL(m) | Proof::InjR(m)) => {
                let left = matches!(p, Proof::InjL(_));
                let pick = if left { a } else { b };
                let o = self.go(ctx, m, &Formula::diamond((**pick).clone(), inner.clone()), k)?;
                let r_rule = if left { Rule::ArefChoiceR1 } else { Rule::ArefChoiceR2 };
                let (a, b) = ((**a).clone(), (**b).clone());
                let refine = o.refine.and_then(|r| {
                    head_swap(r, rule(r_rule, Dir::Fwd, vec![("a", mg(&a)), ("b", mg(&b))], vec![])?, &rest)
                });
                Ok(Out { game: o.game, transfer: o.transfer, refine })
            }
            (true, Game::Repeat(a), Proof::Stop(m)) => {
                let o = self.go(ctx, m, inner, k - 1)?;
                let l = self.fresh("t");
                let a = (**a).clone();
                let refine = o.refine.and_then(|r| {
                    let unroll = Game::seq(a.clone(), Game::repeat(a.clone()));
                    let head = trans(
                        rule(Rule::DualSkip, Dir::Rev, vec![], vec![])?,
                        trans(
                            rule(
                                Rule::ArefChoiceR1,
                                Dir::Fwd,
                                vec![("a", mg(&Game::skip())), ("b", mg(&unroll))],
                                vec![],
                            )?,
                            rule(Rule::UnrollLd, Dir::Fwd, vec![("a", mg(&a))], vec![])?,
                        )?,
                    )?;
                    Self::skip_head(head, r, &o.game, &rest, &l)
                });
                Ok(Out { game: o.game, transfer: o.transfer, refine })
            }
            (true, Game::Repeat(a), Proof::Go(m)) => {
                let again =
                    Formula::diamond((**a).clone(), Formula::diamond(Game::repeat((**a).clone()), inner.clone()));
                let o = self.go(ctx, m, &again, k + 1)?;
                let a = (**a).clone();
                let refine = o.refine.and_then(|r| {
                    let lp = Game::repeat(a.clone());
                    let unroll = Game::seq(a.clone(), lp.clone());
                    let de = trans(
                        rule(Rule::DualSeq, Dir::Rev, vec![("a", mg(&a)), ("b", mg(&lp))], vec![])?,
                        trans(
                            rule(
                                Rule::ArefChoiceR2,
                                Dir::Fwd,
                                vec![("a", mg(&Game::skip())), ("b", mg(&unroll))],
                                vec![],
                            )?,
                            rule(Rule::UnrollLd, Dir::Fwd, vec![("a", mg(&a))], vec![])?,
                        )?,
                    )?;
                    head2_swap(r, de, &rest)
                });
                Ok(Out { game: o.game, transfer: o.transfer, refine })
            }
            (true, Game::Repeat(a), Proof::For(fp)) => self.for_loop(a, fp, inner, k, &rest),
            (true, Game::Ode(o), Proof::DSolve { time, duration, sln, dom, post: pp }) => {
                let n = o.eqs.len();
                let prem = crate::kernel::dsolve_post(o, time, duration, sln, inner);
                let out = self.go(ctx, pp, &prem, k - 1 + 2 * n)?;
                let (es, _) = peel(&prem, 2 * n)?;
                let es: Vec<Game> = es.into_iter().map(|e| e.game).collect();
                let ode = Game::Ode(o.clone());
                let refine = out.refine.and_then(|r| {
                    let ds = es
                        .iter()
                        .map(|e| match e {
                            Game::Assign(x, f) => rule(
                                Rule::DualAssign,
                                Dir::Fwd,
                                vec![("x", Meta::Var(x.clone())), ("f", Meta::Term(f.clone()))],
                                vec![],
                            ),
                            g => Err(InlineError::Unsupported(format!("{g} is not an assignment"))),
                        })
                        .collect::<Res<Vec<_>>>()?;
                    let congr = list_congr(ds, &rest)?;
                    let inst = vec![
                        ("a", mg(&ode)),
                        ("s", Meta::Name(time.clone())),
                        ("d", Meta::Term(duration.clone())),
                        ("sln", Meta::Sln(sln.clone())),
                    ];
                    let solve = rule(Rule::RefSolve, Dir::Fwd, inst, vec![pprem((**dom).clone())])?;
                    let r = trans(r, congr)?;
                    match &rest {
                        None => trans(r, solve),
                        Some(l) => trans(trans(r, reassoc(&es, l)?)?, seq_g(solve, refl(l)?)?),
                    }
                });
                Ok(Out { game: out.game, transfer: out.transfer, refine })
            }
            _ => {
                if elems.iter().all(|e| !e.angelic && e.game.is_system()) {
                    let lgame = lg(&elems).expect("non-empty list");
                    let transfer = self.seq_box(p.clone(), &elems, &post);
                    return Ok(Out { game: Some(lgame.clone()), transfer, refine: refl(&lgame) });
                }
                Err(InlineError::NotNormalForm(format!("{} for {}", proof_name(p), goal)))
            }
        }
    }

    /// `sk(i) ≤ cat(e, l)` from `head : ?tt ≤ e` and `r : sk(i) ≤ sk(l)`.
    fn skip_head(head: Refn, r: Refn, i: &Option<Game>, l: &Option<Game>, label: &str) -> Res<Refn> {
        let tail = Proof::lam(label, Formula::tt(), Proof::refproof(r.d));
        let r1 = cat_ref(head, i, l, tail)?;
        match i {
            None => Ok(r1),
            Some(g) => trans(rule(Rule::SeqIdL, Dir::Rev, vec![("a", mg(g))], vec![])?, r1),
        }
    }

    /// `im ∪ in ≤ cat(a*, l)` from `rm : im ≤ sk(l)` and
    /// `rn : in ≤ cat(a, cat(a*, l))`.
    fn unroll_ref(rm: Refn, rn: Refn, a: &Game, l: &Option<Game>) -> Res<Refn> {
        let lp = Game::repeat(a.clone());
        let unroll = rule(Rule::UnrollL, Dir::Fwd, vec![("a", mg(a))], vec![])?;
        let Some(l) = l else {
            let both = choice_congr(rm, rn)?;
            return trans(both, unroll);
        };
        let skip_l = rule(Rule::SeqIdL, Dir::Rev, vec![("a", mg(l))], vec![])?;
        let assoc = rule(Rule::SeqAssoc, Dir::Rev, vec![("a", mg(a)), ("b", mg(&lp)), ("c", mg(l))], vec![])?;
        let both = choice_congr(trans(rm, skip_l)?, trans(rn, assoc)?)?;
        let unrolled = Game::seq(a.clone(), lp.clone());
        let dist =
            rule(Rule::SeqDistR, Dir::Rev, vec![("a", mg(&Game::skip())), ("b", mg(&unrolled)), ("c", mg(l))], vec![])?;
        trans(trans(both, dist)?, seq_g(unroll, refl(l)?)?)
    }

    fn bsolve(
        &mut self,
        ctx: &Context,
        o: &Ode,
        (time, range, sln, sub): (&String, &String, &Vec<(String, Term)>, &Proof),
        inner: &Formula,
        k: usize,
        rest: &Option<Game>,
    ) -> Res<Out> {
        let ode = Game::Ode(o.clone());
        let bsolve = |sub: Proof| Proof::BSolve {
            time: time.clone(),
            range: range.clone(),
            sln: sln.clone(),
            sub: Box::new(sub),
        };
        if k == 1 {
            return Ok(Out { game: Some(ode.clone()), transfer: bsolve(sub.clone()), refine: refl(&ode) });
        }
        let prem = crate::kernel::bsolve_premise(o, time, range, sln, inner);
        let n = 3 + 2 * o.eqs.len();
        let (layers, c2, m, post) = self.peel_layers(ctx, sub, &prem, n)?;
        let out = self.go(&c2, m, &post, k - 1)?;
        let transfer = wrap(bsolve(rebuild(&layers, out.transfer)), &out.game);
        let refine = out
            .refine
            .and_then(|r| cat_ref(refl(&ode)?, &out.game, rest, bsolve(rebuild(&layers, Proof::refproof(r.d)))));
        Ok(Out { game: Some(cat(ode, &out.game)), transfer, refine })
    }

    fn for_loop(&mut self, a: &Game, fp: &ForProof, inner: &Formula, k: usize, rest: &Option<Game>) -> Res<Out> {
        let (j, m, m0, eps) = (&fp.variant, &fp.metric, &fp.ghost, &fp.eps);
        let (p, q) = &fp.step_labels;
        let (p2, q2) = &fp.post_labels;
        let step_post = for_step_post(j, m, eps, m0);
        let sctx = Context::from_entries(vec![(p.clone(), j.clone()), (q.clone(), for_step_hyp(m0, m))]);
        let on = self.go(&sctx, &fp.step, &Formula::diamond(a.clone(), step_post.clone()), 1)?;
        if on.game.as_ref().is_some_and(|g| g.all_vars().iter().any(|v| v.name == *m0)) {
            return Err(InlineError::Unsupported(format!("inlined loop body mentions the metric ghost {m0}")));
        }
        let pctx = Context::from_entries(vec![(p2.clone(), j.clone()), (q2.clone(), for_post_hyp(m))]);
        let oo = self.go(&pctx, &fp.post, inner, k - 1)?;

        let sigma = sk(&on.game);
        let positive = Formula::cmp(CmpOp::Gt, m.clone(), Term::zero());
        let body = Game::seq(Game::test(positive.clone()), sigma.clone());
        let exit = Game::test(for_post_hyp(m));
        let game = Game::seq(Game::repeat(body), cat(exit.clone(), &oo.game));

        let sigma_t = self.box_sk(&on.game, on.transfer);
        let (t, g, r) = (self.fresh("t"), self.fresh("g"), self.fresh("r"));
        let keep = Proof::Mon {
            main: Box::new(sigma_t.clone()),
            mid: step_post,
            label: r.clone(),
            sub: Box::new(Proof::ProjL(Box::new(Proof::hyp(&r)))),
        };
        let bridged = Proof::app(Proof::lam(q, for_step_hyp(m0, m), keep), Proof::pair(Proof::hyp(&g), Proof::hyp(&t)));
        let ghosted = Proof::Ghost { var: m0.clone(), rhs: m.clone(), label: g, sub: Box::new(bridged) };
        let step = Proof::seq(Proof::lam(&t, positive, ghosted));
        let rep = |post: Proof| Proof::Rep {
            base: Box::new(fp.base.clone()),
            step_label: p.clone(),
            inv: j.clone(),
            step: Box::new(step.clone()),
            post_label: p2.clone(),
            post: Box::new(post),
        };
        let exit_t = wrap(Proof::lam(q2, for_post_hyp(m), oo.transfer), &oo.game);
        let transfer = Proof::seq(rep(exit_t));

        let refine = on.refine.and_then(|rn| {
            let ro = oo.refine?;
            let inst = vec![
                ("a", mg(a)),
                ("sigma", mg(&sigma)),
                ("m", Meta::Term(m.clone())),
                ("j", mf(j)),
                ("m0", Meta::Name(m0.clone())),
                ("eps", Meta::Rat(eps.clone())),
                ("p", Meta::Name(p.clone())),
                ("q", Meta::Name(q.clone())),
            ];
            let li = rule(Rule::LoopInline, Dir::Fwd, inst, vec![pprem(fp.base.clone()), pprem(sigma_t), dprem(rn)])?;
            let tail = Proof::seq(rep(Proof::lam(q2, for_post_hyp(m), Proof::refproof(ro.d))));
            let r1 = cat_ref(li, &oo.game, rest, tail)?;
            match &oo.game {
                None => Ok(r1),
                Some(io) => {
                    let lp = match &game {
                        Game::Seq(lp, _) => (**lp).clone(),
                        _ => unreachable!("for inlining is a sequence"),
                    };
                    let assoc =
                        rule(Rule::SeqAssoc, Dir::Rev, vec![("a", mg(&lp)), ("b", mg(&exit)), ("c", mg(io))], vec![])?;
                    trans(assoc, r1)
                }
            }
        });
        Ok(Out { game: Some(game), transfer, refine })
    }

    #[allow(clippy::too_many_arguments)]
    fn case(
        &mut self,
        ctx: &Context,
        goal: &Formula,
        k: usize,
        elems: &[Elem],
        scrut: &Proof,
        (left, lsub): (&String, &Proof),
        (right, rsub): (&String, &Proof),
    ) -> Res<Out> {
        let s = infer_proof(ctx, scrut).map_err(|e| InlineError::NotAccepted(e.reason.to_string()))?.0;
        let (pl, pr, rho) = match s.as_or_shape() {
            Some((a, b, rho)) if is_system_test(a) && is_system_test(b) && is_system_test(rho) => {
                (a.clone(), b.clone(), rho.clone())
            }
            _ => return Err(InlineError::NotSystemTest(format!("case scrutinee {s}"))),
        };
        let lctx = ctx.with(left, Formula::and(pl.clone(), rho.clone()));
        let ol = self.go(&lctx, lsub, goal, k)?;
        let rctx = ctx.with(right, Formula::and(pr.clone(), rho.clone()));
        let or = self.go(&rctx, rsub, goal, k)?;
        let whole = lg(elems).expect("non-empty list");

        let guard = |p: &Formula| if rho.is_tt() { p.clone() } else { Formula::and(p.clone(), rho.clone()) };
        let (gl, gr) = (guard(&pl), guard(&pr));
        let game = Game::choice(cat(Game::test(gl.clone()), &ol.game), cat(Game::test(gr.clone()), &or.game));

        // Introduces the guard and, for a plain disjunction, rebuilds the
        // branch hypothesis `⟨?P⟩tt` from it.
        let branch = |this: &mut Self, label: &String, p: &Formula, g: &Formula, body: Proof| {
            if rho.is_tt() {
                let l2 = this.fresh("c");
                let bridge = Proof::app(
                    Proof::lam(label, Formula::and(p.clone(), Formula::tt()), body),
                    Proof::pair(Proof::hyp(&l2), Proof::qe(Formula::tt())),
                );
                Proof::lam(&l2, g.clone(), bridge)
            } else {
                Proof::lam(label, g.clone(), body)
            }
        };
        let tl = branch(self, left, &pl, &gl, ol.transfer);
        let tr = branch(self, right, &pr, &gr, or.transfer);
        let transfer = Proof::pair(wrap(tl, &ol.game), wrap(tr, &or.game));

        let refine = match (ol.refine, or.refine) {
            (Ok(rl), Ok(rr)) => {
                let pl_ref = branch(self, left, &pl, &gl, Proof::refproof(rl.d));
                let pr_ref = branch(self, right, &pr, &gr, Proof::refproof(rr.d));
                let l = Some(whole.clone());
                let (l3, r3, t) = (self.fresh("c"), self.fresh("c"), self.fresh("t"));
                let either = |label: &str| {
                    if rho.is_tt() {
                        Proof::ProjL(Box::new(Proof::hyp(label)))
                    } else {
                        Proof::hyp(label)
                    }
                };
                let disj = Proof::Case {
                    scrut: Box::new(scrut.clone()),
                    left: l3.clone(),
                    lsub: Box::new(Proof::InjL(Box::new(Proof::pair(either(&l3), Proof::qe(Formula::tt()))))),
                    right: r3.clone(),
                    rsub: Box::new(Proof::InjR(Box::new(Proof::pair(either(&r3), Proof::qe(Formula::tt()))))),
                };
                (|| {
                    let bl = cat_ref(refl(&Game::test(gl.clone()))?, &ol.game, &l, pl_ref)?;
                    let br = cat_ref(refl(&Game::test(gr.clone()))?, &or.game, &l, pr_ref)?;
                    let gmeta = || {
                        vec![("a", mg(&Game::test(gl.clone()))), ("b", mg(&Game::test(gr.clone()))), ("c", mg(&whole))]
                    };
                    let r = trans(choice_congr(bl, br)?, rule(Rule::SeqDistR, Dir::Rev, gmeta(), vec![])?)?;
                    let tc = rule(Rule::TestChoice, Dir::Fwd, vec![("p", mf(&gl)), ("q", mf(&gr))], vec![])?;
                    let r = trans(r, seq_g(tc, refl(&whole)?)?)?;
                    let either_guard = Formula::or(gl.clone(), gr.clone());
                    let dt = rule(
                        Rule::DrefTest,
                        Dir::Fwd,
                        vec![("p", mf(&either_guard)), ("q", mf(&Formula::tt()))],
                        vec![pprem(Proof::lam(&t, Formula::tt(), disj))],
                    )?;
                    let r = trans(r, seq_g(dt, refl(&whole)?)?)?;
                    trans(r, rule(Rule::SeqIdL, Dir::Fwd, vec![("a", mg(&whole))], vec![])?)
                })()
            }
            (Err(e), _) | (_, Err(e)) => Err(e),
        };
        Ok(Out { game: Some(game), transfer, refine })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn game_list_reassociates_right() {
        let (a, b, c) = (Game::assign("x", Term::lit(1)), Game::random("y"), Game::skip());
        let g = Game::seq(Game::seq(a.clone(), b.clone()), c.clone());
        let l = GameList::from_game(&g);
        assert_eq!(l.games(), vec![&a, &b, &c]);
        assert_eq!(l.to_game(), Some(Game::seq(a, Game::seq(b, c))));
    }

    #[test]
    fn diamond_of_random_assignment_is_not_system_test() {
        let f = Formula::exists("x", Formula::cmp(CmpOp::Eq, Term::var("x"), Term::lit(1)));
        assert!(!is_system_test(&f));
        assert!(is_system_test(&Formula::cmp(CmpOp::Ge, Term::var("x"), Term::zero())));
    }
}
