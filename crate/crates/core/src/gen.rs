//! Seeded random generators: syntax trees for round-trip and algebra laws,
//! and checked strategy proofs for the compiler's property suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernel::{bsolve_premise, di_premise, dsolve_dom, dsolve_post, dw_premise, for_step_post};
use crate::proof::{ForProof, Proof};
use crate::syntax::{CmpOp, Context, Formula, Game, Ode};
use crate::term::{rat, ratio, Term, Var};

pub type GenRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const VARS: [&str; 3] = ["x", "y", "z"];

const OPS: [CmpOp; 6] = [CmpOp::Le, CmpOp::Lt, CmpOp::Eq, CmpOp::Ne, CmpOp::Gt, CmpOp::Ge];

fn pick<'a, T>(rng: &mut GenRng, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("non-empty")
}

/// A polynomial term over `vars` with small rational literals.
pub fn term(rng: &mut GenRng, vars: &[&str], depth: usize) -> Term {
    if depth <= 1 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..3) {
            0 => Term::Lit(ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3))),
            _ => Term::var(pick(rng, vars)),
        };
    }
    match rng.gen_range(0..4) {
        0 => Term::add(term(rng, vars, depth - 1), term(rng, vars, depth - 1)),
        1 => Term::sub(term(rng, vars, depth - 1), term(rng, vars, depth - 1)),
        2 => Term::mul(term(rng, vars, depth - 1), term(rng, vars, depth - 1)),
        _ => Term::neg(term(rng, vars, depth - 1)),
    }
}

/// A comparison of two random terms.
pub fn atom(rng: &mut GenRng, vars: &[&str], depth: usize) -> Formula {
    Formula::cmp(*pick(rng, &OPS), term(rng, vars, depth), term(rng, vars, depth))
}

/// Any formula, including modalities and refinements.
pub fn formula(rng: &mut GenRng, vars: &[&str], depth: usize) -> Formula {
    if depth <= 1 || rng.gen_bool(0.25) {
        return atom(rng, vars, 2);
    }
    let d = depth - 1;
    match rng.gen_range(0..4) {
        0 => Formula::boxf(game(rng, vars, d), formula(rng, vars, d)),
        1 => Formula::diamond(game(rng, vars, d), formula(rng, vars, d)),
        2 => Formula::refine(rng.gen_bool(0.3).then(|| rng.gen_range(0..3)), game(rng, vars, d), game(rng, vars, d)),
        _ => Formula::and(formula(rng, vars, d), formula(rng, vars, d)),
    }
}

/// Any game over `vars`.
pub fn game(rng: &mut GenRng, vars: &[&str], depth: usize) -> Game {
    if depth <= 1 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..4) {
            0 => Game::test(atom(rng, vars, 2)),
            1 => Game::assign(pick(rng, vars), term(rng, vars, 2)),
            2 => Game::random(pick(rng, vars)),
            _ => {
                let x = pick(rng, vars).to_string();
                Game::ode(vec![(x, term(rng, vars, 2))], atom(rng, vars, 2))
            }
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => Game::choice(game(rng, vars, d), game(rng, vars, d)),
        1 => Game::seq(game(rng, vars, d), game(rng, vars, d)),
        2 => Game::repeat(game(rng, vars, d)),
        3 => Game::dual(game(rng, vars, d)),
        _ => Game::test(formula(rng, vars, d)),
    }
}

/// `0`, `1`, `v` or `1 - v`: terms that keep `{0, 1}` closed.
pub fn finite_term(rng: &mut GenRng, vars: &[&str]) -> Term {
    let v = pick(rng, vars);
    match rng.gen_range(0..4) {
        0 => Term::lit(0),
        1 => Term::lit(1),
        2 => Term::var(v),
        _ => Term::sub(Term::lit(1), Term::var(v)),
    }
}

/// `v = t` or `v != t` for a [`finite_term`] `t`.
pub fn finite_formula(rng: &mut GenRng, vars: &[&str]) -> Formula {
    let op = if rng.gen_bool(0.5) { CmpOp::Eq } else { CmpOp::Ne };
    Formula::cmp(op, Term::var(pick(rng, vars)), finite_term(rng, vars))
}

/// A dual-free game over the two-point domain `{0, 1}`: assignments of
/// [`finite_term`]s, tests of [`finite_formula`]s, choice, sequence and
/// repetition.
pub fn finite_game(rng: &mut GenRng, vars: &[&str], depth: usize) -> Game {
    if depth <= 1 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => Game::test(finite_formula(rng, vars)),
            _ => Game::assign(pick(rng, vars), finite_term(rng, vars)),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..3) {
        0 => Game::choice(finite_game(rng, vars, d), finite_game(rng, vars, d)),
        1 => Game::seq(finite_game(rng, vars, d), finite_game(rng, vars, d)),
        _ => Game::repeat(finite_game(rng, vars, d)),
    }
}

/// A checked-proof candidate `ctx ⊢ proof : goal`.
#[derive(Clone, Debug)]
pub struct ProofSample {
    pub ctx: Context,
    pub goal: Formula,
    pub proof: Proof,
}

/// A random game of depth at most `depth` paired with a strategy proof for
/// a valid postcondition. Most candidates check; callers filter the rest.
pub fn proof_sample(rng: &mut GenRng, depth: usize) -> ProofSample {
    let mut g = ProofGen { rng, fresh: 0 };
    let alpha = g.game(depth, false);
    let post = g.valid();
    let goal = Formula::boxf(alpha, post);
    let ctx = if g.rng.gen_bool(0.5) {
        Context::new()
    } else {
        Context::from_entries(vec![("pre".into(), Formula::cmp(CmpOp::Ge, Term::var("x"), Term::zero()))])
    };
    let proof = g.prove(&goal, 3);
    ProofSample { ctx, goal, proof }
}

struct ProofGen<'r> {
    rng: &'r mut GenRng,
    fresh: usize,
}

impl ProofGen<'_> {
    fn name(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    fn var(&mut self) -> &'static str {
        pick(self.rng, &VARS)
    }

    fn linear(&mut self) -> Term {
        let v = self.var();
        match self.rng.gen_range(0..3) {
            0 => Term::lit(self.rng.gen_range(-2..=2)),
            1 => Term::var(v),
            _ => Term::add(Term::var(v), Term::lit(self.rng.gen_range(-2..=2))),
        }
    }

    /// A valid linear comparison, or a disjunction of two complementary ones.
    fn valid(&mut self) -> Formula {
        let v = Term::var(self.var());
        let k = Term::lit(self.rng.gen_range(1..=3));
        match self.rng.gen_range(0..5) {
            0 => Formula::cmp(CmpOp::Ge, v.clone(), Term::sub(v, k)),
            1 => Formula::cmp(CmpOp::Gt, Term::add(v.clone(), k), v),
            2 => Formula::cmp(CmpOp::Le, v.clone(), v),
            3 => Formula::cmp(CmpOp::Eq, v.clone(), v),
            _ => {
                Formula::or(Formula::cmp(CmpOp::Gt, v.clone(), Term::zero()), Formula::cmp(CmpOp::Le, v, Term::zero()))
            }
        }
    }

    fn ode(&mut self) -> Game {
        let x = self.var().to_string();
        let c = Term::lit(self.rng.gen_range(-2..=2));
        let constraint = self.valid();
        Game::ode(vec![(x, c)], constraint)
    }

    /// A game whose proof obligations the prover below can meet: tests
    /// played by Angel are valid.
    fn game(&mut self, depth: usize, angelic: bool) -> Game {
        if depth <= 1 || self.rng.gen_bool(0.2) {
            return match self.rng.gen_range(0..5) {
                0 => Game::assign(self.var(), self.linear()),
                1 => Game::random(self.var()),
                2 if angelic => Game::test(self.valid()),
                2 => {
                    let (v, t) = (Term::var(self.var()), self.linear());
                    Game::test(Formula::cmp(*pick(self.rng, &[CmpOp::Le, CmpOp::Gt, CmpOp::Eq]), v, t))
                }
                _ => self.ode(),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..5) {
            0 => Game::choice(self.game(d, angelic), self.game(d, angelic)),
            1 | 2 => Game::seq(self.game(d, angelic), self.game(d, angelic)),
            3 => Game::repeat(self.game(d, angelic)),
            _ => Game::dual(self.game(d, !angelic)),
        }
    }

    /// A proof of `goal` whose first-order leaves hold in every context
    /// the proof reaches. `unroll` bounds loop unfolding.
    fn prove(&mut self, goal: &Formula, unroll: usize) -> Proof {
        if is_leaf(goal) {
            return qe(goal.clone());
        }
        if self.rng.gen_bool(0.05) {
            let v = self.var();
            let split = Proof::Split {
                left: Term::var(v),
                right: Term::zero(),
                eps: Term::lit(1),
                sub: Box::new(qe(Formula::cmp(CmpOp::Gt, Term::lit(1), Term::zero()))),
            };
            let (l, r) = (self.name("c"), self.name("c"));
            return Proof::Case {
                scrut: Box::new(split),
                left: l,
                lsub: Box::new(self.prove(goal, unroll)),
                right: r,
                rsub: Box::new(self.prove(goal, unroll)),
            };
        }
        match goal {
            Formula::Box(g, post) => self.prove_box(g, post, unroll),
            Formula::Diamond(g, post) => self.prove_diamond(g, post, unroll),
            _ => qe(goal.clone()),
        }
    }

    fn prove_box(&mut self, g: &Game, post: &Formula, unroll: usize) -> Proof {
        let post = post.clone();
        match g {
            Game::Assign(x, _) => {
                let (v, e) = (self.name("v"), self.name("e"));
                asgn(&v, x.clone(), &e, self.prove(&post, unroll))
            }
            Game::NondetAssign(_) => {
                let v = self.name("v");
                lam_real(&v, self.prove(&post, unroll))
            }
            Game::Test(psi) => {
                let h = self.name("h");
                lam(&h, (**psi).clone(), self.prove(&post, unroll))
            }
            Game::Seq(a, b) => {
                let inner = Formula::boxf((**a).clone(), Formula::boxf((**b).clone(), post));
                Proof::SeqIntro(bx(self.prove(&inner, unroll)))
            }
            Game::Choice(a, b) => pair(
                self.prove(&Formula::boxf((**a).clone(), post.clone()), unroll),
                self.prove(&Formula::boxf((**b).clone(), post), unroll),
            ),
            Game::Repeat(a) => {
                if unroll > 0 && self.rng.gen_bool(0.15) {
                    let again = Formula::boxf((**a).clone(), Formula::boxf(g.clone(), post.clone()));
                    return pair(self.prove(&post, unroll - 1), self.prove(&again, unroll - 1));
                }
                let inv = if is_leaf(&post) { post.clone() } else { self.valid() };
                let (s, p) = (self.name("s"), self.name("p"));
                let step = self.prove(&Formula::boxf((**a).clone(), inv.clone()), unroll);
                let after = if inv == post { Proof::Hyp(p.clone()) } else { self.prove(&post, unroll) };
                Proof::Rep {
                    base: Box::new(qe(inv.clone())),
                    step_label: s,
                    inv,
                    step: Box::new(step),
                    post_label: p,
                    post: Box::new(after),
                }
            }
            Game::Dual(a) => Proof::DualIntro(bx(self.prove(&Formula::diamond((**a).clone(), post), unroll))),
            Game::Ode(o) => self.prove_ode(o, &post, unroll),
        }
    }

    fn prove_ode(&mut self, o: &Ode, post: &Formula, unroll: usize) -> Proof {
        let choice = self.rng.gen_range(0..4);
        if choice == 0 && is_leaf(post) {
            if let Ok(step) = di_premise(o, post) {
                return Proof::DI { base: Box::new(qe(post.clone())), step: Box::new(self.prove(&step, unroll)) };
            }
        }
        match choice {
            1 => Proof::DW(bx(self.prove(&dw_premise(o, post), unroll))),
            2 => {
                let cut = self.valid();
                let show = Proof::DW(bx(self.prove(&dw_premise(o, &cut), unroll)));
                let o2 = Ode {
                    eqs: o.eqs.clone(),
                    constraint: Box::new(Formula::and((*o.constraint).clone(), cut.clone())),
                };
                let used = self.prove_box(&Game::Ode(o2), post, unroll);
                Proof::DC { cut, show: Box::new(show), use_: Box::new(used) }
            }
            _ => {
                let (s, r) = (self.name("s"), self.name("r"));
                let sln = solution(o, &s);
                let prem = bsolve_premise(o, &s, &r, &sln, post);
                let sub = self.prove_layers(&prem, 3 + 2 * o.eqs.len(), unroll);
                Proof::BSolve { time: s, range: r, sln, sub: Box::new(sub) }
            }
        }
    }

    /// Introduces the first `n` Demonic modalities of `goal` directly.
    fn prove_layers(&mut self, goal: &Formula, n: usize, unroll: usize) -> Proof {
        if n == 0 {
            return self.prove(goal, unroll);
        }
        let Formula::Box(g, post) = goal else { return self.prove(goal, unroll) };
        let sub = |this: &mut Self| this.prove_layers(post, n - 1, unroll);
        match &**g {
            Game::NondetAssign(_) => {
                let v = self.name("v");
                lam_real(&v, sub(self))
            }
            Game::Test(psi) => {
                let h = self.name("h");
                lam(&h, (**psi).clone(), sub(self))
            }
            Game::Assign(x, _) => {
                let (v, e) = (self.name("v"), self.name("e"));
                asgn(&v, x.clone(), &e, sub(self))
            }
            _ => self.prove(goal, unroll),
        }
    }

    fn prove_diamond(&mut self, g: &Game, post: &Formula, unroll: usize) -> Proof {
        let post = post.clone();
        match g {
            Game::Assign(x, _) => {
                let (v, e) = (self.name("v"), self.name("e"));
                asgn(&v, x.clone(), &e, self.prove(&post, unroll))
            }
            Game::NondetAssign(_) => {
                let (v, e) = (self.name("v"), self.name("e"));
                let witness = self.linear();
                Proof::DAssignIntro { witness, ghost: v, label: e, sub: Box::new(self.prove(&post, unroll)) }
            }
            Game::Test(psi) => pair(qe((**psi).clone()), self.prove(&post, unroll)),
            Game::Seq(a, b) => {
                let inner = Formula::diamond((**a).clone(), Formula::diamond((**b).clone(), post));
                Proof::SeqIntro(bx(self.prove(&inner, unroll)))
            }
            Game::Choice(a, b) => {
                if self.rng.gen_bool(0.5) {
                    Proof::InjL(bx(self.prove(&Formula::diamond((**a).clone(), post), unroll)))
                } else {
                    Proof::InjR(bx(self.prove(&Formula::diamond((**b).clone(), post), unroll)))
                }
            }
            Game::Repeat(a) => match self.rng.gen_range(0..3) {
                0 if unroll > 0 => {
                    let again = Formula::diamond((**a).clone(), Formula::diamond(g.clone(), post));
                    Proof::Go(bx(self.prove(&again, unroll - 1)))
                }
                1 => self.prove_for(a, &post, unroll),
                _ => Proof::Stop(bx(self.prove(&post, unroll))),
            },
            Game::Dual(a) => Proof::DualIntro(bx(self.prove(&Formula::boxf((**a).clone(), post), unroll))),
            Game::Ode(o) => {
                let s = self.name("s");
                let d = Term::lit(1);
                let sln = solution(o, &s);
                let dom = self.prove(&dsolve_dom(o, &s, &d, &sln), unroll);
                let after = self.prove(&dsolve_post(o, &s, &d, &sln, &post), unroll);
                Proof::DSolve { time: s, duration: d, sln, dom: Box::new(dom), post: Box::new(after) }
            }
        }
    }

    /// Convergence with the constant metric `0`: the loop body is never
    /// needed, so its step hypotheses are contradictory.
    fn prove_for(&mut self, a: &Game, post: &Formula, unroll: usize) -> Proof {
        let variant = self.valid();
        let metric = Term::zero();
        let ghost = self.name("m");
        let eps = rat(1);
        let step_post = for_step_post(&variant, &metric, &eps, &ghost);
        let step = self.prove(&Formula::diamond(a.clone(), step_post), unroll);
        let after = self.prove(post, unroll);
        let labels = (self.name("p"), self.name("q"));
        let post_labels = (self.name("p"), self.name("q"));
        Proof::For(Box::new(ForProof {
            metric,
            variant: variant.clone(),
            ghost,
            eps,
            base: qe(variant),
            step_labels: labels,
            step,
            post_labels,
            post: after,
        }))
    }
}

/// The closed-form solution `x := x + c*s` of a constant-rate ODE.
fn solution(o: &Ode, s: &str) -> Vec<(String, Term)> {
    o.eqs.iter().map(|(x, c)| (x.clone(), Term::add(Term::var(x), Term::mul(c.clone(), Term::var(s))))).collect()
}

/// Random variable values for evaluating terms.
pub fn point(rng: &mut GenRng, vars: &[&str]) -> Vec<(Var, crate::term::Rat)> {
    vars.iter().map(|v| (Var::plain(v), ratio(rng.gen_range(-20..=20), rng.gen_range(1..=4)))).collect()
}

fn bx(p: Proof) -> Box<Proof> {
    Box::new(p)
}

fn qe(target: Formula) -> Proof {
    Proof::QE { target, sub: None }
}

fn pair(a: Proof, b: Proof) -> Proof {
    Proof::Pair(bx(a), bx(b))
}

fn asgn(ghost: &str, target: Var, label: &str, sub: Proof) -> Proof {
    Proof::AssignIntro { ghost: ghost.into(), target, label: label.into(), sub: bx(sub) }
}

fn lam_real(ghost: &str, sub: Proof) -> Proof {
    Proof::LamReal { ghost: ghost.into(), sub: bx(sub) }
}

fn lam(label: &str, hyp: Formula, sub: Proof) -> Proof {
    Proof::LamProof { label: label.into(), hyp, sub: bx(sub) }
}

/// Comparisons and disjunctions of them, which the prover closes with `qe`.
fn is_leaf(f: &Formula) -> bool {
    match f {
        Formula::Compare(..) => true,
        _ => f.as_or().is_some_and(|(a, b)| is_leaf(a) && is_leaf(b)),
    }
}
