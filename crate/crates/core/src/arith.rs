//! First-order arithmetic obligations.
//!
//! Sequents whose atoms are linear over the rationals are decided exactly by
//! Fourier–Motzkin elimination on the disjunctive normal form of
//! `hyps ∧ ¬claim`. Anything else is reported as assumed.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{CmpOp, Context, Formula, Game};
use crate::term::{eval, Poly, Rat, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Decided(bool),
    Assumed,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("not first-order: {0}")]
    NotFirstOrder(String),
}

/// Limits that keep a single obligation cheap; exceeding one yields `Assumed`.
const MAX_DISJUNCTS: usize = 4096;
const MAX_CONSTRAINTS: usize = 4000;

/// Modality-free in the sense of the derived connectives: comparisons joined by
/// tests, test choices and quantifiers over unprimed or primed variables.
pub fn is_first_order(f: &Formula) -> bool {
    match f {
        Formula::Compare(..) => true,
        Formula::Refine(..) => false,
        Formula::Box(g, p) | Formula::Diamond(g, p) => {
            is_first_order(p)
                && match &**g {
                    Game::Test(a) => is_first_order(a),
                    Game::NondetAssign(_) => true,
                    Game::Choice(l, r) => match (&**l, &**r) {
                        (Game::Test(a), Game::Test(b)) => is_first_order(a) && is_first_order(b),
                        _ => false,
                    },
                    _ => false,
                }
        }
    }
}

/// The first-order assumptions of a context.
pub fn fo_part(ctx: &Context) -> Vec<Formula> {
    ctx.formulas().filter(|f| is_first_order(f)).cloned().collect()
}

/// Decides `ctx ⊢ claim` when possible.
pub fn check_arith(ctx: &Context, claim: &Formula) -> Result<Status, ArithError> {
    let hyps: Vec<Formula> = ctx.formulas().cloned().collect();
    for h in hyps.iter().chain(std::iter::once(claim)) {
        if !is_first_order(h) {
            return Err(ArithError::NotFirstOrder(crate::surface::print_formula(h)));
        }
    }
    Ok(decide(&hyps, claim))
}

/// `hyps ⊢ claim` for first-order formulas.
pub fn decide(hyps: &[Formula], claim: &Formula) -> Status {
    let mut avoid: BTreeSet<String> = claim.all_vars().into_iter().map(|v| v.name).collect();
    for h in hyps {
        avoid.extend(h.all_vars().into_iter().map(|v| v.name));
    }
    // Universal claims are proved for a fresh arbitrary value.
    let mut claim = claim.clone();
    let mut counter = 0;
    while let Some((x, body)) = claim.as_forall() {
        let y = fresh_var(x, &mut avoid, &mut counter);
        claim = body.map_vars(&|v| crate::syntax::transpose_atoms(v, x, &y));
    }
    let mut dropped = false;
    let mut facts: Vec<Dnf> = Vec::new();
    for h in hyps {
        // Existential assumptions provide a fresh witness.
        let mut h = h.clone();
        while let Some((x, body)) = h.as_exists() {
            let y = fresh_var(x, &mut avoid, &mut counter);
            h = body.map_vars(&|v| crate::syntax::transpose_atoms(v, x, &y));
        }
        match dnf(&h, true) {
            Some(d) => facts.push(d),
            None => dropped = true,
        }
    }
    let negated = match dnf(&claim, false) {
        Some(d) => d,
        None => return Status::Assumed,
    };
    facts.push(negated);
    let mut acc: Dnf = vec![Vec::new()];
    for d in facts {
        acc = match product(&acc, &d) {
            Some(p) => p,
            None => return Status::Assumed,
        };
    }
    let mut exhausted = false;
    for conj in &acc {
        match satisfiable(conj) {
            Some(false) => {}
            Some(true) => {
                return if dropped { Status::Assumed } else { Status::Decided(false) };
            }
            None => exhausted = true,
        }
    }
    if exhausted {
        Status::Assumed
    } else {
        Status::Decided(true)
    }
}

fn fresh_var(x: &Var, avoid: &mut BTreeSet<String>, counter: &mut usize) -> Var {
    loop {
        *counter += 1;
        let name = format!("{}_{}", x.name, counter);
        if avoid.insert(name.clone()) {
            return Var::plain(&name);
        }
    }
}

/// `Σ coeffs·x + constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Lin {
    coeffs: BTreeMap<Var, Rat>,
    constant: Rat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rel {
    Pos,
    NonNeg,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Constraint {
    lin: Lin,
    rel: Rel,
}

type Dnf = Vec<Vec<Constraint>>;

fn linear(t: &Term) -> Option<Lin> {
    let p = Poly::from_term(t).ok()?;
    let (coeffs, constant) = p.as_linear()?;
    Some(Lin { coeffs, constant })
}

fn lin_neg(l: &Lin) -> Lin {
    Lin { coeffs: l.coeffs.iter().map(|(v, c)| (v.clone(), -c.clone())).collect(), constant: -l.constant.clone() }
}

/// The atom `a op b` as a disjunction of constraints.
fn atom(op: CmpOp, a: &Term, b: &Term) -> Option<Dnf> {
    let d = linear(&Term::sub(a.clone(), b.clone()))?;
    let c = |lin: Lin, rel| vec![Constraint { lin, rel }];
    Some(match op {
        CmpOp::Gt => vec![c(d, Rel::Pos)],
        CmpOp::Ge => vec![c(d, Rel::NonNeg)],
        CmpOp::Lt => vec![c(lin_neg(&d), Rel::Pos)],
        CmpOp::Le => vec![c(lin_neg(&d), Rel::NonNeg)],
        CmpOp::Eq => vec![c(d, Rel::Zero)],
        CmpOp::Ne => vec![c(d.clone(), Rel::Pos), c(lin_neg(&d), Rel::Pos)],
    })
}

fn union(mut a: Dnf, b: Dnf) -> Option<Dnf> {
    a.extend(b);
    (a.len() <= MAX_DISJUNCTS).then_some(a)
}

fn product(a: &Dnf, b: &Dnf) -> Option<Dnf> {
    if a.len().saturating_mul(b.len()) > MAX_DISJUNCTS {
        return None;
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut c = x.clone();
            c.extend(y.iter().cloned());
            out.push(c);
        }
    }
    Some(out)
}

/// DNF of `f` (when `positive`) or of its negation, over linear atoms.
fn dnf(f: &Formula, positive: bool) -> Option<Dnf> {
    match f {
        Formula::Compare(op, a, b) => atom(if positive { *op } else { op.negate() }, a, b),
        Formula::Refine(..) => None,
        Formula::Box(g, p) => match &**g {
            // a -> p
            Game::Test(a) => {
                if positive {
                    union(dnf(a, false)?, dnf(p, true)?)
                } else {
                    product(&dnf(a, true)?, &dnf(p, false)?)
                }
            }
            // (a -> p) & (b -> p)
            Game::Choice(l, r) => match (&**l, &**r) {
                (Game::Test(a), Game::Test(b)) => {
                    if positive {
                        product(&union(dnf(a, false)?, dnf(p, true)?)?, &union(dnf(b, false)?, dnf(p, true)?)?)
                    } else {
                        union(product(&dnf(a, true)?, &dnf(p, false)?)?, product(&dnf(b, true)?, &dnf(p, false)?)?)
                    }
                }
                _ => None,
            },
            _ => None,
        },
        Formula::Diamond(g, p) => match &**g {
            // a & p
            Game::Test(a) => {
                if positive {
                    product(&dnf(a, true)?, &dnf(p, true)?)
                } else {
                    union(dnf(a, false)?, dnf(p, false)?)
                }
            }
            // (a & p) | (b & p)
            Game::Choice(l, r) => match (&**l, &**r) {
                (Game::Test(a), Game::Test(b)) => {
                    if positive {
                        union(product(&dnf(a, true)?, &dnf(p, true)?)?, product(&dnf(b, true)?, &dnf(p, true)?)?)
                    } else {
                        product(&union(dnf(a, false)?, dnf(p, false)?)?, &union(dnf(b, false)?, dnf(p, false)?)?)
                    }
                }
                _ => None,
            },
            _ => None,
        },
    }
}

/// Whether a conjunction of linear constraints has a rational solution.
/// `None` when the elimination grows past the size limit.
fn satisfiable(conj: &[Constraint]) -> Option<bool> {
    let mut cs: Vec<Constraint> = conj.to_vec();
    loop {
        // Drop constant constraints, failing on a false one.
        let mut rest = Vec::with_capacity(cs.len());
        for c in cs {
            if c.lin.coeffs.values().all(Zero::is_zero) {
                let k = &c.lin.constant;
                let ok = match c.rel {
                    Rel::Pos => k.is_positive(),
                    Rel::NonNeg => !k.is_negative(),
                    Rel::Zero => k.is_zero(),
                };
                if !ok {
                    return Some(false);
                }
            } else {
                let mut c = c;
                c.lin.coeffs.retain(|_, q| !q.is_zero());
                rest.push(c);
            }
        }
        cs = rest;
        if cs.is_empty() {
            return Some(true);
        }
        if cs.len() > MAX_CONSTRAINTS {
            return None;
        }
        // Prefer eliminating through an equation.
        if let Some(i) = cs.iter().position(|c| c.rel == Rel::Zero) {
            let eq = cs.swap_remove(i);
            let (x, a) = eq.lin.coeffs.iter().next().map(|(v, q)| (v.clone(), q.clone()))?;
            cs = cs.into_iter().map(|c| eliminate_with(&c, &eq.lin, &x, &a)).collect();
            continue;
        }
        // Fourier–Motzkin on the variable with the fewest generated pairs.
        let vars: BTreeSet<Var> = cs.iter().flat_map(|c| c.lin.coeffs.keys().cloned()).collect();
        let x = vars
            .iter()
            .min_by_key(|v| {
                let pos = cs.iter().filter(|c| c.lin.coeffs.get(*v).is_some_and(|q| q.is_positive())).count();
                let neg = cs.iter().filter(|c| c.lin.coeffs.get(*v).is_some_and(|q| q.is_negative())).count();
                pos * neg
            })?
            .clone();
        let (mut lower, mut upper, mut other) = (Vec::new(), Vec::new(), Vec::new());
        for c in cs {
            match c.lin.coeffs.get(&x) {
                Some(q) if q.is_positive() => lower.push(c),
                Some(q) if q.is_negative() => upper.push(c),
                _ => other.push(c),
            }
        }
        for l in &lower {
            for u in &upper {
                // a·x + L ⋈ 0 with a > 0 and -b·x + U ⋈ 0 with b > 0 give b·L + a·U ⋈ 0.
                let a = l.lin.coeffs[&x].clone();
                let b = -u.lin.coeffs[&x].clone();
                let lin = add(&scale(&l.lin, &b), &scale(&u.lin, &a));
                let rel = if l.rel == Rel::Pos || u.rel == Rel::Pos { Rel::Pos } else { Rel::NonNeg };
                other.push(Constraint { lin, rel });
            }
        }
        cs = other;
    }
}

fn scale(l: &Lin, k: &Rat) -> Lin {
    Lin { coeffs: l.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(), constant: &l.constant * k }
}

fn add(a: &Lin, b: &Lin) -> Lin {
    let mut coeffs = a.coeffs.clone();
    for (v, c) in &b.coeffs {
        let e = coeffs.entry(v.clone()).or_insert_with(Rat::zero);
        *e += c;
    }
    coeffs.retain(|_, c| !c.is_zero());
    Lin { coeffs, constant: &a.constant + &b.constant }
}

/// Substitutes `x` using the equation `eq = 0` whose `x`-coefficient is `a`.
fn eliminate_with(c: &Constraint, eq: &Lin, x: &Var, a: &Rat) -> Constraint {
    match c.lin.coeffs.get(x) {
        None => c.clone(),
        Some(k) => {
            let factor = -(k / a);
            Constraint { lin: add(&c.lin, &scale(eq, &factor)), rel: c.rel }
        }
    }
}

/// Truth of a quantifier-free first-order formula in a rational state.
/// `None` when a quantifier, modality or unbound variable is met.
pub fn holds(f: &Formula, env: &impl Fn(&Var) -> Option<Rat>) -> Option<bool> {
    match f {
        Formula::Compare(op, a, b) => {
            let x = eval(a, env).ok()?;
            let y = eval(b, env).ok()?;
            Some(op.holds(x.cmp(&y)))
        }
        Formula::Refine(..) => None,
        Formula::Box(g, p) => match &**g {
            Game::Test(a) => Some(!holds(a, env)? || holds(p, env)?),
            Game::Choice(l, r) => match (&**l, &**r) {
                (Game::Test(a), Game::Test(b)) => {
                    let pv = holds(p, env)?;
                    Some((!holds(a, env)? || pv) && (!holds(b, env)? || pv))
                }
                _ => None,
            },
            _ => None,
        },
        Formula::Diamond(g, p) => match &**g {
            Game::Test(a) => Some(holds(a, env)? && holds(p, env)?),
            Game::Choice(l, r) => match (&**l, &**r) {
                (Game::Test(a), Game::Test(b)) => Some((holds(a, env)? || holds(b, env)?) && holds(p, env)?),
                _ => None,
            },
            _ => None,
        },
    }
}
