//! Games, formulas and contexts, with the variable analyses every rule's side
//! conditions are phrased in: free, bound and must-bound variables, uniform
//! renaming, admissible substitution and rank.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Le,
    Lt,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Le, CmpOp::Lt, CmpOp::Eq, CmpOp::Ne, CmpOp::Gt, CmpOp::Ge];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// The operator whose truth is the complement of this one.
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Le => ord != Greater,
            CmpOp::Lt => ord == Less,
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ode {
    pub eqs: Vec<(String, Term)>,
    pub constraint: Box<Formula>,
}

impl Ode {
    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.eqs.iter().map(|(x, _)| x)
    }

    pub fn rhs(&self, x: &str) -> Option<&Term> {
        self.eqs.iter().find(|(y, _)| y == x).map(|(_, f)| f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Game {
    Test(Box<Formula>),
    Assign(Var, Term),
    NondetAssign(Var),
    Ode(Ode),
    Choice(Box<Game>, Box<Game>),
    Seq(Box<Game>, Box<Game>),
    Repeat(Box<Game>),
    Dual(Box<Game>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    Box(Box<Game>, Box<Formula>),
    Diamond(Box<Game>, Box<Formula>),
    Compare(CmpOp, Term, Term),
    /// Demonic refinement with an optional rank annotation. Angelic
    /// refinement of `a` by `b` is stored as the refinement of `a^d` by `b^d`.
    Refine(Option<u32>, Box<Game>, Box<Game>),
}

impl Game {
    pub fn test(f: Formula) -> Game {
        Game::Test(Box::new(f))
    }

    pub fn skip() -> Game {
        Game::test(Formula::tt())
    }

    pub fn assign(x: &str, f: Term) -> Game {
        Game::Assign(Var::plain(x), f)
    }

    pub fn random(x: &str) -> Game {
        Game::NondetAssign(Var::plain(x))
    }

    pub fn ode(eqs: Vec<(String, Term)>, constraint: Formula) -> Game {
        Game::Ode(Ode { eqs, constraint: Box::new(constraint) })
    }

    pub fn choice(a: Game, b: Game) -> Game {
        Game::Choice(Box::new(a), Box::new(b))
    }

    pub fn seq(a: Game, b: Game) -> Game {
        Game::Seq(Box::new(a), Box::new(b))
    }

    pub fn repeat(a: Game) -> Game {
        Game::Repeat(Box::new(a))
    }

    pub fn dual(a: Game) -> Game {
        Game::Dual(Box::new(a))
    }

    /// Right-nested sequence of `items`; `skip` when empty.
    pub fn seq_all(items: Vec<Game>) -> Game {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Game::skip(),
            Some(last) => it.fold(last, |acc, g| Game::seq(g, acc)),
        }
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Game::Test(f) if f.is_tt())
    }

    /// A hybrid system: no duality anywhere.
    pub fn is_system(&self) -> bool {
        match self {
            Game::Dual(_) => false,
            Game::Test(_) | Game::Assign(..) | Game::NondetAssign(_) | Game::Ode(_) => true,
            Game::Choice(a, b) | Game::Seq(a, b) => a.is_system() && b.is_system(),
            Game::Repeat(a) => a.is_system(),
        }
    }

    /// Flow-insensitive free variables: every variable any part may read.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        match self {
            Game::Test(f) => f.free_vars(),
            Game::Assign(_, t) => t.vars(),
            Game::NondetAssign(_) => BTreeSet::new(),
            Game::Ode(o) => {
                let mut s: BTreeSet<Var> = o.vars().map(|x| Var::plain(x)).collect();
                for (_, f) in &o.eqs {
                    s.extend(f.vars());
                }
                s.extend(o.constraint.free_vars());
                s
            }
            Game::Choice(a, b) | Game::Seq(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Game::Repeat(a) | Game::Dual(a) => a.free_vars(),
        }
    }

    /// Free variables where a sequence hides reads of variables its first
    /// part must have written.
    pub fn free_vars_must(&self) -> BTreeSet<Var> {
        match self {
            Game::Seq(a, b) => {
                let mut s = a.free_vars_must();
                let mbv = a.must_bound_vars();
                s.extend(b.free_vars_must().into_iter().filter(|v| !mbv.contains(v)));
                s
            }
            Game::Choice(a, b) => {
                let mut s = a.free_vars_must();
                s.extend(b.free_vars_must());
                s
            }
            Game::Repeat(a) | Game::Dual(a) => a.free_vars_must(),
            _ => self.free_vars(),
        }
    }

    /// Every variable that might change.
    pub fn bound_vars(&self) -> BTreeSet<Var> {
        match self {
            Game::Test(_) => BTreeSet::new(),
            Game::Assign(x, _) | Game::NondetAssign(x) => BTreeSet::from([x.clone()]),
            Game::Ode(o) => o.vars().flat_map(|x| [Var::plain(x), Var::prime(x)]).collect(),
            Game::Choice(a, b) | Game::Seq(a, b) => {
                let mut s = a.bound_vars();
                s.extend(b.bound_vars());
                s
            }
            Game::Repeat(a) | Game::Dual(a) => a.bound_vars(),
        }
    }

    /// Variables written on every play.
    pub fn must_bound_vars(&self) -> BTreeSet<Var> {
        match self {
            Game::Test(_) | Game::Repeat(_) => BTreeSet::new(),
            Game::Choice(a, b) => a.must_bound_vars().intersection(&b.must_bound_vars()).cloned().collect(),
            Game::Seq(a, b) => {
                let mut s = a.must_bound_vars();
                s.extend(b.must_bound_vars());
                s
            }
            Game::Dual(a) => a.must_bound_vars(),
            _ => self.bound_vars(),
        }
    }

    /// Every variable atom mentioned anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        self.collect_all_vars(&mut s);
        s
    }

    fn collect_all_vars(&self, s: &mut BTreeSet<Var>) {
        match self {
            Game::Test(f) => f.collect_all_vars(s),
            Game::Assign(x, t) => {
                s.insert(x.clone());
                s.extend(t.vars());
            }
            Game::NondetAssign(x) => {
                s.insert(x.clone());
            }
            Game::Ode(o) => {
                for (x, f) in &o.eqs {
                    s.insert(Var::plain(x));
                    s.insert(Var::prime(x));
                    s.extend(f.vars());
                }
                o.constraint.collect_all_vars(s);
            }
            Game::Choice(a, b) | Game::Seq(a, b) => {
                a.collect_all_vars(s);
                b.collect_all_vars(s);
            }
            Game::Repeat(a) | Game::Dual(a) => a.collect_all_vars(s),
        }
    }

    pub fn map_vars(&self, m: &impl Fn(&Var) -> Var) -> Game {
        match self {
            Game::Test(f) => Game::test(f.map_vars(m)),
            Game::Assign(x, t) => Game::Assign(m(x), t.map_vars(m)),
            Game::NondetAssign(x) => Game::NondetAssign(m(x)),
            Game::Ode(o) => Game::Ode(Ode {
                eqs: o.eqs.iter().map(|(x, f)| (m(&Var::plain(x)).name, f.map_vars(m))).collect(),
                constraint: Box::new(o.constraint.map_vars(m)),
            }),
            Game::Choice(a, b) => Game::choice(a.map_vars(m), b.map_vars(m)),
            Game::Seq(a, b) => Game::seq(a.map_vars(m), b.map_vars(m)),
            Game::Repeat(a) => Game::repeat(a.map_vars(m)),
            Game::Dual(a) => Game::dual(a.map_vars(m)),
        }
    }

    pub fn rename(&self, x: &str, y: &str) -> Game {
        self.map_vars(&|v| transpose(v, x, y))
    }

    pub fn rank(&self) -> u32 {
        match self {
            Game::Test(f) => f.rank(),
            Game::Assign(..) | Game::NondetAssign(_) => 0,
            Game::Ode(o) => o.constraint.rank(),
            Game::Choice(a, b) | Game::Seq(a, b) => a.rank().max(b.rank()),
            Game::Repeat(a) | Game::Dual(a) => a.rank(),
        }
    }

    pub fn erase_ranks(&self) -> Game {
        match self {
            Game::Test(f) => Game::test(f.erase_ranks()),
            Game::Ode(o) => Game::Ode(Ode { eqs: o.eqs.clone(), constraint: Box::new(o.constraint.erase_ranks()) }),
            Game::Choice(a, b) => Game::choice(a.erase_ranks(), b.erase_ranks()),
            Game::Seq(a, b) => Game::seq(a.erase_ranks(), b.erase_ranks()),
            Game::Repeat(a) => Game::repeat(a.erase_ranks()),
            Game::Dual(a) => Game::dual(a.erase_ranks()),
            _ => self.clone(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Game::Test(f) => 1 + f.size(),
            Game::Assign(_, t) => 1 + t.size(),
            Game::NondetAssign(_) => 1,
            Game::Ode(o) => 1 + o.eqs.iter().map(|(_, f)| f.size()).sum::<usize>() + o.constraint.size(),
            Game::Choice(a, b) | Game::Seq(a, b) => 1 + a.size() + b.size(),
            Game::Repeat(a) | Game::Dual(a) => 1 + a.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Game::Test(f) => 1 + f.depth(),
            Game::Ode(o) => 1 + o.constraint.depth(),
            Game::Choice(a, b) | Game::Seq(a, b) => 1 + a.depth().max(b.depth()),
            Game::Repeat(a) | Game::Dual(a) => 1 + a.depth(),
            _ => 1,
        }
    }
}

/// Base-name transposition of `x` and `y`; primes follow their base.
pub fn transpose(v: &Var, x: &str, y: &str) -> Var {
    if v.name == x {
        Var { name: y.to_string(), primed: v.primed }
    } else if v.name == y {
        Var { name: x.to_string(), primed: v.primed }
    } else {
        v.clone()
    }
}

/// Transposition of exactly the two atoms `a` and `b`.
pub fn transpose_atoms(v: &Var, a: &Var, b: &Var) -> Var {
    if v == a {
        b.clone()
    } else if v == b {
        a.clone()
    } else {
        v.clone()
    }
}

impl Formula {
    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Formula {
        Formula::Compare(op, a, b)
    }

    pub fn boxf(g: Game, f: Formula) -> Formula {
        Formula::Box(Box::new(g), Box::new(f))
    }

    pub fn diamond(g: Game, f: Formula) -> Formula {
        Formula::Diamond(Box::new(g), Box::new(f))
    }

    pub fn refine(rank: Option<u32>, a: Game, b: Game) -> Formula {
        Formula::Refine(rank, Box::new(a), Box::new(b))
    }

    pub fn arefine(rank: Option<u32>, a: Game, b: Game) -> Formula {
        Formula::refine(rank, Game::dual(a), Game::dual(b))
    }

    pub fn tt() -> Formula {
        Formula::cmp(CmpOp::Gt, Term::lit(1), Term::lit(0))
    }

    pub fn ff() -> Formula {
        Formula::cmp(CmpOp::Gt, Term::lit(0), Term::lit(1))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::diamond(Game::test(a), b)
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::diamond(Game::choice(Game::test(a), Game::test(b)), Formula::tt())
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::boxf(Game::test(a), b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::boxf(Game::test(a), Formula::ff())
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::boxf(Game::random(x), f)
    }

    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::diamond(Game::random(x), f)
    }

    /// Conjunction of all items; `tt` when empty.
    pub fn and_all(items: Vec<Formula>) -> Formula {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Formula::tt(),
            Some(last) => it.fold(last, |acc, f| Formula::and(f, acc)),
        }
    }

    pub fn is_tt(&self) -> bool {
        *self == Formula::tt()
    }

    pub fn is_ff(&self) -> bool {
        *self == Formula::ff()
    }

    pub fn as_and(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Diamond(g, b) => match &**g {
                Game::Test(a) => Some((a, b)),
                _ => None,
            },
            _ => None,
        }
    }

    /// `⟨?a ∪ ?b⟩ρ`, the shape of a disjunction scrutinee; ρ is `tt` for `a | b`.
    pub fn as_or_shape(&self) -> Option<(&Formula, &Formula, &Formula)> {
        match self {
            Formula::Diamond(g, rho) => match &**g {
                Game::Choice(l, r) => match (&**l, &**r) {
                    (Game::Test(a), Game::Test(b)) => Some((a, b, rho)),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    pub fn as_or(&self) -> Option<(&Formula, &Formula)> {
        self.as_or_shape().filter(|(_, _, r)| r.is_tt()).map(|(a, b, _)| (a, b))
    }

    pub fn as_implies(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Box(g, b) => match &**g {
                Game::Test(a) => Some((a, b)),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn as_forall(&self) -> Option<(&Var, &Formula)> {
        match self {
            Formula::Box(g, b) => match &**g {
                Game::NondetAssign(x) => Some((x, b)),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn as_exists(&self) -> Option<(&Var, &Formula)> {
        match self {
            Formula::Diamond(g, b) => match &**g {
                Game::NondetAssign(x) => Some((x, b)),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        match self {
            Formula::Compare(_, a, b) => {
                let mut s = a.vars();
                s.extend(b.vars());
                s
            }
            Formula::Box(g, f) | Formula::Diamond(g, f) => {
                let mut s = g.free_vars();
                let mbv = g.must_bound_vars();
                s.extend(f.free_vars().into_iter().filter(|v| !mbv.contains(v)));
                s
            }
            Formula::Refine(_, a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
        }
    }

    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        self.collect_all_vars(&mut s);
        s
    }

    fn collect_all_vars(&self, s: &mut BTreeSet<Var>) {
        match self {
            Formula::Compare(_, a, b) => {
                s.extend(a.vars());
                s.extend(b.vars());
            }
            Formula::Box(g, f) | Formula::Diamond(g, f) => {
                g.collect_all_vars(s);
                f.collect_all_vars(s);
            }
            Formula::Refine(_, a, b) => {
                a.collect_all_vars(s);
                b.collect_all_vars(s);
            }
        }
    }

    pub fn map_vars(&self, m: &impl Fn(&Var) -> Var) -> Formula {
        match self {
            Formula::Compare(op, a, b) => Formula::Compare(*op, a.map_vars(m), b.map_vars(m)),
            Formula::Box(g, f) => Formula::boxf(g.map_vars(m), f.map_vars(m)),
            Formula::Diamond(g, f) => Formula::diamond(g.map_vars(m), f.map_vars(m)),
            Formula::Refine(r, a, b) => Formula::refine(*r, a.map_vars(m), b.map_vars(m)),
        }
    }

    /// Uniform renaming: transposes `x` and `y` (and `x'` and `y'`).
    pub fn rename(&self, x: &str, y: &str) -> Formula {
        self.map_vars(&|v| transpose(v, x, y))
    }

    pub fn has_modality(&self) -> bool {
        !matches!(self, Formula::Compare(..))
    }

    pub fn rank(&self) -> u32 {
        match self {
            Formula::Compare(..) => 0,
            Formula::Box(g, f) | Formula::Diamond(g, f) => g.rank().max(f.rank()),
            Formula::Refine(Some(i), _, _) => i + 1,
            Formula::Refine(None, a, b) => 1 + a.rank().max(b.rank()),
        }
    }

    pub fn erase_ranks(&self) -> Formula {
        match self {
            Formula::Compare(..) => self.clone(),
            Formula::Box(g, f) => Formula::boxf(g.erase_ranks(), f.erase_ranks()),
            Formula::Diamond(g, f) => Formula::diamond(g.erase_ranks(), f.erase_ranks()),
            Formula::Refine(_, a, b) => Formula::refine(None, a.erase_ranks(), b.erase_ranks()),
        }
    }

    /// Structural equality ignoring rank annotations.
    pub fn eq_mod_rank(&self, other: &Formula) -> bool {
        self == other || self.erase_ranks() == other.erase_ranks()
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Compare(_, a, b) => 1 + a.size() + b.size(),
            Formula::Box(g, f) | Formula::Diamond(g, f) => 1 + g.size() + f.size(),
            Formula::Refine(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Compare(..) => 1,
            Formula::Box(g, f) | Formula::Diamond(g, f) => 1 + g.depth().max(f.depth()),
            Formula::Refine(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("inadmissible substitution: occurrence `{occurrence}` is captured by `{binder}`")]
pub struct AdmissibilityError {
    pub occurrence: String,
    pub binder: String,
}

/// Replace free occurrences of `x` by `f`, failing when an occurrence sits
/// under a game that may write `x` or a variable of `f`.
pub fn substitute(phi: &Formula, x: &Var, f: &Term) -> Result<Formula, AdmissibilityError> {
    Subst { x, f, danger: danger_set(x, f) }.formula(phi, &BTreeSet::new())
}

pub fn substitute_term(t: &Term, x: &Var, f: &Term) -> Term {
    t.replace(x, f)
}

pub fn substitute_game(g: &Game, x: &Var, f: &Term) -> Result<Game, AdmissibilityError> {
    Subst { x, f, danger: danger_set(x, f) }.game(g, &BTreeSet::new()).map(|(g, _)| g)
}

fn danger_set(x: &Var, f: &Term) -> BTreeSet<Var> {
    let mut d = f.vars();
    d.insert(x.clone());
    d
}

struct Subst<'a> {
    x: &'a Var,
    f: &'a Term,
    danger: BTreeSet<Var>,
}

impl Subst<'_> {
    fn term(&self, t: &Term, bound: &BTreeSet<Var>) -> Result<Term, AdmissibilityError> {
        if !t.vars().contains(self.x) {
            return Ok(t.clone());
        }
        if let Some(b) = bound.iter().find(|v| self.danger.contains(*v)) {
            return Err(AdmissibilityError { occurrence: crate::surface::print_term(t), binder: b.to_string() });
        }
        Ok(t.replace(self.x, self.f))
    }

    fn formula(&self, phi: &Formula, bound: &BTreeSet<Var>) -> Result<Formula, AdmissibilityError> {
        Ok(match phi {
            Formula::Compare(op, a, b) => Formula::Compare(*op, self.term(a, bound)?, self.term(b, bound)?),
            Formula::Box(g, p) | Formula::Diamond(g, p) => {
                let (g2, dead) = self.game(g, bound)?;
                let p2 = if dead {
                    (**p).clone()
                } else {
                    let mut inner = bound.clone();
                    inner.extend(g.bound_vars());
                    self.formula(p, &inner)?
                };
                if matches!(phi, Formula::Box(..)) {
                    Formula::boxf(g2, p2)
                } else {
                    Formula::diamond(g2, p2)
                }
            }
            Formula::Refine(r, a, b) => Formula::refine(*r, self.game(a, bound)?.0, self.game(b, bound)?.0),
        })
    }

    /// Returns the substituted game and whether `x` is must-written by it.
    fn game(&self, g: &Game, bound: &BTreeSet<Var>) -> Result<(Game, bool), AdmissibilityError> {
        let dead = g.must_bound_vars().contains(self.x);
        let out = match g {
            Game::Test(p) => Game::test(self.formula(p, bound)?),
            Game::Assign(y, t) => Game::Assign(y.clone(), self.term(t, bound)?),
            Game::NondetAssign(_) => g.clone(),
            Game::Ode(o) => {
                let mut inner = bound.clone();
                inner.extend(g.bound_vars());
                let mut eqs = Vec::new();
                for (y, t) in &o.eqs {
                    eqs.push((y.clone(), self.term(t, &inner)?));
                }
                let c = self.formula(&o.constraint, &inner)?;
                // The initial value of an evolving variable is read too.
                if o.vars().any(|y| Var::plain(y) == *self.x) {
                    return Err(AdmissibilityError {
                        occurrence: self.x.to_string(),
                        binder: crate::surface::print_game(g),
                    });
                }
                Game::Ode(Ode { eqs, constraint: Box::new(c) })
            }
            Game::Choice(a, b) => Game::choice(self.game(a, bound)?.0, self.game(b, bound)?.0),
            Game::Seq(a, b) => {
                let (a2, a_dead) = self.game(a, bound)?;
                let b2 = if a_dead {
                    (**b).clone()
                } else {
                    let mut inner = bound.clone();
                    inner.extend(a.bound_vars());
                    self.game(b, &inner)?.0
                };
                Game::seq(a2, b2)
            }
            Game::Repeat(a) => {
                let mut inner = bound.clone();
                inner.extend(a.bound_vars());
                Game::repeat(self.game(a, &inner)?.0)
            }
            Game::Dual(a) => Game::dual(self.game(a, bound)?.0),
        };
        Ok((out, dead))
    }
}

/// Labelled assumptions, in order. Labels are pairwise distinct.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Context {
    entries: Vec<(String, Formula)>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn from_entries(entries: Vec<(String, Formula)>) -> Context {
        Context { entries }
    }

    pub fn entries(&self) -> &[(String, Formula)] {
        &self.entries
    }

    pub fn get(&self, label: &str) -> Option<&Formula> {
        self.entries.iter().rev().find(|(l, _)| l == label).map(|(_, f)| f)
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.entries.iter().any(|(l, _)| l == label)
    }

    pub fn with(&self, label: &str, f: Formula) -> Context {
        let mut c = self.clone();
        c.entries.push((label.to_string(), f));
        c
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.entries.iter().map(|(_, f)| f)
    }

    pub fn map_formulas(&self, m: impl Fn(&Formula) -> Formula) -> Context {
        Context { entries: self.entries.iter().map(|(l, f)| (l.clone(), m(f))).collect() }
    }

    pub fn rename(&self, x: &str, y: &str) -> Context {
        self.map_formulas(|f| f.rename(x, y))
    }

    pub fn all_vars(&self) -> BTreeSet<Var> {
        self.formulas().flat_map(|f| f.all_vars()).collect()
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        self.formulas().flat_map(|f| f.free_vars()).collect()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::surface::print_context(self))
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::surface::print_game(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::surface::print_formula(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::surface::print_term(self))
    }
}
