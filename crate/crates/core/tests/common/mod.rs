//! Test helpers shared by several suites: brute-force game semantics over a
//! two-point domain and the game depth used for corpus bounds.

#![allow(dead_code)]

use cdgl_core::syntax::{Formula, Game};
use cdgl_core::term::{eval, rat, Rat, Term, Var};

impl Finite {
    pub fn new(vars: &[&str]) -> Finite {
        Finite { vars: vars.iter().map(|v| v.to_string()).collect() }
    }
}

/// Brute-force game semantics over states `vars -> {0, 1}`. A state is a
/// bit vector and a region is a bit set over states.
pub struct Finite {
    pub vars: Vec<String>,
}

impl Finite {
    fn states(&self) -> usize {
        1 << self.vars.len()
    }

    pub fn all(&self) -> u64 {
        (1u64 << self.states()) - 1
    }

    fn index(&self, v: &Var) -> usize {
        assert!(!v.primed, "primed variable {v} outside the finite domain");
        self.vars.iter().position(|x| *x == v.name).unwrap_or_else(|| panic!("variable {v} outside the finite domain"))
    }

    fn term(&self, t: &Term, s: usize) -> Rat {
        eval(t, &|v: &Var| Some(rat(((s >> self.index(v)) & 1) as i64))).expect("closed term")
    }

    fn set(&self, s: usize, v: &Var, q: &Rat) -> usize {
        let bit = if *q == rat(0) {
            0
        } else if *q == rat(1) {
            1
        } else {
            panic!("value {q} outside the finite domain")
        };
        let i = self.index(v);
        (s & !(1 << i)) | (bit << i)
    }

    fn region(&self, pred: impl Fn(usize) -> bool) -> u64 {
        (0..self.states()).filter(|&s| pred(s)).fold(0, |acc, s| acc | 1 << s)
    }

    fn formula(&self, f: &Formula) -> u64 {
        match f {
            Formula::Compare(op, a, b) => self.region(|s| op.holds(self.term(a, s).cmp(&self.term(b, s)))),
            Formula::Diamond(g, p) => self.angel(g, self.formula(p)),
            Formula::Box(g, p) => self.demon(g, self.formula(p)),
            Formula::Refine(..) => panic!("refinement formula in a test"),
        }
    }

    /// States from which Angel can reach `p`.
    pub fn angel(&self, g: &Game, p: u64) -> u64 {
        match g {
            Game::Test(f) => self.formula(f) & p,
            Game::Assign(x, f) => self.region(|s| p >> self.set(s, x, &self.term(f, s)) & 1 == 1),
            Game::NondetAssign(x) => self.region(|s| [rat(0), rat(1)].iter().any(|q| p >> self.set(s, x, q) & 1 == 1)),
            Game::Choice(a, b) => self.angel(a, p) | self.angel(b, p),
            Game::Seq(a, b) => self.angel(a, self.angel(b, p)),
            Game::Repeat(a) => {
                let mut z = p;
                loop {
                    let next = p | self.angel(a, z);
                    if next == z {
                        return z;
                    }
                    z = next;
                }
            }
            Game::Dual(a) => self.all() & !self.angel(a, self.all() & !p),
            Game::Ode(_) => panic!("ODE outside the finite domain"),
        }
    }

    /// States from which Demon can force `p`.
    pub fn demon(&self, g: &Game, p: u64) -> u64 {
        self.all() & !self.angel(g, self.all() & !p)
    }

    pub fn equivalent(&self, a: &Game, b: &Game) -> bool {
        (0..=self.all()).all(|p| self.demon(a, p) == self.demon(b, p))
    }

    /// `a` refines `b`: Demon wins `a` only where he wins `b`, for every goal.
    pub fn refines(&self, a: &Game, b: &Game) -> bool {
        (0..=self.all()).all(|p| self.demon(a, p) & !self.demon(b, p) == 0)
    }
}

/// Nesting depth of game constructors; tests and ODEs count as leaves.
pub fn game_depth(g: &Game) -> usize {
    match g {
        Game::Choice(a, b) | Game::Seq(a, b) => 1 + game_depth(a).max(game_depth(b)),
        Game::Repeat(a) | Game::Dual(a) => 1 + game_depth(a),
        _ => 1,
    }
}
