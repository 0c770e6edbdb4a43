//! Backtracking recursive-descent parser. On failure the error reports the
//! furthest position any alternative reached and everything expected there.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::lexer::{lex, Comment, Tok, Token};
use super::{Decl, Item, ParseError, Sequent, SourceFile};
use crate::proof::{Derivation, Dir, ForProof, Meta, MetaKind, Premise, Proof, Rule};
use crate::syntax::{CmpOp, Context, Formula, Game, Ode};
use crate::term::{Rat, Term, Var};

const RESERVED: &[&str] = &["tt", "ff", "skip", "game", "formula", "proof", "derivation"];

/// Marker for a failed alternative; details live in the parser's furthest-error record.
#[derive(Debug)]
pub(crate) struct Fail;

type PResult<T> = Result<T, Fail>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    comments: Vec<Comment>,
    pos: usize,
    allow_diff: bool,
    furthest: usize,
    expected: BTreeSet<String>,
    games: HashMap<String, Game>,
    formulas: HashMap<String, Formula>,
}

impl Parser {
    pub fn new(text: &str, allow_diff: bool) -> Result<Parser, ParseError> {
        let (toks, comments) = lex(text)?;
        Ok(Parser {
            toks,
            comments,
            pos: 0,
            allow_diff,
            furthest: 0,
            expected: BTreeSet::new(),
            games: HashMap::new(),
            formulas: HashMap::new(),
        })
    }

    /// Runs `f` and requires it to consume the entire input.
    pub fn whole<T>(mut self, f: impl FnOnce(&mut Parser) -> PResult<T>) -> Result<T, ParseError> {
        match f(&mut self) {
            Ok(v) if self.at_eof() => Ok(v),
            Ok(_) => {
                self.fail("end of input");
                Err(self.error())
            }
            Err(Fail) => Err(self.error()),
        }
    }

    fn error(&self) -> ParseError {
        let t = &self.toks[self.furthest.min(self.toks.len() - 1)];
        ParseError { line: t.line, col: t.col, expected: self.expected.clone(), found: t.tok.describe() }
    }

    fn fail(&mut self, what: &str) -> Fail {
        if self.pos > self.furthest {
            self.furthest = self.pos;
            self.expected.clear();
        }
        if self.pos == self.furthest {
            self.expected.insert(what.to_string());
        }
        Fail
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.fail(&format!("`{s}`")))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(x) if !RESERVED.contains(&x.as_str()) => {
                self.pos += 1;
                Ok(x)
            }
            _ => Err(self.fail("identifier")),
        }
    }

    fn var(&mut self) -> PResult<Var> {
        match self.peek().clone() {
            Tok::PrimedIdent(x) => {
                self.pos += 1;
                Ok(Var::prime(&x))
            }
            _ => Ok(Var::plain(&self.ident()?)),
        }
    }

    fn attempt<T>(&mut self, f: impl FnOnce(&mut Parser) -> PResult<T>) -> PResult<T> {
        let save = self.pos;
        let r = f(self);
        if r.is_err() {
            self.pos = save;
        }
        r
    }

    fn comma(&mut self) -> PResult<()> {
        self.expect_sym(",")
    }

    // ---- terms ----

    pub fn term(&mut self) -> PResult<Term> {
        let mut t = self.product()?;
        loop {
            if self.eat_sym("+") {
                t = Term::add(t, self.product()?);
            } else if self.eat_sym("-") {
                t = Term::sub(t, self.product()?);
            } else {
                return Ok(t);
            }
        }
    }

    fn starts_unary(&self) -> bool {
        matches!(self.peek(), Tok::Num(_) | Tok::PrimedIdent(_) | Tok::Sym("(") | Tok::Sym("-"))
            || matches!(self.peek(), Tok::Ident(x) if !RESERVED.contains(&x.as_str()))
    }

    fn product(&mut self) -> PResult<Term> {
        let mut t = self.unary()?;
        loop {
            // A `*` not followed by a factor is a game repetition.
            if self.is_sym("*") && {
                self.pos += 1;
                let ok = self.starts_unary();
                self.pos -= 1;
                ok
            } {
                self.pos += 1;
                t = Term::mul(t, self.unary()?);
            } else {
                return Ok(t);
            }
        }
    }

    fn unary(&mut self) -> PResult<Term> {
        if self.eat_sym("-") {
            return Ok(Term::neg(self.unary()?));
        }
        match self.peek().clone() {
            Tok::Num(q) => {
                self.pos += 1;
                Ok(Term::Lit(q))
            }
            Tok::PrimedIdent(x) => {
                self.pos += 1;
                Ok(Term::Primed(x))
            }
            Tok::Sym("(") => {
                self.pos += 1;
                let inner = self.term()?;
                self.expect_sym(")")?;
                if self.is_sym("'") {
                    if !self.allow_diff {
                        return Err(self.fail("no differential outside a standalone term"));
                    }
                    self.pos += 1;
                    return Ok(Term::diff(inner));
                }
                Ok(inner)
            }
            _ => match self.ident() {
                Ok(x) => Ok(Term::Var(x)),
                Err(_) => Err(self.fail("term")),
            },
        }
    }

    fn cmp_op(&mut self) -> PResult<CmpOp> {
        let op = match self.peek() {
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return Err(self.fail("comparison operator")),
        };
        self.pos += 1;
        Ok(op)
    }

    fn rational(&mut self) -> PResult<Rat> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Num(q) => {
                self.pos += 1;
                Ok(if neg { -q } else { q })
            }
            _ => Err(self.fail("number")),
        }
    }

    fn nat(&mut self) -> PResult<u32> {
        match self.peek().clone() {
            Tok::Num(q) if q.is_integer() => match q.to_integer().try_into() {
                Ok(n) => {
                    self.pos += 1;
                    Ok(n)
                }
                Err(_) => Err(self.fail("rank")),
            },
            _ => Err(self.fail("rank")),
        }
    }

    // ---- games ----

    pub fn game(&mut self) -> PResult<Game> {
        let a = self.seq_game()?;
        if self.eat_sym("++") {
            Ok(Game::choice(a, self.game()?))
        } else {
            Ok(a)
        }
    }

    fn seq_game(&mut self) -> PResult<Game> {
        let a = self.postfix_game()?;
        if self.eat_sym(";") {
            Ok(Game::seq(a, self.seq_game()?))
        } else {
            Ok(a)
        }
    }

    fn postfix_game(&mut self) -> PResult<Game> {
        let mut g = self.primary_game()?;
        loop {
            if self.eat_sym("*") {
                g = Game::repeat(g);
            } else if self.eat_sym("^d") {
                g = Game::dual(g);
            } else {
                return Ok(g);
            }
        }
    }

    fn primary_game(&mut self) -> PResult<Game> {
        match self.peek().clone() {
            Tok::Ident(w) if w == "skip" => {
                self.pos += 1;
                Ok(Game::skip())
            }
            Tok::Sym("?") => {
                self.pos += 1;
                Ok(Game::test(self.unary_formula()?))
            }
            Tok::Sym("{") => {
                self.pos += 1;
                let g = if matches!(self.peek(), Tok::PrimedIdent(_)) && matches!(self.peek_at(1), Tok::Sym("=")) {
                    self.ode()?
                } else {
                    self.game()?
                };
                self.expect_sym("}")?;
                Ok(g)
            }
            Tok::PrimedIdent(x) => {
                self.pos += 1;
                self.assignment(Var::prime(&x))
            }
            Tok::Ident(x) if !RESERVED.contains(&x.as_str()) => {
                if matches!(self.peek_at(1), Tok::Sym(":=")) {
                    self.pos += 1;
                    return self.assignment(Var::plain(&x));
                }
                match self.games.get(&x) {
                    Some(g) => {
                        let g = g.clone();
                        self.pos += 1;
                        Ok(g)
                    }
                    None => Err(self.fail("game")),
                }
            }
            _ => Err(self.fail("game")),
        }
    }

    fn assignment(&mut self, x: Var) -> PResult<Game> {
        self.expect_sym(":=")?;
        if self.eat_sym("*") {
            Ok(Game::NondetAssign(x))
        } else {
            Ok(Game::Assign(x, self.term()?))
        }
    }

    /// ODE body after the opening brace.
    fn ode(&mut self) -> PResult<Game> {
        let mut eqs: Vec<(String, Term)> = Vec::new();
        loop {
            let x = match self.peek().clone() {
                Tok::PrimedIdent(x) => {
                    self.pos += 1;
                    x
                }
                _ => return Err(self.fail("differential equation `x'=f`")),
            };
            if eqs.iter().any(|(y, _)| *y == x) {
                self.pos -= 1;
                return Err(self.fail("a variable without an equation yet"));
            }
            self.expect_sym("=")?;
            let f = self.term()?;
            if f.mentions_primed() {
                return Err(self.fail("an explicit right-hand side"));
            }
            eqs.push((x, f));
            if !self.eat_sym(",") {
                break;
            }
        }
        let constraint = if self.eat_sym("&") { self.formula()? } else { Formula::tt() };
        if constraint.free_vars().iter().any(|v| v.primed) {
            return Err(self.fail("a constraint without primed variables"));
        }
        Ok(Game::Ode(Ode { eqs, constraint: Box::new(constraint) }))
    }

    // ---- formulas ----

    pub fn formula(&mut self) -> PResult<Formula> {
        let a = self.implies_formula()?;
        if self.eat_sym("<->") {
            Ok(Formula::iff(a, self.implies_formula()?))
        } else {
            Ok(a)
        }
    }

    fn implies_formula(&mut self) -> PResult<Formula> {
        let a = self.or_formula()?;
        if self.eat_sym("->") {
            Ok(Formula::implies(a, self.implies_formula()?))
        } else {
            Ok(a)
        }
    }

    fn or_formula(&mut self) -> PResult<Formula> {
        let a = self.and_formula()?;
        if self.eat_sym("|") {
            Ok(Formula::or(a, self.or_formula()?))
        } else {
            Ok(a)
        }
    }

    fn and_formula(&mut self) -> PResult<Formula> {
        let a = self.unary_formula()?;
        if self.eat_sym("&") {
            Ok(Formula::and(a, self.and_formula()?))
        } else {
            Ok(a)
        }
    }

    fn unary_formula(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Sym("!") => {
                self.pos += 1;
                Ok(Formula::not(self.unary_formula()?))
            }
            Tok::Sym("[") => {
                self.pos += 1;
                let g = self.game()?;
                self.expect_sym("]")?;
                Ok(Formula::boxf(g, self.unary_formula()?))
            }
            Tok::Sym("<") => {
                self.pos += 1;
                let g = self.game()?;
                self.expect_sym(">")?;
                Ok(Formula::diamond(g, self.unary_formula()?))
            }
            Tok::Keyword(k) if k == "forall" || k == "exists" => {
                self.pos += 1;
                let x = self.var()?;
                let body = self.unary_formula()?;
                let g = Game::NondetAssign(x);
                Ok(if k == "forall" { Formula::boxf(g, body) } else { Formula::diamond(g, body) })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> PResult<Formula> {
        if self.eat_word("tt") {
            return Ok(Formula::tt());
        }
        if self.eat_word("ff") {
            return Ok(Formula::ff());
        }
        if let Ok(f) = self.attempt(|p| {
            let a = p.term()?;
            let op = p.cmp_op()?;
            let b = p.term()?;
            Ok(Formula::cmp(op, a, b))
        }) {
            return Ok(f);
        }
        if let Ok(f) = self.attempt(|p| p.refinement()) {
            return Ok(f);
        }
        if self.eat_sym("(") {
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        if let Tok::Ident(x) = self.peek().clone() {
            if let Some(f) = self.formulas.get(&x) {
                let f = f.clone();
                self.pos += 1;
                return Ok(f);
            }
        }
        Err(self.fail("formula"))
    }

    fn refinement(&mut self) -> PResult<Formula> {
        let a = self.postfix_game()?;
        let angelic = if self.eat_sym("=<>") {
            true
        } else {
            self.expect_sym("=<")?;
            false
        };
        let rank = if self.eat_sym("[") {
            let n = self.nat()?;
            self.expect_sym("]")?;
            Some(n)
        } else {
            None
        };
        let b = self.postfix_game()?;
        Ok(if angelic { Formula::arefine(rank, a, b) } else { Formula::refine(rank, a, b) })
    }

    // ---- contexts ----

    pub fn context_entries(&mut self) -> PResult<Context> {
        let mut entries: Vec<(String, Formula)> = Vec::new();
        if !(matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Sym(":"))) {
            return Ok(Context::new());
        }
        loop {
            let l = self.ident()?;
            if entries.iter().any(|(m, _)| *m == l) {
                self.pos -= 1;
                return Err(self.fail("a label not already in the context"));
            }
            self.expect_sym(":")?;
            entries.push((l, self.formula()?));
            if !self.eat_sym(",") {
                return Ok(Context::from_entries(entries));
            }
        }
    }

    fn sequent(&mut self) -> PResult<Sequent> {
        let ctx = self.context_entries()?;
        self.expect_sym("|-")?;
        Ok(Sequent { ctx, goal: self.formula()? })
    }

    // ---- proofs ----

    fn binder(&mut self) -> PResult<(String, Proof)> {
        let l = self.ident()?;
        self.expect_sym("=>")?;
        Ok((l, self.proof()?))
    }

    fn sln(&mut self) -> PResult<Vec<(String, Term)>> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        loop {
            let x = self.ident()?;
            self.expect_sym(":=")?;
            out.push((x, self.term()?));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    pub fn proof(&mut self) -> PResult<Proof> {
        if self.eat_sym("(") {
            let a = self.proof()?;
            if self.eat_sym(",") {
                let b = self.proof()?;
                self.expect_sym(")")?;
                return Ok(Proof::pair(a, b));
            }
            self.expect_sym(")")?;
            return Ok(a);
        }
        let start = self.pos;
        let name = self.ident().map_err(|_| self.fail("proof"))?;
        if !self.eat_sym("(") {
            return Ok(Proof::Hyp(name));
        }
        let b = Box::new;
        let p = match name.as_str() {
            "injL" => Proof::InjL(b(self.proof()?)),
            "injR" => Proof::InjR(b(self.proof()?)),
            "seq" => Proof::SeqIntro(b(self.proof()?)),
            "dual" => Proof::DualIntro(b(self.proof()?)),
            "stop" => Proof::Stop(b(self.proof()?)),
            "go" => Proof::Go(b(self.proof()?)),
            "projL" => Proof::ProjL(b(self.proof()?)),
            "projR" => Proof::ProjR(b(self.proof()?)),
            "dw" => Proof::DW(b(self.proof()?)),
            "seqE" => Proof::SeqElim(b(self.proof()?)),
            "dualE" => Proof::DualElim(b(self.proof()?)),
            "case" | "rcase" | "fp" => {
                let scrut = b(self.proof()?);
                self.comma()?;
                let (l, lsub) = self.binder()?;
                self.comma()?;
                let (r, rsub) = self.binder()?;
                let (lsub, rsub) = (b(lsub), b(rsub));
                match name.as_str() {
                    "case" => Proof::Case { scrut, left: l, lsub, right: r, rsub },
                    "rcase" => Proof::RepCase { scrut, stop: l, ssub: lsub, go: r, gsub: rsub },
                    _ => Proof::FP { scrut, stop: l, ssub: lsub, go: r, gsub: rsub },
                }
            }
            "lamR" => {
                let (ghost, sub) = self.binder()?;
                Proof::LamReal { ghost, sub: b(sub) }
            }
            "lamP" => {
                let label = self.ident()?;
                self.expect_sym(":")?;
                let hyp = self.formula()?;
                self.expect_sym("=>")?;
                Proof::LamProof { label, hyp, sub: b(self.proof()?) }
            }
            "asgn" => {
                let ghost = self.ident()?;
                self.comma()?;
                let target = self.var()?;
                self.comma()?;
                let (label, sub) = self.binder()?;
                Proof::AssignIntro { ghost, target, label, sub: b(sub) }
            }
            "dasgn" => {
                let witness = self.term()?;
                self.comma()?;
                let ghost = self.ident()?;
                self.comma()?;
                let (label, sub) = self.binder()?;
                Proof::DAssignIntro { witness, ghost, label, sub: b(sub) }
            }
            "rep" => {
                let base = b(self.proof()?);
                self.comma()?;
                let step_label = self.ident()?;
                self.expect_sym(":")?;
                let inv = self.formula()?;
                self.expect_sym("=>")?;
                let step = b(self.proof()?);
                self.comma()?;
                let (post_label, post) = self.binder()?;
                Proof::Rep { base, step_label, inv, step, post_label, post: b(post) }
            }
            "for" => {
                let metric = self.term()?;
                self.comma()?;
                let variant = self.formula()?;
                self.comma()?;
                let ghost = self.ident()?;
                self.comma()?;
                let eps = self.rational()?;
                self.comma()?;
                let base = self.proof()?;
                self.comma()?;
                let s1 = self.ident()?;
                let s2 = self.ident()?;
                self.expect_sym("=>")?;
                let step = self.proof()?;
                self.comma()?;
                let p1 = self.ident()?;
                let p2 = self.ident()?;
                self.expect_sym("=>")?;
                let post = self.proof()?;
                Proof::For(Box::new(ForProof {
                    metric,
                    variant,
                    ghost,
                    eps,
                    base,
                    step_labels: (s1, s2),
                    step,
                    post_labels: (p1, p2),
                    post,
                }))
            }
            "app" => {
                let f = b(self.proof()?);
                self.comma()?;
                Proof::App(f, b(self.proof()?))
            }
            "appt" => {
                let f = b(self.proof()?);
                self.comma()?;
                Proof::AppTerm(f, self.term()?)
            }
            "unpack" => {
                let packed = b(self.proof()?);
                self.comma()?;
                let ghost = self.ident()?;
                self.comma()?;
                let (label, sub) = self.binder()?;
                Proof::Unpack { packed, ghost, label, sub: b(sub) }
            }
            "qe" => {
                let target = self.formula()?;
                let sub = if self.eat_sym(",") { Some(b(self.proof()?)) } else { None };
                Proof::QE { target, sub }
            }
            "dec" => {
                let target = self.formula()?;
                self.comma()?;
                Proof::Dec { target, sub: b(self.proof()?) }
            }
            "split" => {
                let left = self.term()?;
                self.comma()?;
                let right = self.term()?;
                self.comma()?;
                let eps = self.term()?;
                self.comma()?;
                Proof::Split { left, right, eps, sub: b(self.proof()?) }
            }
            "ghost" => {
                let var = self.ident()?;
                self.comma()?;
                let rhs = self.term()?;
                self.comma()?;
                let (label, sub) = self.binder()?;
                Proof::Ghost { var, rhs, label, sub: b(sub) }
            }
            "mon" => {
                let main = b(self.proof()?);
                self.comma()?;
                let mid = self.formula()?;
                self.comma()?;
                let (label, sub) = self.binder()?;
                Proof::Mon { main, mid, label, sub: b(sub) }
            }
            "di" => {
                let base = b(self.proof()?);
                self.comma()?;
                Proof::DI { base, step: b(self.proof()?) }
            }
            "dc" => {
                let cut = self.formula()?;
                self.comma()?;
                let show = b(self.proof()?);
                self.comma()?;
                Proof::DC { cut, show, use_: b(self.proof()?) }
            }
            "dg" => {
                let var = self.ident()?;
                self.comma()?;
                let init = self.term()?;
                self.comma()?;
                let a = self.term()?;
                self.comma()?;
                let bb = self.term()?;
                self.comma()?;
                let (label, sub) = self.binder()?;
                Proof::DG { var, init, a, b: bb, label, sub: b(sub) }
            }
            "bsolve" => {
                let time = self.ident()?;
                self.comma()?;
                let range = self.ident()?;
                self.comma()?;
                let sln = self.sln()?;
                self.comma()?;
                Proof::BSolve { time, range, sln, sub: b(self.proof()?) }
            }
            "dsolve" => {
                let time = self.ident()?;
                self.comma()?;
                let duration = self.term()?;
                self.comma()?;
                let sln = self.sln()?;
                self.comma()?;
                let dom = b(self.proof()?);
                self.comma()?;
                Proof::DSolve { time, duration, sln, dom, post: b(self.proof()?) }
            }
            "asgnE" => {
                let main = b(self.proof()?);
                self.comma()?;
                let ghost = self.ident()?;
                self.comma()?;
                let eq_label = self.ident()?;
                self.comma()?;
                let (label, sub) = self.binder()?;
                Proof::AssignElim { main, ghost, eq_label, label, sub: b(sub) }
            }
            "ref" => Proof::RefProof(Box::new(self.derivation()?)),
            "boxref" | "diaref" => {
                let main = b(self.proof()?);
                self.comma()?;
                let refinement = b(self.proof()?);
                if name == "boxref" {
                    Proof::BoxRef { main, refinement }
                } else {
                    Proof::DiamondRef { main, refinement }
                }
            }
            _ => {
                self.pos = start;
                return Err(self.fail("proof constructor"));
            }
        };
        self.expect_sym(")")?;
        Ok(p)
    }

    // ---- derivations ----

    fn starts_derivation(&self) -> bool {
        match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(w), Tok::Sym("{")) => Rule::from_name(w).is_some(),
            (Tok::Ident(w), Tok::Ident(r)) => (w == "rev" || w == "both") && Rule::from_name(r).is_some(),
            _ => false,
        }
    }

    pub fn derivation(&mut self) -> PResult<Derivation> {
        let dir = if self.eat_word("rev") {
            Dir::Rev
        } else if self.eat_word("both") {
            Dir::Both
        } else {
            Dir::Fwd
        };
        let rule = match self.peek().clone() {
            Tok::Ident(w) => match Rule::from_name(&w) {
                Some(r) => {
                    self.pos += 1;
                    r
                }
                None => return Err(self.fail("rule name")),
            },
            _ => return Err(self.fail("rule name")),
        };
        self.expect_sym("{")?;
        let mut inst = BTreeMap::new();
        if !self.eat_sym("}") {
            loop {
                let key = self.ident()?;
                let kind = match rule.keys().iter().find(|(k, _)| *k == key) {
                    Some((_, kind)) if !inst.contains_key(&key) => *kind,
                    _ => {
                        self.pos -= 1;
                        return Err(self.fail(&format!("a metavariable of `{}`", rule.name())));
                    }
                };
                self.expect_sym(":=")?;
                let value = self.meta(kind)?;
                inst.insert(key, value);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("}")?;
        }
        let mut premises = Vec::new();
        if self.eat_sym("(") {
            loop {
                premises.push(if self.starts_derivation() {
                    Premise::Derivation(self.derivation()?)
                } else {
                    Premise::Proof(self.proof()?)
                });
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(")")?;
        }
        Ok(Derivation { rule, dir, inst, premises })
    }

    fn meta(&mut self, kind: MetaKind) -> PResult<Meta> {
        Ok(match kind {
            MetaKind::Game => {
                self.expect_sym("{")?;
                let g = self.game()?;
                self.expect_sym("}")?;
                Meta::Game(g)
            }
            MetaKind::Formula => Meta::Formula(self.formula()?),
            MetaKind::Term => Meta::Term(self.term()?),
            MetaKind::Var => Meta::Var(self.var()?),
            MetaKind::Name => Meta::Name(self.ident()?),
            MetaKind::Rat => Meta::Rat(self.rational()?),
            MetaKind::Sln => Meta::Sln(self.sln()?),
        })
    }

    // ---- files ----

    pub fn file(mut self) -> Result<SourceFile, ParseError> {
        let mut decls: Vec<Decl> = Vec::new();
        let mut next_comment = 0;
        while !self.at_eof() {
            let line = self.toks[self.pos].line;
            let mut comments = Vec::new();
            while next_comment < self.comments.len() && self.comments[next_comment].0 < line {
                comments.push(self.comments[next_comment].1.clone());
                next_comment += 1;
            }
            let decl = match self.decl(&decls, comments) {
                Ok(d) => d,
                Err(Fail) => return Err(self.error()),
            };
            let end_line = self.toks[self.pos.saturating_sub(1)].line;
            while next_comment < self.comments.len() && self.comments[next_comment].0 <= end_line {
                next_comment += 1;
            }
            decls.push(decl);
        }
        let trailing_comments = self.comments[next_comment..].iter().map(|(_, c)| c.clone()).collect();
        Ok(SourceFile { decls, trailing_comments })
    }

    fn decl(&mut self, earlier: &[Decl], comments: Vec<String>) -> PResult<Decl> {
        let kw = match self.peek() {
            Tok::Ident(w) if ["game", "formula", "proof", "derivation"].contains(&w.as_str()) => w.clone(),
            _ => return Err(self.fail("declaration")),
        };
        self.pos += 1;
        let name = self.ident()?;
        if earlier.iter().any(|d| d.name == name) {
            self.pos -= 1;
            return Err(self.fail("a name not declared before"));
        }
        let item = match kw.as_str() {
            "game" => {
                self.expect_sym(":=")?;
                let g = self.game()?;
                self.games.insert(name.clone(), g.clone());
                Item::Game(g)
            }
            "formula" => {
                self.expect_sym(":=")?;
                let f = self.formula()?;
                self.formulas.insert(name.clone(), f.clone());
                Item::Formula(f)
            }
            "proof" => {
                self.expect_sym(":")?;
                let s = self.sequent()?;
                self.expect_sym(":=")?;
                Item::Proof(s, self.proof()?)
            }
            _ => {
                self.expect_sym(":")?;
                let s = self.sequent()?;
                self.expect_sym(":=")?;
                Item::Derivation(s, self.derivation()?)
            }
        };
        Ok(Decl { name, comments, item })
    }
}
