//! Concrete `.cdgl` syntax.
//!
//! | construct | ASCII | Unicode alias |
//! |---|---|---|
//! | choice | `a ++ b` | `∪` |
//! | sequence | `a; b` | |
//! | repetition, dual | `{a}*`, `{a}^d` | |
//! | test, skip | `?φ`, `skip` | |
//! | assignment | `x:=f`, `x:=*` | |
//! | ODE | `{x'=f, y'=g & ψ}` | |
//! | connectives | `!`, `&`, `\|`, `->`, `<->`, `tt`, `ff` | `¬ ∧ ∨ → ↔` |
//! | quantifiers | `\forall x φ`, `\exists x φ` | `∀ ∃` |
//! | modalities | `[a]φ`, `<a>φ` | `⟨a⟩φ` |
//! | refinement | `{a} =< {b}`, `{a} =<[i] {b}`, angelic `{a} =<> {b}` | `⊑` |
//!
//! Derived connectives elaborate to the core while parsing, so a printed
//! formula shows the connective whenever its core shape matches.
//!
//! Proof terms use one constructor name per rule:
//!
//! | rule | syntax |
//! |---|---|
//! | hypothesis | `p` |
//! | ⟨∪⟩ introduction | `injL(M)`, `injR(M)` |
//! | ⟨∪⟩ elimination | `case(A, l => B, r => C)` |
//! | ⟨*⟩ case | `rcase(A, s => B, g => C)` |
//! | ∀ / → introduction | `lamR(y => M)`, `lamP(p : φ => M)` |
//! | pairing | `(M, N)` |
//! | assignment | `asgn(y, x, p => M)` |
//! | angelic `:=*` | `dasgn(f, y, p => M)` |
//! | sequence, dual | `seq(M)`, `dual(M)`, `seqE(M)`, `dualE(M)` |
//! | [*] induction | `rep(M, p : J => N, q => O)` |
//! | ⟨*⟩ convergence | `for(m, φ, m0, eps, A, p q => B, p q => C)` |
//! | ⟨*⟩ stop / go | `stop(M)`, `go(M)` |
//! | fixed point | `fp(A, s => B, g => C)` |
//! | application | `app(M, N)`, `appt(M, f)` |
//! | projections | `projL(M)`, `projR(M)` |
//! | ⟨:*⟩ elimination | `unpack(M, y, p => N)` |
//! | arithmetic | `qe(φ)`, `qe(φ, M)`, `dec(φ, M)`, `split(f, g, eps, M)` |
//! | ghost, monotonicity | `ghost(x, f, p => M)`, `mon(M, φ, p => N)` |
//! | ODE rules | `di(M, N)`, `dc(R, M, N)`, `dw(M)`, `dg(y, y0, a, b, p => M)` |
//! | solutions | `bsolve(s, r, (x := f), M)`, `dsolve(s, d, (x := f), M, N)` |
//! | [:=] elimination | `asgnE(M, y, e, p => N)` |
//! | refinement | `ref(D)`, `boxref(M, N)`, `diaref(M, N)` |
//!
//! A derivation node is `[rev|both] rule{key := value, ...}(premises)`.

mod lexer;
mod parser;
mod printer;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::proof::{Derivation, Proof};
use crate::syntax::{Context, Formula, Game};
use crate::term::Term;

pub use printer::{print_context, print_derivation, print_file, print_formula, print_game, print_proof, print_term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: expected {}, found {found}", expected_list(.expected))]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: BTreeSet<String>,
    pub found: String,
}

fn expected_list(e: &BTreeSet<String>) -> String {
    let items: Vec<&str> = e.iter().map(String::as_str).collect();
    match items.len() {
        0 => "something else".to_string(),
        1 => items[0].to_string(),
        n => format!("one of {}", items[..n].join(", ")),
    }
}

impl ParseError {
    pub fn at(line: usize, col: usize, expected: &str, found: &str) -> ParseError {
        ParseError { line, col, expected: [expected.to_string()].into(), found: found.to_string() }
    }
}

/// A `proof` or `derivation` declaration's statement `Γ |- φ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequent {
    pub ctx: Context,
    pub goal: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Game(Game),
    Formula(Formula),
    Proof(Sequent, Proof),
    Derivation(Sequent, Derivation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    /// Comment lines directly above the declaration.
    pub comments: Vec<String>,
    pub item: Item,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
    pub trailing_comments: Vec<String>,
}

impl SourceFile {
    pub fn get(&self, name: &str) -> Option<&Item> {
        self.decls.iter().find(|d| d.name == name).map(|d| &d.item)
    }

    pub fn game(&self, name: &str) -> Option<&Game> {
        match self.get(name)? {
            Item::Game(g) => Some(g),
            _ => None,
        }
    }

    pub fn formula(&self, name: &str) -> Option<&Formula> {
        match self.get(name)? {
            Item::Formula(f) => Some(f),
            _ => None,
        }
    }

    pub fn proof(&self, name: &str) -> Option<(&Sequent, &Proof)> {
        match self.get(name)? {
            Item::Proof(s, p) => Some((s, p)),
            _ => None,
        }
    }

    pub fn derivation(&self, name: &str) -> Option<(&Sequent, &Derivation)> {
        match self.get(name)? {
            Item::Derivation(s, d) => Some((s, d)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Term,
    Game,
    Formula,
    Proof,
    Derivation,
    File,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ast {
    Term(Term),
    Game(Game),
    Formula(Formula),
    Proof(Proof),
    Derivation(Derivation),
    File(SourceFile),
}

pub fn parse(kind: Kind, text: &str) -> Result<Ast, ParseError> {
    Ok(match kind {
        Kind::Term => Ast::Term(parse_term(text)?),
        Kind::Game => Ast::Game(parse_game(text)?),
        Kind::Formula => Ast::Formula(parse_formula(text)?),
        Kind::Proof => Ast::Proof(parse_proof(text)?),
        Kind::Derivation => Ast::Derivation(parse_derivation(text)?),
        Kind::File => Ast::File(parse_file(text)?),
    })
}

pub fn pretty(ast: &Ast) -> String {
    match ast {
        Ast::Term(t) => print_term(t),
        Ast::Game(g) => print_game(g),
        Ast::Formula(f) => print_formula(f),
        Ast::Proof(p) => print_proof(p),
        Ast::Derivation(d) => print_derivation(d),
        Ast::File(f) => print_file(f),
    }
}

/// Parses a term. Unlike formulas, standalone terms may contain `(f)'`.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    parser::Parser::new(text, true)?.whole(|p| p.term())
}

pub fn parse_game(text: &str) -> Result<Game, ParseError> {
    parser::Parser::new(text, false)?.whole(|p| p.game())
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parser::Parser::new(text, false)?.whole(|p| p.formula())
}

pub fn parse_proof(text: &str) -> Result<Proof, ParseError> {
    parser::Parser::new(text, false)?.whole(|p| p.proof())
}

pub fn parse_derivation(text: &str) -> Result<Derivation, ParseError> {
    parser::Parser::new(text, false)?.whole(|p| p.derivation())
}

/// Parses `p: φ, q: ψ` (possibly empty).
pub fn parse_context(text: &str) -> Result<Context, ParseError> {
    parser::Parser::new(text, false)?.whole(|p| p.context_entries())
}

pub fn parse_file(text: &str) -> Result<SourceFile, ParseError> {
    parser::Parser::new(text, false)?.file()
}

impl fmt::Display for SourceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_file(self))
    }
}
