//! Minimal-parenthesis printer. Output reparses to the same AST.

use std::collections::HashMap;

use super::{Item, SourceFile};
use crate::proof::{Derivation, Dir, Meta, Premise, Proof};
use crate::syntax::{Context, Formula, Game};
use crate::term::{Rat, Term};

const WIDTH: usize = 100;

/// Printing state: declarations earlier in the file, printed by name.
#[derive(Default)]
struct Printer {
    games: HashMap<Game, String>,
    formulas: HashMap<Formula, String>,
}

pub fn print_term(t: &Term) -> String {
    term_at(t, 0)
}

pub fn print_game(g: &Game) -> String {
    Printer::default().game_at(g, 0)
}

pub fn print_formula(f: &Formula) -> String {
    Printer::default().formula_at(f, 0)
}

pub fn print_context(c: &Context) -> String {
    Printer::default().context(c)
}

pub fn print_proof(p: &Proof) -> String {
    Printer::default().proof(p).render(0)
}

pub fn print_derivation(d: &Derivation) -> String {
    Printer::default().derivation(d).render(0)
}

pub fn print_file(file: &SourceFile) -> String {
    let mut pr = Printer::default();
    let mut out = String::new();
    for (i, d) in file.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for c in &d.comments {
            out.push_str(&format!("--{c}\n"));
        }
        match &d.item {
            Item::Game(g) => {
                out.push_str(&format!("game {} := {}\n", d.name, pr.game_at(g, 0)));
                if !g.is_skip() {
                    pr.games.entry(g.clone()).or_insert_with(|| d.name.clone());
                }
            }
            Item::Formula(f) => {
                out.push_str(&format!("formula {} := {}\n", d.name, pr.formula_at(f, 0)));
                if !f.is_tt() && !f.is_ff() {
                    pr.formulas.entry(f.clone()).or_insert_with(|| d.name.clone());
                }
            }
            Item::Proof(s, p) => {
                let head = format!("proof {} : {} := ", d.name, pr.sequent(&s.ctx, &s.goal));
                out.push_str(&head);
                out.push_str(&pr.proof(p).render_after(head.chars().count()));
                out.push('\n');
            }
            Item::Derivation(s, der) => {
                let head = format!("derivation {} : {} := ", d.name, pr.sequent(&s.ctx, &s.goal));
                out.push_str(&head);
                out.push_str(&pr.derivation(der).render_after(head.chars().count()));
                out.push('\n');
            }
        }
    }
    if !file.trailing_comments.is_empty() {
        if !file.decls.is_empty() {
            out.push('\n');
        }
        for c in &file.trailing_comments {
            out.push_str(&format!("--{c}\n"));
        }
    }
    out
}

// ---- terms ----

fn rat_text(q: &Rat) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn is_minus_one(t: &Term) -> bool {
    matches!(t, Term::Lit(q) if *q == -Rat::from_integer(1.into()))
}

/// `Product(-1, c)` with `c` not a literal, printed as unary minus.
fn as_neg(t: &Term) -> Option<&Term> {
    match t {
        Term::Product(a, c) if is_minus_one(a) && !matches!(**c, Term::Lit(_)) => Some(c),
        _ => None,
    }
}

fn paren_if_minus(s: String) -> String {
    if s.starts_with('-') {
        format!("({s})")
    } else {
        s
    }
}

/// Levels: 0 sum, 1 product, 2 unary or atom.
fn term_at(t: &Term, level: u8) -> String {
    if let Some(c) = as_neg(t) {
        return format!("-{}", paren_if_minus(term_at(c, 2)));
    }
    match t {
        Term::Lit(q) => rat_text(q),
        Term::Var(x) => x.clone(),
        Term::Primed(x) => format!("{x}'"),
        Term::Differential(inner) => format!("({})'", term_at(inner, 0)),
        Term::Sum(a, b) => {
            let left = term_at(a, 0);
            let s = match (&**b, as_neg(b)) {
                (Term::Lit(q), _) if *q < Rat::from_integer(0.into()) => format!("{left} - {}", rat_text(&-q.clone())),
                (_, Some(c)) => format!("{left} - {}", paren_if_minus(term_at(c, 1))),
                _ => format!("{left} + {}", term_at(b, 1)),
            };
            if level > 0 {
                format!("({s})")
            } else {
                s
            }
        }
        Term::Product(a, b) => {
            let s = format!("{}*{}", term_at(a, 1), term_at(b, 2));
            if level > 1 {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

// ---- documents for proofs and derivations ----

/// A layout tree: printed on one line when it fits, else broken with indentation.
enum Doc {
    Text(String),
    /// `open item, item, ... close`
    Group(String, Vec<Doc>, String),
    /// A prefix directly followed by a document.
    Prefix(String, Box<Doc>),
}

impl Doc {
    fn flat(&self) -> String {
        match self {
            Doc::Text(s) => s.clone(),
            Doc::Group(o, items, c) => {
                let inner: Vec<String> = items.iter().map(Doc::flat).collect();
                format!("{o}{}{c}", inner.join(", "))
            }
            Doc::Prefix(p, d) => format!("{p}{}", d.flat()),
        }
    }

    fn render(&self, indent: usize) -> String {
        self.layout(indent, indent)
    }

    /// Renders starting at column `col`, with continuation lines indented by two.
    fn render_after(&self, col: usize) -> String {
        self.layout(0, col)
    }

    fn layout(&self, indent: usize, col: usize) -> String {
        let flat = self.flat();
        if col + flat.chars().count() <= WIDTH {
            return flat;
        }
        match self {
            Doc::Text(s) => s.clone(),
            Doc::Prefix(p, d) => format!("{p}{}", d.layout(indent, col + p.chars().count())),
            Doc::Group(o, items, c) => {
                let pad = " ".repeat(indent + 2);
                let mut out = o.clone();
                for (i, it) in items.iter().enumerate() {
                    out.push('\n');
                    out.push_str(&pad);
                    out.push_str(&it.layout(indent + 2, indent + 2));
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                }
                out.push('\n');
                out.push_str(&" ".repeat(indent));
                out.push_str(c);
                out
            }
        }
    }
}

fn text(s: impl Into<String>) -> Doc {
    Doc::Text(s.into())
}

fn call(name: &str, args: Vec<Doc>) -> Doc {
    Doc::Group(format!("{name}("), args, ")".into())
}

impl Printer {
    // ---- games ----

    /// Levels: 0 choice, 1 sequence, 2 postfix, 3 primary.
    fn game_at(&self, g: &Game, level: u8) -> String {
        if let Some(n) = self.games.get(g) {
            return n.clone();
        }
        let (s, own) = match g {
            Game::Choice(a, b) => (format!("{} ++ {}", self.game_at(a, 1), self.game_at(b, 0)), 0),
            Game::Seq(a, b) => (format!("{}; {}", self.game_at(a, 2), self.game_at(b, 1)), 1),
            Game::Repeat(a) => (format!("{}*", self.braced(a)), 2),
            Game::Dual(a) => (format!("{}^d", self.braced(a)), 2),
            Game::Test(f) if f.is_tt() => ("skip".to_string(), 3),
            Game::Test(f) => (format!("?{}", self.formula_at(f, 4)), 3),
            Game::Assign(x, f) => (format!("{x}:={}", term_at(f, 0)), 3),
            Game::NondetAssign(x) => (format!("{x}:=*"), 3),
            Game::Ode(ode) => {
                let eqs: Vec<String> = ode.eqs.iter().map(|(x, f)| format!("{x}'={}", term_at(f, 0))).collect();
                let mut s = format!("{{{}", eqs.join(", "));
                if !ode.constraint.is_tt() {
                    s.push_str(&format!(" & {}", self.formula_at(&ode.constraint, 0)));
                }
                s.push('}');
                (s, 3)
            }
        };
        if own < level {
            format!("{{{s}}}")
        } else {
            s
        }
    }

    /// Operand of `*` or `^d`, or a refinement side: a name, an ODE, or a braced game.
    fn braced(&self, g: &Game) -> String {
        if let Some(n) = self.games.get(g) {
            return n.clone();
        }
        match g {
            Game::Ode(_) => self.game_at(g, 3),
            _ => format!("{{{}}}", self.game_at(g, 0)),
        }
    }

    // ---- formulas ----

    /// Levels: 0 `<->`, 1 `->`, 2 `|`, 3 `&`, 4 unary, 5 atom.
    fn formula_at(&self, f: &Formula, level: u8) -> String {
        if let Some(n) = self.formulas.get(f) {
            return n.clone();
        }
        let (s, own) = self.formula_parts(f);
        if own < level {
            format!("({s})")
        } else {
            s
        }
    }

    fn formula_parts(&self, f: &Formula) -> (String, u8) {
        if f.is_tt() {
            return ("tt".into(), 5);
        }
        if f.is_ff() {
            return ("ff".into(), 5);
        }
        if let Some((l, r)) = f.as_and() {
            if let (Some((a, b)), Some((b2, a2))) = (l.as_implies(), r.as_implies()) {
                if a == a2 && b == b2 {
                    return (format!("{} <-> {}", self.formula_at(a, 1), self.formula_at(b, 1)), 0);
                }
            }
        }
        if let Some((a, b)) = f.as_implies() {
            if b.is_ff() {
                return (format!("!{}", self.formula_at(a, 4)), 4);
            }
            return (format!("{} -> {}", self.formula_at(a, 2), self.formula_at(b, 1)), 1);
        }
        if let Some((a, b)) = f.as_or() {
            return (format!("{} | {}", self.formula_at(a, 3), self.formula_at(b, 2)), 2);
        }
        if let Some((a, b)) = f.as_and() {
            return (format!("{} & {}", self.formula_at(a, 4), self.formula_at(b, 3)), 3);
        }
        if let Some((x, b)) = f.as_forall().filter(|(x, _)| !x.primed) {
            return (format!("\\forall {x} {}", self.formula_at(b, 4)), 4);
        }
        if let Some((x, b)) = f.as_exists().filter(|(x, _)| !x.primed) {
            return (format!("\\exists {x} {}", self.formula_at(b, 4)), 4);
        }
        match f {
            Formula::Box(g, p) => (format!("[{}]{}", self.game_at(g, 0), self.formula_at(p, 4)), 4),
            Formula::Diamond(g, p) => (format!("<{}>{}", self.game_at(g, 0), self.formula_at(p, 4)), 4),
            Formula::Compare(op, a, b) => (format!("{} {} {}", term_at(a, 0), op.symbol(), term_at(b, 0)), 5),
            Formula::Refine(rank, a, b) => {
                let rank = rank.map(|i| format!("[{i}]")).unwrap_or_default();
                let s = match (&**a, &**b) {
                    (Game::Dual(a1), Game::Dual(b1)) => {
                        format!("{} =<>{rank} {}", self.braced(a1), self.braced(b1))
                    }
                    _ => format!("{} =<{rank} {}", self.braced(a), self.braced(b)),
                };
                (s, 5)
            }
        }
    }

    fn context(&self, c: &Context) -> String {
        let items: Vec<String> = c.entries().iter().map(|(l, f)| format!("{l}: {}", self.formula_at(f, 0))).collect();
        items.join(", ")
    }

    fn sequent(&self, c: &Context, goal: &Formula) -> String {
        if c.is_empty() {
            format!("|- {}", self.formula_at(goal, 0))
        } else {
            format!("{} |- {}", self.context(c), self.formula_at(goal, 0))
        }
    }

    // ---- proofs ----

    fn f(&self, f: &Formula) -> Doc {
        text(self.formula_at(f, 0))
    }

    fn bind(&self, label: &str, p: &Proof) -> Doc {
        Doc::Prefix(format!("{label} => "), Box::new(self.proof(p)))
    }

    fn sln(&self, sln: &[(String, Term)]) -> Doc {
        let items: Vec<String> = sln.iter().map(|(x, f)| format!("{x} := {}", term_at(f, 0))).collect();
        text(format!("({})", items.join(", ")))
    }

    fn proof(&self, p: &Proof) -> Doc {
        let pf = |q: &Proof| self.proof(q);
        match p {
            Proof::Hyp(l) => text(l.clone()),
            Proof::InjL(a) => call("injL", vec![pf(a)]),
            Proof::InjR(a) => call("injR", vec![pf(a)]),
            Proof::SeqIntro(a) => call("seq", vec![pf(a)]),
            Proof::DualIntro(a) => call("dual", vec![pf(a)]),
            Proof::Stop(a) => call("stop", vec![pf(a)]),
            Proof::Go(a) => call("go", vec![pf(a)]),
            Proof::ProjL(a) => call("projL", vec![pf(a)]),
            Proof::ProjR(a) => call("projR", vec![pf(a)]),
            Proof::DW(a) => call("dw", vec![pf(a)]),
            Proof::SeqElim(a) => call("seqE", vec![pf(a)]),
            Proof::DualElim(a) => call("dualE", vec![pf(a)]),
            Proof::Case { scrut, left, lsub, right, rsub } => {
                call("case", vec![pf(scrut), self.bind(left, lsub), self.bind(right, rsub)])
            }
            Proof::RepCase { scrut, stop, ssub, go, gsub } => {
                call("rcase", vec![pf(scrut), self.bind(stop, ssub), self.bind(go, gsub)])
            }
            Proof::FP { scrut, stop, ssub, go, gsub } => {
                call("fp", vec![pf(scrut), self.bind(stop, ssub), self.bind(go, gsub)])
            }
            Proof::LamReal { ghost, sub } => call("lamR", vec![self.bind(ghost, sub)]),
            Proof::LamProof { label, hyp, sub } => {
                call("lamP", vec![Doc::Prefix(format!("{label} : {} => ", self.formula_at(hyp, 0)), Box::new(pf(sub)))])
            }
            Proof::Pair(a, b) => Doc::Group("(".into(), vec![pf(a), pf(b)], ")".into()),
            Proof::AssignIntro { ghost, target, label, sub } => {
                call("asgn", vec![text(ghost.clone()), text(target.to_string()), self.bind(label, sub)])
            }
            Proof::DAssignIntro { witness, ghost, label, sub } => {
                call("dasgn", vec![text(term_at(witness, 0)), text(ghost.clone()), self.bind(label, sub)])
            }
            Proof::Rep { base, step_label, inv, step, post_label, post } => call(
                "rep",
                vec![
                    pf(base),
                    Doc::Prefix(format!("{step_label} : {} => ", self.formula_at(inv, 0)), Box::new(pf(step))),
                    self.bind(post_label, post),
                ],
            ),
            Proof::For(fp) => call(
                "for",
                vec![
                    text(term_at(&fp.metric, 0)),
                    self.f(&fp.variant),
                    text(fp.ghost.clone()),
                    text(rat_text(&fp.eps)),
                    pf(&fp.base),
                    Doc::Prefix(format!("{} {} => ", fp.step_labels.0, fp.step_labels.1), Box::new(pf(&fp.step))),
                    Doc::Prefix(format!("{} {} => ", fp.post_labels.0, fp.post_labels.1), Box::new(pf(&fp.post))),
                ],
            ),
            Proof::App(a, b) => call("app", vec![pf(a), pf(b)]),
            Proof::AppTerm(a, t) => call("appt", vec![pf(a), text(term_at(t, 0))]),
            Proof::Unpack { packed, ghost, label, sub } => {
                call("unpack", vec![pf(packed), text(ghost.clone()), self.bind(label, sub)])
            }
            Proof::QE { target, sub } => {
                let mut args = vec![self.f(target)];
                if let Some(s) = sub {
                    args.push(pf(s));
                }
                call("qe", args)
            }
            Proof::Dec { target, sub } => call("dec", vec![self.f(target), pf(sub)]),
            Proof::Split { left, right, eps, sub } => {
                call("split", vec![text(term_at(left, 0)), text(term_at(right, 0)), text(term_at(eps, 0)), pf(sub)])
            }
            Proof::Ghost { var, rhs, label, sub } => {
                call("ghost", vec![text(var.clone()), text(term_at(rhs, 0)), self.bind(label, sub)])
            }
            Proof::Mon { main, mid, label, sub } => call("mon", vec![pf(main), self.f(mid), self.bind(label, sub)]),
            Proof::DI { base, step } => call("di", vec![pf(base), pf(step)]),
            Proof::DC { cut, show, use_ } => call("dc", vec![self.f(cut), pf(show), pf(use_)]),
            Proof::DG { var, init, a, b, label, sub } => call(
                "dg",
                vec![
                    text(var.clone()),
                    text(term_at(init, 0)),
                    text(term_at(a, 0)),
                    text(term_at(b, 0)),
                    self.bind(label, sub),
                ],
            ),
            Proof::BSolve { time, range, sln, sub } => {
                call("bsolve", vec![text(time.clone()), text(range.clone()), self.sln(sln), pf(sub)])
            }
            Proof::DSolve { time, duration, sln, dom, post } => {
                call("dsolve", vec![text(time.clone()), text(term_at(duration, 0)), self.sln(sln), pf(dom), pf(post)])
            }
            Proof::AssignElim { main, ghost, eq_label, label, sub } => {
                call("asgnE", vec![pf(main), text(ghost.clone()), text(eq_label.clone()), self.bind(label, sub)])
            }
            Proof::RefProof(d) => call("ref", vec![self.derivation(d)]),
            Proof::BoxRef { main, refinement } => call("boxref", vec![pf(main), pf(refinement)]),
            Proof::DiamondRef { main, refinement } => call("diaref", vec![pf(main), pf(refinement)]),
        }
    }

    fn meta(&self, m: &Meta) -> String {
        match m {
            Meta::Game(g) => format!("{{{}}}", self.game_at(g, 0)),
            Meta::Formula(f) => self.formula_at(f, 0),
            Meta::Term(t) => term_at(t, 0),
            Meta::Var(v) => v.to_string(),
            Meta::Name(n) => n.clone(),
            Meta::Rat(q) => rat_text(q),
            Meta::Sln(s) => self.sln(s).flat(),
        }
    }

    fn derivation(&self, d: &Derivation) -> Doc {
        let prefix = match d.dir {
            Dir::Fwd => "",
            Dir::Rev => "rev ",
            Dir::Both => "both ",
        };
        // Known keys in schema order, then anything else in map order.
        let mut keys: Vec<&str> = d.rule.keys().iter().map(|(k, _)| *k).filter(|k| d.inst.contains_key(*k)).collect();
        keys.extend(d.inst.keys().map(String::as_str).filter(|k| !d.rule.keys().iter().any(|(s, _)| s == k)));
        let inst: Vec<String> = keys.iter().map(|k| format!("{k} := {}", self.meta(&d.inst[*k]))).collect();
        let head = format!("{prefix}{}{{{}}}", d.rule.name(), inst.join(", "));
        if d.premises.is_empty() {
            return text(head);
        }
        let prems = d
            .premises
            .iter()
            .map(|p| match p {
                Premise::Derivation(d) => self.derivation(d),
                Premise::Proof(p) => self.proof(p),
            })
            .collect();
        Doc::Group(format!("{head}("), prems, ")".into())
    }
}
