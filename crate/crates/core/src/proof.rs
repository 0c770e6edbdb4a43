//! Proof terms and refinement derivations.
//!
//! Binder fields name the hypothesis label or ghost variable a rule introduces.
//! Each [`Derivation`] node records the rule, the direction for mutual
//! refinements, the instantiation of the rule's metavariables, and premises.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::syntax::{Formula, Game};
use crate::term::{Rat, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Proof {
    Hyp(String),
    InjL(Box<Proof>),
    InjR(Box<Proof>),
    Case { scrut: Box<Proof>, left: String, lsub: Box<Proof>, right: String, rsub: Box<Proof> },
    RepCase { scrut: Box<Proof>, stop: String, ssub: Box<Proof>, go: String, gsub: Box<Proof> },
    LamReal { ghost: String, sub: Box<Proof> },
    LamProof { label: String, hyp: Formula, sub: Box<Proof> },
    Pair(Box<Proof>, Box<Proof>),
    AssignIntro { ghost: String, target: Var, label: String, sub: Box<Proof> },
    DAssignIntro { witness: Term, ghost: String, label: String, sub: Box<Proof> },
    SeqIntro(Box<Proof>),
    DualIntro(Box<Proof>),
    Rep { base: Box<Proof>, step_label: String, inv: Formula, step: Box<Proof>, post_label: String, post: Box<Proof> },
    For(Box<ForProof>),
    Stop(Box<Proof>),
    Go(Box<Proof>),
    FP { scrut: Box<Proof>, stop: String, ssub: Box<Proof>, go: String, gsub: Box<Proof> },
    App(Box<Proof>, Box<Proof>),
    AppTerm(Box<Proof>, Term),
    ProjL(Box<Proof>),
    ProjR(Box<Proof>),
    Unpack { packed: Box<Proof>, ghost: String, label: String, sub: Box<Proof> },
    QE { target: Formula, sub: Option<Box<Proof>> },
    Dec { target: Formula, sub: Box<Proof> },
    Split { left: Term, right: Term, eps: Term, sub: Box<Proof> },
    Ghost { var: String, rhs: Term, label: String, sub: Box<Proof> },
    Mon { main: Box<Proof>, mid: Formula, label: String, sub: Box<Proof> },
    DI { base: Box<Proof>, step: Box<Proof> },
    DC { cut: Formula, show: Box<Proof>, use_: Box<Proof> },
    DW(Box<Proof>),
    DG { var: String, init: Term, a: Term, b: Term, label: String, sub: Box<Proof> },
    BSolve { time: String, range: String, sln: Vec<(String, Term)>, sub: Box<Proof> },
    DSolve { time: String, duration: Term, sln: Vec<(String, Term)>, dom: Box<Proof>, post: Box<Proof> },
    SeqElim(Box<Proof>),
    DualElim(Box<Proof>),
    AssignElim { main: Box<Proof>, ghost: String, eq_label: String, label: String, sub: Box<Proof> },
    RefProof(Box<Derivation>),
    BoxRef { main: Box<Proof>, refinement: Box<Proof> },
    DiamondRef { main: Box<Proof>, refinement: Box<Proof> },
}

/// Convergence proof of an Angelic loop with a rational metric that
/// decreases by at least `eps` per iteration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForProof {
    pub metric: Term,
    pub variant: Formula,
    /// Name of the ghost recording the metric before an iteration.
    pub ghost: String,
    pub eps: Rat,
    pub base: Proof,
    pub step_labels: (String, String),
    pub step: Proof,
    pub post_labels: (String, String),
    pub post: Proof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    DiamondRef,
    BoxRef,
    ArefTest,
    DrefTest,
    ArefRand,
    DrefRand,
    RefChoiceL1,
    RefChoiceL2,
    RefChoiceR,
    ArefChoiceR1,
    ArefChoiceR2,
    ArefChoiceL,
    RefSeq,
    RefSeqG,
    RefUnloop,
    UnrollL,
    UnrollLd,
    DualSkip,
    DualSeq,
    DualAssign,
    DualDNE,
    RefTrans,
    RefRefl,
    SeqIdL,
    SeqIdR,
    AnnihL,
    NopAssign,
    SeqDistR,
    SeqAssoc,
    AssignCancel,
    ChoiceAssoc,
    ChoiceComm,
    ChoiceIdem,
    TestChoice,
    RefDC,
    RefDW,
    RefSolve,
    RefDG,
    LoopInline,
    SysK,
    SysKd,
    SysBoxAnd,
}

impl Rule {
    pub const ALL: [Rule; 42] = [
        Rule::DiamondRef,
        Rule::BoxRef,
        Rule::ArefTest,
        Rule::DrefTest,
        Rule::ArefRand,
        Rule::DrefRand,
        Rule::RefChoiceL1,
        Rule::RefChoiceL2,
        Rule::RefChoiceR,
        Rule::ArefChoiceR1,
        Rule::ArefChoiceR2,
        Rule::ArefChoiceL,
        Rule::RefSeq,
        Rule::RefSeqG,
        Rule::RefUnloop,
        Rule::UnrollL,
        Rule::UnrollLd,
        Rule::DualSkip,
        Rule::DualSeq,
        Rule::DualAssign,
        Rule::DualDNE,
        Rule::RefTrans,
        Rule::RefRefl,
        Rule::SeqIdL,
        Rule::SeqIdR,
        Rule::AnnihL,
        Rule::NopAssign,
        Rule::SeqDistR,
        Rule::SeqAssoc,
        Rule::AssignCancel,
        Rule::ChoiceAssoc,
        Rule::ChoiceComm,
        Rule::ChoiceIdem,
        Rule::TestChoice,
        Rule::RefDC,
        Rule::RefDW,
        Rule::RefSolve,
        Rule::RefDG,
        Rule::LoopInline,
        Rule::SysK,
        Rule::SysKd,
        Rule::SysBoxAnd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::DiamondRef => "diamondref",
            Rule::BoxRef => "boxref",
            Rule::ArefTest => "arefTest",
            Rule::DrefTest => "drefTest",
            Rule::ArefRand => "arefRand",
            Rule::DrefRand => "drefRand",
            Rule::RefChoiceL1 => "refChoiceL1",
            Rule::RefChoiceL2 => "refChoiceL2",
            Rule::RefChoiceR => "refChoiceR",
            Rule::ArefChoiceR1 => "arefChoiceR1",
            Rule::ArefChoiceR2 => "arefChoiceR2",
            Rule::ArefChoiceL => "arefChoiceL",
            Rule::RefSeq => "refSeq",
            Rule::RefSeqG => "refSeqG",
            Rule::RefUnloop => "refUnloop",
            Rule::UnrollL => "unrollL",
            Rule::UnrollLd => "unrollLd",
            Rule::DualSkip => "dualSkip",
            Rule::DualSeq => "dualSeq",
            Rule::DualAssign => "dualAssign",
            Rule::DualDNE => "dualDNE",
            Rule::RefTrans => "refTrans",
            Rule::RefRefl => "refRefl",
            Rule::SeqIdL => "seqIdL",
            Rule::SeqIdR => "seqIdR",
            Rule::AnnihL => "annihL",
            Rule::NopAssign => "nopAssign",
            Rule::SeqDistR => "seqDistR",
            Rule::SeqAssoc => "seqAssoc",
            Rule::AssignCancel => "assignCancel",
            Rule::ChoiceAssoc => "choiceAssoc",
            Rule::ChoiceComm => "choiceComm",
            Rule::ChoiceIdem => "choiceIdem",
            Rule::TestChoice => "testChoice",
            Rule::RefDC => "refDC",
            Rule::RefDW => "refDW",
            Rule::RefSolve => "refSolve",
            Rule::RefDG => "refDG",
            Rule::LoopInline => "loopInline",
            Rule::SysK => "sysK",
            Rule::SysKd => "sysKd",
            Rule::SysBoxAnd => "sysBoxAnd",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.iter().copied().find(|r| r.name() == s)
    }

    /// Metavariables of the rule schema, in display order.
    pub fn keys(self) -> &'static [(&'static str, MetaKind)] {
        use MetaKind::*;
        match self {
            Rule::DiamondRef | Rule::BoxRef => &[("a", Game), ("b", Game), ("p", Formula)],
            Rule::ArefTest | Rule::DrefTest | Rule::TestChoice => &[("p", Formula), ("q", Formula)],
            Rule::ArefRand | Rule::DrefRand | Rule::DualAssign => &[("x", Var), ("f", Term)],
            Rule::RefChoiceL1
            | Rule::RefChoiceL2
            | Rule::ArefChoiceR1
            | Rule::ArefChoiceR2
            | Rule::RefUnloop
            | Rule::DualSeq
            | Rule::ChoiceComm => &[("a", Game), ("b", Game)],
            Rule::RefChoiceR
            | Rule::ArefChoiceL
            | Rule::RefTrans
            | Rule::SeqDistR
            | Rule::SeqAssoc
            | Rule::ChoiceAssoc => &[("a", Game), ("b", Game), ("c", Game)],
            Rule::RefSeq | Rule::RefSeqG => &[("a1", Game), ("a2", Game), ("b1", Game), ("b2", Game)],
            Rule::UnrollL
            | Rule::UnrollLd
            | Rule::DualDNE
            | Rule::RefRefl
            | Rule::SeqIdL
            | Rule::SeqIdR
            | Rule::AnnihL
            | Rule::ChoiceIdem
            | Rule::RefDW => &[("a", Game)],
            Rule::DualSkip => &[],
            Rule::NopAssign => &[("x", Var)],
            Rule::AssignCancel => &[("x", Var), ("f", Term), ("g", Term)],
            Rule::RefDC => &[("a", Game), ("p", Formula)],
            Rule::RefSolve => &[("a", Game), ("s", Name), ("d", Term), ("sln", Sln)],
            Rule::RefDG => &[("a", Game), ("y", Name), ("y0", Term), ("ca", Term), ("cb", Term)],
            Rule::LoopInline => &[
                ("a", Game),
                ("sigma", Game),
                ("m", Term),
                ("j", Formula),
                ("m0", Name),
                ("eps", Rat),
                ("p", Name),
                ("q", Name),
            ],
            Rule::SysK | Rule::SysKd | Rule::SysBoxAnd => &[("a", Game), ("p", Formula), ("q", Formula)],
        }
    }

    /// Whether the rule states a mutual refinement and so takes a direction.
    pub fn is_mutual(self) -> bool {
        matches!(
            self,
            Rule::UnrollL
                | Rule::UnrollLd
                | Rule::DualSkip
                | Rule::DualSeq
                | Rule::DualAssign
                | Rule::DualDNE
                | Rule::SeqIdL
                | Rule::SeqIdR
                | Rule::AnnihL
                | Rule::NopAssign
                | Rule::SeqDistR
                | Rule::SeqAssoc
                | Rule::AssignCancel
                | Rule::ChoiceAssoc
                | Rule::ChoiceComm
                | Rule::ChoiceIdem
                | Rule::TestChoice
                | Rule::RefDC
        )
    }
}

/// Which way a mutual-refinement rule is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    Fwd,
    Rev,
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Meta {
    Game(Game),
    Formula(Formula),
    Term(Term),
    Var(Var),
    Name(String),
    Rat(Rat),
    Sln(Vec<(String, Term)>),
}

/// The syntactic category of a rule metavariable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetaKind {
    Game,
    Formula,
    Term,
    Var,
    Name,
    Rat,
    Sln,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Premise {
    Derivation(Derivation),
    Proof(Proof),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Derivation {
    pub rule: Rule,
    pub dir: Dir,
    pub inst: BTreeMap<String, Meta>,
    pub premises: Vec<Premise>,
}

impl Derivation {
    pub fn new(rule: Rule, inst: Vec<(&str, Meta)>, premises: Vec<Premise>) -> Derivation {
        Derivation { rule, dir: Dir::Fwd, inst: inst.into_iter().map(|(k, v)| (k.to_string(), v)).collect(), premises }
    }

    pub fn rev(mut self) -> Derivation {
        self.dir = Dir::Rev;
        self
    }

    pub fn both(mut self) -> Derivation {
        self.dir = Dir::Both;
        self
    }

    pub fn size(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(|p| match p {
                Premise::Derivation(d) => d.size(),
                Premise::Proof(p) => p.size(),
            })
            .sum::<usize>()
    }
}

impl Proof {
    pub fn hyp(l: &str) -> Proof {
        Proof::Hyp(l.to_string())
    }

    pub fn seq(p: Proof) -> Proof {
        Proof::SeqIntro(Box::new(p))
    }

    pub fn dual(p: Proof) -> Proof {
        Proof::DualIntro(Box::new(p))
    }

    pub fn pair(a: Proof, b: Proof) -> Proof {
        Proof::Pair(Box::new(a), Box::new(b))
    }

    pub fn lam(label: &str, hyp: Formula, sub: Proof) -> Proof {
        Proof::LamProof { label: label.to_string(), hyp, sub: Box::new(sub) }
    }

    pub fn lam_real(ghost: &str, sub: Proof) -> Proof {
        Proof::LamReal { ghost: ghost.to_string(), sub: Box::new(sub) }
    }

    pub fn asgn(ghost: &str, target: Var, label: &str, sub: Proof) -> Proof {
        Proof::AssignIntro { ghost: ghost.to_string(), target, label: label.to_string(), sub: Box::new(sub) }
    }

    pub fn qe(target: Formula) -> Proof {
        Proof::QE { target, sub: None }
    }

    pub fn app(f: Proof, a: Proof) -> Proof {
        Proof::App(Box::new(f), Box::new(a))
    }

    pub fn refproof(d: Derivation) -> Proof {
        Proof::RefProof(Box::new(d))
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Immediate proof subterms, in order.
    pub fn children(&self) -> Vec<&Proof> {
        match self {
            Proof::Hyp(_) | Proof::QE { sub: None, .. } => vec![],
            Proof::InjL(a)
            | Proof::InjR(a)
            | Proof::SeqIntro(a)
            | Proof::DualIntro(a)
            | Proof::Stop(a)
            | Proof::Go(a)
            | Proof::ProjL(a)
            | Proof::ProjR(a)
            | Proof::DW(a)
            | Proof::SeqElim(a)
            | Proof::DualElim(a)
            | Proof::AppTerm(a, _) => vec![a],
            Proof::LamReal { sub, .. }
            | Proof::LamProof { sub, .. }
            | Proof::AssignIntro { sub, .. }
            | Proof::DAssignIntro { sub, .. }
            | Proof::Dec { sub, .. }
            | Proof::Split { sub, .. }
            | Proof::Ghost { sub, .. }
            | Proof::DG { sub, .. }
            | Proof::BSolve { sub, .. } => vec![sub],
            Proof::QE { sub: Some(s), .. } => vec![s],
            Proof::Case { scrut, lsub, rsub, .. } => vec![scrut, lsub, rsub],
            Proof::RepCase { scrut, ssub, gsub, .. } | Proof::FP { scrut, ssub, gsub, .. } => {
                vec![scrut, ssub, gsub]
            }
            Proof::Pair(a, b) | Proof::App(a, b) => vec![a, b],
            Proof::Rep { base, step, post, .. } => vec![base, step, post],
            Proof::For(f) => vec![&f.base, &f.step, &f.post],
            Proof::Unpack { packed, sub, .. } => vec![packed, sub],
            Proof::Mon { main, sub, .. } | Proof::AssignElim { main, sub, .. } => vec![main, sub],
            Proof::DI { base, step } => vec![base, step],
            Proof::DC { show, use_, .. } => vec![show, use_],
            Proof::DSolve { dom, post, .. } => vec![dom, post],
            Proof::RefProof(_) => vec![],
            Proof::BoxRef { main, refinement } | Proof::DiamondRef { main, refinement } => {
                vec![main, refinement]
            }
        }
    }

    /// Pre-order traversal of proof subterms; does not enter derivations.
    pub fn visit(&self, f: &mut impl FnMut(&Proof)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Labels and variable names introduced anywhere, including inside
    /// nested derivations; used to pick fresh names.
    pub fn binder_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_names(self, &mut out);
        out
    }
}

fn collect_names(p: &Proof, out: &mut Vec<String>) {
    match p {
        Proof::Hyp(l) => out.push(l.clone()),
        Proof::Case { left, right, .. } => out.extend([left.clone(), right.clone()]),
        Proof::RepCase { stop, go, .. } | Proof::FP { stop, go, .. } => out.extend([stop.clone(), go.clone()]),
        Proof::LamReal { ghost, .. } => out.push(ghost.clone()),
        Proof::LamProof { label, .. } => out.push(label.clone()),
        Proof::AssignIntro { ghost, label, .. }
        | Proof::DAssignIntro { ghost, label, .. }
        | Proof::Unpack { ghost, label, .. } => out.extend([ghost.clone(), label.clone()]),
        Proof::Rep { step_label, post_label, .. } => out.extend([step_label.clone(), post_label.clone()]),
        Proof::For(f) => out.extend([
            f.ghost.clone(),
            f.step_labels.0.clone(),
            f.step_labels.1.clone(),
            f.post_labels.0.clone(),
            f.post_labels.1.clone(),
        ]),
        Proof::Ghost { var, label, .. } | Proof::DG { var, label, .. } => out.extend([var.clone(), label.clone()]),
        Proof::Mon { label, .. } => out.push(label.clone()),
        Proof::BSolve { time, range, .. } => out.extend([time.clone(), range.clone()]),
        Proof::DSolve { time, .. } => out.push(time.clone()),
        Proof::AssignElim { ghost, eq_label, label, .. } => {
            out.extend([ghost.clone(), eq_label.clone(), label.clone()])
        }
        Proof::RefProof(d) => {
            for prem in &d.premises {
                match prem {
                    Premise::Proof(q) => collect_names(q, out),
                    Premise::Derivation(d2) => collect_names(&Proof::RefProof(Box::new(d2.clone())), out),
                }
            }
        }
        _ => {}
    }
    for c in p.children() {
        collect_names(c, out);
    }
}

impl Proof {
    /// Formulas written directly in this proof term, in pre-order.
    pub fn formulas(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        match self {
            Proof::LamProof { hyp: f, .. }
            | Proof::Rep { inv: f, .. }
            | Proof::QE { target: f, .. }
            | Proof::Dec { target: f, .. }
            | Proof::Mon { mid: f, .. }
            | Proof::DC { cut: f, .. } => out.push(f),
            Proof::For(fp) => out.push(&fp.variant),
            _ => {}
        }
        for c in self.children() {
            out.extend(c.formulas());
        }
        out
    }

    /// Rewrites the formulas returned by [`Proof::formulas`].
    pub fn map_formulas(&self, m: &impl Fn(&Formula) -> Formula) -> Proof {
        let b = |p: &Proof| Box::new(p.map_formulas(m));
        match self {
            Proof::Hyp(_) | Proof::RefProof(_) => self.clone(),
            Proof::InjL(a) => Proof::InjL(b(a)),
            Proof::InjR(a) => Proof::InjR(b(a)),
            Proof::Case { scrut, left, lsub, right, rsub } => {
                Proof::Case { scrut: b(scrut), left: left.clone(), lsub: b(lsub), right: right.clone(), rsub: b(rsub) }
            }
            Proof::RepCase { scrut, stop, ssub, go, gsub } => {
                Proof::RepCase { scrut: b(scrut), stop: stop.clone(), ssub: b(ssub), go: go.clone(), gsub: b(gsub) }
            }
            Proof::FP { scrut, stop, ssub, go, gsub } => {
                Proof::FP { scrut: b(scrut), stop: stop.clone(), ssub: b(ssub), go: go.clone(), gsub: b(gsub) }
            }
            Proof::LamReal { ghost, sub } => Proof::LamReal { ghost: ghost.clone(), sub: b(sub) },
            Proof::LamProof { label, hyp, sub } => Proof::LamProof { label: label.clone(), hyp: m(hyp), sub: b(sub) },
            Proof::Pair(x, y) => Proof::Pair(b(x), b(y)),
            Proof::AssignIntro { ghost, target, label, sub } => {
                Proof::AssignIntro { ghost: ghost.clone(), target: target.clone(), label: label.clone(), sub: b(sub) }
            }
            Proof::DAssignIntro { witness, ghost, label, sub } => Proof::DAssignIntro {
                witness: witness.clone(),
                ghost: ghost.clone(),
                label: label.clone(),
                sub: b(sub),
            },
            Proof::SeqIntro(a) => Proof::SeqIntro(b(a)),
            Proof::DualIntro(a) => Proof::DualIntro(b(a)),
            Proof::Rep { base, step_label, inv, step, post_label, post } => Proof::Rep {
                base: b(base),
                step_label: step_label.clone(),
                inv: m(inv),
                step: b(step),
                post_label: post_label.clone(),
                post: b(post),
            },
            Proof::For(fp) => Proof::For(Box::new(ForProof {
                variant: m(&fp.variant),
                base: fp.base.map_formulas(m),
                step: fp.step.map_formulas(m),
                post: fp.post.map_formulas(m),
                ..(**fp).clone()
            })),
            Proof::Stop(a) => Proof::Stop(b(a)),
            Proof::Go(a) => Proof::Go(b(a)),
            Proof::App(x, y) => Proof::App(b(x), b(y)),
            Proof::AppTerm(a, t) => Proof::AppTerm(b(a), t.clone()),
            Proof::ProjL(a) => Proof::ProjL(b(a)),
            Proof::ProjR(a) => Proof::ProjR(b(a)),
            Proof::Unpack { packed, ghost, label, sub } => {
                Proof::Unpack { packed: b(packed), ghost: ghost.clone(), label: label.clone(), sub: b(sub) }
            }
            Proof::QE { target, sub } => Proof::QE { target: m(target), sub: sub.as_deref().map(b) },
            Proof::Dec { target, sub } => Proof::Dec { target: m(target), sub: b(sub) },
            Proof::Split { left, right, eps, sub } => {
                Proof::Split { left: left.clone(), right: right.clone(), eps: eps.clone(), sub: b(sub) }
            }
            Proof::Ghost { var, rhs, label, sub } => {
                Proof::Ghost { var: var.clone(), rhs: rhs.clone(), label: label.clone(), sub: b(sub) }
            }
            Proof::Mon { main, mid, label, sub } => {
                Proof::Mon { main: b(main), mid: m(mid), label: label.clone(), sub: b(sub) }
            }
            Proof::DI { base, step } => Proof::DI { base: b(base), step: b(step) },
            Proof::DC { cut, show, use_ } => Proof::DC { cut: m(cut), show: b(show), use_: b(use_) },
            Proof::DW(a) => Proof::DW(b(a)),
            Proof::DG { var, init, a, b: bb, label, sub } => Proof::DG {
                var: var.clone(),
                init: init.clone(),
                a: a.clone(),
                b: bb.clone(),
                label: label.clone(),
                sub: b(sub),
            },
            Proof::BSolve { time, range, sln, sub } => {
                Proof::BSolve { time: time.clone(), range: range.clone(), sln: sln.clone(), sub: b(sub) }
            }
            Proof::DSolve { time, duration, sln, dom, post } => Proof::DSolve {
                time: time.clone(),
                duration: duration.clone(),
                sln: sln.clone(),
                dom: b(dom),
                post: b(post),
            },
            Proof::SeqElim(a) => Proof::SeqElim(b(a)),
            Proof::DualElim(a) => Proof::DualElim(b(a)),
            Proof::AssignElim { main, ghost, eq_label, label, sub } => Proof::AssignElim {
                main: b(main),
                ghost: ghost.clone(),
                eq_label: eq_label.clone(),
                label: label.clone(),
                sub: b(sub),
            },
            Proof::BoxRef { main, refinement } => Proof::BoxRef { main: b(main), refinement: b(refinement) },
            Proof::DiamondRef { main, refinement } => Proof::DiamondRef { main: b(main), refinement: b(refinement) },
        }
    }
}
