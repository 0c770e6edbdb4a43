//! Executes dual-free games against a scripted Demon.
//!
//! Discrete steps run over exact rationals. An ODE whose right-hand sides
//! read no evolving variable follows its linear closed form exactly; any
//! other ODE is integrated with fixed-step RK4, and the variables it writes
//! are marked inexact so later comparisons on them use a tolerance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::prelude::*;
use crate::syntax::{CmpOp, Formula, Game, Ode};
use crate::term::{eval, rat, ratio, Rat, Term, TermError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("game is not a system: it contains a dual")]
    NonSystemGame,
    #[error("variable `{0}` is read before it has a value")]
    Unbound(String),
    #[error("cannot evaluate `{0}` on a state")]
    Undecidable(String),
    #[error("script decision {index} is {found} where {expected} was needed")]
    ScriptMismatch { index: usize, expected: &'static str, found: String },
    #[error("negative duration {0}")]
    NegativeDuration(String),
    #[error("{0}")]
    Term(String),
}

impl From<TermError> for SimError {
    fn from(e: TermError) -> SimError {
        match e {
            TermError::Unbound(x) => SimError::Unbound(x),
            e => SimError::Term(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

/// Parses `3`, `-2/3` or `0.25` into an exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{frac}", int.trim_start_matches(['-', '+']));
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let num: num_bigint::BigInt = digits.parse().ok()?;
        let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
        let q = Rat::new(num, den);
        return Some(if neg { -q } else { q });
    }
    Rat::from_str(s).ok()
}

/// A valuation of base and primed variables. Variables last written by
/// numeric integration are inexact.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct State {
    values: BTreeMap<Var, Rat>,
    inexact: BTreeSet<Var>,
}

impl State {
    pub fn new() -> State {
        State::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Rat)>) -> State {
        let mut s = State::new();
        for (x, q) in pairs {
            s.set(parse_var(x), q, false);
        }
        s
    }

    /// Reads `name = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<State, ScriptError> {
        let mut s = State::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ScriptError { line: i + 1, message };
            let (x, v) = line.split_once('=').ok_or_else(|| err(format!("expected `name = value`, found `{line}`")))?;
            let q = parse_rat(v).ok_or_else(|| err(format!("`{}` is not a rational", v.trim())))?;
            s.set(parse_var(x.trim()), q, false);
        }
        Ok(s)
    }

    pub fn get(&self, v: &Var) -> Option<&Rat> {
        self.values.get(v)
    }

    pub fn value(&self, name: &str) -> Option<&Rat> {
        self.values.get(&parse_var(name))
    }

    pub fn set(&mut self, v: Var, q: Rat, inexact: bool) {
        if inexact {
            self.inexact.insert(v.clone());
        } else {
            self.inexact.remove(&v);
        }
        self.values.insert(v, q);
    }

    pub fn is_exact(&self, v: &Var) -> bool {
        !self.inexact.contains(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Rat)> {
        self.values.iter()
    }

    fn eval(&self, t: &Term) -> Result<Rat, SimError> {
        Ok(eval(t, &|v: &Var| self.values.get(v).cloned())?)
    }

    fn eval_f64(&self, t: &Term) -> Result<f64, SimError> {
        eval_f64(t, &|v| self.values.get(v).and_then(|q| q.to_f64()))
    }

    fn mentions_inexact(&self, t: &Term) -> bool {
        !self.inexact.is_empty() && t.vars().iter().any(|v| self.inexact.contains(v))
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, q) in &self.values {
            if !first {
                write!(f, "\t")?;
            }
            first = false;
            if self.inexact.contains(v) {
                write!(f, "{v}={}", q.to_f64().unwrap_or(f64::NAN))?;
            } else {
                write!(f, "{v}={q}")?;
            }
        }
        Ok(())
    }
}

fn parse_var(s: &str) -> Var {
    match s.strip_suffix('\'') {
        Some(base) => Var::prime(base),
        None => Var::plain(s),
    }
}

fn term_var(t: &Term) -> Var {
    match t {
        Term::Var(x) => Var::plain(x),
        Term::Primed(x) => Var::prime(x),
        _ => unreachable!("not a variable"),
    }
}

/// One Demon move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Left,
    Right,
    Value(Rat),
    Duration(Rat),
    Continue,
    Stop,
}

impl Decision {
    fn kind(&self) -> &'static str {
        match self {
            Decision::Left | Decision::Right => "a choice",
            Decision::Value(_) => "a value",
            Decision::Duration(_) => "a duration",
            Decision::Continue | Decision::Stop => "a loop decision",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Left => write!(f, "L"),
            Decision::Right => write!(f, "R"),
            Decision::Value(q) => write!(f, "V {q}"),
            Decision::Duration(q) => write!(f, "D {q}"),
            Decision::Continue => write!(f, "C"),
            Decision::Stop => write!(f, "S"),
        }
    }
}

/// Demon's decisions in play order, and the most loop iterations Demon may
/// request across the run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Script {
    pub decisions: Vec<Decision>,
    pub cap: usize,
}

pub const DEFAULT_CAP: usize = 100_000;

impl Script {
    pub fn new(decisions: Vec<Decision>) -> Script {
        Script { decisions, cap: DEFAULT_CAP }
    }

    /// One decision per line: `L`, `R`, `V q`, `D q`, `C` or `S`.
    pub fn parse(text: &str) -> Result<Script, ScriptError> {
        let mut decisions = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ScriptError { line: i + 1, message };
            let mut words = line.split_whitespace();
            let head = words.next().unwrap_or("");
            let arg = words.next();
            if words.next().is_some() {
                return Err(err(format!("trailing input in `{line}`")));
            }
            let number = |what: &str| -> Result<Rat, ScriptError> {
                let a = arg.ok_or_else(|| err(format!("`{head}` needs a {what}")))?;
                parse_rat(a).ok_or_else(|| err(format!("`{a}` is not a rational")))
            };
            let d = match head {
                "L" => Decision::Left,
                "R" => Decision::Right,
                "C" => Decision::Continue,
                "S" => Decision::Stop,
                "V" => Decision::Value(number("value")?),
                "D" => {
                    let q = number("duration")?;
                    if q.is_negative() {
                        return Err(err(format!("negative duration {q}")));
                    }
                    Decision::Duration(q)
                }
                _ => return Err(err(format!("unknown decision `{head}`"))),
            };
            if !matches!(d, Decision::Value(_) | Decision::Duration(_)) && arg.is_some() {
                return Err(err(format!("`{head}` takes no argument")));
            }
            decisions.push(d);
        }
        Ok(Script::new(decisions))
    }

    pub fn to_text(&self) -> String {
        self.decisions.iter().map(|d| format!("{d}\n")).collect()
    }
}

/// Integration and comparison settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SimOptions {
    /// RK4 steps per ODE segment, and domain checkpoints on the closed form.
    pub steps: u32,
    /// Slack for comparisons that read inexact variables.
    pub tolerance: f64,
    /// Integrate every ODE numerically, even when a closed form applies.
    pub force_rk4: bool,
}

impl Default for SimOptions {
    fn default() -> SimOptions {
        SimOptions { steps: 1024, tolerance: 1e-9, force_rk4: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    PostconditionHolds,
    PostconditionFails(State),
    TestFailed(Formula, State),
    DomainViolated(Rat, State),
    ScriptExhausted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::PostconditionHolds => write!(f, "POSTCONDITION HOLDS"),
            Verdict::PostconditionFails(s) => write!(f, "POSTCONDITION FAILS\t{s}"),
            Verdict::TestFailed(t, s) => write!(f, "TEST FAILED {t}\t{s}"),
            Verdict::DomainViolated(t, s) => write!(f, "DOMAIN VIOLATED at {t}\t{s}"),
            Verdict::ScriptExhausted => write!(f, "SCRIPT EXHAUSTED"),
        }
    }
}

/// The states after each atomic step, and how the run ended.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub points: Vec<(String, State)>,
    pub verdict: Verdict,
}

impl Trace {
    pub fn final_state(&self) -> Option<&State> {
        self.points.last().map(|(_, s)| s)
    }

    /// `step<TAB>point<TAB>var=value...` per point.
    pub fn to_tsv(&self) -> String {
        self.points.iter().enumerate().map(|(i, (p, s))| format!("{i}\t{p}\t{s}\n")).collect()
    }
}

/// A source of Demon decisions.
pub trait Demon {
    fn choose(&mut self) -> Option<Decision>;
    fn value(&mut self) -> Option<Decision>;
    fn duration(&mut self) -> Option<Decision>;
    fn repeat(&mut self) -> Option<Decision>;
}

struct Scripted<'s> {
    script: &'s Script,
    next: usize,
}

impl Scripted<'_> {
    fn pop(&mut self) -> Option<Decision> {
        let d = self.script.decisions.get(self.next).cloned();
        self.next += 1;
        d
    }
}

impl Demon for Scripted<'_> {
    fn choose(&mut self) -> Option<Decision> {
        self.pop()
    }
    fn value(&mut self) -> Option<Decision> {
        self.pop()
    }
    fn duration(&mut self) -> Option<Decision> {
        self.pop()
    }
    fn repeat(&mut self) -> Option<Decision> {
        self.pop()
    }
}

/// Random Demon: uniform choices, values in `[-bound, bound]` with
/// denominators up to 4, durations in `[0, max_duration]`, and loops that
/// continue with probability `p_continue`.
pub struct RandomDemon<'r, R: Rng> {
    pub rng: &'r mut R,
    pub bound: i64,
    pub max_duration: i64,
    pub p_continue: f64,
    pub recorded: Vec<Decision>,
}

impl<'r, R: Rng> RandomDemon<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        RandomDemon { rng, bound: 10, max_duration: 1, p_continue: 0.9, recorded: Vec::new() }
    }

    fn record(&mut self, d: Decision) -> Option<Decision> {
        self.recorded.push(d.clone());
        Some(d)
    }
}

impl<R: Rng> Demon for RandomDemon<'_, R> {
    fn choose(&mut self) -> Option<Decision> {
        let d = if self.rng.gen_bool(0.5) { Decision::Left } else { Decision::Right };
        self.record(d)
    }
    fn value(&mut self) -> Option<Decision> {
        let den = self.rng.gen_range(1..=4);
        let num = self.rng.gen_range(-self.bound * den..=self.bound * den);
        self.record(Decision::Value(ratio(num, den)))
    }
    fn duration(&mut self) -> Option<Decision> {
        let den = self.rng.gen_range(1..=8);
        let num = self.rng.gen_range(0..=self.max_duration * den);
        self.record(Decision::Duration(ratio(num, den)))
    }
    fn repeat(&mut self) -> Option<Decision> {
        let d = if self.rng.gen_bool(self.p_continue) { Decision::Continue } else { Decision::Stop };
        self.record(d)
    }
}

/// Runs `g` from `init`, resolving Demon's moves from `script`, then
/// evaluates `post` on the final state.
pub fn run_system(
    g: &Game,
    init: &State,
    script: &Script,
    post: &Formula,
    opts: &SimOptions,
) -> Result<Trace, SimError> {
    let mut demon = Scripted { script, next: 0 };
    run_with(g, init, &mut demon, script.cap, post, opts)
}

/// Plays `g` against a random Demon and returns the recorded script with
/// the trace; replaying the script reproduces the trace.
pub fn run_random<R: Rng>(
    g: &Game,
    init: &State,
    demon: &mut RandomDemon<'_, R>,
    cap: usize,
    post: &Formula,
    opts: &SimOptions,
) -> Result<(Script, Trace), SimError> {
    let trace = run_with(g, init, demon, cap, post, opts)?;
    Ok((Script { decisions: std::mem::take(&mut demon.recorded), cap }, trace))
}

/// Runs every script from the same initial state.
pub fn run_batch(
    g: &Game,
    init: &State,
    scripts: &[Script],
    post: &Formula,
    opts: &SimOptions,
) -> Vec<Result<Trace, SimError>> {
    scripts.par_iter().map(|s| run_system(g, init, s, post, opts)).collect()
}

/// Plays `g` against any Demon.
pub fn run_with(
    g: &Game,
    init: &State,
    demon: &mut dyn Demon,
    cap: usize,
    post: &Formula,
    opts: &SimOptions,
) -> Result<Trace, SimError> {
    if !g.is_system() {
        return Err(SimError::NonSystemGame);
    }
    let mut run = Run { demon, opts, points: Vec::new(), iterations: 0, cap, decisions: 0 };
    let state = match run.exec(g, init.clone())? {
        Flow::Done(s) => s,
        Flow::Halt(v) => return Ok(Trace { points: run.points, verdict: v }),
    };
    let verdict = if holds(post, &state, opts.tolerance)? {
        Verdict::PostconditionHolds
    } else {
        Verdict::PostconditionFails(state)
    };
    Ok(Trace { points: run.points, verdict })
}

enum Flow {
    Done(State),
    Halt(Verdict),
}

struct Run<'a> {
    demon: &'a mut dyn Demon,
    opts: &'a SimOptions,
    points: Vec<(String, State)>,
    iterations: usize,
    cap: usize,
    decisions: usize,
}

impl Run<'_> {
    fn take(&mut self, d: Option<Decision>, expected: &'static str) -> Result<Option<Decision>, SimError> {
        let index = self.decisions;
        self.decisions += 1;
        match d {
            None => Ok(None),
            Some(d) if d.kind() == expected => Ok(Some(d)),
            Some(d) => Err(SimError::ScriptMismatch { index, expected, found: d.to_string() }),
        }
    }

    fn exec(&mut self, g: &Game, mut s: State) -> Result<Flow, SimError> {
        match g {
            Game::Test(f) => {
                let ok = holds(f, &s, self.opts.tolerance)?;
                self.points.push((format!("?{f}"), s.clone()));
                if ok {
                    Ok(Flow::Done(s))
                } else {
                    Ok(Flow::Halt(Verdict::TestFailed((**f).clone(), s)))
                }
            }
            Game::Assign(x, f) => {
                let inexact = s.mentions_inexact(f);
                let q = s.eval(f)?;
                s.set(x.clone(), q, inexact);
                self.points.push((format!("{x}:={f}"), s.clone()));
                Ok(Flow::Done(s))
            }
            Game::NondetAssign(x) => {
                let d = self.demon.value();
                let Some(Decision::Value(q)) = self.take(d, "a value")? else {
                    return Ok(Flow::Halt(Verdict::ScriptExhausted));
                };
                s.set(x.clone(), q, false);
                self.points.push((format!("{x}:=*"), s.clone()));
                Ok(Flow::Done(s))
            }
            Game::Choice(a, b) => {
                let d = self.demon.choose();
                match self.take(d, "a choice")? {
                    Some(Decision::Left) => self.exec(a, s),
                    Some(_) => self.exec(b, s),
                    None => Ok(Flow::Halt(Verdict::ScriptExhausted)),
                }
            }
            Game::Seq(a, b) => match self.exec(a, s)? {
                Flow::Done(s) => self.exec(b, s),
                halt => Ok(halt),
            },
            Game::Repeat(a) => loop {
                if self.iterations >= self.cap {
                    return Ok(Flow::Done(s));
                }
                let d = self.demon.repeat();
                match self.take(d, "a loop decision")? {
                    Some(Decision::Stop) => return Ok(Flow::Done(s)),
                    Some(_) => {
                        self.iterations += 1;
                        match self.exec(a, s)? {
                            Flow::Done(next) => s = next,
                            halt => return Ok(halt),
                        }
                    }
                    None => return Ok(Flow::Halt(Verdict::ScriptExhausted)),
                }
            },
            Game::Dual(_) => Err(SimError::NonSystemGame),
            Game::Ode(o) => {
                let d = self.demon.duration();
                let Some(Decision::Duration(d)) = self.take(d, "a duration")? else {
                    return Ok(Flow::Halt(Verdict::ScriptExhausted));
                };
                if d.is_negative() {
                    return Err(SimError::NegativeDuration(d.to_string()));
                }
                let flow = if closed_form_applies(o) && !self.opts.force_rk4 {
                    self.closed_form(o, &d, s)?
                } else {
                    self.rk4(o, &d, s)?
                };
                if let Flow::Done(s) = &flow {
                    self.points.push((format!("ode {d}"), s.clone()));
                }
                Ok(flow)
            }
        }
    }

    fn closed_form(&self, o: &Ode, d: &Rat, s: State) -> Result<Flow, SimError> {
        let mut rates = Vec::with_capacity(o.eqs.len());
        for (x, f) in &o.eqs {
            let x = Var::plain(x);
            let x0 = s.get(&x).cloned().ok_or_else(|| SimError::Unbound(x.to_string()))?;
            let exact = s.is_exact(&x) && !s.mentions_inexact(f);
            rates.push((x, x0, s.eval(f)?, exact, s.mentions_inexact(f)));
        }
        let mut cur = s;
        let place = |cur: &mut State, t: &Rat| {
            for (x, x0, c, exact, rate_inexact) in &rates {
                cur.set(x.clone(), x0 + c * t, !exact);
                cur.set(x.primed_version(), c.clone(), *rate_inexact);
            }
        };
        let n = self.opts.steps.max(1);
        let constant = rates.iter().all(|(_, _, c, _, _)| c.is_zero());
        for j in 0..=n {
            let t = d * ratio(j as i64, n as i64);
            place(&mut cur, &t);
            if !holds(&o.constraint, &cur, self.opts.tolerance)? {
                return Ok(Flow::Halt(Verdict::DomainViolated(t, cur)));
            }
            if constant {
                break;
            }
        }
        place(&mut cur, d);
        Ok(Flow::Done(cur))
    }

    fn rk4(&self, o: &Ode, d: &Rat, s: State) -> Result<Flow, SimError> {
        let n = self.opts.steps.max(1);
        let xs: Vec<Var> = o.eqs.iter().map(|(x, _)| Var::plain(x)).collect();
        let h = d.to_f64().unwrap_or(f64::NAN) / n as f64;
        let mut env = FloatState::of(&s);
        let mut y: Vec<f64> = xs
            .iter()
            .map(|x| env.values.get(x).copied().ok_or_else(|| SimError::Unbound(x.to_string())))
            .collect::<Result<_, _>>()?;
        let field = |env: &mut FloatState, vals: &[f64]| -> Result<Vec<f64>, SimError> {
            for (x, v) in xs.iter().zip(vals) {
                env.values.insert(x.clone(), *v);
            }
            o.eqs.iter().map(|(_, f)| env.eval(f)).collect()
        };
        let axpy = |a: &[f64], k: &[f64], c: f64| -> Vec<f64> { a.iter().zip(k).map(|(a, k)| a + c * k).collect() };
        let rational = |env: &FloatState| -> State {
            let mut st = s.clone();
            for x in &xs {
                st.set(x.clone(), to_rat(env.values[x]), true);
            }
            st
        };
        if !holds(&o.constraint, &env, self.opts.tolerance)? {
            return Ok(Flow::Halt(Verdict::DomainViolated(rat(0), rational(&env))));
        }
        for j in 1..=n {
            let k1 = field(&mut env, &y)?;
            let k2 = field(&mut env, &axpy(&y, &k1, h / 2.0))?;
            let k3 = field(&mut env, &axpy(&y, &k2, h / 2.0))?;
            let k4 = field(&mut env, &axpy(&y, &k3, h))?;
            for i in 0..y.len() {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            for (x, v) in xs.iter().zip(&y) {
                env.values.insert(x.clone(), *v);
            }
            if !holds(&o.constraint, &env, self.opts.tolerance)? {
                return Ok(Flow::Halt(Verdict::DomainViolated(d * ratio(j as i64, n as i64), rational(&env))));
            }
        }
        let rates = field(&mut env, &y)?;
        let mut end = rational(&env);
        for (x, r) in xs.iter().zip(rates) {
            end.set(x.primed_version(), to_rat(r), true);
        }
        Ok(Flow::Done(end))
    }
}

fn to_rat(v: f64) -> Rat {
    Rat::from_float(v).unwrap_or_else(Rat::zero)
}

/// No right-hand side reads a variable the ODE evolves.
pub fn closed_form_applies(o: &Ode) -> bool {
    let bound: BTreeSet<Var> = o.vars().map(|x| Var::plain(x)).collect();
    o.eqs.iter().all(|(_, f)| f.vars().is_disjoint(&bound))
}

/// What formula evaluation needs from a state.
pub trait Valuation: Clone {
    fn compare(&self, op: CmpOp, a: &Term, b: &Term, tol: f64) -> Result<bool, SimError>;
    fn assign(&mut self, x: &Var, f: &Term) -> Result<(), SimError>;
}

impl Valuation for State {
    fn compare(&self, op: CmpOp, a: &Term, b: &Term, tol: f64) -> Result<bool, SimError> {
        if !(self.mentions_inexact(a) || self.mentions_inexact(b)) {
            let (x, y) = (self.eval(a)?, self.eval(b)?);
            return Ok(op.holds(x.cmp(&y)));
        }
        Ok(loose(op, self.eval_f64(a)?, self.eval_f64(b)?, tol))
    }

    fn assign(&mut self, x: &Var, f: &Term) -> Result<(), SimError> {
        let q = self.eval(f)?;
        let inexact = self.mentions_inexact(f);
        self.set(x.clone(), q, inexact);
        Ok(())
    }
}

/// A double-precision valuation used inside numeric integration.
#[derive(Clone, Debug, Default)]
pub struct FloatState {
    pub values: BTreeMap<Var, f64>,
}

impl FloatState {
    pub fn of(s: &State) -> FloatState {
        FloatState { values: s.values.iter().map(|(v, q)| (v.clone(), q.to_f64().unwrap_or(f64::NAN))).collect() }
    }

    fn eval(&self, t: &Term) -> Result<f64, SimError> {
        eval_f64(t, &|v| self.values.get(v).copied())
    }
}

impl Valuation for FloatState {
    fn compare(&self, op: CmpOp, a: &Term, b: &Term, tol: f64) -> Result<bool, SimError> {
        Ok(loose(op, self.eval(a)?, self.eval(b)?, tol))
    }

    fn assign(&mut self, x: &Var, f: &Term) -> Result<(), SimError> {
        let v = self.eval(f)?;
        self.values.insert(x.clone(), v);
        Ok(())
    }
}

fn eval_f64(t: &Term, env: &impl Fn(&Var) -> Option<f64>) -> Result<f64, SimError> {
    Ok(match t {
        Term::Lit(q) => q.to_f64().unwrap_or(f64::NAN),
        Term::Var(_) | Term::Primed(_) => {
            let v = term_var(t);
            env(&v).ok_or_else(|| SimError::Unbound(v.to_string()))?
        }
        Term::Sum(a, b) => eval_f64(a, env)? + eval_f64(b, env)?,
        Term::Product(a, b) => eval_f64(a, env)? * eval_f64(b, env)?,
        Term::Differential(_) => return Err(SimError::Undecidable(t.to_string())),
    })
}

/// Comparison with relative slack `tol`, resolved in favour of the claim.
fn loose(op: CmpOp, x: f64, y: f64, tol: f64) -> bool {
    let slack = tol * 1f64.max(x.abs()).max(y.abs());
    let diff = x - y;
    match op {
        CmpOp::Le => diff <= slack,
        CmpOp::Lt => diff < slack,
        CmpOp::Ge => diff >= -slack,
        CmpOp::Gt => diff > -slack,
        CmpOp::Eq => diff.abs() <= slack,
        CmpOp::Ne => diff != 0.0,
    }
}

/// Truth of `f` in `s`. Modalities are evaluated by enumerating the runs of
/// tests, assignments, choices and sequences; other games are rejected.
pub fn holds<V: Valuation>(f: &Formula, s: &V, tol: f64) -> Result<bool, SimError> {
    match f {
        Formula::Compare(op, a, b) => s.compare(*op, a, b, tol),
        Formula::Box(g, p) => {
            for t in reach(g, s, tol)? {
                if !holds(p, &t, tol)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Diamond(g, p) => {
            for t in reach(g, s, tol)? {
                if holds(p, &t, tol)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Refine(..) => Err(SimError::Undecidable(f.to_string())),
    }
}

fn reach<V: Valuation>(g: &Game, s: &V, tol: f64) -> Result<Vec<V>, SimError> {
    Ok(match g {
        Game::Test(f) => {
            if holds(f, s, tol)? {
                vec![s.clone()]
            } else {
                vec![]
            }
        }
        Game::Assign(x, f) => {
            let mut t = s.clone();
            t.assign(x, f)?;
            vec![t]
        }
        Game::Choice(a, b) => {
            let mut out = reach(a, s, tol)?;
            out.extend(reach(b, s, tol)?);
            out
        }
        Game::Seq(a, b) => {
            let mut out = Vec::new();
            for t in reach(a, s, tol)? {
                out.extend(reach(b, &t, tol)?);
            }
            out
        }
        _ => return Err(SimError::Undecidable(g.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_formula, parse_game};

    #[test]
    fn decimal_and_fraction_literals_parse_exactly() {
        assert_eq!(parse_rat("0.25"), Some(ratio(1, 4)));
        assert_eq!(parse_rat("-1.5"), Some(ratio(-3, 2)));
        assert_eq!(parse_rat("-2/6"), Some(ratio(-1, 3)));
        assert_eq!(parse_rat("x"), None);
    }

    #[test]
    fn linear_flow_uses_exact_closed_form() {
        let g = parse_game("{x'=2 & x <= 10}").unwrap();
        let init = State::from_pairs([("x", rat(1))]);
        let script = Script::parse("D 3/2").unwrap();
        let post = parse_formula("x = 4").unwrap();
        let t = run_system(&g, &init, &script, &post, &SimOptions::default()).unwrap();
        assert_eq!(t.verdict, Verdict::PostconditionHolds);
        assert!(t.final_state().unwrap().is_exact(&Var::plain("x")));
    }

    #[test]
    fn domain_exit_is_reported_at_a_checkpoint() {
        let g = parse_game("{x'=1 & x <= 1}").unwrap();
        let init = State::from_pairs([("x", rat(0))]);
        let script = Script::parse("D 2").unwrap();
        let t = run_system(&g, &init, &script, &Formula::tt(), &SimOptions::default()).unwrap();
        let Verdict::DomainViolated(time, _) = t.verdict else { panic!("{:?}", t.verdict) };
        assert_eq!(time, ratio(513, 512));
    }
}
