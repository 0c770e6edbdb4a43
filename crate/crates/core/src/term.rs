//! Polynomial terms over rational constants, game variables and their primes.
//!
//! Terms are kept as the tree the user wrote. [`Poly`] is the canonical sparse
//! form used for every equality side condition; [`poly_normalize`] maps a tree
//! to the unique tree that represents its polynomial.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// A variable occurrence: `x` or its differential symbol `x'`.
///
/// Ordered by name first so that `x'` sorts right after `x`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub primed: bool,
}

impl Var {
    pub fn plain(name: &str) -> Var {
        Var { name: name.to_string(), primed: false }
    }

    pub fn prime(name: &str) -> Var {
        Var { name: name.to_string(), primed: true }
    }

    pub fn to_term(&self) -> Term {
        if self.primed {
            Term::Primed(self.name.clone())
        } else {
            Term::Var(self.name.clone())
        }
    }

    pub fn primed_version(&self) -> Var {
        Var { name: self.name.clone(), primed: true }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.primed {
            write!(f, "{}'", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Lit(Rat),
    Var(String),
    Primed(String),
    Sum(Box<Term>, Box<Term>),
    Product(Box<Term>, Box<Term>),
    Differential(Box<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("unsupported term `{0}`: {1}")]
    UnsupportedTerm(String, &'static str),
    #[error("unbound variable `{0}`")]
    Unbound(String),
}

impl Term {
    pub fn lit(n: i64) -> Term {
        Term::Lit(rat(n))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn primed(name: &str) -> Term {
        Term::Primed(name.to_string())
    }

    pub fn zero() -> Term {
        Term::lit(0)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Term, b: Term) -> Term {
        Term::Sum(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Term, b: Term) -> Term {
        Term::Product(Box::new(a), Box::new(b))
    }

    /// Negation as the parser builds it: literals absorb the sign.
    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Term) -> Term {
        match a {
            Term::Lit(q) => Term::Lit(-q),
            other => Term::mul(Term::lit(-1), other),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Term, b: Term) -> Term {
        Term::add(a, Term::neg(b))
    }

    pub fn diff(a: Term) -> Term {
        Term::Differential(Box::new(a))
    }

    pub fn as_lit(&self) -> Option<&Rat> {
        match self {
            Term::Lit(q) => Some(q),
            _ => None,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Lit(_) => {}
            Term::Var(x) => {
                out.insert(Var::plain(x));
            }
            Term::Primed(x) => {
                out.insert(Var::prime(x));
            }
            Term::Sum(a, b) | Term::Product(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Differential(a) => {
                // (f)' reads every variable of f and its differential symbol.
                for v in a.vars() {
                    out.insert(v.primed_version());
                    out.insert(v);
                }
            }
        }
    }

    pub fn has_differential(&self) -> bool {
        match self {
            Term::Differential(_) => true,
            Term::Sum(a, b) | Term::Product(a, b) => a.has_differential() || b.has_differential(),
            _ => false,
        }
    }

    pub fn mentions_primed(&self) -> bool {
        self.vars().iter().any(|v| v.primed)
    }

    /// Replace every occurrence of the atom `v` by `f`.
    pub fn replace(&self, v: &Var, f: &Term) -> Term {
        match self {
            Term::Var(x) if !v.primed && x == &v.name => f.clone(),
            Term::Primed(x) if v.primed && x == &v.name => f.clone(),
            Term::Lit(_) | Term::Var(_) | Term::Primed(_) => self.clone(),
            Term::Sum(a, b) => Term::add(a.replace(v, f), b.replace(v, f)),
            Term::Product(a, b) => Term::mul(a.replace(v, f), b.replace(v, f)),
            Term::Differential(a) => Term::diff(a.replace(v, f)),
        }
    }

    /// Map every variable atom through `m`.
    pub fn map_vars(&self, m: &impl Fn(&Var) -> Var) -> Term {
        match self {
            Term::Lit(_) => self.clone(),
            Term::Var(x) => m(&Var::plain(x)).to_term(),
            Term::Primed(x) => m(&Var::prime(x)).to_term(),
            Term::Sum(a, b) => Term::add(a.map_vars(m), b.map_vars(m)),
            Term::Product(a, b) => Term::mul(a.map_vars(m), b.map_vars(m)),
            Term::Differential(a) => Term::diff(a.map_vars(m)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Lit(_) | Term::Var(_) | Term::Primed(_) => 1,
            Term::Sum(a, b) | Term::Product(a, b) => 1 + a.size() + b.size(),
            Term::Differential(a) => 1 + a.size(),
        }
    }
}

/// Exact evaluation. `env` supplies every variable the term reads.
pub fn eval(t: &Term, env: &impl Fn(&Var) -> Option<Rat>) -> Result<Rat, TermError> {
    Ok(match t {
        Term::Lit(q) => q.clone(),
        Term::Var(x) => env(&Var::plain(x)).ok_or_else(|| TermError::Unbound(x.clone()))?,
        Term::Primed(x) => env(&Var::prime(x)).ok_or_else(|| TermError::Unbound(format!("{x}'")))?,
        Term::Sum(a, b) => eval(a, env)? + eval(b, env)?,
        Term::Product(a, b) => eval(a, env)? * eval(b, env)?,
        Term::Differential(a) => return eval(&differentiate(a)?, env),
    })
}

/// A power product, stored sorted by variable with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn of(v: Var) -> Monomial {
        Monomial(vec![(v, 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    fn exponent(&self, v: &Var) -> u32 {
        self.0.iter().find(|(w, _)| w == v).map(|(_, e)| *e).unwrap_or(0)
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut m: BTreeMap<Var, u32> = self.0.iter().cloned().collect();
        for (v, e) in &other.0 {
            *m.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(m.into_iter().collect())
    }

    fn without_one(&self, v: &Var) -> Monomial {
        let mut out = Vec::new();
        for (w, e) in &self.0 {
            if w == v {
                if *e > 1 {
                    out.push((w.clone(), e - 1));
                }
            } else {
                out.push((w.clone(), *e));
            }
        }
        Monomial(out)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree, then the exponent of the first
    /// variable (in variable order) at which the two differ.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let vars: BTreeSet<&Var> = self.0.iter().chain(other.0.iter()).map(|(v, _)| v).collect();
        for v in vars {
            match self.exponent(v).cmp(&other.exponent(v)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with rational coefficients; no zero entries.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly(BTreeMap<Monomial, Rat>);

impl Poly {
    pub fn zero() -> Poly {
        Poly(BTreeMap::new())
    }

    pub fn constant(q: Rat) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), q);
        p
    }

    pub fn var(v: Var) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::of(v), Rat::one());
        p
    }

    fn add_term(&mut self, m: Monomial, q: Rat) {
        if q.is_zero() {
            return;
        }
        let e = self.0.entry(m.clone()).or_insert_with(Rat::zero);
        *e += q;
        if e.is_zero() {
            self.0.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.0.iter()
    }

    pub fn degree(&self) -> u32 {
        self.0.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// The constant value if the polynomial mentions no variables.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.0.len() {
            0 => Some(Rat::zero()),
            1 => self.0.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, q) in &other.0 {
            out.add_term(m.clone(), q.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        let mut out = Poly::zero();
        for (m, q) in &self.0 {
            out.add_term(m.clone(), q * c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, q1) in &self.0 {
            for (m2, q2) in &other.0 {
                out.add_term(m1.times(m2), q1 * q2);
            }
        }
        out
    }

    pub fn from_term(t: &Term) -> Result<Poly, TermError> {
        Ok(match t {
            Term::Lit(q) => Poly::constant(q.clone()),
            Term::Var(x) => Poly::var(Var::plain(x)),
            Term::Primed(x) => Poly::var(Var::prime(x)),
            Term::Sum(a, b) => Poly::from_term(a)?.add(&Poly::from_term(b)?),
            Term::Product(a, b) => Poly::from_term(a)?.mul(&Poly::from_term(b)?),
            Term::Differential(_) => {
                return Err(TermError::UnsupportedTerm(
                    crate::surface::print_term(t),
                    "differential must be expanded first",
                ))
            }
        })
    }

    /// Coefficient of `v` if the polynomial is affine in the variables it
    /// mentions: returns the linear part and the constant.
    pub fn as_linear(&self) -> Option<(BTreeMap<Var, Rat>, Rat)> {
        let mut lin = BTreeMap::new();
        let mut c = Rat::zero();
        for (m, q) in &self.0 {
            match m.degree() {
                0 => c = q.clone(),
                1 => {
                    lin.insert(m.0[0].0.clone(), q.clone());
                }
                _ => return None,
            }
        }
        Some((lin, c))
    }

    /// The canonical term: monomials in descending order, left-associated.
    pub fn to_term(&self) -> Term {
        let mut acc: Option<Term> = None;
        for (m, q) in self.0.iter().rev() {
            let mono = monomial_term(m, q);
            acc = Some(match acc {
                None => mono,
                Some(a) => Term::add(a, mono),
            });
        }
        acc.unwrap_or_else(Term::zero)
    }

    pub fn eval(&self, env: &impl Fn(&Var) -> Option<Rat>) -> Result<Rat, TermError> {
        let mut total = Rat::zero();
        for (m, q) in &self.0 {
            let mut v = q.clone();
            for (x, e) in &m.0 {
                let val = env(x).ok_or_else(|| TermError::Unbound(x.to_string()))?;
                for _ in 0..*e {
                    v *= &val;
                }
            }
            total += v;
        }
        Ok(total)
    }

    /// Formal partial derivative by `v`.
    pub fn partial(&self, v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, q) in &self.0 {
            let e = m.exponent(v);
            if e > 0 {
                out.add_term(m.without_one(v), q * rat(e as i64));
            }
        }
        out
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.0.keys().flat_map(|m| m.0.iter().map(|(v, _)| v.clone())).collect()
    }
}

fn monomial_term(m: &Monomial, q: &Rat) -> Term {
    let mut acc: Option<Term> = if q.is_one() && m.degree() > 0 { None } else { Some(Term::Lit(q.clone())) };
    for (v, e) in &m.0 {
        for _ in 0..*e {
            let t = v.to_term();
            acc = Some(match acc {
                None => t,
                Some(a) => Term::mul(a, t),
            });
        }
    }
    acc.unwrap_or_else(|| Term::Lit(q.clone()))
}

/// Canonical polynomial form of a Differential-free term.
pub fn poly_normalize(t: &Term) -> Result<Term, TermError> {
    Ok(Poly::from_term(t)?.to_term())
}

/// Total differential `(f)'` by the sum and product rules, then normalized.
pub fn differentiate(t: &Term) -> Result<Term, TermError> {
    Ok(raw_differential(t)?.simplified())
}

fn raw_differential(t: &Term) -> Result<Term, TermError> {
    Ok(match t {
        Term::Lit(_) => Term::zero(),
        Term::Var(x) => Term::primed(x),
        Term::Primed(_) => {
            return Err(TermError::UnsupportedTerm(
                crate::surface::print_term(t),
                "differential symbols have no differential",
            ))
        }
        Term::Sum(a, b) => Term::add(raw_differential(a)?, raw_differential(b)?),
        Term::Product(a, b) => {
            Term::add(Term::mul(raw_differential(a)?, (**b).clone()), Term::mul((**a).clone(), raw_differential(b)?))
        }
        Term::Differential(_) => {
            return Err(TermError::UnsupportedTerm(crate::surface::print_term(t), "nested differential"))
        }
    })
}

impl Term {
    /// Normal form of a Differential-free term; never fails on such input.
    fn simplified(&self) -> Term {
        Poly::from_term(self).map(|p| p.to_term()).unwrap_or_else(|_| self.clone())
    }
}

/// Replace each `(f)'` node by the differential of `f`.
pub fn expand_differentials(t: &Term) -> Result<Term, TermError> {
    Ok(match t {
        Term::Differential(a) => differentiate(&expand_differentials(a)?)?,
        Term::Sum(a, b) => Term::add(expand_differentials(a)?, expand_differentials(b)?),
        Term::Product(a, b) => Term::mul(expand_differentials(a)?, expand_differentials(b)?),
        _ => t.clone(),
    })
}

/// Polynomial equality of two terms, expanding differentials.
pub fn poly_eq(a: &Term, b: &Term) -> Result<bool, TermError> {
    let pa = Poly::from_term(&expand_differentials(a)?)?;
    let pb = Poly::from_term(&expand_differentials(b)?)?;
    Ok(pa == pb)
}

pub fn is_positive(q: &Rat) -> bool {
    q.is_positive()
}
