//! Symbolic checks that a polynomial solution solves an explicit ODE.

use crate::term::{poly_eq, Poly, Term, TermError, Var};

/// Simultaneous replacement of variable atoms.
pub fn substitute_all(t: &Term, map: &[(Var, Term)]) -> Term {
    match t {
        Term::Lit(_) => t.clone(),
        Term::Var(x) => lookup(map, &Var::plain(x)).unwrap_or_else(|| t.clone()),
        Term::Primed(x) => lookup(map, &Var::prime(x)).unwrap_or_else(|| t.clone()),
        Term::Sum(a, b) => Term::Sum(Box::new(substitute_all(a, map)), Box::new(substitute_all(b, map))),
        Term::Product(a, b) => Term::Product(Box::new(substitute_all(a, map)), Box::new(substitute_all(b, map))),
        Term::Differential(a) => Term::Differential(Box::new(substitute_all(a, map))),
    }
}

fn lookup(map: &[(Var, Term)], v: &Var) -> Option<Term> {
    map.iter().find(|(w, _)| w == v).map(|(_, f)| f.clone())
}

/// For each equation `x' = f`: the residual `d/dt sln_x - f(sln)` and the
/// initial residual `sln_x[t := 0] - x`. Both are zero polynomials exactly
/// when the solution is valid.
pub fn residuals(sln: &[(String, Term)], ode: &[(String, Term)], time: &str) -> Result<Vec<(Term, Term)>, TermError> {
    let t = Var::plain(time);
    let map: Vec<(Var, Term)> = sln.iter().map(|(x, s)| (Var::plain(x), s.clone())).collect();
    let mut out = Vec::new();
    for (x, f) in ode {
        let s = sln.iter().find(|(y, _)| y == x).map(|(_, s)| s.clone()).unwrap_or_else(|| Term::var(x));
        let ds = Poly::from_term(&s)?.partial(&t);
        let rhs = Poly::from_term(&substitute_all(f, &map))?;
        let flow = ds.sub(&rhs).to_term();
        let at0 = Poly::from_term(&s.replace(&t, &Term::zero()))?.sub(&Poly::var(Var::plain(x))).to_term();
        out.push((flow, at0));
    }
    Ok(out)
}

/// Whether `sln` solves each equation of `ode` with time variable `time`.
pub fn check_solution(sln: &[(String, Term)], ode: &[(String, Term)], time: &str) -> Result<Vec<bool>, TermError> {
    residuals(sln, ode, time)?
        .into_iter()
        .map(|(flow, at0)| Ok(poly_eq(&flow, &Term::zero())? && poly_eq(&at0, &Term::zero())?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_solves_itself() {
        let ode = vec![("t".to_string(), Term::lit(1))];
        let sln = vec![("t".to_string(), Term::add(Term::var("t"), Term::var("s")))];
        assert_eq!(check_solution(&sln, &ode, "s").unwrap(), vec![true]);
    }

    #[test]
    fn wrong_solution_is_rejected() {
        let ode = vec![("x".to_string(), Term::var("v"))];
        let bad = vec![("x".to_string(), Term::add(Term::var("x"), Term::mul(Term::var("s"), Term::var("s"))))];
        assert_eq!(check_solution(&bad, &ode, "s").unwrap(), vec![false]);
    }
}
