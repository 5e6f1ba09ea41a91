//! Taylor expansion of algebraic lambda-terms.
//!
//! The expansion of `M` is an infinite rational combination of simple
//! terms. It is never materialized: coefficients are queried one term at a
//! time and supports are enumerated up to a size bound through the
//! structural superset `shape(M)`.

mod alg;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::algebra::{factorial, Natural, Rational};
use crate::error::Error;
use crate::rewrite::{is_normal, Reducer};
use crate::syntax::{bags_within, Bag, Kind, Term, TermEnumerator, Var};

pub use alg::{AlgComb, AlgTerm};

/// Erased, nameless form of an algebraic term. Bound variables are indices,
/// so that alpha-equivalent summands of an argument merge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Pure {
    Free(String),
    Bound(usize),
    Abs(Box<Pure>),
    App(Box<Pure>, Vec<(Pure, Rational)>),
}

fn compile(m: &AlgTerm, scope: &mut Vec<String>) -> Pure {
    match m {
        AlgTerm::Var(x) => match scope.iter().rposition(|b| b == x) {
            Some(p) => Pure::Bound(scope.len() - 1 - p),
            None => Pure::Free(x.clone()),
        },
        AlgTerm::Abs { binder, body, .. } => {
            scope.push(binder.clone());
            let b = compile(body, scope);
            scope.pop();
            Pure::Abs(Box::new(b))
        }
        AlgTerm::App { fun, arg } => Pure::App(Box::new(compile(fun, scope)), compile_comb(arg, scope)),
        AlgTerm::TyAbs { body, .. } | AlgTerm::TyApp { body, .. } => compile(body, scope),
    }
}

fn compile_comb(q: &AlgComb, scope: &mut Vec<String>) -> Vec<(Pure, Rational)> {
    let mut merged: BTreeMap<Pure, Rational> = BTreeMap::new();
    for (n, c) in q.iter() {
        *merged.entry(compile(n, scope)).or_insert_with(Rational::zero) += c;
    }
    merged.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

fn coeff(p: &Pure, s: &Term) -> Rational {
    match (p, s.kind()) {
        (Pure::Free(x), Kind::Var(Var::Free(y))) if x == y => Rational::one(),
        (Pure::Bound(i), Kind::Var(Var::Bound(j))) if i == j => Rational::one(),
        (Pure::Abs(pb), Kind::Abs(sb)) => coeff(pb, sb),
        (Pure::App(m, q), Kind::App(t, bag)) => {
            let head = coeff(m, t);
            if head.is_zero() {
                return head;
            }
            let mut acc = head;
            for (u, &k) in bag.iter() {
                let qu = coeff_comb(q, u);
                if qu.is_zero() {
                    return qu;
                }
                acc *= num_traits::pow(qu, k);
                acc /= Rational::from_integer(factorial(k).into());
            }
            acc
        }
        _ => Rational::zero(),
    }
}

fn coeff_comb(q: &[(Pure, Rational)], s: &Term) -> Rational {
    q.iter().map(|(n, c)| c * coeff(n, s)).sum()
}

fn shape_of(p: &Pure, n: usize, out: &mut BTreeSet<Term>) {
    if n == 0 {
        return;
    }
    match p {
        Pure::Free(x) => {
            out.insert(Term::free_raw(x));
        }
        Pure::Bound(i) => {
            out.insert(Term::bound(*i));
        }
        Pure::Abs(b) => {
            let mut bodies = BTreeSet::new();
            shape_of(b, n - 1, &mut bodies);
            out.extend(bodies.into_iter().map(Term::abs_raw));
        }
        Pure::App(m, q) => {
            let mut heads = BTreeSet::new();
            shape_of(m, n - 1, &mut heads);
            if heads.is_empty() {
                return;
            }
            let mut pool = BTreeSet::new();
            if n >= 3 {
                for (arg, _) in q {
                    shape_of(arg, n - 2, &mut pool);
                }
            }
            let pool: Vec<Term> = pool.into_iter().collect();
            let min_head = heads.iter().map(Term::size).min().expect("nonempty");
            let bags = bags_within(&pool, n - 1 - min_head, usize::MAX);
            for h in &heads {
                for b in &bags {
                    if 1 + h.size() + b.size() <= n {
                        out.insert(Term::app(h.clone(), b.clone()));
                    }
                }
            }
        }
    }
}

fn pure_free(p: &Pure, out: &mut BTreeSet<String>) {
    match p {
        Pure::Free(x) => {
            out.insert(x.clone());
        }
        Pure::Bound(_) => {}
        Pure::Abs(b) => pure_free(b, out),
        Pure::App(m, q) => {
            pure_free(m, out);
            for (n, _) in q {
                pure_free(n, out);
            }
        }
    }
}

/// The Taylor expansion of a finite combination of algebraic terms, ready
/// for coefficient queries.
#[derive(Clone, Debug)]
pub struct Expansion {
    summands: Vec<(Pure, Rational)>,
}

impl Expansion {
    pub fn of(m: &AlgTerm) -> Expansion {
        Expansion { summands: vec![(compile(m, &mut Vec::new()), Rational::one())] }
    }

    /// `Tay Q = Σ Q_M Tay M`.
    pub fn of_comb(q: &AlgComb) -> Expansion {
        Expansion { summands: compile_comb(q, &mut Vec::new()) }
    }

    /// The coefficient of `s` in the expansion.
    pub fn coeff(&self, s: &Term) -> Rational {
        coeff_comb(&self.summands, s)
    }

    /// The elements of `shape` of size at most `n`.
    pub fn shape(&self, n: usize) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for (p, _) in &self.summands {
            shape_of(p, n, &mut out);
        }
        out
    }

    /// `(s, coeff)` for every `s` of size at most `n` with a nonzero
    /// coefficient, in term order.
    pub fn truncate(&self, n: usize) -> Vec<(Term, Rational)> {
        self.shape(n)
            .into_iter()
            .filter_map(|s| {
                let c = self.coeff(&s);
                (!c.is_zero()).then_some((s, c))
            })
            .collect()
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (p, _) in &self.summands {
            pure_free(p, &mut out);
        }
        out
    }
}

/// `Tay(M)_s`.
pub fn taylor_coeff(m: &AlgTerm, s: &Term) -> Rational {
    Expansion::of(m).coeff(s)
}

/// `Tay(Q)_s = Σ Q_M Tay(M)_s`.
pub fn taylor_coeff_comb(q: &AlgComb, s: &Term) -> Rational {
    Expansion::of_comb(q).coeff(s)
}

/// `shape(M)` restricted to terms of size at most `n`.
pub fn shape(m: &AlgTerm, n: usize) -> BTreeSet<Term> {
    Expansion::of(m).shape(n)
}

/// Every term of size at most `n` whose free variables are free in the
/// expansion; any other term has a zero coefficient.
fn candidates(e: &Expansion, n: usize) -> Vec<Term> {
    TermEnumerator::new(e.free_variables()).up_to(n)
}

/// Checks that every term of size at most `n` with a nonzero coefficient
/// lies in `shape(M, n)`, by exhaustive enumeration of terms.
pub fn support_in_shape_check(m: &AlgTerm, n: usize) -> bool {
    let e = Expansion::of(m);
    let shape = e.shape(n);
    candidates(&e, n).iter().all(|s| shape.contains(s) || e.coeff(s).is_zero())
}

/// `m(x) = 1`, `m(\x.t) = m(t)`, `m(<t>T) = m(t) Π_u T(u)! m(u)^T(u)`.
pub fn multiplicity(s: &Term) -> Natural {
    match s.kind() {
        Kind::Var(_) => Natural::one(),
        Kind::Abs(body) => multiplicity(body),
        Kind::App(head, bag) => multiplicity(head) * bag_multiplicity(bag),
    }
}

pub fn bag_multiplicity(bag: &Bag) -> Natural {
    bag.iter().fold(Natural::one(), |acc, (u, &k)| acc * factorial(k) * num_traits::pow(multiplicity(u), k))
}

/// For a pure term, checks `Tay(M)_s · m(s) = 1` on `shape(M, n)` and a zero
/// coefficient on every other term of size at most `n`.
pub fn uniformity_check(m: &AlgTerm, n: usize) -> Result<bool, Error> {
    if !m.is_pure() {
        return Err(Error::NotPure(m.to_string()));
    }
    let e = Expansion::of(m);
    let shape = e.shape(n);
    let on_shape = shape
        .iter()
        .all(|s| e.coeff(s) * Rational::from_integer(multiplicity(s).into()) == Rational::one());
    Ok(on_shape && candidates(&e, n).iter().all(|s| shape.contains(s) || e.coeff(s).is_zero()))
}

/// Structural coherence. Variables are coherent when equal, abstractions
/// when their bodies are, applications when both heads and bags are.
pub fn coherent(s: &Term, t: &Term) -> bool {
    match (s.kind(), t.kind()) {
        (Kind::Var(a), Kind::Var(b)) => a == b,
        (Kind::Abs(a), Kind::Abs(b)) => coherent(a, b),
        (Kind::App(h1, b1), Kind::App(h2, b2)) => coherent(h1, h2) && bags_coherent(b1, b2),
        _ => false,
    }
}

/// Two bags are coherent when their union is a clique, every element being
/// also compared with itself.
pub fn bags_coherent(a: &Bag, b: &Bag) -> bool {
    let elems: Vec<&Term> = a.iter().chain(b.iter()).map(|(u, _)| u).collect();
    elems.iter().enumerate().all(|(i, u)| elems[i..].iter().all(|v| coherent(u, v)))
}

/// For coherent distinct `s` and `t`, checks that their normal forms have
/// disjoint supports.
pub fn coherent_disjointness_check(s: &Term, t: &Term, reducer: &Reducer) -> Result<bool, Error> {
    if s == t {
        return Err(Error::Precondition(format!("{s} and {t} are equal")));
    }
    if !coherent(s, t) {
        return Err(Error::Precondition(format!("{s} and {t} are not coherent")));
    }
    let ns = reducer.normalize(s);
    let nt = reducer.normalize(t);
    Ok(ns.keys().all(|u| !nt.contains(u)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    Holds,
    Fails,
    /// The partial sums had not settled at the ceiling.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutationReport {
    pub verdict: Verdict,
    /// First truncation level from which the partial sums are constant up
    /// to the ceiling.
    pub bound: Option<usize>,
    /// Partial sum at the ceiling.
    pub lhs: Rational,
    /// `Tay(M0)_probe`.
    pub rhs: Rational,
    /// Partial sums for truncation levels 1 to the ceiling.
    pub partial_sums: Vec<Rational>,
}

/// Compares the coefficient of `probe` in the normal form of `Tay(M)`,
/// summed over `shape(M, B)` for growing `B`, with `Tay(M0)_probe`.
///
/// The sum is constant once `B` is large enough; the verdict is
/// inconclusive when the last two levels below `ceiling` still differ.
pub fn nf_taylor_commutation_check(
    m: &AlgTerm,
    m0: &AlgTerm,
    probe: &Term,
    ceiling: usize,
    reducer: &Reducer,
) -> Result<CommutationReport, Error> {
    if !is_normal(probe) {
        return Err(Error::ProbeNotNormal(probe.to_string()));
    }
    let e = Expansion::of(m);
    let rhs = taylor_coeff(m0, probe);
    let shape = e.shape(ceiling);
    let mut by_size = vec![Rational::zero(); ceiling + 1];
    for s in &shape {
        if s.size() < probe.size() {
            continue;
        }
        let n = reducer.normalize(s).coeff(probe);
        if !n.is_zero() {
            by_size[s.size()] += e.coeff(s) * Rational::from_integer(n.into());
        }
    }
    let mut partial_sums = Vec::with_capacity(ceiling);
    let mut acc = Rational::zero();
    for c in by_size.iter().skip(1) {
        acc += c;
        partial_sums.push(acc.clone());
    }
    let lhs = partial_sums.last().cloned().unwrap_or_else(Rational::zero);
    let settled = ceiling >= 2 && partial_sums[ceiling - 2] == lhs;
    if !settled {
        return Ok(CommutationReport { verdict: Verdict::Inconclusive, bound: None, lhs, rhs, partial_sums });
    }
    let bound = partial_sums.iter().rposition(|v| v != &lhs).map_or(1, |i| i + 2);
    let verdict = if lhs == rhs { Verdict::Holds } else { Verdict::Fails };
    Ok(CommutationReport { verdict, bound: Some(bound), lhs, rhs, partial_sums })
}
