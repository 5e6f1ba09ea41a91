//! Oracles shared by the integration tests. Each one is written from the
//! definitions, independently of the library's algorithms.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_traits::{One, Zero};
use proptest::prelude::*;

use rescalc_core::algebra::{bag_mul, lift_abs, lift_app, BagComb, LinComb, TermComb};
use rescalc_core::rewrite::one_step_all;
use rescalc_core::syntax::{bags_within, TermEnumerator};
use rescalc_core::taylor::AlgTerm;
use rescalc_core::{Bag, Natural, Rational, Term, TermView};

pub const NAMES: [&str; 3] = ["x", "y", "z"];

/// Terms over `x, y, z` with binders drawn from the same names, so that
/// shadowing and capture both occur.
pub fn term_strategy(depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop::sample::select(&NAMES[..]).prop_map(Term::var);
    leaf.prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            (prop::sample::select(&NAMES[..]), inner.clone()).prop_map(|(x, b)| Term::abs(x, b)),
            (inner.clone(), prop::collection::vec(inner, 0..3)).prop_map(|(h, args)| Term::app(h, args.into_iter().collect())),
        ]
    })
}

pub fn bag_strategy(depth: u32) -> impl Strategy<Value = Bag> {
    prop::collection::vec(term_strategy(depth), 0..3).prop_map(|v| v.into_iter().collect())
}

/// The elements of a bag, each repeated by its multiplicity.
pub fn elements(bag: &Bag) -> Vec<Term> {
    bag.iter().flat_map(|(t, &m)| std::iter::repeat_n(t.clone(), m)).collect()
}

/// Replaces the free occurrences of `x` in `s` by `fill` in traversal order.
/// Binders are opened with names of the form `x0, x1, ...`, which the
/// replacement terms never mention, so no capture happens.
fn fill(s: &Term, x: &str, fill_with: &mut std::slice::Iter<'_, Term>) -> Term {
    match s.view() {
        TermView::Variable(v) if v == x => fill_with.next().expect("enough replacements").clone(),
        TermView::Variable(v) => Term::var(v),
        TermView::Abstraction { binder, body } => Term::abs(&binder, fill(&body, x, fill_with)),
        TermView::Application { head, bag } => {
            let head = fill(head, x, fill_with);
            let bag: Bag = elements(bag).iter().map(|u| fill(u, x, fill_with)).collect();
            Term::app(head, bag)
        }
    }
}

/// `∂s[T/x]` as the sum over all bijections from the occurrences of `x` to
/// the elements of `T`.
pub fn oracle_diff_subst(s: &Term, bag: &Bag, x: &str) -> TermComb<Natural> {
    let elems = elements(bag);
    let mut out = LinComb::zero();
    if s.occurrence_count(x) != elems.len() {
        return out;
    }
    for perm in (0..elems.len()).permutations(elems.len()) {
        let order: Vec<Term> = perm.iter().map(|&i| elems[i].clone()).collect();
        out.add_term(Natural::one(), fill(s, x, &mut order.iter()));
    }
    out
}

/// Every subterm of `s` whose free variables are free in `s`, i.e. that
/// does not mention a variable bound above it.
pub fn closed_subterms(s: &Term) -> BTreeSet<Term> {
    fn go(t: &Term, fv: &BTreeSet<String>, out: &mut BTreeSet<Term>) {
        if t.free_variables().is_subset(fv) {
            out.insert(t.clone());
        }
        match t.view() {
            TermView::Variable(_) => {}
            TermView::Abstraction { body, .. } => go(&body, fv, out),
            TermView::Application { head, bag } => {
                go(head, fv, out);
                for (u, _) in bag.iter() {
                    go(u, fv, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(s, &s.free_variables(), &mut out);
    out
}

/// Caches term enumerations by pool.
#[derive(Default)]
pub struct Enumerations {
    cache: BTreeMap<(Vec<String>, usize), Vec<Term>>,
}

impl Enumerations {
    pub fn up_to(&mut self, pool: &BTreeSet<String>, size: usize) -> &[Term] {
        let key: Vec<String> = pool.iter().cloned().collect();
        self.cache.entry((key.clone(), size)).or_insert_with(|| TermEnumerator::new(key).up_to(size))
    }
}

/// All `(t, T)` with `s` in the support of `∂t[T/x]`, by exhaustive search:
/// `T` ranges over bags of closed subterms of `s`, and `t` over every term
/// of the size forced by the degree law.
pub fn brute_inverse(s: &Term, x: &str, enums: &mut Enumerations) -> BTreeSet<(Term, Bag)> {
    let pool: Vec<Term> = closed_subterms(s).into_iter().collect();
    let mut names = s.free_variables();
    names.insert(x.to_string());
    let mut out = BTreeSet::new();
    for bag in bags_within(&pool, s.size(), usize::MAX) {
        let card = bag.cardinality();
        let Some(t_size) = (s.size() + card).checked_sub(bag.size()) else { continue };
        let candidates: Vec<Term> = enums.up_to(&names, t_size).iter().filter(|t| t.size() == t_size).cloned().collect();
        for t in candidates {
            if t.occurrence_count(x) == card && oracle_diff_subst(&t, &bag, x).contains(s) {
                out.insert((t, bag.clone()));
            }
        }
    }
    out
}

/// Whether `target` can be written as `Σ b_i` where `src = Σ s_i` and every
/// `s_i` takes exactly one reduction step to `b_i`. Each copy of a support
/// term may take a different step.
pub fn one_step_lift(src: &TermComb<Natural>, target: &TermComb<Natural>) -> bool {
    let terms: Vec<(Term, usize)> = src
        .iter()
        .map(|(t, c)| (t.clone(), c.to_string().parse().expect("small coefficient")))
        .collect();
    fn search(terms: &[(Term, usize)], acc: &TermComb<Natural>, target: &TermComb<Natural>) -> bool {
        // Reduction results only add coefficients, so overshooting any key
        // is fatal.
        if acc.iter().any(|(t, c)| c > &target.coeff(t)) {
            return false;
        }
        let Some(((t, n), rest)) = terms.split_first() else {
            return acc == target;
        };
        let steps = one_step_all(t);
        steps.iter().combinations_with_replacement(*n).any(|choice| {
            let mut next = acc.clone();
            for step in choice {
                next.add_scaled(&Natural::one(), &step.result);
            }
            search(rest, &next, target)
        })
    }
    search(&terms, &LinComb::zero(), target)
}

fn truncate<K: Ord + Clone>(a: &LinComb<Rational, K>, keep: impl Fn(&K) -> bool) -> LinComb<Rational, K> {
    a.iter().filter(|(k, _)| keep(k)).map(|(k, c)| (c.clone(), k.clone())).collect()
}

/// The Taylor expansion restricted to terms of size at most `max`, from the
/// series `Tay(M)Q = Σ_n <Tay M>(Tay Q)^n / n!` with the powers expanded
/// and truncated directly.
pub fn oracle_taylor(m: &AlgTerm, max: usize) -> TermComb<Rational> {
    match m {
        AlgTerm::Var(x) if max >= 1 => TermComb::unit(Term::var(x)),
        AlgTerm::Var(_) => LinComb::zero(),
        AlgTerm::Abs { binder, body, .. } if max >= 1 => lift_abs(binder, &oracle_taylor(body, max - 1)),
        AlgTerm::Abs { .. } => LinComb::zero(),
        AlgTerm::TyAbs { body, .. } | AlgTerm::TyApp { body, .. } => oracle_taylor(body, max),
        AlgTerm::App { fun, arg } => {
            if max < 2 {
                return LinComb::zero();
            }
            let head = oracle_taylor(fun, max - 1);
            let Some(min_head) = head.keys().map(Term::size).min() else { return LinComb::zero() };
            let budget = max - 1 - min_head;
            let mut q: TermComb<Rational> = LinComb::zero();
            for (n, c) in arg.iter() {
                q.add_scaled(c, &oracle_taylor(n, budget));
            }
            let singles: BagComb<Rational> = q.map_keys(|s| Bag::singleton(s.clone()));
            let mut pow = BagComb::unit(Bag::one());
            let mut series = BagComb::zero();
            let mut fact = Rational::one();
            for k in 0.. {
                if k > 0 {
                    pow = truncate(&bag_mul(&pow, &singles), |b: &Bag| b.size() <= budget);
                    fact *= Rational::from_integer(k.into());
                }
                if pow.is_zero() {
                    break;
                }
                series.add_scaled(&(Rational::one() / fact.clone()), &pow);
            }
            truncate(&lift_app(&head, &series), |t: &Term| t.size() <= max)
        }
    }
}

/// Every rational in lowest terms with a positive denominator.
pub fn canonical_rational(r: &Rational) -> bool {
    let reduced = Rational::new(r.numer().clone(), r.denom().clone());
    r.denom() > &Zero::zero() && reduced.numer() == r.numer() && reduced.denom() == r.denom()
}

/// Pure typed terms, closed or typed in [`CORPUS_CONTEXT`].
pub const CORPUS: &[&str] = &[
    "(\\x:p.x)(y)",
    "(\\x:p.x)((\\x:p.x)(y))",
    "(/\\a.\\s:a->a.\\w:a.w){p}(\\x:p.x)",
    "(/\\a.\\s:a->a.\\w:a.s(w)){p}(\\x:p.x)",
    "(/\\a.\\s:a->a.\\w:a.s(s(w))){p}(\\x:p.x)",
    "(/\\a.\\s:a->a.\\w:a.s(s(w))){p}(\\x:p.x)(y)",
    "\\x:p.x",
    "/\\a.\\x:a.x",
    "(/\\a.\\x:a.x){p}(y)",
    "f(y)",
    "f(f(y))",
    "(\\x:p.f(x))(y)",
    "(\\k:p->p.k(k(y)))(f)",
    "g(y)(z)",
    "(\\x:p.g(x)(x))(y)",
    "(\\x:p.\\w:p.g(w)(x))(y)(z)",
    "h(\\x:p.x)",
    "(\\k:p->p.\\x:p.k(x))(\\x:p.f(x))",
    "(/\\a.\\s:a->a.\\w:a.s(w)){p}(f)(y)",
    "(\\u:(p->p)->p.u(f))(\\k:p->p.k(y))",
];

pub const CORPUS_CONTEXT: &str = "\
y : p
z : p
f : p -> p
g : p -> p -> p
h : (p -> p) -> p
";

/// Finite sets substituted for the context variables. They mention only the
/// fresh names `a` and `b`.
pub const CORPUS_SETS: &[(&str, &[&str])] = &[
    ("y", &["a", "<\\w.w>[a]"]),
    ("z", &["a"]),
    ("f", &["\\w.w", "\\w.<b>[w]"]),
    ("g", &["\\u.\\v.<<b>[u]>[v]"]),
    ("h", &["\\k.<k>[a]"]),
];

pub fn corpus() -> Vec<AlgTerm> {
    CORPUS.iter().map(|s| AlgTerm::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))).collect()
}

/// `m(<s>S) = m(s) · Π_u m(u)^S(u) · S(u)!`, other constructors transparent.
pub fn oracle_multiplicity(t: &Term) -> Natural {
    match t.view() {
        TermView::Variable(_) => Natural::one(),
        TermView::Abstraction { body, .. } => oracle_multiplicity(&body),
        TermView::Application { head, bag } => oracle_multiplicity(head) * oracle_bag_multiplicity(bag),
    }
}

pub fn oracle_bag_multiplicity(bag: &Bag) -> Natural {
    bag.iter()
        .map(|(u, &k)| {
            let fact: Natural = (1..=k).map(Natural::from).product();
            oracle_multiplicity(u).pow(k as u32) * fact
        })
        .product()
}

/// `1` for a variable, `1 + body`, `1 + head + Σ elements`.
pub fn oracle_size(t: &Term) -> usize {
    match t.view() {
        TermView::Variable(_) => 1,
        TermView::Abstraction { body, .. } => 1 + oracle_size(&body),
        TermView::Application { head, bag } => 1 + oracle_size(head) + elements(bag).iter().map(oracle_size).sum::<usize>(),
    }
}

/// Free occurrences of `x`, counting bag multiplicities.
pub fn oracle_count(t: &Term, x: &str) -> usize {
    match t.view() {
        TermView::Variable(v) => usize::from(v == x),
        TermView::Abstraction { body, .. } => oracle_count(&body, x),
        TermView::Application { head, bag } => oracle_count(head, x) + elements(bag).iter().map(|u| oracle_count(u, x)).sum::<usize>(),
    }
}

/// Normal form by always firing the first listed step.
pub fn oracle_normalize(t: &Term) -> TermComb<Natural> {
    match one_step_all(t).into_iter().next() {
        None => TermComb::unit(t.clone()),
        Some(step) => step.result.flat_map(oracle_normalize),
    }
}

/// The downset by exhaustive exploration of every step.
pub fn oracle_downset(t: &Term) -> BTreeSet<Term> {
    let mut seen = BTreeSet::from([t.clone()]);
    let mut todo = vec![t.clone()];
    while let Some(u) = todo.pop() {
        for step in one_step_all(&u) {
            for v in step.result.keys() {
                if seen.insert(v.clone()) {
                    todo.push(v.clone());
                }
            }
        }
    }
    seen
}
