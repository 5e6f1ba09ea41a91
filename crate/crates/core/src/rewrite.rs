//! One-step reduction, normal forms and the reduction order.
//!
//! The one-step relation relates a simple term to a combination over ℕ:
//! a redex `<\x.t>S` reduces to `∂t[S/x]`, and reduction is closed under
//! abstraction, the head of an application and any one element of a bag.
//! Every result is homogeneous in size and strictly smaller than the source,
//! so reduction terminates; it is also confluent, which makes the normal
//! form of a term well defined.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{bag_product, lift_app, LinComb, Natural, Rational, Semiring, TermComb};
use crate::error::Error;
use crate::subst::diff_subst;
use crate::syntax::{internal_fresh, Bag, Kind, Term};

/// One step from a term to one of its immediate subterms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    /// Body of an abstraction.
    Body,
    /// Head of an application.
    Head,
    /// The i-th distinct element, in term order, of an application's bag.
    /// Identical copies of an element are one position.
    Bag(usize),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Body => f.write_str("body"),
            Position::Head => f.write_str("head"),
            Position::Bag(i) => write!(f, "bag[{i}]"),
        }
    }
}

/// A single application of the one-step relation to `source`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    /// Location of the fired redex, outermost first.
    pub path: Vec<Position>,
    pub source: Term,
    pub result: TermComb<Natural>,
}

impl ReductionStep {
    pub fn path_string(&self) -> String {
        if self.path.is_empty() {
            return "root".to_string();
        }
        self.path.iter().map(Position::to_string).collect::<Vec<_>>().join(".")
    }
}

/// Fires the redex `<\.body>bag`.
fn contract(body: &Term, bag: &Bag) -> TermComb<Natural> {
    let fresh = internal_fresh(std::iter::once(body).chain(bag.iter().map(|(t, _)| t)));
    diff_subst(&body.open(&fresh), bag, &fresh)
}

fn steps_of(s: &Term) -> Vec<(Vec<Position>, TermComb<Natural>)> {
    let mut out = Vec::new();
    match s.kind() {
        Kind::Var(_) => {}
        Kind::Abs(body) => {
            let fresh = internal_fresh([s]);
            for (mut path, r) in steps_of(&body.open(&fresh)) {
                path.insert(0, Position::Body);
                out.push((path, r.map_keys(|t| Term::abs(&fresh, t.clone()))));
            }
        }
        Kind::App(head, bag) => {
            if let Kind::Abs(body) = head.kind() {
                out.push((Vec::new(), contract(body, bag)));
            }
            let bag_unit = LinComb::unit(bag.clone());
            for (mut path, r) in steps_of(head) {
                path.insert(0, Position::Head);
                out.push((path, lift_app(&r, &bag_unit)));
            }
            for (i, (u, _)) in bag.iter().enumerate() {
                let mut rest = bag.clone();
                rest.remove_one(u);
                for (mut path, r) in steps_of(u) {
                    path.insert(0, Position::Bag(i));
                    let result = r.map_keys(|v| {
                        let mut b = rest.clone();
                        b.insert(v.clone(), 1);
                        Term::app(head.clone(), b)
                    });
                    out.push((path, result));
                }
            }
        }
    }
    out
}

/// Every one-step reduction of `s`: the root redex first, then steps inside
/// the head, then inside bag elements in term order.
pub fn one_step_all(s: &Term) -> Vec<ReductionStep> {
    steps_of(s)
        .into_iter()
        .map(|(path, result)| ReductionStep { path, source: s.clone(), result })
        .collect()
}

/// The first step in [`one_step_all`] order.
pub fn leftmost(s: &Term) -> Option<ReductionStep> {
    one_step_all(s).into_iter().next()
}

/// True when no one-step reduction applies.
pub fn is_normal(s: &Term) -> bool {
    match s.kind() {
        Kind::Var(_) => true,
        Kind::Abs(body) => is_normal(body),
        Kind::App(head, bag) => !head.is_abstraction() && is_normal(head) && bag.iter().all(|(u, _)| is_normal(u)),
    }
}

/// Memo tables for normal forms and downsets. The tables only cache
/// results of pure functions, so sharing a reducer is unobservable.
#[derive(Default)]
pub struct Reducer {
    nf: Mutex<HashMap<Term, TermComb<Natural>>>,
    down: Mutex<HashMap<Term, Arc<BTreeSet<Term>>>>,
}

impl Reducer {
    pub fn new() -> Reducer {
        Reducer::default()
    }

    /// A process-wide reducer backing the free functions of this module.
    pub fn global() -> &'static Reducer {
        static GLOBAL: OnceLock<Reducer> = OnceLock::new();
        GLOBAL.get_or_init(Reducer::new)
    }

    /// The normal form of `s`.
    pub fn normalize(&self, s: &Term) -> TermComb<Natural> {
        if let Some(r) = self.nf.lock().expect("poisoned").get(s) {
            return r.clone();
        }
        let r = self.compute_nf(s);
        self.nf.lock().expect("poisoned").insert(s.clone(), r.clone());
        r
    }

    fn compute_nf(&self, s: &Term) -> TermComb<Natural> {
        match s.kind() {
            Kind::Var(_) => LinComb::unit(s.clone()),
            Kind::Abs(body) => {
                let fresh = internal_fresh([s]);
                self.normalize(&body.open(&fresh)).map_keys(|t| Term::abs(&fresh, t.clone()))
            }
            Kind::App(head, bag) => {
                let parts: Vec<TermComb<Natural>> = bag.elements().map(|u| self.normalize(u)).collect();
                let bags = bag_product(&parts);
                let mut out = LinComb::zero();
                for (u, cu) in self.normalize(head).iter() {
                    match u.kind() {
                        Kind::Abs(body) => {
                            for (b, cb) in bags.iter() {
                                let scale = cu.times(cb);
                                for (v, cv) in contract(body, b).iter() {
                                    out.add_scaled(&scale.times(cv), &self.normalize(v));
                                }
                            }
                        }
                        _ => {
                            for (b, cb) in bags.iter() {
                                out.add_term(cu.times(cb), Term::app(u.clone(), b.clone()));
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// `Σ a_s NF(s)`.
    pub fn normalize_comb(&self, a: &TermComb<Rational>) -> TermComb<Rational> {
        a.flat_map(|s| self.normalize(s).convert())
    }

    /// The finite set of terms below `s` in the reduction order.
    pub fn downset(&self, s: &Term) -> Downset {
        Downset { terms: self.downset_arc(s) }
    }

    fn downset_arc(&self, s: &Term) -> Arc<BTreeSet<Term>> {
        if let Some(d) = self.down.lock().expect("poisoned").get(s) {
            return d.clone();
        }
        let mut set = BTreeSet::new();
        set.insert(s.clone());
        let mut reducts = BTreeSet::new();
        for (_, r) in steps_of(s) {
            reducts.extend(r.keys().cloned());
        }
        for v in &reducts {
            if !set.contains(v) {
                set.extend(self.downset_arc(v).iter().cloned());
            }
        }
        let d = Arc::new(set);
        self.down.lock().expect("poisoned").insert(s.clone(), d.clone());
        d
    }

    /// `t ∈ ↑s`, i.e. `s ≤ t`.
    pub fn upset_member(&self, t: &Term, s: &Term) -> bool {
        t == s || (s.size() < t.size() && self.downset_arc(t).contains(s))
    }
}

pub fn normalize(s: &Term) -> TermComb<Natural> {
    Reducer::global().normalize(s)
}

pub fn normalize_comb(a: &TermComb<Rational>) -> TermComb<Rational> {
    Reducer::global().normalize_comb(a)
}

pub fn downset(s: &Term) -> Downset {
    Reducer::global().downset(s)
}

pub fn upset_member(t: &Term, s: &Term) -> bool {
    Reducer::global().upset_member(t, s)
}

/// `↓s`: closed under the reduction order and containing `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Downset {
    terms: Arc<BTreeSet<Term>>,
}

impl Downset {
    pub fn contains(&self, t: &Term) -> bool {
        self.terms.contains(t)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Term> + '_ {
        self.terms.iter()
    }
}

/// What to do with one support term in [`reduce_comb_step`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Choice {
    Identity,
    Step(ReductionStep),
}

/// One step of the free lifting of reduction to rational combinations:
/// each support term is either kept or replaced by the result of a chosen
/// step. Terms without a choice are kept.
pub fn reduce_comb_step(a: &TermComb<Rational>, choices: &BTreeMap<Term, Choice>) -> Result<TermComb<Rational>, Error> {
    for (t, choice) in choices {
        if !a.contains(t) {
            return Err(Error::InvalidChoice(format!("{t} is not in the support")));
        }
        if let Choice::Step(step) = choice {
            if &step.source != t || !steps_of(t).iter().any(|(p, r)| p == &step.path && r == &step.result) {
                return Err(Error::InvalidChoice(t.to_string()));
            }
        }
    }
    let mut out = LinComb::zero();
    for (s, c) in a.iter() {
        match choices.get(s) {
            Some(Choice::Step(step)) => out.add_scaled(c, &step.result.convert()),
            _ => out.add_term(c.clone(), s.clone()),
        }
    }
    Ok(out)
}

/// Runs `trials` random maximal reduction sequences from `s` over ℕ and
/// checks that each ends at the normal form. At every step a random
/// non-normal support term is rewritten by a random one-step reduction.
pub fn confluence_check(s: &Term, trials: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = normalize(s);
    (0..trials).all(|_| {
        let mut a: TermComb<Natural> = LinComb::unit(s.clone());
        loop {
            let redexes: Vec<Term> = a.keys().filter(|t| !is_normal(t)).cloned().collect();
            let Some(t) = redexes.choose(&mut rng) else { break };
            let steps = steps_of(t);
            let (_, result) = steps.choose(&mut rng).expect("non-normal term has a step");
            let c = a.coeff(t);
            let mut next = LinComb::zero();
            for (u, cu) in a.iter() {
                if u != t {
                    next.add_term(cu.clone(), u.clone());
                }
            }
            next.add_scaled(&c, result);
            a = next;
        }
        a == nf
    })
}
