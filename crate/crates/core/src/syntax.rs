//! Simple resource terms and bags (simple poly-terms).
//!
//! Terms are stored locally nameless: a bound variable is an index counting
//! the abstractions between the occurrence and its binder, a free variable is
//! a name. Two alpha-equivalent terms therefore have the same representation,
//! which is what lets [`Term`] and [`Bag`] serve as keys of linear
//! combinations.
//!
//! Terms are totally ordered. Variables come before abstractions, which come
//! before applications; nodes with the same constructor are compared
//! structurally (bound variables before free ones, then index or name, then
//! children left to right, bags as sorted `(element, multiplicity)` lists).

use std::cmp::Ordering;
use std::collections::{btree_map, BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Returns true when `s` belongs to the identifier class
/// `[a-zA-Z_][a-zA-Z0-9_']*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Var {
    Bound(usize),
    Free(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Kind {
    Var(Var),
    Abs(Term),
    App(Term, Bag),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    size: usize,
    // 1 + the largest dangling bound index, 0 when locally closed.
    loose: usize,
}

/// A simple resource term: a variable, an abstraction `\x.s` or an
/// application `<s>[t1,...,tn]` of a term to a bag.
///
/// Cloning is cheap (reference counted). Values are immutable.
#[derive(Clone)]
pub struct Term(Arc<Node>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.kind == other.0.kind
    }
}

impl Eq for Term {}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.kind.cmp(&other.0.kind)
    }
}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.kind.hash(state)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({self})")
    }
}

/// Named view of a term, see [`Term::view`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermView<'a> {
    Variable(&'a str),
    /// The body has been opened with `binder`, a name free in neither the
    /// term nor its surroundings.
    Abstraction { binder: String, body: Term },
    Application { head: &'a Term, bag: &'a Bag },
}

impl Term {
    fn from_kind(kind: Kind) -> Term {
        let (size, loose) = match &kind {
            Kind::Var(Var::Bound(i)) => (1, i + 1),
            Kind::Var(Var::Free(_)) => (1, 0),
            Kind::Abs(body) => (1 + body.size(), body.0.loose.saturating_sub(1)),
            Kind::App(head, bag) => {
                let loose = bag.iter().map(|(t, _)| t.0.loose).fold(head.0.loose, usize::max);
                (1 + head.size() + bag.size(), loose)
            }
        };
        Term(Arc::new(Node { kind, size, loose }))
    }

    /// A free variable.
    ///
    /// # Panics
    ///
    /// If `name` is not an identifier.
    pub fn var(name: &str) -> Term {
        assert!(is_identifier(name), "invalid identifier {name:?}");
        Term::free_raw(name)
    }

    /// `\binder.body`; free occurrences of `binder` in `body` become bound.
    pub fn abs(binder: &str, body: Term) -> Term {
        Term::abs_raw(body.close(binder))
    }

    /// `<head>bag`.
    pub fn app(head: Term, bag: Bag) -> Term {
        Term::from_kind(Kind::App(head, bag))
    }

    /// Parses the concrete syntax, see [`crate::parse::parse_term`].
    pub fn parse(src: &str) -> Result<Term, crate::ParseError> {
        crate::parse::parse_term(src)
    }

    pub(crate) fn free_raw(name: &str) -> Term {
        Term::from_kind(Kind::Var(Var::Free(name.to_string())))
    }

    pub(crate) fn bound(index: usize) -> Term {
        Term::from_kind(Kind::Var(Var::Bound(index)))
    }

    pub(crate) fn abs_raw(body: Term) -> Term {
        Term::from_kind(Kind::Abs(body))
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Size: 1 for a variable, 1 + body for an abstraction, 1 + head + bag
    /// for an application.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn is_variable(&self) -> bool {
        matches!(self.kind(), Kind::Var(_))
    }

    pub fn is_abstraction(&self) -> bool {
        matches!(self.kind(), Kind::Abs(_))
    }

    pub fn is_application(&self) -> bool {
        matches!(self.kind(), Kind::App(..))
    }

    /// Inspects the term through names. Abstraction bodies are opened with a
    /// generated binder `x0`, `x1`, ... that is not free in the term.
    pub fn view(&self) -> TermView<'_> {
        match self.kind() {
            Kind::Var(Var::Free(name)) => TermView::Variable(name),
            Kind::Var(Var::Bound(_)) => unreachable!("dangling bound variable in a public term"),
            Kind::Abs(body) => {
                let binder = fresh_name(&self.free_variables(), 0);
                TermView::Abstraction { body: body.open(&binder), binder }
            }
            Kind::App(head, bag) => TermView::Application { head, bag },
        }
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    pub(crate) fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self.kind() {
            Kind::Var(Var::Free(name)) => {
                if !out.contains(name) {
                    out.insert(name.clone());
                }
            }
            Kind::Var(Var::Bound(_)) => {}
            Kind::Abs(body) => body.collect_free(out),
            Kind::App(head, bag) => {
                head.collect_free(out);
                bag.collect_free(out);
            }
        }
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self.kind() {
            Kind::Var(Var::Free(name)) => name == x,
            Kind::Var(Var::Bound(_)) => false,
            Kind::Abs(body) => body.has_free(x),
            Kind::App(head, bag) => head.has_free(x) || bag.has_free(x),
        }
    }

    /// Number of free occurrences of `x`, counting bag elements with their
    /// multiplicity.
    pub fn occurrence_count(&self, x: &str) -> usize {
        match self.kind() {
            Kind::Var(Var::Free(name)) => usize::from(name == x),
            Kind::Var(Var::Bound(_)) => 0,
            Kind::Abs(body) => body.occurrence_count(x),
            Kind::App(head, bag) => head.occurrence_count(x) + bag.occurrence_count(x),
        }
    }

    /// Replaces the bound variable of an abstraction body by the free
    /// variable `name`. `self` is the body, one binder deep.
    pub(crate) fn open(&self, name: &str) -> Term {
        self.open_with(&Term::free_raw(name), 0)
    }

    /// Substitutes the locally closed term `with` for the dangling index
    /// `depth`.
    pub(crate) fn open_with(&self, with: &Term, depth: usize) -> Term {
        if self.0.loose <= depth {
            return self.clone();
        }
        match self.kind() {
            Kind::Var(Var::Bound(i)) if *i == depth => with.clone(),
            Kind::Var(_) => self.clone(),
            Kind::Abs(body) => Term::abs_raw(body.open_with(with, depth + 1)),
            Kind::App(head, bag) => {
                Term::app(head.open_with(with, depth), bag.map(|t| t.open_with(with, depth)))
            }
        }
    }

    /// Inverse of [`Term::open`]: abstracts the free variable `name`,
    /// producing an abstraction body.
    pub(crate) fn close(&self, name: &str) -> Term {
        self.close_at(name, 0)
    }

    fn close_at(&self, name: &str, depth: usize) -> Term {
        match self.kind() {
            Kind::Var(Var::Free(n)) if n == name => Term::bound(depth),
            Kind::Var(_) => self.clone(),
            Kind::Abs(body) => Term::abs_raw(body.close_at(name, depth + 1)),
            Kind::App(head, bag) => {
                Term::app(head.close_at(name, depth), bag.map(|t| t.close_at(name, depth)))
            }
        }
    }
}

/// A name of the form `prefix`N, the first not contained in `avoid`, skipping
/// the first `skip` candidates.
pub(crate) fn fresh_name(avoid: &BTreeSet<String>, skip: usize) -> String {
    (0..)
        .map(|i| format!("x{i}"))
        .filter(|n| !avoid.contains(n))
        .nth(skip)
        .expect("infinitely many candidates")
}

/// An internal name that no identifier can clash with, fresh for `terms`.
pub(crate) fn internal_fresh<'a>(terms: impl IntoIterator<Item = &'a Term>) -> String {
    let mut used = BTreeSet::new();
    for t in terms {
        t.collect_free(&mut used);
    }
    let next = used
        .iter()
        .filter_map(|n| n.strip_prefix('#').and_then(|k| k.parse::<usize>().ok()))
        .map(|k| k + 1)
        .max()
        .unwrap_or(0);
    format!("#{next}")
}

/// A finite multiset of simple terms. The empty bag is the poly-term `1`.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bag {
    elems: BTreeMap<Term, usize>,
}

impl fmt::Debug for Bag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bag({self})")
    }
}

impl Bag {
    /// The empty bag.
    pub fn one() -> Bag {
        Bag::default()
    }

    pub fn singleton(t: Term) -> Bag {
        let mut b = Bag::one();
        b.insert(t, 1);
        b
    }

    pub fn parse(src: &str) -> Result<Bag, crate::ParseError> {
        crate::parse::parse_bag(src)
    }

    /// Adds `mult` copies of `t`.
    pub fn insert(&mut self, t: Term, mult: usize) {
        if mult > 0 {
            *self.elems.entry(t).or_insert(0) += mult;
        }
    }

    /// Removes one copy of `t`; returns false when `t` is absent.
    pub fn remove_one(&mut self, t: &Term) -> bool {
        match self.elems.get_mut(t) {
            None => false,
            Some(m) if *m == 1 => {
                self.elems.remove(t);
                true
            }
            Some(m) => {
                *m -= 1;
                true
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Number of elements counted with multiplicity.
    pub fn cardinality(&self) -> usize {
        self.elems.values().sum()
    }

    pub fn multiplicity(&self, t: &Term) -> usize {
        self.elems.get(t).copied().unwrap_or(0)
    }

    /// Distinct elements with their multiplicities, in term order.
    pub fn iter(&self) -> btree_map::Iter<'_, Term, usize> {
        self.elems.iter()
    }

    /// Elements repeated according to multiplicity, in term order.
    pub fn elements(&self) -> impl Iterator<Item = &Term> + '_ {
        self.elems.iter().flat_map(|(t, &m)| std::iter::repeat_n(t, m))
    }

    pub fn distinct_len(&self) -> usize {
        self.elems.len()
    }

    /// Sum of element sizes, with multiplicity.
    pub fn size(&self) -> usize {
        self.elems.iter().map(|(t, m)| t.size() * m).sum()
    }

    /// Multiset union (the product of poly-terms).
    pub fn union(&self, other: &Bag) -> Bag {
        let mut out = self.clone();
        for (t, &m) in other.iter() {
            out.insert(t.clone(), m);
        }
        out
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    pub(crate) fn collect_free(&self, out: &mut BTreeSet<String>) {
        for t in self.elems.keys() {
            t.collect_free(out);
        }
    }

    pub fn has_free(&self, x: &str) -> bool {
        self.elems.keys().any(|t| t.has_free(x))
    }

    pub fn occurrence_count(&self, x: &str) -> usize {
        self.elems.iter().map(|(t, m)| t.occurrence_count(x) * m).sum()
    }

    pub(crate) fn map(&self, mut f: impl FnMut(&Term) -> Term) -> Bag {
        let mut out = Bag::one();
        for (t, &m) in self.iter() {
            out.insert(f(t), m);
        }
        out
    }
}

impl FromIterator<Term> for Bag {
    fn from_iter<I: IntoIterator<Item = Term>>(iter: I) -> Self {
        let mut b = Bag::one();
        for t in iter {
            b.insert(t, 1);
        }
        b
    }
}

// Printing. Binders receive the names x0, x1, ... by depth, skipping names
// that occur free in the printed object.

struct Printer<'a> {
    avoid: &'a BTreeSet<String>,
    names: Vec<String>,
}

impl Printer<'_> {
    fn binder_name(&mut self, depth: usize) -> String {
        while self.names.len() <= depth {
            let n = fresh_name(self.avoid, self.names.len());
            self.names.push(n);
        }
        self.names[depth].clone()
    }

    fn term(&mut self, t: &Term, depth: usize, out: &mut String) {
        match t.kind() {
            Kind::Var(Var::Free(n)) => out.push_str(n),
            Kind::Var(Var::Bound(i)) => {
                if *i < depth {
                    let name = self.binder_name(depth - 1 - i);
                    out.push_str(&name);
                } else {
                    // only reachable for internal, not locally closed terms
                    out.push_str(&format!("#b{}", i - depth));
                }
            }
            Kind::Abs(body) => {
                let name = self.binder_name(depth);
                out.push('\\');
                out.push_str(&name);
                out.push('.');
                self.term(body, depth + 1, out);
            }
            Kind::App(head, bag) => {
                out.push('<');
                self.term(head, depth, out);
                out.push('>');
                self.bag(bag, depth, out);
            }
        }
    }

    fn bag(&mut self, bag: &Bag, depth: usize, out: &mut String) {
        out.push('[');
        for (i, (t, &m)) in bag.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.term(t, depth, out);
            if m > 1 {
                out.push('^');
                out.push_str(&m.to_string());
            }
        }
        out.push(']');
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let avoid = self.free_variables();
        let mut p = Printer { avoid: &avoid, names: Vec::new() };
        let mut out = String::new();
        p.term(self, 0, &mut out);
        f.write_str(&out)
    }
}

impl fmt::Display for Bag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let avoid = self.free_variables();
        let mut p = Printer { avoid: &avoid, names: Vec::new() };
        let mut out = String::new();
        p.bag(self, 0, &mut out);
        f.write_str(&out)
    }
}

/// Exhaustive enumeration of all terms up to a size bound whose free
/// variables are drawn from a fixed pool.
pub struct TermEnumerator {
    free: Vec<String>,
    terms: HashMap<(usize, usize), Vec<Term>>,
    bags: HashMap<(usize, usize), Vec<Bag>>,
}

impl TermEnumerator {
    pub fn new<S: AsRef<str>>(free: impl IntoIterator<Item = S>) -> Self {
        let mut free: Vec<String> = free.into_iter().map(|s| s.as_ref().to_string()).collect();
        free.sort();
        free.dedup();
        TermEnumerator { free, terms: HashMap::new(), bags: HashMap::new() }
    }

    /// All terms of size at most `max_size`, sorted.
    pub fn up_to(&mut self, max_size: usize) -> Vec<Term> {
        let mut out: Vec<Term> = (1..=max_size).flat_map(|n| self.exact(n, 0)).collect();
        out.sort();
        out
    }

    /// Terms of size exactly `n` under `depth` binders.
    fn exact(&mut self, n: usize, depth: usize) -> Vec<Term> {
        if let Some(v) = self.terms.get(&(n, depth)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend(self.free.iter().map(|x| Term::free_raw(x)));
            out.extend((0..depth).map(Term::bound));
        } else if n >= 2 {
            out.extend(self.exact(n - 1, depth + 1).into_iter().map(Term::abs_raw));
            for head_size in 1..n {
                let heads = self.exact(head_size, depth);
                let bags = self.bags_exact(n - 1 - head_size, depth);
                for h in &heads {
                    for b in &bags {
                        out.push(Term::app(h.clone(), b.clone()));
                    }
                }
            }
        }
        self.terms.insert((n, depth), out.clone());
        out
    }

    /// Bags of total size exactly `n` under `depth` binders.
    fn bags_exact(&mut self, n: usize, depth: usize) -> Vec<Bag> {
        if let Some(v) = self.bags.get(&(n, depth)) {
            return v.clone();
        }
        let mut pool: Vec<Term> = (1..=n).flat_map(|k| self.exact(k, depth)).collect();
        pool.sort();
        let mut out = Vec::new();
        let mut current = Bag::one();
        multisets_of_size(&pool, 0, n, &mut current, &mut out);
        self.bags.insert((n, depth), out.clone());
        out
    }
}

/// Appends to `out` every bag over `pool[from..]` of total size exactly
/// `remaining`, extending `current`.
fn multisets_of_size(pool: &[Term], from: usize, remaining: usize, current: &mut Bag, out: &mut Vec<Bag>) {
    if remaining == 0 {
        out.push(current.clone());
        return;
    }
    for i in from..pool.len() {
        let t = &pool[i];
        if t.size() > remaining {
            continue;
        }
        current.insert(t.clone(), 1);
        multisets_of_size(pool, i, remaining - t.size(), current, out);
        current.remove_one(t);
    }
}

/// Every bag over `pool` whose total size is at most `max_size` and whose
/// cardinality is at most `max_card`, including the empty bag.
pub fn bags_within(pool: &[Term], max_size: usize, max_card: usize) -> Vec<Bag> {
    let mut sorted: Vec<Term> = pool.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut out = Vec::new();
    let mut current = Bag::one();
    bags_within_rec(&sorted, 0, max_size, max_card, &mut current, &mut out);
    out
}

fn bags_within_rec(pool: &[Term], from: usize, budget: usize, card: usize, current: &mut Bag, out: &mut Vec<Bag>) {
    out.push(current.clone());
    if card == 0 {
        return;
    }
    for i in from..pool.len() {
        let t = &pool[i];
        if t.size() > budget {
            continue;
        }
        current.insert(t.clone(), 1);
        bags_within_rec(pool, i, budget - t.size(), card - 1, current, out);
        current.remove_one(t);
    }
}

/// Every bag over `pool` with exactly `card` elements and total size at most
/// `max_size`.
pub fn bags_of_cardinality(pool: &[Term], card: usize, max_size: usize) -> Vec<Bag> {
    let mut sorted: Vec<Term> = pool.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut out = Vec::new();
    let mut current = Bag::one();
    bags_card_rec(&sorted, 0, card, max_size, &mut current, &mut out);
    out
}

fn bags_card_rec(pool: &[Term], from: usize, card: usize, budget: usize, current: &mut Bag, out: &mut Vec<Bag>) {
    if card == 0 {
        out.push(current.clone());
        return;
    }
    for i in from..pool.len() {
        let t = &pool[i];
        if t.size() > budget {
            continue;
        }
        current.insert(t.clone(), 1);
        bags_card_rec(pool, i, card - 1, budget - t.size(), current, out);
        current.remove_one(t);
    }
}
