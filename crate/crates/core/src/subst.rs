//! Differential substitution and its inverse.
//!
//! `∂s[S/x]` is the sum, over all bijections between the elements of `S`
//! and the free occurrences of `x` in `s`, of the term obtained by putting
//! each element at its occurrence. It is computed compositionally: the
//! elements of `S` are distributed between the head and the bag of an
//! application, each split weighted by the number of ways to pick the
//! labelled copies, `Π_u C(S(u), S1(u))`.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::algebra::{binomial, bag_product, LinComb, Natural, Semiring, TermComb};
use crate::error::Error;
use crate::syntax::{internal_fresh, Bag, Kind, Term, Var};

/// Every sub-multiset `R ⊆ bag` with `|R| = k`, with the number of ways of
/// choosing it among labelled copies and the complement `bag − R`.
pub(crate) fn sub_bags(bag: &Bag, k: usize) -> Vec<(Bag, Natural, Bag)> {
    let distinct: Vec<(&Term, usize)> = bag.iter().map(|(t, &m)| (t, m)).collect();
    let mut out = Vec::new();
    let mut chosen = vec![0; distinct.len()];
    sub_bags_rec(&distinct, 0, k, &mut chosen, &mut out);
    out
}

fn sub_bags_rec(distinct: &[(&Term, usize)], i: usize, k: usize, chosen: &mut Vec<usize>, out: &mut Vec<(Bag, Natural, Bag)>) {
    if i == distinct.len() {
        if k == 0 {
            let mut taken = Bag::one();
            let mut rest = Bag::one();
            let mut weight = Natural::one();
            for (&(t, m), &c) in distinct.iter().zip(chosen.iter()) {
                taken.insert(t.clone(), c);
                rest.insert(t.clone(), m - c);
                weight *= binomial(m, c);
            }
            out.push((taken, weight, rest));
        }
        return;
    }
    let remaining: usize = distinct[i + 1..].iter().map(|(_, m)| m).sum();
    let (_, m) = distinct[i];
    for c in 0..=m.min(k) {
        if k - c > remaining {
            continue;
        }
        chosen[i] = c;
        sub_bags_rec(distinct, i + 1, k - c, chosen, out);
    }
    chosen[i] = 0;
}

/// `∂s[S/x]`; zero unless `x` has exactly `|S|` free occurrences in `s`.
pub fn diff_subst(s: &Term, bag: &Bag, x: &str) -> TermComb<Natural> {
    if s.occurrence_count(x) != bag.cardinality() {
        return LinComb::zero();
    }
    distribute(s, bag, x)
}

// Requires occurrence_count(s, x) == |bag|.
fn distribute(s: &Term, bag: &Bag, x: &str) -> TermComb<Natural> {
    if bag.is_empty() {
        return LinComb::unit(s.clone());
    }
    match s.kind() {
        Kind::Var(Var::Free(_)) => {
            let (u, _) = bag.iter().next().expect("one element");
            LinComb::unit(u.clone())
        }
        Kind::Var(Var::Bound(_)) => unreachable!("a bound variable has no free occurrence"),
        Kind::Abs(body) => distribute(body, bag, x).map_keys(|b| Term::abs_raw(b.clone())),
        Kind::App(head, args) => {
            let mut out = LinComb::zero();
            for (to_head, weight, rest) in sub_bags(bag, head.occurrence_count(x)) {
                let heads = distribute(head, &to_head, x);
                let bags = distribute_bag(args, &rest, x);
                for (h, ch) in heads.iter() {
                    for (b, cb) in bags.iter() {
                        out.add_term(weight.times(ch).times(cb), Term::app(h.clone(), b.clone()));
                    }
                }
            }
            out
        }
    }
}

/// Distributes `bag` over the element copies of `args`.
fn distribute_bag(args: &Bag, bag: &Bag, x: &str) -> LinComb<Natural, Bag> {
    let copies: Vec<&Term> = args.elements().collect();
    let mut acc: Vec<(Vec<TermComb<Natural>>, Natural, Bag)> = vec![(Vec::new(), Natural::one(), bag.clone())];
    for t in copies {
        let n = t.occurrence_count(x);
        let mut next = Vec::new();
        for (parts, w, remaining) in acc {
            for (taken, weight, rest) in sub_bags(&remaining, n) {
                let mut parts = parts.clone();
                parts.push(distribute(t, &taken, x));
                next.push((parts, w.times(&weight), rest));
            }
        }
        acc = next;
    }
    let mut out = LinComb::zero();
    for (parts, w, _) in acc {
        out.add_scaled(&w, &bag_product(&parts));
    }
    out
}

/// Simultaneous differential substitution of `bag_i` for `var_i`.
///
/// The variables must be pairwise distinct and none of them may occur free
/// in any of the bags.
pub fn parallel_diff_subst(s: &Term, pairs: &[(String, Bag)]) -> Result<TermComb<Natural>, Error> {
    let mut seen = BTreeSet::new();
    for (x, _) in pairs {
        if !seen.insert(x.as_str()) {
            return Err(Error::DuplicateVariable(x.clone()));
        }
    }
    for (x, _) in pairs {
        for (y, bag) in pairs {
            if bag.has_free(x) {
                return Err(Error::VariableFreeInBag { var: x.clone(), target: y.clone() });
            }
        }
    }
    let mut acc = LinComb::unit(s.clone());
    for (x, bag) in pairs {
        acc = acc.flat_map(|t| diff_subst(t, bag, x));
    }
    Ok(acc)
}

/// Bilinear extension `Σ a_s A_S ∂s[S/x]`.
pub fn diff_subst_linear<R: Semiring>(a: &TermComb<R>, bags: &LinComb<R, Bag>, x: &str) -> TermComb<R> {
    let mut out = LinComb::zero();
    for (s, cs) in a.iter() {
        for (b, cb) in bags.iter() {
            let scale = cs.times(cb);
            for (t, n) in diff_subst(s, b, x).iter() {
                out.add_term(scale.times(&R::from_natural(n)), t.clone());
            }
        }
    }
    out
}

/// The pairs `(t, T)` such that `s` lies in the support of `∂t[T/x]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InverseSolution {
    pub pairs: BTreeSet<(Term, Bag)>,
}

impl InverseSolution {
    pub fn contains(&self, t: &Term, bag: &Bag) -> bool {
        self.pairs.contains(&(t.clone(), bag.clone()))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// All ways of replacing pairwise disjoint subterm occurrences of `s` by
/// `x`, keeping those where `x` then occurs exactly once per removed
/// subterm.
pub fn inverse_diff_subst(s: &Term, x: &str) -> InverseSolution {
    let var = Term::free_raw(x);
    let pairs = selections(s, &var)
        .into_iter()
        .filter(|(t, bag)| t.occurrence_count(x) == bag.cardinality())
        .collect();
    InverseSolution { pairs }
}

fn selections(s: &Term, var: &Term) -> BTreeSet<(Term, Bag)> {
    let mut out = BTreeSet::new();
    out.insert((var.clone(), Bag::singleton(s.clone())));
    match s.kind() {
        Kind::Var(_) => {
            out.insert((s.clone(), Bag::one()));
        }
        Kind::Abs(body) => {
            let fresh = internal_fresh([s]);
            for (t, bag) in selections(&body.open(&fresh), var) {
                if !bag.has_free(&fresh) {
                    out.insert((Term::abs(&fresh, t), bag));
                }
            }
        }
        Kind::App(head, args) => {
            let mut partial: Vec<(Term, Bag, Bag)> =
                selections(head, var).into_iter().map(|(h, b)| (h, Bag::one(), b)).collect();
            for (u, &m) in args.iter() {
                let choices: Vec<(Term, Bag)> = selections(u, var).into_iter().collect();
                let picks: Vec<Vec<&(Term, Bag)>> = choices.iter().combinations_with_replacement(m).collect();
                let mut next = Vec::new();
                for (h, new_args, taken) in &partial {
                    for pick in &picks {
                        let mut new_args = new_args.clone();
                        let mut taken = taken.clone();
                        for (t, b) in pick {
                            new_args.insert(t.clone(), 1);
                            taken = taken.union(b);
                        }
                        next.push((h.clone(), new_args, taken));
                    }
                }
                partial = next;
            }
            for (h, new_args, taken) in partial {
                out.insert((Term::app(h, new_args), taken));
            }
        }
    }
    out
}
