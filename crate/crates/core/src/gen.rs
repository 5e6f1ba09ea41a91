//! Seeded random generation of simple terms.
//!
//! A term of a given size is built top-down. Bag cardinalities follow a
//! geometric law of parameter 1/2 capped at 4, free variables come from a
//! pool of three names, and half of the applications whose head has room
//! for it get an abstraction head, so that redexes are common.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::syntax::{Bag, Term};

pub const FREE_POOL: [&str; 3] = ["x", "y", "z"];
const MAX_CARD: usize = 4;

/// A random term whose size is uniform in `1..=max_size`.
pub fn random_term<R: Rng>(rng: &mut R, max_size: usize) -> Term {
    let n = rng.random_range(1..=max_size.max(1));
    term_of_size(rng, n)
}

/// A random term of size exactly `n ≥ 1`.
pub fn term_of_size<R: Rng>(rng: &mut R, n: usize) -> Term {
    build(rng, n.max(1), &mut Vec::new(), false)
}

/// A random bag of total size at most `max_size`.
pub fn random_bag<R: Rng>(rng: &mut R, max_size: usize) -> Bag {
    let budget = rng.random_range(0..=max_size);
    bag_of_size(rng, budget, &mut Vec::new())
}

fn geometric<R: Rng>(rng: &mut R, cap: usize) -> usize {
    let mut k = 0;
    while k < cap && rng.random_bool(0.5) {
        k += 1;
    }
    k
}

fn build<R: Rng>(rng: &mut R, n: usize, scope: &mut Vec<String>, want_abs: bool) -> Term {
    if n == 1 {
        let bound = scope.len();
        let i = rng.random_range(0..bound + FREE_POOL.len());
        return if i < bound { Term::var(&scope[i]) } else { Term::var(FREE_POOL[i - bound]) };
    }
    if want_abs || rng.random_bool(0.4) {
        let binder = format!("b{}", scope.len());
        scope.push(binder.clone());
        let body = build(rng, n - 1, scope, false);
        scope.pop();
        return Term::abs(&binder, body);
    }
    let head_size = rng.random_range(1..n);
    let abs_head = head_size >= 2 && rng.random_bool(0.5);
    let head = build(rng, head_size, scope, abs_head);
    let bag = bag_of_size(rng, n - 1 - head_size, scope);
    Term::app(head, bag)
}

fn bag_of_size<R: Rng>(rng: &mut R, budget: usize, scope: &mut Vec<String>) -> Bag {
    if budget == 0 {
        return Bag::one();
    }
    let card = 1 + geometric(rng, MAX_CARD.min(budget) - 1);
    // split the budget into `card` positive parts
    let mut cuts: Vec<usize> = (1..budget).collect::<Vec<_>>().choose_multiple(rng, card - 1).copied().collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(card);
    let mut last = 0;
    for c in cuts.into_iter().chain(std::iter::once(budget)) {
        sizes.push(c - last);
        last = c;
    }
    sizes.into_iter().map(|k| build(rng, k, scope, false)).collect()
}
