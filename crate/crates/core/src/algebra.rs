//! Coefficient semirings and finite formal linear combinations.

use std::collections::{btree_map, BTreeMap};
use std::fmt;
use std::ops::Add;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::syntax::{Bag, Term};

/// Arbitrary-precision natural numbers.
pub type Natural = BigUint;
/// Arbitrary-precision rationals, always in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// A commutative semiring (rig) of coefficients.
pub trait Semiring: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
    /// Image of a natural number under the unique semiring morphism from ℕ.
    fn from_natural(n: &Natural) -> Self;
}

/// A semiring in which subtraction and division by nonzero elements exist.
pub trait Field: Semiring {
    fn negate(&self) -> Self;
    fn inverse(&self) -> Option<Self>;
}

/// The Boolean semiring {0, 1} with 1 + 1 = 1. Combinations over it are
/// finite sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Boolean(pub bool);

impl fmt::Display for Boolean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0 { "1" } else { "0" })
    }
}

impl Semiring for Boolean {
    fn zero() -> Self {
        Boolean(false)
    }
    fn one() -> Self {
        Boolean(true)
    }
    fn plus(&self, other: &Self) -> Self {
        Boolean(self.0 || other.0)
    }
    fn times(&self, other: &Self) -> Self {
        Boolean(self.0 && other.0)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
    fn from_natural(n: &Natural) -> Self {
        Boolean(!Zero::is_zero(n))
    }
}

impl Semiring for Natural {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_natural(n: &Natural) -> Self {
        n.clone()
    }
}

impl Semiring for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_natural(n: &Natural) -> Self {
        BigRational::from_integer(n.clone().into())
    }
}

impl Field for Rational {
    fn negate(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

pub fn rational(numer: i64, denom: i64) -> Rational {
    BigRational::new(numer.into(), denom.into())
}

pub fn factorial(n: usize) -> Natural {
    (1..=n).fold(Natural::from(1u32), |acc, k| acc * Natural::from(k))
}

pub fn binomial(n: usize, k: usize) -> Natural {
    if k > n {
        return Natural::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = Natural::from(1u32);
    for i in 0..k {
        acc = acc * Natural::from(n - i) / Natural::from(i + 1);
    }
    acc
}

/// A finite formal linear combination of keys with coefficients in `R`.
///
/// No key is ever mapped to zero; iteration follows the key order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinComb<R, K: Ord> {
    support: BTreeMap<K, R>,
}

impl<R: Semiring, K: Ord> Default for LinComb<R, K> {
    fn default() -> Self {
        LinComb { support: BTreeMap::new() }
    }
}

impl<R: Semiring, K: Ord + Clone> LinComb<R, K> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The combination `1·key`.
    pub fn unit(key: K) -> Self {
        Self::term(R::one(), key)
    }

    pub fn term(coeff: R, key: K) -> Self {
        let mut out = Self::zero();
        out.add_term(coeff, key);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn coeff(&self, key: &K) -> R {
        self.support.get(key).cloned().unwrap_or_else(R::zero)
    }

    pub fn contains(&self, key: &K) -> bool {
        self.support.contains_key(key)
    }

    pub fn iter(&self) -> btree_map::Iter<'_, K, R> {
        self.support.iter()
    }

    pub fn keys(&self) -> btree_map::Keys<'_, K, R> {
        self.support.keys()
    }

    /// Adds `coeff·key` in place, pruning a resulting zero.
    pub fn add_term(&mut self, coeff: R, key: K) {
        if coeff.is_zero() {
            return;
        }
        match self.support.entry(key) {
            btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().plus(&coeff);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    /// Adds `scale·other` in place.
    pub fn add_scaled(&mut self, scale: &R, other: &Self) {
        for (k, c) in other.iter() {
            self.add_term(scale.times(c), k.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(&R::one(), other);
        out
    }

    pub fn scale(&self, alpha: &R) -> Self {
        let mut out = Self::zero();
        out.add_scaled(alpha, self);
        out
    }

    /// Applies `f` to every key and coefficient, summing colliding images.
    pub fn map_keys<K2: Ord + Clone>(&self, mut f: impl FnMut(&K) -> K2) -> LinComb<R, K2> {
        let mut out = LinComb::zero();
        for (k, c) in self.iter() {
            out.add_term(c.clone(), f(k));
        }
        out
    }

    /// Linear extension of `f`: `Σ c_k · f(k)`.
    pub fn flat_map<K2: Ord + Clone>(&self, mut f: impl FnMut(&K) -> LinComb<R, K2>) -> LinComb<R, K2> {
        let mut out = LinComb::zero();
        for (k, c) in self.iter() {
            out.add_scaled(c, &f(k));
        }
        out
    }

    /// Pushes coefficients along the semiring morphism from ℕ, when `R` is ℕ.
    pub fn convert<S: Semiring>(&self) -> LinComb<S, K>
    where
        R: Into<Natural>,
    {
        let mut out = LinComb::zero();
        for (k, c) in self.iter() {
            out.add_term(S::from_natural(&c.clone().into()), k.clone());
        }
        out
    }
}

impl<R: Field, K: Ord + Clone> LinComb<R, K> {
    pub fn neg(&self) -> Self {
        self.scale(&R::one().negate())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl<R: Semiring, K: Ord + Clone> FromIterator<(R, K)> for LinComb<R, K> {
    fn from_iter<I: IntoIterator<Item = (R, K)>>(iter: I) -> Self {
        let mut out = Self::zero();
        for (c, k) in iter {
            out.add_term(c, k);
        }
        out
    }
}

impl<R: Semiring, K: Ord + Clone> Add for &LinComb<R, K> {
    type Output = LinComb<R, K>;
    fn add(self, rhs: Self) -> LinComb<R, K> {
        LinComb::add(self, rhs)
    }
}

impl<R: Semiring, K: Ord + fmt::Display> fmt::Display for LinComb<R, K> {
    /// `c1*k1 + c2*k2`, unit coefficients omitted, `0` for the empty
    /// combination.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.support.iter().enumerate() {
            let mut coeff = c.to_string();
            let negative = coeff.starts_with('-');
            if negative {
                coeff.remove(0);
            }
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if coeff != "1" {
                write!(f, "{coeff}*")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl<R: Semiring, K: Ord + fmt::Display> fmt::Debug for LinComb<R, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinComb({self})")
    }
}

/// One entry of the JSON rendering of a combination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct JsonSummand {
    pub coeff: String,
    pub term: String,
}

impl<R: Semiring, K: Ord + fmt::Display> LinComb<R, K> {
    /// `[{"coeff": "p/q", "term": "..."}]` in key order.
    pub fn to_json(&self) -> Vec<JsonSummand> {
        self.support
            .iter()
            .map(|(k, c)| JsonSummand { coeff: c.to_string(), term: k.to_string() })
            .collect()
    }
}

pub type TermComb<R> = LinComb<R, Term>;
pub type BagComb<R> = LinComb<R, Bag>;

/// `\x.a`, key by key.
pub fn lift_abs<R: Semiring>(x: &str, a: &TermComb<R>) -> TermComb<R> {
    a.map_keys(|s| Term::abs(x, s.clone()))
}

/// Bilinear application `<a>A = Σ a_s A_S <s>S`.
pub fn lift_app<R: Semiring>(a: &TermComb<R>, bags: &BagComb<R>) -> TermComb<R> {
    let mut out = LinComb::zero();
    for (s, cs) in a.iter() {
        for (b, cb) in bags.iter() {
            out.add_term(cs.times(cb), Term::app(s.clone(), b.clone()));
        }
    }
    out
}

/// Multiplies two bag combinations (multiset union, extended bilinearly).
pub fn bag_mul<R: Semiring>(left: &BagComb<R>, right: &BagComb<R>) -> BagComb<R> {
    let mut out = LinComb::zero();
    for (a, ca) in left.iter() {
        for (b, cb) in right.iter() {
            out.add_term(ca.times(cb), a.union(b));
        }
    }
    out
}

/// The n-linear product `a(1)⋯a(n)`: multisets of one term from each factor.
pub fn bag_product<R: Semiring>(factors: &[TermComb<R>]) -> BagComb<R> {
    let mut acc = BagComb::unit(Bag::one());
    for a in factors {
        acc = bag_mul(&acc, &a.map_keys(|s| Bag::singleton(s.clone())));
    }
    acc
}

/// `aⁿ`, the product of `n` copies of `a`; `a⁰ = 1·[]`.
pub fn power<R: Semiring>(a: &TermComb<R>, n: usize) -> BagComb<R> {
    let as_bags = a.map_keys(|s| Bag::singleton(s.clone()));
    let mut acc = BagComb::unit(Bag::one());
    for _ in 0..n {
        acc = bag_mul(&acc, &as_bags);
    }
    acc
}

/// `Σ_{k ≤ degree} aᵏ / k!`, the promotion `a!` truncated at `degree`.
pub fn promotion_truncated<F: Field>(a: &TermComb<F>, degree: usize) -> BagComb<F> {
    let as_bags = a.map_keys(|s| Bag::singleton(s.clone()));
    let mut out = BagComb::zero();
    let mut pow = BagComb::unit(Bag::one());
    for k in 0..=degree {
        if k > 0 {
            pow = bag_mul(&pow, &as_bags);
        }
        let inv = F::from_natural(&factorial(k)).inverse().expect("k! is invertible in a field");
        out.add_scaled(&inv, &pow);
    }
    out
}
