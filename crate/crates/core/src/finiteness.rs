//! Bounded probes on infinite combinations of simple terms.
//!
//! An infinite combination is a [`TermStream`], known only through its
//! finite truncations. A probe `s` asks whether the support meets the upset
//! `↑s` finitely; the answer is always bounded evidence up to a ceiling,
//! reported as a [`ProbeReport`].

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::algebra::{LinComb, Rational, TermComb};
use crate::error::Error;
use crate::rewrite::{is_normal, leftmost, Reducer};
use crate::subst::{diff_subst, parallel_diff_subst};
use crate::syntax::{bags_of_cardinality, bags_within, Bag, Term};
use crate::sysf::{synthesize, Context, TypeExpr};
use crate::taylor::{AlgTerm, Expansion};

/// Default truncation ceiling.
pub const DEFAULT_CEILING: usize = 12;

/// An infinite combination given by its truncations. `truncate(n)` must be
/// monotone in `n`; a term appears with a single coefficient.
pub trait TermStream {
    fn truncate(&mut self, level: usize) -> TermComb<Rational>;

    /// True when level `n` is exactly the set of terms of size at most `n`,
    /// so that every level can be read off the top one.
    fn size_graded(&self) -> bool {
        true
    }
}

/// A finite combination, truncated by term size.
#[derive(Clone, Debug, Default)]
pub struct FiniteStream {
    comb: TermComb<Rational>,
}

impl FiniteStream {
    pub fn new(comb: TermComb<Rational>) -> FiniteStream {
        FiniteStream { comb }
    }

    /// The set of `terms`, each with coefficient 1.
    pub fn from_terms<'a>(terms: impl IntoIterator<Item = &'a Term>) -> FiniteStream {
        FiniteStream { comb: terms.into_iter().map(|t| (Rational::from_integer(1.into()), t.clone())).collect() }
    }
}

impl TermStream for FiniteStream {
    fn truncate(&mut self, level: usize) -> TermComb<Rational> {
        self.comb.iter().filter(|(t, _)| t.size() <= level).map(|(t, c)| (c.clone(), t.clone())).collect()
    }
}

/// All variables `x0, x1, ...`; stage `n` holds the first `n`. Not graded
/// by size, since every element has size 1.
#[derive(Clone, Debug, Default)]
pub struct VariablesStream;

impl TermStream for VariablesStream {
    fn truncate(&mut self, level: usize) -> TermComb<Rational> {
        (0..level).map(|i| (Rational::from_integer(1.into()), Term::var(&format!("x{i}")))).collect()
    }

    fn size_graded(&self) -> bool {
        false
    }
}

/// `x + <I>[x] + <I>[<I>[x]] + ⋯` with `I = \x.x`. Every summand reduces to
/// `x`; the k-th has size `1 + 3k`.
#[derive(Clone, Debug, Default)]
pub struct TowerStream;

impl TowerStream {
    pub fn summand(k: usize) -> Term {
        let id = Term::abs("x", Term::var("x"));
        (0..k).fold(Term::var("x"), |t, _| Term::app(id.clone(), Bag::singleton(t)))
    }
}

impl TermStream for TowerStream {
    fn truncate(&mut self, level: usize) -> TermComb<Rational> {
        (0..)
            .take_while(|k| 3 * k < level)
            .map(|k| (Rational::from_integer(1.into()), TowerStream::summand(k)))
            .collect()
    }
}

/// The Taylor expansion of an algebraic term, truncated by size.
#[derive(Clone, Debug)]
pub struct TaylorStream {
    expansion: Expansion,
}

impl TaylorStream {
    pub fn new(m: &AlgTerm) -> TaylorStream {
        TaylorStream { expansion: Expansion::of(m) }
    }
}

impl TermStream for TaylorStream {
    fn truncate(&mut self, level: usize) -> TermComb<Rational> {
        self.expansion.truncate(level).into_iter().map(|(t, c)| (c, t)).collect()
    }
}

/// A stream defined by a truncation function.
pub struct FnStream<F> {
    f: F,
    graded: bool,
}

impl<F: FnMut(usize) -> TermComb<Rational>> FnStream<F> {
    pub fn new(f: F, size_graded: bool) -> FnStream<F> {
        FnStream { f, graded: size_graded }
    }
}

impl<F: FnMut(usize) -> TermComb<Rational>> TermStream for FnStream<F> {
    fn truncate(&mut self, level: usize) -> TermComb<Rational> {
        (self.f)(level)
    }

    fn size_graded(&self) -> bool {
        self.graded
    }
}

/// Part of the Taylor expansion of the untyped self-application `D(D)`,
/// `D = \x.(\w.w)(1*z + 1*x(x))`, which reduces to `z + D(D)`.
///
/// With `a0 = \x.<I>[z]` and `ak = \x.<I>[<x>[x^(k-1)]]`, the summands are
/// `cn = <an>[a(n-1),...,a0]`; each `cn` reduces to `c(n-1)` and finally to
/// `z`, so the support meets `↑z` infinitely.
#[derive(Clone, Debug)]
pub struct SelfApplicationStream {
    cache: Vec<(Term, Rational)>,
}

impl SelfApplicationStream {
    pub fn new() -> SelfApplicationStream {
        SelfApplicationStream { cache: Vec::new() }
    }

    pub fn term() -> AlgTerm {
        let d = AlgTerm::parse("\\x.(\\w.w)(1*z + 1*x(x))").expect("valid");
        AlgTerm::app1(d.clone(), d)
    }

    fn element(k: usize) -> Term {
        let id = Term::abs("w", Term::var("w"));
        let inner = if k == 0 {
            Term::var("z")
        } else {
            let mut bag = Bag::one();
            bag.insert(Term::var("x"), k - 1);
            Term::app(Term::var("x"), bag)
        };
        Term::abs("x", Term::app(id, Bag::singleton(inner)))
    }

    pub fn summand(n: usize) -> Term {
        Term::app(SelfApplicationStream::element(n), (0..n).map(SelfApplicationStream::element).collect())
    }

    pub fn summand_size(n: usize) -> usize {
        6 + 6 * n + n * (n.saturating_sub(1)) / 2
    }
}

impl Default for SelfApplicationStream {
    fn default() -> Self {
        SelfApplicationStream::new()
    }
}

impl TermStream for SelfApplicationStream {
    fn truncate(&mut self, level: usize) -> TermComb<Rational> {
        while SelfApplicationStream::summand_size(self.cache.len()) <= level {
            let s = SelfApplicationStream::summand(self.cache.len());
            let c = crate::taylor::taylor_coeff(&SelfApplicationStream::term(), &s);
            self.cache.push((s, c));
        }
        self.cache.iter().filter(|(s, _)| s.size() <= level).map(|(s, c)| (c.clone(), s.clone())).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "level", rename_all = "lowercase")]
pub enum ProbeVerdict {
    /// Counts are constant from this level to the ceiling.
    Stable(usize),
    /// Counts strictly increased over the last three sampled levels.
    Growing,
    Inconclusive,
}

/// Intersection counts `|Supp(truncate(k)) ∩ ↑probe|` for `k = 1..=ceiling`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub probe: Term,
    /// `counts[k - 1]` is the count at level `k`.
    pub counts: Vec<usize>,
    /// Levels at which the truncation gained terms.
    pub sampled: Vec<usize>,
    pub verdict: ProbeVerdict,
}

impl ProbeReport {
    pub fn count_at(&self, level: usize) -> usize {
        self.counts[level - 1]
    }
}

/// Growing takes precedence over Stable; Stable needs the last two levels
/// to agree.
fn classify(counts: &[usize], sampled: &[usize]) -> ProbeVerdict {
    let at = |level: usize| counts[level - 1];
    if sampled.len() >= 3 {
        let last = &sampled[sampled.len() - 3..];
        if at(last[0]) < at(last[1]) && at(last[1]) < at(last[2]) {
            return ProbeVerdict::Growing;
        }
    }
    let c = counts.len();
    if c == 0 {
        return ProbeVerdict::Inconclusive;
    }
    if c >= 2 && counts[c - 2] != counts[c - 1] {
        return ProbeVerdict::Inconclusive;
    }
    let from = counts.iter().rposition(|&n| n != counts[c - 1]).map_or(1, |i| i + 2);
    ProbeVerdict::Stable(from)
}

/// The levels `1..=ceiling` of a stream as supports, in order.
fn levels(e: &mut dyn TermStream, ceiling: usize) -> Vec<BTreeSet<Term>> {
    if e.size_graded() {
        let top = e.truncate(ceiling);
        (1..=ceiling).map(|k| top.keys().filter(|t| t.size() <= k).cloned().collect()).collect()
    } else {
        (1..=ceiling).map(|k| e.truncate(k).keys().cloned().collect()).collect()
    }
}

/// New terms per level, and the levels where some appeared.
fn increments(levels: &[BTreeSet<Term>]) -> (Vec<Vec<Term>>, Vec<usize>) {
    let mut news = Vec::with_capacity(levels.len());
    let mut sampled = Vec::new();
    let empty = BTreeSet::new();
    for (i, level) in levels.iter().enumerate() {
        let prev = if i == 0 { &empty } else { &levels[i - 1] };
        let new: Vec<Term> = level.difference(prev).cloned().collect();
        if !new.is_empty() {
            sampled.push(i + 1);
        }
        news.push(new);
    }
    (news, sampled)
}

/// Counts, for each probe, how many support terms of each truncation lie
/// above it in the reduction order.
pub fn finitary_probe(e: &mut dyn TermStream, probes: &[Term], ceiling: usize, reducer: &Reducer) -> Vec<ProbeReport> {
    let (news, sampled) = increments(&levels(e, ceiling));
    probes
        .iter()
        .map(|p| {
            let mut counts = Vec::with_capacity(ceiling);
            let mut acc = 0;
            for new in &news {
                acc += new.iter().filter(|t| reducer.upset_member(t, p)).count();
                counts.push(acc);
            }
            let verdict = classify(&counts, &sampled);
            ProbeReport { probe: p.clone(), counts, sampled: sampled.clone(), verdict }
        })
        .collect()
}

/// Every term of size at most `max_size` below some term of `terms`. A probe
/// outside this set meets none of their upsets.
pub fn relevant_probes<'a>(terms: impl IntoIterator<Item = &'a Term>, max_size: usize, reducer: &Reducer) -> Vec<Term> {
    let mut out = BTreeSet::new();
    for t in terms {
        out.extend(reducer.downset(t).iter().filter(|u| u.size() <= max_size).cloned());
    }
    out.into_iter().collect()
}

/// Counts for one finite set of variables `ξ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FvCounts {
    pub variables: BTreeSet<String>,
    /// Number of support terms `t` with `FV(t) ⊆ ξ`, per level.
    pub counts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FvReport {
    pub per_set: Vec<FvCounts>,
    /// `|FV(truncate(k))|` per level.
    pub total_free: Vec<usize>,
    /// The total increased over the last three sampled levels.
    pub unbounded: bool,
}

/// Free-variable structure of the truncations of `e`.
pub fn fv_structure_probe(e: &mut dyn TermStream, variable_sets: &[BTreeSet<String>], ceiling: usize) -> FvReport {
    let levels = levels(e, ceiling);
    let (_, sampled) = increments(&levels);
    let per_set = variable_sets
        .iter()
        .map(|xi| FvCounts {
            variables: xi.clone(),
            counts: levels.iter().map(|l| l.iter().filter(|t| t.free_variables().is_subset(xi)).count()).collect(),
        })
        .collect();
    let total_free: Vec<usize> = levels
        .iter()
        .map(|l| l.iter().flat_map(|t| t.free_variables()).collect::<BTreeSet<_>>().len())
        .collect();
    let unbounded = classify(&total_free, &sampled) == ProbeVerdict::Growing;
    FvReport { per_set, total_free, unbounded }
}

/// True when every term of `e_prime` lies above one of `candidates`.
pub fn orthogonal_cover_check(e_prime: &[Term], candidates: &[Term], reducer: &Reducer) -> bool {
    e_prime.iter().all(|t| candidates.iter().any(|s| reducer.upset_member(t, s)))
}

/// True when the support of `a` avoids `↑s` for every probe `s`.
pub fn in_neighborhood(a: &TermComb<Rational>, probes: &[Term], reducer: &Reducer) -> bool {
    a.keys().all(|t| probes.iter().all(|p| !reducer.upset_member(t, p)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceTrace {
    /// `stages[0]` is the input; each later stage fires the leftmost redex
    /// of every non-normal support term. The last stage is normal.
    pub stages: Vec<TermComb<Rational>>,
    pub normal_form: TermComb<Rational>,
    /// For each probe, the first stage from which `a(n) − NF(a)` stays in
    /// the neighbourhood of the probe.
    pub stable_from: Vec<(Term, usize)>,
}

/// Reduces `a` round by round and reports when each probe stops seeing the
/// difference with the normal form.
pub fn nf_convergence_trace(a: &TermComb<Rational>, probes: &[Term], reducer: &Reducer) -> ConvergenceTrace {
    let normal_form = reducer.normalize_comb(a);
    let mut stages = vec![a.clone()];
    loop {
        let current = stages.last().expect("nonempty");
        if current.keys().all(is_normal) {
            break;
        }
        let mut next = LinComb::zero();
        for (t, c) in current.iter() {
            match leftmost(t) {
                Some(step) => next.add_scaled(c, &step.result.convert()),
                None => next.add_term(c.clone(), t.clone()),
            }
        }
        stages.push(next);
    }
    let in_v: Vec<Vec<bool>> = stages
        .iter()
        .map(|s| {
            let diff = s.sub(&normal_form);
            probes.iter().map(|p| in_neighborhood(&diff, std::slice::from_ref(p), reducer)).collect()
        })
        .collect();
    let stable_from = probes
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let first = in_v.iter().rposition(|row| !row[j]).map_or(0, |i| i + 1);
            (p.clone(), first)
        })
        .collect();
    ConvergenceTrace { stages, normal_form, stable_from }
}

/// Bags over `pool` of total size at most `max_size`.
fn promotion(pool: &[Term], max_size: usize) -> Vec<Bag> {
    bags_within(pool, max_size, usize::MAX)
}

/// `{<t>S : t ∈ heads, S ∈ pool^!}` restricted to size `ceiling`.
fn apply_promoted(heads: &BTreeSet<Term>, pool: &[Term], ceiling: usize) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for t in heads {
        if t.size() + 1 > ceiling {
            continue;
        }
        for s in promotion(pool, ceiling - 1 - t.size()) {
            out.insert(Term::app(t.clone(), s));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationReport {
    /// `<…<∂g[e^!/x]>e1^!…>en^!` up to the ceiling.
    pub lhs: BTreeSet<Term>,
    /// `<…<<\x.g>e^!>e1^!…>en^!` up to the ceiling.
    pub rhs: BTreeSet<Term>,
    pub lhs_reports: Vec<ProbeReport>,
    pub rhs_reports: Vec<ProbeReport>,
    /// Probes on which the left side is stable and the right side growing.
    pub violations: Vec<Term>,
}

/// One instance of the redex-expansion closure condition on finite sets.
#[allow(clippy::too_many_arguments)]
pub fn saturation_instance_check(
    g: &[Term],
    e: &[Term],
    es: &[Vec<Term>],
    x: &str,
    probes: &[Term],
    ceiling: usize,
    reducer: &Reducer,
) -> SaturationReport {
    let mut lhs = BTreeSet::new();
    for t in g {
        let n = t.occurrence_count(x);
        for s in bags_of_cardinality(e, n, ceiling) {
            lhs.extend(diff_subst(t, &s, x).keys().filter(|u| u.size() <= ceiling).cloned());
        }
    }
    let mut rhs: BTreeSet<Term> = g.iter().map(|t| Term::abs(x, t.clone())).collect();
    rhs = apply_promoted(&rhs, e, ceiling);
    for ei in es {
        lhs = apply_promoted(&lhs, ei, ceiling);
        rhs = apply_promoted(&rhs, ei, ceiling);
    }
    let lhs_reports = finitary_probe(&mut FiniteStream::from_terms(&lhs), probes, ceiling, reducer);
    let rhs_reports = finitary_probe(&mut FiniteStream::from_terms(&rhs), probes, ceiling, reducer);
    let violations = lhs_reports
        .iter()
        .zip(&rhs_reports)
        .filter(|(l, r)| matches!(l.verdict, ProbeVerdict::Stable(_)) && r.verdict == ProbeVerdict::Growing)
        .map(|(l, _)| l.probe.clone())
        .collect();
    SaturationReport { lhs, rhs, lhs_reports, rhs_reports, violations }
}

/// Probes the stream `{<t>S : S ∈ e^!}` truncated by size.
pub fn arrow_membership_probe(t: &Term, e: &[Term], probes: &[Term], ceiling: usize, reducer: &Reducer) -> Vec<ProbeReport> {
    let heads = BTreeSet::from([t.clone()]);
    let set = apply_promoted(&heads, e, ceiling);
    finitary_probe(&mut FiniteStream::from_terms(&set), probes, ceiling, reducer)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundamentalReport {
    pub ty: TypeExpr,
    /// `∂f[e1^!,…,en^!/x1,…,xn]` for `f = shape(M, ceiling)`, up to the
    /// ceiling.
    pub substituted: BTreeSet<Term>,
    pub reports: Vec<ProbeReport>,
    /// No probe is growing.
    pub consistent: bool,
}

/// Substitutes promoted finite sets for context variables in the shape of a
/// typed term and probes the result. Context variables without a set are
/// left in place.
pub fn fundamental_property_instance(
    ctx: &Context,
    m: &AlgTerm,
    sets: &BTreeMap<String, Vec<Term>>,
    probes: &[Term],
    ceiling: usize,
    reducer: &Reducer,
) -> Result<FundamentalReport, Error> {
    let ty = synthesize(ctx, m)?.ty;
    let vars: Vec<(&String, &Vec<Term>)> = sets.iter().filter(|(x, _)| ctx.contains_key(*x)).collect();
    for (x, _) in &vars {
        for (y, e) in &vars {
            if e.iter().any(|t| t.has_free(x)) {
                return Err(Error::VariableFreeInBag { var: (*x).clone(), target: (*y).clone() });
            }
        }
    }
    let mut substituted = BTreeSet::new();
    for s in Expansion::of(m).shape(ceiling) {
        let mut choices: Vec<(Vec<(String, Bag)>, usize)> = vec![(Vec::new(), s.size())];
        for (x, e) in &vars {
            let n = s.occurrence_count(x);
            let mut next = Vec::new();
            for (pairs, size) in &choices {
                let budget = (ceiling + n).saturating_sub(*size);
                for b in bags_of_cardinality(e, n, budget) {
                    let new_size = size - n + b.size();
                    let mut pairs = pairs.clone();
                    pairs.push(((*x).clone(), b));
                    next.push((pairs, new_size));
                }
            }
            choices = next;
        }
        for (pairs, size) in choices {
            if size <= ceiling {
                substituted.extend(parallel_diff_subst(&s, &pairs)?.keys().cloned());
            }
        }
    }
    let reports = finitary_probe(&mut FiniteStream::from_terms(&substituted), probes, ceiling, reducer);
    let consistent = reports.iter().all(|r| r.verdict != ProbeVerdict::Growing);
    Ok(FundamentalReport { ty, substituted, reports, consistent })
}

/// Probes the self-application stream on `z`. Its support meets `↑z`
/// infinitely, so the verdict is Growing once the ceiling reaches three
/// summands (size 19).
pub fn untyped_counterexample(ceiling: usize, reducer: &Reducer) -> ProbeReport {
    let mut reports = finitary_probe(&mut SelfApplicationStream::new(), &[Term::var("z")], ceiling, reducer);
    reports.pop().expect("one probe")
}
