//! Worked examples with frozen expected values. Where an oracle applies,
//! the frozen value is checked against it as well as against the library.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use rescalc_core::algebra::{bag_product, lift_abs, lift_app, power, promotion_truncated, rational, BagComb, TermComb};
use rescalc_core::finiteness::{
    arrow_membership_probe, finitary_probe, fundamental_property_instance, fv_structure_probe, in_neighborhood, nf_convergence_trace,
    orthogonal_cover_check, relevant_probes, saturation_instance_check, untyped_counterexample, FiniteStream, ProbeVerdict, TaylorStream,
    TowerStream, VariablesStream,
};
use rescalc_core::parse::{parse_comb, parse_context, parse_natural_comb};
use rescalc_core::rewrite::{confluence_check, downset, normalize, normalize_comb, one_step_all, reduce_comb_step, upset_member, Choice, Reducer};
use rescalc_core::subst::{diff_subst, diff_subst_linear, inverse_diff_subst, parallel_diff_subst};
use rescalc_core::sysf::{erase, synthesize, type_subst, typecheck, Context, Rule, TypeExpr};
use rescalc_core::taylor::{
    coherent, coherent_disjointness_check, multiplicity, nf_taylor_commutation_check, shape, taylor_coeff, uniformity_check, AlgTerm,
    Verdict,
};
use rescalc_core::{Bag, Natural, Rational, Term};

fn t(s: &str) -> Term {
    Term::parse(s).unwrap()
}

fn b(s: &str) -> Bag {
    Bag::parse(s).unwrap()
}

fn q(s: &str) -> TermComb<Rational> {
    parse_comb(s).unwrap()
}

fn n(s: &str) -> TermComb<Natural> {
    parse_natural_comb(s).unwrap()
}

fn m(s: &str) -> AlgTerm {
    AlgTerm::parse(s).unwrap()
}

fn set(ss: &[&str]) -> BTreeSet<Term> {
    ss.iter().map(|s| t(s)).collect()
}

fn terms(ss: &[&str]) -> Vec<Term> {
    ss.iter().map(|s| t(s)).collect()
}

fn bags(c: &TermComb<Rational>) -> BagComb<Rational> {
    c.map_keys(|u| Bag::singleton(u.clone()))
}

#[test]
fn sizes_and_counts() {
    let s = t("<\\x.<x>[x,x]>[y,y,z]");
    assert_eq!(s.size(), 9);
    assert_eq!(oracle_size(&s), 9);
    assert_eq!(t("x").size(), 1);
    assert_eq!(t("\\x.x").size(), 2);
    let s = t("<y>[y,z]");
    assert_eq!(s.occurrence_count("y"), 2);
    assert_eq!(oracle_count(&s, "y"), 2);
    assert_eq!(t("<x>[x,x]").occurrence_count("x"), 3);
    assert_eq!(t("\\x.x").occurrence_count("x"), 0);
    assert_eq!(t("\\x.<x>[y]").free_variables(), BTreeSet::from(["y".to_string()]));
    assert!(t("<\\x.x>[]").free_variables().is_empty());
    assert_eq!(t("\\x.x"), t("\\y.y"));
    assert!(t("x") < t("\\x.x"));
}

#[test]
fn algebra() {
    assert_eq!(q("2*x").add(&q("3*x")), q("5*x"));
    assert!(q("y").add(&q("-1*y")).is_zero());
    assert!(q("2*x + y").scale(&rational(0, 1)).is_zero());

    let abs = lift_abs("x", &q("2*x + 3*y"));
    assert_eq!(abs, q("2*\\x.x + 3*\\x.y"));
    let direct: TermComb<Rational> =
        [(rational(2, 1), Term::abs("x", Term::var("x"))), (rational(3, 1), Term::abs("x", Term::var("y")))].into_iter().collect();
    assert_eq!(abs, direct);
    assert!(lift_abs("x", &q("0")).is_zero());

    assert_eq!(lift_app(&q("2*x"), &bags(&q("3*y"))), q("6*<x>[y]"));
    assert_eq!(lift_app(&q("x + y"), &BagComb::unit(Bag::one())), q("<x>[] + <y>[]"));
    assert_eq!(lift_app(&q("x"), &bags(&q("y"))), q("<x>[y]"));

    let yy = bag_product(&[n("y"), n("y")]);
    assert_eq!(yy, BagComb::unit(b("[y^2]")));
    let sq = bag_product(&[n("x + y"), n("x + y")]);
    let expected: BagComb<Natural> =
        [(1u32.into(), b("[x^2]")), (2u32.into(), b("[x,y]")), (1u32.into(), b("[y^2]"))].into_iter().collect();
    assert_eq!(sq, expected);
    assert_eq!(power(&n("x + y"), 2), expected);
    assert_eq!(power(&n("y"), 2), BagComb::unit(b("[y^2]")));
    assert_eq!(power(&n("y"), 0), BagComb::unit(Bag::one()));
    assert_eq!(bag_product(&[n("x + y")]), [(1u32.into(), b("[x]")), (1u32.into(), b("[y]"))].into_iter().collect());

    let p = promotion_truncated(&q("y"), 2);
    let expected: BagComb<Rational> =
        [(rational(1, 1), b("[]")), (rational(1, 1), b("[y]")), (rational(1, 2), b("[y^2]"))].into_iter().collect();
    assert_eq!(p, expected);
    assert_eq!(promotion_truncated(&q("0"), 3), BagComb::unit(Bag::one()));
    assert_eq!(promotion_truncated(&q("y"), 0), BagComb::unit(Bag::one()));
}

#[test]
fn differential_substitution() {
    let cases = [
        ("<x>[x,x]", "[y,y,z]", "x", "4*<y>[y,z] + 2*<z>[y^2]"),
        ("x", "[y]", "x", "y"),
        ("y", "[z]", "x", "0"),
        ("<<x>[x]>[x]", "[y,y,z]", "x", "2*<<y>[z]>[y] + 2*<<y>[y]>[z] + 2*<<z>[y]>[y]"),
    ];
    for (s, bag, x, expected) in cases {
        let got = diff_subst(&t(s), &b(bag), x);
        assert_eq!(got, n(expected), "{s}");
        assert_eq!(oracle_diff_subst(&t(s), &b(bag), x), n(expected), "{s}");
    }

    let one = |x: &str, bag: &str| (x.to_string(), b(bag));
    assert_eq!(parallel_diff_subst(&t("<x>[y]"), &[one("x", "[z]")]).unwrap(), n("<z>[y]"));
    assert_eq!(parallel_diff_subst(&t("<x>[y]"), &[one("x", "[u]"), one("y", "[v]")]).unwrap(), n("<u>[v]"));
    assert_eq!(parallel_diff_subst(&t("<w>[w]"), &[one("x", "[]"), one("y", "[]")]).unwrap(), n("<w>[w]"));

    let lin = diff_subst_linear(&q("2*x"), &bags(&q("3*y")), "x");
    assert_eq!(lin, q("6*y"));
    assert_eq!(diff_subst_linear(&q("x"), &bags(&q("y + z")), "x"), q("y + z"));
    assert!(diff_subst_linear(&q("0"), &bags(&q("y")), "x").is_zero());
}

#[test]
fn inverse_substitution() {
    let mut enums = Enumerations::default();
    let pairs = |v: &[(&str, &str)]| -> BTreeSet<(Term, Bag)> { v.iter().map(|(s, bag)| (t(s), b(bag))).collect() };
    let cases = [
        ("y", pairs(&[("y", "[]"), ("x", "[y]")])),
        (
            "<y>[y]",
            pairs(&[("<y>[y]", "[]"), ("x", "[<y>[y]]"), ("<x>[y]", "[y]"), ("<y>[x]", "[y]"), ("<x>[x]", "[y,y]")]),
        ),
    ];
    for (s, expected) in cases {
        assert_eq!(inverse_diff_subst(&t(s), "x").pairs, expected, "{s}");
        assert_eq!(brute_inverse(&t(s), "x", &mut enums), expected, "{s}");
    }
    for s in ["x", "\\y.<y>[z]", "<\\w.w>[x,y]"] {
        assert!(inverse_diff_subst(&t(s), "x").contains(&t(s), &Bag::one()) != t(s).has_free("x"));
    }
}

#[test]
fn reduction() {
    let steps = one_step_all(&t("<\\x.x>[y]"));
    assert_eq!(steps.len(), 1);
    assert_eq!(steps[0].result, n("y"));
    assert!(one_step_all(&t("x")).is_empty());
    let steps = one_step_all(&t("<\\x.x>[y,y]"));
    assert_eq!(steps.len(), 1);
    assert!(steps[0].result.is_zero());

    let cases = [
        ("<\\x.<x>[x,x]>[y,y,z]", "4*<y>[y,z] + 2*<z>[y^2]"),
        ("<\\x.x>[]", "0"),
        ("<\\x.x>[y^2]", "0"),
        ("<\\x.x>[y]", "y"),
        ("y", "y"),
        ("<\\x.<<x>[x]>[x]>[y^2,z]", "2*<<y>[z]>[y] + 2*<<y>[y]>[z] + 2*<<z>[y]>[y]"),
    ];
    for (s, expected) in cases {
        assert_eq!(normalize(&t(s)), n(expected), "{s}");
        assert_eq!(oracle_normalize(&t(s)), n(expected), "{s}");
    }

    let a = q("1/2*<\\x.x>[y] + 1/2*y");
    assert_eq!(normalize_comb(&a), q("y"));
    let oracle: TermComb<Rational> = a.flat_map(|s| oracle_normalize(s).convert());
    assert_eq!(oracle, q("y"));
    assert!(normalize_comb(&q("0")).is_zero());
    assert!(normalize_comb(&q("<\\x.x>[y] - <\\x.x>[y]")).is_zero());

    let redex = t("<\\x.x>[y]");
    let step = one_step_all(&redex).remove(0);
    let choices = BTreeMap::from([(redex.clone(), Choice::Step(step.clone())), (t("y"), Choice::Identity)]);
    assert!(reduce_comb_step(&q("<\\x.x>[y] - y"), &choices).unwrap().is_zero());
    assert_eq!(reduce_comb_step(&q("y"), &BTreeMap::from([(t("y"), Choice::Identity)])).unwrap(), q("y"));
    assert_eq!(reduce_comb_step(&q("<\\x.x>[y]"), &BTreeMap::from([(redex.clone(), Choice::Step(step))])).unwrap(), q("y"));

    assert_eq!(downset(&t("y")).iter().cloned().collect::<BTreeSet<_>>(), set(&["y"]));
    for (s, expected) in [("<\\x.x>[y]", set(&["<\\x.x>[y]", "y"])), ("<\\x.y>[z]", set(&["<\\x.y>[z]"]))] {
        assert_eq!(downset(&t(s)).iter().cloned().collect::<BTreeSet<_>>(), expected);
        assert_eq!(oracle_downset(&t(s)), expected);
    }
    assert!(upset_member(&t("<\\x.x>[y]"), &t("y")));
    assert!(!upset_member(&t("y"), &t("<\\x.x>[y]")));
    assert!(upset_member(&t("<\\x.x>[y]"), &t("<\\x.x>[y]")));
    assert!(confluence_check(&t("<\\x.<x>[x,x]>[y,y,z]"), 50, 0));
    assert!(confluence_check(&t("y"), 5, 0));
}

#[test]
fn taylor_expansion() {
    let id_y = m("(\\x.x)(1*y)");
    let half = taylor_coeff(&id_y, &t("<\\x.x>[y,y]"));
    assert_eq!(half, rational(1, 2));
    assert_eq!(oracle_taylor(&id_y, 5).coeff(&t("<\\x.x>[y,y]")), rational(1, 2));
    assert_eq!(taylor_coeff(&m("(\\x.x)(1/2*y + 1/2*y)"), &t("<\\x.x>[y]")), rational(1, 1));
    assert_eq!(oracle_taylor(&m("(\\x.x)(1/2*y + 1/2*y)"), 4).coeff(&t("<\\x.x>[y]")), rational(1, 1));
    assert_eq!(taylor_coeff(&m("\\x.x"), &t("\\x.x")), rational(1, 1));
    assert_eq!(taylor_coeff(&id_y, &t("x")), rational(0, 1));

    let expected = set(&["<\\x.x>[]", "<\\x.x>[y]", "<\\x.x>[y,y]"]);
    assert_eq!(shape(&id_y, 5), expected);
    assert_eq!(oracle_taylor(&id_y, 5).keys().cloned().collect::<BTreeSet<_>>(), expected);
    assert_eq!(shape(&m("x"), 4), set(&["x"]));
    assert_eq!(shape(&m("\\x.x"), 2), set(&["\\x.x"]));

    assert!(uniformity_check(&id_y, 6).unwrap());
    assert!(uniformity_check(&m("x"), 4).unwrap());
    assert!(uniformity_check(&m("(\\x:p.x)(y)"), 6).unwrap());

    for (s, expected) in [("<\\x.x>[y,y]", 2u32), ("<x>[y^2,z^3]", 12), ("x", 1)] {
        assert_eq!(multiplicity(&t(s)), Natural::from(expected));
        assert_eq!(oracle_multiplicity(&t(s)), Natural::from(expected));
    }

    assert!(!coherent(&t("x"), &t("y")));
    assert!(coherent(&t("x"), &t("x")));
    assert!(coherent(&t("<\\x.x>[y]"), &t("<\\x.x>[y,y]")));
    let r = Reducer::new();
    assert!(coherent_disjointness_check(&t("<\\x.x>[y]"), &t("<\\x.x>[y,y]"), &r).unwrap());
    assert_eq!(oracle_normalize(&t("<\\x.x>[y]")), n("y"));
    assert!(oracle_normalize(&t("<\\x.x>[y,y]")).is_zero());
    assert!(coherent_disjointness_check(&t("y"), &t("y"), &r).is_err());

    for (mm, m0) in [("(\\x.x)(1*y)", "y"), ("(\\x.x)((\\x.x)(1*y))", "y"), ("y", "y")] {
        let rep = nf_taylor_commutation_check(&m(mm), &m(m0), &t("y"), 12, &r).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{mm}");
        assert_eq!(rep.lhs, rational(1, 1));
        assert_eq!(rep.rhs, rational(1, 1));
    }
}

/// Counts from the series and exhaustive downsets, level by level.
fn oracle_counts(support: &[Term], probe: &Term, ceiling: usize) -> Vec<usize> {
    (1..=ceiling).map(|k| support.iter().filter(|s| s.size() <= k && oracle_downset(s).contains(probe)).count()).collect()
}

#[test]
fn finitary_probes() {
    let r = Reducer::new();
    let typed = m("(\\x:p.x)(y)");
    let rep = finitary_probe(&mut TaylorStream::new(&typed), &terms(&["y"]), 10, &r).remove(0);
    assert_eq!(rep.verdict, ProbeVerdict::Stable(4));
    assert_eq!(rep.count_at(10), 1);
    let support: Vec<Term> = oracle_taylor(&typed, 10).keys().cloned().collect();
    assert_eq!(rep.counts, oracle_counts(&support, &t("y"), 10));

    for rep in finitary_probe(&mut FiniteStream::from_terms(&terms(&["x"])), &terms(&["x", "y", "\\x.x"]), 8, &r) {
        assert!(matches!(rep.verdict, ProbeVerdict::Stable(_)));
    }

    let rep = finitary_probe(&mut TowerStream, &terms(&["x"]), 12, &r).remove(0);
    assert_eq!(rep.verdict, ProbeVerdict::Growing);
    assert_eq!(rep.counts, (1..=12).map(|k| (k - 1) / 3 + 1).collect::<Vec<_>>());

    let xi = BTreeSet::from(["x0".to_string()]);
    let fv = fv_structure_probe(&mut VariablesStream, &[xi], 10);
    assert!(fv.per_set[0].counts.iter().all(|&c| c == 1));
    assert!(fv.unbounded);
    let fv = fv_structure_probe(&mut TaylorStream::new(&m("(\\x.x)(\\y.y)")), &[], 8);
    assert!(fv.total_free.iter().all(|&c| c == 0));
    let fv = fv_structure_probe(&mut FiniteStream::from_terms(&terms(&["<y>[z]"])), &[BTreeSet::from(["y".to_string()])], 4);
    assert!(fv.per_set[0].counts.iter().all(|&c| c == 0));

    assert!(orthogonal_cover_check(&terms(&["y", "<\\x.x>[y]"]), &terms(&["y"]), &r));
    assert!(!orthogonal_cover_check(&terms(&["y", "z"]), &terms(&["y"]), &r));
    assert!(orthogonal_cover_check(&[], &terms(&["y"]), &r));

    assert!(in_neighborhood(&q("<\\x.y>[z]"), &terms(&["y"]), &r));
    assert!(!oracle_downset(&t("<\\x.y>[z]")).contains(&t("y")));
    assert!(in_neighborhood(&q("0"), &terms(&["y"]), &r));
    assert!(!in_neighborhood(&q("2*y"), &terms(&["y"]), &r));

    let tr = nf_convergence_trace(&q("<\\x.x>[y] + <\\x.x>[<\\x.x>[y]]"), &terms(&["y"]), &r);
    assert_eq!(tr.normal_form, q("2*y"));
    assert_eq!(tr.stable_from, vec![(t("y"), 2)]);
    assert_eq!(nf_convergence_trace(&q("y"), &terms(&["y"]), &r).stable_from, vec![(t("y"), 0)]);
    let tr = nf_convergence_trace(&q("<\\x.<x>[x,x]>[y,y,z]"), &terms(&["<y>[y,z]", "<z>[y^2]"]), &r);
    assert_eq!(tr.stages[1], q("4*<y>[y,z] + 2*<z>[y^2]"));
    assert!(tr.stable_from.iter().all(|(_, k)| *k == 1));
}

#[test]
fn saturation_and_arrows() {
    let r = Reducer::new();
    let probes = relevant_probes(&terms(&["<\\x.x>[y]", "y"]), 6, &r);
    let rep = saturation_instance_check(&terms(&["x"]), &terms(&["y"]), &[], "x", &probes, 8, &r);
    assert_eq!(rep.lhs, set(&["y"]));
    assert!(rep.rhs.contains(&t("<\\x.x>[y]")));
    assert!(rep.violations.is_empty());
    assert!(rep.lhs_reports.iter().chain(&rep.rhs_reports).all(|p| matches!(p.verdict, ProbeVerdict::Stable(_))));
    let rep = saturation_instance_check(&terms(&["z"]), &[], &[], "x", &terms(&["z"]), 8, &r);
    assert_eq!(rep.lhs, set(&["z"]));
    assert_eq!(rep.rhs, set(&["<\\x.z>[]"]));
    assert!(rep.violations.is_empty());

    let probes = terms(&["y", "z", "\\x.x", "<\\x.x>[y]"]);
    for (head, e) in [("\\x.x", vec!["y"]), ("y", vec!["z", "\\w.w"]), ("<\\x.x>[z]", vec![])] {
        let reps = arrow_membership_probe(&t(head), &terms(&e), &probes, 10, &r);
        assert!(reps.iter().all(|p| matches!(p.verdict, ProbeVerdict::Stable(_))), "{head}");
    }
}

#[test]
fn fundamental_property() {
    let r = Reducer::new();
    let ctx = parse_context("x1 : p").unwrap();
    let sets = BTreeMap::from([("x1".to_string(), terms(&["y"]))]);
    let rep = fundamental_property_instance(&ctx, &m("x1"), &sets, &terms(&["y"]), 8, &r).unwrap();
    assert_eq!(rep.substituted, set(&["y"]));
    assert_eq!(rep.ty, TypeExpr::var("p"));
    assert!(rep.reports.iter().all(|p| matches!(p.verdict, ProbeVerdict::Stable(_))));

    let id = m("\\x:p.x");
    let mut enumerator = rescalc_core::syntax::TermEnumerator::new(Vec::<String>::new());
    let probes = enumerator.up_to(5);
    let rep = fundamental_property_instance(&Context::new(), &id, &BTreeMap::new(), &probes, 12, &r).unwrap();
    assert!(rep.reports.iter().all(|p| matches!(p.verdict, ProbeVerdict::Stable(_))));
    assert!(rep.consistent);

    assert_eq!(untyped_counterexample(20, &r).verdict, ProbeVerdict::Growing);
}

#[test]
fn typing() {
    let ctx = Context::new();
    let d = typecheck(&ctx, &m("/\\p.\\x:p.x"), &TypeExpr::parse("forall p. p -> p").unwrap()).unwrap();
    assert_eq!(d.rule, Rule::ForallIntro);
    let ctx = parse_context("f : p -> p\ny : p").unwrap();
    assert!(typecheck(&ctx, &m("f(1/3*y + 2/3*y)"), &TypeExpr::var("p")).is_ok());
    let ctx = parse_context("x : p").unwrap();
    let err = synthesize(&ctx, &m("/\\p.x")).unwrap_err();
    assert_eq!(err.rule, Rule::ForallIntro);
    assert_eq!(err.path.to_string(), "root");

    let subst = |a: &str, with: &str, v: &str| type_subst(&TypeExpr::parse(a).unwrap(), &TypeExpr::parse(with).unwrap(), v).to_string();
    assert_eq!(subst("forall q. p -> q", "q", "p"), "forall q'. q -> q'");
    assert_eq!(subst("p -> p", "q", "p"), "q -> q");
    assert_eq!(subst("forall p. p", "q", "p"), "forall p. p");

    assert_eq!(erase(&m("/\\p.\\x:p.x")), m("\\x.x"));
    assert_eq!(erase(&m("(/\\p.\\x:p.x){q}")), erase(&m("/\\p.\\x:p.x")));
    let plain = m("(\\x.<x>)(1*y)".replace("<x>", "x").as_str());
    assert_eq!(erase(&plain), plain);
}
