use serde_json::{json, Value};

use rescalc_core::finiteness::{finitary_probe, untyped_counterexample, ProbeVerdict, TowerStream};
use rescalc_core::parse::parse_comb;
use rescalc_core::rewrite::Reducer;
use rescalc_core::Term;

use crate::Outcome;

/// `(input, normal form)` pairs, compared as combinations.
pub const REDUCTIONS: &[(&str, &str)] = &[
    ("<\\x.x>[y]", "y"),
    ("<\\x.x>[]", "0"),
    ("<\\x.x>[y^2]", "0"),
    ("<\\x.<x>[x^2]>[y^2,z]", "4*<y>[y,z] + 2*<z>[y^2]"),
    ("<\\x.<<x>[x]>[x]>[y^2,z]", "2*<<y>[z]>[y] + 2*<<y>[y]>[z] + 2*<<z>[y]>[y]"),
];

/// The self-application counterexample needs three summands, the largest
/// of size 19.
pub const COUNTEREXAMPLE_CEILING: usize = 20;

pub const TOWER_CEILING: usize = 12;

struct Check {
    name: String,
    expected: String,
    actual: String,
}

pub fn replay(reducer: &Reducer) -> Outcome {
    let mut checks = Vec::new();
    for (input, expected) in REDUCTIONS {
        let a = parse_comb(input).expect("golden input parses");
        let nf = reducer.normalize_comb(&a);
        let want = parse_comb(expected).expect("golden output parses");
        checks.push(Check {
            name: format!("nf {input}"),
            expected: want.to_string(),
            actual: if nf == want { want.to_string() } else { nf.to_string() },
        });
    }
    let x = Term::var("x");
    let tower = finitary_probe(&mut TowerStream, std::slice::from_ref(&x), TOWER_CEILING, reducer).remove(0);
    let closed: Vec<usize> = (1..=TOWER_CEILING).map(|k| (k - 1) / 3 + 1).collect();
    checks.push(Check {
        name: "tower on x".to_string(),
        expected: format!("growing {closed:?}"),
        actual: format!("{} {:?}", verdict_word(tower.verdict), tower.counts),
    });
    let cex = untyped_counterexample(COUNTEREXAMPLE_CEILING, reducer);
    checks.push(Check {
        name: "self-application on z".to_string(),
        expected: "growing".to_string(),
        actual: verdict_word(cex.verdict).to_string(),
    });

    let failed = checks.iter().any(|c| c.expected != c.actual);
    let text = checks
        .iter()
        .map(|c| {
            if c.expected == c.actual {
                format!("PASS {}: {}", c.name, c.actual)
            } else {
                format!("FAIL {}: expected {}, got {}", c.name, c.expected, c.actual)
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    let json: Value = checks
        .iter()
        .map(|c| json!({ "name": c.name, "expected": c.expected, "actual": c.actual, "pass": c.expected == c.actual }))
        .collect();
    Outcome { text, json, failed }
}

fn verdict_word(v: ProbeVerdict) -> &'static str {
    match v {
        ProbeVerdict::Stable(_) => "stable",
        ProbeVerdict::Growing => "growing",
        ProbeVerdict::Inconclusive => "inconclusive",
    }
}
