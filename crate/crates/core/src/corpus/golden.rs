//! The twelve-test calculator program with a wrong-variable fault at S9.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::spectrum::{SpectrumMode, TestCase};

pub const MOTIVATING_SOURCE: &str = "\
read(a, b, c);
result = 0;
rdiv = 1;
rsum = a + b;
if ((a > 0) && (b > 0)) {
    rdiv = a / b;
}
rmax = b;
if (a > b) {
    rmax = b; // should be: rmax = a
}
if (c == 1) {
    result = rsum;
}
if (c == 2) {
    result = rdiv;
}
if (c == 3) {
    result = rmax;
}
return result;
";

/// Source with S9 repaired.
pub const MOTIVATING_FIXED_SOURCE: &str = "\
read(a, b, c);
result = 0;
rdiv = 1;
rsum = a + b;
if ((a > 0) && (b > 0)) {
    rdiv = a / b;
}
rmax = b;
if (a > b) {
    rmax = a;
}
if (c == 1) {
    result = rsum;
}
if (c == 2) {
    result = rdiv;
}
if (c == 3) {
    result = rmax;
}
return result;
";

const INPUTS: [(i64, i64, i64, i64); 12] = [
    (4, 1, 3, 4),
    (7, 6, 3, 7),
    (6, 3, 3, 6),
    (2, 1, 3, 2),
    (3, 2, 3, 3),
    (9, 7, 3, 9),
    (8, -3, 2, 1),
    (9, -2, 2, 1),
    (-6, 8, 3, 8),
    (7, 6, 1, 13),
    (6, 8, 3, 8),
    (-8, 9, 3, 9),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Published value the implementation must reproduce.
    Reference,
    /// Value computed by an independent oracle.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedValue {
    pub quantity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given: Option<String>,
    pub value: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedOrdering {
    pub quantity: String,
    pub order: Vec<String>,
    pub provenance: Provenance,
}

/// Contents of a case's `expected.json`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Expectations {
    /// Spectrum used by selection, when it differs from the default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_mode: Option<SpectrumMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect_mode: Option<SpectrumMode>,
    #[serde(default)]
    pub values: Vec<ExpectedValue>,
    #[serde(default)]
    pub orderings: Vec<ExpectedOrdering>,
    /// Chains as member lists, in report order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chains: Vec<Vec<String>>,
    /// Faulty statements plus statements on an infection path to a wrong
    /// output, used to score chains.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chain_truth: Vec<String>,
    /// Quantities deliberately left unchecked, with the reason.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub excluded: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenCase {
    pub name: String,
    pub source: String,
    pub fixed_source: String,
    pub tests: Vec<TestCase>,
    pub faults: Vec<String>,
    pub expected: Expectations,
}

fn value(
    quantity: &str,
    statement: &str,
    given: Option<&str>,
    value: f64,
    tolerance: f64,
    provenance: Provenance,
) -> ExpectedValue {
    ExpectedValue {
        quantity: quantity.into(),
        statement: Some(statement.into()),
        given: given.map(Into::into),
        value,
        tolerance,
        provenance,
    }
}

fn row(
    out: &mut Vec<ExpectedValue>,
    quantity: &str,
    given: Option<&str>,
    cells: &[(&str, f64)],
    tolerance: f64,
    provenance: Provenance,
) {
    for &(s, v) in cells {
        out.push(value(quantity, s, given, v, tolerance, provenance));
    }
}

fn expectations() -> Expectations {
    use Provenance::{Derived, Reference};
    let mut v = Vec::new();
    row(
        &mut v,
        "ochiai",
        None,
        &[("S6", 0.87), ("S9", 0.81), ("S15", 0.81)],
        0.01,
        Reference,
    );
    row(
        &mut v,
        "o",
        None,
        &[("S6", 4.0), ("S9", 3.0), ("S15", 3.0)],
        0.0,
        Reference,
    );
    row(
        &mut v,
        "gp19",
        None,
        &[("S6", 16.97), ("S9", 14.69), ("S15", 14.69)],
        0.01,
        Reference,
    );
    row(
        &mut v,
        "dstar",
        None,
        &[("S6", 18.0), ("S9", 12.0), ("S15", 12.0)],
        1e-9,
        Derived,
    );
    row(
        &mut v,
        "relevance",
        None,
        &[
            ("S6", 0.48),
            ("S9", 0.34),
            ("S11", 0.12),
            ("S13", 0.23),
            ("S15", 0.34),
        ],
        0.01,
        Reference,
    );
    row(
        &mut v,
        "relevance_class",
        None,
        &[
            ("S6", 1.0),
            ("S9", 1.0),
            ("S11", -1.0),
            ("S13", -1.0),
            ("S15", 1.0),
        ],
        0.0,
        Reference,
    );
    row(
        &mut v,
        "j1",
        None,
        &[
            ("S6", 0.48),
            ("S9", 0.34),
            ("S11", -0.12),
            ("S13", -0.23),
            ("S15", 0.34),
        ],
        0.01,
        Reference,
    );
    row(
        &mut v,
        "cr",
        Some("S6"),
        &[("S9", -0.12), ("S11", 0.15), ("S13", -0.23), ("S15", -0.12)],
        0.01,
        Reference,
    );
    row(
        &mut v,
        "w1",
        None,
        &[("S9", 0.88), ("S11", 1.15), ("S13", 0.77), ("S15", 0.88)],
        0.01,
        Reference,
    );
    row(
        &mut v,
        "j2",
        None,
        &[("S9", 0.30), ("S11", -0.14), ("S13", -0.18), ("S15", 0.30)],
        0.01,
        Reference,
    );
    row(
        &mut v,
        "cr",
        Some("S9"),
        &[("S6", -0.12), ("S11", 0.08), ("S13", 0.18), ("S15", 0.41)],
        0.01,
        Reference,
    );
    row(
        &mut v,
        "w2",
        None,
        &[("S11", 1.24), ("S13", 0.91), ("S15", 1.24)],
        0.01,
        Reference,
    );
    row(
        &mut v,
        "j3",
        None,
        &[("S11", -0.15), ("S13", -0.21), ("S15", 0.42)],
        0.01,
        Reference,
    );
    row(&mut v, "entropy", None, &[("S6", 0.9183)], 1e-3, Derived);
    row(&mut v, "mi", None, &[("S6", 0.4591)], 1e-3, Derived);
    row(&mut v, "cmi", Some("S6"), &[("S13", 0.0)], 1e-9, Derived);
    row(&mut v, "cmi", Some("S9"), &[("S15", 0.6887)], 1e-3, Derived);
    let mut excluded = BTreeMap::new();
    excluded.insert(
        "j3:S6".into(),
        "S6 has left the candidate pool by the third round; the printed -0.10 contradicts w(S6)=0.88, R=0.48 and RC=+1".into(),
    );
    Expectations {
        selection_mode: Some(SpectrumMode::Coverage),
        effect_mode: Some(SpectrumMode::Slice),
        values: v,
        orderings: vec![
            ExpectedOrdering {
                quantity: "selection".into(),
                order: vec!["S6".into(), "S9".into(), "S15".into()],
                provenance: Reference,
            },
            ExpectedOrdering {
                quantity: "inference_top3".into(),
                order: vec!["S9".into(), "S15".into(), "S6".into()],
                provenance: Reference,
            },
        ],
        chains: vec![vec!["S9".into(), "S15".into()], vec!["S6".into()]],
        chain_truth: Vec::new(),
        excluded,
    }
}

pub fn motivating_example() -> GoldenCase {
    let tests = INPUTS
        .iter()
        .enumerate()
        .map(|(k, &(a, b, c, expected))| {
            let inputs = [("a", a), ("b", b), ("c", c)]
                .into_iter()
                .map(|(n, v)| (n.to_string(), v))
                .collect();
            TestCase::new(format!("t{}", k + 1), inputs, vec![expected])
        })
        .collect();
    GoldenCase {
        name: "calculator".into(),
        source: MOTIVATING_SOURCE.into(),
        fixed_source: MOTIVATING_FIXED_SOURCE.into(),
        tests,
        faults: vec!["S9".into()],
        expected: expectations(),
    }
}
