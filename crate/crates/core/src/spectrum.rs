//! Test verdicts, the test-by-statement spectrum matrix, and the four
//! coverage counts that every suspiciousness formula is built from.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }
}

/// How the rows of a spectrum were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    /// Row = every statement the test executed.
    Coverage,
    /// Row = statements in the backward dynamic slice of the output(s).
    #[default]
    Slice,
}

impl fmt::Display for SpectrumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumMode::Coverage => f.write_str("coverage"),
            SpectrumMode::Slice => f.write_str("slice"),
        }
    }
}

/// Expected output as written in a suite file: a single integer or a list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum ExpectedRepr {
    One(i64),
    Many(Vec<i64>),
}

fn de_expected<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<i64>, D::Error> {
    Ok(match ExpectedRepr::deserialize(d)? {
        ExpectedRepr::One(v) => vec![v],
        ExpectedRepr::Many(v) => v,
    })
}

fn ser_expected<S: serde::Serializer>(v: &[i64], s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.len() == 1 {
        s.serialize_i64(v[0])
    } else {
        v.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub inputs: BTreeMap<String, i64>,
    #[serde(deserialize_with = "de_expected", serialize_with = "ser_expected")]
    pub expected: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub crashed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

impl TestCase {
    pub fn new(id: impl Into<String>, inputs: BTreeMap<String, i64>, expected: Vec<i64>) -> Self {
        TestCase {
            id: id.into(),
            inputs,
            expected,
            observed: None,
            crashed: false,
            verdict: None,
        }
    }
}

/// Assigns a verdict to each executed test: fail iff the observed output
/// differs from the expected one or the run crashed.
pub fn classify_tests(suite: Vec<TestCase>) -> Result<Vec<TestCase>> {
    let mut seen = HashSet::new();
    suite
        .into_iter()
        .map(|mut tc| {
            if !seen.insert(tc.id.clone()) {
                return Err(Error::Input(format!("duplicate test id `{}`", tc.id)));
            }
            if tc.expected.is_empty() {
                return Err(Error::Input(format!(
                    "test `{}` has no expected output",
                    tc.id
                )));
            }
            let verdict = if tc.crashed {
                Verdict::Fail
            } else {
                match &tc.observed {
                    Some(obs) if *obs == tc.expected => Verdict::Pass,
                    Some(_) => Verdict::Fail,
                    None => {
                        return Err(Error::Input(format!(
                            "test `{}` has neither an observed output nor a crash flag",
                            tc.id
                        )))
                    }
                }
            };
            tc.verdict = Some(verdict);
            Ok(tc)
        })
        .collect()
}

/// Boolean test x statement matrix plus per-test verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceSpectrum {
    statements: Vec<String>,
    tests: Vec<String>,
    matrix: Vec<Vec<bool>>,
    verdicts: Vec<Verdict>,
    mode: SpectrumMode,
}

impl SliceSpectrum {
    pub fn new(
        statements: Vec<String>,
        tests: Vec<String>,
        matrix: Vec<Vec<bool>>,
        verdicts: Vec<Verdict>,
        mode: SpectrumMode,
    ) -> Result<Self> {
        if tests.len() != matrix.len() || tests.len() != verdicts.len() {
            return Err(Error::Spectrum(format!(
                "{} tests but {} matrix rows and {} verdicts",
                tests.len(),
                matrix.len(),
                verdicts.len()
            )));
        }
        for (id, row) in tests.iter().zip(&matrix) {
            if row.len() != statements.len() {
                return Err(Error::Spectrum(format!(
                    "row for test `{id}` has {} entries, expected {}",
                    row.len(),
                    statements.len()
                )));
            }
        }
        check_unique(&statements, "statement")?;
        check_unique(&tests, "test")?;
        Ok(SliceSpectrum {
            statements,
            tests,
            matrix,
            verdicts,
            mode,
        })
    }

    pub fn statements(&self) -> &[String] {
        &self.statements
    }

    pub fn tests(&self) -> &[String] {
        &self.tests
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    pub fn matrix(&self) -> &[Vec<bool>] {
        &self.matrix
    }

    pub fn mode(&self) -> SpectrumMode {
        self.mode
    }

    pub fn num_tests(&self) -> usize {
        self.tests.len()
    }

    pub fn num_statements(&self) -> usize {
        self.statements.len()
    }

    pub fn index_of(&self, statement: &str) -> Option<usize> {
        self.statements.iter().position(|s| s == statement)
    }

    pub fn require_index(&self, statement: &str) -> Result<usize> {
        self.index_of(statement)
            .ok_or_else(|| Error::UnknownStatement(statement.to_string()))
    }

    pub fn column(&self, idx: usize) -> Vec<bool> {
        self.matrix.iter().map(|row| row[idx]).collect()
    }

    /// Failure indicator per test, the `Out` variable.
    pub fn outcomes(&self) -> Vec<bool> {
        self.verdicts.iter().map(|v| v.is_fail()).collect()
    }

    pub fn num_failing(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_fail()).count()
    }

    /// Pipeline entry guard.
    pub fn require_failing(&self) -> Result<()> {
        if self.num_failing() == 0 {
            Err(Error::NoFailingTests)
        } else {
            Ok(())
        }
    }

    pub fn is_constant_column(&self, idx: usize) -> bool {
        let mut it = self.matrix.iter().map(|row| row[idx]);
        match it.next() {
            Some(first) => it.all(|v| v == first),
            None => true,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Spectrum(msg) => Error::Spectrum(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SpectrumFile =
            serde_json::from_str(text).map_err(|e| Error::Spectrum(e.to_string()))?;
        let mut matrix = Vec::with_capacity(raw.matrix.len());
        for (i, row) in raw.matrix.iter().enumerate() {
            let id = raw.tests.get(i).map(|t| t.id.as_str()).unwrap_or("?");
            let bits = row
                .iter()
                .map(|&b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(Error::Spectrum(format!(
                        "row for test `{id}` contains {other}; entries must be 0 or 1"
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            matrix.push(bits);
        }
        let (tests, verdicts) = raw.tests.into_iter().map(|t| (t.id, t.verdict)).unzip();
        SliceSpectrum::new(raw.statements, tests, matrix, verdicts, raw.mode)
    }

    pub fn to_json(&self) -> String {
        let raw = SpectrumFile {
            statements: self.statements.clone(),
            tests: self
                .tests
                .iter()
                .zip(&self.verdicts)
                .map(|(id, &verdict)| TestEntry {
                    id: id.clone(),
                    verdict,
                })
                .collect(),
            matrix: self
                .matrix
                .iter()
                .map(|row| row.iter().map(|&b| b as u8).collect())
                .collect(),
            mode: self.mode,
        };
        let mut out = serde_json::to_string_pretty(&raw).expect("spectrum serializes");
        out.push('\n');
        out
    }
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::Spectrum(format!("duplicate {what} id `{id}`")));
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct TestEntry {
    id: String,
    verdict: Verdict,
}

#[derive(Serialize, Deserialize)]
struct SpectrumFile {
    statements: Vec<String>,
    tests: Vec<TestEntry>,
    matrix: Vec<Vec<u8>>,
    mode: SpectrumMode,
}

/// Per-statement coverage counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    /// failing tests covering the statement
    pub ncf: usize,
    /// failing tests not covering it
    pub nuf: usize,
    /// passing tests covering it
    pub ncp: usize,
    /// passing tests not covering it
    pub nup: usize,
}

impl Counts {
    pub fn nf(&self) -> usize {
        self.ncf + self.nuf
    }

    pub fn np(&self) -> usize {
        self.ncp + self.nup
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectrumStats {
    pub statements: Vec<String>,
    pub counts: Vec<Counts>,
    pub nf: usize,
    pub np: usize,
}

impl SpectrumStats {
    pub fn get(&self, statement: &str) -> Option<&Counts> {
        self.statements
            .iter()
            .position(|s| s == statement)
            .map(|i| &self.counts[i])
    }
}

pub fn build_stats(spectrum: &SliceSpectrum) -> Result<SpectrumStats> {
    spectrum.require_failing()?;
    let mut counts = vec![Counts::default(); spectrum.num_statements()];
    for (row, verdict) in spectrum.matrix.iter().zip(&spectrum.verdicts) {
        for (c, &covered) in counts.iter_mut().zip(row) {
            match (verdict.is_fail(), covered) {
                (true, true) => c.ncf += 1,
                (true, false) => c.nuf += 1,
                (false, true) => c.ncp += 1,
                (false, false) => c.nup += 1,
            }
        }
    }
    let nf = spectrum.num_failing();
    Ok(SpectrumStats {
        statements: spectrum.statements.clone(),
        counts,
        nf,
        np: spectrum.num_tests() - nf,
    })
}
