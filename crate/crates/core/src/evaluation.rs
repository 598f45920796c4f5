//! Baseline suspiciousness formulas, ranked reports and the metrics used to
//! compare techniques.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::causal::{rank_chains, CausalEffect};
use crate::corpus::FaultBundle;
use crate::error::{Error, Result};
use crate::minilang::{execute_suite, ExecutedTest, Program, DEFAULT_STEP_LIMIT};
use crate::selection::{CauseEffectChain, SelectionOutcome};
use crate::spectrum::{build_stats, Counts, SliceSpectrum, SpectrumStats, Verdict};

const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Inference,
    Ochiai,
    O,
    Gp19,
    Dstar,
}

impl Technique {
    pub const ALL: [Technique; 5] = [
        Technique::Inference,
        Technique::Ochiai,
        Technique::O,
        Technique::Gp19,
        Technique::Dstar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Inference => "inference",
            Technique::Ochiai => "ochiai",
            Technique::O => "o",
            Technique::Gp19 => "gp19",
            Technique::Dstar => "dstar",
        }
    }

    /// Score of a baseline formula; `None` for the inference pipeline.
    pub fn baseline_score(self, c: &Counts, nf: usize) -> Option<f64> {
        match self {
            Technique::Inference => None,
            Technique::Ochiai => Some(ochiai_counts(c, nf)),
            Technique::O => Some(o_counts(c)),
            Technique::Gp19 => Some(gp19_counts(c)),
            Technique::Dstar => Some(dstar_counts(c, 2)),
        }
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Technique::ALL
            .into_iter()
            .find(|t| t.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                Error::Input(format!(
                    "unknown technique `{s}` (expected inference, ochiai, o, gp19 or dstar)"
                ))
            })
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn ochiai_counts(c: &Counts, nf: usize) -> f64 {
    let denom = ((nf * (c.ncf + c.ncp)) as f64).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        c.ncf as f64 / denom
    }
}

pub fn o_counts(c: &Counts) -> f64 {
    if c.nuf > 0 {
        -1.0
    } else {
        c.nup as f64
    }
}

pub fn gp19_counts(c: &Counts) -> f64 {
    let radicand = c.ncp as f64 - c.ncf as f64 + c.nuf as f64 - c.nup as f64;
    c.ncf as f64 * radicand.abs().sqrt()
}

pub fn dstar_counts(c: &Counts, star: i32) -> f64 {
    let num = (c.ncf as f64).powi(star);
    let denom = (c.nuf + c.ncp) as f64;
    if denom == 0.0 {
        if c.ncf > 0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        num / denom
    }
}

fn counts<'a>(stats: &'a SpectrumStats, s: &str) -> Result<&'a Counts> {
    stats
        .get(s)
        .ok_or_else(|| Error::UnknownStatement(s.to_string()))
}

pub fn ochiai(stats: &SpectrumStats, s: &str) -> Result<f64> {
    Ok(ochiai_counts(counts(stats, s)?, stats.nf))
}

pub fn o_score(stats: &SpectrumStats, s: &str) -> Result<f64> {
    Ok(o_counts(counts(stats, s)?))
}

pub fn gp19(stats: &SpectrumStats, s: &str) -> Result<f64> {
    Ok(gp19_counts(counts(stats, s)?))
}

pub fn dstar(stats: &SpectrumStats, s: &str, star: i32) -> Result<f64> {
    Ok(dstar_counts(counts(stats, s)?, star))
}

fn serialize_score<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEntry {
    pub statement: String,
    #[serde(serialize_with = "serialize_score")]
    pub score: f64,
    /// 1 for statements ranked by their causal effect, 2 for the rest.
    pub tier: u8,
    /// Index into the report's tie groups.
    pub tie_group: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedReport {
    pub technique: Technique,
    pub entries: Vec<RankedEntry>,
    pub tie_groups: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub chains: Vec<CauseEffectChain>,
}

impl RankedReport {
    /// Orders `(statement, score, tier)` triples by tier, then score
    /// descending, then source order, and groups equal scores within a tier.
    pub fn from_scores(
        technique: Technique,
        scores: Vec<(String, f64, u8)>,
        source_order: &[String],
    ) -> Result<Self> {
        let pos: BTreeMap<&str, usize> = source_order
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut keyed = Vec::with_capacity(scores.len());
        for (s, v, tier) in scores {
            if v.is_nan() {
                return Err(Error::Input(format!("score of `{s}` is NaN")));
            }
            let p = *pos
                .get(s.as_str())
                .ok_or_else(|| Error::UnknownStatement(s.clone()))?;
            keyed.push((tier, v + 0.0, p, s));
        }
        keyed.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then_with(|| {
                    if same_score(a.1, b.1) {
                        std::cmp::Ordering::Equal
                    } else {
                        b.1.total_cmp(&a.1)
                    }
                })
                .then(a.2.cmp(&b.2))
        });
        let mut entries: Vec<RankedEntry> = Vec::with_capacity(keyed.len());
        let mut tie_groups: Vec<Vec<String>> = Vec::new();
        for (tier, score, _, statement) in keyed {
            let joins = entries
                .last()
                .is_some_and(|prev| prev.tier == tier && same_score(prev.score, score));
            if !joins {
                tie_groups.push(Vec::new());
            }
            tie_groups
                .last_mut()
                .expect("pushed")
                .push(statement.clone());
            entries.push(RankedEntry {
                statement,
                score,
                tier,
                tie_group: tie_groups.len() - 1,
            });
        }
        Ok(RankedReport {
            technique,
            entries,
            tie_groups,
            chains: Vec::new(),
        })
    }

    pub fn statements(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.statement.as_str())
    }

    pub fn position(&self, statement: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.statement == statement)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn same_score(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_EPS
}

pub fn baseline_report(spectrum: &SliceSpectrum, technique: Technique) -> Result<RankedReport> {
    let stats = build_stats(spectrum)?;
    let scores = stats
        .statements
        .iter()
        .zip(&stats.counts)
        .map(|(s, c)| {
            technique
                .baseline_score(c, stats.nf)
                .map(|v| (s.clone(), v, 1))
                .ok_or_else(|| Error::Input(format!("`{technique}` is not a baseline formula")))
        })
        .collect::<Result<Vec<_>>>()?;
    RankedReport::from_scores(technique, scores, spectrum.statements())
}

/// Tier 1 holds the selected statements ordered by effect; tier 2 holds the
/// others ordered by `R(s, Out) * RC(s)`.
pub fn assemble_report(
    selection: &SelectionOutcome,
    effects: &BTreeMap<String, CausalEffect>,
    spectrum: &SliceSpectrum,
) -> Result<RankedReport> {
    let selected: BTreeSet<&str> = selection.selected.iter().map(String::as_str).collect();
    let mut scores = Vec::with_capacity(spectrum.num_statements());
    for s in spectrum.statements() {
        if selected.contains(s.as_str()) {
            let e = effects
                .get(s)
                .ok_or_else(|| Error::UnknownStatement(s.clone()))?;
            scores.push((s.clone(), e.tau_hat, 1));
        } else {
            let r = selection.relevance.get(s).copied().unwrap_or(0.0);
            let rc = selection.relevance_class.get(s).copied().unwrap_or(-1.0);
            scores.push((s.clone(), r * rc, 2));
        }
    }
    let mut report =
        RankedReport::from_scores(Technique::Inference, scores, spectrum.statements())?;
    report.chains = rank_chains(selection.chains.clone(), effects, spectrum.statements())?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExamMode {
    Best,
    Worst,
}

/// Statements a developer inspects, walking the ranking, before reaching a
/// faulty one. Ties are resolved optimistically (`Best`) or pessimistically
/// (`Worst`).
pub fn statements_examined(
    report: &RankedReport,
    faulty: &BTreeSet<String>,
    mode: ExamMode,
) -> Result<usize> {
    if faulty.is_empty() {
        return Err(Error::Input("no faulty statements given".into()));
    }
    if let Some(missing) = faulty.iter().find(|f| report.position(f).is_none()) {
        return Err(Error::UnknownStatement(missing.clone()));
    }
    let mut above = 0;
    for group in &report.tie_groups {
        let hits = group.iter().filter(|s| faulty.contains(*s)).count();
        if hits > 0 {
            return Ok(match mode {
                ExamMode::Best => above + 1,
                ExamMode::Worst => above + group.len() - hits + 1,
            });
        }
        above += group.len();
    }
    unreachable!("every faulty statement is in the report")
}

/// EXAM score as a percentage of the report length.
pub fn exam_score(report: &RankedReport, faulty: &BTreeSet<String>, mode: ExamMode) -> Result<f64> {
    let n = statements_examined(report, faulty, mode)?;
    Ok(100.0 * n as f64 / report.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Precision and recall of the union of chain members against the
/// infected-statement ground truth.
pub fn chain_prf(chains: &[CauseEffectChain], truth: &BTreeSet<String>) -> Result<Prf> {
    if truth.is_empty() {
        return Err(Error::Input("empty chain ground truth".into()));
    }
    let members: BTreeSet<&str> = chains
        .iter()
        .flat_map(|c| c.members.iter().map(String::as_str))
        .collect();
    if members.is_empty() {
        return Ok(Prf {
            precision: 0.0,
            recall: 0.0,
            f_measure: 0.0,
        });
    }
    let hit = members.iter().filter(|m| truth.contains(**m)).count() as f64;
    let precision = hit / members.len() as f64;
    let recall = hit / truth.len() as f64;
    let f_measure = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Prf {
        precision,
        recall,
        f_measure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpenseStep {
    pub iteration: usize,
    /// Failing tests before the fix of this round.
    pub failing: usize,
    pub active_faults: Vec<String>,
    /// The first active fault reached in the ranking, fixed this round.
    pub fixed: String,
    pub exam_best: f64,
    pub exam_worst: f64,
}

/// One-fault-at-a-time protocol: localize, fix the first fault the ranking
/// reaches, re-run the suite, and repeat until every test passes.
pub fn expense_iterate<L>(bundle: &FaultBundle, mut localize: L) -> Result<Vec<ExpenseStep>>
where
    L: FnMut(&Program, &[ExecutedTest]) -> Result<RankedReport>,
{
    let mut active: Vec<usize> = (0..bundle.faults.len()).collect();
    let mut steps = Vec::new();
    loop {
        let program = bundle.variant(&active)?;
        let executed = execute_suite(&program, &bundle.tests, DEFAULT_STEP_LIMIT)?;
        let failing = executed
            .iter()
            .filter(|t| t.verdict() == Verdict::Fail)
            .count();
        if failing == 0 {
            break;
        }
        if active.is_empty() {
            return Err(Error::Precondition(format!(
                "bundle `{}` still fails {failing} tests with every fault fixed",
                bundle.name
            )));
        }
        let report = localize(&program, &executed)?;
        let faulty: BTreeSet<String> = active
            .iter()
            .map(|&k| bundle.faults[k].statement.clone())
            .collect();
        let first = report
            .statements()
            .find(|s| faulty.contains(*s))
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "ranking for `{}` never reaches a seeded fault",
                    bundle.name
                ))
            })?
            .to_string();
        steps.push(ExpenseStep {
            iteration: steps.len() + 1,
            failing,
            active_faults: faulty.iter().cloned().collect(),
            exam_best: exam_score(&report, &faulty, ExamMode::Best)?,
            exam_worst: exam_score(&report, &faulty, ExamMode::Worst)?,
            fixed: first.clone(),
        });
        active.retain(|&k| bundle.faults[k].statement != first);
    }
    Ok(steps)
}
