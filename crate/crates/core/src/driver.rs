//! End-to-end commands: trace, localize, evaluate and corpus generation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::causal::{estimate_effects, CausalConfig, CausalEffect, MatchingStrategy};
use crate::corpus::{generate_corpus, load_corpus, write_corpus, CorpusCase, Expectations};
use crate::error::{Error, Result};
use crate::evaluation::{
    assemble_report, baseline_report, chain_prf, exam_score, expense_iterate, statements_examined,
    ExamMode, ExpenseStep, Prf, RankedReport, Technique,
};
use crate::infotheory::{conditional_mutual_information, entropy, mutual_information, Phi};
use crate::minilang::{
    build_slice_spectrum, execute_suite, parse, static_pdg, ExecutedTest, GraphExport, Program,
    StaticPdg, DEFAULT_STEP_LIMIT,
};
use crate::selection::{run_selection, SelectionConfig, SelectionOutcome};
use crate::spectrum::{build_stats, SliceSpectrum, SpectrumMode, TestCase, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    /// Spectrum used when a case does not say otherwise.
    pub mode: SpectrumMode,
    pub phi: Phi,
    pub delta_fraction: f64,
    pub chain_cap: usize,
    pub matching: MatchingStrategy,
    pub ridge: f64,
    pub caliper: f64,
    pub techniques: Vec<Technique>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: SpectrumMode::Slice,
            phi: Phi::Shannon,
            delta_fraction: 0.30,
            chain_cap: 5,
            matching: MatchingStrategy::Nearest,
            ridge: 1e-4,
            caliper: 0.2,
            techniques: Technique::ALL.to_vec(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_fraction > 0.0 && self.delta_fraction <= 1.0) {
            return Err(Error::Input(format!(
                "--delta-fraction must lie in (0, 1], got {}",
                self.delta_fraction
            )));
        }
        if self.chain_cap == 0 {
            return Err(Error::Input("--chain-cap must be at least 1".into()));
        }
        if let Phi::Tsallis { q } = self.phi {
            if !(q > 0.0) || q == 1.0 {
                return Err(Error::Input(format!(
                    "tsallis q must be positive and not 1, got {q}"
                )));
            }
        }
        self.causal().validate()
    }

    pub fn selection(&self) -> SelectionConfig {
        SelectionConfig {
            delta_fraction: self.delta_fraction,
            chain_cap: self.chain_cap,
            entropy: crate::infotheory::EntropyConfig::with_phi(self.phi),
        }
    }

    pub fn causal(&self) -> CausalConfig {
        CausalConfig {
            matching: self.matching,
            ridge: self.ridge,
            caliper: self.caliper,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_program(path: &Path) -> Result<Program> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text).map_err(|e| match e {
        Error::Syntax { .. } | Error::UseBeforeDefinition { .. } | Error::Type { .. } => {
            Error::Input(format!("{}: {e}", path.display()))
        }
        other => other,
    })
}

pub fn load_tests(path: &Path) -> Result<Vec<TestCase>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

pub fn load_priors(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// Everything the trace step derives from a program and its suite.
#[derive(Debug, Clone)]
pub struct TraceArtifacts {
    pub program: Program,
    pub executed: Vec<ExecutedTest>,
    pub coverage: SliceSpectrum,
    pub slice: SliceSpectrum,
    pub pdg: StaticPdg,
}

impl TraceArtifacts {
    pub fn spectrum(&self, mode: SpectrumMode) -> &SliceSpectrum {
        match mode {
            SpectrumMode::Coverage => &self.coverage,
            SpectrumMode::Slice => &self.slice,
        }
    }

    pub fn failing(&self) -> usize {
        self.executed
            .iter()
            .filter(|t| t.verdict() == Verdict::Fail)
            .count()
    }
}

pub fn trace_program(program: &Program, tests: &[TestCase]) -> Result<TraceArtifacts> {
    let executed = execute_suite(program, tests, DEFAULT_STEP_LIMIT)?;
    Ok(TraceArtifacts {
        coverage: build_slice_spectrum(program, &executed, SpectrumMode::Coverage)?,
        slice: build_slice_spectrum(program, &executed, SpectrumMode::Slice)?,
        pdg: static_pdg(program),
        program: program.clone(),
        executed,
    })
}

#[derive(Debug, Serialize)]
struct VerdictRow<'a> {
    id: &'a str,
    verdict: Verdict,
    observed: &'a [i64],
    expected: &'a [i64],
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    crashed: bool,
}

/// Writes `coverage.json`, `slice.json`, `pdg.json` and `verdicts.json`
/// (plus `ddg.json` when asked) into `out`.
pub fn cmd_trace(program: &Path, tests: &Path, out: &Path, ddg: bool) -> Result<TraceArtifacts> {
    let p = load_program(program)?;
    let suite = load_tests(tests)?;
    let t = trace_program(&p, &suite)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    t.coverage.save(out.join("coverage.json"))?;
    t.slice.save(out.join("slice.json"))?;
    t.pdg.save(out.join("pdg.json"))?;
    let verdicts: Vec<VerdictRow> = t
        .executed
        .iter()
        .map(|e| VerdictRow {
            id: &e.case.id,
            verdict: e.verdict(),
            observed: e.case.observed.as_deref().unwrap_or(&[]),
            expected: &e.case.expected,
            crashed: e.case.crashed,
        })
        .collect();
    write_file(&out.join("verdicts.json"), &to_json(&verdicts))?;
    if ddg {
        let graphs: Vec<GraphExport> = t
            .executed
            .iter()
            .map(|e| e.trace.ddg.to_export(&p, Some(&e.case.id)))
            .collect();
        write_file(&out.join("ddg.json"), &to_json(&graphs))?;
    }
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct InferenceResult {
    pub selection: SelectionOutcome,
    pub effects: BTreeMap<String, CausalEffect>,
    pub report: RankedReport,
}

/// Selection on `selection_spectrum`, effects of the selected statements on
/// `effect_spectrum`, then the tiered report.
pub fn run_inference(
    selection_spectrum: &SliceSpectrum,
    effect_spectrum: &SliceSpectrum,
    pdg: &StaticPdg,
    priors: Option<&BTreeMap<String, f64>>,
    cfg: &PipelineConfig,
) -> Result<InferenceResult> {
    cfg.validate()?;
    if selection_spectrum.statements() != effect_spectrum.statements()
        || selection_spectrum.tests() != effect_spectrum.tests()
    {
        return Err(Error::Input(
            "selection and effect spectra cover different statements or tests".into(),
        ));
    }
    let selection = run_selection(selection_spectrum, pdg, priors, &cfg.selection())?;
    let effects = estimate_effects(&selection.selected, pdg, effect_spectrum, &cfg.causal())?;
    let report = assemble_report(&selection, &effects, selection_spectrum)?;
    Ok(InferenceResult {
        selection,
        effects,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizeReport {
    pub config: PipelineConfig,
    pub technique: Technique,
    pub selection_mode: SpectrumMode,
    pub effect_mode: SpectrumMode,
    pub ranking: RankedReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effects: Option<BTreeMap<String, CausalEffect>>,
}

impl LocalizeReport {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "technique: {}", self.technique);
        let _ = writeln!(
            s,
            "{:<6} {:<8} {:>12} {:>5} {:>5}",
            "rank", "stmt", "score", "tier", "tie"
        );
        for (k, e) in self.ranking.entries.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:<6} {:<8} {:>12} {:>5} {:>5}",
                k + 1,
                e.statement,
                fmt_score(e.score),
                e.tier,
                e.tie_group + 1
            );
        }
        for (k, c) in self.ranking.chains.iter().enumerate() {
            let _ = writeln!(
                s,
                "chain {}: {} (effect {})",
                k + 1,
                c.members.join(" "),
                c.aggregate_effect.map_or("-".into(), fmt_score)
            );
        }
        s
    }
}

fn fmt_score(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.4}")
    }
}

pub fn localize(
    spectrum: &SliceSpectrum,
    effect_spectrum: Option<&SliceSpectrum>,
    pdg: &StaticPdg,
    priors: Option<&BTreeMap<String, f64>>,
    technique: Technique,
    cfg: &PipelineConfig,
) -> Result<LocalizeReport> {
    cfg.validate()?;
    spectrum.require_failing()?;
    let effect_spectrum = effect_spectrum.unwrap_or(spectrum);
    let mut report = LocalizeReport {
        config: cfg.clone(),
        technique,
        selection_mode: spectrum.mode(),
        effect_mode: effect_spectrum.mode(),
        ranking: RankedReport::from_scores(technique, Vec::new(), &[])?,
        selection: None,
        effects: None,
    };
    if technique == Technique::Inference {
        let r = run_inference(spectrum, effect_spectrum, pdg, priors, cfg)?;
        report.ranking = r.report;
        report.selection = Some(r.selection);
        report.effects = Some(r.effects);
    } else {
        report.ranking = baseline_report(spectrum, technique)?;
        report.effect_mode = spectrum.mode();
    }
    Ok(report)
}

pub struct LocalizeArgs<'a> {
    pub spectrum: &'a Path,
    pub pdg: &'a Path,
    pub effect_spectrum: Option<&'a Path>,
    pub prior_file: Option<&'a Path>,
    pub technique: Technique,
    pub out: Option<&'a Path>,
    pub text: bool,
}

/// Runs localization from files. Returns the rendered report, which is also
/// written to `out` when given.
pub fn cmd_localize(args: &LocalizeArgs<'_>, cfg: &PipelineConfig) -> Result<String> {
    let spectrum = SliceSpectrum::load(args.spectrum)?;
    let pdg = StaticPdg::load(args.pdg)?;
    let effect = args.effect_spectrum.map(SliceSpectrum::load).transpose()?;
    let priors = args.prior_file.map(load_priors).transpose()?;
    let report = localize(
        &spectrum,
        effect.as_ref(),
        &pdg,
        priors.as_ref(),
        args.technique,
        cfg,
    )?;
    let rendered = if args.text {
        report.to_text()
    } else {
        report.to_json()
    };
    if let Some(out) = args.out {
        write_file(out, &rendered)?;
    }
    Ok(rendered)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpectationFailure {
    pub quantity: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ExpectationCheck {
    pub checked: usize,
    pub passed: usize,
    pub failures: Vec<ExpectationFailure>,
}

impl ExpectationCheck {
    fn record(&mut self, quantity: String, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(ExpectationFailure {
                quantity,
                detail: detail(),
            });
        }
    }
}

fn selection_mode(expected: &Expectations, cfg: &PipelineConfig) -> SpectrumMode {
    expected.selection_mode.unwrap_or(cfg.mode)
}

fn effect_mode(expected: &Expectations, cfg: &PipelineConfig) -> SpectrumMode {
    expected.effect_mode.unwrap_or(cfg.mode)
}

fn lookup(
    quantity: &str,
    statement: &str,
    given: Option<&str>,
    trace: &TraceArtifacts,
    selection_spectrum: &SliceSpectrum,
    inference: &InferenceResult,
    cfg: &PipelineConfig,
) -> Result<Option<f64>> {
    let ent = cfg.selection().entropy;
    let col = |s: &str| -> Result<Vec<bool>> {
        Ok(selection_spectrum.column(selection_spectrum.require_index(s)?))
    };
    let iteration = |k: usize| inference.selection.iterations.get(k - 1);
    Ok(match (quantity, given) {
        ("ochiai" | "o" | "gp19" | "dstar", None) => {
            let stats = build_stats(&trace.coverage)?;
            let c = stats
                .get(statement)
                .ok_or_else(|| Error::UnknownStatement(statement.into()))?;
            quantity.parse::<Technique>()?.baseline_score(c, stats.nf)
        }
        ("relevance", None) => inference.selection.relevance.get(statement).copied(),
        ("relevance_class", None) => inference.selection.relevance_class.get(statement).copied(),
        ("j1" | "j2" | "j3", None) => iteration(quantity[1..].parse().unwrap_or(0))
            .and_then(|it| it.scores.iter().find(|(s, _)| s == statement).map(|x| x.1)),
        ("w1" | "w2" | "w3", None) => iteration(quantity[1..].parse().unwrap_or(0))
            .and_then(|it| it.weights.iter().find(|(s, _)| s == statement).map(|x| x.1)),
        ("cr", Some(g)) => inference
            .selection
            .iterations
            .iter()
            .find(|it| it.selected == g)
            .and_then(|it| {
                it.correlations
                    .iter()
                    .find(|r| r.i == statement)
                    .map(|r| r.cr)
            }),
        ("entropy", None) => Some(entropy(&col(statement)?, &ent)?),
        ("mi", None) => Some(mutual_information(
            &col(statement)?,
            &selection_spectrum.outcomes(),
            &ent,
        )?),
        ("cmi", Some(g)) => Some(conditional_mutual_information(
            &col(statement)?,
            &selection_spectrum.outcomes(),
            &col(g)?,
            &ent,
        )?),
        ("tau", None) => inference.effects.get(statement).map(|e| e.tau_hat),
        _ => {
            return Err(Error::Input(format!(
                "unknown expected quantity `{quantity}`"
            )))
        }
    })
}

/// Compares a case's computed values, orderings and chains against its
/// `expected.json`.
pub fn check_expectations(
    expected: &Expectations,
    trace: &TraceArtifacts,
    inference: &InferenceResult,
    cfg: &PipelineConfig,
) -> Result<ExpectationCheck> {
    let mut check = ExpectationCheck::default();
    let spectrum = trace.spectrum(selection_mode(expected, cfg));
    for v in &expected.values {
        let stmt = v.statement.as_deref().unwrap_or_default();
        let label = match &v.given {
            Some(g) => format!("{}({stmt}|{g})", v.quantity),
            None => format!("{}({stmt})", v.quantity),
        };
        let got = lookup(
            &v.quantity,
            stmt,
            v.given.as_deref(),
            trace,
            spectrum,
            inference,
            cfg,
        )?;
        let ok = got.is_some_and(|g| (g - v.value).abs() <= v.tolerance + 1e-12);
        check.record(label, ok, || match got {
            Some(g) => format!("expected {} +/- {}, got {g:.6}", v.value, v.tolerance),
            None => "no value computed".into(),
        });
    }
    for o in &expected.orderings {
        let got: Vec<String> = match o.quantity.as_str() {
            "selection" => inference.selection.selected.clone(),
            _ => inference.report.statements().map(str::to_string).collect(),
        };
        let ok = got.len() >= o.order.len() && got[..o.order.len()] == o.order[..];
        check.record(o.quantity.clone(), ok, || {
            format!("expected prefix {:?}, got {:?}", o.order, got)
        });
    }
    if !expected.chains.is_empty() {
        let got: Vec<BTreeSet<&str>> = inference
            .report
            .chains
            .iter()
            .map(|c| c.members.iter().map(String::as_str).collect())
            .collect();
        let want: Vec<BTreeSet<&str>> = expected
            .chains
            .iter()
            .map(|c| c.iter().map(String::as_str).collect())
            .collect();
        check.record("chains".into(), got == want, || {
            format!("expected {want:?}, got {got:?}")
        });
    }
    Ok(check)
}

#[derive(Debug, Clone, Serialize)]
pub struct TechniqueResult {
    pub technique: Technique,
    pub examined_best: usize,
    pub examined_worst: usize,
    pub exam_best: f64,
    pub exam_worst: f64,
    pub expense: Vec<ExpenseStep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub name: String,
    pub statements: usize,
    pub tests: usize,
    pub failing: usize,
    pub faults: Vec<String>,
    pub techniques: Vec<TechniqueResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chains: Option<Prf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectations: Option<ExpectationCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TechniqueSummary {
    pub technique: Technique,
    pub cases: usize,
    pub mean_examined_best: f64,
    pub mean_examined_worst: f64,
    pub mean_exam_best: f64,
    pub mean_exam_worst: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedCase {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationOutput {
    pub config: PipelineConfig,
    pub cases: Vec<CaseResult>,
    pub summary: Vec<TechniqueSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_chain_f_measure: Option<f64>,
    pub skipped: Vec<SkippedCase>,
}

fn technique_report(
    technique: Technique,
    trace: &TraceArtifacts,
    expected: &Expectations,
    cfg: &PipelineConfig,
) -> Result<RankedReport> {
    match technique {
        Technique::Inference => Ok(run_inference(
            trace.spectrum(selection_mode(expected, cfg)),
            trace.spectrum(effect_mode(expected, cfg)),
            &trace.pdg,
            None,
            cfg,
        )?
        .report),
        t => baseline_report(&trace.coverage, t),
    }
}

pub fn evaluate_case(case: &CorpusCase, cfg: &PipelineConfig) -> Result<CaseResult> {
    let trace = trace_program(&case.bundle.faulty, &case.bundle.tests)?;
    let failing = trace.failing();
    if failing == 0 {
        return Err(Error::NoFailingTests);
    }
    let faulty = case.bundle.fault_statements();
    let mut techniques = Vec::new();
    let mut chains = None;
    let mut expectations = None;
    for &t in &cfg.techniques {
        let report = if t == Technique::Inference {
            let inference = run_inference(
                trace.spectrum(selection_mode(&case.expected, cfg)),
                trace.spectrum(effect_mode(&case.expected, cfg)),
                &trace.pdg,
                None,
                cfg,
            )?;
            if !case.expected.chain_truth.is_empty() {
                let truth: BTreeSet<String> = case.expected.chain_truth.iter().cloned().collect();
                chains = Some(chain_prf(&inference.report.chains, &truth)?);
            }
            if !case.expected.values.is_empty()
                || !case.expected.orderings.is_empty()
                || !case.expected.chains.is_empty()
            {
                expectations = Some(check_expectations(&case.expected, &trace, &inference, cfg)?);
            }
            inference.report
        } else {
            baseline_report(&trace.coverage, t)?
        };
        let expense = expense_iterate(&case.bundle, |program, _| {
            let tr = trace_program(program, &case.bundle.tests)?;
            technique_report(t, &tr, &case.expected, cfg)
        })?;
        techniques.push(TechniqueResult {
            technique: t,
            examined_best: statements_examined(&report, &faulty, ExamMode::Best)?,
            examined_worst: statements_examined(&report, &faulty, ExamMode::Worst)?,
            exam_best: exam_score(&report, &faulty, ExamMode::Best)?,
            exam_worst: exam_score(&report, &faulty, ExamMode::Worst)?,
            expense,
        });
    }
    Ok(CaseResult {
        name: case.name.clone(),
        statements: case.bundle.faulty.len(),
        tests: case.bundle.tests.len(),
        failing,
        faults: faulty.into_iter().collect(),
        techniques,
        chains,
        expectations,
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn evaluate_cases(
    loaded: Vec<(String, Result<CorpusCase>)>,
    cfg: &PipelineConfig,
) -> Result<EvaluationOutput> {
    cfg.validate()?;
    let results: Vec<(String, Result<CaseResult>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = loaded
            .into_iter()
            .map(|(name, case)| {
                scope.spawn(move || {
                    let r = case.and_then(|c| evaluate_case(&c, cfg));
                    (name, r)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("evaluation worker panicked"))
            .collect()
    });
    let mut cases = Vec::new();
    let mut skipped = Vec::new();
    for (name, r) in results {
        match r {
            Ok(c) => cases.push(c),
            Err(e) => skipped.push(SkippedCase {
                name,
                reason: e.to_string(),
            }),
        }
    }
    if cases.is_empty() {
        return Err(Error::Input("no corpus case could be evaluated".into()));
    }
    let summary = cfg
        .techniques
        .iter()
        .map(|&t| {
            let rows: Vec<&TechniqueResult> = cases
                .iter()
                .filter_map(|c| c.techniques.iter().find(|r| r.technique == t))
                .collect();
            TechniqueSummary {
                technique: t,
                cases: rows.len(),
                mean_examined_best: mean(rows.iter().map(|r| r.examined_best as f64)),
                mean_examined_worst: mean(rows.iter().map(|r| r.examined_worst as f64)),
                mean_exam_best: mean(rows.iter().map(|r| r.exam_best)),
                mean_exam_worst: mean(rows.iter().map(|r| r.exam_worst)),
            }
        })
        .collect();
    let prfs: Vec<f64> = cases
        .iter()
        .filter_map(|c| c.chains.map(|p| p.f_measure))
        .collect();
    Ok(EvaluationOutput {
        config: cfg.clone(),
        mean_chain_f_measure: (!prfs.is_empty()).then(|| mean(prfs.into_iter())),
        cases,
        summary,
        skipped,
    })
}

impl EvaluationOutput {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    fn examined_table(&self, title: &str, pick: impl Fn(&TechniqueResult) -> f64) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{title}");
        let _ = write!(s, "{:<24}", "case");
        for t in &self.config.techniques {
            let _ = write!(s, " {:>10}", t.name());
        }
        s.push('\n');
        let cell = |c: &CaseResult, t: Technique| {
            c.techniques.iter().find(|r| r.technique == t).map(&pick)
        };
        for c in &self.cases {
            let _ = write!(s, "{:<24}", c.name);
            for &t in &self.config.techniques {
                match cell(c, t) {
                    Some(v) => {
                        let _ = write!(s, " {v:>10.2}");
                    }
                    None => {
                        let _ = write!(s, " {:>10}", "-");
                    }
                }
            }
            s.push('\n');
        }
        let _ = write!(s, "{:<24}", "mean");
        for &t in &self.config.techniques {
            let v = mean(self.cases.iter().filter_map(|c| cell(c, t)));
            let _ = write!(s, " {v:>10.2}");
        }
        s.push('\n');
        s
    }

    /// Plain-text tables: statements examined (best, worst), EXAM, chain
    /// scores, expectation checks and one-fault-at-a-time traces.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s += &self.examined_table("Average number of statements examined (best case)", |r| {
            r.examined_best as f64
        });
        s.push('\n');
        s += &self.examined_table("Average number of statements examined (worst case)", |r| {
            r.examined_worst as f64
        });
        s.push('\n');
        let _ = writeln!(s, "EXAM score (% of statements examined)");
        let _ = writeln!(
            s,
            "{:<12} {:>10} {:>10} {:>6}",
            "technique", "best", "worst", "cases"
        );
        for t in &self.summary {
            let _ = writeln!(
                s,
                "{:<12} {:>10.2} {:>10.2} {:>6}",
                t.technique.name(),
                t.mean_exam_best,
                t.mean_exam_worst,
                t.cases
            );
        }
        if self.cases.iter().any(|c| c.chains.is_some()) {
            s.push('\n');
            let _ = writeln!(s, "Cause-effect chains against infection paths");
            let _ = writeln!(
                s,
                "{:<24} {:>10} {:>10} {:>10}",
                "case", "precision", "recall", "f"
            );
            for c in &self.cases {
                if let Some(p) = c.chains {
                    let _ = writeln!(
                        s,
                        "{:<24} {:>10.3} {:>10.3} {:>10.3}",
                        c.name, p.precision, p.recall, p.f_measure
                    );
                }
            }
        }
        if self.cases.iter().any(|c| c.expectations.is_some()) {
            s.push('\n');
            let _ = writeln!(s, "Embedded expectations");
            for c in &self.cases {
                if let Some(e) = &c.expectations {
                    let _ = writeln!(s, "{:<24} {}/{} match", c.name, e.passed, e.checked);
                    for f in &e.failures {
                        let _ = writeln!(s, "  {}: {}", f.quantity, f.detail);
                    }
                }
            }
        }
        s.push('\n');
        let _ = writeln!(
            s,
            "One-fault-at-a-time (failing tests / EXAM best per iteration)"
        );
        for c in &self.cases {
            for r in &c.techniques {
                let steps: Vec<String> = r
                    .expense
                    .iter()
                    .map(|st| format!("{}:{}/{:.2}", st.fixed, st.failing, st.exam_best))
                    .collect();
                let _ = writeln!(
                    s,
                    "{:<24} {:<10} {}",
                    c.name,
                    r.technique.name(),
                    steps.join(" -> ")
                );
            }
        }
        for k in &self.skipped {
            let _ = writeln!(s, "skipped {}: {}", k.name, k.reason);
        }
        s
    }
}

pub struct EvaluateArgs<'a> {
    pub corpus: &'a Path,
    pub json: Option<&'a Path>,
    pub out: Option<&'a Path>,
}

/// Evaluates every case under the corpus directory. Returns the text table;
/// the JSON form goes to `json` when given.
pub fn cmd_evaluate(args: &EvaluateArgs<'_>, cfg: &PipelineConfig) -> Result<EvaluationOutput> {
    let loaded = load_corpus(args.corpus)?;
    for (name, r) in &loaded {
        if let Err(e) = r {
            eprintln!("warning: skipping case `{name}`: {e}");
        }
    }
    let output = evaluate_cases(loaded, cfg)?;
    if let Some(j) = args.json {
        write_file(j, &output.to_json())?;
    }
    if let Some(o) = args.out {
        write_file(o, &output.to_text())?;
    }
    Ok(output)
}

pub fn cmd_corpus_gen(out: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let cases = generate_corpus(seed)?;
    write_corpus(out, &cases)?;
    Ok(cases.iter().map(|c| out.join(&c.name)).collect())
}
