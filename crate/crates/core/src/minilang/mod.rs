//! A small imperative language with a tracing interpreter. It stands in
//! for binary instrumentation: running a test yields coverage, a dynamic
//! dependence graph, and from that the backward slices that populate a
//! slice spectrum.

mod ast;
mod parser;
mod pdg;
mod slice;
mod trace;

use std::collections::BTreeSet;

pub use ast::{BinOp, Expr, Program, Statement, StatementKind, StmtKind, UnOp};
pub use parser::parse;
pub use pdg::{static_pdg, PdgEdge, StaticPdg};
pub use slice::{backward_slice, backward_slice_union, BackwardDynamicSlice};
pub use trace::{
    run_with_trace, CrashReason, DepKind, DynamicDependenceGraph, ExportEdge, ExportNode,
    GraphExport, Instance, OutputEvent, Termination, Trace, DEFAULT_STEP_LIMIT,
};

use crate::error::{Error, Result};
use crate::spectrum::{classify_tests, SliceSpectrum, SpectrumMode, TestCase, Verdict};

/// A classified test together with the trace it produced.
#[derive(Debug, Clone)]
pub struct ExecutedTest {
    pub case: TestCase,
    pub trace: Trace,
}

impl ExecutedTest {
    pub fn verdict(&self) -> Verdict {
        self.case.verdict.expect("executed tests are classified")
    }

    /// DDG instances the slice for this test starts from.
    ///
    /// Passing runs slice from every output instance. Failing runs slice
    /// from every output whose value mismatches the expected one at the same
    /// position, plus the crashing instance. If neither exists, they fall back
    /// to all outputs, then to the last executed instance.
    pub fn slice_roots(&self) -> Vec<usize> {
        let outputs = &self.trace.outputs;
        let all: Vec<usize> = outputs.iter().map(|o| o.instance).collect();
        if self.verdict() == Verdict::Pass {
            return all;
        }
        let mut roots: Vec<usize> = outputs
            .iter()
            .enumerate()
            .filter(|(k, o)| self.case.expected.get(*k) != Some(&o.value))
            .map(|(_, o)| o.instance)
            .collect();
        match &self.trace.termination {
            Termination::Crash {
                instance: Some(n), ..
            } => roots.push(*n),
            Termination::Crash { instance: None, .. } if !self.trace.ddg.is_empty() => {
                roots.push(self.trace.ddg.len() - 1)
            }
            _ => {}
        }
        if roots.is_empty() {
            roots = all;
        }
        if roots.is_empty() && !self.trace.ddg.is_empty() {
            roots.push(self.trace.ddg.len() - 1);
        }
        roots
    }

    /// Statement indices in the union of backward slices from the roots.
    pub fn slice_statements(&self) -> BTreeSet<usize> {
        let roots = self.slice_roots();
        backward_slice_union(&self.trace.ddg, &roots)
            .map(|s| s.statements)
            .unwrap_or_default()
    }
}

/// Runs every test, records observed outputs and assigns verdicts.
pub fn execute_suite(
    program: &Program,
    suite: &[TestCase],
    step_limit: usize,
) -> Result<Vec<ExecutedTest>> {
    let mut traces = Vec::with_capacity(suite.len());
    let mut cases = Vec::with_capacity(suite.len());
    for tc in suite {
        let trace = run_with_trace(program, &tc.inputs, step_limit)?;
        let mut case = tc.clone();
        case.observed = Some(trace.output_values());
        case.crashed = trace.crashed();
        cases.push(case);
        traces.push(trace);
    }
    let cases = classify_tests(cases)?;
    Ok(cases
        .into_iter()
        .zip(traces)
        .map(|(case, trace)| ExecutedTest { case, trace })
        .collect())
}

pub fn build_slice_spectrum(
    program: &Program,
    executed: &[ExecutedTest],
    mode: SpectrumMode,
) -> Result<SliceSpectrum> {
    if !program.has_output() {
        return Err(Error::NoOutputStatement);
    }
    let mut matrix = Vec::with_capacity(executed.len());
    for t in executed {
        let members = match mode {
            SpectrumMode::Coverage => t.trace.covered.clone(),
            SpectrumMode::Slice => t.slice_statements(),
        };
        matrix.push((0..program.len()).map(|i| members.contains(&i)).collect());
    }
    SliceSpectrum::new(
        program.ids(),
        executed.iter().map(|t| t.case.id.clone()).collect(),
        matrix,
        executed.iter().map(|t| t.verdict()).collect(),
        mode,
    )
}
