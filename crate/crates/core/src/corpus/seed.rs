//! Test-suite generation and mutation-based fault seeding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::programs::BaseProgram;
use crate::error::{Error, Result};
use crate::minilang::{
    parse, run_with_trace, BinOp, CrashReason, ExecutedTest, Expr, Program, StmtKind, Termination,
    UnOp,
};
use crate::spectrum::{TestCase, Verdict};

/// Step limit used while screening generated inputs and mutants. Anything
/// that survives it finishes well under the interpreter's default limit.
pub const SCREEN_STEP_LIMIT: usize = 100_000;
const MAX_BUNDLE_ATTEMPTS: usize = 200;
const MAX_FAULT_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    WrongVariable,
    WrongOperator,
    WrongConstant,
    NegatedPredicate,
}

impl MutationKind {
    pub const ALL: [MutationKind; 4] = [
        MutationKind::WrongVariable,
        MutationKind::WrongOperator,
        MutationKind::WrongConstant,
        MutationKind::NegatedPredicate,
    ];

    fn name(self) -> &'static str {
        match self {
            MutationKind::WrongVariable => "wrong-variable",
            MutationKind::WrongOperator => "wrong-operator",
            MutationKind::WrongConstant => "wrong-constant",
            MutationKind::NegatedPredicate => "negated-predicate",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MutationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown mutation kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fault {
    pub statement: String,
    pub kind: MutationKind,
    /// Expression before and after mutation, as source text.
    pub original: String,
    pub mutated: String,
}

/// A base program, its seeded faults and the suite whose expected outputs
/// come from the base.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultBundle {
    pub name: String,
    pub base: Program,
    /// The base with every fault applied.
    pub faulty: Program,
    pub faults: Vec<Fault>,
    pub tests: Vec<TestCase>,
}

impl FaultBundle {
    /// The base with the faults at the given positions applied.
    pub fn variant(&self, active: &[usize]) -> Result<Program> {
        let mut p = self.base.clone();
        for &k in active {
            let f = self
                .faults
                .get(k)
                .ok_or_else(|| Error::Input(format!("bundle has no fault #{k}")))?;
            let idx = self
                .base
                .index_of(&f.statement)
                .ok_or_else(|| Error::UnknownStatement(f.statement.clone()))?;
            let expr = self.faulty.statements()[idx]
                .kind
                .expr()
                .ok_or_else(|| Error::Input(format!("{} has no expression", f.statement)))?
                .clone();
            p = p.with_expr(idx, expr);
        }
        Ok(p)
    }

    /// Every fault except `k` applied.
    pub fn fixed_variant(&self, k: usize) -> Result<Program> {
        let rest: Vec<usize> = (0..self.faults.len()).filter(|&j| j != k).collect();
        self.variant(&rest)
    }

    pub fn fault_statements(&self) -> BTreeSet<String> {
        self.faults.iter().map(|f| f.statement.clone()).collect()
    }
}

enum Run {
    Outputs(Vec<i64>),
    Crash,
    StepLimit,
}

fn run(program: &Program, inputs: &BTreeMap<String, i64>) -> Result<Run> {
    let t = run_with_trace(program, inputs, SCREEN_STEP_LIMIT)?;
    Ok(match t.termination {
        Termination::Normal => Run::Outputs(t.output_values()),
        Termination::Crash {
            reason: CrashReason::StepLimit(_),
            ..
        } => Run::StepLimit,
        Termination::Crash { .. } => Run::Crash,
    })
}

/// Boundary inputs (each variable at both ends of its range, the others at
/// their midpoint) followed by uniform random inputs. Inputs on which the
/// base crashes are skipped. Expected outputs are the base's outputs.
pub fn generate_suite(
    spec: &BaseProgram,
    base: &Program,
    size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<TestCase>> {
    let mid: Vec<i64> = spec
        .inputs
        .iter()
        .map(|&(_, lo, hi)| lo + (hi - lo) / 2)
        .collect();
    let mut candidates: Vec<Vec<i64>> = vec![mid.clone()];
    for (k, &(_, lo, hi)) in spec.inputs.iter().enumerate() {
        for v in [lo, hi, lo + 1, hi - 1] {
            let mut c = mid.clone();
            c[k] = v;
            if !candidates.contains(&c) {
                candidates.push(c);
            }
        }
    }
    let mut tests = Vec::with_capacity(size);
    let mut random_budget = size * 20;
    let mut next = candidates.into_iter();
    while tests.len() < size {
        let values = match next.next() {
            Some(c) => c,
            None => {
                if random_budget == 0 {
                    return Err(Error::Precondition(format!(
                        "could not generate {size} runnable tests for `{}`",
                        spec.name
                    )));
                }
                random_budget -= 1;
                spec.inputs
                    .iter()
                    .map(|&(_, lo, hi)| rng.gen_range(lo..=hi))
                    .collect()
            }
        };
        let inputs: BTreeMap<String, i64> = spec
            .inputs
            .iter()
            .zip(&values)
            .map(|(&(n, _, _), &v)| (n.to_string(), v))
            .collect();
        if let Run::Outputs(out) = run(base, &inputs)? {
            tests.push(TestCase::new(format!("t{}", tests.len() + 1), inputs, out));
        }
    }
    Ok(tests)
}

/// Every tree obtained from `e` by replacing exactly one node with one of
/// `f(node)`.
fn rewrites(e: &Expr, f: &dyn Fn(&Expr) -> Vec<Expr>) -> Vec<Expr> {
    let mut out = f(e);
    match e {
        Expr::Unary(op, inner) => out.extend(
            rewrites(inner, f)
                .into_iter()
                .map(|x| Expr::Unary(*op, Box::new(x))),
        ),
        Expr::Binary(op, l, r) => {
            out.extend(
                rewrites(l, f)
                    .into_iter()
                    .map(|x| Expr::Binary(*op, Box::new(x), r.clone())),
            );
            out.extend(
                rewrites(r, f)
                    .into_iter()
                    .map(|x| Expr::Binary(*op, l.clone(), Box::new(x))),
            );
        }
        _ => {}
    }
    out
}

const ARITHMETIC: [BinOp; 3] = [BinOp::Add, BinOp::Sub, BinOp::Mul];
const COMPARISON: [BinOp; 6] = [
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::Eq,
    BinOp::Ne,
];
const LOGICAL: [BinOp; 2] = [BinOp::And, BinOp::Or];

fn operator_alternatives(op: BinOp) -> Vec<BinOp> {
    let group: &[BinOp] = if op.is_comparison() {
        &COMPARISON
    } else if op.is_logical() {
        &LOGICAL
    } else {
        &ARITHMETIC
    };
    group.iter().copied().filter(|&o| o != op).collect()
}

/// All single mutations of one kind for statement `idx`.
pub fn mutants(program: &Program, idx: usize, kind: MutationKind) -> Vec<Expr> {
    let stmt = &program.statements()[idx];
    let Some(expr) = stmt.kind.expr() else {
        return Vec::new();
    };
    match kind {
        MutationKind::WrongVariable => {
            let mut defined: Vec<String> = Vec::new();
            for s in &program.statements()[..idx] {
                for v in s.kind.defs() {
                    if !defined.iter().any(|d| d == v) {
                        defined.push(v.to_string());
                    }
                }
            }
            rewrites(expr, &|e| match e {
                Expr::Var(v) => defined
                    .iter()
                    .filter(|d| *d != v)
                    .map(|d| Expr::Var(d.clone()))
                    .collect(),
                _ => Vec::new(),
            })
        }
        MutationKind::WrongOperator => rewrites(expr, &|e| match e {
            Expr::Binary(op, l, r) => operator_alternatives(*op)
                .into_iter()
                .map(|o| Expr::Binary(o, l.clone(), r.clone()))
                .collect(),
            _ => Vec::new(),
        }),
        MutationKind::WrongConstant => rewrites(expr, &|e| match e {
            Expr::Int(n) => [n.checked_add(1), n.checked_sub(1)]
                .into_iter()
                .flatten()
                .map(Expr::Int)
                .collect(),
            _ => Vec::new(),
        }),
        MutationKind::NegatedPredicate => match &stmt.kind {
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![match cond {
                Expr::Unary(UnOp::Not, inner) => (**inner).clone(),
                c => Expr::Unary(UnOp::Not, Box::new(c.clone())),
            }],
            _ => Vec::new(),
        },
    }
}

/// Failing-test count of `program`, or `None` if some test hits the
/// screening step limit.
fn failing_count(program: &Program, tests: &[TestCase]) -> Result<Option<usize>> {
    let mut failing = 0;
    for t in tests {
        match run(program, &t.inputs)? {
            Run::StepLimit => return Ok(None),
            Run::Crash => failing += 1,
            Run::Outputs(out) => {
                if out != t.expected {
                    failing += 1
                }
            }
        }
    }
    Ok(Some(failing))
}

/// Seeds `count` faults on distinct statements of `base`.
///
/// Each fault on its own must fail some but not all tests. The combined
/// bundle is accepted only if, for every subset of its faults, fixing any one
/// of them strictly lowers the failing-test count; the one-fault-at-a-time
/// harness relies on that.
pub fn seed_faults(
    name: &str,
    base: &Program,
    tests: &[TestCase],
    count: usize,
    kinds: &[MutationKind],
    seed: u64,
) -> Result<FaultBundle> {
    if count == 0 || kinds.is_empty() {
        return Err(Error::Input(
            "need at least one fault and one mutation kind".into(),
        ));
    }
    match failing_count(base, tests)? {
        Some(0) => {}
        _ => {
            return Err(Error::Precondition(format!(
                "base program `{name}` fails its own suite"
            )))
        }
    }
    let mutable: Vec<usize> = (0..base.len())
        .filter(|&i| base.statements()[i].kind.expr().is_some())
        .collect();
    if mutable.len() < count {
        return Err(Error::Precondition(format!(
            "`{name}` has only {} mutable statements",
            mutable.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_BUNDLE_ATTEMPTS {
        let mut chosen: Vec<(usize, Expr, Fault)> = Vec::new();
        let mut tries = 0;
        while chosen.len() < count && tries < MAX_FAULT_ATTEMPTS {
            tries += 1;
            let idx = *mutable.choose(&mut rng).expect("non-empty");
            if chosen.iter().any(|c| c.0 == idx) {
                continue;
            }
            let kind = *kinds.choose(&mut rng).expect("non-empty");
            let options = mutants(base, idx, kind);
            let Some(m) = options.choose(&mut rng).cloned() else {
                continue;
            };
            let variant = base.with_expr(idx, m.clone());
            // the mutant must still be a well-formed program
            let reparsed = parse(&variant.to_string());
            if !reparsed
                .is_ok_and(|r| r.len() == base.len() && r.statements()[idx].kind.expr() == Some(&m))
            {
                continue;
            }
            match failing_count(&variant, tests)? {
                Some(f) if f > 0 && f < tests.len() => {}
                _ => continue,
            }
            let original = base.statements()[idx]
                .kind
                .expr()
                .expect("mutable")
                .to_string();
            chosen.push((
                idx,
                m.clone(),
                Fault {
                    statement: base.statements()[idx].id.clone(),
                    kind,
                    original,
                    mutated: m.to_string(),
                },
            ));
        }
        if chosen.len() < count {
            continue;
        }
        chosen.sort_by_key(|c| c.0);
        let mut faulty = base.clone();
        for (idx, m, _) in &chosen {
            faulty = faulty.with_expr(*idx, m.clone());
        }
        let bundle = FaultBundle {
            name: name.to_string(),
            base: base.clone(),
            faulty,
            faults: chosen.into_iter().map(|c| c.2).collect(),
            tests: tests.to_vec(),
        };
        if fixing_always_helps(&bundle)? {
            return Ok(bundle);
        }
    }
    Err(Error::Precondition(format!(
        "no viable {count}-fault bundle for `{name}` after {MAX_BUNDLE_ATTEMPTS} attempts"
    )))
}

fn fixing_always_helps(bundle: &FaultBundle) -> Result<bool> {
    let k = bundle.faults.len();
    let mut failing = vec![0usize; 1 << k];
    for (mask, slot) in failing.iter_mut().enumerate().skip(1) {
        let active: Vec<usize> = (0..k).filter(|&j| mask & (1 << j) != 0).collect();
        match failing_count(&bundle.variant(&active)?, &bundle.tests)? {
            Some(f) => *slot = f,
            None => return Ok(false),
        }
    }
    if failing[(1 << k) - 1] >= bundle.tests.len() {
        return Ok(false);
    }
    for mask in 1..(1usize << k) {
        for j in 0..k {
            if mask & (1 << j) != 0 && failing[mask & !(1 << j)] >= failing[mask] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Faulty statements plus every statement on a dynamic dependence path from
/// a faulty instance to a slice root of some failing run.
pub fn chain_ground_truth(
    program: &Program,
    executed: &[ExecutedTest],
    faulty: &BTreeSet<String>,
) -> BTreeSet<String> {
    let faulty_idx: BTreeSet<usize> = faulty.iter().filter_map(|f| program.index_of(f)).collect();
    let mut truth: BTreeSet<usize> = faulty_idx.clone();
    for t in executed.iter().filter(|t| t.verdict() == Verdict::Fail) {
        let ddg = &t.trace.ddg;
        // instances are in execution order and only depend on earlier ones
        let mut tainted = vec![false; ddg.len()];
        for n in 0..ddg.len() {
            tainted[n] = faulty_idx.contains(&ddg.nodes()[n].stmt)
                || ddg.dependencies(n).iter().any(|&(d, _)| tainted[d]);
        }
        let roots = t.slice_roots();
        if let Ok(slice) = crate::minilang::backward_slice_union(ddg, &roots) {
            for &n in &slice.instances {
                if tainted[n] {
                    truth.insert(ddg.nodes()[n].stmt);
                }
            }
        }
    }
    truth
        .into_iter()
        .map(|i| program.statements()[i].id.clone())
        .collect()
}
