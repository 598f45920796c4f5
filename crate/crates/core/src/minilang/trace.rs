//! Tracing interpreter. Every statement execution becomes an instance node
//! in a dynamic dependence graph, with data edges to the latest definitions
//! of the variables it reads and a control edge to the predicate instance
//! that governs it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::ast::{BinOp, Expr, Program, StmtKind, UnOp};
use crate::error::{Error, Result};

pub const DEFAULT_STEP_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepKind {
    Data,
    Control,
}

/// The `occurrence`-th execution (1-based) of statement `stmt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instance {
    pub stmt: usize,
    pub occurrence: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DynamicDependenceGraph {
    nodes: Vec<Instance>,
    /// `deps[n]` lists the instances `n` depends on; edges point backwards in time.
    deps: Vec<Vec<(usize, DepKind)>>,
}

impl DynamicDependenceGraph {
    pub fn nodes(&self) -> &[Instance] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dependencies(&self, node: usize) -> &[(usize, DepKind)] {
        &self.deps[node]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, DepKind)> + '_ {
        self.deps
            .iter()
            .enumerate()
            .flat_map(|(from, ds)| ds.iter().map(move |&(to, k)| (from, to, k)))
    }

    fn push(&mut self, stmt: usize, occurrence: usize) -> usize {
        self.nodes.push(Instance { stmt, occurrence });
        self.deps.push(Vec::new());
        self.nodes.len() - 1
    }

    fn depend(&mut self, from: usize, to: usize, kind: DepKind) {
        if !self.deps[from].contains(&(to, kind)) {
            self.deps[from].push((to, kind));
        }
    }

    pub fn to_export(&self, program: &Program, test: Option<&str>) -> GraphExport {
        GraphExport {
            test: test.map(str::to_string),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, inst)| ExportNode {
                    id: format!("{}#{}", program.statements()[inst.stmt].id, inst.occurrence),
                    statement: Some(program.statements()[inst.stmt].id.clone()),
                    index: Some(i),
                })
                .collect(),
            edges: self
                .edges()
                .map(|(f, t, kind)| ExportEdge {
                    from: format!(
                        "{}#{}",
                        program.statements()[self.nodes[f].stmt].id,
                        self.nodes[f].occurrence
                    ),
                    to: format!(
                        "{}#{}",
                        program.statements()[self.nodes[t].stmt].id,
                        self.nodes[t].occurrence
                    ),
                    kind,
                })
                .collect(),
        }
    }
}

/// JSON node/edge list shared by the DDG and PDG exports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<String>,
    pub nodes: Vec<ExportNode>,
    pub edges: Vec<ExportEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportNode {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportEdge {
    pub from: String,
    pub to: String,
    #[serde(rename = "type")]
    pub kind: DepKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrashReason {
    DivisionByZero,
    Overflow,
    UndefinedVariable(String),
    StepLimit(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    Normal,
    Crash {
        reason: CrashReason,
        /// Instance that crashed; `None` when the step limit stopped execution.
        instance: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputEvent {
    pub value: i64,
    pub instance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub outputs: Vec<OutputEvent>,
    pub termination: Termination,
    pub ddg: DynamicDependenceGraph,
    /// Indices of statements executed at least once.
    pub covered: BTreeSet<usize>,
}

impl Trace {
    pub fn output_values(&self) -> Vec<i64> {
        self.outputs.iter().map(|o| o.value).collect()
    }

    pub fn crashed(&self) -> bool {
        matches!(self.termination, Termination::Crash { .. })
    }
}

#[derive(Clone, Copy)]
enum Value {
    Int(i64),
    Bool(bool),
}

enum Flow {
    Next,
    Return,
}

struct Crash {
    reason: CrashReason,
    instance: Option<usize>,
}

struct Machine<'p> {
    program: &'p Program,
    inputs: &'p BTreeMap<String, i64>,
    env: HashMap<&'p str, (i64, usize)>,
    ddg: DynamicDependenceGraph,
    occurrences: Vec<usize>,
    outputs: Vec<OutputEvent>,
    step_limit: usize,
}

/// Executes `program` on `inputs`, recording the dynamic dependence graph.
///
/// Crashes (division by zero, overflow, reading an unset variable, step
/// limit) are part of the returned trace, not errors. The only error is a
/// `read` of a variable the inputs do not bind.
pub fn run_with_trace(
    program: &Program,
    inputs: &BTreeMap<String, i64>,
    step_limit: usize,
) -> Result<Trace> {
    for s in program.statements() {
        if let StmtKind::Read(vars) = &s.kind {
            if let Some(v) = vars.iter().find(|v| !inputs.contains_key(*v)) {
                return Err(Error::UnboundInput(v.clone()));
            }
        }
    }
    let mut m = Machine {
        program,
        inputs,
        env: HashMap::new(),
        ddg: DynamicDependenceGraph::default(),
        occurrences: vec![0; program.len()],
        outputs: Vec::new(),
        step_limit,
    };
    let termination = match m.block(program.top_level(), None) {
        Ok(_) => Termination::Normal,
        Err(c) => Termination::Crash {
            reason: c.reason,
            instance: c.instance,
        },
    };
    let covered = m.ddg.nodes.iter().map(|n| n.stmt).collect();
    Ok(Trace {
        outputs: m.outputs,
        termination,
        ddg: m.ddg,
        covered,
    })
}

impl<'p> Machine<'p> {
    fn block(&mut self, block: &[usize], control: Option<usize>) -> Result<Flow, Crash> {
        for &idx in block {
            if let Flow::Return = self.statement(idx, control)? {
                return Ok(Flow::Return);
            }
        }
        Ok(Flow::Next)
    }

    fn instance(&mut self, idx: usize, control: Option<usize>) -> Result<usize, Crash> {
        if self.ddg.len() >= self.step_limit {
            return Err(Crash {
                reason: CrashReason::StepLimit(self.step_limit),
                instance: None,
            });
        }
        self.occurrences[idx] += 1;
        let n = self.ddg.push(idx, self.occurrences[idx]);
        if let Some(c) = control {
            self.ddg.depend(n, c, DepKind::Control);
        }
        for var in self.program.statements()[idx].kind.uses() {
            match self.env.get(var) {
                Some(&(_, def)) => self.ddg.depend(n, def, DepKind::Data),
                None => {
                    return Err(Crash {
                        reason: CrashReason::UndefinedVariable(var.to_string()),
                        instance: Some(n),
                    })
                }
            }
        }
        Ok(n)
    }

    fn eval(&self, e: &Expr, at: usize) -> Result<Value, Crash> {
        let crash = |reason| Crash {
            reason,
            instance: Some(at),
        };
        Ok(match e {
            Expr::Int(v) => Value::Int(*v),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Var(v) => Value::Int(self.env[v.as_str()].0),
            Expr::Unary(UnOp::Neg, inner) => {
                let v = self.int(inner, at)?;
                Value::Int(
                    v.checked_neg()
                        .ok_or_else(|| crash(CrashReason::Overflow))?,
                )
            }
            Expr::Unary(UnOp::Not, inner) => Value::Bool(!self.bool(inner, at)?),
            Expr::Binary(BinOp::And, l, r) => Value::Bool(self.bool(l, at)? && self.bool(r, at)?),
            Expr::Binary(BinOp::Or, l, r) => Value::Bool(self.bool(l, at)? || self.bool(r, at)?),
            Expr::Binary(op, l, r) => {
                let (a, b) = (self.eval(l, at)?, self.eval(r, at)?);
                match (a, b) {
                    (Value::Int(a), Value::Int(b)) => {
                        let arith = |v: Option<i64>| v.ok_or_else(|| crash(CrashReason::Overflow));
                        match op {
                            BinOp::Add => Value::Int(arith(a.checked_add(b))?),
                            BinOp::Sub => Value::Int(arith(a.checked_sub(b))?),
                            BinOp::Mul => Value::Int(arith(a.checked_mul(b))?),
                            BinOp::Div if b == 0 => return Err(crash(CrashReason::DivisionByZero)),
                            BinOp::Div => Value::Int(arith(a.checked_div(b))?),
                            BinOp::Eq => Value::Bool(a == b),
                            BinOp::Ne => Value::Bool(a != b),
                            BinOp::Lt => Value::Bool(a < b),
                            BinOp::Le => Value::Bool(a <= b),
                            BinOp::Gt => Value::Bool(a > b),
                            BinOp::Ge => Value::Bool(a >= b),
                            BinOp::And | BinOp::Or => unreachable!(),
                        }
                    }
                    (Value::Bool(a), Value::Bool(b)) => match op {
                        BinOp::Eq => Value::Bool(a == b),
                        BinOp::Ne => Value::Bool(a != b),
                        _ => unreachable!("rejected by the type checker"),
                    },
                    _ => unreachable!("rejected by the type checker"),
                }
            }
        })
    }

    fn int(&self, e: &Expr, at: usize) -> Result<i64, Crash> {
        match self.eval(e, at)? {
            Value::Int(v) => Ok(v),
            Value::Bool(_) => unreachable!("rejected by the type checker"),
        }
    }

    fn bool(&self, e: &Expr, at: usize) -> Result<bool, Crash> {
        match self.eval(e, at)? {
            Value::Bool(v) => Ok(v),
            Value::Int(_) => unreachable!("rejected by the type checker"),
        }
    }

    fn statement(&mut self, idx: usize, control: Option<usize>) -> Result<Flow, Crash> {
        let program = self.program;
        let stmt = &program.statements()[idx];
        match &stmt.kind {
            StmtKind::Read(vars) => {
                let n = self.instance(idx, control)?;
                for v in vars {
                    self.env.insert(v.as_str(), (self.inputs[v], n));
                }
            }
            StmtKind::Assign { target, value } => {
                let n = self.instance(idx, control)?;
                let v = self.int(value, n)?;
                self.env.insert(target.as_str(), (v, n));
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let n = self.instance(idx, control)?;
                let branch = if self.bool(cond, n)? {
                    then_branch
                } else {
                    else_branch
                };
                return self.block(branch, Some(n));
            }
            StmtKind::While { cond, body } => {
                let mut governing = control;
                loop {
                    let n = self.instance(idx, governing)?;
                    if !self.bool(cond, n)? {
                        break;
                    }
                    if let Flow::Return = self.block(body, Some(n))? {
                        return Ok(Flow::Return);
                    }
                    // the next evaluation only happens because this one was true
                    governing = Some(n);
                }
            }
            StmtKind::Print(e) => {
                let n = self.instance(idx, control)?;
                let value = self.int(e, n)?;
                self.outputs.push(OutputEvent { value, instance: n });
            }
            StmtKind::Return(e) => {
                let n = self.instance(idx, control)?;
                let value = self.int(e, n)?;
                self.outputs.push(OutputEvent { value, instance: n });
                return Ok(Flow::Return);
            }
        }
        Ok(Flow::Next)
    }
}
