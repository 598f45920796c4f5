//! Statement-level program dependence graph: data edges from reaching
//! definitions over the control-flow graph, control edges from lexical
//! nesting.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ast::{Program, StmtKind};
use super::trace::{DepKind, ExportEdge, ExportNode, GraphExport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PdgEdge {
    /// The dependent statement.
    pub from: String,
    /// The statement it depends on.
    pub to: String,
    #[serde(rename = "type")]
    pub kind: DepKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticPdg {
    nodes: Vec<String>,
    edges: Vec<PdgEdge>,
    index: HashMap<String, usize>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl StaticPdg {
    pub fn new(nodes: Vec<String>, mut edges: Vec<PdgEdge>) -> Result<Self> {
        let index: HashMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        if index.len() != nodes.len() {
            return Err(Error::Input("duplicate node in dependence graph".into()));
        }
        edges.sort_by_key(|e| {
            (
                index.get(&e.from).copied(),
                index.get(&e.to).copied(),
                e.kind,
            )
        });
        edges.dedup();
        let mut outgoing = vec![Vec::new(); nodes.len()];
        let mut incoming = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            let f = *index
                .get(&e.from)
                .ok_or_else(|| Error::UnknownStatement(e.from.clone()))?;
            let t = *index
                .get(&e.to)
                .ok_or_else(|| Error::UnknownStatement(e.to.clone()))?;
            outgoing[f].push(i);
            incoming[t].push(i);
        }
        Ok(StaticPdg {
            nodes,
            edges,
            index,
            outgoing,
            incoming,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[PdgEdge] {
        &self.edges
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Edges leaving `id`: the statements `id` depends on.
    pub fn dependencies_of(&self, id: &str) -> impl Iterator<Item = &PdgEdge> {
        self.index
            .get(id)
            .into_iter()
            .flat_map(move |&i| self.outgoing[i].iter().map(move |&e| &self.edges[e]))
    }

    /// Edges entering `id`: the statements that depend on `id`.
    pub fn dependents_of(&self, id: &str) -> impl Iterator<Item = &PdgEdge> {
        self.index
            .get(id)
            .into_iter()
            .flat_map(move |&i| self.incoming[i].iter().map(move |&e| &self.edges[e]))
    }

    /// Edges between `a` and `b` in either direction.
    pub fn edges_between<'a>(
        &'a self,
        a: &'a str,
        b: &'a str,
    ) -> impl Iterator<Item = &'a PdgEdge> {
        self.dependencies_of(a)
            .filter(move |e| e.to == b)
            .chain(self.dependencies_of(b).filter(move |e| e.to == a))
    }

    pub fn has_edge(&self, from: &str, to: &str, kind: DepKind) -> bool {
        self.dependencies_of(from)
            .any(|e| e.to == to && e.kind == kind)
    }

    pub fn to_export(&self) -> GraphExport {
        GraphExport {
            test: None,
            nodes: self
                .nodes
                .iter()
                .map(|n| ExportNode {
                    id: n.clone(),
                    statement: None,
                    index: None,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| ExportEdge {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    kind: e.kind,
                })
                .collect(),
        }
    }

    pub fn from_export(g: GraphExport) -> Result<Self> {
        StaticPdg::new(
            g.nodes.into_iter().map(|n| n.id).collect(),
            g.edges
                .into_iter()
                .map(|e| PdgEdge {
                    from: e.from,
                    to: e.to,
                    kind: e.kind,
                })
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_export()).expect("pdg serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let g: GraphExport = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        Self::from_export(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GraphExport =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("pdg json: {e}")))?;
        Self::from_export(g)
    }
}

const EXIT: usize = usize::MAX;

fn cfg_successors(program: &Program) -> Vec<Vec<usize>> {
    fn lower(p: &Program, block: &[usize], next: usize, succ: &mut Vec<Vec<usize>>) {
        for (k, &s) in block.iter().enumerate() {
            let after = block.get(k + 1).copied().unwrap_or(next);
            match &p.statements()[s].kind {
                StmtKind::If {
                    then_branch,
                    else_branch,
                    ..
                } => {
                    succ[s] = vec![
                        then_branch.first().copied().unwrap_or(after),
                        else_branch.first().copied().unwrap_or(after),
                    ];
                    lower(p, then_branch, after, succ);
                    lower(p, else_branch, after, succ);
                }
                StmtKind::While { body, .. } => {
                    succ[s] = vec![body.first().copied().unwrap_or(s), after];
                    lower(p, body, s, succ);
                }
                StmtKind::Return(_) => succ[s] = vec![EXIT],
                _ => succ[s] = vec![after],
            }
            succ[s].dedup();
        }
    }
    let mut succ = vec![Vec::new(); program.len()];
    lower(program, program.top_level(), EXIT, &mut succ);
    succ
}

/// Reaching definitions per statement entry, as sets of defining statements
/// keyed by variable.
fn reaching_definitions(program: &Program) -> Vec<HashMap<String, BTreeSet<usize>>> {
    let n = program.len();
    let succ = cfg_successors(program);
    let mut preds = vec![Vec::new(); n];
    for (s, ss) in succ.iter().enumerate() {
        for &t in ss {
            if t != EXIT {
                preds[t].push(s);
            }
        }
    }
    let mut in_sets: Vec<HashMap<String, BTreeSet<usize>>> = vec![HashMap::new(); n];
    let mut out_sets: Vec<HashMap<String, BTreeSet<usize>>> = vec![HashMap::new(); n];
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            let mut inn: HashMap<String, BTreeSet<usize>> = HashMap::new();
            for &p in &preds[s] {
                for (var, defs) in &out_sets[p] {
                    inn.entry(var.clone()).or_default().extend(defs);
                }
            }
            let mut out = inn.clone();
            for var in program.statements()[s].kind.defs() {
                out.insert(var.to_string(), BTreeSet::from([s]));
            }
            if out != out_sets[s] || inn != in_sets[s] {
                changed = true;
                out_sets[s] = out;
                in_sets[s] = inn;
            }
        }
    }
    in_sets
}

pub fn static_pdg(program: &Program) -> StaticPdg {
    let reaching = reaching_definitions(program);
    let ids = program.ids();
    let mut edges = Vec::new();
    for (s, stmt) in program.statements().iter().enumerate() {
        let mut defs = BTreeSet::new();
        for var in stmt.kind.uses() {
            if let Some(ds) = reaching[s].get(var) {
                defs.extend(ds.iter().copied());
            }
        }
        for d in defs {
            edges.push(PdgEdge {
                from: ids[s].clone(),
                to: ids[d].clone(),
                kind: DepKind::Data,
            });
        }
        if let Some(parent) = stmt.parent {
            edges.push(PdgEdge {
                from: ids[s].clone(),
                to: ids[parent].clone(),
                kind: DepKind::Control,
            });
        }
    }
    StaticPdg::new(ids, edges).expect("ids come from the program")
}
