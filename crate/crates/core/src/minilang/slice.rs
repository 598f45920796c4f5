use std::collections::BTreeSet;

use super::ast::Program;
use super::trace::DynamicDependenceGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackwardDynamicSlice {
    pub roots: Vec<usize>,
    pub instances: BTreeSet<usize>,
    /// Statement indices the instances project onto.
    pub statements: BTreeSet<usize>,
}

impl BackwardDynamicSlice {
    pub fn statement_ids(&self, program: &Program) -> Vec<String> {
        self.statements
            .iter()
            .map(|&i| program.statements()[i].id.clone())
            .collect()
    }
}

pub fn backward_slice(ddg: &DynamicDependenceGraph, root: usize) -> Result<BackwardDynamicSlice> {
    backward_slice_union(ddg, &[root])
}

/// Union of the backward slices of several roots, computed in one traversal.
pub fn backward_slice_union(
    ddg: &DynamicDependenceGraph,
    roots: &[usize],
) -> Result<BackwardDynamicSlice> {
    let mut seen = vec![false; ddg.len()];
    let mut stack = Vec::new();
    for &r in roots {
        if r >= ddg.len() {
            return Err(Error::Input(format!(
                "slice root {r} is not an instance of the graph ({} nodes)",
                ddg.len()
            )));
        }
        if !seen[r] {
            seen[r] = true;
            stack.push(r);
        }
    }
    while let Some(n) = stack.pop() {
        for &(dep, _) in ddg.dependencies(n) {
            if !seen[dep] {
                seen[dep] = true;
                stack.push(dep);
            }
        }
    }
    let instances: BTreeSet<usize> = (0..ddg.len()).filter(|&i| seen[i]).collect();
    let statements = instances.iter().map(|&i| ddg.nodes()[i].stmt).collect();
    Ok(BackwardDynamicSlice {
        roots: roots.to_vec(),
        instances,
        statements,
    })
}
