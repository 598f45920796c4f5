//! Dynamic-weighting statement selection and cause-effect chain building.
//!
//! Each round scores the remaining candidates with
//! `J(s) = R(s, Out) * w(s) * RC(s)`, moves the best one into the selected
//! list, rescales every other weight by `1 + CR(i, chosen)`, and links the
//! chosen statement into a chain through static dependence edges.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::infotheory::{
    correlation_from_columns, relevance, relevance_class_of, CorrelationRecord, EntropyConfig,
    RelevanceClass,
};
use crate::minilang::{PdgEdge, StaticPdg};
use crate::spectrum::{build_stats, SliceSpectrum};

pub const WEIGHT_FLOOR: f64 = 1e-9;
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionConfig {
    /// Threshold `delta` as a fraction of the candidate count.
    pub delta_fraction: f64,
    /// Maximum number of chains (`k'`).
    pub chain_cap: usize,
    pub entropy: EntropyConfig,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            delta_fraction: 0.30,
            chain_cap: 5,
            entropy: EntropyConfig::default(),
        }
    }
}

/// `ceil(fraction * candidates)`, robust to representation error
/// (`0.3 * 10` must give 3, not 4).
pub fn threshold(delta_fraction: f64, candidates: usize) -> usize {
    (delta_fraction * candidates as f64 - 1e-9).ceil().max(0.0) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState {
    /// Remaining candidates (spectrum column indices, source order).
    pub candidates: Vec<usize>,
    pub selected: Vec<usize>,
    /// Weight per spectrum column.
    pub weights: Vec<f64>,
    pub iteration: usize,
    pub delta: usize,
    pub chain_cap: usize,
    relevance: Vec<f64>,
    class: Vec<RelevanceClass>,
}

impl SelectionState {
    pub fn relevance(&self, column: usize) -> f64 {
        self.relevance[column]
    }

    pub fn class(&self, column: usize) -> RelevanceClass {
        self.class[column]
    }
}

/// Sets up the candidate pool, the weights and the threshold.
///
/// Candidates are the statements whose column varies across tests: a
/// constant column carries no information about the verdict. When every
/// column is constant, all statements are candidates.
pub fn initialize(
    spectrum: &SliceSpectrum,
    priors: Option<&BTreeMap<String, f64>>,
    cfg: &SelectionConfig,
) -> Result<SelectionState> {
    let stats = build_stats(spectrum)?;
    if !(cfg.delta_fraction > 0.0 && cfg.delta_fraction <= 1.0) {
        return Err(Error::Input(format!(
            "delta fraction must lie in (0, 1], got {}",
            cfg.delta_fraction
        )));
    }
    let n = spectrum.num_statements();
    let mut weights = vec![1.0; n];
    if let Some(priors) = priors {
        for (id, &p) in priors {
            let idx = spectrum.require_index(id)?;
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::Input(format!(
                    "prior for `{id}` must be non-negative, got {p}"
                )));
            }
            weights[idx] = 1.0 + p;
        }
    }
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| !spectrum.is_constant_column(i))
        .collect();
    if candidates.is_empty() {
        candidates = (0..n).collect();
    }
    let outcomes = spectrum.outcomes();
    let relevance = (0..n)
        .map(|i| relevance(&spectrum.column(i), &outcomes, &cfg.entropy))
        .collect::<Result<Vec<_>>>()?;
    let class = stats
        .counts
        .iter()
        .map(|c| relevance_class_of(c.ncf, c.nuf, c.ncp, c.nup))
        .collect();
    Ok(SelectionState {
        delta: threshold(cfg.delta_fraction, candidates.len()),
        candidates,
        selected: Vec::new(),
        weights,
        iteration: 0,
        chain_cap: cfg.chain_cap,
        relevance,
        class,
    })
}

/// `J(s)` for every remaining candidate, in candidate order.
pub fn score_candidates(state: &SelectionState) -> Vec<(usize, f64)> {
    state
        .candidates
        .iter()
        .map(|&s| {
            (
                s,
                state.relevance[s] * state.weights[s] * state.class[s].sign(),
            )
        })
        .collect()
}

/// Moves the highest-scoring candidate into the selected list. Equal scores
/// go to the statement that comes first in source order.
pub fn select_next(state: &mut SelectionState, scores: &[(usize, f64)]) -> Result<usize> {
    if state.candidates.is_empty() || scores.is_empty() {
        return Err(Error::Precondition("no candidate statements left".into()));
    }
    let best = scores
        .iter()
        .map(|&(_, j)| j)
        .fold(f64::NEG_INFINITY, f64::max);
    let chosen = scores
        .iter()
        .filter(|&&(_, j)| j >= best - TIE_EPS)
        .map(|&(s, _)| s)
        .min()
        .expect("non-empty");
    state.candidates.retain(|&s| s != chosen);
    state.selected.push(chosen);
    Ok(chosen)
}

/// Rescales `w(i)` by `1 + CR(i, chosen)` for every other candidate and every
/// previously selected statement.
pub fn update_weights(
    state: &mut SelectionState,
    chosen: usize,
    spectrum: &SliceSpectrum,
    cfg: &EntropyConfig,
) -> Result<Vec<CorrelationRecord>> {
    let outcomes = spectrum.outcomes();
    let xj = spectrum.column(chosen);
    let mut affected: Vec<usize> = state
        .candidates
        .iter()
        .chain(&state.selected)
        .copied()
        .filter(|&i| i != chosen)
        .collect();
    affected.sort_unstable();
    let mut records = Vec::with_capacity(affected.len());
    for i in affected {
        let (cmi, mi, cr, kind, degenerate) =
            correlation_from_columns(&spectrum.column(i), &xj, &outcomes, cfg)?;
        state.weights[i] = (state.weights[i] * (1.0 + cr)).max(WEIGHT_FLOOR);
        records.push(CorrelationRecord {
            i: spectrum.statements()[i].clone(),
            j: spectrum.statements()[chosen].clone(),
            cmi,
            mi,
            cr,
            kind,
            degenerate,
        });
    }
    state.iteration += 1;
    Ok(records)
}

/// Selected statements linked by static dependence edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauseEffectChain {
    /// Members in the order they joined.
    pub members: Vec<String>,
    /// PDG edges between members, oriented as in the graph.
    pub links: Vec<PdgEdge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate_effect: Option<f64>,
}

impl CauseEffectChain {
    fn singleton(id: &str) -> Self {
        CauseEffectChain {
            members: vec![id.to_string()],
            links: Vec::new(),
            aggregate_effect: None,
        }
    }

    pub fn contains(&self, id: &str) -> bool {
        self.members.iter().any(|m| m == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "action", content = "chain")]
pub enum ChainAction {
    Joined(usize),
    Merged(usize),
    Created(usize),
    Discarded,
}

/// Places a newly selected statement into the chain structure: join the one
/// chain it is adjacent to, merge every chain it bridges, start a new chain
/// if the cap allows, or leave it unchained.
pub fn attach_to_chains(
    chains: &mut Vec<CauseEffectChain>,
    chosen: &str,
    pdg: &StaticPdg,
    chain_cap: usize,
) -> Result<ChainAction> {
    if !pdg.contains(chosen) {
        return Err(Error::UnknownStatement(chosen.to_string()));
    }
    let mut touching = Vec::new();
    let mut new_links = Vec::new();
    for (c, chain) in chains.iter().enumerate() {
        let mut adjacent = false;
        for m in &chain.members {
            if m == chosen {
                continue;
            }
            for e in pdg.edges_between(chosen, m) {
                adjacent = true;
                new_links.push(e.clone());
            }
        }
        if adjacent {
            touching.push(c);
        }
    }
    let action = match touching.as_slice() {
        [] if chains.len() < chain_cap => {
            chains.push(CauseEffectChain::singleton(chosen));
            ChainAction::Created(chains.len() - 1)
        }
        [] => ChainAction::Discarded,
        [only] => {
            chains[*only].members.push(chosen.to_string());
            ChainAction::Joined(*only)
        }
        [first, rest @ ..] => {
            // merge later chains into the earliest one, preserving positions
            for &c in rest.iter().rev() {
                let absorbed = chains.remove(c);
                chains[*first].members.extend(absorbed.members);
                chains[*first].links.extend(absorbed.links);
            }
            chains[*first].members.push(chosen.to_string());
            ChainAction::Merged(*first)
        }
    };
    if let ChainAction::Joined(c) | ChainAction::Merged(c) = action {
        for l in new_links {
            if !chains[c].links.contains(&l) {
                chains[c].links.push(l);
            }
        }
    }
    Ok(action)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iteration: usize,
    /// `J(s)` of every candidate at the start of the round.
    pub scores: Vec<(String, f64)>,
    pub selected: String,
    pub correlations: Vec<CorrelationRecord>,
    /// Weights after the update, for every affected statement.
    pub weights: Vec<(String, f64)>,
    pub chain_action: ChainAction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionOutcome {
    pub candidates: Vec<String>,
    pub delta: usize,
    pub selected: Vec<String>,
    pub chains: Vec<CauseEffectChain>,
    /// Selected statements that could not join or start a chain.
    pub unchained: Vec<String>,
    pub weights: BTreeMap<String, f64>,
    /// `R(s, Out)` for every statement.
    pub relevance: BTreeMap<String, f64>,
    /// `RC(s)` sign for every statement.
    pub relevance_class: BTreeMap<String, f64>,
    pub iterations: Vec<IterationTrace>,
}

/// Runs the selection loop while `k <= delta` and candidates remain.
pub fn run_selection(
    spectrum: &SliceSpectrum,
    pdg: &StaticPdg,
    priors: Option<&BTreeMap<String, f64>>,
    cfg: &SelectionConfig,
) -> Result<SelectionOutcome> {
    if let Some(missing) = spectrum.statements().iter().find(|s| !pdg.contains(s)) {
        return Err(Error::Input(format!(
            "statement `{missing}` of the spectrum is not in the dependence graph"
        )));
    }
    let mut state = initialize(spectrum, priors, cfg)?;
    let ids = spectrum.statements();
    let initial: Vec<String> = state.candidates.iter().map(|&i| ids[i].clone()).collect();
    let mut chains = Vec::new();
    let mut unchained = Vec::new();
    let mut iterations = Vec::new();
    while state.iteration <= state.delta && !state.candidates.is_empty() {
        let scores = score_candidates(&state);
        let chosen = select_next(&mut state, &scores)?;
        let records = update_weights(&mut state, chosen, spectrum, &cfg.entropy)?;
        let action = attach_to_chains(&mut chains, &ids[chosen], pdg, state.chain_cap)?;
        if action == ChainAction::Discarded {
            unchained.push(ids[chosen].clone());
        }
        iterations.push(IterationTrace {
            iteration: state.iteration,
            scores: scores.iter().map(|&(s, j)| (ids[s].clone(), j)).collect(),
            selected: ids[chosen].clone(),
            weights: records
                .iter()
                .map(|r| (r.i.clone(), state.weights[spectrum.index_of(&r.i).unwrap()]))
                .collect(),
            correlations: records,
            chain_action: action,
        });
    }
    let mut weights = BTreeMap::new();
    for &i in state.candidates.iter().chain(&state.selected) {
        weights.insert(ids[i].clone(), state.weights[i]);
    }
    Ok(SelectionOutcome {
        candidates: initial,
        delta: state.delta,
        selected: state.selected.iter().map(|&i| ids[i].clone()).collect(),
        chains,
        unchained,
        weights,
        relevance: (0..ids.len())
            .map(|i| (ids[i].clone(), state.relevance(i)))
            .collect(),
        relevance_class: (0..ids.len())
            .map(|i| (ids[i].clone(), state.class(i).sign()))
            .collect(),
        iterations,
    })
}
