//! Per-statement failure-causing effect via propensity-score matching.
//!
//! Treatment is coverage of the statement, the outcome is the failure
//! indicator, and the confounders are the coverage columns of the statements
//! it directly depends on in the static PDG.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minilang::StaticPdg;
use crate::selection::CauseEffectChain;
use crate::spectrum::SliceSpectrum;

const MAX_ITERATIONS: usize = 100;
const TOLERANCE: f64 = 1e-8;
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchingStrategy {
    /// Each unit is matched to its nearest opposite-group units (ties kept),
    /// within a caliper on the logit propensity.
    #[default]
    Nearest,
    /// Units are grouped into blocks linked by nearest-neighbour relations;
    /// nobody is discarded.
    Full,
}

impl FromStr for MatchingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(MatchingStrategy::Nearest),
            "full" => Ok(MatchingStrategy::Full),
            other => Err(Error::Input(format!(
                "unknown matching strategy `{other}` (expected nearest or full)"
            ))),
        }
    }
}

impl fmt::Display for MatchingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchingStrategy::Nearest => "nearest",
            MatchingStrategy::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CausalConfig {
    pub matching: MatchingStrategy,
    pub ridge: f64,
    /// Caliper width in standard deviations of the logit propensity.
    pub caliper: f64,
}

impl Default for CausalConfig {
    fn default() -> Self {
        CausalConfig {
            matching: MatchingStrategy::Nearest,
            ridge: 1e-4,
            caliper: 0.2,
        }
    }
}

impl CausalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ridge > 0.0) || !self.ridge.is_finite() {
            return Err(Error::Input(format!(
                "ridge must be positive, got {}",
                self.ridge
            )));
        }
        if !(self.caliper > 0.0) || !self.caliper.is_finite() {
            return Err(Error::Input(format!(
                "caliper must be positive, got {}",
                self.caliper
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfounderVector {
    pub statement: String,
    /// Statements `statement` depends on, in source order.
    pub predecessors: Vec<String>,
    /// One row per test, one entry per predecessor.
    pub rows: Vec<Vec<bool>>,
}

pub fn confounder_vector(
    statement: &str,
    pdg: &StaticPdg,
    spectrum: &SliceSpectrum,
) -> Result<ConfounderVector> {
    spectrum.require_index(statement)?;
    if !pdg.contains(statement) {
        return Err(Error::UnknownStatement(statement.to_string()));
    }
    let mut cols: Vec<usize> = pdg
        .dependencies_of(statement)
        .filter(|e| e.to != statement)
        .map(|e| spectrum.require_index(&e.to))
        .collect::<Result<_>>()?;
    cols.sort_unstable();
    cols.dedup();
    let rows = spectrum
        .matrix()
        .iter()
        .map(|r| cols.iter().map(|&c| r[c]).collect())
        .collect();
    Ok(ConfounderVector {
        statement: statement.to_string(),
        predecessors: cols
            .iter()
            .map(|&c| spectrum.statements()[c].clone())
            .collect(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropensityModel {
    /// Intercept first, then one coefficient per confounder.
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    pub ridge: f64,
}

impl PropensityModel {
    pub fn predict(&self, row: &[bool]) -> f64 {
        sigmoid(linear(&self.coefficients, row))
    }
}

fn linear(beta: &[f64], row: &[bool]) -> f64 {
    beta[0]
        + row
            .iter()
            .zip(&beta[1..])
            .filter(|(x, _)| **x)
            .map(|(_, b)| b)
            .sum::<f64>()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn check_design(beta: &[f64], treatment: &[bool], rows: &[Vec<bool>]) -> Result<()> {
    if treatment.len() != rows.len() {
        return Err(Error::Input(format!(
            "{} treatment values for {} confounder rows",
            treatment.len(),
            rows.len()
        )));
    }
    if let Some(r) = rows.iter().find(|r| r.len() + 1 != beta.len()) {
        return Err(Error::Input(format!(
            "confounder row has {} entries, expected {}",
            r.len(),
            beta.len() - 1
        )));
    }
    Ok(())
}

/// Binomial log-likelihood minus `ridge/2 * |beta|^2` over the non-intercept
/// coefficients.
pub fn penalized_log_likelihood(
    beta: &[f64],
    treatment: &[bool],
    rows: &[Vec<bool>],
    ridge: f64,
) -> Result<f64> {
    check_design(beta, treatment, rows)?;
    let ll: f64 = treatment
        .iter()
        .zip(rows)
        .map(|(&t, r)| {
            let z = linear(beta, r);
            if t {
                z - softplus(z)
            } else {
                -softplus(z)
            }
        })
        .sum();
    let penalty: f64 = beta[1..].iter().map(|b| b * b).sum();
    Ok(ll - 0.5 * ridge * penalty)
}

pub fn penalized_gradient(
    beta: &[f64],
    treatment: &[bool],
    rows: &[Vec<bool>],
    ridge: f64,
) -> Result<Vec<f64>> {
    check_design(beta, treatment, rows)?;
    let mut g = vec![0.0; beta.len()];
    for (&t, r) in treatment.iter().zip(rows) {
        let resid = f64::from(u8::from(t)) - sigmoid(linear(beta, r));
        g[0] += resid;
        for (k, &x) in r.iter().enumerate() {
            if x {
                g[k + 1] += resid;
            }
        }
    }
    for k in 1..beta.len() {
        g[k] -= ridge * beta[k];
    }
    Ok(g)
}

/// Newton-Raphson on the penalized likelihood, with step halving.
pub fn fit_propensity(
    treatment: &[bool],
    rows: &[Vec<bool>],
    ridge: f64,
) -> Result<PropensityModel> {
    let n_treated = treatment.iter().filter(|&&t| t).count();
    if n_treated == 0 || n_treated == treatment.len() {
        return Err(Error::Precondition(
            "propensity model needs both covering and non-covering tests".into(),
        ));
    }
    let p = rows.first().map_or(0, Vec::len) + 1;
    let mut beta = vec![0.0; p];
    let frac = n_treated as f64 / treatment.len() as f64;
    beta[0] = (frac / (1.0 - frac)).ln();
    let mut ll = penalized_log_likelihood(&beta, treatment, rows, ridge)?;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let grad = DVector::from_vec(penalized_gradient(&beta, treatment, rows, ridge)?);
        let mut info = DMatrix::<f64>::zeros(p, p);
        for r in rows {
            let mu = sigmoid(linear(&beta, r));
            let w = mu * (1.0 - mu);
            let x: Vec<usize> = std::iter::once(0)
                .chain(
                    r.iter()
                        .enumerate()
                        .filter(|(_, v)| **v)
                        .map(|(k, _)| k + 1),
                )
                .collect();
            for &a in &x {
                for &b in &x {
                    info[(a, b)] += w;
                }
            }
        }
        for k in 1..p {
            info[(k, k)] += ridge;
        }
        let step = solve_spd(info, &grad)?;
        let mut scale = 1.0;
        let mut next;
        let mut next_ll;
        loop {
            next = beta
                .iter()
                .zip(step.iter())
                .map(|(b, s)| b + scale * s)
                .collect::<Vec<_>>();
            next_ll = penalized_log_likelihood(&next, treatment, rows, ridge)?;
            if next_ll >= ll - 1e-12 || scale < 1e-10 {
                break;
            }
            scale *= 0.5;
        }
        let change = step.iter().map(|s| (scale * s).abs()).fold(0.0, f64::max);
        beta = next;
        ll = next_ll;
        if change < TOLERANCE {
            converged = true;
            break;
        }
    }
    Ok(PropensityModel {
        coefficients: beta,
        iterations,
        converged,
        log_likelihood: ll,
        ridge,
    })
}

fn solve_spd(mut m: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let mut jitter = 0.0;
    for _ in 0..8 {
        if let Some(ch) = m.clone().cholesky() {
            return Ok(ch.solve(rhs));
        }
        let bump = if jitter == 0.0 { 1e-10 } else { jitter * 9.0 };
        for k in 0..m.nrows() {
            m[(k, k)] += bump;
        }
        jitter += bump;
    }
    Err(Error::Precondition(
        "propensity information matrix is singular".into(),
    ))
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-15, 1.0 - 1e-15);
    (p / (1.0 - p)).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedSample {
    pub strategy: MatchingStrategy,
    /// Opposite-group matches of every unit; empty for discarded units.
    pub matches: Vec<Vec<usize>>,
    pub retained: Vec<usize>,
    pub discarded: Vec<usize>,
    /// Caliper on the logit scale; `None` for full matching.
    pub caliper_width: Option<f64>,
}

impl MatchedSample {
    /// Mean over retained treated units of the mean propensity distance to
    /// their matches.
    pub fn mean_treated_gap(&self, treatment: &[bool], propensities: &[f64]) -> Option<f64> {
        let gaps: Vec<f64> = self
            .retained
            .iter()
            .filter(|&&i| treatment[i])
            .map(|&i| {
                let m = &self.matches[i];
                m.iter()
                    .map(|&j| (propensities[i] - propensities[j]).abs())
                    .sum::<f64>()
                    / m.len() as f64
            })
            .collect();
        (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64)
    }
}

/// Mean over treated units of the mean propensity distance to every control.
pub fn unmatched_treated_gap(treatment: &[bool], propensities: &[f64]) -> Option<f64> {
    let controls: Vec<f64> = (0..treatment.len())
        .filter(|&j| !treatment[j])
        .map(|j| propensities[j])
        .collect();
    let gaps: Vec<f64> = (0..treatment.len())
        .filter(|&i| treatment[i])
        .map(|i| {
            controls
                .iter()
                .map(|c| (propensities[i] - c).abs())
                .sum::<f64>()
                / controls.len() as f64
        })
        .collect();
    (!gaps.is_empty() && !controls.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64)
}

fn nearest_opposites(treatment: &[bool], propensities: &[f64]) -> Vec<Vec<usize>> {
    (0..treatment.len())
        .map(|i| {
            let opp = (0..treatment.len()).filter(|&j| treatment[j] != treatment[i]);
            let best = opp
                .clone()
                .map(|j| (propensities[i] - propensities[j]).abs())
                .fold(f64::INFINITY, f64::min);
            opp.filter(|&j| (propensities[i] - propensities[j]).abs() <= best + TIE_EPS)
                .collect()
        })
        .collect()
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}

pub fn match_executions(
    treatment: &[bool],
    propensities: &[f64],
    strategy: MatchingStrategy,
    caliper: f64,
) -> Result<MatchedSample> {
    if treatment.len() != propensities.len() {
        return Err(Error::Input(
            "treatment and propensity lengths differ".into(),
        ));
    }
    if !treatment.iter().any(|&t| t) || treatment.iter().all(|&t| t) {
        return Err(Error::Precondition(
            "matching needs both covering and non-covering tests".into(),
        ));
    }
    let nearest = nearest_opposites(treatment, propensities);
    let n = treatment.len();
    match strategy {
        MatchingStrategy::Nearest => {
            let logits: Vec<f64> = propensities.iter().map(|&p| logit(p)).collect();
            let width = caliper * sample_sd(&logits);
            let mut matches = vec![Vec::new(); n];
            for i in 0..n {
                matches[i] = nearest[i]
                    .iter()
                    .copied()
                    .filter(|&j| (logits[i] - logits[j]).abs() <= width + 1e-9)
                    .collect();
            }
            let (retained, discarded) = (0..n).partition(|&i| !matches[i].is_empty());
            Ok(MatchedSample {
                strategy,
                matches,
                retained,
                discarded,
                caliper_width: Some(width),
            })
        }
        MatchingStrategy::Full => {
            // union-find over nearest-neighbour links
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            for (i, js) in nearest.iter().enumerate() {
                for &j in js {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
            let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
            let matches = (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| roots[j] == roots[i] && treatment[j] != treatment[i])
                        .collect()
                })
                .collect();
            Ok(MatchedSample {
                strategy,
                matches,
                retained: (0..n).collect(),
                discarded: Vec::new(),
                caliper_width: None,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degeneracy {
    AllCovered,
    NoneCovered,
    /// No covering test has a non-covering match inside the caliper.
    NoOverlap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalEffect {
    pub statement: String,
    pub tau_hat: f64,
    pub confounders: Vec<String>,
    pub treated: usize,
    pub control: usize,
    pub retained: usize,
    pub discarded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<Degeneracy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PropensityModel>,
    /// Imputed `(Y0, Y1)` per test; `None` for discarded tests.
    #[serde(skip)]
    pub imputed: Imputed,
}

/// Per-unit `(Y0, Y1)` after imputation; `None` for units dropped by matching.
pub type Imputed = Vec<Option<(f64, f64)>>;

/// Fills in each retained unit's missing potential outcome with the mean of
/// its matches and averages `Y1 - Y0` over retained units.
pub fn impute_and_estimate(
    outcomes: &[bool],
    treatment: &[bool],
    matched: &MatchedSample,
) -> Result<(f64, Imputed)> {
    if outcomes.len() != treatment.len() || matched.matches.len() != treatment.len() {
        return Err(Error::Input(
            "outcome, treatment and match lengths differ".into(),
        ));
    }
    if matched.retained.is_empty() {
        return Err(Error::Precondition("no unit survived matching".into()));
    }
    let y = |i: usize| f64::from(u8::from(outcomes[i]));
    let mut imputed = vec![None; outcomes.len()];
    let mut total = 0.0;
    for &i in &matched.retained {
        let m = &matched.matches[i];
        if m.is_empty() {
            return Err(Error::Input(format!("retained unit {i} has no match")));
        }
        let other = m.iter().map(|&j| y(j)).sum::<f64>() / m.len() as f64;
        let pair = if treatment[i] {
            (other, y(i))
        } else {
            (y(i), other)
        };
        total += pair.1 - pair.0;
        imputed[i] = Some(pair);
    }
    Ok((total / matched.retained.len() as f64, imputed))
}

fn mean_outcome(outcomes: &[bool], treatment: &[bool], group: bool) -> Option<f64> {
    let ys: Vec<bool> = outcomes
        .iter()
        .zip(treatment)
        .filter(|(_, &t)| t == group)
        .map(|(&y, _)| y)
        .collect();
    (!ys.is_empty()).then(|| ys.iter().filter(|&&y| y).count() as f64 / ys.len() as f64)
}

/// Difference of group failure rates; an empty group takes the overall rate.
pub fn risk_difference(outcomes: &[bool], treatment: &[bool]) -> f64 {
    let overall = outcomes.iter().filter(|&&y| y).count() as f64 / outcomes.len().max(1) as f64;
    mean_outcome(outcomes, treatment, true).unwrap_or(overall)
        - mean_outcome(outcomes, treatment, false).unwrap_or(overall)
}

pub fn failure_causing_effect(
    statement: &str,
    pdg: &StaticPdg,
    spectrum: &SliceSpectrum,
    cfg: &CausalConfig,
) -> Result<CausalEffect> {
    cfg.validate()?;
    let cv = confounder_vector(statement, pdg, spectrum)?;
    let treatment = spectrum.column(spectrum.require_index(statement)?);
    let outcomes = spectrum.outcomes();
    let treated = treatment.iter().filter(|&&t| t).count();
    let control = treatment.len() - treated;
    let mut effect = CausalEffect {
        statement: statement.to_string(),
        tau_hat: risk_difference(&outcomes, &treatment),
        confounders: cv.predecessors.clone(),
        treated,
        control,
        retained: 0,
        discarded: 0,
        degenerate: None,
        model: None,
        imputed: vec![None; treatment.len()],
    };
    if treated == 0 || control == 0 {
        effect.degenerate = Some(if treated == 0 {
            Degeneracy::NoneCovered
        } else {
            Degeneracy::AllCovered
        });
        return Ok(effect);
    }
    let model = fit_propensity(&treatment, &cv.rows, cfg.ridge)?;
    let ps: Vec<f64> = cv.rows.iter().map(|r| model.predict(r)).collect();
    let matched = match_executions(&treatment, &ps, cfg.matching, cfg.caliper)?;
    effect.model = Some(model);
    effect.discarded = matched.discarded.len();
    if !matched.retained.iter().any(|&i| treatment[i]) {
        effect.degenerate = Some(Degeneracy::NoOverlap);
        return Ok(effect);
    }
    let (tau, imputed) = impute_and_estimate(&outcomes, &treatment, &matched)?;
    effect.tau_hat = tau.clamp(-1.0, 1.0);
    effect.retained = matched.retained.len();
    effect.imputed = imputed;
    Ok(effect)
}

/// Effects for several statements, keyed by statement id.
pub fn estimate_effects<'a>(
    statements: impl IntoIterator<Item = &'a String>,
    pdg: &StaticPdg,
    spectrum: &SliceSpectrum,
    cfg: &CausalConfig,
) -> Result<BTreeMap<String, CausalEffect>> {
    statements
        .into_iter()
        .map(|s| Ok((s.clone(), failure_causing_effect(s, pdg, spectrum, cfg)?)))
        .collect()
}

fn cmp_desc(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= TIE_EPS {
        Ordering::Equal
    } else {
        b.total_cmp(&a)
    }
}

/// Sets each chain's aggregate effect to the mean member effect and sorts
/// chains (and members within each chain) by effect, descending. Equal means
/// fall back to the larger best member, then to source order.
pub fn rank_chains(
    chains: Vec<CauseEffectChain>,
    effects: &BTreeMap<String, CausalEffect>,
    source_order: &[String],
) -> Result<Vec<CauseEffectChain>> {
    let pos: HashMap<&str, usize> = source_order
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let tau = |s: &str| -> Result<f64> {
        effects
            .get(s)
            .map(|e| e.tau_hat)
            .ok_or_else(|| Error::UnknownStatement(s.to_string()))
    };
    let place = |s: &str| pos.get(s).copied().unwrap_or(usize::MAX);
    let mut keyed = Vec::with_capacity(chains.len());
    for mut c in chains {
        let mut scored: Vec<(f64, String)> = c
            .members
            .iter()
            .map(|m| Ok((tau(m)?, m.clone())))
            .collect::<Result<_>>()?;
        scored.sort_by(|a, b| cmp_desc(a.0, b.0).then(place(&a.1).cmp(&place(&b.1))));
        let mean = scored.iter().map(|x| x.0).sum::<f64>() / scored.len() as f64;
        let best = scored[0].0;
        let first = scored
            .iter()
            .map(|x| place(&x.1))
            .min()
            .unwrap_or(usize::MAX);
        c.members = scored.into_iter().map(|x| x.1).collect();
        c.aggregate_effect = Some(mean);
        keyed.push((mean, best, first, c));
    }
    keyed.sort_by(|a, b| {
        cmp_desc(a.0, b.0)
            .then(cmp_desc(a.1, b.1))
            .then(a.2.cmp(&b.2))
    });
    Ok(keyed.into_iter().map(|k| k.3).collect())
}
