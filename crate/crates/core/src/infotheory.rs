//! Entropy, (conditional) mutual information and symmetric uncertainty over
//! the empirical distribution of boolean spectrum columns, plus the signed
//! correlation ratio that drives the selection weights.
//!
//! All measures use the linearized form `H(X) = -sum phi(p(x))` with a
//! pluggable convex `phi`; the default `phi(p) = p log2 p` is Shannon.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{SliceSpectrum, SpectrumStats};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Phi {
    Shannon,
    /// `phi(p) = (p^q - p) / (q - 1)`; `q = 2` gives the quadratic (Gini) entropy.
    Tsallis {
        q: f64,
    },
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Shannon => f.write_str("shannon"),
            Phi::Tsallis { q } if *q == 2.0 => f.write_str("quadratic"),
            Phi::Tsallis { q } => write!(f, "tsallis:{q}"),
        }
    }
}

impl FromStr for Phi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shannon" => Ok(Phi::Shannon),
            "quadratic" | "gini" => Ok(Phi::Tsallis { q: 2.0 }),
            _ => {
                let q = s
                    .strip_prefix("tsallis:")
                    .and_then(|q| q.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::Input(format!(
                            "unknown phi `{s}` (expected shannon, quadratic or tsallis:<q>)"
                        ))
                    })?;
                if !(q > 0.0) || q == 1.0 {
                    return Err(Error::Input(format!(
                        "tsallis q must be positive and != 1, got {q}"
                    )));
                }
                Ok(Phi::Tsallis { q })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyConfig {
    pub phi: Phi,
    /// Logarithm base for the Shannon choice.
    pub base: f64,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            phi: Phi::Shannon,
            base: 2.0,
        }
    }
}

impl EntropyConfig {
    pub fn with_phi(phi: Phi) -> Self {
        EntropyConfig {
            phi,
            ..Default::default()
        }
    }

    fn phi(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        match self.phi {
            Phi::Shannon => p * p.log(self.base),
            Phi::Tsallis { q } => (p.powf(q) - p) / (q - 1.0),
        }
    }

    /// Entropy of an empirical distribution given as cell counts.
    fn h_counts(&self, counts: &[usize]) -> f64 {
        let n: usize = counts.iter().sum();
        if n == 0 {
            return 0.0;
        }
        let h = -counts
            .iter()
            .map(|&c| self.phi(c as f64 / n as f64))
            .sum::<f64>();
        h.max(0.0)
    }
}

/// Joint counts `[x][y][z]` of up to three paired boolean columns.
type Cube = [[[usize; 2]; 2]; 2];

fn cube(x: &[bool], y: Option<&[bool]>, z: Option<&[bool]>) -> Cube {
    let mut c = [[[0usize; 2]; 2]; 2];
    for i in 0..x.len() {
        let yi = y.map_or(0, |y| y[i] as usize);
        let zi = z.map_or(0, |z| z[i] as usize);
        c[x[i] as usize][yi][zi] += 1;
    }
    c
}

fn check_len(n: usize, others: &[usize]) -> Result<()> {
    if n == 0 {
        return Err(Error::Input("empty sample".into()));
    }
    if others.iter().any(|&m| m != n) {
        return Err(Error::Input(format!(
            "paired samples differ in length: {n} vs {others:?}"
        )));
    }
    Ok(())
}

fn clamp_nonneg(v: f64) -> f64 {
    if v < 0.0 && v > -EPS {
        0.0
    } else {
        v
    }
}

/// `I(X;Y)` within one `z` slice of the cube, plus that slice's weight.
fn mi_slice(cfg: &EntropyConfig, c: &Cube, z: usize) -> (f64, usize) {
    let hx = cfg.h_counts(&[c[0][0][z] + c[0][1][z], c[1][0][z] + c[1][1][z]]);
    let n = c[0][0][z] + c[0][1][z] + c[1][0][z] + c[1][1][z];
    if n == 0 {
        return (0.0, 0);
    }
    let mut cond = 0.0;
    for (x0, x1) in c[0].iter().zip(&c[1]) {
        let ny = x0[z] + x1[z];
        if ny > 0 {
            cond += ny as f64 / n as f64 * cfg.h_counts(&[x0[z], x1[z]]);
        }
    }
    (hx - cond, n)
}

pub fn entropy(column: &[bool], cfg: &EntropyConfig) -> Result<f64> {
    check_len(column.len(), &[])?;
    let ones = column.iter().filter(|&&b| b).count();
    Ok(cfg.h_counts(&[column.len() - ones, ones]))
}

/// `I(X;Y) = H(X) - sum_y p(y) H(X | Y=y)`.
pub fn mutual_information(x: &[bool], y: &[bool], cfg: &EntropyConfig) -> Result<f64> {
    check_len(x.len(), &[y.len()])?;
    let c = cube(x, Some(y), None);
    Ok(clamp_nonneg(mi_slice(cfg, &c, 0).0))
}

/// `I(X;Y|Z) = sum_z p(z) [H(X|Z=z) - sum_y p(y|z) H(X|Y=y,Z=z)]`.
pub fn conditional_mutual_information(
    x: &[bool],
    y: &[bool],
    z: &[bool],
    cfg: &EntropyConfig,
) -> Result<f64> {
    check_len(x.len(), &[y.len(), z.len()])?;
    let c = cube(x, Some(y), Some(z));
    let n = x.len() as f64;
    let total = (0..2)
        .map(|zv| {
            let (mi, nz) = mi_slice(cfg, &c, zv);
            nz as f64 / n * mi
        })
        .sum();
    Ok(clamp_nonneg(total))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Uncertainty {
    pub value: f64,
    /// False when both columns are constant and the ratio is undefined.
    pub defined: bool,
}

/// `U(X,Y) = 2 I(X;Y) / (H(X) + H(Y))`, clamped to `[0, 1]`.
pub fn symmetric_uncertainty(x: &[bool], y: &[bool], cfg: &EntropyConfig) -> Result<Uncertainty> {
    let denom = entropy(x, cfg)? + entropy(y, cfg)?;
    if denom <= EPS {
        return Ok(Uncertainty {
            value: 0.0,
            defined: false,
        });
    }
    let mi = mutual_information(x, y, cfg)?;
    Ok(Uncertainty {
        value: (2.0 * mi / denom).clamp(0.0, 1.0),
        defined: true,
    })
}

/// Relevance of a statement column to the failure indicator.
pub fn relevance(column: &[bool], outcomes: &[bool], cfg: &EntropyConfig) -> Result<f64> {
    Ok(symmetric_uncertainty(column, outcomes, cfg)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    Redundant,
    Interdependent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRecord {
    pub i: String,
    pub j: String,
    /// `I(s_i; Out | s_j)`
    pub cmi: f64,
    /// `I(s_i; Out)`
    pub mi: f64,
    pub cr: f64,
    pub kind: CorrelationKind,
    /// Set when `H(s_i) + H(Out) = 0`; `cr` is then 0.
    pub degenerate: bool,
}

/// Correlation ratio of column `xi` conditioned on `xj`, with respect to the
/// outcome column. Returns `(cmi, mi, cr, kind, degenerate)`.
pub(crate) fn correlation_from_columns(
    xi: &[bool],
    xj: &[bool],
    out: &[bool],
    cfg: &EntropyConfig,
) -> Result<(f64, f64, f64, CorrelationKind, bool)> {
    let mi = mutual_information(xi, out, cfg)?;
    let cmi = conditional_mutual_information(xi, out, xj, cfg)?;
    let kind = if cmi >= mi - EPS {
        CorrelationKind::Interdependent
    } else {
        CorrelationKind::Redundant
    };
    let denom = entropy(xi, cfg)? + entropy(out, cfg)?;
    if denom <= EPS {
        return Ok((cmi, mi, 0.0, kind, true));
    }
    let cr = if (cmi - mi).abs() <= EPS {
        0.0
    } else {
        (2.0 * (cmi - mi) / denom).clamp(-1.0, 1.0)
    };
    Ok((cmi, mi, cr, kind, false))
}

/// `CR(i, j)`: the signed change in `s_i`'s relevance once `s_j` is known.
/// Negative values mark `s_i` redundant given `s_j`, positive values mark the
/// pair interdependent.
pub fn correlation_ratio(
    i: &str,
    j: &str,
    spectrum: &SliceSpectrum,
    cfg: &EntropyConfig,
) -> Result<CorrelationRecord> {
    if i == j {
        return Err(Error::Input(format!(
            "correlation ratio of `{i}` with itself"
        )));
    }
    let xi = spectrum.column(spectrum.require_index(i)?);
    let xj = spectrum.column(spectrum.require_index(j)?);
    let (cmi, mi, cr, kind, degenerate) =
        correlation_from_columns(&xi, &xj, &spectrum.outcomes(), cfg)?;
    Ok(CorrelationRecord {
        i: i.to_string(),
        j: j.to_string(),
        cmi,
        mi,
        cr,
        kind,
        degenerate,
    })
}

/// Which verdict class a statement characterizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelevanceClass {
    Failing,
    Passing,
}

impl RelevanceClass {
    pub fn sign(self) -> f64 {
        match self {
            RelevanceClass::Failing => 1.0,
            RelevanceClass::Passing => -1.0,
        }
    }
}

/// +1 when the statement is proportionally more present in failing runs
/// than in passing runs, -1 otherwise (ties included).
pub fn relevance_class(stats: &SpectrumStats, statement: &str) -> Result<RelevanceClass> {
    let c = stats
        .get(statement)
        .ok_or_else(|| Error::UnknownStatement(statement.to_string()))?;
    Ok(relevance_class_of(c.ncf, c.nuf, c.ncp, c.nup))
}

pub(crate) fn relevance_class_of(ncf: usize, nuf: usize, ncp: usize, nup: usize) -> RelevanceClass {
    let nf = ncf + nuf;
    let np = ncp + nup;
    let fail_side = if nf == 0 {
        -1.0
    } else {
        (ncf as f64 - nuf as f64) / nf as f64
    };
    let pass_side = if np == 0 {
        -1.0
    } else {
        (ncp as f64 - nup as f64) / np as f64
    };
    if fail_side > pass_side {
        RelevanceClass::Failing
    } else {
        RelevanceClass::Passing
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::build_stats;
    use crate::spectrum::{SpectrumMode, Verdict};

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn entropy_edge_cases() {
        let cfg = EntropyConfig::default();
        assert!((entropy(&bits("111111000000"), &cfg).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(entropy(&bits("1111"), &cfg).unwrap(), 0.0);
        assert!(entropy(&[], &cfg).is_err());
        // 8 of 12 covered
        let h = entropy(&bits("111111000110"), &cfg).unwrap();
        assert!((h - 0.918_295_834).abs() < 1e-9);
    }

    #[test]
    fn self_information_and_independence() {
        let cfg = EntropyConfig::default();
        let x = bits("1101001011");
        let hx = entropy(&x, &cfg).unwrap();
        assert!((mutual_information(&x, &x, &cfg).unwrap() - hx).abs() < 1e-12);
        assert_eq!(
            mutual_information(&bits("1100"), &bits("1010"), &cfg).unwrap(),
            0.0
        );
        assert!(mutual_information(&bits("110"), &bits("10"), &cfg).is_err());
    }

    #[test]
    fn constant_condition_reduces_to_mi() {
        let cfg = EntropyConfig::default();
        let x = bits("11010010");
        let y = bits("10110010");
        let z = bits("11111111");
        assert_eq!(
            conditional_mutual_information(&x, &y, &z, &cfg).unwrap(),
            mutual_information(&x, &y, &cfg).unwrap()
        );
    }

    #[test]
    fn symmetric_uncertainty_extremes() {
        let cfg = EntropyConfig::default();
        let x = bits("110100");
        assert_eq!(symmetric_uncertainty(&x, &x, &cfg).unwrap().value, 1.0);
        assert_eq!(
            symmetric_uncertainty(&bits("1100"), &bits("1010"), &cfg)
                .unwrap()
                .value,
            0.0
        );
        let u = symmetric_uncertainty(&bits("111"), &bits("000"), &cfg).unwrap();
        assert!(!u.defined);
        assert_eq!(u.value, 0.0);
    }

    #[test]
    fn constant_conditioning_column_gives_zero_ratio() {
        let cfg = EntropyConfig::default();
        let (cmi, mi, cr, kind, _) =
            correlation_from_columns(&bits("1101"), &bits("1111"), &bits("1100"), &cfg).unwrap();
        assert_eq!(cmi, mi);
        assert_eq!(cr, 0.0);
        assert_eq!(kind, CorrelationKind::Interdependent);
    }

    #[test]
    fn relevance_class_rules() {
        let s = SliceSpectrum::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["f1".into(), "f2".into(), "p1".into()],
            vec![
                vec![true, false, true],
                vec![true, false, true],
                vec![false, true, true],
            ],
            vec![Verdict::Fail, Verdict::Fail, Verdict::Pass],
            SpectrumMode::Coverage,
        )
        .unwrap();
        let stats = build_stats(&s).unwrap();
        assert_eq!(
            relevance_class(&stats, "a").unwrap(),
            RelevanceClass::Failing
        );
        assert_eq!(
            relevance_class(&stats, "b").unwrap(),
            RelevanceClass::Passing
        );
        // covered everywhere: 1 vs 1 is a tie
        assert_eq!(
            relevance_class(&stats, "c").unwrap(),
            RelevanceClass::Passing
        );
        // no passing tests
        assert_eq!(relevance_class_of(1, 1, 0, 0), RelevanceClass::Failing);
    }

    #[test]
    fn phi_parsing() {
        assert_eq!("shannon".parse::<Phi>().unwrap(), Phi::Shannon);
        assert_eq!("quadratic".parse::<Phi>().unwrap(), Phi::Tsallis { q: 2.0 });
        assert_eq!(
            "tsallis:1.5".parse::<Phi>().unwrap(),
            Phi::Tsallis { q: 1.5 }
        );
        assert!("tsallis:1".parse::<Phi>().is_err());
        assert!("renyi".parse::<Phi>().is_err());
    }

    #[test]
    fn quadratic_entropy_is_gini() {
        let cfg = EntropyConfig::with_phi(Phi::Tsallis { q: 2.0 });
        assert!((entropy(&bits("1100"), &cfg).unwrap() - 0.5).abs() < 1e-15);
    }
}
