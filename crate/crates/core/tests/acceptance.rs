//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use inferfl::causal::{
    failure_causing_effect, fit_propensity, match_executions, penalized_gradient,
    penalized_log_likelihood, unmatched_treated_gap, CausalConfig, MatchingStrategy,
};
use inferfl::corpus::{motivating_example, BASE_PROGRAMS};
use inferfl::driver::{run_inference, trace_program, PipelineConfig};
use inferfl::evaluation::{
    baseline_report, exam_score, statements_examined, ExamMode, RankedReport, Technique,
};
use inferfl::infotheory::{
    conditional_mutual_information, correlation_ratio, entropy, mutual_information,
    symmetric_uncertainty, EntropyConfig,
};
use inferfl::minilang::{
    backward_slice, execute_suite, parse, run_with_trace, DepKind, PdgEdge, Program, StaticPdg,
    DEFAULT_STEP_LIMIT,
};
use inferfl::spectrum::{build_stats, SliceSpectrum, SpectrumMode, TestCase, Verdict};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !($cond) {
            return Err(format!($($msg)*));
        }
    };
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol + 1e-12
}

fn golden_trace() -> inferfl::driver::TraceArtifacts {
    let g = motivating_example();
    trace_program(&parse(&g.source).unwrap(), &g.tests).unwrap()
}

fn golden_inference() -> (
    inferfl::driver::TraceArtifacts,
    inferfl::driver::InferenceResult,
) {
    let t = golden_trace();
    let r = run_inference(
        &t.coverage,
        &t.slice,
        &t.pdg,
        None,
        &PipelineConfig::default(),
    )
    .unwrap();
    (t, r)
}

// 1 -------------------------------------------------------------------------

fn baselines() -> Outcome {
    let start = Instant::now();
    let t = golden_trace();
    let stats = build_stats(&t.coverage).map_err(|e| e.to_string())?;
    let expected: [(Technique, [f64; 3], f64); 3] = [
        (Technique::Ochiai, [0.87, 0.81, 0.81], 0.01),
        (Technique::O, [4.0, 3.0, 3.0], 0.0),
        (Technique::Gp19, [16.97, 14.69, 14.69], 0.01),
    ];
    for (tech, values, tol) in expected {
        for (s, want) in ["S6", "S9", "S15"].iter().zip(values) {
            let got = tech
                .baseline_score(stats.get(s).unwrap(), stats.nf)
                .unwrap();
            ensure!(
                close(got, want, tol),
                "{tech}({s}) = {got:.4}, expected {want}"
            );
        }
        baseline_report(&t.coverage, tech).map_err(|e| e.to_string())?;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    Ok(format!(
        "Ochiai/O/GP19 for S6, S9, S15 reproduced in {elapsed:.1?}"
    ))
}

// 2 -------------------------------------------------------------------------

fn selection_trace() -> Outcome {
    let (_, r) = golden_inference();
    let sel = &r.selection;
    let mut checked = 0;
    let mut cell = |label: String, got: Option<f64>, want: f64| -> Result<(), String> {
        checked += 1;
        match got {
            Some(g) if close(g, want, 0.01) => Ok(()),
            Some(g) => Err(format!("{label} = {g:.4}, expected {want}")),
            None => Err(format!("{label} missing")),
        }
    };
    let find = |v: &[(String, f64)], s: &str| v.iter().find(|(k, _)| k == s).map(|x| x.1);
    for (s, want) in [
        ("S6", 0.48),
        ("S9", 0.34),
        ("S11", 0.12),
        ("S13", 0.23),
        ("S15", 0.34),
    ] {
        cell(format!("R({s})"), sel.relevance.get(s).copied(), want)?;
    }
    for (s, sign) in [
        ("S6", 1.0),
        ("S9", 1.0),
        ("S11", -1.0),
        ("S13", -1.0),
        ("S15", 1.0),
    ] {
        cell(
            format!("RC({s})"),
            sel.relevance_class.get(s).copied(),
            sign,
        )?;
    }
    let cr_given = |k: usize, s: &str| {
        sel.iterations[k]
            .correlations
            .iter()
            .find(|c| c.i == s)
            .map(|c| c.cr)
    };
    ensure!(
        sel.iterations.len() == 3,
        "{} iterations",
        sel.iterations.len()
    );
    ensure!(
        sel.iterations[0].selected == "S6" && sel.iterations[1].selected == "S9",
        "selection order"
    );
    for (s, want) in [("S9", -0.12), ("S11", 0.15), ("S13", -0.23), ("S15", -0.12)] {
        cell(format!("CR({s},S6)"), cr_given(0, s), want)?;
    }
    for (s, want) in [("S11", 0.08), ("S13", 0.18), ("S15", 0.41)] {
        cell(format!("CR({s},S9)"), cr_given(1, s), want)?;
    }
    for (s, want) in [("S9", 0.88), ("S11", 1.15), ("S13", 0.77), ("S15", 0.88)] {
        cell(
            format!("w1({s})"),
            find(&sel.iterations[0].weights, s),
            want,
        )?;
    }
    for (s, want) in [("S11", 1.24), ("S13", 0.91), ("S15", 1.24)] {
        cell(
            format!("w2({s})"),
            find(&sel.iterations[1].weights, s),
            want,
        )?;
    }
    for (s, want) in [
        ("S6", 0.48),
        ("S9", 0.34),
        ("S11", -0.12),
        ("S13", -0.23),
        ("S15", 0.34),
    ] {
        cell(format!("J1({s})"), find(&sel.iterations[0].scores, s), want)?;
    }
    for (s, want) in [("S9", 0.30), ("S11", -0.14), ("S13", -0.18), ("S15", 0.30)] {
        cell(format!("J2({s})"), find(&sel.iterations[1].scores, s), want)?;
    }
    for (s, want) in [("S11", -0.15), ("S13", -0.21), ("S15", 0.42)] {
        cell(format!("J3({s})"), find(&sel.iterations[2].scores, s), want)?;
    }
    ensure!(
        find(&sel.iterations[2].scores, "S6").is_none(),
        "S6 is still scored in round 3"
    );
    Ok(format!(
        "{checked} cells within 0.01; J3(S6) excluded (S6 no longer a candidate)"
    ))
}

// 3 -------------------------------------------------------------------------

fn pipeline_ordering() -> Outcome {
    let (_, r) = golden_inference();
    ensure!(
        r.selection.selected == ["S6", "S9", "S15"],
        "selection {:?}",
        r.selection.selected
    );
    let chains: BTreeSet<BTreeSet<&str>> = r
        .report
        .chains
        .iter()
        .map(|c| c.members.iter().map(String::as_str).collect())
        .collect();
    let want: BTreeSet<BTreeSet<&str>> = [vec!["S6"], vec!["S9", "S15"]]
        .into_iter()
        .map(|c| c.into_iter().collect())
        .collect();
    ensure!(chains == want, "chains {chains:?}");
    let link = r
        .report
        .chains
        .iter()
        .find(|c| c.members.len() == 2)
        .unwrap();
    ensure!(
        link.links.iter().any(|e| e.from == "S15" && e.to == "S9"),
        "chain {{S9,S15}} lacks the S15 -> S9 link"
    );
    let pos = |s: &str| r.report.position(s).unwrap();
    ensure!(
        pos("S9") < pos("S6") && pos("S15") < pos("S6"),
        "report order {:?}",
        r.report.statements().take(5).collect::<Vec<_>>()
    );
    let top: Vec<&str> = r.report.statements().take(3).collect();
    Ok(format!(
        "selected S6, S9, S15; chains {{S6}} and {{S9<-S15}}; top three {top:?}"
    ))
}

// 4 -------------------------------------------------------------------------

fn slice_fixtures() -> Vec<(Program, BTreeMap<String, i64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = motivating_example();
    let golden = parse(&g.source).unwrap();
    let mut out: Vec<_> = g
        .tests
        .iter()
        .map(|t| (golden.clone(), t.inputs.clone()))
        .collect();
    for base in BASE_PROGRAMS {
        let p = parse(base.source).unwrap();
        for _ in 0..4 {
            let inputs = base
                .inputs
                .iter()
                .map(|&(v, lo, hi)| (v.to_string(), rng.gen_range(lo..=hi)))
                .collect();
            out.push((p.clone(), inputs));
        }
    }
    out
}

fn brute_force_reach(edges: &[(usize, usize)], n: usize, root: usize) -> BTreeSet<usize> {
    let mut reached = vec![false; n];
    reached[root] = true;
    loop {
        let mut changed = false;
        for &(from, to) in edges {
            if reached[from] && !reached[to] {
                reached[to] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&i| reached[i]).collect()
}

fn check_slices() -> Result<usize, String> {
    let mut roots_checked = 0;
    for (p, inputs) in slice_fixtures() {
        let trace = run_with_trace(&p, &inputs, DEFAULT_STEP_LIMIT).map_err(|e| e.to_string())?;
        let ddg = &trace.ddg;
        let edges: Vec<(usize, usize)> = ddg.edges().map(|(f, t, _)| (f, t)).collect();
        let n = ddg.len();
        let step = (n / 60).max(1);
        for root in (0..n).step_by(step) {
            let fast = backward_slice(ddg, root).map_err(|e| e.to_string())?;
            let oracle = brute_force_reach(&edges, n, root);
            ensure!(
                fast.instances == oracle,
                "instance sets differ at root {root}"
            );
            let stmts: BTreeSet<usize> = oracle.iter().map(|&i| ddg.nodes()[i].stmt).collect();
            ensure!(
                fast.statements == stmts,
                "statement projection differs at root {root}"
            );
            roots_checked += 1;
        }
    }
    Ok(roots_checked)
}

fn h_oracle(counts: &[usize], n: usize) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

fn info_oracle(x: &[bool], y: &[bool], z: &[bool]) -> (f64, f64, f64) {
    let n = x.len();
    let idx = |b: bool| usize::from(b);
    let mut cx = [0usize; 2];
    let mut cy = [0usize; 2];
    let mut cz = [0usize; 2];
    let mut cxy = [[0usize; 2]; 2];
    let mut cxz = [[0usize; 2]; 2];
    let mut cyz = [[0usize; 2]; 2];
    let mut cxyz = [[[0usize; 2]; 2]; 2];
    for k in 0..n {
        let (a, b, c) = (idx(x[k]), idx(y[k]), idx(z[k]));
        cx[a] += 1;
        cy[b] += 1;
        cz[c] += 1;
        cxy[a][b] += 1;
        cxz[a][c] += 1;
        cyz[b][c] += 1;
        cxyz[a][b][c] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            if cxy[a][b] > 0 {
                let pxy = cxy[a][b] as f64 / nf;
                mi += pxy * (pxy / ((cx[a] as f64 / nf) * (cy[b] as f64 / nf))).log2();
            }
        }
    }
    let mut cmi = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                if cxyz[a][b][c] > 0 {
                    let pxyz = cxyz[a][b][c] as f64 / nf;
                    let ratio = (cz[c] as f64 * cxyz[a][b][c] as f64)
                        / (cxz[a][c] as f64 * cyz[b][c] as f64);
                    cmi += pxyz * ratio.log2();
                }
            }
        }
    }
    (h_oracle(&cx, n), mi, cmi)
}

fn check_information() -> Result<usize, String> {
    let cfg = EntropyConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut cases = 0;
    for n in 1..=20 {
        for _ in 0..100 {
            let col = |rng: &mut ChaCha8Rng| -> Vec<bool> { (0..n).map(|_| rng.gen()).collect() };
            let (x, y, z) = (col(&mut rng), col(&mut rng), col(&mut rng));
            let (h, mi, cmi) = info_oracle(&x, &y, &z);
            let e = |r: inferfl::Result<f64>| r.map_err(|e| e.to_string());
            let got_h = e(entropy(&x, &cfg))?;
            let got_mi = e(mutual_information(&x, &y, &cfg))?;
            let got_cmi = e(conditional_mutual_information(&x, &y, &z, &cfg))?;
            ensure!((got_h - h).abs() <= 1e-12, "H n={n}: {got_h} vs {h}");
            ensure!((got_mi - mi).abs() <= 1e-12, "MI n={n}: {got_mi} vs {mi}");
            ensure!(
                (got_cmi - cmi).abs() <= 1e-12,
                "CMI n={n}: {got_cmi} vs {cmi}"
            );
            cases += 1;
        }
    }
    Ok(cases)
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Walks every ordering consistent with the scores and returns the
/// (fewest, most) statements inspected until the first faulty one.
fn ranking_walk(entries: &[(String, f64, u8)], faulty: &BTreeSet<String>) -> (usize, usize) {
    let mut sorted: Vec<usize> = (0..entries.len()).collect();
    sorted.sort_by(|&a, &b| {
        entries[a]
            .2
            .cmp(&entries[b].2)
            .then(entries[b].1.total_cmp(&entries[a].1))
    });
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in sorted {
        match blocks.last_mut() {
            Some(b) if entries[b[0]].1 == entries[i].1 && entries[b[0]].2 == entries[i].2 => {
                b.push(i)
            }
            _ => blocks.push(vec![i]),
        }
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    let (mut best, mut worst) = (usize::MAX, 0);
    loop {
        let pos = blocks
            .iter()
            .flatten()
            .position(|&i| faulty.contains(&entries[i].0))
            .expect("a faulty statement is ranked")
            + 1;
        best = best.min(pos);
        worst = worst.max(pos);
        // advance the odometer of per-block permutations
        let mut k = 0;
        while k < blocks.len() && !next_permutation(&mut blocks[k]) {
            k += 1;
        }
        if k == blocks.len() {
            break;
        }
    }
    (best, worst)
}

fn check_exam() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut done = 0;
    while done < 300 {
        let n = rng.gen_range(1..=12);
        let levels = rng.gen_range(1..=n.max(2) / 2 + 1);
        let entries: Vec<(String, f64, u8)> = (0..n)
            .map(|i| {
                (
                    format!("S{}", i + 1),
                    rng.gen_range(0..levels) as f64 * 0.25,
                    rng.gen_range(1..=2),
                )
            })
            .collect();
        let mut sizes = BTreeMap::new();
        for e in &entries {
            *sizes.entry((e.2, e.1.to_bits())).or_insert(0u64) += 1;
        }
        let perms: f64 = sizes
            .values()
            .map(|&s| (1..=s).product::<u64>() as f64)
            .product();
        if perms > 200_000.0 {
            continue;
        }
        let mut faulty = BTreeSet::new();
        for _ in 0..rng.gen_range(1..=3.min(n)) {
            faulty.insert(entries[rng.gen_range(0..n)].0.clone());
        }
        let order: Vec<String> = entries.iter().map(|e| e.0.clone()).collect();
        let report = RankedReport::from_scores(Technique::Ochiai, entries.clone(), &order)
            .map_err(|e| e.to_string())?;
        let (best, worst) = ranking_walk(&entries, &faulty);
        let e = |r: inferfl::Result<usize>| r.map_err(|e| e.to_string());
        let got_best = e(statements_examined(&report, &faulty, ExamMode::Best))?;
        let got_worst = e(statements_examined(&report, &faulty, ExamMode::Worst))?;
        ensure!(
            got_best == best,
            "best {got_best} vs walk {best} on {entries:?} / {faulty:?}"
        );
        ensure!(
            got_worst == worst,
            "worst {got_worst} vs walk {worst} on {entries:?} / {faulty:?}"
        );
        let pct = exam_score(&report, &faulty, ExamMode::Worst).map_err(|e| e.to_string())?;
        ensure!(
            close(pct, 100.0 * worst as f64 / n as f64, 1e-12),
            "EXAM percentage {pct}"
        );
        done += 1;
    }
    Ok(done)
}

/// One binary confounder `C`, treatment `T` depending on it.
fn confounded_spectrum(c: &[bool], t: &[bool], y: &[bool]) -> (SliceSpectrum, StaticPdg) {
    let n = c.len();
    let spectrum = SliceSpectrum::new(
        vec!["C".into(), "T".into()],
        (0..n).map(|i| format!("t{i}")).collect(),
        (0..n).map(|i| vec![c[i], t[i]]).collect(),
        y.iter()
            .map(|&f| if f { Verdict::Fail } else { Verdict::Pass })
            .collect(),
        SpectrumMode::Slice,
    )
    .unwrap();
    let pdg = StaticPdg::new(
        vec!["C".into(), "T".into()],
        vec![PdgEdge {
            from: "T".into(),
            to: "C".into(),
            kind: DepKind::Data,
        }],
    )
    .unwrap();
    (spectrum, pdg)
}

fn stratified_effect(c: &[bool], t: &[bool], y: &[bool]) -> f64 {
    let n = c.len() as f64;
    [false, true]
        .into_iter()
        .map(|stratum| {
            let idx: Vec<usize> = (0..c.len()).filter(|&i| c[i] == stratum).collect();
            let mean = |g: bool| {
                let ys: Vec<f64> = idx
                    .iter()
                    .filter(|&&i| t[i] == g)
                    .map(|&i| f64::from(u8::from(y[i])))
                    .collect();
                ys.iter().sum::<f64>() / ys.len() as f64
            };
            idx.len() as f64 / n * (mean(true) - mean(false))
        })
        .sum()
}

fn check_stratification() -> Result<usize, String> {
    let c = [true, true, true, true, false, false, false, false];
    let t = [true, true, true, false, true, false, false, false];
    let mut checked = 0;
    for bits in 0u32..256 {
        let y: Vec<bool> = (0..8).map(|k| bits >> k & 1 == 1).collect();
        let (spectrum, pdg) = confounded_spectrum(&c, &t, &y);
        let oracle = stratified_effect(&c, &t, &y);
        for matching in [MatchingStrategy::Nearest, MatchingStrategy::Full] {
            let cfg = CausalConfig {
                matching,
                ..CausalConfig::default()
            };
            let e =
                failure_causing_effect("T", &pdg, &spectrum, &cfg).map_err(|e| e.to_string())?;
            ensure!(
                e.degenerate.is_none(),
                "degenerate estimate for outcomes {bits:08b}"
            );
            ensure!(
                (e.tau_hat - oracle).abs() <= 1e-9,
                "{matching}: tau {} vs stratified {oracle} for outcomes {bits:08b}",
                e.tau_hat
            );
            checked += 1;
        }
    }
    Ok(checked)
}

fn oracle_suites() -> Outcome {
    let roots = check_slices()?;
    let info = check_information()?;
    let exams = check_exam()?;
    let strata = check_stratification()?;
    Ok(format!(
        "{roots} slice roots, {info} H/MI/CMI triples, {exams} tie-walk reports, {strata} stratified estimates"
    ))
}

// 5 -------------------------------------------------------------------------

struct Fixture {
    treatment: Vec<bool>,
    rows: Vec<Vec<bool>>,
    outcomes: Vec<bool>,
}

fn random_fixture(rng: &mut ChaCha8Rng) -> Fixture {
    loop {
        let n = rng.gen_range(20..=120);
        let k = rng.gen_range(1..=4);
        let coef: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let rows: Vec<Vec<bool>> = (0..n)
            .map(|_| (0..k).map(|_| rng.gen_bool(0.5)).collect())
            .collect();
        let treatment: Vec<bool> = rows
            .iter()
            .map(|r| {
                let z: f64 = r
                    .iter()
                    .zip(&coef)
                    .map(|(&x, b)| if x { *b } else { 0.0 })
                    .sum();
                rng.gen_bool(1.0 / (1.0 + (-z).exp()))
            })
            .collect();
        let outcomes: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        let treated = treatment.iter().filter(|&&t| t).count();
        if treated > 1 && treated < n - 1 {
            return Fixture {
                treatment,
                rows,
                outcomes,
            };
        }
    }
}

fn fixture_spectrum(f: &Fixture) -> (SliceSpectrum, StaticPdg) {
    let k = f.rows[0].len();
    let mut statements: Vec<String> = (0..k).map(|i| format!("C{i}")).collect();
    statements.push("T".into());
    let matrix = f
        .rows
        .iter()
        .zip(&f.treatment)
        .map(|(r, &t)| r.iter().copied().chain([t]).collect())
        .collect();
    let spectrum = SliceSpectrum::new(
        statements.clone(),
        (0..f.treatment.len()).map(|i| format!("t{i}")).collect(),
        matrix,
        f.outcomes
            .iter()
            .map(|&y| if y { Verdict::Fail } else { Verdict::Pass })
            .collect(),
        SpectrumMode::Slice,
    )
    .unwrap();
    let edges = (0..k)
        .map(|i| PdgEdge {
            from: "T".into(),
            to: format!("C{i}"),
            kind: DepKind::Data,
        })
        .collect();
    (spectrum, StaticPdg::new(statements, edges).unwrap())
}

fn numerical_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut worst_rel = 0.0f64;
    let mut gap_ratio = 0.0f64;
    let mut tau_seen = 0;
    for _ in 0..50 {
        let f = random_fixture(&mut rng);
        let ridge = 10f64.powf(rng.gen_range(-4.0..0.0));
        let beta: Vec<f64> = (0..=f.rows[0].len())
            .map(|_| rng.gen_range(-1.5..1.5))
            .collect();
        let g =
            penalized_gradient(&beta, &f.treatment, &f.rows, ridge).map_err(|e| e.to_string())?;
        let h = 1e-5;
        let fd: Vec<f64> = (0..beta.len())
            .map(|k| {
                let mut up = beta.clone();
                let mut dn = beta.clone();
                up[k] += h;
                dn[k] -= h;
                let l =
                    |b: &[f64]| penalized_log_likelihood(b, &f.treatment, &f.rows, ridge).unwrap();
                (l(&up) - l(&dn)) / (2.0 * h)
            })
            .collect();
        let diff = g
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-8);
        worst_rel = worst_rel.max(diff / norm);
        ensure!(
            diff / norm <= 1e-4,
            "gradient relative error {}",
            diff / norm
        );

        let model = fit_propensity(&f.treatment, &f.rows, 1e-4).map_err(|e| e.to_string())?;
        let ps: Vec<f64> = f.rows.iter().map(|r| model.predict(r)).collect();
        let before = unmatched_treated_gap(&f.treatment, &ps).unwrap();
        let matched = match_executions(&f.treatment, &ps, MatchingStrategy::Nearest, 0.2)
            .map_err(|e| e.to_string())?;
        let after = matched.mean_treated_gap(&f.treatment, &ps);
        ensure!(
            matches!(after, Some(a) if a < before),
            "matching left the propensity gap at {after:?} (was {before})"
        );
        gap_ratio = gap_ratio.max(after.unwrap() / before);

        let (spectrum, pdg) = fixture_spectrum(&f);
        for matching in [MatchingStrategy::Nearest, MatchingStrategy::Full] {
            let cfg = CausalConfig {
                matching,
                ..CausalConfig::default()
            };
            let e =
                failure_causing_effect("T", &pdg, &spectrum, &cfg).map_err(|e| e.to_string())?;
            ensure!(
                (-1.0..=1.0).contains(&e.tau_hat),
                "tau {} out of range",
                e.tau_hat
            );
            tau_seen += 1;
        }
    }

    // statements independent of outcome and confounders
    let mut taus = Vec::new();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = 200;
        let c: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let t: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let y: Vec<bool> = c
            .iter()
            .map(|&ci| rng.gen_bool(if ci { 0.7 } else { 0.2 }))
            .collect();
        let (spectrum, pdg) = confounded_spectrum(&c, &t, &y);
        let e = failure_causing_effect("T", &pdg, &spectrum, &CausalConfig::default())
            .map_err(|e| e.to_string())?;
        ensure!(
            (-1.0..=1.0).contains(&e.tau_hat),
            "tau {} out of range",
            e.tau_hat
        );
        taus.push(e.tau_hat);
    }
    let mean = taus.iter().sum::<f64>() / taus.len() as f64;
    let mean_abs = taus.iter().map(|t| t.abs()).sum::<f64>() / taus.len() as f64;
    let max_abs = taus.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let within = taus.iter().filter(|t| t.abs() <= 0.1).count();
    ensure!(mean.abs() <= 0.1, "null-effect mean tau {mean}");
    ensure!(mean_abs <= 0.1, "null-effect mean |tau| {mean_abs}");
    Ok(format!(
        "gradient rel err <= {worst_rel:.1e}; matched/unmatched gap <= {gap_ratio:.2}; {tau_seen} taus in [-1,1]; null tau mean {mean:+.3}, mean |tau| {mean_abs:.3}, {within}/100 within 0.1, max |tau| {max_abs:.3}"
    ))
}

// 6 -------------------------------------------------------------------------

fn runner(seed: u8) -> TestRunner {
    let cfg = Config {
        cases: 400,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

fn columns() -> impl Strategy<Value = (Vec<bool>, Vec<bool>, Vec<bool>)> {
    (1usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

fn property_bounds() -> Outcome {
    let cfg = EntropyConfig::default();
    runner(1)
        .run(&columns(), |(x, y, z)| {
            let u = symmetric_uncertainty(&x, &y, &cfg).unwrap().value;
            prop_assert!((0.0..=1.0).contains(&u), "U = {}", u);
            let mi_xy = mutual_information(&x, &y, &cfg).unwrap();
            let mi_yx = mutual_information(&y, &x, &cfg).unwrap();
            prop_assert!(mi_xy >= 0.0 && (mi_xy - mi_yx).abs() <= 1e-12);
            let cmi = conditional_mutual_information(&x, &y, &z, &cfg).unwrap();
            prop_assert!(cmi >= 0.0, "CMI = {}", cmi);
            Ok(())
        })
        .map_err(|e| format!("information bounds: {e}"))?;

    let spectra = (2usize..30, 2usize..8).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(any::<bool>(), m), n),
            prop::collection::vec(any::<bool>(), n),
        )
    });
    runner(2)
        .run(&spectra, |(matrix, fails)| {
            let m = matrix[0].len();
            let s = SliceSpectrum::new(
                (0..m).map(|i| format!("S{}", i + 1)).collect(),
                (0..matrix.len()).map(|i| format!("t{i}")).collect(),
                matrix,
                fails
                    .iter()
                    .map(|&f| if f { Verdict::Fail } else { Verdict::Pass })
                    .collect(),
                SpectrumMode::Coverage,
            )
            .unwrap();
            for i in 1..=m {
                for j in 1..=m {
                    if i != j {
                        let r = correlation_ratio(&format!("S{i}"), &format!("S{j}"), &s, &cfg)
                            .unwrap();
                        prop_assert!((-1.0..=1.0).contains(&r.cr), "CR = {}", r.cr);
                    }
                }
            }
            Ok(())
        })
        .map_err(|e| format!("correlation ratio bounds: {e}"))?;

    let programs: Vec<Program> = BASE_PROGRAMS
        .iter()
        .map(|b| parse(b.source).unwrap())
        .collect();
    let runs = (
        0..BASE_PROGRAMS.len(),
        prop::collection::vec(0.0f64..1.0, 4),
        any::<bool>(),
    );
    runner(3)
        .run(&runs, |(k, draws, perturb)| {
            let base = &BASE_PROGRAMS[k];
            let inputs: BTreeMap<String, i64> = base
                .inputs
                .iter()
                .zip(&draws)
                .map(|(&(v, lo, hi), &u)| (v.to_string(), lo + ((hi - lo + 1) as f64 * u) as i64))
                .collect();
            let trace = run_with_trace(&programs[k], &inputs, DEFAULT_STEP_LIMIT).unwrap();
            let mut expected = trace.output_values();
            if perturb {
                match expected.first_mut() {
                    Some(v) => *v = v.wrapping_add(1),
                    None => expected.push(0),
                }
            }
            let tc = TestCase::new("t", inputs, expected);
            let run = &execute_suite(&programs[k], &[tc], DEFAULT_STEP_LIMIT).unwrap()[0];
            let slice = run.slice_statements();
            prop_assert!(
                slice.is_subset(&run.trace.covered),
                "slice row escapes coverage row"
            );
            Ok(())
        })
        .map_err(|e| format!("slice within coverage: {e}"))?;
    Ok("U in [0,1], CR in [-1,1], MI/CMI >= 0, MI symmetric, slice rows within coverage rows (1200 cases)".into())
}

// 7 and 8 -------------------------------------------------------------------

fn cli(args: &[&str]) -> Result<(String, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_inferfl"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    ensure!(
        out.status.success(),
        "inferfl {args:?} exited {:?}: {stderr}",
        out.status.code()
    );
    Ok((stdout, stderr))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn corpus_run() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = dir.path().join("corpus");
    let json = dir.path().join("eval.json");
    let start = Instant::now();
    cli(&["corpus-gen", "--out", path(&corpus), "--seed", "7"])?;
    let (table, _) = cli(&["evaluate", "--corpus", path(&corpus), "--json", path(&json)])?;
    let elapsed = start.elapsed();
    ensure!(elapsed.as_secs_f64() < 60.0, "corpus run took {elapsed:?}");
    ensure!(
        table.contains("Average number of statements examined (best case)")
            && table.contains("Average number of statements examined (worst case)"),
        "comparative table missing"
    );
    let out: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let cases = out["cases"].as_array().unwrap();
    ensure!(
        out["skipped"].as_array().unwrap().is_empty(),
        "skipped cases: {}",
        out["skipped"]
    );
    let seeded: Vec<&Value> = cases
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("seeded-"))
        .collect();
    let programs: BTreeSet<&str> = seeded
        .iter()
        .map(|c| c["name"].as_str().unwrap().splitn(3, '-').nth(2).unwrap())
        .collect();
    ensure!(programs.len() >= 10, "{} distinct programs", programs.len());
    let mut multi = 0;
    for c in &seeded {
        let tests = c["tests"].as_u64().unwrap();
        let faults = c["faults"].as_array().unwrap().len();
        ensure!((50..=200).contains(&tests), "{}: {tests} tests", c["name"]);
        ensure!((1..=3).contains(&faults), "{}: {faults} faults", c["name"]);
        for t in c["techniques"].as_array().unwrap() {
            let steps = t["expense"].as_array().unwrap();
            ensure!(
                steps.len() == faults,
                "{} {}: {} rounds for {faults} faults",
                c["name"],
                t["technique"],
                steps.len()
            );
            let failing: Vec<u64> = steps
                .iter()
                .map(|s| s["failing"].as_u64().unwrap())
                .collect();
            ensure!(
                failing.windows(2).all(|w| w[1] < w[0]),
                "{} {}: failing counts {failing:?}",
                c["name"],
                t["technique"]
            );
        }
        if faults > 1 {
            multi += 1;
        }
    }
    Ok(format!(
        "{} seeded cases over {} programs evaluated in {elapsed:.1?}; {multi} multi-fault bundles with strictly decreasing failing counts",
        seeded.len(),
        programs.len()
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let g = motivating_example();
    std::fs::write(d.join("program.src"), &g.source).unwrap();
    std::fs::write(
        d.join("tests.json"),
        serde_json::to_string(&g.tests).unwrap(),
    )
    .unwrap();
    cli(&[
        "trace",
        "--program",
        path(&d.join("program.src")),
        "--tests",
        path(&d.join("tests.json")),
        "--out",
        path(&d.join("t")),
    ])?;
    let localize = |out: &str| {
        cli(&[
            "localize",
            "--spectrum",
            path(&d.join("t/coverage.json")),
            "--effect-spectrum",
            path(&d.join("t/slice.json")),
            "--pdg",
            path(&d.join("t/pdg.json")),
            "--out",
            path(&d.join(out)),
        ])
    };
    localize("a.json")?;
    localize("b.json")?;
    let a = std::fs::read(d.join("a.json")).unwrap();
    ensure!(
        a == std::fs::read(d.join("b.json")).unwrap(),
        "localize reports differ"
    );

    cli(&[
        "corpus-gen",
        "--out",
        path(&d.join("corpus")),
        "--seed",
        "3",
    ])?;
    let evaluate = |json: &str| {
        cli(&[
            "evaluate",
            "--corpus",
            path(&d.join("corpus")),
            "--json",
            path(&d.join(json)),
        ])
    };
    let (ta, _) = evaluate("ea.json")?;
    let (tb, _) = evaluate("eb.json")?;
    ensure!(ta == tb, "evaluate tables differ");
    let ja = std::fs::read(d.join("ea.json")).unwrap();
    ensure!(
        ja == std::fs::read(d.join("eb.json")).unwrap(),
        "evaluate JSON differs"
    );
    Ok(format!(
        "localize ({} bytes) and evaluate ({} + {} bytes) byte-identical across runs",
        a.len(),
        ta.len(),
        ja.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("golden baselines", baselines),
        ("golden selection trace", selection_trace),
        ("golden pipeline ordering", pipeline_ordering),
        ("oracle equivalence", oracle_suites),
        ("numerical checks", numerical_checks),
        ("bounds and symmetry properties", property_bounds),
        ("seeded corpus end to end", corpus_run),
        ("end-to-end determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("criterion {} PASS {name} ({secs:.2}s): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name} ({secs:.2}s): {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
