use std::collections::BTreeSet;

use proptest::prelude::*;

use inferfl::driver::{run_inference, PipelineConfig};
use inferfl::evaluation::{
    baseline_report, statements_examined, ExamMode, RankedReport, Technique,
};
use inferfl::minilang::{DepKind, PdgEdge, StaticPdg};
use inferfl::selection::{threshold, WEIGHT_FLOOR};
use inferfl::spectrum::{SliceSpectrum, SpectrumMode, Verdict};

#[derive(Debug, Clone)]
struct Case {
    spectrum: SliceSpectrum,
    pdg: StaticPdg,
}

fn cases() -> impl Strategy<Value = Case> {
    (3usize..40, 2usize..10)
        .prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(prop::collection::vec(any::<bool>(), m), n),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec((0..m, 0..m, any::<bool>()), 0..2 * m),
            )
        })
        .prop_filter("needs a failing test", |(_, fails, _)| {
            fails.iter().any(|&f| f)
        })
        .prop_map(|(matrix, fails, raw_edges)| {
            let m = matrix[0].len();
            let ids: Vec<String> = (1..=m).map(|i| format!("S{i}")).collect();
            let spectrum = SliceSpectrum::new(
                ids.clone(),
                (0..matrix.len()).map(|i| format!("t{i}")).collect(),
                matrix,
                fails
                    .iter()
                    .map(|&f| if f { Verdict::Fail } else { Verdict::Pass })
                    .collect(),
                SpectrumMode::Slice,
            )
            .unwrap();
            let edges = raw_edges
                .into_iter()
                .filter(|(a, b, _)| a > b)
                .map(|(a, b, data)| PdgEdge {
                    from: ids[a].clone(),
                    to: ids[b].clone(),
                    kind: if data {
                        DepKind::Data
                    } else {
                        DepKind::Control
                    },
                })
                .collect();
            Case {
                pdg: StaticPdg::new(ids, edges).unwrap(),
                spectrum,
            }
        })
}

fn check_report(report: &RankedReport, statements: &[String]) -> Result<(), TestCaseError> {
    let listed: BTreeSet<&str> = report.statements().collect();
    prop_assert_eq!(listed.len(), statements.len());
    prop_assert_eq!(report.len(), statements.len());
    for w in report.entries.windows(2) {
        prop_assert!(w[0].tier <= w[1].tier);
        if w[0].tier == w[1].tier {
            // equal within the tie tolerance means same group, source order
            prop_assert!(w[0].score >= w[1].score || w[0].tie_group == w[1].tie_group);
        }
        prop_assert!(w[0].tie_group <= w[1].tie_group);
    }
    let grouped: usize = report.tie_groups.iter().map(Vec::len).sum();
    prop_assert_eq!(grouped, statements.len());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn selection_respects_threshold_and_floors(case in cases(), fraction in 0.05f64..=1.0) {
        let cfg = PipelineConfig { delta_fraction: fraction, ..PipelineConfig::default() };
        let r = run_inference(&case.spectrum, &case.spectrum, &case.pdg, None, &cfg).unwrap();
        let sel = &r.selection;
        prop_assert_eq!(sel.delta, threshold(fraction, sel.candidates.len()));
        prop_assert_eq!(sel.selected.len(), (sel.delta + 1).min(sel.candidates.len()));
        let distinct: BTreeSet<&String> = sel.selected.iter().collect();
        prop_assert_eq!(distinct.len(), sel.selected.len());
        prop_assert!(sel.selected.iter().all(|s| sel.candidates.contains(s)));
        prop_assert!(sel.weights.values().all(|&w| w >= WEIGHT_FLOOR));
        prop_assert!(sel.chains.len() <= cfg.chain_cap);
        let chained: BTreeSet<&String> = sel.chains.iter().flat_map(|c| &c.members).collect();
        let unchained: BTreeSet<&String> = sel.unchained.iter().collect();
        prop_assert!(chained.is_disjoint(&unchained));
        prop_assert_eq!(chained.len() + unchained.len(), sel.selected.len());
        for e in r.effects.values() {
            prop_assert!((-1.0..=1.0).contains(&e.tau_hat));
        }
        check_report(&r.report, case.spectrum.statements())?;
        prop_assert!(r.report.entries.iter().take(sel.selected.len()).all(|e| e.tier == 1));
    }

    #[test]
    fn baseline_reports_are_total_orders(case in cases(), k in 0usize..4) {
        let tech = [Technique::Ochiai, Technique::O, Technique::Gp19, Technique::Dstar][k];
        let report = baseline_report(&case.spectrum, tech).unwrap();
        check_report(&report, case.spectrum.statements())?;
        let faulty: BTreeSet<String> = [case.spectrum.statements()[0].clone()].into();
        let best = statements_examined(&report, &faulty, ExamMode::Best).unwrap();
        let worst = statements_examined(&report, &faulty, ExamMode::Worst).unwrap();
        prop_assert!(1 <= best && best <= worst && worst <= report.len());
    }

    #[test]
    fn spectrum_json_round_trips(case in cases()) {
        let back = SliceSpectrum::from_json(&case.spectrum.to_json()).unwrap();
        prop_assert_eq!(back, case.spectrum.clone());
        let pdg = StaticPdg::from_json(&case.pdg.to_json()).unwrap();
        prop_assert_eq!(pdg, case.pdg.clone());
    }
}
