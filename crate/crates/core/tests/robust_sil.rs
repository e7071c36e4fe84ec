mod common;

use std::collections::HashSet;

use common::*;
use proptest::prelude::*;
use serde_json::json;
use wgparse::sil::{build_sil_output, load_trc_rules, sil_to_tri};
use wgparse::{analyze, parse, parse_graph_file, select_partials, ParseConfig, PredictionList};

fn ja_um_zehn_uhr_analysis(preds: &PredictionList) -> wgparse::Analysis {
    let g = parse_graph_file(&read_fixture("ja_um_zehn_uhr.graph")).unwrap();
    analyze(&g, &demo_lexicon(), preds, &ParseConfig::default()).unwrap()
}

#[test]
fn ja_um_zehn_uhr_with_predictions_gives_two_parts() {
    let a = ja_um_zehn_uhr_analysis(&PredictionList::yes_no_question());
    assert_eq!(a.status_line(), "partial(2 parts)");
    let parts: Vec<String> = a.results.iter().map(|e| e.string()).collect();
    assert_eq!(parts, ["ja", "um_zehn_uhr"]);
}

#[test]
fn ja_um_zehn_uhr_without_predictions_prefers_er() {
    let a = ja_um_zehn_uhr_analysis(&PredictionList::empty());
    let parts: Vec<String> = a.results.iter().map(|e| e.string()).collect();
    assert_eq!(parts, ["er", "um_zehn_uhr"]);
}

#[test]
fn sil_output_matches_the_golden_structures() {
    let a = ja_um_zehn_uhr_analysis(&PredictionList::yes_no_question());
    let sil = serde_json::to_value(build_sil_output(&a.results)).unwrap();
    let want = json!([
        {"id": "A",
         "syn": {"id": "B", "category": "part", "string": "ja", "score": 29.84},
         "sem": {"id": "B", "type": "dm_marker", "value": "yes"}},
        {"id": "C",
         "syn": {"id": "D", "category": "prep", "string": "um_zehn_uhr", "score": 36.74},
         "sem": {"id": "D", "type": "time", "thehour": {"id": "E", "type": "hour", "value": 10}}}
    ]);
    assert_eq!(sil, want);
}

#[test]
fn tri_of_the_two_parts() {
    let rules = load_trc_rules(&read_fixture("trc_rules.json")).unwrap();
    let with = ja_um_zehn_uhr_analysis(&PredictionList::yes_no_question());
    assert_eq!(sil_to_tri(&build_sil_output(&with.results), &rules).to_string(), "[dm_marker:yes, time:10]");
    let without = ja_um_zehn_uhr_analysis(&PredictionList::empty());
    assert_eq!(sil_to_tri(&build_sil_output(&without.results), &rules).to_string(), "[time:10]");
}

#[test]
fn ids_are_unique_within_an_output() {
    let a = ja_um_zehn_uhr_analysis(&PredictionList::yes_no_question());
    let sil = build_sil_output(&a.results);
    let mut ids = HashSet::new();
    for s in &sil {
        assert_eq!(s.syn.id, s.sem.get("id").unwrap().to_string());
        assert!(ids.insert(s.id.clone()));
        assert!(ids.insert(s.syn.id.clone()));
        assert_eq!(s.syn.string.split('_').count(), a.results.iter().find(|e| e.string() == s.syn.string).unwrap().scores.length);
    }
}

#[test]
fn greedy_selection_can_miss_the_cheapest_cover() {
    // er and ja tie at QS 15 and anchor the walk; the single edge nach
    // covers the whole graph at QS 16, half the greedy sum
    let g = parse_graph_file("[1 er 10.0 2]\n[2 ja 5.0 3]\n[1 nach 16.0 3]").unwrap();
    let out = parse(&g, &demo_lexicon(), &PredictionList::empty(), &ParseConfig::default()).unwrap();
    let seq = select_partials(&out.chart, &g).unwrap();
    let words: Vec<String> = seq.parts.iter().map(|e| e.string()).collect();
    assert_eq!(words, ["er", "ja"]);
    let greedy: f64 = seq.parts.iter().map(|e| e.scores.qs).sum();
    let nach = out.chart.iter().find(|e| e.string() == "nach").unwrap().scores.qs;
    assert!((greedy - 30.0).abs() < 1e-9);
    assert!((nach - 16.0).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partial_sequences_are_contiguous(g in arb_graph(7, 12), yes_no in any::<bool>()) {
        let preds = if yes_no { PredictionList::yes_no_question() } else { PredictionList::empty() };
        let out = parse(&g, &demo_lexicon(), &preds, &ParseConfig::default()).unwrap();
        let seq = select_partials(&out.chart, &g).unwrap();
        prop_assert_eq!(seq.parts.first().unwrap().from, g.start());
        prop_assert_eq!(seq.parts.last().unwrap().to, g.final_node());
        for w in seq.parts.windows(2) {
            prop_assert_eq!(w[0].to, w[1].from);
        }
        let best = out.chart.iter().map(|e| e.scores.qs).fold(f64::INFINITY, f64::min);
        prop_assert!(seq.parts.iter().any(|e| e.scores.qs == best));
    }
}
