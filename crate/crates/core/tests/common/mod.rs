#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use proptest::prelude::*;
use wgparse::chart::Derivation;
use wgparse::featstruct::{unify, FeatureStructure, Value};
use wgparse::grammar::{apply, lexical_constituent, Constituent, Direction, Lexicon};
use wgparse::scoring::ScMode;
use wgparse::{load_lexicon, ChartEdge, ParseConfig, PredictionList, WordGraph, WordHypothesis};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn demo_lexicon() -> Lexicon {
    load_lexicon(&read_fixture("demo_lexicon.json")).unwrap()
}

/// Minimum path cost from `i` to `j` by enumerating every path.
pub fn enumerate_min_cost(g: &WordGraph, i: u32, j: u32) -> Option<f64> {
    if i == j {
        return Some(0.0);
    }
    g.edges()
        .iter()
        .filter(|e| e.from.0 == i && e.to.0 <= j)
        .filter_map(|e| enumerate_min_cost(g, e.to.0, j).map(|rest| e.rs + rest))
        .min_by(f64::total_cmp)
}

/// A derivation found by exhaustive search, without any packing.
#[derive(Debug, Clone)]
pub struct Derived {
    pub c: Constituent,
    pub words: Vec<String>,
    pub rs: f64,
}

/// Every constituent derivable over each node span, keyed by (from, to).
pub fn all_derivations(g: &WordGraph, lex: &Lexicon) -> HashMap<(u32, u32), Vec<Derived>> {
    let nodes: Vec<u32> = g.topological_nodes().iter().map(|n| n.0).collect();
    let mut table: HashMap<(u32, u32), Vec<Derived>> = HashMap::new();
    for e in g.edges() {
        for entry in lex.lookup(&e.word) {
            table.entry((e.from.0, e.to.0)).or_default().push(Derived {
                c: lexical_constituent(entry),
                words: vec![e.word.clone()],
                rs: e.rs,
            });
        }
    }
    // node ids increase along every edge, so narrower spans are finished first
    let mut spans: Vec<(u32, u32)> = nodes
        .iter()
        .flat_map(|&i| nodes.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
        .collect();
    spans.sort_by_key(|&(i, j)| j - i);
    for &(i, j) in &spans {
        let mut new = Vec::new();
        for &k in nodes.iter().filter(|&&k| k > i && k < j) {
            let (Some(ls), Some(rs)) = (table.get(&(i, k)), table.get(&(k, j))) else { continue };
            for l in ls {
                for r in rs {
                    let words = || [l.words.clone(), r.words.clone()].concat();
                    if let Some(c) = apply(&l.c, &r.c, Direction::Right) {
                        new.push(Derived { c, words: words(), rs: l.rs + r.rs });
                    }
                    if let Some(c) = apply(&r.c, &l.c, Direction::Left) {
                        new.push(Derived { c, words: words(), rs: l.rs + r.rs });
                    }
                }
            }
        }
        table.entry((i, j)).or_default().extend(new);
    }
    table
}

pub fn oracle_predicted(sem: &wgparse::FeatureStructure, preds: &PredictionList) -> bool {
    preds.items.iter().any(|p| unify(sem, p).is_some())
}

/// QS of a derivation computed from first principles with sc = 1.
pub fn oracle_qs(g: &WordGraph, from: u32, to: u32, d: &Derived, preds: &PredictionList, pr_match: f64) -> f64 {
    let total = enumerate_min_cost(g, g.start().0, g.final_node().0).unwrap();
    let seg = enumerate_min_cost(g, from, to).unwrap();
    let sf = total - seg + d.rs;
    let pr = if oracle_predicted(&d.c.sem, preds) { pr_match } else { 1.0 };
    sf / d.words.len() as f64 / pr
}

pub const DEMO_WORDS: &[&str] = &[
    "ja", "nein", "er", "um", "zehn", "elf", "uhr", "nach", "von", "ulm", "muenchen", "morgen",
];

/// Random valid graphs: a backbone path plus extra forward edges, at most
/// `max_edges` in total, scores with 2 decimals.
pub fn arb_graph(max_nodes: u32, max_edges: usize) -> impl Strategy<Value = WordGraph> {
    (2..=max_nodes).prop_flat_map(move |n| {
        let backbone = prop::collection::vec((0..DEMO_WORDS.len(), 100u32..5000), (n - 1) as usize);
        let extra_max = max_edges.saturating_sub((n - 1) as usize);
        let extra = prop::collection::vec((1..n, 1..n, 0..DEMO_WORDS.len(), 100u32..5000), 0..=extra_max);
        (backbone, extra).prop_map(move |(backbone, extra)| {
            let mut edges: Vec<WordHypothesis> = backbone
                .iter()
                .enumerate()
                .map(|(k, &(w, s))| WordHypothesis::new(k as u32 + 1, DEMO_WORDS[w], s as f64 / 100.0, k as u32 + 2))
                .collect();
            for (a, b, w, s) in extra {
                let (from, to) = (a.min(b), (a.max(b) + 1).min(n));
                edges.push(WordHypothesis::new(from, DEMO_WORDS[w], s as f64 / 100.0, to));
            }
            WordGraph::new(edges).expect("backbone keeps the graph valid")
        })
    })
}

pub fn arb_value(depth: u32) -> BoxedStrategy<Value> {
    let leaf = prop_oneof![
        (0i64..3).prop_map(Value::int),
        prop::sample::select(vec!["yes", "no", "time"]).prop_map(Value::sym),
        prop::sample::select(vec!["x", "y"]).prop_map(Value::var),
    ];
    if depth == 0 {
        leaf.boxed()
    } else {
        prop_oneof![3 => leaf, 1 => arb_fs(depth - 1).prop_map(Value::Fs)].boxed()
    }
}

pub fn arb_fs(depth: u32) -> BoxedStrategy<FeatureStructure> {
    prop::collection::btree_map(prop::sample::select(vec!["type", "value", "hour"]), arb_value(depth), 0..3)
        .prop_map(|m| {
            let mut fs = FeatureStructure::new();
            for (k, v) in m {
                fs.insert(k, v);
            }
            fs
        })
        .boxed()
}

/// Ground structures only: variable-free, so results compare structurally.
pub fn arb_ground(depth: u32) -> BoxedStrategy<FeatureStructure> {
    arb_fs(depth).prop_filter("ground", |fs| !fs.has_vars()).boxed()
}

fn walk<'a>(e: &'a Arc<ChartEdge>, out: &mut Vec<&'a Arc<ChartEdge>>) {
    out.push(e);
    if let Derivation::Pair { left, right, .. } = &e.derivation {
        walk(left, out);
        walk(right, out);
    }
}

/// Every edge reachable from the chart, including superseded children.
pub fn all_edges(chart: &[Arc<ChartEdge>]) -> Vec<&Arc<ChartEdge>> {
    let mut out = Vec::new();
    for e in chart {
        walk(e, &mut out);
    }
    out
}

pub fn check_edge(g: &WordGraph, e: &ChartEdge, preds: &PredictionList, cfg: &ParseConfig) -> Result<(), TestCaseError> {
    let s = &e.scores;
    prop_assert!((s.qs - s.q_a / (s.sc * s.pr)).abs() < 1e-9, "qs of {e}");
    let seg = enumerate_min_cost(g, e.from.0, e.to.0).unwrap();
    let total = enumerate_min_cost(g, g.start().0, g.final_node().0).unwrap();
    prop_assert!((s.sf - (total - seg + s.rs)).abs() < 1e-9, "sf of {e}");
    prop_assert!((s.q_a - s.sf / e.words.len() as f64).abs() < 1e-9);
    let predicted = oracle_predicted(&e.constituent.sem, preds);
    prop_assert_eq!(e.predicted, predicted);
    let want_pr = if predicted { cfg.score.pr_match } else { cfg.score.pr_nomatch };
    prop_assert_eq!(s.pr, want_pr);
    let c = &e.constituent;
    let want_sc = match cfg.score.sc_mode {
        ScMode::ConstantOne => 1.0,
        ScMode::ValenceRatio => (c.consumed as f64 + 1.0) / (c.total_valence as f64 + 1.0),
    };
    prop_assert!((s.sc - want_sc).abs() < 1e-12);
    match &e.derivation {
        Derivation::Leaf(h) => {
            prop_assert_eq!(&e.words, &vec![h.word.clone()]);
            prop_assert_eq!(s.rs, h.rs);
            prop_assert_eq!((e.from, e.to), (h.from, h.to));
        }
        Derivation::Pair { left, right, .. } => {
            prop_assert!((s.rs - (left.scores.rs + right.scores.rs)).abs() < 1e-9, "rs of {e}");
            prop_assert_eq!(left.to, right.from);
            prop_assert_eq!((e.from, e.to), (left.from, right.to));
            prop_assert_eq!(&e.words, &[left.words.clone(), right.words.clone()].concat());
        }
    }
    Ok(())
}

pub fn check_closure(chart: &[Arc<ChartEdge>]) -> Result<(), TestCaseError> {
    for l in chart {
        for r in chart.iter().filter(|r| r.from == l.to) {
            let rs = l.scores.rs + r.scores.rs;
            let len = l.words.len() + r.words.len();
            let made = [apply(&l.constituent, &r.constituent, Direction::Right), apply(&r.constituent, &l.constituent, Direction::Left)];
            for c in made.into_iter().flatten() {
                let found = chart.iter().any(|e| {
                    e.from == l.from
                        && e.to == r.to
                        && e.constituent.cat == c.cat
                        && e.constituent.remaining_valence == c.remaining_valence
                        && e.constituent.sem == c.sem
                        && e.words.len() == len
                        && e.scores.rs <= rs + 1e-9
                });
                prop_assert!(found, "{l} + {r} is missing from the chart");
            }
        }
    }
    Ok(())
}

/// Check the parser's best complete solution against exhaustive search.
/// Returns whether a complete solution exists.
pub fn compare_with_brute_force(g: &WordGraph, lex: &Lexicon, preds: &PredictionList) -> Result<bool, TestCaseError> {
    let cfg = ParseConfig::default();
    let out = wgparse::parse(g, lex, preds, &cfg).unwrap();
    let (s, f) = (g.start().0, g.final_node().0);
    let table = all_derivations(g, lex);
    let complete: Vec<(f64, &Derived)> = table
        .get(&(s, f))
        .into_iter()
        .flatten()
        .filter(|d| d.c.is_saturated())
        .map(|d| (oracle_qs(g, s, f, d, preds, cfg.score.pr_match), d))
        .collect();
    match out.complete_solutions.first() {
        None => {
            prop_assert!(complete.is_empty(), "parser missed a complete solution");
            prop_assert_eq!(out.status, wgparse::ParseStatus::Partial);
            Ok(false)
        }
        Some(best) => {
            let min = complete.iter().map(|(q, _)| *q).fold(f64::INFINITY, f64::min);
            prop_assert!((best.scores.qs - min).abs() < 1e-9, "{} vs {}", best.scores.qs, min);
            let tied = complete.iter().any(|(q, d)| (q - min).abs() < 1e-9 && d.words == best.words);
            prop_assert!(tied, "best words {:?} not among the minimal derivations", best.words);
            Ok(true)
        }
    }
}
