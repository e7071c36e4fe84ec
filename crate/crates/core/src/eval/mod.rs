//! Information Content (IC) evaluation.
//!
//! `IC = 100 * (1 - (i + s + d) / items)` where `items` counts the reference
//! pairs (RTRI) and `i`, `s`, `d` count inserted, substituted and deleted
//! pairs in the parser output (PTRI). Counting aligns pairs by attribute:
//!
//! 1. a PTRI pair equal to an unconsumed RTRI pair is correct;
//! 2. a remaining PTRI pair sharing only the attribute with an unconsumed
//!    RTRI pair is a substitution;
//! 3. leftover RTRI pairs are deletions, leftover PTRI pairs insertions.
//!
//! IC can be negative and is never clamped.

mod generate;

pub use generate::{generate_corpus, word_accuracy, write_corpus, GenParams, GeneratedUtterance, ScoreModel};

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::ParseConfig;
use crate::featstruct::{FeatureStructure, Value};
use crate::grammar::Lexicon;
use crate::predictions::PredictionList;
use crate::robust::analyze;
use crate::sil::{build_sil_output, sil_to_tri, TrcMappingRule, TriSet};
use crate::wordgraph::parse_graph_file;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Json { path: PathBuf, reason: String },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("reference TRI set is empty")]
    EmptyReference,
    #[error("utterance {0}: graph file has no annotation")]
    MissingAnnotation(String),
    #[error("utterance {0}: annotation has no graph file")]
    MissingGraph(String),
    #[error("utterance {id}: empty reference annotation")]
    EmptyAnnotation { id: String },
    #[error("utterance {id}: unknown context {label:?}")]
    UnknownContext { id: String, label: String },
    #[error("utterance {id}: word {word:?} is not in the lexicon")]
    WordNotInLexicon { id: String, word: String },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

impl EvalError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        EvalError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcCounts {
    pub items: usize,
    pub i: usize,
    pub s: usize,
    pub d: usize,
    pub ic: f64,
}

impl IcCounts {
    fn from_counts(items: usize, i: usize, s: usize, d: usize) -> Self {
        let ic = 100.0 * (1.0 - (i + s + d) as f64 / items as f64);
        Self { items, i, s, d, ic }
    }

    /// Every reference item deleted; used for utterances that failed.
    pub fn all_deleted(items: usize) -> Self {
        Self::from_counts(items, 0, 0, items)
    }

    pub fn errors(&self) -> usize {
        self.i + self.s + self.d
    }
}

pub fn ic_score(rtri: &TriSet, ptri: &TriSet) -> Result<IcCounts, EvalError> {
    if rtri.is_empty() {
        return Err(EvalError::EmptyReference);
    }
    let mut ref_used = vec![false; rtri.len()];
    let mut hyp_used = vec![false; ptri.len()];
    for (h, hp) in ptri.pairs.iter().enumerate() {
        if let Some(r) = (0..rtri.len()).find(|&r| !ref_used[r] && rtri.pairs[r] == *hp) {
            ref_used[r] = true;
            hyp_used[h] = true;
        }
    }
    let mut s = 0;
    for (h, hp) in ptri.pairs.iter().enumerate() {
        if hyp_used[h] {
            continue;
        }
        if let Some(r) = (0..rtri.len()).find(|&r| !ref_used[r] && rtri.pairs[r].attr == hp.attr) {
            ref_used[r] = true;
            hyp_used[h] = true;
            s += 1;
        }
    }
    let d = ref_used.iter().filter(|u| !**u).count();
    let i = hyp_used.iter().filter(|u| !**u).count();
    Ok(IcCounts::from_counts(rtri.len(), i, s, d))
}

/// One line of the annotations file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: String,
    pub transcript: String,
    pub context: String,
    pub rtri: TriSet,
}

impl Annotation {
    pub fn word_count(&self) -> usize {
        self.transcript.split_whitespace().count()
    }
}

pub const ANNOTATIONS_FILE: &str = "annotations.json";
pub const GRAPH_EXT: &str = "graph";

pub fn load_annotations(path: &Path) -> Result<Vec<Annotation>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| EvalError::Json {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub annotation: Annotation,
    pub graph_text: String,
}

/// A corpus directory: `annotations.json` plus one `<id>.graph` per
/// utterance.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub items: Vec<CorpusItem>,
}

impl Corpus {
    pub fn load(dir: &Path) -> Result<Self, EvalError> {
        let annotations = load_annotations(&dir.join(ANNOTATIONS_FILE))?;
        let mut graph_ids = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(|e| EvalError::io(dir, e))? {
            let path = entry.map_err(|e| EvalError::io(dir, e))?.path();
            if path.extension().and_then(|x| x.to_str()) == Some(GRAPH_EXT) {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    graph_ids.push(stem.to_string());
                }
            }
        }
        graph_ids.sort();
        if let Some(orphan) = graph_ids
            .iter()
            .find(|id| !annotations.iter().any(|a| &a.id == *id))
        {
            return Err(EvalError::MissingAnnotation(orphan.clone()));
        }
        let mut items = Vec::with_capacity(annotations.len());
        for a in annotations {
            if !graph_ids.contains(&a.id) {
                return Err(EvalError::MissingGraph(a.id));
            }
            let path = dir.join(format!("{}.{GRAPH_EXT}", a.id));
            let graph_text = std::fs::read_to_string(&path).map_err(|e| EvalError::io(&path, e))?;
            items.push(CorpusItem {
                annotation: a,
                graph_text,
            });
        }
        Ok(Self { items })
    }
}

/// Prediction lists by dialogue-context label. `none` is always present
/// and empty.
#[derive(Debug, Clone)]
pub struct ContextTable {
    lists: HashMap<String, PredictionList>,
}

impl ContextTable {
    pub fn new(lists: impl IntoIterator<Item = PredictionList>) -> Self {
        let mut map: HashMap<String, PredictionList> =
            lists.into_iter().map(|l| (l.label.clone(), l)).collect();
        map.entry("none".into()).or_insert_with(PredictionList::empty);
        Self { lists: map }
    }

    /// yes_no_question and time_question.
    pub fn builtin() -> Self {
        let time = PredictionList {
            label: "time_question".into(),
            items: vec![FeatureStructure::new().with("type", Value::sym("time"))],
        };
        Self::new([PredictionList::yes_no_question(), time])
    }

    pub fn get(&self, label: &str) -> Option<&PredictionList> {
        self.lists.get(label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceReport {
    pub id: String,
    pub words: usize,
    pub context: String,
    pub without: IcCounts,
    pub with: IcCounts,
    pub ptri_without: TriSet,
    pub ptri_with: TriSet,
    pub t_without_ms: f64,
    pub t_with_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub utterances: usize,
    pub items: usize,
    /// Micro-averaged: counts summed over utterances, then the IC formula.
    pub ic_without: f64,
    pub ic_with: f64,
    pub macro_ic_without: f64,
    pub macro_ic_with: f64,
    pub t_without_ms: f64,
    pub t_with_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthGroup {
    pub group: String,
    pub utterances: usize,
    pub items: usize,
    pub ic_without: f64,
    pub ic_with: f64,
    pub improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub utterances: Vec<UtteranceReport>,
    pub aggregate: Aggregate,
    pub by_length: Vec<LengthGroup>,
}

fn micro_ic<'a>(counts: impl Iterator<Item = &'a IcCounts>) -> (usize, f64) {
    let (items, errors) = counts.fold((0, 0), |(n, e), c| (n + c.items, e + c.errors()));
    let ic = if items == 0 {
        f64::NAN
    } else {
        100.0 * (1.0 - errors as f64 / items as f64)
    };
    (items, ic)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (n, sum) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Upper word count of the "short" group in [`CorpusReport::by_length`].
pub const SHORT_UTTERANCE_WORDS: usize = 2;

impl CorpusReport {
    fn from_rows(utterances: Vec<UtteranceReport>) -> Self {
        let (items, ic_without) = micro_ic(utterances.iter().map(|u| &u.without));
        let (_, ic_with) = micro_ic(utterances.iter().map(|u| &u.with));
        let aggregate = Aggregate {
            utterances: utterances.len(),
            items,
            ic_without,
            ic_with,
            macro_ic_without: mean(utterances.iter().map(|u| u.without.ic)),
            macro_ic_with: mean(utterances.iter().map(|u| u.with.ic)),
            t_without_ms: mean(utterances.iter().map(|u| u.t_without_ms)),
            t_with_ms: mean(utterances.iter().map(|u| u.t_with_ms)),
        };
        let mut by_length = Vec::new();
        for (group, short) in [("short", true), ("long", false)] {
            let rows: Vec<&UtteranceReport> = utterances
                .iter()
                .filter(|u| (u.words <= SHORT_UTTERANCE_WORDS) == short)
                .collect();
            if rows.is_empty() {
                continue;
            }
            let (items, without) = micro_ic(rows.iter().map(|u| &u.without));
            let (_, with) = micro_ic(rows.iter().map(|u| &u.with));
            by_length.push(LengthGroup {
                group: group.into(),
                utterances: rows.len(),
                items,
                ic_without: without,
                ic_with: with,
                improvement: with - without,
            });
        }
        Self {
            utterances,
            aggregate,
            by_length,
        }
    }

    pub fn group(&self, name: &str) -> Option<&LengthGroup> {
        self.by_length.iter().find(|g| g.group == name)
    }

    /// Aligned table with the columns ic-pr, t-pr, ic+pr, t+pr (times in ms).
    pub fn table(&self) -> String {
        let w = self
            .utterances
            .iter()
            .map(|u| u.id.len())
            .max()
            .unwrap_or(0)
            .max(9);
        let mut out = format!(
            "{:<w$} {:>5} {:>8} {:>8} {:>8} {:>8}\n",
            "id", "words", "ic-pr", "t-pr", "ic+pr", "t+pr"
        );
        for u in &self.utterances {
            out.push_str(&format!(
                "{:<w$} {:>5} {:>8.2} {:>8.2} {:>8.2} {:>8.2}\n",
                u.id, u.words, u.without.ic, u.t_without_ms, u.with.ic, u.t_with_ms
            ));
        }
        let a = &self.aggregate;
        out.push_str(&format!(
            "{:<w$} {:>5} {:>8.2} {:>8.2} {:>8.2} {:>8.2}\n",
            "micro", "", a.ic_without, a.t_without_ms, a.ic_with, a.t_with_ms
        ));
        out.push_str(&format!(
            "{:<w$} {:>5} {:>8.2} {:>8} {:>8.2} {:>8}\n",
            "macro", "", a.macro_ic_without, "", a.macro_ic_with, ""
        ));
        for g in &self.by_length {
            out.push_str(&format!(
                "{:<w$} {:>5} {:>8.2} {:>8} {:>8.2} {:>8}\n",
                g.group, g.utterances, g.ic_without, "", g.ic_with, ""
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Drop every `t_*` field, leaving the deterministic part of a report.
pub fn strip_timing(v: &serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Object(m) => serde_json::Value::Object(
            m.iter()
                .filter(|(k, _)| !k.starts_with("t_"))
                .map(|(k, x)| (k.clone(), strip_timing(x)))
                .collect(),
        ),
        serde_json::Value::Array(xs) => serde_json::Value::Array(xs.iter().map(strip_timing).collect()),
        other => other.clone(),
    }
}

/// Everything a corpus run needs besides the corpus itself.
pub struct EvalSetup<'a> {
    pub lexicon: &'a Lexicon,
    pub rules: &'a [TrcMappingRule],
    pub contexts: &'a ContextTable,
    pub parse: &'a ParseConfig,
    pub jobs: usize,
}

/// Parse, select and translate one graph into PTRI.
pub fn utterance_ptri(
    graph_text: &str,
    lexicon: &Lexicon,
    preds: &PredictionList,
    cfg: &ParseConfig,
    rules: &[TrcMappingRule],
) -> Result<TriSet, String> {
    let g = parse_graph_file(graph_text).map_err(|e| e.to_string())?;
    let analysis = analyze(&g, lexicon, preds, cfg).map_err(|e| e.to_string())?;
    let sil = build_sil_output(&analysis.results);
    Ok(sil_to_tri(&sil, rules))
}

fn evaluate_item(item: &CorpusItem, preds: &PredictionList, setup: &EvalSetup<'_>) -> UtteranceReport {
    let a = &item.annotation;
    let empty = PredictionList::empty();
    let mut error = None;
    let mut run = |p: &PredictionList| {
        let t0 = Instant::now();
        let res = utterance_ptri(&item.graph_text, setup.lexicon, p, setup.parse, setup.rules);
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        match res {
            Ok(ptri) => {
                let counts = ic_score(&a.rtri, &ptri).expect("references validated non-empty");
                (counts, ptri, ms)
            }
            Err(e) => {
                log::warn!("utterance {}: {e}", a.id);
                error = Some(e);
                (IcCounts::all_deleted(a.rtri.len()), TriSet::default(), ms)
            }
        }
    };
    let (without, ptri_without, t_without_ms) = run(&empty);
    let (with, ptri_with, t_with_ms) = run(preds);
    UtteranceReport {
        id: a.id.clone(),
        words: a.word_count(),
        context: a.context.clone(),
        without,
        with,
        ptri_without,
        ptri_with,
        t_without_ms,
        t_with_ms,
        error,
    }
}

/// Parse every utterance without and with its context predictions.
///
/// Utterances are independent; with `jobs > 1` they run on a thread pool
/// and are reported in corpus order regardless.
pub fn run_corpus(corpus: &Corpus, setup: &EvalSetup<'_>) -> Result<CorpusReport, EvalError> {
    if corpus.items.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut preds = Vec::with_capacity(corpus.items.len());
    for item in &corpus.items {
        let a = &item.annotation;
        if a.rtri.is_empty() {
            return Err(EvalError::EmptyAnnotation { id: a.id.clone() });
        }
        let p = setup.contexts.get(&a.context).ok_or_else(|| EvalError::UnknownContext {
            id: a.id.clone(),
            label: a.context.clone(),
        })?;
        preds.push(p);
    }
    let jobs = setup.jobs.max(1);
    let rows: Vec<UtteranceReport> = if jobs == 1 {
        corpus
            .items
            .iter()
            .zip(&preds)
            .map(|(item, p)| evaluate_item(item, p, setup))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            corpus
                .items
                .par_iter()
                .zip(preds.par_iter())
                .map(|(item, p)| evaluate_item(item, p, setup))
                .collect()
        })
    };
    Ok(CorpusReport::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sil::TriPair;

    fn tri(pairs: &[(&str, &str)]) -> TriSet {
        TriSet::new(pairs.iter().map(|(a, v)| TriPair::new(a, v)).collect())
    }

    #[test]
    fn one_deletion_is_fifty_percent() {
        let c = ic_score(&tri(&[("dm_marker", "yes"), ("time", "10")]), &tri(&[("time", "10")])).unwrap();
        assert_eq!((c.i, c.s, c.d, c.items), (0, 0, 1, 2));
        assert_eq!(c.ic, 50.0);
    }

    #[test]
    fn identity_is_hundred() {
        let r = tri(&[("dm_marker", "yes"), ("time", "10"), ("time", "10")]);
        let c = ic_score(&r, &r).unwrap();
        assert_eq!((c.i, c.s, c.d), (0, 0, 0));
        assert_eq!(c.ic, 100.0);
    }

    #[test]
    fn insertion_counts() {
        let c = ic_score(&tri(&[("time", "10")]), &tri(&[("time", "10"), ("goalcity", "ulm")])).unwrap();
        assert_eq!((c.i, c.s, c.d), (1, 0, 0));
        assert_eq!(c.ic, 0.0);
    }

    #[test]
    fn substitution_and_negative_ic() {
        let c = ic_score(&tri(&[("time", "10")]), &tri(&[("time", "2"), ("date", "x"), ("date", "y")])).unwrap();
        assert_eq!((c.i, c.s, c.d), (2, 1, 0));
        assert_eq!(c.ic, -200.0);
    }

    #[test]
    fn value_match_beats_earlier_attribute_match() {
        // time:10 must pair with time:10 even though time:2 comes first
        let c = ic_score(&tri(&[("time", "2"), ("time", "10")]), &tri(&[("time", "10")])).unwrap();
        assert_eq!((c.i, c.s, c.d), (0, 0, 1));
    }

    #[test]
    fn empty_reference() {
        assert!(matches!(
            ic_score(&TriSet::default(), &tri(&[("a", "b")])),
            Err(EvalError::EmptyReference)
        ));
    }

    #[test]
    fn strip_timing_removes_t_fields() {
        let v = serde_json::json!({"a":1,"t_x":2,"b":[{"t_y":3,"c":4}]});
        assert_eq!(strip_timing(&v), serde_json::json!({"a":1,"b":[{"c":4}]}));
    }

    #[test]
    fn builtin_contexts() {
        let c = ContextTable::builtin();
        assert!(c.get("none").unwrap().is_empty());
        assert_eq!(c.get("yes_no_question").unwrap().items.len(), 2);
        assert!(c.get("nope").is_none());
    }
}
