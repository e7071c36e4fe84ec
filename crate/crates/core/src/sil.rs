//! SIL result structures and their translation into task-relevant
//! information (TRI) pairs.
//!
//! A SIL structure has a top-level id, a `syn` part (category, surface
//! string, display score) and the edge semantics as `sem`. `syn` and `sem`
//! share one id, and every nested sub-structure of `sem` receives its own
//! id. Ids come from an [`IdGen`] shared across one output, so structures
//! of the same output never share ids.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::chart::ChartEdge;
use crate::featstruct::{subsumes, FeatureStructure, Value};
use crate::scoring::display_round;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SilError {
    #[error("malformed TRC rules: {0}")]
    MalformedRules(String),
}

/// Alphabetic id tokens: A, B, ..., Z, AA, AB, ...
#[derive(Debug, Clone, Default)]
pub struct IdGen {
    next: usize,
}

impl IdGen {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self) -> String {
        let mut n = self.next;
        self.next += 1;
        let mut s = Vec::new();
        loop {
            s.push(b'A' + (n % 26) as u8);
            if n < 26 {
                break;
            }
            n = n / 26 - 1;
        }
        s.reverse();
        String::from_utf8(s).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilSyn {
    pub id: String,
    pub category: String,
    pub string: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilStructure {
    pub id: String,
    pub syn: SilSyn,
    pub sem: FeatureStructure,
}

fn inject_ids(fs: &mut FeatureStructure, ids: &mut IdGen) {
    for (_, v) in fs.iter_mut() {
        if let Value::Fs(inner) = v {
            if inner.get("id").is_none() {
                inner.insert("id", Value::sym(&ids.fresh()));
            }
            inject_ids(inner, ids);
        }
    }
}

pub fn build_sil(e: &ChartEdge, ids: &mut IdGen) -> SilStructure {
    let id = ids.fresh();
    let shared = ids.fresh();
    let mut sem = e.constituent.sem.clone();
    sem.insert("id", Value::sym(&shared));
    inject_ids(&mut sem, ids);
    SilStructure {
        id,
        syn: SilSyn {
            id: shared,
            category: e.constituent.cat.major.clone(),
            string: e.string(),
            score: display_round(e.scores.qs),
        },
        sem,
    }
}

pub fn build_sil_output<'a>(edges: impl IntoIterator<Item = &'a std::sync::Arc<ChartEdge>>) -> Vec<SilStructure> {
    let mut ids = IdGen::new();
    edges.into_iter().map(|e| build_sil(e, &mut ids)).collect()
}

/// One attribute:value item of task-relevant information.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TriPair {
    pub attr: String,
    #[serde(deserialize_with = "atom_string")]
    pub value: String,
}

impl TriPair {
    pub fn new(attr: &str, value: impl ToString) -> Self {
        Self {
            attr: attr.to_string(),
            value: value.to_string(),
        }
    }
}

impl fmt::Display for TriPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.attr, self.value)
    }
}

fn atom_string<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    match serde_json::Value::deserialize(d)? {
        serde_json::Value::String(s) => Ok(s),
        serde_json::Value::Number(n) if n.is_i64() => Ok(n.to_string()),
        other => Err(serde::de::Error::custom(format!("TRI value must be an atom, got {other}"))),
    }
}

/// Bag of TRI pairs (RTRI reference or PTRI parser output).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TriSet {
    pub pairs: Vec<TriPair>,
}

impl TriSet {
    pub fn new(pairs: Vec<TriPair>) -> Self {
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl fmt::Display for TriSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrcMappingRule {
    pub pattern: FeatureStructure,
    pub attr: String,
    pub value_path: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    pattern: FeatureStructure,
    attr: String,
    value_path: String,
}

pub fn load_trc_rules(text: &str) -> Result<Vec<TrcMappingRule>, SilError> {
    let raw: Vec<RawRule> =
        serde_json::from_str(text).map_err(|e| SilError::MalformedRules(e.to_string()))?;
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let value_path: Vec<String> = r.value_path.split('.').map(str::to_string).collect();
            if r.attr.is_empty() || value_path.iter().any(String::is_empty) {
                return Err(SilError::MalformedRules(format!("rule {i}: empty attr or path")));
            }
            Ok(TrcMappingRule {
                pattern: r.pattern,
                attr: r.attr,
                value_path,
            })
        })
        .collect()
}

/// Map each result through the first rule whose pattern subsumes its
/// semantics. Results no rule matches contribute nothing.
pub fn sil_to_tri(results: &[SilStructure], rules: &[TrcMappingRule]) -> TriSet {
    let mut pairs = Vec::new();
    for r in results {
        let mut matching = rules.iter().filter(|rule| subsumes(&rule.pattern, &r.sem));
        let Some(rule) = matching.next() else { continue };
        if let Some(other) = matching.next() {
            log::warn!(
                "ambiguous TRC rules for {}: {} and {} match, using the first",
                r.syn.string,
                rule.attr,
                other.attr
            );
        }
        match r.sem.get_path(&rule.value_path).and_then(Value::as_atom) {
            Some(atom) => pairs.push(TriPair::new(&rule.attr, atom)),
            None => log::warn!(
                "TRC rule {} matched {} but {} is not an atom",
                rule.attr,
                r.syn.string,
                rule.value_path.join(".")
            ),
        }
    }
    TriSet { pairs }
}
