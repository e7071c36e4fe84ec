//! Semantic predictions derived from the dialogue context.
//!
//! Predictions never filter results. They raise the pragmatic relevance of
//! edges whose semantics unify with one of them, and they decide which
//! edges seed the island parser first.

use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::chart::ChartEdge;
use crate::featstruct::{unify, FeatureStructure, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PredictionError {
    #[error("malformed prediction list: {0}")]
    MalformedPrediction(String),
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
pub struct PredictionList {
    pub label: String,
    pub items: Vec<FeatureStructure>,
}

impl PredictionList {
    pub fn empty() -> Self {
        Self {
            label: "none".into(),
            items: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// The two-item dm_marker list expected after a yes-no question.
    pub fn yes_no_question() -> Self {
        let marker = |v: &str| {
            FeatureStructure::new()
                .with("type", Value::sym("dm_marker"))
                .with("value", Value::sym(v))
        };
        Self {
            label: "yes_no_question".into(),
            items: vec![marker("yes"), marker("no")],
        }
    }
}

pub fn load_predictions(text: &str) -> Result<PredictionList, PredictionError> {
    let list: PredictionList =
        serde_json::from_str(text).map_err(|e| PredictionError::MalformedPrediction(e.to_string()))?;
    if list.label.is_empty() {
        return Err(PredictionError::MalformedPrediction("empty label".into()));
    }
    Ok(list)
}

/// Load a JSON array of prediction lists, one per dialogue context.
pub fn load_prediction_sets(text: &str) -> Result<Vec<PredictionList>, PredictionError> {
    let lists: Vec<PredictionList> =
        serde_json::from_str(text).map_err(|e| PredictionError::MalformedPrediction(e.to_string()))?;
    if let Some(bad) = lists.iter().find(|l| l.label.is_empty()) {
        return Err(PredictionError::MalformedPrediction(format!("empty label in {bad:?}")));
    }
    Ok(lists)
}

pub fn matches_prediction(sem: &FeatureStructure, preds: &PredictionList) -> bool {
    preds
        .items
        .iter()
        .any(|p| unify(sem, &p.rename_vars("pred:")).is_some())
}

/// Predicted edges first, then the rest; each group by ascending QS.
pub fn seed_rank(edges: &[Arc<ChartEdge>], preds: &PredictionList) -> Vec<Arc<ChartEdge>> {
    let mut out: Vec<(bool, Arc<ChartEdge>)> = edges
        .iter()
        .map(|e| (matches_prediction(&e.constituent.sem, preds), Arc::clone(e)))
        .collect();
    out.sort_by(|(ma, a), (mb, b)| mb.cmp(ma).then_with(|| a.scores.qs.total_cmp(&b.scores.qs)));
    out.into_iter().map(|(_, e)| e).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_yes_no_list() {
        let text = r#"{"label":"yes_no_question","items":[
            {"type":"dm_marker","value":"yes"},{"type":"dm_marker","value":"no"}]}"#;
        let p = load_predictions(text).unwrap();
        assert_eq!(p, PredictionList::yes_no_question());
    }

    #[test]
    fn empty_and_variable_items() {
        let p = load_predictions(r#"{"label":"open","items":[]}"#).unwrap();
        assert!(p.is_empty());
        let p = load_predictions(r#"{"label":"t","items":[{"type":"time","thehour":"?x"}]}"#).unwrap();
        assert_eq!(p.items.len(), 1);
        assert!(p.items[0].has_vars());
    }

    #[test]
    fn malformed() {
        assert!(load_predictions(r#"{"items":[]}"#).is_err());
        assert!(load_predictions(r#"{"label":"x","items":[{"a":1.5}]}"#).is_err());
        assert!(load_predictions("nope").is_err());
    }

    #[test]
    fn matching_uses_unification() {
        let p = PredictionList::yes_no_question();
        let ja = FeatureStructure::parse_json(r#"{"type":"dm_marker","value":"yes"}"#).unwrap();
        let time = FeatureStructure::parse_json(r#"{"type":"time"}"#).unwrap();
        assert!(matches_prediction(&ja, &p));
        assert!(!matches_prediction(&time, &p));
        assert!(!matches_prediction(&ja, &PredictionList::empty()));
        // an underspecified edge unifies with a prediction
        let bare = FeatureStructure::parse_json(r#"{"type":"dm_marker"}"#).unwrap();
        assert!(matches_prediction(&bare, &p));
        // same-named variables in edge and prediction stay independent
        let edge = FeatureStructure::parse_json(r#"{"a":"?x","b":1}"#).unwrap();
        let pred = PredictionList {
            label: "t".into(),
            items: vec![FeatureStructure::parse_json(r#"{"a":2,"c":"?x"}"#).unwrap()],
        };
        assert!(matches_prediction(&edge, &pred));
    }
}
