//! Fallback when no complete solution exists: a greedy sequence of partial
//! results that spans the utterance.
//!
//! The walk starts at the best-QS edge of the chart and repeatedly attaches
//! the best edge ending where the sequence begins, then the best edge
//! starting where it ends, until both graph boundaries are reached. The
//! result is greedy and need not minimize the summed QS.

use std::sync::Arc;

use thiserror::Error;

use crate::chart::{parse, rank_cmp, ChartEdge, ChartError, ParseConfig, ParseOutcome, ParseStatus};
use crate::grammar::Lexicon;
use crate::predictions::PredictionList;
use crate::wordgraph::{NodeId, WordGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RobustError {
    #[error("chart is empty")]
    EmptyChart,
    #[error("no chart edge is adjacent to node {0}")]
    CoverageGap(NodeId),
}

#[derive(Debug, Clone)]
pub struct PartialSequence {
    pub parts: Vec<Arc<ChartEdge>>,
    pub covers: (NodeId, NodeId),
}

fn best_of<'a>(it: impl Iterator<Item = &'a Arc<ChartEdge>>) -> Option<&'a Arc<ChartEdge>> {
    it.min_by(|a, b| rank_cmp(a, b))
}

pub fn select_partials(chart: &[Arc<ChartEdge>], g: &WordGraph) -> Result<PartialSequence, RobustError> {
    let anchor = best_of(chart.iter()).ok_or(RobustError::EmptyChart)?;
    let mut left: Vec<Arc<ChartEdge>> = Vec::new();
    let mut cur = anchor.from;
    while cur != g.start() {
        let e = best_of(chart.iter().filter(|e| e.to == cur)).ok_or(RobustError::CoverageGap(cur))?;
        cur = e.from;
        left.push(Arc::clone(e));
    }
    let mut parts: Vec<Arc<ChartEdge>> = left.into_iter().rev().collect();
    parts.push(Arc::clone(anchor));
    let mut cur = anchor.to;
    while cur != g.final_node() {
        let e = best_of(chart.iter().filter(|e| e.from == cur)).ok_or(RobustError::CoverageGap(cur))?;
        cur = e.to;
        parts.push(Arc::clone(e));
    }
    Ok(PartialSequence {
        parts,
        covers: (g.start(), g.final_node()),
    })
}

/// Parser result plus the edges handed on as the analysis.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub outcome: ParseOutcome,
    /// The best complete solution alone, or the partial sequence.
    pub results: Vec<Arc<ChartEdge>>,
}

impl Analysis {
    pub fn is_complete(&self) -> bool {
        self.outcome.status == ParseStatus::Complete
    }

    pub fn status_line(&self) -> String {
        if self.is_complete() {
            "complete".to_string()
        } else {
            format!("partial({} parts)", self.results.len())
        }
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Robust(#[from] RobustError),
}

/// Parse a graph and pick its results, falling back to partial selection.
pub fn analyze(
    g: &WordGraph,
    lexicon: &Lexicon,
    preds: &PredictionList,
    cfg: &ParseConfig,
) -> Result<Analysis, AnalysisError> {
    let outcome = parse(g, lexicon, preds, cfg)?;
    let results = match outcome.complete_solutions.first() {
        Some(best) => vec![Arc::clone(best)],
        None => select_partials(&outcome.chart, g)?.parts,
    };
    Ok(Analysis { outcome, results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::load_lexicon;
    use crate::wordgraph::parse_graph_file;

    const LEX: &str = r#"[
        {"form":"ja","cat":"part","sem":{"type":"dm_marker","value":"yes"}},
        {"form":"er","cat":"pron","sem":{"type":"pron","value":"he"}},
        {"form":"zehn","cat":"num","sem":{"type":"number","value":10}},
        {"form":"uhr","cat":"np","valence":[{"direction":"left","cat":"num","sem_var":"?n","arg_path":"value"}],
         "sem":{"type":"hour","value":"?n"}}
    ]"#;

    #[test]
    fn single_spanning_edge() {
        let g = parse_graph_file("[1 ja 5.0 2]").unwrap();
        let lex = load_lexicon(LEX).unwrap();
        let out = parse(&g, &lex, &PredictionList::empty(), &ParseConfig::default()).unwrap();
        let seq = select_partials(&out.chart, &g).unwrap();
        assert_eq!(seq.parts.len(), 1);
        assert_eq!(seq.parts[0].string(), "ja");
    }

    #[test]
    fn anchor_in_the_middle_extends_both_ways() {
        // the predicted ja in the middle anchors
        let g = parse_graph_file("[1 er 9.0 2]\n[2 ja 1.0 3]\n[3 er 9.0 4]").unwrap();
        let lex = load_lexicon(LEX).unwrap();
        let preds = PredictionList::yes_no_question();
        let out = parse(&g, &lex, &preds, &ParseConfig::default()).unwrap();
        assert_eq!(out.chart.iter().min_by(|a, b| rank_cmp(a, b)).unwrap().from, NodeId(2));
        let seq = select_partials(&out.chart, &g).unwrap();
        let words: Vec<_> = seq.parts.iter().map(|e| e.string()).collect();
        assert_eq!(words, ["er", "ja", "er"]);
        assert_eq!(seq.covers, (NodeId(1), NodeId(4)));
    }

    #[test]
    fn empty_chart() {
        let g = parse_graph_file("[1 ja 5.0 2]").unwrap();
        assert_eq!(select_partials(&[], &g).unwrap_err(), RobustError::EmptyChart);
    }

    #[test]
    fn coverage_gap_is_reported() {
        let g = parse_graph_file("[1 ja 5.0 2]\n[2 er 5.0 3]").unwrap();
        let lex = load_lexicon(LEX).unwrap();
        let out = parse(&g, &lex, &PredictionList::empty(), &ParseConfig::default()).unwrap();
        let only_second: Vec<_> = out.chart.iter().filter(|e| e.string() == "er").cloned().collect();
        assert_eq!(
            select_partials(&only_second, &g).unwrap_err(),
            RobustError::CoverageGap(NodeId(2))
        );
    }
}
