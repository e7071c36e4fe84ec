//! Robust parsing of recognizer word graphs.
//!
//! The pipeline: a [`wordgraph::WordGraph`] is parsed by the best-first
//! island parser in [`chart`], scoring every edge with the integrated
//! quality score from [`scoring`] (acoustic shortfall, syntactic
//! completeness and pragmatic relevance against the dialogue
//! [`predictions`]). When no complete solution spans the graph,
//! [`robust`] picks a spanning sequence of partial results. Results are
//! rendered as SIL structures and mapped to task-relevant information in
//! [`sil`], and [`eval`] scores them with the Information Content metric.

pub mod chart;
pub mod cli;
pub mod eval;
pub mod featstruct;
pub mod grammar;
pub mod predictions;
pub mod robust;
pub mod scoring;
pub mod sil;
pub mod wordgraph;

pub use chart::{parse, ChartEdge, ChartParser, ParseConfig, ParseOutcome, ParseStatus};
pub use featstruct::{unify, FeatureStructure, Value};
pub use grammar::{load_lexicon, Lexicon};
pub use predictions::{load_predictions, PredictionList};
pub use robust::{analyze, select_partials, Analysis};
pub use scoring::{ScoreBreakdown, ScoreConfig};
pub use wordgraph::{parse_graph_file, NodeId, WordGraph, WordHypothesis};
