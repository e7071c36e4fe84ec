//! Word graphs: DAGs of scored word hypotheses between time nodes.
//!
//! Scores are costs: the smaller a recognition score, the more probable the
//! hypothesis. The "Maxseg" quantities of the shortfall heuristic are
//! therefore computed as minimum-cost paths here ([`WordGraph::best_path_cost`]
//! is Maxseg, [`WordGraph::best_segment_cost`] is maxseg(i,j)).
//!
//! File format, one hypothesis per line:
//!
//! ```text
//! # comment
//! [1 er 22.08 2]
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: malformed edge {text:?}: {reason}")]
    MalformedLine {
        line: usize,
        text: String,
        reason: String,
    },
    #[error("graph contains no edges")]
    EmptyGraph,
    #[error("invalid graph: {0}")]
    ValidationFailure(String),
    #[error("no path from node {0} to node {1}")]
    NoPath(NodeId, NodeId),
}

/// Time-ordered node index. Larger ids are later points in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordHypothesis {
    pub from: NodeId,
    pub to: NodeId,
    pub word: String,
    /// Recognition score (cost, > 0).
    pub rs: f64,
}

impl WordHypothesis {
    pub fn new(from: u32, word: &str, rs: f64, to: u32) -> Self {
        Self {
            from: NodeId(from),
            to: NodeId(to),
            word: word.to_string(),
            rs,
        }
    }
}

impl fmt::Display for WordHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {} {:.2} {}]", self.from, self.word, self.rs, self.to)
    }
}

/// A validated word graph. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct WordGraph {
    edges: Vec<WordHypothesis>,
    nodes: Vec<NodeId>,
    start: NodeId,
    final_node: NodeId,
}

fn check_edge(e: &WordHypothesis) -> Result<(), String> {
    if e.from.0 == 0 || e.to.0 == 0 {
        return Err(format!("{e}: node ids start at 1"));
    }
    if e.from >= e.to {
        return Err(format!("{e}: from must be smaller than to"));
    }
    if !(e.rs.is_finite() && e.rs > 0.0) {
        return Err(format!("{e}: score must be positive"));
    }
    if e.word.is_empty() || e.word.chars().any(|c| c.is_whitespace() || c.is_uppercase()) {
        return Err(format!("{e}: word must be a non-empty lowercase token"));
    }
    Ok(())
}

impl WordGraph {
    pub fn new(edges: Vec<WordHypothesis>) -> Result<Self, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        for e in &edges {
            check_edge(e).map_err(GraphError::ValidationFailure)?;
        }
        let nodes: Vec<NodeId> = edges
            .iter()
            .flat_map(|e| [e.from, e.to])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let start = nodes[0];
        let final_node = *nodes.last().unwrap();
        for &n in &nodes {
            if n != final_node && !edges.iter().any(|e| e.from == n) {
                return Err(GraphError::ValidationFailure(format!(
                    "node {n} has no outgoing edge"
                )));
            }
            if n != start && !edges.iter().any(|e| e.to == n) {
                return Err(GraphError::ValidationFailure(format!(
                    "node {n} has no incoming edge"
                )));
            }
        }
        let g = Self {
            edges,
            nodes,
            start,
            final_node,
        };
        // Connectivity as checked above already implies a start->final
        // path in a DAG, but verify it directly.
        g.best_segment_cost(start, final_node)
            .map_err(|_| GraphError::ValidationFailure("no path from start to final".into()))?;
        Ok(g)
    }

    pub fn edges(&self) -> &[WordHypothesis] {
        &self.edges
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn final_node(&self) -> NodeId {
        self.final_node
    }

    /// Referenced node ids in ascending order, which is a topological order.
    pub fn topological_nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    fn index_of(&self, n: NodeId) -> Option<usize> {
        self.nodes.binary_search(&n).ok()
    }

    /// Single-source DAG shortest paths from `from`, indexed like `nodes`.
    fn costs_from(&self, from: usize) -> Vec<Option<f64>> {
        let mut dist = vec![None; self.nodes.len()];
        dist[from] = Some(0.0);
        let mut out: Vec<Vec<&WordHypothesis>> = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            out[self.index_of(e.from).unwrap()].push(e);
        }
        for i in from..self.nodes.len() {
            let Some(d) = dist[i] else { continue };
            for e in &out[i] {
                let j = self.index_of(e.to).unwrap();
                let cand = d + e.rs;
                if dist[j].is_none_or(|cur: f64| cand < cur) {
                    dist[j] = Some(cand);
                }
            }
        }
        dist
    }

    /// Minimum total cost of any start->final path (Maxseg).
    pub fn best_path_cost(&self) -> f64 {
        self.best_segment_cost(self.start, self.final_node)
            .expect("validated graph has a start-final path")
    }

    /// Minimum cost of any path from `i` to `j` (maxseg(i,j)).
    pub fn best_segment_cost(&self, i: NodeId, j: NodeId) -> Result<f64, GraphError> {
        let (Some(a), Some(b)) = (self.index_of(i), self.index_of(j)) else {
            return Err(GraphError::NoPath(i, j));
        };
        if a >= b {
            return Err(GraphError::NoPath(i, j));
        }
        self.costs_from(a)[b].ok_or(GraphError::NoPath(i, j))
    }

    /// All-pairs segment costs, computed once per graph.
    pub fn segment_table(&self) -> SegmentTable {
        let rows = (0..self.nodes.len()).map(|i| self.costs_from(i)).collect();
        SegmentTable {
            nodes: self.nodes.clone(),
            rows,
        }
    }

    /// One minimum-cost start->final path, ties resolved towards the
    /// earliest edge in file order.
    pub fn best_path(&self) -> Vec<&WordHypothesis> {
        let n = self.nodes.len();
        let mut dist: Vec<Option<f64>> = vec![None; n];
        let mut back: Vec<Option<usize>> = vec![None; n];
        dist[0] = Some(0.0);
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by_key(|&k| self.edges[k].from);
        for k in order {
            let e = &self.edges[k];
            let (i, j) = (self.index_of(e.from).unwrap(), self.index_of(e.to).unwrap());
            let Some(d) = dist[i] else { continue };
            let cand = d + e.rs;
            if dist[j].is_none_or(|cur| cand < cur) {
                dist[j] = Some(cand);
                back[j] = Some(k);
            }
        }
        let mut path = Vec::new();
        let mut cur = n - 1;
        while let Some(k) = back[cur] {
            let e = &self.edges[k];
            path.push(e);
            cur = self.index_of(e.from).unwrap();
        }
        path.reverse();
        path
    }

    /// Serialize to the line format, scores with two decimals.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for e in &self.edges {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }
}

/// Precomputed maxseg(i,j) for every node pair of one graph.
#[derive(Debug, Clone)]
pub struct SegmentTable {
    nodes: Vec<NodeId>,
    rows: Vec<Vec<Option<f64>>>,
}

impl SegmentTable {
    pub fn cost(&self, i: NodeId, j: NodeId) -> Option<f64> {
        let a = self.nodes.binary_search(&i).ok()?;
        let b = self.nodes.binary_search(&j).ok()?;
        if a >= b {
            return None;
        }
        self.rows[a][b]
    }
}

pub fn parse_graph_file(text: &str) -> Result<WordGraph, GraphError> {
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_end();
        if trimmed.trim_start().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let malformed = |reason: &str| GraphError::MalformedLine {
            line,
            text: trimmed.to_string(),
            reason: reason.to_string(),
        };
        let inner = trimmed
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| malformed("expected [<from> <word> <score> <to>]"))?;
        let fields: Vec<&str> = inner.split(' ').collect();
        if fields.len() != 4 || fields.iter().any(|f| f.is_empty()) {
            return Err(malformed("expected four single-space separated fields"));
        }
        let from: u32 = fields[0].parse().map_err(|_| malformed("bad from node"))?;
        let rs: f64 = fields[2].parse().map_err(|_| malformed("bad score"))?;
        let to: u32 = fields[3].parse().map_err(|_| malformed("bad to node"))?;
        let e = WordHypothesis::new(from, fields[1], rs, to);
        check_edge(&e).map_err(|reason| GraphError::ValidationFailure(format!("line {line}: {reason}")))?;
        edges.push(e);
    }
    WordGraph::new(edges)
}

/// Count of referenced nodes, for diagnostics.
pub fn node_count(g: &WordGraph) -> usize {
    g.topological_nodes().len()
}

/// Edges grouped by start node, used by path enumeration in tests.
pub fn outgoing(g: &WordGraph) -> HashMap<NodeId, Vec<&WordHypothesis>> {
    let mut m: HashMap<NodeId, Vec<&WordHypothesis>> = HashMap::new();
    for e in g.edges() {
        m.entry(e.from).or_default().push(e);
    }
    m
}
