//! Agenda-driven best-first island chart parser over a word graph.
//!
//! The chart starts with one edge per (word hypothesis, lexical entry).
//! Edges leave the agenda best first: predicted edges before the rest, then
//! by ascending QS. A popped edge tries function application with every
//! adjacent chart edge on both sides, in both functor roles, so islands
//! grow outward in either direction from wherever the search started.
//!
//! Equivalent edges are packed. Two edges are equivalent when they agree on
//! span, category, open valence, semantics and word count; only the one
//! with the lower recognition score survives (ties go to the
//! lexicographically smaller word sequence). Since equivalents have the same
//! length and combine identically, the survivor yields an equal or better
//! QS in every larger edge built from it.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::grammar::{apply, lexical_constituent, ArgSlot, Constituent, Direction, Lexicon};
use crate::featstruct::FeatureStructure;
use crate::predictions::{matches_prediction, PredictionList};
use crate::scoring::{combine_rs, syntactic_completeness, ScoreBreakdown, ScoreConfig, ScoreError};
use crate::wordgraph::{NodeId, SegmentTable, WordGraph, WordHypothesis};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("unknown word {word:?} in edge {edge}")]
    UnknownWord { word: String, edge: String },
    #[error(transparent)]
    Score(#[from] ScoreError),
}

#[derive(Debug, Clone)]
pub enum Derivation {
    Leaf(WordHypothesis),
    Pair {
        left: Arc<ChartEdge>,
        right: Arc<ChartEdge>,
        /// Which child acted as the functor.
        functor: Direction,
    },
}

#[derive(Debug, Clone)]
pub struct ChartEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub constituent: Constituent,
    pub words: Vec<String>,
    pub scores: ScoreBreakdown,
    /// Semantics unify with at least one prediction.
    pub predicted: bool,
    pub derivation: Derivation,
}

impl ChartEdge {
    pub fn span_len(&self) -> u32 {
        self.to.0 - self.from.0
    }

    /// Surface string with words joined by underscores.
    pub fn string(&self) -> String {
        self.words.join("_")
    }

    pub fn leaves(&self) -> Vec<&WordHypothesis> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            match &e.derivation {
                Derivation::Leaf(h) => out.push(h),
                Derivation::Pair { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    pub fn is_saturated(&self) -> bool {
        self.constituent.is_saturated()
    }
}

impl fmt::Display for ChartEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}->{}]", self.string(), self.from, self.to)
    }
}

/// Ordering used for every ranking of edges: QS ascending, then longer
/// span, then lexicographically smaller word sequence.
pub fn rank_cmp(a: &ChartEdge, b: &ChartEdge) -> Ordering {
    a.scores
        .qs
        .total_cmp(&b.scores.qs)
        .then_with(|| b.span_len().cmp(&a.span_len()))
        .then_with(|| a.words.cmp(&b.words))
}

fn agenda_cmp(a: &ChartEdge, b: &ChartEdge) -> Ordering {
    b.predicted.cmp(&a.predicted).then_with(|| rank_cmp(a, b))
}

struct AgendaItem {
    edge: Arc<ChartEdge>,
    seq: u64,
}

impl PartialEq for AgendaItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for AgendaItem {}
impl PartialOrd for AgendaItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for AgendaItem {
    // BinaryHeap is a max-heap: the better item must compare greater.
    fn cmp(&self, other: &Self) -> Ordering {
        agenda_cmp(&other.edge, &self.edge).then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct EquivKey {
    from: NodeId,
    to: NodeId,
    major: String,
    remaining: Vec<ArgSlot>,
    sem: FeatureStructure,
    length: usize,
    total_valence: usize,
}

impl EquivKey {
    fn of(e: &ChartEdge) -> Self {
        Self {
            from: e.from,
            to: e.to,
            major: e.constituent.cat.major.clone(),
            remaining: e.constituent.remaining_valence.clone(),
            sem: e.constituent.sem.clone(),
            length: e.scores.length,
            total_valence: e.constituent.total_valence,
        }
    }
}

fn dominates(new: &ChartEdge, old: &ChartEdge) -> bool {
    match new.scores.rs.total_cmp(&old.scores.rs) {
        Ordering::Less => true,
        Ordering::Equal => new.words < old.words,
        Ordering::Greater => false,
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParseConfig {
    pub score: ScoreConfig,
    /// Categories accepted for complete solutions; `None` accepts any
    /// saturated category.
    pub result_categories: Option<BTreeSet<String>>,
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseStatus {
    Complete,
    Partial,
}

#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub status: ParseStatus,
    /// Spanning saturated edges of an accepted category, best first.
    pub complete_solutions: Vec<Arc<ChartEdge>>,
    /// Every surviving edge: popped ones in pop order, then any edges still
    /// pending on the agenda when a step limit stopped the search.
    pub chart: Vec<Arc<ChartEdge>>,
    pub steps_used: usize,
}

/// Parser state for one graph.
pub struct ChartParser<'a> {
    lexicon: &'a Lexicon,
    preds: &'a PredictionList,
    cfg: &'a ParseConfig,
    start: NodeId,
    final_node: NodeId,
    maxseg: f64,
    segments: SegmentTable,
    agenda: BinaryHeap<AgendaItem>,
    seq: u64,
    best: HashMap<EquivKey, Arc<ChartEdge>>,
    chart: Vec<Arc<ChartEdge>>,
    slot: HashMap<EquivKey, usize>,
    ending_at: HashMap<NodeId, Vec<usize>>,
    starting_at: HashMap<NodeId, Vec<usize>>,
    steps: usize,
}

impl<'a> ChartParser<'a> {
    /// Seed the agenda with every lexical edge of the graph.
    pub fn new(
        graph: &'a WordGraph,
        lexicon: &'a Lexicon,
        preds: &'a PredictionList,
        cfg: &'a ParseConfig,
    ) -> Result<Self, ChartError> {
        cfg.score.validate()?;
        let mut p = Self {
            lexicon,
            preds,
            cfg,
            start: graph.start(),
            final_node: graph.final_node(),
            maxseg: graph.best_path_cost(),
            segments: graph.segment_table(),
            agenda: BinaryHeap::new(),
            seq: 0,
            best: HashMap::new(),
            chart: Vec::new(),
            slot: HashMap::new(),
            ending_at: HashMap::new(),
            starting_at: HashMap::new(),
            steps: 0,
        };
        for h in graph.edges() {
            let mut any = false;
            for entry in p.lexicon.lookup(&h.word) {
                any = true;
                let edge = p.make_edge(
                    h.from,
                    h.to,
                    lexical_constituent(entry),
                    vec![h.word.clone()],
                    h.rs,
                    1,
                    Derivation::Leaf(h.clone()),
                );
                p.offer(edge);
            }
            if !any {
                return Err(ChartError::UnknownWord {
                    word: h.word.clone(),
                    edge: h.to_string(),
                });
            }
        }
        Ok(p)
    }

    #[allow(clippy::too_many_arguments)]
    fn make_edge(
        &self,
        from: NodeId,
        to: NodeId,
        constituent: Constituent,
        words: Vec<String>,
        rs: f64,
        length: usize,
        derivation: Derivation,
    ) -> ChartEdge {
        let segment = self
            .segments
            .cost(from, to)
            .expect("an edge spans at least one path");
        let predicted = matches_prediction(&constituent.sem, self.preds);
        let score = &self.cfg.score;
        let pr = if predicted { score.pr_match } else { score.pr_nomatch };
        let sc = syntactic_completeness(&constituent, score);
        let scores = ScoreBreakdown::compute(self.maxseg, segment, rs, length, sc, pr)
            .expect("validated config and non-empty edges always score");
        ChartEdge {
            from,
            to,
            constituent,
            words,
            scores,
            predicted,
            derivation,
        }
    }

    fn offer(&mut self, edge: ChartEdge) {
        let key = EquivKey::of(&edge);
        if let Some(old) = self.best.get(&key) {
            if !dominates(&edge, old) {
                return;
            }
        }
        let edge = Arc::new(edge);
        self.best.insert(key, Arc::clone(&edge));
        self.seq += 1;
        self.agenda.push(AgendaItem { edge, seq: self.seq });
    }

    pub fn agenda_len(&self) -> usize {
        self.agenda.len()
    }

    pub fn chart(&self) -> &[Arc<ChartEdge>] {
        &self.chart
    }

    /// Pop the best agenda edge into the chart and combine it with its
    /// neighbours. Returns `false` once the agenda is exhausted.
    pub fn step(&mut self) -> bool {
        while let Some(AgendaItem { edge, .. }) = self.agenda.pop() {
            let key = EquivKey::of(&edge);
            if !Arc::ptr_eq(&self.best[&key], &edge) {
                continue; // superseded by a better equivalent
            }
            match self.slot.get(&key) {
                Some(&i) => self.chart[i] = Arc::clone(&edge),
                None => {
                    let i = self.chart.len();
                    self.chart.push(Arc::clone(&edge));
                    self.ending_at.entry(edge.to).or_default().push(i);
                    self.starting_at.entry(edge.from).or_default().push(i);
                    self.slot.insert(key, i);
                }
            }
            self.steps += 1;
            self.combine(&edge);
            return true;
        }
        false
    }

    fn combine(&mut self, e: &Arc<ChartEdge>) {
        let left: Vec<Arc<ChartEdge>> = self
            .ending_at
            .get(&e.from)
            .into_iter()
            .flatten()
            .map(|&i| Arc::clone(&self.chart[i]))
            .collect();
        let right: Vec<Arc<ChartEdge>> = self
            .starting_at
            .get(&e.to)
            .into_iter()
            .flatten()
            .map(|&i| Arc::clone(&self.chart[i]))
            .collect();
        for l in &left {
            self.try_pair(l, e);
        }
        for r in &right {
            self.try_pair(e, r);
        }
    }

    /// Both functor roles for two adjacent edges, `l` left of `r`.
    fn try_pair(&mut self, l: &Arc<ChartEdge>, r: &Arc<ChartEdge>) {
        let attempts = [
            (
                apply(&l.constituent, &r.constituent, Direction::Right),
                Direction::Left,
            ),
            (
                apply(&r.constituent, &l.constituent, Direction::Left),
                Direction::Right,
            ),
        ];
        for (result, functor) in attempts {
            let Some(constituent) = result else { continue };
            let mut words = l.words.clone();
            words.extend(r.words.iter().cloned());
            let edge = self.make_edge(
                l.from,
                r.to,
                constituent,
                words,
                combine_rs(l.scores.rs, r.scores.rs),
                l.scores.length + r.scores.length,
                Derivation::Pair {
                    left: Arc::clone(l),
                    right: Arc::clone(r),
                    functor,
                },
            );
            self.offer(edge);
        }
    }

    fn accepts(&self, e: &ChartEdge) -> bool {
        e.from == self.start
            && e.to == self.final_node
            && e.is_saturated()
            && self
                .cfg
                .result_categories
                .as_ref()
                .is_none_or(|cats| cats.contains(&e.constituent.cat.major))
    }

    /// Step until the agenda is empty or `max_steps` edges were processed.
    pub fn run(mut self, max_steps: Option<usize>) -> ParseOutcome {
        while max_steps.is_none_or(|m| self.steps < m) {
            if !self.step() {
                break;
            }
        }
        let mut complete: Vec<Arc<ChartEdge>> =
            self.chart.iter().filter(|e| self.accepts(e)).cloned().collect();
        complete.sort_by(|a, b| rank_cmp(a, b));
        let pending = std::mem::take(&mut self.agenda).into_sorted_vec();
        let mut chart = self.chart;
        for AgendaItem { edge, .. } in pending.into_iter().rev() {
            let key = EquivKey::of(&edge);
            if !Arc::ptr_eq(&self.best[&key], &edge) {
                continue;
            }
            match self.slot.get(&key) {
                Some(&i) => chart[i] = edge,
                None => chart.push(edge),
            }
        }
        ParseOutcome {
            status: if complete.is_empty() {
                ParseStatus::Partial
            } else {
                ParseStatus::Complete
            },
            complete_solutions: complete,
            chart,
            steps_used: self.steps,
        }
    }
}

/// Initialize and run a parse with the step limit from `cfg`.
pub fn parse(
    graph: &WordGraph,
    lexicon: &Lexicon,
    preds: &PredictionList,
    cfg: &ParseConfig,
) -> Result<ParseOutcome, ChartError> {
    Ok(ChartParser::new(graph, lexicon, preds, cfg)?.run(cfg.max_steps))
}
