//! Synthetic word-graph corpora.
//!
//! Each transcript becomes a "sausage" graph: node k to k+1 carries the
//! spoken word plus `density - 1` distractor words drawn from the lexicon.
//! Recognition errors are planted at a fixed number of positions, chosen
//! uniformly over the whole corpus, so that the measured 1-best word
//! accuracy lands on the requested target up to rounding. At an error
//! position one distractor scores better than the spoken word.

use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Annotation, EvalError, ANNOTATIONS_FILE, GRAPH_EXT};
use crate::grammar::Lexicon;
use crate::wordgraph::{WordGraph, WordHypothesis};

/// Score ranges used to draw recognition scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreModel {
    /// Range of the spoken word's score.
    pub correct: (f64, f64),
    /// How much better the winning distractor is at an error position.
    pub win_margin: (f64, f64),
    /// How much worse every other distractor is.
    pub lose_margin: (f64, f64),
}

impl Default for ScoreModel {
    fn default() -> Self {
        Self {
            correct: (20.0, 40.0),
            win_margin: (1.0, 8.0),
            lose_margin: (0.5, 15.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    /// Edges per spoken word, at least 1.
    pub density: usize,
    /// Target 1-best word accuracy in percent.
    pub target_wa: f64,
    pub score: ScoreModel,
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.density < 1 {
            return Err(EvalError::InvalidParams("density must be at least 1".into()));
        }
        if !(0.0..=100.0).contains(&self.target_wa) {
            return Err(EvalError::InvalidParams("target_wa must lie in [0, 100]".into()));
        }
        let m = &self.score;
        if !(m.correct.0 > 0.0 && m.correct.0 <= m.correct.1 && m.win_margin.0 > 0.0 && m.lose_margin.0 > 0.0) {
            return Err(EvalError::InvalidParams("score model ranges must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedUtterance {
    pub annotation: Annotation,
    pub graph: WordGraph,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

pub fn generate_corpus(
    specs: &[Annotation],
    lexicon: &Lexicon,
    params: &GenParams,
) -> Result<Vec<GeneratedUtterance>, EvalError> {
    params.validate()?;
    let transcripts: Vec<Vec<&str>> = specs
        .iter()
        .map(|a| a.transcript.split_whitespace().collect())
        .collect();
    for (a, words) in specs.iter().zip(&transcripts) {
        if words.is_empty() {
            return Err(EvalError::InvalidParams(format!("utterance {}: empty transcript", a.id)));
        }
        if let Some(w) = words.iter().find(|w| !lexicon.contains(w)) {
            return Err(EvalError::WordNotInLexicon {
                id: a.id.clone(),
                word: w.to_string(),
            });
        }
    }
    let forms = lexicon.forms();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let positions: usize = transcripts.iter().map(Vec::len).sum();
    let errors = if params.density > 1 {
        ((positions as f64) * (100.0 - params.target_wa) / 100.0).round() as usize
    } else {
        0
    };
    let mut is_error = vec![false; positions];
    for k in index::sample(&mut rng, positions, errors.min(positions)) {
        is_error[k] = true;
    }

    let mut out = Vec::with_capacity(specs.len());
    let mut pos = 0;
    for (a, words) in specs.iter().zip(&transcripts) {
        let mut edges = Vec::with_capacity(words.len() * params.density);
        for (k, &word) in words.iter().enumerate() {
            let from = k as u32 + 1;
            let correct = round2(draw(&mut rng, params.score.correct));
            let pool: Vec<&str> = forms.iter().copied().filter(|f| *f != word).collect();
            let wanted = params.density - 1;
            let mut distractors: Vec<&str> = pool.choose_multiple(&mut rng, wanted.min(pool.len())).copied().collect();
            while distractors.len() < wanted && !pool.is_empty() {
                distractors.push(pool.choose(&mut rng).copied().unwrap());
            }
            let mut position = vec![WordHypothesis::new(from, word, correct, from + 1)];
            for (n, d) in distractors.into_iter().enumerate() {
                let rs = if n == 0 && is_error[pos] {
                    round2(correct - draw(&mut rng, params.score.win_margin)).max(0.01)
                } else {
                    round2(correct + draw(&mut rng, params.score.lose_margin))
                };
                position.push(WordHypothesis::new(from, d, rs, from + 1));
            }
            position.shuffle(&mut rng);
            edges.extend(position);
            pos += 1;
        }
        let graph = WordGraph::new(edges).expect("sausage graphs are valid");
        out.push(GeneratedUtterance {
            annotation: a.clone(),
            graph,
        });
    }
    Ok(out)
}

/// Write `annotations.json` and one graph file per utterance into `dir`.
pub fn write_corpus(dir: &Path, corpus: &[GeneratedUtterance]) -> Result<(), EvalError> {
    std::fs::create_dir_all(dir).map_err(|e| EvalError::io(dir, e))?;
    let annotations: Vec<&Annotation> = corpus.iter().map(|u| &u.annotation).collect();
    let mut json = serde_json::to_string_pretty(&annotations).expect("annotations serialize");
    json.push('\n');
    let path = dir.join(ANNOTATIONS_FILE);
    std::fs::write(&path, json).map_err(|e| EvalError::io(&path, e))?;
    for u in corpus {
        let path = dir.join(format!("{}.{GRAPH_EXT}", u.annotation.id));
        std::fs::write(&path, u.graph.serialize()).map_err(|e| EvalError::io(&path, e))?;
    }
    Ok(())
}

/// Word errors of the graph's 1-best path against the transcript
/// (Levenshtein over words) and the transcript length.
pub fn word_accuracy(graph: &WordGraph, transcript: &str) -> (usize, usize) {
    let reference: Vec<&str> = transcript.split_whitespace().collect();
    let hyp: Vec<&str> = graph.best_path().iter().map(|e| e.word.as_str()).collect();
    let mut prev: Vec<usize> = (0..=hyp.len()).collect();
    for (i, r) in reference.iter().enumerate() {
        let mut cur = vec![i + 1; hyp.len() + 1];
        for (j, h) in hyp.iter().enumerate() {
            let sub = prev[j] + usize::from(r != h);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    (prev[hyp.len()], reference.len())
}
