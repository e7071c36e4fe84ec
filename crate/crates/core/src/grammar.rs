//! A small lexicalized categorial grammar.
//!
//! Every lexical entry carries a major category, an ordered list of
//! argument slots (its valence) and a semantic recipe. Composition is
//! binary function application: a functor consumes its first open slot
//! with a saturated argument of the required category found on the slot's
//! side, and the argument's semantics is substituted for the slot variable.
//!
//! A slot may name an `arg_path`; the variable is then bound to the value
//! at that path inside the argument's semantics instead of the whole
//! structure. Numerals use this to contribute a bare integer (`uhr` takes
//! the `value` of `zehn`).

use std::collections::HashMap;
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use crate::featstruct::{substitute, FeatureStructure, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("lexicon is not valid JSON: {0}")]
    Json(String),
    #[error("entry {index}: {reason}")]
    MalformedEntry { index: usize, reason: String },
    #[error("entry {index}: unknown slot direction {direction:?}")]
    UnknownDirection { index: usize, direction: String },
    #[error("entry {index}: slot variable ?{var} does not occur in sem")]
    DanglingSemVar { index: usize, var: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Left,
    Right,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Left => "left",
            Direction::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Category {
    pub major: String,
}

impl Category {
    pub fn new(major: &str) -> Self {
        Self {
            major: major.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArgSlot {
    pub direction: Direction,
    pub cat: String,
    /// Variable name without the `?`.
    pub sem_var: String,
    pub arg_path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexicalEntry {
    pub form: String,
    pub cat: Category,
    pub valence: Vec<ArgSlot>,
    pub sem: FeatureStructure,
}

/// A (partially) applied category with its composed semantics.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constituent {
    pub cat: Category,
    pub remaining_valence: Vec<ArgSlot>,
    pub sem: FeatureStructure,
    pub consumed: usize,
    pub total_valence: usize,
}

impl Constituent {
    pub fn is_saturated(&self) -> bool {
        self.remaining_valence.is_empty()
    }
}

pub fn lexical_constituent(e: &LexicalEntry) -> Constituent {
    Constituent {
        cat: e.cat.clone(),
        remaining_valence: e.valence.clone(),
        sem: e.sem.clone(),
        consumed: 0,
        total_valence: e.valence.len(),
    }
}

/// Apply `functor` to `argument`, where `side` says on which side of the
/// functor the argument sits. `None` when the combination is not licensed.
pub fn apply(functor: &Constituent, argument: &Constituent, side: Direction) -> Option<Constituent> {
    let (slot, rest) = functor.remaining_valence.split_first()?;
    if slot.direction != side || !argument.is_saturated() || argument.cat.major != slot.cat {
        return None;
    }
    let filler = if slot.arg_path.is_empty() {
        Value::Fs(argument.sem.clone())
    } else {
        argument.sem.get_path(&slot.arg_path)?.clone()
    };
    let mut bindings = HashMap::new();
    bindings.insert(slot.sem_var.clone(), filler);
    let sem = substitute(&functor.sem, &bindings).ok()?;
    Some(Constituent {
        cat: functor.cat.clone(),
        remaining_valence: rest.to_vec(),
        sem,
        consumed: functor.consumed + 1,
        total_valence: functor.total_valence,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PathSpec {
    Dotted(String),
    Parts(Vec<String>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlot {
    direction: String,
    cat: String,
    sem_var: String,
    #[serde(default)]
    arg_path: Option<PathSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    form: String,
    cat: String,
    #[serde(default)]
    valence: Vec<RawSlot>,
    sem: serde_json::Value,
}

/// Lexical entries indexed by surface form. Homonyms keep file order.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexicalEntry>,
    by_form: HashMap<String, Vec<usize>>,
}

impl Lexicon {
    pub fn new(entries: Vec<LexicalEntry>) -> Self {
        let mut by_form: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_form.entry(e.form.clone()).or_default().push(i);
        }
        Self { entries, by_form }
    }

    pub fn entries(&self) -> &[LexicalEntry] {
        &self.entries
    }

    pub fn lookup(&self, form: &str) -> impl Iterator<Item = &LexicalEntry> {
        self.by_form
            .get(form)
            .into_iter()
            .flatten()
            .map(move |&i| &self.entries[i])
    }

    pub fn contains(&self, form: &str) -> bool {
        self.by_form.contains_key(form)
    }

    /// Distinct surface forms, sorted.
    pub fn forms(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.by_form.keys().map(String::as_str).collect();
        v.sort_unstable();
        v
    }
}

pub fn load_lexicon(text: &str) -> Result<Lexicon, LexiconError> {
    let raw: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| LexiconError::Json(e.to_string()))?;
    let mut entries = Vec::with_capacity(raw.len());
    for (index, item) in raw.into_iter().enumerate() {
        let malformed = |reason: String| LexiconError::MalformedEntry { index, reason };
        let r: RawEntry = serde_json::from_value(item).map_err(|e| malformed(e.to_string()))?;
        if r.form.is_empty() || r.form.chars().any(|c| c.is_whitespace() || c.is_uppercase()) {
            return Err(malformed(format!("bad form {:?}", r.form)));
        }
        if r.cat.is_empty() {
            return Err(malformed("empty category".into()));
        }
        let sem = FeatureStructure::from_json(&r.sem).map_err(|e| malformed(e.to_string()))?;
        let vars = sem.vars();
        let mut valence = Vec::with_capacity(r.valence.len());
        for s in r.valence {
            let direction = match s.direction.as_str() {
                "left" => Direction::Left,
                "right" => Direction::Right,
                _ => {
                    return Err(LexiconError::UnknownDirection {
                        index,
                        direction: s.direction,
                    })
                }
            };
            let var = s.sem_var.trim_start_matches('?').to_string();
            if var.is_empty() {
                return Err(malformed("empty sem_var".into()));
            }
            if !vars.contains(&var) {
                return Err(LexiconError::DanglingSemVar { index, var });
            }
            let arg_path = match s.arg_path {
                None => Vec::new(),
                Some(PathSpec::Dotted(p)) => p.split('.').map(str::to_string).collect(),
                Some(PathSpec::Parts(p)) => p,
            };
            if arg_path.iter().any(String::is_empty) {
                return Err(malformed("empty arg_path component".into()));
            }
            valence.push(ArgSlot {
                direction,
                cat: s.cat,
                sem_var: var,
                arg_path,
            });
        }
        if valence.is_empty() && sem.has_vars() {
            return Err(malformed("saturated entry must have variable-free sem".into()));
        }
        entries.push(LexicalEntry {
            form: r.form,
            cat: Category::new(&r.cat),
            valence,
            sem,
        });
    }
    Ok(Lexicon::new(entries))
}
