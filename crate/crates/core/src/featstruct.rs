//! Attribute-value matrices with unification.
//!
//! A [`FeatureStructure`] maps lowercase attributes to [`Value`]s: atoms
//! (symbols or integers), nested structures, or named variables. Variables
//! with the same name inside one structure denote the same value, which is
//! the only form of re-entrancy supported.
//!
//! The JSON form used by every input file is a plain object: atoms are JSON
//! strings or integers, and strings starting with `?` are variables.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FsError {
    #[error("malformed feature structure: {0}")]
    Malformed(String),
    #[error("cyclic variable binding through ?{0}")]
    CyclicBinding(String),
}

/// An atomic value. Integers and symbols never unify with each other.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Int(i64),
    Sym(String),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Int(n) => write!(f, "{n}"),
            Atom::Sym(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Atom(Atom),
    Fs(FeatureStructure),
    /// Variable name, stored without the leading `?`.
    Var(String),
}

impl Value {
    pub fn sym(s: &str) -> Self {
        Value::Atom(Atom::Sym(s.to_string()))
    }

    pub fn int(n: i64) -> Self {
        Value::Atom(Atom::Int(n))
    }

    pub fn var(name: &str) -> Self {
        Value::Var(name.trim_start_matches('?').to_string())
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            Value::Atom(a) => Some(a),
            _ => None,
        }
    }

    fn has_vars(&self) -> bool {
        match self {
            Value::Atom(_) => false,
            Value::Var(_) => true,
            Value::Fs(fs) => fs.has_vars(),
        }
    }

    fn collect_vars(&self, out: &mut HashSet<String>) {
        match self {
            Value::Atom(_) => {}
            Value::Var(v) => {
                out.insert(v.clone());
            }
            Value::Fs(fs) => {
                for v in fs.pairs.values() {
                    v.collect_vars(out);
                }
            }
        }
    }

    pub fn from_json(json: &serde_json::Value) -> Result<Self, FsError> {
        match json {
            serde_json::Value::String(s) => {
                if let Some(name) = s.strip_prefix('?') {
                    if name.is_empty() {
                        return Err(FsError::Malformed("empty variable name".into()));
                    }
                    Ok(Value::Var(name.to_string()))
                } else if s.is_empty() {
                    Err(FsError::Malformed("empty atom".into()))
                } else {
                    Ok(Value::sym(s))
                }
            }
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(Value::int)
                .ok_or_else(|| FsError::Malformed(format!("non-integer number {n}"))),
            serde_json::Value::Object(_) => FeatureStructure::from_json(json).map(Value::Fs),
            other => Err(FsError::Malformed(format!("unsupported value {other}"))),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Atom(Atom::Int(n)) => serde_json::Value::from(*n),
            Value::Atom(Atom::Sym(s)) => serde_json::Value::String(s.clone()),
            Value::Var(v) => serde_json::Value::String(format!("?{v}")),
            Value::Fs(fs) => fs.to_json(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => write!(f, "{a}"),
            Value::Var(v) => write!(f, "?{v}"),
            Value::Fs(fs) => write!(f, "{fs}"),
        }
    }
}

/// Attribute-value matrix. Attributes are kept sorted, so structural
/// equality and hashing are independent of insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "serde_json::Value", into = "serde_json::Value")]
pub struct FeatureStructure {
    pairs: BTreeMap<String, Value>,
}

impl FeatureStructure {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style insert, mostly for tests and fixtures.
    pub fn with(mut self, attr: &str, value: Value) -> Self {
        self.pairs.insert(attr.to_string(), value);
        self
    }

    pub fn insert(&mut self, attr: &str, value: Value) -> Option<Value> {
        self.pairs.insert(attr.to_string(), value)
    }

    pub fn get(&self, attr: &str) -> Option<&Value> {
        self.pairs.get(attr)
    }

    pub fn get_path<S: AsRef<str>>(&self, path: &[S]) -> Option<&Value> {
        let (first, rest) = path.split_first()?;
        let v = self.pairs.get(first.as_ref())?;
        if rest.is_empty() {
            return Some(v);
        }
        match v {
            Value::Fs(inner) => inner.get_path(rest),
            _ => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.pairs.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Value)> {
        self.pairs.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn has_vars(&self) -> bool {
        self.pairs.values().any(Value::has_vars)
    }

    pub fn vars(&self) -> HashSet<String> {
        let mut out = HashSet::new();
        for v in self.pairs.values() {
            v.collect_vars(&mut out);
        }
        out
    }

    /// Copy with every variable name prefixed, to keep two structures'
    /// variables apart before unifying them.
    pub fn rename_vars(&self, prefix: &str) -> Self {
        fn go(v: &Value, prefix: &str) -> Value {
            match v {
                Value::Atom(_) => v.clone(),
                Value::Var(n) => Value::Var(format!("{prefix}{n}")),
                Value::Fs(fs) => Value::Fs(fs.rename_vars(prefix)),
            }
        }
        Self {
            pairs: self.pairs.iter().map(|(k, v)| (k.clone(), go(v, prefix))).collect(),
        }
    }

    pub fn from_json(json: &serde_json::Value) -> Result<Self, FsError> {
        let obj = json
            .as_object()
            .ok_or_else(|| FsError::Malformed(format!("expected object, got {json}")))?;
        let mut pairs = BTreeMap::new();
        for (k, v) in obj {
            if k.is_empty() || k.chars().any(|c| c.is_whitespace() || c.is_uppercase()) {
                return Err(FsError::Malformed(format!("bad attribute name {k:?}")));
            }
            pairs.insert(k.clone(), Value::from_json(v)?);
        }
        Ok(Self { pairs })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map = self
            .pairs
            .iter()
            .map(|(k, v)| (k.clone(), v.to_json()))
            .collect::<serde_json::Map<_, _>>();
        serde_json::Value::Object(map)
    }

    pub fn parse_json(text: &str) -> Result<Self, FsError> {
        let json: serde_json::Value =
            serde_json::from_str(text).map_err(|e| FsError::Malformed(e.to_string()))?;
        Self::from_json(&json)
    }
}

impl TryFrom<serde_json::Value> for FeatureStructure {
    type Error = FsError;
    fn try_from(v: serde_json::Value) -> Result<Self, Self::Error> {
        Self::from_json(&v)
    }
}

impl From<FeatureStructure> for serde_json::Value {
    fn from(fs: FeatureStructure) -> Self {
        fs.to_json()
    }
}

impl fmt::Display for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (k, v)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}:{v}")?;
        }
        f.write_str("]")
    }
}

/// Union-find style variable store used during one unification.
#[derive(Default)]
struct Unifier {
    alias: HashMap<String, String>,
    bound: HashMap<String, Value>,
}

impl Unifier {
    fn rep(&self, name: &str) -> String {
        let mut cur = name;
        while let Some(next) = self.alias.get(cur) {
            cur = next;
        }
        cur.to_string()
    }

    fn unify_var(&mut self, x: &str, other: &Value) -> Option<Value> {
        let rx = self.rep(x);
        if let Value::Var(y) = other {
            let ry = self.rep(y);
            if rx == ry {
                return Some(Value::Var(rx));
            }
            // The lexicographically smaller name survives, which keeps the
            // result independent of argument order.
            let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
            let lo_val = self.bound.remove(&lo);
            let hi_val = self.bound.remove(&hi);
            self.alias.insert(hi, lo.clone());
            let merged = match (lo_val, hi_val) {
                (Some(a), Some(b)) => Some(self.unify_val(&a, &b)?),
                (Some(a), None) | (None, Some(a)) => Some(a),
                (None, None) => None,
            };
            if let Some(m) = merged {
                self.bound.insert(lo.clone(), m);
            }
            return Some(Value::Var(lo));
        }
        let merged = match self.bound.remove(&rx) {
            Some(existing) => self.unify_val(&existing, other)?,
            None => other.clone(),
        };
        self.bound.insert(rx.clone(), merged);
        Some(Value::Var(rx))
    }

    fn unify_val(&mut self, a: &Value, b: &Value) -> Option<Value> {
        match (a, b) {
            (Value::Var(x), _) => self.unify_var(x, b),
            (_, Value::Var(y)) => self.unify_var(y, a),
            (Value::Atom(x), Value::Atom(y)) => (x == y).then(|| a.clone()),
            (Value::Fs(x), Value::Fs(y)) => self.unify_fs(x, y).map(Value::Fs),
            _ => None,
        }
    }

    fn unify_fs(&mut self, a: &FeatureStructure, b: &FeatureStructure) -> Option<FeatureStructure> {
        let mut pairs = BTreeMap::new();
        for (k, va) in &a.pairs {
            let v = match b.pairs.get(k) {
                Some(vb) => self.unify_val(va, vb)?,
                None => va.clone(),
            };
            pairs.insert(k.clone(), v);
        }
        for (k, vb) in &b.pairs {
            if !a.pairs.contains_key(k) {
                pairs.insert(k.clone(), vb.clone());
            }
        }
        Some(FeatureStructure { pairs })
    }

    fn resolve(&self, v: &Value, stack: &mut Vec<String>) -> Option<Value> {
        match v {
            Value::Atom(_) => Some(v.clone()),
            Value::Var(name) => {
                let r = self.rep(name);
                match self.bound.get(&r) {
                    None => Some(Value::Var(r)),
                    Some(val) => {
                        if stack.contains(&r) {
                            return None;
                        }
                        stack.push(r);
                        let out = self.resolve(val, stack);
                        stack.pop();
                        out
                    }
                }
            }
            Value::Fs(fs) => {
                let mut pairs = BTreeMap::new();
                for (k, inner) in &fs.pairs {
                    pairs.insert(k.clone(), self.resolve(inner, stack)?);
                }
                Some(Value::Fs(FeatureStructure { pairs }))
            }
        }
    }
}

/// Most general structure subsumed by both inputs, or `None` on a clash.
///
/// Variables share one namespace across both arguments. A binding that
/// would make a structure contain itself (occurs check) also fails.
pub fn unify(a: &FeatureStructure, b: &FeatureStructure) -> Option<FeatureStructure> {
    let mut u = Unifier::default();
    let merged = u.unify_fs(a, b)?;
    match u.resolve(&Value::Fs(merged), &mut Vec::new())? {
        Value::Fs(fs) => Some(fs),
        _ => unreachable!("resolving a structure yields a structure"),
    }
}

/// True iff everything `general` states is also stated by `specific`.
///
/// Variables in `general` match any value, consistently per name. A
/// variable in `specific` only matches a variable in `general`.
pub fn subsumes(general: &FeatureStructure, specific: &FeatureStructure) -> bool {
    fn go<'a>(g: &'a Value, s: &'a Value, seen: &mut HashMap<&'a str, &'a Value>) -> bool {
        match (g, s) {
            (Value::Var(name), _) => match seen.get(name.as_str()) {
                Some(prev) => *prev == s,
                None => {
                    seen.insert(name, s);
                    true
                }
            },
            (Value::Atom(x), Value::Atom(y)) => x == y,
            (Value::Fs(x), Value::Fs(y)) => x.pairs.iter().all(|(k, gv)| match y.pairs.get(k) {
                Some(sv) => go(gv, sv, seen),
                None => false,
            }),
            _ => false,
        }
    }
    let g = Value::Fs(general.clone());
    let s = Value::Fs(specific.clone());
    go(&g, &s, &mut HashMap::new())
}

/// Replace every bound variable in `fs`. Unbound variables are kept.
pub fn substitute(
    fs: &FeatureStructure,
    bindings: &HashMap<String, Value>,
) -> Result<FeatureStructure, FsError> {
    fn go(
        v: &Value,
        bindings: &HashMap<String, Value>,
        stack: &mut Vec<String>,
    ) -> Result<Value, FsError> {
        match v {
            Value::Atom(_) => Ok(v.clone()),
            Value::Var(name) => match bindings.get(name) {
                None => Ok(v.clone()),
                Some(bound) => {
                    if stack.contains(name) {
                        return Err(FsError::CyclicBinding(name.clone()));
                    }
                    stack.push(name.clone());
                    let out = go(bound, bindings, stack);
                    stack.pop();
                    out
                }
            },
            Value::Fs(inner) => {
                let mut pairs = BTreeMap::new();
                for (k, x) in &inner.pairs {
                    pairs.insert(k.clone(), go(x, bindings, stack)?);
                }
                Ok(Value::Fs(FeatureStructure { pairs }))
            }
        }
    }
    let mut pairs = BTreeMap::new();
    let mut stack = Vec::new();
    for (k, v) in &fs.pairs {
        pairs.insert(k.clone(), go(v, bindings, &mut stack)?);
    }
    Ok(FeatureStructure { pairs })
}
