//! Score arithmetic for chart edges.
//!
//! All quantities are costs (smaller is better):
//!
//! * shortfall `sf = Maxseg - maxseg(i,j) + RS`
//! * acoustic quality `Q_a = sf / length`, length counted in words
//! * integrated quality `QS = Q_a / (sc * pr)`
//!
//! Internal arithmetic is full precision. [`fmt_score`] and
//! [`display_round`] apply the two-decimal half-to-even rounding used on
//! every external surface.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featstruct::FeatureStructure;
use crate::grammar::Constituent;
use crate::predictions::{matches_prediction, PredictionList};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("edge length must be at least one word")]
    ZeroLength,
    #[error("non-positive divisor: sc={sc}, pr={pr}")]
    NonPositiveDivisor { sc: f64, pr: f64 },
    #[error("invalid score config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScMode {
    #[default]
    ConstantOne,
    ValenceRatio,
}

impl std::str::FromStr for ScMode {
    type Err = ScoreError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant-one" => Ok(ScMode::ConstantOne),
            "valence-ratio" => Ok(ScMode::ValenceRatio),
            _ => Err(ScoreError::InvalidConfig(format!("unknown sc mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthMode {
    #[default]
    WordCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreConfig {
    pub pr_match: f64,
    pub pr_nomatch: f64,
    pub sc_mode: ScMode,
    pub length_mode: LengthMode,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            pr_match: 4.0,
            pr_nomatch: 1.0,
            sc_mode: ScMode::ConstantOne,
            length_mode: LengthMode::WordCount,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<(), ScoreError> {
        if !(self.pr_nomatch > 0.0 && self.pr_match >= self.pr_nomatch && self.pr_match.is_finite()) {
            return Err(ScoreError::InvalidConfig(format!(
                "need pr_match >= pr_nomatch > 0, got {} and {}",
                self.pr_match, self.pr_nomatch
            )));
        }
        Ok(())
    }
}

/// Every component of an edge's integrated quality score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreBreakdown {
    pub rs: f64,
    pub sf: f64,
    pub q_a: f64,
    pub sc: f64,
    pub pr: f64,
    pub qs: f64,
    pub length: usize,
}

impl ScoreBreakdown {
    pub fn compute(
        maxseg_total: f64,
        maxseg_segment: f64,
        rs: f64,
        length: usize,
        sc: f64,
        pr: f64,
    ) -> Result<Self, ScoreError> {
        let sf = shortfall(maxseg_total, maxseg_segment, rs);
        let q_a = acoustic_quality(sf, length)?;
        let qs = quality_score(q_a, sc, pr)?;
        Ok(Self {
            rs,
            sf,
            q_a,
            sc,
            pr,
            qs,
            length,
        })
    }
}

pub fn shortfall(maxseg_total: f64, maxseg_segment: f64, rs: f64) -> f64 {
    maxseg_total - maxseg_segment + rs
}

pub fn acoustic_quality(sf: f64, length: usize) -> Result<f64, ScoreError> {
    if length == 0 {
        return Err(ScoreError::ZeroLength);
    }
    Ok(sf / length as f64)
}

pub fn pragmatic_relevance(sem: &FeatureStructure, preds: &PredictionList, cfg: &ScoreConfig) -> f64 {
    if matches_prediction(sem, preds) {
        cfg.pr_match
    } else {
        cfg.pr_nomatch
    }
}

pub fn syntactic_completeness(c: &Constituent, cfg: &ScoreConfig) -> f64 {
    match cfg.sc_mode {
        ScMode::ConstantOne => 1.0,
        ScMode::ValenceRatio => (c.consumed as f64 + 1.0) / (c.total_valence as f64 + 1.0),
    }
}

pub fn combine_rs(rs1: f64, rs2: f64) -> f64 {
    rs1 + rs2
}

pub fn quality_score(q_a: f64, sc: f64, pr: f64) -> Result<f64, ScoreError> {
    if !(sc > 0.0 && pr > 0.0) {
        return Err(ScoreError::NonPositiveDivisor { sc, pr });
    }
    Ok(q_a / (sc * pr))
}

/// Round to two decimals, ties to even.
///
/// The value is first snapped to 1e-8 so binary noise such as
/// `29.845000000000002` is treated as the exact tie it represents.
pub fn display_round(x: f64) -> f64 {
    let units = (x * 1e8).round() as i128;
    let neg = units < 0;
    let a = units.abs();
    let (q, r) = (a / 1_000_000, a % 1_000_000);
    let q = match r.cmp(&500_000) {
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal if q % 2 == 1 => q + 1,
        _ => q,
    };
    let v = q as f64 / 100.0;
    if neg {
        -v
    } else {
        v
    }
}

pub fn fmt_score(x: f64) -> String {
    format!("{:.2}", display_round(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortfall_of_ja() {
        assert_eq!(fmt_score(shortfall(110.21, 22.08, 31.25)), "119.38");
        assert!((shortfall(110.21, 22.08, 31.25) - 119.38).abs() < 1e-9);
    }

    #[test]
    fn shortfall_of_segment_optimum_is_maxseg() {
        for (m, r) in [(110.21, 22.08), (5.0, 5.0), (1.5, 0.25)] {
            assert!((shortfall(m, r, r) - m).abs() < 1e-12);
        }
        assert!((shortfall(110.21, 88.76, 88.76) - 110.21).abs() < 1e-9);
    }

    #[test]
    fn acoustic_quality_examples() {
        let q = acoustic_quality(110.21, 3).unwrap();
        assert!((q - 36.736_666_666).abs() < 1e-6);
        assert_eq!(fmt_score(q), "36.74");
        assert_eq!(acoustic_quality(119.38, 1).unwrap(), 119.38);
        assert_eq!(acoustic_quality(1.0, 0), Err(ScoreError::ZeroLength));
    }

    #[test]
    fn quality_score_examples() {
        let qs = quality_score(119.38, 1.0, 4.0).unwrap();
        assert!((qs - 29.845).abs() < 1e-9);
        assert_eq!(fmt_score(qs), "29.84");
        assert_eq!(quality_score(7.5, 1.0, 1.0).unwrap(), 7.5);
        assert!(matches!(
            quality_score(1.0, 0.0, 1.0),
            Err(ScoreError::NonPositiveDivisor { .. })
        ));
    }

    #[test]
    fn combine_examples() {
        assert!((combine_rs(30.00, 58.76) - 88.76).abs() < 1e-9);
        assert!((combine_rs(22.08, 88.76) - 110.84).abs() < 1e-9);
        let (a, b, c) = (1.25, 2.5, 4.0);
        assert_eq!(combine_rs(combine_rs(a, b), c), combine_rs(a, combine_rs(b, c)));
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(fmt_score(29.845), "29.84");
        assert_eq!(fmt_score(29.855), "29.86");
        assert_eq!(fmt_score(29.845_01), "29.85");
        assert_eq!(fmt_score(-1.005), "-1.00");
        assert_eq!(fmt_score(7.8125), "7.81");
        assert_eq!(display_round(110.21), 110.21);
    }

    #[test]
    fn config_validation() {
        assert!(ScoreConfig::default().validate().is_ok());
        let bad = ScoreConfig {
            pr_match: 0.5,
            ..ScoreConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ScoreConfig {
            pr_nomatch: 0.0,
            pr_match: 0.0,
            ..ScoreConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn valence_ratio() {
        use crate::grammar::{Category, Constituent};
        let c = Constituent {
            cat: Category::new("prep"),
            remaining_valence: vec![],
            sem: FeatureStructure::new(),
            consumed: 0,
            total_valence: 1,
        };
        let cfg = ScoreConfig {
            sc_mode: ScMode::ValenceRatio,
            ..ScoreConfig::default()
        };
        assert_eq!(syntactic_completeness(&c, &cfg), 0.5);
        assert_eq!(syntactic_completeness(&c, &ScoreConfig::default()), 1.0);
        let sat = Constituent { consumed: 1, ..c };
        assert_eq!(syntactic_completeness(&sat, &cfg), 1.0);
    }
}
