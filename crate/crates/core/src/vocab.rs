//! Vocabulary-tier complexity scorer and the Dev-split threshold search.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use crate::corpus::{Difficulty, McqExample};
use crate::error::{Error, Result};
use crate::text::tokenize;

/// Score given to an example when none of its tokens are in the lexicon.
pub const NEUTRAL_SCORE: f64 = 0.5;

pub const DEFAULT_GRID_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Beginner,
    Intermediate,
    Expert,
}

impl Tier {
    pub fn score(self) -> f64 {
        match self {
            Tier::Beginner => 0.0,
            Tier::Intermediate => 0.5,
            Tier::Expert => 1.0,
        }
    }
}

impl FromStr for Tier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beginner" => Ok(Tier::Beginner),
            "intermediate" => Ok(Tier::Intermediate),
            "expert" => Ok(Tier::Expert),
            other => Err(Error::InvalidRecord(format!("unknown tier `{other}`"))),
        }
    }
}

/// Lower-cased word to tier map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VocabLexicon {
    words: BTreeMap<String, Tier>,
}

impl VocabLexicon {
    /// Builds a lexicon, rejecting words that collide after lower-casing.
    pub fn new<S: AsRef<str>>(entries: impl IntoIterator<Item = (S, Tier)>) -> Result<Self> {
        let mut words = BTreeMap::new();
        for (word, tier) in entries {
            let key = word.as_ref().trim().to_lowercase();
            if key.is_empty() {
                return Err(Error::InvalidRecord("empty lexicon word".into()));
            }
            if words.insert(key.clone(), tier).is_some() {
                return Err(Error::InvalidRecord(format!("duplicate lexicon word `{key}`")));
            }
        }
        Ok(VocabLexicon { words })
    }

    pub fn get(&self, word: &str) -> Option<Tier> {
        self.words.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Running (sum, matched) over the tokens of `text`.
    fn accumulate(&self, text: &str, acc: &mut (f64, usize)) {
        for tok in tokenize(text) {
            if let Some(t) = self.get(&tok) {
                acc.0 += t.score();
                acc.1 += 1;
            }
        }
    }
}

fn finish(acc: (f64, usize)) -> f64 {
    if acc.1 == 0 {
        NEUTRAL_SCORE
    } else {
        acc.0 / acc.1 as f64
    }
}

/// Joint and per-field vocabulary scores of one example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VocabScores {
    pub joint: f64,
    pub question: f64,
    pub context: f64,
    pub options: f64,
}

pub fn vocab_scores(example: &McqExample, lexicon: &VocabLexicon) -> VocabScores {
    let mut q = (0.0, 0);
    let mut c = (0.0, 0);
    let mut o = (0.0, 0);
    lexicon.accumulate(&example.question, &mut q);
    lexicon.accumulate(&example.context, &mut c);
    for opt in &example.options {
        lexicon.accumulate(opt, &mut o);
    }
    let joint = (q.0 + c.0 + o.0, q.1 + c.1 + o.1);
    VocabScores { joint: finish(joint), question: finish(q), context: finish(c), options: finish(o) }
}

/// Mean tier score over the in-lexicon tokens of question, context and all
/// options together.
pub fn vocab_score(example: &McqExample, lexicon: &VocabLexicon) -> f64 {
    vocab_scores(example, lexicon).joint
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityThresholds {
    pub t1: f64,
    pub t2: f64,
}

impl ComplexityThresholds {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(0.0 <= t1 && t1 <= t2 && t2 <= 1.0) {
            return Err(Error::DomainError(format!("thresholds must satisfy 0 <= t1 <= t2 <= 1, got ({t1}, {t2})")));
        }
        Ok(ComplexityThresholds { t1, t2 })
    }

    /// Easy below `t1`, medium in `[t1, t2)`, hard from `t2` up.
    pub fn classify(&self, score: f64) -> Difficulty {
        if score < self.t1 {
            Difficulty::Easy
        } else if score < self.t2 {
            Difficulty::Medium
        } else {
            Difficulty::Hard
        }
    }
}

pub fn classify_by_threshold(score: f64, th: &ComplexityThresholds) -> Difficulty {
    th.classify(score)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunedThresholds {
    pub thresholds: ComplexityThresholds,
    pub dev_accuracy: f64,
}

/// The grid `0, step, 2 step, ..., 1`; the last point is exactly 1.
pub fn threshold_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::DomainError(format!("grid step must be in (0, 0.1], got {step}")));
    }
    let n = libm::ceil(1.0 / step - 1e-9) as usize;
    Ok((0..=n).map(|i| if i == n { 1.0 } else { (i as f64 * step).min(1.0) }).collect())
}

/// Exhaustive search over `t1 <= t2` on the grid for maximal accuracy of
/// [`ComplexityThresholds::classify`] against `labels`. Ties keep the
/// smallest `t1`, then the smallest `t2`.
pub fn tune_on_scores(scores: &[f64], labels: &[Difficulty], step: f64) -> Result<TunedThresholds> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: labels.len() });
    }
    if scores.is_empty() {
        return Err(Error::EmptyQuestionSet);
    }
    let grid = threshold_grid(step)?;

    // below[c][g] = examples of class c with score < grid[g]
    let mut sorted: [Vec<f64>; 3] = Default::default();
    for (&s, &d) in scores.iter().zip(labels) {
        sorted[d.index()].push(s);
    }
    for v in sorted.iter_mut() {
        v.sort_by(f64::total_cmp);
    }
    let below: [Vec<usize>; 3] =
        core::array::from_fn(|c| grid.iter().map(|&t| sorted[c].partition_point(|&s| s < t)).collect());
    let hard_total = sorted[Difficulty::Hard.index()].len();

    let mut best = (0usize, 0usize, 0usize);
    let mut found = false;
    for i in 0..grid.len() {
        for j in i..grid.len() {
            let hits = below[0][i] + (below[1][j] - below[1][i]) + (hard_total - below[2][j]);
            if !found || hits > best.2 {
                best = (i, j, hits);
                found = true;
            }
        }
    }
    Ok(TunedThresholds {
        thresholds: ComplexityThresholds { t1: grid[best.0], t2: grid[best.1] },
        dev_accuracy: best.2 as f64 / scores.len() as f64,
    })
}

/// Scores every Dev example with `lexicon` and tunes the thresholds.
pub fn tune_thresholds(dev: &[McqExample], lexicon: &VocabLexicon, grid_step: f64) -> Result<TunedThresholds> {
    if dev.is_empty() {
        return Err(Error::EmptyQuestionSet);
    }
    let labels = dev.iter().map(|e| e.difficulty.ok_or(Error::MissingDifficultyLabels)).collect::<Result<Vec<_>>>()?;
    let scores: Vec<f64> = dev.iter().map(|e| vocab_score(e, lexicon)).collect();
    tune_on_scores(&scores, &labels, grid_step)
}
