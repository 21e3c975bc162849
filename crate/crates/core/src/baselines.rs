//! Majority-class and threshold-based complexity baselines.

use alloc::vec::Vec;

use crate::corpus::{Difficulty, SplitCounts};
use crate::error::{Error, Result};
use crate::metrics::{accuracy, macro_f1};
use crate::vocab::ComplexityThresholds;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationScores {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub n: usize,
}

pub fn score_predictions(pred: &[Difficulty], truth: &[Difficulty]) -> Result<ClassificationScores> {
    Ok(ClassificationScores {
        accuracy: accuracy(pred, truth)?,
        macro_f1: macro_f1(pred, truth, &Difficulty::ALL)?,
        n: truth.len(),
    })
}

/// Most frequent class; ties go to the easier class.
pub fn majority_class(labels: &[Difficulty]) -> Result<Difficulty> {
    if labels.is_empty() {
        return Err(Error::EmptyQuestionSet);
    }
    let mut counts = [0usize; 3];
    for d in labels {
        counts[d.index()] += 1;
    }
    let best = (0..3).fold(0, |b, i| if counts[i] > counts[b] { i } else { b });
    Ok(Difficulty::ALL[best])
}

/// Always predicts `majority` (usually the [`majority_class`] of a training
/// or tuning split) and scores it against `truth`.
pub fn majority_baseline(majority: Difficulty, truth: &[Difficulty]) -> Result<ClassificationScores> {
    let pred: Vec<Difficulty> = truth.iter().map(|_| majority).collect();
    score_predictions(&pred, truth)
}

/// Expands per-class question counts into a label list.
pub fn labels_from_counts(counts: &SplitCounts) -> Vec<Difficulty> {
    Difficulty::ALL.iter().flat_map(|&d| core::iter::repeat_n(d, counts.get(d).questions as usize)).collect()
}

/// Thresholds `scores` and scores the resulting labels.
pub fn threshold_baseline(
    scores: &[f64],
    truth: &[Difficulty],
    th: &ComplexityThresholds,
) -> Result<ClassificationScores> {
    let pred: Vec<Difficulty> = scores.iter().map(|&s| th.classify(s)).collect();
    score_predictions(&pred, truth)
}
