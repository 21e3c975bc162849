//! Grammaticality, unanswerability, diversity and complexity scores, plus the
//! classification metrics used by the complexity baselines.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::entropy::{entropy_unchecked, LogBase};
use crate::error::{Error, Result};
use crate::predictions::{EnsemblePrediction, PredictionSet, Purpose};
use crate::text::tokenize;

/// Mean of the member entropies. This is not the entropy of the mean row.
pub fn expected_entropy(p: &EnsemblePrediction, base: LogBase) -> f64 {
    let k = p.ensemble_size() as f64;
    p.members().iter().map(|row| entropy_unchecked(row, base)).sum::<f64>() / k
}

/// Unanswerability over a list of question ids: the mean expected entropy,
/// with the per-question values in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Unanswerability {
    pub mean: f64,
    pub per_question: Vec<f64>,
    pub base: LogBase,
}

pub fn unanswerability<S: AsRef<str>>(set: &PredictionSet, ids: &[S], base: LogBase) -> Result<Unanswerability> {
    set.purpose().check_labels(Purpose::Mcmrc.labels())?;
    let per_question =
        ids.iter().map(|id| set.require(id.as_ref()).map(|p| expected_entropy(p, base))).collect::<Result<Vec<_>>>()?;
    Ok(Unanswerability { mean: mean(&per_question), per_question, base })
}

/// Mean in a fixed summation order; zero for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuestionType {
    What,
    Who,
    When,
    Where,
    Why,
    How,
    Which,
    YesNo,
    Other,
}

impl QuestionType {
    pub const ALL: [QuestionType; 9] = [
        QuestionType::What,
        QuestionType::Who,
        QuestionType::When,
        QuestionType::Where,
        QuestionType::Why,
        QuestionType::How,
        QuestionType::Which,
        QuestionType::YesNo,
        QuestionType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::What => "what",
            QuestionType::Who => "who",
            QuestionType::When => "when",
            QuestionType::Where => "where",
            QuestionType::Why => "why",
            QuestionType::How => "how",
            QuestionType::Which => "which",
            QuestionType::YesNo => "yesno",
            QuestionType::Other => "other",
        }
    }
}

const AUXILIARIES: [&str; 19] = [
    "is", "are", "was", "were", "do", "does", "did", "can", "could", "will", "would", "shall", "should", "has", "have",
    "had", "may", "might", "must",
];

fn wh_type(token: &str) -> Option<QuestionType> {
    Some(match token {
        "what" => QuestionType::What,
        "who" | "whom" | "whose" => QuestionType::Who,
        "when" => QuestionType::When,
        "where" => QuestionType::Where,
        "why" => QuestionType::Why,
        "how" => QuestionType::How,
        "which" => QuestionType::Which,
        _ => return None,
    })
}

/// The first wh-word anywhere in the question decides the type. Without one,
/// a leading auxiliary verb makes it a yes/no question.
pub fn classify_question_type(question: &str) -> Result<QuestionType> {
    let tokens = tokenize(question);
    let first = tokens.first().ok_or(Error::EmptyQuestion)?;
    if let Some(t) = tokens.iter().find_map(|t| wh_type(t)) {
        return Ok(t);
    }
    if AUXILIARIES.contains(&first.as_str()) {
        Ok(QuestionType::YesNo)
    } else {
        Ok(QuestionType::Other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StandaloneClass {
    Standalone,
    PassageDependent,
}

impl StandaloneClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StandaloneClass::Standalone => "standalone",
            StandaloneClass::PassageDependent => "passage_dependent",
        }
    }
}

/// Passage-dependent iff the token `passage` occurs (case-insensitive, exact
/// word).
pub fn classify_standalone(question: &str) -> Result<StandaloneClass> {
    let tokens = tokenize(question);
    if tokens.is_empty() {
        return Err(Error::EmptyQuestion);
    }
    if tokens.iter().any(|t| t == "passage") {
        Ok(StandaloneClass::PassageDependent)
    } else {
        Ok(StandaloneClass::Standalone)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiversityScheme {
    EightWay,
    #[default]
    Binary,
}

impl DiversityScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            DiversityScheme::EightWay => "eight_way",
            DiversityScheme::Binary => "binary",
        }
    }

    /// Class name of `question` under this scheme.
    pub fn classify(self, question: &str) -> Result<&'static str> {
        match self {
            DiversityScheme::EightWay => classify_question_type(question).map(QuestionType::as_str),
            DiversityScheme::Binary => classify_standalone(question).map(StandaloneClass::as_str),
        }
    }

    /// Number of classes the scheme can emit. The eight-way scheme carries a
    /// ninth `other` bucket for questions matching no rule.
    pub fn class_count(self) -> usize {
        match self {
            DiversityScheme::EightWay => QuestionType::ALL.len(),
            DiversityScheme::Binary => 2,
        }
    }
}

impl fmt::Display for DiversityScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DiversityScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eight_way" => Ok(DiversityScheme::EightWay),
            "binary" => Ok(DiversityScheme::Binary),
            other => Err(Error::InvalidRecord(alloc::format!("unknown diversity scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diversity {
    pub bits: f64,
    pub scheme: DiversityScheme,
    pub histogram: BTreeMap<&'static str, usize>,
}

/// Entropy in bits of the empirical question-class distribution.
pub fn diversity<S: AsRef<str>>(questions: &[S], scheme: DiversityScheme) -> Result<Diversity> {
    if questions.is_empty() {
        return Err(Error::EmptyQuestionSet);
    }
    let mut histogram = BTreeMap::new();
    for q in questions {
        *histogram.entry(scheme.classify(q.as_ref())?).or_insert(0usize) += 1;
    }
    let n = questions.len() as f64;
    let dist: Vec<f64> = histogram.values().map(|&c| c as f64 / n).collect();
    Ok(Diversity { bits: entropy_unchecked(&dist, LogBase::Bits), scheme, histogram })
}

/// Difficulty weights for easy, medium and hard.
pub const COMPLEXITY_WEIGHTS: [f64; 3] = [0.0, 0.5, 1.0];

/// Weighted complexity of an already averaged easy/medium/hard distribution.
pub fn complexity_of_distribution(mean: &[f64]) -> f64 {
    let c: f64 = mean.iter().zip(COMPLEXITY_WEIGHTS).map(|(p, w)| p * w).sum();
    c.clamp(0.0, 1.0)
}

/// Complexity in `[0, 1]` of a QC ensemble prediction, computed on the
/// ensemble-mean distribution.
pub fn complexity_score(p: &EnsemblePrediction) -> Result<f64> {
    Purpose::Qc.check_labels(p.labels())?;
    Ok(complexity_of_distribution(&p.mean_distribution()))
}

/// Grammatical errors per question.
pub fn grammar_rate(counts: &[u32], n_questions: usize) -> Result<f64> {
    if n_questions == 0 {
        return Err(Error::EmptyQuestionSet);
    }
    let total: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    Ok(total as f64 / n_questions as f64)
}

/// Rough surface checks standing in when no external grammar checker report
/// is available. Not equivalent to a real grammatical error detector: it
/// counts a missing final `?`, a non-capital first letter, an odd number of
/// double quotes and unbalanced brackets.
pub fn naive_grammar_errors(question: &str) -> u32 {
    let q = question.trim();
    let mut errors = 0;
    if !q.ends_with('?') {
        errors += 1;
    }
    if !q.chars().next().is_some_and(char::is_uppercase) {
        errors += 1;
    }
    if q.chars().filter(|&c| c == '"').count() % 2 == 1 {
        errors += 1;
    }
    let mut depth: [i64; 3] = [0; 3];
    let mut broken = false;
    for c in q.chars() {
        let (slot, delta) = match c {
            '(' => (0, 1),
            ')' => (0, -1),
            '[' => (1, 1),
            ']' => (1, -1),
            '{' => (2, 1),
            '}' => (2, -1),
            _ => continue,
        };
        depth[slot] += delta;
        broken |= depth[slot] < 0;
    }
    if broken || depth.iter().any(|&d| d != 0) {
        errors += 1;
    }
    errors
}

/// Fraction of positions where `pred` equals `truth`.
pub fn accuracy<T: PartialEq>(pred: &[T], truth: &[T]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: truth.len() });
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Unweighted mean over `classes` of per-class F1. A class with no true
/// positives contributes 0, including when its precision or recall is 0/0.
pub fn macro_f1<T: PartialEq + fmt::Debug>(pred: &[T], truth: &[T], classes: &[T]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: truth.len() });
    }
    if classes.is_empty() {
        return Err(Error::EmptyQuestionSet);
    }
    let index = |label: &T| {
        classes.iter().position(|c| c == label).ok_or_else(|| Error::UnknownLabel(alloc::format!("{label:?}")))
    };
    let n = classes.len();
    let mut tp = vec![0u64; n];
    let mut fp = vec![0u64; n];
    let mut fnc = vec![0u64; n];
    for (p, t) in pred.iter().zip(truth) {
        let (pi, ti) = (index(p)?, index(t)?);
        if pi == ti {
            tp[pi] += 1;
        } else {
            fp[pi] += 1;
            fnc[ti] += 1;
        }
    }
    let f1_sum: f64 = (0..n)
        .map(|c| {
            if tp[c] == 0 {
                return 0.0;
            }
            let precision = tp[c] as f64 / (tp[c] + fp[c]) as f64;
            let recall = tp[c] as f64 / (tp[c] + fnc[c]) as f64;
            2.0 * precision * recall / (precision + recall)
        })
        .sum();
    Ok(f1_sum / n as f64)
}
