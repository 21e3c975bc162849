//! Ensemble prediction records: K member distributions per question.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Row-sum tolerance. Rows inside it are renormalized, rows outside rejected.
pub const ROW_TOLERANCE: f64 = 1e-6;

pub const MCMRC_LABELS: [&str; 4] = ["A", "B", "C", "D"];
pub const QC_LABELS: [&str; 3] = ["easy", "medium", "hard"];

/// What a prediction set scores: answer options or question complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Mcmrc,
    Qc,
}

impl Purpose {
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Purpose::Mcmrc => &MCMRC_LABELS,
            Purpose::Qc => &QC_LABELS,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Purpose::Mcmrc => "mcmrc",
            Purpose::Qc => "qc",
        }
    }

    pub fn check_labels<S: AsRef<str>>(self, labels: &[S]) -> Result<()> {
        let expected = self.labels();
        let matches = labels.len() == expected.len() && labels.iter().zip(expected).all(|(a, b)| a.as_ref() == *b);
        if matches {
            Ok(())
        } else {
            Err(Error::LabelSpaceMismatch {
                expected: expected.join(","),
                found: labels.iter().map(|l| l.as_ref()).collect::<Vec<_>>().join(","),
            })
        }
    }
}

impl FromStr for Purpose {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mcmrc" => Ok(Purpose::Mcmrc),
            "qc" => Ok(Purpose::Qc),
            other => Err(Error::InvalidRecord(format!("unknown purpose `{other}`"))),
        }
    }
}

/// K probability rows over a shared label space for one question.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsemblePrediction {
    question_id: String,
    labels: Vec<String>,
    members: Vec<Vec<f64>>,
}

impl EnsemblePrediction {
    /// Validates and builds a prediction. Rows within [`ROW_TOLERANCE`] of
    /// unit mass are renormalized.
    pub fn new(question_id: impl Into<String>, labels: Vec<String>, members: Vec<Vec<f64>>) -> Result<Self> {
        let question_id = question_id.into();
        if labels.is_empty() {
            return Err(Error::InvalidRecord(format!("`{question_id}` has an empty label space")));
        }
        if members.is_empty() {
            return Err(Error::InvalidRecord(format!("`{question_id}` has no ensemble members")));
        }
        let mut normalized = Vec::with_capacity(members.len());
        for (row_idx, row) in members.into_iter().enumerate() {
            if row.len() != labels.len() {
                return Err(Error::LabelSpaceMismatch {
                    expected: format!("{} columns", labels.len()),
                    found: format!("{} columns in row {row_idx} of `{question_id}`", row.len()),
                });
            }
            if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::InvalidDistribution(format!(
                    "row {row_idx} of `{question_id}` has entry {x} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::RowNotNormalized { id: question_id, row: row_idx, sum });
            }
            normalized.push(row.into_iter().map(|x| x / sum).collect());
        }
        Ok(EnsemblePrediction { question_id, labels, members: normalized })
    }

    /// Convenience constructor using the label space of `purpose`.
    pub fn for_purpose(question_id: impl Into<String>, purpose: Purpose, members: Vec<Vec<f64>>) -> Result<Self> {
        let labels = purpose.labels().iter().map(|l| l.to_string()).collect();
        EnsemblePrediction::new(question_id, labels, members)
    }

    pub fn question_id(&self) -> &str {
        &self.question_id
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn members(&self) -> &[Vec<f64>] {
        &self.members
    }

    pub fn ensemble_size(&self) -> usize {
        self.members.len()
    }

    /// Arithmetic mean of the member rows.
    pub fn mean_distribution(&self) -> Vec<f64> {
        let k = self.members.len() as f64;
        let mut mean = alloc::vec![0.0; self.labels.len()];
        for row in &self.members {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= k);
        mean
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate().skip(1) {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// Predictions for one purpose with a uniform ensemble size.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    purpose: Purpose,
    ensemble_size: usize,
    predictions: BTreeMap<String, EnsemblePrediction>,
}

impl PredictionSet {
    pub fn new(purpose: Purpose, ensemble_size: usize) -> Result<Self> {
        if ensemble_size == 0 {
            return Err(Error::InvalidRecord("ensemble size must be at least 1".into()));
        }
        Ok(PredictionSet { purpose, ensemble_size, predictions: BTreeMap::new() })
    }

    /// Adds a prediction after checking its label space and member count.
    pub fn insert(&mut self, p: EnsemblePrediction) -> Result<()> {
        self.purpose.check_labels(p.labels())?;
        if p.ensemble_size() != self.ensemble_size {
            return Err(Error::EnsembleSizeMismatch {
                id: p.question_id.clone(),
                expected: self.ensemble_size,
                found: p.ensemble_size(),
            });
        }
        if self.predictions.contains_key(p.question_id()) {
            return Err(Error::DuplicateQuestionId(p.question_id.clone()));
        }
        self.predictions.insert(p.question_id.clone(), p);
        Ok(())
    }

    pub fn purpose(&self) -> Purpose {
        self.purpose
    }

    pub fn ensemble_size(&self) -> usize {
        self.ensemble_size
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EnsemblePrediction> {
        self.predictions.get(id)
    }

    pub fn require(&self, id: &str) -> Result<&EnsemblePrediction> {
        self.get(id).ok_or_else(|| Error::MissingPrediction(id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &EnsemblePrediction> {
        self.predictions.values()
    }
}
