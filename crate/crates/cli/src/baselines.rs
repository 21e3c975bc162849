//! `tune-vocab`, `baselines` and `stats` subcommands.

use std::path::{Path, PathBuf};

use serde::Serialize;

use qgassess_core::baselines::{
    labels_from_counts, majority_baseline, majority_class, threshold_baseline, ClassificationScores,
};
use qgassess_core::corpus::{Difficulty, McqExample, Split, SplitCounts, SplitStats, RACE_PP_STATS};
use qgassess_core::vocab::{tune_thresholds, vocab_score, TunedThresholds, VocabLexicon};
use qgassess_core::Error;

use crate::error::{CliError, Result};
use crate::formats::{load_dataset, load_lexicon};
use crate::render::{self, percent, Format, Table};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub n: usize,
}

impl From<ClassificationScores> for Scores {
    fn from(s: ClassificationScores) -> Self {
        Scores { accuracy: s.accuracy, macro_f1: s.macro_f1, n: s.n }
    }
}

fn labels(examples: &[McqExample]) -> Result<Vec<Difficulty>> {
    Ok(examples
        .iter()
        .map(|e| e.difficulty.ok_or(Error::MissingDifficultyLabels))
        .collect::<qgassess_core::Result<Vec<_>>>()?)
}

fn vocab_eval(examples: &[McqExample], lexicon: &VocabLexicon, tuned: &TunedThresholds) -> Result<Scores> {
    let truth = labels(examples)?;
    let scores: Vec<f64> = examples.iter().map(|e| vocab_score(e, lexicon)).collect();
    Ok(threshold_baseline(&scores, &truth, &tuned.thresholds)?.into())
}

#[derive(Debug, Clone)]
pub struct TuneConfig {
    pub dev: PathBuf,
    pub evl: Option<PathBuf>,
    pub lexicon: PathBuf,
    pub grid_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneReport {
    pub t1: f64,
    pub t2: f64,
    pub grid_step: f64,
    pub dev_accuracy: f64,
    pub evl: Option<Scores>,
}

impl TuneReport {
    pub fn render(&self, format: Format) -> Result<String> {
        let mut t = Table::new(["t1", "t2", "grid_step", "dev_accuracy", "evl_accuracy", "evl_macro_f1"]);
        t.push(vec![
            self.t1.to_string(),
            self.t2.to_string(),
            self.grid_step.to_string(),
            self.dev_accuracy.to_string(),
            render::opt(self.evl.map(|s| s.accuracy)),
            render::opt(self.evl.map(|s| s.macro_f1)),
        ]);
        match format {
            Format::Json => render::json(self),
            Format::Csv => Ok(t.csv()),
            Format::Md => Ok(t.markdown()),
        }
    }
}

pub fn run_tune(config: &TuneConfig) -> Result<TuneReport> {
    let lexicon = load_lexicon(&config.lexicon)?;
    let dev = load_dataset(&config.dev, Split::Dev)?;
    let tuned = tune_thresholds(&dev, &lexicon, config.grid_step)?;
    let evl = match &config.evl {
        Some(p) => Some(vocab_eval(&load_dataset(p, Split::Evl)?, &lexicon, &tuned)?),
        None => None,
    };
    Ok(TuneReport {
        t1: tuned.thresholds.t1,
        t2: tuned.thresholds.t2,
        grid_step: config.grid_step,
        dev_accuracy: tuned.dev_accuracy,
        evl,
    })
}

/// Labels for the baseline table: either dataset files or the published
/// per-class counts.
#[derive(Debug, Clone)]
pub enum LabelSource {
    Published,
    Files { trn: Option<PathBuf>, dev: PathBuf, evl: PathBuf },
}

#[derive(Debug, Clone)]
pub struct BaselinesConfig {
    pub labels: LabelSource,
    /// Adds a vocabulary-threshold row tuned on Dev. Needs dataset files.
    pub lexicon: Option<PathBuf>,
    pub grid_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineRow {
    pub method: String,
    pub dev: Scores,
    pub evl: Scores,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselinesReport {
    pub labels: String,
    pub majority_class: String,
    pub rows: Vec<BaselineRow>,
}

impl BaselinesReport {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => render::json(self),
            Format::Csv => {
                let mut t = Table::new(["method", "dev_accuracy", "dev_macro_f1", "evl_accuracy", "evl_macro_f1"]);
                for r in &self.rows {
                    t.push(vec![
                        r.method.clone(),
                        r.dev.accuracy.to_string(),
                        r.dev.macro_f1.to_string(),
                        r.evl.accuracy.to_string(),
                        r.evl.macro_f1.to_string(),
                    ]);
                }
                Ok(t.csv())
            }
            Format::Md => {
                let mut t = Table::new(["Method", "Dev Acc", "Dev F1", "Evl Acc", "Evl F1"]);
                for r in &self.rows {
                    t.push(vec![
                        r.method.clone(),
                        percent(r.dev.accuracy),
                        percent(r.dev.macro_f1),
                        percent(r.evl.accuracy),
                        percent(r.evl.macro_f1),
                    ]);
                }
                Ok(t.markdown())
            }
        }
    }
}

fn majority_row(majority: Difficulty, dev: &[Difficulty], evl: &[Difficulty]) -> Result<BaselineRow> {
    Ok(BaselineRow {
        method: "majority".into(),
        dev: majority_baseline(majority, dev)?.into(),
        evl: majority_baseline(majority, evl)?.into(),
        thresholds: None,
    })
}

pub fn run_baselines(config: &BaselinesConfig) -> Result<BaselinesReport> {
    match &config.labels {
        LabelSource::Published => {
            if config.lexicon.is_some() {
                return Err(CliError::Usage("the vocabulary baseline needs --dev and --evl dataset files".into()));
            }
            let majority = majority_class(&labels_from_counts(&RACE_PP_STATS.trn))?;
            let dev = labels_from_counts(&RACE_PP_STATS.dev);
            let evl = labels_from_counts(&RACE_PP_STATS.evl);
            Ok(BaselinesReport {
                labels: "published_counts".into(),
                majority_class: majority.as_str().into(),
                rows: vec![majority_row(majority, &dev, &evl)?],
            })
        }
        LabelSource::Files { trn, dev, evl } => {
            let dev_ex = load_dataset(dev, Split::Dev)?;
            let evl_ex = load_dataset(evl, Split::Evl)?;
            let dev_labels = labels(&dev_ex)?;
            let evl_labels = labels(&evl_ex)?;
            let majority = match trn {
                Some(p) => majority_class(&labels(&load_dataset(p, Split::Trn)?)?)?,
                None => majority_class(&dev_labels)?,
            };
            let mut rows = vec![majority_row(majority, &dev_labels, &evl_labels)?];
            if let Some(lex_path) = &config.lexicon {
                let lexicon = load_lexicon(lex_path)?;
                let tuned = tune_thresholds(&dev_ex, &lexicon, config.grid_step)?;
                rows.push(BaselineRow {
                    method: "vocab".into(),
                    dev: vocab_eval(&dev_ex, &lexicon, &tuned)?,
                    evl: vocab_eval(&evl_ex, &lexicon, &tuned)?,
                    thresholds: Some([tuned.thresholds.t1, tuned.thresholds.t2]),
                });
            }
            Ok(BaselinesReport {
                labels: if trn.is_some() { "files_trn_majority" } else { "files_dev_majority" }.into(),
                majority_class: majority.as_str().into(),
                rows,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetRow {
    pub split: String,
    pub difficulty: String,
    pub questions: u64,
    pub contexts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub source: String,
    pub subsets: Vec<SubsetRow>,
}

impl StatsReport {
    pub fn from_stats(source: &str, stats: &SplitStats, splits: &[Split]) -> Self {
        let mut subsets = Vec::new();
        for &split in splits {
            let counts: &SplitCounts = stats.get(split);
            for d in Difficulty::ALL {
                let s = counts.get(d);
                subsets.push(SubsetRow {
                    split: split.as_str().into(),
                    difficulty: d.as_str().into(),
                    questions: s.questions,
                    contexts: s.contexts,
                });
            }
        }
        StatsReport { source: source.into(), subsets }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        let mut t = Table::new(["split", "difficulty", "questions", "contexts"]);
        for r in &self.subsets {
            t.push(vec![r.split.clone(), r.difficulty.clone(), r.questions.to_string(), r.contexts.to_string()]);
        }
        match format {
            Format::Json => render::json(self),
            Format::Csv => Ok(t.csv()),
            Format::Md => Ok(t.markdown()),
        }
    }
}

/// Counts per split from whichever dataset files are given, or the
/// published figures when none are.
pub fn run_stats(files: &[(Split, &Path)]) -> Result<StatsReport> {
    if files.is_empty() {
        return Ok(StatsReport::from_stats("published", &RACE_PP_STATS, &[Split::Trn, Split::Dev, Split::Evl]));
    }
    let mut all = Vec::new();
    let mut splits = Vec::new();
    for &(split, path) in files {
        all.extend(load_dataset(path, split)?);
        splits.push(split);
    }
    Ok(StatsReport::from_stats("files", &SplitStats::from_examples(&all), &splits))
}
