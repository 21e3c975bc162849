//! Validity filters for generated questions: exactly four unique options and
//! ensemble agreement that the first option is correct.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use crate::corpus::{unique_option_count, GeneratedOutput, McqExample, Split};
use crate::error::{Error, Result};
use crate::predictions::{argmax, EnsemblePrediction, PredictionSet, Purpose};

pub const REQUIRED_OPTIONS: usize = 4;

/// How the ensemble's vote on the correct option is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AgreementMode {
    /// Every member's argmax must hit the target option.
    #[default]
    PerMemberArgmax,
    /// The argmax of the ensemble-mean distribution must hit it.
    MeanArgmax,
}

impl AgreementMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AgreementMode::PerMemberArgmax => "per_member",
            AgreementMode::MeanArgmax => "mean",
        }
    }
}

impl FromStr for AgreementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_member" | "per_member_argmax" => Ok(AgreementMode::PerMemberArgmax),
            "mean" | "mean_argmax" => Ok(AgreementMode::MeanArgmax),
            other => Err(Error::InvalidRecord(format!("unknown agreement mode `{other}`"))),
        }
    }
}

/// True iff the output parsed and has exactly four distinct options.
pub fn check_four_options(g: &GeneratedOutput) -> Result<bool> {
    let unique = unique_option_count(g)?;
    Ok(g.options.len() == REQUIRED_OPTIONS && unique == REQUIRED_OPTIONS)
}

/// Whether the ensemble picks option `target`. Argmax ties go to the lowest
/// index.
pub fn ensemble_agrees(p: &EnsemblePrediction, target: usize, mode: AgreementMode) -> Result<bool> {
    Purpose::Mcmrc.check_labels(p.labels())?;
    Ok(match mode {
        AgreementMode::PerMemberArgmax => p.members().iter().all(|row| argmax(row) == target),
        AgreementMode::MeanArgmax => argmax(&p.mean_distribution()) == target,
    })
}

pub fn ensemble_first_agreement(p: &EnsemblePrediction, mode: AgreementMode) -> Result<bool> {
    ensemble_agrees(p, 0, mode)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterOutcome {
    pub question_id: String,
    pub parsed: bool,
    pub four_unique: bool,
    pub ensemble_agrees_first: bool,
    pub kept: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSummary {
    pub n_input: usize,
    pub n_parsed: usize,
    pub n_four_opt: usize,
    pub n_agree: usize,
    pub n_kept: usize,
    /// Four-option items over all inputs.
    pub four_opt_rate: f64,
    /// Four-option items over parseable inputs.
    pub four_opt_rate_parsed: f64,
    /// Agreeing items over four-option items.
    pub accuracy: f64,
    pub mode: AgreementMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterResult {
    pub outcomes: Vec<FilterOutcome>,
    /// Indices into the input of the kept items, in input order.
    pub kept: Vec<usize>,
    pub summary: FilterSummary,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One item to filter: a parsed output, the id its predictions are keyed by,
/// and the option the ensemble should pick.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub id: &'a str,
    pub output: &'a GeneratedOutput,
    pub target: usize,
}

/// Runs both checks over generated outputs, keyed by `context_id`, with the
/// first option as the target. A prediction is required for every
/// four-option item.
pub fn filter_set(gens: &[GeneratedOutput], preds: &PredictionSet, mode: AgreementMode) -> Result<FilterResult> {
    let cands: Vec<Candidate<'_>> =
        gens.iter().map(|g| Candidate { id: &g.context_id, output: g, target: 0 }).collect();
    filter_candidates(&cands, preds, mode)
}

/// [`filter_set`] with explicit ids and target options.
pub fn filter_candidates(cands: &[Candidate<'_>], preds: &PredictionSet, mode: AgreementMode) -> Result<FilterResult> {
    if preds.purpose() != Purpose::Mcmrc {
        return Err(Error::LabelSpaceMismatch {
            expected: Purpose::Mcmrc.labels().join(","),
            found: preds.purpose().labels().join(","),
        });
    }
    let mut outcomes = Vec::with_capacity(cands.len());
    let mut kept = Vec::new();
    for (idx, c) in cands.iter().enumerate() {
        let parsed = c.output.is_parsed();
        let four_unique = parsed && check_four_options(c.output)?;
        let agrees = if four_unique {
            ensemble_agrees(preds.require(c.id)?, c.target, mode)?
        } else {
            match preds.get(c.id) {
                Some(p) if parsed => ensemble_agrees(p, c.target, mode)?,
                _ => false,
            }
        };
        let keep = four_unique && agrees;
        if keep {
            kept.push(idx);
        }
        outcomes.push(FilterOutcome {
            question_id: c.id.to_string(),
            parsed,
            four_unique,
            ensemble_agrees_first: agrees,
            kept: keep,
        });
    }
    let n_parsed = outcomes.iter().filter(|o| o.parsed).count();
    let n_four_opt = outcomes.iter().filter(|o| o.four_unique).count();
    let n_agree = outcomes.iter().filter(|o| o.four_unique && o.ensemble_agrees_first).count();
    let summary = FilterSummary {
        n_input: cands.len(),
        n_parsed,
        n_four_opt,
        n_agree,
        n_kept: kept.len(),
        four_opt_rate: ratio(n_four_opt, cands.len()),
        four_opt_rate_parsed: ratio(n_four_opt, n_parsed),
        accuracy: ratio(n_agree, n_four_opt),
        mode,
    };
    Ok(FilterResult { outcomes, kept, summary })
}

/// Turns a kept generation into a dataset record whose answer is the first
/// option.
pub fn to_augmentation_example(
    g: &GeneratedOutput,
    example_id: impl Into<String>,
    context: &str,
    split: Split,
) -> Result<McqExample> {
    if g.options.len() != REQUIRED_OPTIONS {
        return Err(Error::InvalidRecord(format!(
            "`{}` has {} options, augmentation needs {REQUIRED_OPTIONS}",
            g.context_id,
            g.options.len()
        )));
    }
    let ex = McqExample {
        example_id: example_id.into(),
        context_id: g.context_id.clone(),
        context: context.to_string(),
        question: g.question.clone(),
        options: g.options.clone(),
        correct_index: 0,
        split,
        difficulty: None,
    };
    ex.validate()?;
    Ok(ex)
}
