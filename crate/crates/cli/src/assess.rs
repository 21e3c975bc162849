//! `assess` subcommand: the four-options rate, ensemble accuracy and the
//! G, A, C and D qualities for a question set, before and after filtering.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use qgassess_core::corpus::{GeneratedOutput, ParseStatus, Split};
use qgassess_core::filter::{filter_candidates, AgreementMode, Candidate, FilterOutcome};
use qgassess_core::metrics::{
    complexity_score, diversity, expected_entropy, grammar_rate, mean, naive_grammar_errors, DiversityScheme,
};
use qgassess_core::predictions::{PredictionSet, Purpose};
use qgassess_core::text::tokenize;
use qgassess_core::LogBase;

use crate::error::Result;
use crate::formats::{load_dataset, load_generations, load_grammar_report, load_predictions};
use crate::render::{self, fixed, percent, Format, Table};

/// Where the questions come from.
#[derive(Debug, Clone)]
pub enum QuestionSource {
    /// Generated sequences keyed by context id; the first option is the
    /// asserted answer.
    Generations { path: PathBuf, separator: String },
    /// Human-written dataset records keyed by example id; the labelled answer
    /// is the target.
    Dataset(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GrammarSource {
    /// No grammar figures; G is reported as null.
    #[default]
    None,
    /// Per-question counts from an external checker report.
    Report,
    /// Built-in surface heuristics.
    Naive,
}

impl GrammarSource {
    pub fn as_str(self) -> &'static str {
        match self {
            GrammarSource::None => "none",
            GrammarSource::Report => "report",
            GrammarSource::Naive => "naive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AssessConfig {
    pub source: QuestionSource,
    pub mcmrc_preds: PathBuf,
    pub qc_preds: Option<PathBuf>,
    pub grammar_report: Option<PathBuf>,
    pub naive_grammar: bool,
    pub base: LogBase,
    pub scheme: DiversityScheme,
    pub mode: AgreementMode,
}

impl AssessConfig {
    fn grammar_source(&self) -> GrammarSource {
        if self.grammar_report.is_some() {
            GrammarSource::Report
        } else if self.naive_grammar {
            GrammarSource::Naive
        } else {
            GrammarSource::None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportConfig {
    pub source: String,
    pub separator: Option<String>,
    pub entropy_base: String,
    pub diversity_scheme: String,
    pub agreement: String,
    pub grammar: String,
    pub mcmrc_ensemble_size: usize,
    pub qc_ensemble_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scalar {
    pub value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerabilityScore {
    pub value: f64,
    pub base: String,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityScore {
    pub value_bits: f64,
    pub scheme: String,
    pub n: usize,
    pub class_histogram: BTreeMap<String, usize>,
}

/// One row of the report. Counts and rates come from the filter; A and C are
/// averaged over four-option items, D and G over parsed questions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub row: String,
    pub n_input: usize,
    pub n_parsed: usize,
    pub n_four_opt: usize,
    pub n_agree: usize,
    pub n_kept: usize,
    pub four_opt_rate: f64,
    pub four_opt_rate_parsed: f64,
    pub accuracy: f64,
    #[serde(rename = "G")]
    pub grammar: Option<Scalar>,
    #[serde(rename = "A")]
    pub unanswerability: Option<AnswerabilityScore>,
    #[serde(rename = "C")]
    pub complexity: Option<Scalar>,
    #[serde(rename = "D")]
    pub diversity: Option<DiversityScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionEntry {
    pub question_id: String,
    pub parse_status: String,
    pub four_unique: bool,
    pub ensemble_agrees: bool,
    pub kept: bool,
    pub class: Option<String>,
    #[serde(rename = "G")]
    pub grammar: Option<u32>,
    #[serde(rename = "A")]
    pub unanswerability: Option<f64>,
    #[serde(rename = "C")]
    pub complexity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssessmentReport {
    pub config: ReportConfig,
    pub rows: Vec<ReportRow>,
    pub n_questions: usize,
    pub per_question: Vec<QuestionEntry>,
}

impl AssessmentReport {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => render::json(self),
            Format::Csv => {
                let mut t = Table::new([
                    "row",
                    "n_input",
                    "n_parsed",
                    "n_four_opt",
                    "n_kept",
                    "four_opt_rate",
                    "accuracy",
                    "A",
                    "C",
                    "D",
                    "G",
                ]);
                for r in &self.rows {
                    t.push(vec![
                        r.row.clone(),
                        r.n_input.to_string(),
                        r.n_parsed.to_string(),
                        r.n_four_opt.to_string(),
                        r.n_kept.to_string(),
                        r.four_opt_rate.to_string(),
                        r.accuracy.to_string(),
                        render::opt(r.unanswerability.as_ref().map(|a| a.value)),
                        render::opt(r.complexity.as_ref().map(|c| c.value)),
                        render::opt(r.diversity.as_ref().map(|d| d.value_bits)),
                        render::opt(r.grammar.as_ref().map(|g| g.value)),
                    ]);
                }
                Ok(t.csv())
            }
            Format::Md => {
                let mut t = Table::new(["", "4 opts", "Acc", "A", "C", "D", "G"]);
                for r in &self.rows {
                    t.push(vec![
                        r.row.clone(),
                        percent(r.four_opt_rate),
                        percent(r.accuracy),
                        fixed(r.unanswerability.as_ref().map(|a| a.value), 4),
                        fixed(r.complexity.as_ref().map(|c| c.value), 4),
                        fixed(r.diversity.as_ref().map(|d| d.value_bits), 4),
                        fixed(r.grammar.as_ref().map(|g| g.value), 4),
                    ]);
                }
                Ok(t.markdown())
            }
        }
    }
}

/// A question set ready for assessment.
pub struct Items {
    pub ids: Vec<String>,
    pub outputs: Vec<GeneratedOutput>,
    pub targets: Vec<usize>,
}

pub fn load_items(source: &QuestionSource) -> Result<Items> {
    match source {
        QuestionSource::Generations { path, separator } => {
            let outputs = load_generations(path, separator)?;
            Ok(Items {
                ids: outputs.iter().map(|g| g.context_id.clone()).collect(),
                targets: vec![0; outputs.len()],
                outputs,
            })
        }
        QuestionSource::Dataset(path) => {
            let examples = load_dataset(path, Split::Evl)?;
            let mut items = Items { ids: Vec::new(), outputs: Vec::new(), targets: Vec::new() };
            for ex in examples {
                items.outputs.push(GeneratedOutput {
                    context_id: ex.context_id,
                    raw: String::new(),
                    question: ex.question,
                    options: ex.options,
                    parse_status: ParseStatus::Ok,
                });
                items.ids.push(ex.example_id);
                items.targets.push(ex.correct_index);
            }
            Ok(items)
        }
    }
}

struct Inputs {
    mcmrc: PredictionSet,
    qc: Option<PredictionSet>,
    grammar: GrammarSource,
    report: BTreeMap<String, u32>,
}

pub fn run(config: &AssessConfig) -> Result<AssessmentReport> {
    let items = load_items(&config.source)?;
    let inputs = Inputs {
        mcmrc: load_predictions(&config.mcmrc_preds, Purpose::Mcmrc)?,
        qc: config.qc_preds.as_ref().map(|p| load_predictions(p, Purpose::Qc)).transpose()?,
        grammar: config.grammar_source(),
        report: config.grammar_report.as_ref().map(|p| load_grammar_report(p)).transpose()?.unwrap_or_default(),
    };
    assess_items(&items, &inputs, config)
}

fn assess_items(items: &Items, inputs: &Inputs, config: &AssessConfig) -> Result<AssessmentReport> {
    let cands: Vec<Candidate<'_>> = items
        .ids
        .iter()
        .zip(&items.outputs)
        .zip(&items.targets)
        .map(|((id, output), &target)| Candidate { id, output, target })
        .collect();
    let all = filter_candidates(&cands, &inputs.mcmrc, config.mode)?;

    let mut per_question = Vec::with_capacity(cands.len());
    for (c, o) in cands.iter().zip(&all.outcomes) {
        per_question.push(question_entry(c, o, inputs, config)?);
    }

    let kept_cands: Vec<Candidate<'_>> = all.kept.iter().map(|&i| cands[i]).collect();
    let filt = filter_candidates(&kept_cands, &inputs.mcmrc, config.mode)?;

    let all_entries: Vec<&QuestionEntry> = per_question.iter().collect();
    let kept_entries: Vec<&QuestionEntry> = all.kept.iter().map(|&i| &per_question[i]).collect();
    let kept_outputs: Vec<&GeneratedOutput> = all.kept.iter().map(|&i| &items.outputs[i]).collect();
    let all_outputs: Vec<&GeneratedOutput> = items.outputs.iter().collect();

    let rows = vec![
        build_row("all", &all.summary, &all_entries, &all_outputs, inputs, config)?,
        build_row("filtered", &filt.summary, &kept_entries, &kept_outputs, inputs, config)?,
    ];
    Ok(AssessmentReport {
        config: ReportConfig {
            source: match &config.source {
                QuestionSource::Generations { .. } => "generations".into(),
                QuestionSource::Dataset(_) => "dataset".into(),
            },
            separator: match &config.source {
                QuestionSource::Generations { separator, .. } => Some(separator.clone()),
                QuestionSource::Dataset(_) => None,
            },
            entropy_base: config.base.as_str().into(),
            diversity_scheme: config.scheme.as_str().into(),
            agreement: config.mode.as_str().into(),
            grammar: inputs.grammar.as_str().into(),
            mcmrc_ensemble_size: inputs.mcmrc.ensemble_size(),
            qc_ensemble_size: inputs.qc.as_ref().map(PredictionSet::ensemble_size),
        },
        rows,
        n_questions: items.ids.len(),
        per_question,
    })
}

fn question_entry(
    c: &Candidate<'_>,
    o: &FilterOutcome,
    inputs: &Inputs,
    config: &AssessConfig,
) -> Result<QuestionEntry> {
    let g = c.output;
    let has_tokens = g.is_parsed() && !tokenize(&g.question).is_empty();
    let class = if has_tokens { Some(config.scheme.classify(&g.question)?.to_string()) } else { None };
    let grammar = match inputs.grammar {
        _ if !g.is_parsed() => None,
        GrammarSource::None => None,
        GrammarSource::Report => Some(inputs.report.get(c.id).copied().unwrap_or(0)),
        GrammarSource::Naive => Some(naive_grammar_errors(&g.question)),
    };
    let (unanswerability, complexity) = if o.four_unique {
        let a = expected_entropy(inputs.mcmrc.require(c.id)?, config.base);
        let cx = match &inputs.qc {
            Some(qc) => Some(complexity_score(qc.require(c.id)?)?),
            None => None,
        };
        (Some(a), cx)
    } else {
        (None, None)
    };
    Ok(QuestionEntry {
        question_id: c.id.to_string(),
        parse_status: g.parse_status.as_str().into(),
        four_unique: o.four_unique,
        ensemble_agrees: o.ensemble_agrees_first,
        kept: o.kept,
        class,
        grammar,
        unanswerability,
        complexity,
    })
}

fn build_row(
    name: &str,
    s: &qgassess_core::filter::FilterSummary,
    entries: &[&QuestionEntry],
    outputs: &[&GeneratedOutput],
    inputs: &Inputs,
    config: &AssessConfig,
) -> Result<ReportRow> {
    let a: Vec<f64> = entries.iter().filter_map(|e| e.unanswerability).collect();
    let c: Vec<f64> = entries.iter().filter_map(|e| e.complexity).collect();
    let questions: Vec<&str> =
        entries.iter().zip(outputs).filter(|(e, _)| e.class.is_some()).map(|(_, g)| g.question.as_str()).collect();
    let g_counts: Vec<u32> = entries.iter().filter_map(|e| e.grammar).collect();

    let grammar = if inputs.grammar == GrammarSource::None || g_counts.is_empty() {
        None
    } else {
        Some(Scalar { value: grammar_rate(&g_counts, g_counts.len())?, n: g_counts.len() })
    };
    let unanswerability =
        (!a.is_empty()).then(|| AnswerabilityScore { value: mean(&a), base: config.base.as_str().into(), n: a.len() });
    let complexity = (inputs.qc.is_some() && !c.is_empty()).then(|| Scalar { value: mean(&c), n: c.len() });
    let diversity = if questions.is_empty() {
        None
    } else {
        let d = diversity(&questions, config.scheme)?;
        Some(DiversityScore {
            value_bits: d.bits,
            scheme: config.scheme.as_str().into(),
            n: questions.len(),
            class_histogram: d.histogram.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        })
    };
    Ok(ReportRow {
        row: name.into(),
        n_input: s.n_input,
        n_parsed: s.n_parsed,
        n_four_opt: s.n_four_opt,
        n_agree: s.n_agree,
        n_kept: s.n_kept,
        four_opt_rate: s.four_opt_rate,
        four_opt_rate_parsed: s.four_opt_rate_parsed,
        accuracy: s.accuracy,
        grammar,
        unanswerability,
        complexity,
        diversity,
    })
}
