//! JSON-lines readers and writers for datasets, generations, prediction
//! files, lexicons and grammar-checker reports.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use qgassess_core::corpus::{
    answer_index, parse_generated, Difficulty, GeneratedOutput, McqExample, Split, ANSWER_LETTERS,
};
use qgassess_core::predictions::{EnsemblePrediction, PredictionSet, Purpose};
use qgassess_core::vocab::{Tier, VocabLexicon};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub example_id: String,
    pub context_id: String,
    pub context: String,
    pub question: String,
    pub options: Vec<String>,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationRecord {
    pub context_id: String,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionHeader {
    pub purpose: String,
    pub ensemble_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub question_id: String,
    pub labels: Vec<String>,
    pub members: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconRecord {
    pub word: String,
    pub tier: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrammarRecord {
    pub question_id: String,
    pub errors: u32,
}

/// Non-blank lines of a file with their 1-based line numbers.
fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| (i + 1, l.to_string())).collect())
}

fn parse_line<T: for<'de> Deserialize<'de>>(path: &Path, line: usize, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::MalformedRecord {
        path: path.to_path_buf(),
        line,
        reason: e.to_string(),
    })
}

fn at(path: &Path, line: usize) -> impl FnOnce(qgassess_core::Error) -> CliError + '_ {
    move |source| CliError::Record { path: path.to_path_buf(), line, source }
}

fn malformed(path: &Path, line: usize, reason: String) -> CliError {
    CliError::MalformedRecord { path: path.to_path_buf(), line, reason }
}

pub fn example_from_record(rec: DatasetRecord, split: Split) -> qgassess_core::Result<McqExample> {
    let correct_index = answer_index(&rec.answer)?;
    let difficulty = rec.difficulty.as_deref().map(str::parse::<Difficulty>).transpose()?;
    let ex = McqExample {
        example_id: rec.example_id,
        context_id: rec.context_id,
        context: rec.context,
        question: rec.question,
        options: rec.options,
        correct_index,
        split,
        difficulty,
    };
    ex.validate()?;
    Ok(ex)
}

pub fn record_from_example(ex: &McqExample) -> Result<DatasetRecord> {
    let answer = ANSWER_LETTERS.get(ex.correct_index).ok_or_else(|| {
        CliError::Usage(format!("`{}`: answer index {} has no letter", ex.example_id, ex.correct_index))
    })?;
    Ok(DatasetRecord {
        example_id: ex.example_id.clone(),
        context_id: ex.context_id.clone(),
        context: ex.context.clone(),
        question: ex.question.clone(),
        options: ex.options.clone(),
        answer: answer.to_string(),
        difficulty: ex.difficulty.map(|d| d.as_str().to_string()),
    })
}

/// Reads a dataset file. Every record is validated; the first problem aborts
/// the load with its line number.
pub fn load_dataset(path: &Path, split: Split) -> Result<Vec<McqExample>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, text) in read_lines(path)? {
        let rec: DatasetRecord = parse_line(path, line, &text)?;
        let ex = example_from_record(rec, split).map_err(at(path, line))?;
        if !seen.insert(ex.example_id.clone()) {
            return Err(at(path, line)(qgassess_core::Error::DuplicateExampleId(ex.example_id)));
        }
        out.push(ex);
    }
    Ok(out)
}

/// Reads generated sequences and parses each with `separator`. Context ids
/// must be unique since they key the prediction files.
pub fn load_generations(path: &Path, separator: &str) -> Result<Vec<GeneratedOutput>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, text) in read_lines(path)? {
        let rec: GenerationRecord = parse_line(path, line, &text)?;
        if !seen.insert(rec.context_id.clone()) {
            return Err(malformed(path, line, format!("duplicate context_id `{}`", rec.context_id)));
        }
        out.push(parse_generated(&rec.context_id, &rec.raw, separator).map_err(at(path, line))?);
    }
    Ok(out)
}

/// Reads a prediction file: a header line followed by one record per
/// question. Nothing is returned unless every record validates.
pub fn load_predictions(path: &Path, purpose: Purpose) -> Result<PredictionSet> {
    let lines = read_lines(path)?;
    let Some((hline, htext)) = lines.first() else {
        return Err(malformed(path, 1, "missing header line".into()));
    };
    let header: PredictionHeader = parse_line(path, *hline, htext)?;
    let declared: Purpose = header.purpose.parse().map_err(at(path, *hline))?;
    if declared != purpose {
        return Err(malformed(
            path,
            *hline,
            format!("file purpose `{}` but `{}` was expected", declared.as_str(), purpose.as_str()),
        ));
    }
    let mut set = PredictionSet::new(purpose, header.ensemble_size).map_err(at(path, *hline))?;
    for (line, text) in &lines[1..] {
        let rec: PredictionRecord = parse_line(path, *line, text)?;
        let pred = EnsemblePrediction::new(rec.question_id, rec.labels, rec.members).map_err(at(path, *line))?;
        set.insert(pred).map_err(at(path, *line))?;
    }
    Ok(set)
}

pub fn write_predictions(path: &Path, set: &PredictionSet) -> Result<()> {
    let mut lines = vec![to_json_line(&PredictionHeader {
        purpose: set.purpose().as_str().into(),
        ensemble_size: set.ensemble_size(),
    })?];
    for p in set.iter() {
        lines.push(to_json_line(&PredictionRecord {
            question_id: p.question_id().into(),
            labels: p.labels().to_vec(),
            members: p.members().to_vec(),
        })?);
    }
    write_lines(path, &lines)
}

pub fn load_lexicon(path: &Path) -> Result<VocabLexicon> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (line, text) in read_lines(path)? {
        let rec: LexiconRecord = parse_line(path, line, &text)?;
        let tier: Tier = rec.tier.parse().map_err(at(path, line))?;
        if !seen.insert(rec.word.trim().to_lowercase()) {
            return Err(malformed(path, line, format!("duplicate word `{}`", rec.word)));
        }
        entries.push((rec.word, tier));
    }
    let lexicon = VocabLexicon::new(entries)?;
    if lexicon.is_empty() {
        return Err(malformed(path, 1, "lexicon is empty".into()));
    }
    Ok(lexicon)
}

/// Per-question error counts from an external grammar checker.
pub fn load_grammar_report(path: &Path) -> Result<BTreeMap<String, u32>> {
    let mut out = BTreeMap::new();
    for (line, text) in read_lines(path)? {
        let rec: GrammarRecord = parse_line(path, line, &text)?;
        if out.insert(rec.question_id.clone(), rec.errors).is_some() {
            return Err(malformed(path, line, format!("duplicate question_id `{}`", rec.question_id)));
        }
    }
    Ok(out)
}

pub fn write_dataset(path: &Path, examples: &[McqExample]) -> Result<()> {
    let lines =
        examples.iter().map(|ex| record_from_example(ex).and_then(|r| to_json_line(&r))).collect::<Result<Vec<_>>>()?;
    write_lines(path, &lines)
}

pub fn write_generations(path: &Path, gens: &[GeneratedOutput]) -> Result<()> {
    let lines = gens
        .iter()
        .map(|g| to_json_line(&GenerationRecord { context_id: g.context_id.clone(), raw: g.raw.clone() }))
        .collect::<Result<Vec<_>>>()?;
    write_lines(path, &lines)
}

pub fn to_json_line<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| CliError::Usage(format!("serialization failed: {e}")))
}

pub fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for l in lines {
        writeln!(w, "{l}").map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
