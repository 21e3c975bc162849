//! `filter` subcommand: validity filtering and augmentation export.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use qgassess_core::corpus::{GeneratedOutput, McqExample, Split};
use qgassess_core::filter::{filter_set, to_augmentation_example, AgreementMode, FilterSummary};
use qgassess_core::predictions::Purpose;

use crate::error::{CliError, Result};
use crate::formats::{load_dataset, load_generations, load_predictions, write_dataset, write_generations};
use crate::render::{self, Format, Table};

#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub generations: PathBuf,
    pub separator: String,
    pub mcmrc_preds: PathBuf,
    pub mode: AgreementMode,
    /// Where to write the kept generations, in the generation file schema.
    pub kept_out: Option<PathBuf>,
    /// Dataset supplying contexts for the augmentation export.
    pub context_dataset: Option<PathBuf>,
    /// Where to write kept items as dataset records with answer `A`.
    pub augment_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterReport {
    pub n_input: usize,
    pub n_parsed: usize,
    pub four_opt_rate: f64,
    pub four_opt_rate_parsed: f64,
    pub accuracy: f64,
    pub n_kept: usize,
    pub mode: String,
}

impl From<&FilterSummary> for FilterReport {
    fn from(s: &FilterSummary) -> Self {
        FilterReport {
            n_input: s.n_input,
            n_parsed: s.n_parsed,
            four_opt_rate: s.four_opt_rate,
            four_opt_rate_parsed: s.four_opt_rate_parsed,
            accuracy: s.accuracy,
            n_kept: s.n_kept,
            mode: s.mode.as_str().to_string(),
        }
    }
}

impl FilterReport {
    pub fn render(&self, format: Format) -> Result<String> {
        let mut t =
            Table::new(["n_input", "n_parsed", "four_opt_rate", "four_opt_rate_parsed", "accuracy", "n_kept", "mode"]);
        t.push(vec![
            self.n_input.to_string(),
            self.n_parsed.to_string(),
            self.four_opt_rate.to_string(),
            self.four_opt_rate_parsed.to_string(),
            self.accuracy.to_string(),
            self.n_kept.to_string(),
            self.mode.clone(),
        ]);
        match format {
            Format::Json => render::json(self),
            Format::Csv => Ok(t.csv()),
            Format::Md => Ok(t.markdown()),
        }
    }
}

/// Kept generations as dataset records. `contexts` maps context ids to
/// passage text.
pub fn augmentation_examples(
    kept: &[&GeneratedOutput],
    contexts: &HashMap<String, String>,
    split: Split,
) -> Result<Vec<McqExample>> {
    kept.iter()
        .map(|g| {
            let context = contexts
                .get(&g.context_id)
                .ok_or_else(|| CliError::Usage(format!("no context for `{}` in the context dataset", g.context_id)))?;
            Ok(to_augmentation_example(g, format!("aug-{}", g.context_id), context, split)?)
        })
        .collect()
}

pub fn export_augmentation(path: &Path, kept: &[McqExample]) -> Result<()> {
    write_dataset(path, kept)
}

pub fn run(config: &FilterConfig) -> Result<FilterReport> {
    let gens = load_generations(&config.generations, &config.separator)?;
    let preds = load_predictions(&config.mcmrc_preds, Purpose::Mcmrc)?;
    let result = filter_set(&gens, &preds, config.mode)?;
    let kept: Vec<&GeneratedOutput> = result.kept.iter().map(|&i| &gens[i]).collect();

    if let Some(out) = &config.kept_out {
        let owned: Vec<GeneratedOutput> = kept.iter().map(|g| (*g).clone()).collect();
        write_generations(out, &owned)?;
    }
    if let Some(out) = &config.augment_out {
        let dataset = config
            .context_dataset
            .as_ref()
            .ok_or_else(|| CliError::Usage("--augment-out needs --dataset for contexts".into()))?;
        let contexts: HashMap<String, String> =
            load_dataset(dataset, Split::Trn)?.into_iter().map(|e| (e.context_id, e.context)).collect();
        export_augmentation(out, &augmentation_examples(&kept, &contexts, Split::Trn)?)?;
    }
    Ok(FilterReport::from(&result.summary))
}
