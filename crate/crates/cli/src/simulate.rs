//! `simulate` subcommand: multi-reference scaling experiments.

use rayon::prelude::*;
use serde::Serialize;

use qgassess_core::refsim::{
    conditional_entropy, linearity_check, run_trial, Accumulator, Column, Framework, LinearityReport, SimPlan,
    SimPosterior, SimResult,
};
use qgassess_core::LogBase;

use crate::error::{CliError, Result};
use crate::render::{self, Format, Table};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: u64 = 100_000;

/// Trials generated per parallel batch before being folded in order.
const BATCH: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub enum PosteriorSpec {
    Zipf {
        m: usize,
        exponent: f64,
    },
    Uniform {
        m: usize,
    },
    Explicit(Vec<f64>),
    /// The same per-position categorical at each of `length` positions.
    Positionwise {
        probs: Vec<f64>,
        length: usize,
    },
}

impl PosteriorSpec {
    pub fn build(&self) -> Result<SimPosterior> {
        Ok(match self {
            PosteriorSpec::Zipf { m, exponent } => SimPosterior::zipf(*m, *exponent)?,
            PosteriorSpec::Uniform { m } => {
                if *m == 0 {
                    return Err(CliError::Usage("uniform posterior needs m >= 1".into()));
                }
                SimPosterior::explicit(vec![1.0 / *m as f64; *m])?
            }
            PosteriorSpec::Explicit(p) => SimPosterior::explicit(p.clone())?,
            PosteriorSpec::Positionwise { probs, length } => SimPosterior::positionwise_iid(probs.clone(), *length)?,
        })
    }

    pub fn describe(&self) -> String {
        match self {
            PosteriorSpec::Zipf { m, exponent } => format!("zipf(m={m}, s={exponent})"),
            PosteriorSpec::Uniform { m } => format!("uniform(m={m})"),
            PosteriorSpec::Explicit(p) => format!("explicit({} outcomes)", p.len()),
            PosteriorSpec::Positionwise { probs, length } => format!("positionwise(T={length}, V={})", probs.len()),
        }
    }
}

/// Runs every trial, spreading batches over the rayon pool. Trials are
/// folded in index order, so the result is bitwise identical to
/// [`SimPlan::run`] for any thread count.
pub fn run_parallel(plan: &SimPlan, p: &SimPosterior) -> Result<SimResult> {
    plan.check_posterior(p)?;
    let j_max = plan.j_max();
    let mut acc = Accumulator::new(&plan.j_values);
    let mut start = 0;
    while start < plan.trials {
        let end = (start + BATCH).min(plan.trials);
        let batch: Vec<Vec<f64>> =
            (start..end).into_par_iter().map(|t| run_trial(p, plan.framework, plan.seed, t, j_max)).collect();
        for trial in &batch {
            acc.push(trial);
        }
        start = end;
    }
    Ok(plan.finish(p, &acc)?)
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub posterior: PosteriorSpec,
    pub framework: Framework,
    pub j_values: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    #[serde(rename = "J")]
    pub j: u32,
    pub estimate: f64,
    pub stderr: f64,
    pub closed_form: Option<f64>,
    pub enumerated: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Linearity {
    pub column: String,
    pub rel_tol: f64,
    pub passes: bool,
    pub saturation_onset: Option<u32>,
    pub deviations: Vec<(u32, f64)>,
}

impl Linearity {
    fn new(column: &str, r: LinearityReport) -> Self {
        Linearity {
            column: column.into(),
            rel_tol: r.rel_tol,
            passes: r.passes,
            saturation_onset: r.saturation_onset,
            deviations: r.deviations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub posterior: String,
    pub framework: String,
    pub trials: u64,
    pub seed: u64,
    pub p_star: f64,
    pub entropy_nats: f64,
    pub entropy_bits: f64,
    pub rows: Vec<SimRow>,
    pub linearity: Vec<Linearity>,
}

impl SimulateReport {
    pub fn render(&self, format: Format) -> Result<String> {
        let mut t = Table::new(["J", "estimate", "stderr", "closed_form"]);
        for r in &self.rows {
            t.push(vec![r.j.to_string(), r.estimate.to_string(), r.stderr.to_string(), render::opt(r.closed_form)]);
        }
        match format {
            Format::Json => render::json(self),
            Format::Csv => Ok(t.csv()),
            Format::Md => Ok(t.markdown()),
        }
    }
}

pub fn run(config: &SimulateConfig) -> Result<SimulateReport> {
    let p = config.posterior.build()?;
    let plan = SimPlan::new(config.framework, &config.j_values, config.trials, config.seed)?;
    let result = run_parallel(&plan, &p)?;
    let mut linearity = Vec::new();
    if result.j_values.contains(&1) {
        linearity.push(Linearity::new("estimate", linearity_check(&result, config.rel_tol, Column::Estimate)?));
        linearity.push(Linearity::new("closed_form", linearity_check(&result, config.rel_tol, Column::ClosedForm)?));
    }
    let rows = (0..result.j_values.len())
        .map(|i| SimRow {
            j: result.j_values[i],
            estimate: result.estimates[i],
            stderr: result.std_errors[i],
            closed_form: result.closed_form[i],
            enumerated: result.enumerated[i],
        })
        .collect();
    Ok(SimulateReport {
        posterior: config.posterior.describe(),
        framework: config.framework.as_str().into(),
        trials: result.trials,
        seed: result.seed,
        p_star: result.p_star,
        entropy_nats: conditional_entropy(&p, LogBase::Nats),
        entropy_bits: conditional_entropy(&p, LogBase::Bits),
        rows,
        linearity,
    })
}

/// Parses `1..10`, `1,2,5` or a mix such as `1..3,8`.
pub fn parse_j_values(s: &str) -> Result<Vec<u32>> {
    let bad = || CliError::Usage(format!("invalid J list `{s}`"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

pub fn parse_probs(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("invalid probability `{x}`"))))
        .collect()
}
