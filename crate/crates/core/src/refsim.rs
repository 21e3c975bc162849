//! Multi-reference scaling simulator.
//!
//! A model predicts the modal output `y*` of a posterior over output
//! sequences, and `J` references are drawn independently from the same
//! posterior. The score of the prediction is its best score against any
//! reference. Two scores are supported: exact match, whose expectation is
//! `1 - (1 - p*)^J`, and position-wise overlap on fixed-length sequences.
//! Both grow roughly linearly in `J` while `J p*` is small and saturate
//! afterwards; [`linearity_check`] measures where that happens.
//!
//! Trials are reproducible: trial `i` under seed `s` always draws from the
//! ChaCha8 stream `i` keyed by `s`, so trials can be evaluated in any order
//! or in parallel and reduced in trial order with [`Accumulator`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::entropy::{entropy_unchecked, LogBase};
use crate::error::{Error, Result};

/// Mass tolerance for simulator posteriors.
pub const POSTERIOR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosteriorKind {
    /// One categorical over `M` whole outcomes.
    Explicit,
    /// `T` independent categoricals over an alphabet of size `V`.
    Positionwise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimPosterior {
    kind: PosteriorKind,
    positions: Vec<Vec<f64>>,
    cdfs: Vec<Vec<f64>>,
    mode: Vec<usize>,
}

fn check_row(row: &[f64], what: &str) -> Result<()> {
    if row.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what} is empty")));
    }
    if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidDistribution(format!("{what} has entry {x} outside [0, 1]")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > POSTERIOR_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("{what} sums to {sum}")));
    }
    Ok(())
}

fn cumulative(row: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = row
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    // the last outcome with mass closes the interval at exactly 1
    if let Some(last) = row.iter().rposition(|&p| p > 0.0) {
        cdf[last..].iter_mut().for_each(|c| *c = 1.0);
    }
    cdf
}

fn lowest_argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate() {
        if x > row[best] {
            best = i;
        }
    }
    best
}

impl SimPosterior {
    pub fn explicit(probs: Vec<f64>) -> Result<Self> {
        check_row(&probs, "explicit posterior")?;
        Ok(Self::build(PosteriorKind::Explicit, vec![probs]))
    }

    pub fn positionwise(positions: Vec<Vec<f64>>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidDistribution("positionwise posterior needs T >= 1".into()));
        }
        let v = positions[0].len();
        for (t, row) in positions.iter().enumerate() {
            check_row(row, &format!("position {t}"))?;
            if row.len() != v {
                return Err(Error::InvalidDistribution(format!(
                    "position {t} has alphabet size {}, expected {v}",
                    row.len()
                )));
            }
        }
        Ok(Self::build(PosteriorKind::Positionwise, positions))
    }

    /// The same categorical at each of `length` positions.
    pub fn positionwise_iid(per_position: Vec<f64>, length: usize) -> Result<Self> {
        Self::positionwise(vec![per_position; length])
    }

    /// Zipf law over `m` outcomes: `p_i` proportional to `(i + 1)^-exponent`.
    pub fn zipf(m: usize, exponent: f64) -> Result<Self> {
        if m == 0 || !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::DomainError(format!("invalid Zipf parameters m={m}, s={exponent}")));
        }
        let weights: Vec<f64> = (1..=m).map(|i| libm::pow(i as f64, -exponent)).collect();
        let z: f64 = weights.iter().sum();
        Self::explicit(weights.into_iter().map(|w| w / z).collect())
    }

    fn build(kind: PosteriorKind, positions: Vec<Vec<f64>>) -> Self {
        let cdfs = positions.iter().map(|r| cumulative(r)).collect();
        let mode = positions.iter().map(|r| lowest_argmax(r)).collect();
        SimPosterior { kind, positions, cdfs, mode }
    }

    pub fn kind(&self) -> PosteriorKind {
        self.kind
    }

    /// Number of sampled positions: 1 for explicit posteriors, `T` otherwise.
    pub fn length(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    /// Modal outcome, one index per position, ties to the lowest index.
    pub fn mode(&self) -> &[usize] {
        &self.mode
    }

    /// Probability of the modal outcome.
    pub fn mode_probability(&self) -> f64 {
        self.positions.iter().zip(&self.mode).map(|(row, &m)| row[m]).product()
    }

    /// Number of distinct outcomes, `M` or `V^T`.
    pub fn outcome_count(&self) -> f64 {
        self.positions.iter().map(|r| r.len() as f64).product()
    }

    /// Draws one outcome into `out`, one inverse-CDF uniform per position.
    pub fn sample_into<R: RngCore>(&self, rng: &mut R, out: &mut [usize]) {
        for (slot, cdf) in out.iter_mut().zip(&self.cdfs) {
            let u = unit_f64(rng);
            *slot = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        }
    }

    fn position_match_probs(&self) -> Vec<f64> {
        self.positions.iter().zip(&self.mode).map(|(row, &m)| row[m]).collect()
    }
}

/// Uniform in `[0, 1)` with 53 random bits.
fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Entropy of the joint posterior. Positions are independent, so this is the
/// sum of the per-position entropies.
pub fn conditional_entropy(p: &SimPosterior, base: LogBase) -> f64 {
    p.positions.iter().map(|row| entropy_unchecked(row, base)).sum()
}

/// `1 - (1 - p*)^J`, the probability that at least one of `J` draws hits an
/// outcome of mass `p*`.
pub fn exact_match_closed_form(p_star: f64, j: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_star) {
        return Err(Error::DomainError(format!("p* = {p_star} outside [0, 1]")));
    }
    if j == 0 {
        return Err(Error::DomainError("J must be at least 1".into()));
    }
    Ok(-libm::expm1(f64::from(j) * libm::log1p(-p_star)))
}

/// Fraction of aligned positions that agree.
pub fn overlap_score<T: PartialEq>(prediction: &[T], reference: &[T]) -> Result<f64> {
    if prediction.len() != reference.len() {
        return Err(Error::LengthMismatch { left: prediction.len(), right: reference.len() });
    }
    if prediction.is_empty() {
        return Err(Error::DomainError("overlap of empty sequences".into()));
    }
    let hits = prediction.iter().zip(reference).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / prediction.len() as f64)
}

/// Expected best overlap of `y*` against `J` draws from a positionwise
/// posterior.
///
/// The number of positions where a draw matches `y*` is Poisson-binomial;
/// its distribution comes from a DP over positions, and the expectation of
/// the maximum of `J` independent copies from the tail sum
/// `E[max] = (1/T) sum_k (1 - P(K < k)^J)`.
pub fn overlap_expectation(p: &SimPosterior, j: u32) -> Result<f64> {
    if j == 0 {
        return Err(Error::DomainError("J must be at least 1".into()));
    }
    let t = p.length();
    if t == 1 {
        return exact_match_closed_form(p.mode_probability(), j);
    }
    let mut dist = vec![0.0; t + 1];
    dist[0] = 1.0;
    for (n, q) in p.position_match_probs().into_iter().enumerate() {
        for k in (0..=n + 1).rev() {
            let stay = dist[k] * (1.0 - q);
            let up = if k > 0 { dist[k - 1] * q } else { 0.0 };
            dist[k] = stay + up;
        }
    }
    let mut below = 0.0;
    let mut total = 0.0;
    for k in 1..=t {
        below += dist[k - 1];
        total += 1.0 - libm::pow(below.min(1.0), f64::from(j));
    }
    Ok(total / t as f64)
}

/// Upper bound on `outcomes^J` for [`enumerate_expectation`].
pub const ENUMERATION_LIMIT: f64 = 65_536.0;

/// Expected multi-draw score by literally enumerating every `J`-tuple of
/// outcomes. Only for tiny instances; `None` when the tuple count exceeds
/// [`ENUMERATION_LIMIT`].
pub fn enumerate_expectation(p: &SimPosterior, framework: Framework, j: u32) -> Option<f64> {
    let outcomes = p.outcome_count();
    if j == 0 || libm::pow(outcomes, f64::from(j)) > ENUMERATION_LIMIT {
        return None;
    }
    // all outcomes with their probabilities and scores against y*
    let t = p.length();
    let mut scored: Vec<(f64, f64)> = Vec::new();
    let mut idx = vec![0usize; t];
    loop {
        let prob: f64 = idx.iter().zip(&p.positions).map(|(&i, row)| row[i]).product();
        scored.push((prob, framework.score(&idx, p.mode())));
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == t {
                break;
            }
            idx[pos] += 1;
            if idx[pos] < p.positions[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == t {
            break;
        }
    }
    let m = scored.len();
    let mut tuple = vec![0usize; j as usize];
    let mut total = 0.0;
    loop {
        let mut prob = 1.0;
        let mut best = 0.0f64;
        for &o in &tuple {
            prob *= scored[o].0;
            best = best.max(scored[o].1);
        }
        total += prob * best;
        let mut pos = 0;
        while pos < tuple.len() {
            tuple[pos] += 1;
            if tuple[pos] < m {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
        if pos == tuple.len() {
            break;
        }
    }
    Some(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Framework {
    ExactMatch,
    Overlap,
}

impl Framework {
    pub fn as_str(self) -> &'static str {
        match self {
            Framework::ExactMatch => "exact_match",
            Framework::Overlap => "overlap",
        }
    }

    /// Score of one drawn reference against the modal prediction.
    pub fn score(self, reference: &[usize], mode: &[usize]) -> f64 {
        match self {
            Framework::ExactMatch => {
                if reference == mode {
                    1.0
                } else {
                    0.0
                }
            }
            Framework::Overlap => {
                let hits = reference.iter().zip(mode).filter(|(a, b)| a == b).count();
                hits as f64 / mode.len() as f64
            }
        }
    }

    /// Analytic expectation for `J` draws, when one is available.
    pub fn closed_form(self, p: &SimPosterior, j: u32) -> Result<Option<f64>> {
        match self {
            Framework::ExactMatch => exact_match_closed_form(p.mode_probability(), j).map(Some),
            Framework::Overlap => overlap_expectation(p, j).map(Some),
        }
    }
}

impl FromStr for Framework {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_match" | "exact" => Ok(Framework::ExactMatch),
            "overlap" => Ok(Framework::Overlap),
            other => Err(Error::InvalidRecord(format!("unknown framework `{other}`"))),
        }
    }
}

/// RNG for one trial: ChaCha8 keyed by `seed`, stream `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Scores of one trial: entry `j - 1` is the best score over the first `j`
/// references, for `j = 1..=j_max`.
pub fn run_trial(p: &SimPosterior, framework: Framework, seed: u64, trial: u64, j_max: u32) -> Vec<f64> {
    let mut rng = trial_rng(seed, trial);
    let mut draw = vec![0usize; p.length()];
    let mut best = 0.0f64;
    (0..j_max)
        .map(|_| {
            p.sample_into(&mut rng, &mut draw);
            best = best.max(framework.score(&draw, p.mode()));
            best
        })
        .collect()
}

/// Per-J running sums. Feed trials in trial order for reproducible digits.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    j_values: Vec<u32>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    trials: u64,
}

impl Accumulator {
    pub fn new(j_values: &[u32]) -> Self {
        Accumulator {
            j_values: j_values.to_vec(),
            sum: vec![0.0; j_values.len()],
            sum_sq: vec![0.0; j_values.len()],
            trials: 0,
        }
    }

    /// Adds one trial's output of [`run_trial`].
    pub fn push(&mut self, prefix_best: &[f64]) {
        for (i, &j) in self.j_values.iter().enumerate() {
            let x = prefix_best[j as usize - 1];
            self.sum[i] += x;
            self.sum_sq[i] += x * x;
        }
        self.trials += 1;
    }

    /// Means and standard errors of the mean.
    pub fn finish(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.trials as f64;
        let mut means = Vec::with_capacity(self.sum.len());
        let mut errs = Vec::with_capacity(self.sum.len());
        for (&s, &ss) in self.sum.iter().zip(&self.sum_sq) {
            let mean = s / n;
            let se = if self.trials > 1 {
                let var = ((ss - n * mean * mean) / (n - 1.0)).max(0.0);
                libm::sqrt(var / n)
            } else {
                0.0
            };
            means.push(mean);
            errs.push(se);
        }
        (means, errs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub framework: Framework,
    pub j_values: Vec<u32>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Analytic expectation per J.
    pub closed_form: Vec<Option<f64>>,
    /// Brute-force expectation over all J-tuples, for tiny instances.
    pub enumerated: Vec<Option<f64>>,
    pub p_star: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Validated simulation request.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPlan {
    pub framework: Framework,
    pub j_values: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
}

impl SimPlan {
    pub fn new(framework: Framework, j_values: &[u32], trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::DomainError("trials must be at least 1".into()));
        }
        if j_values.is_empty() || j_values.contains(&0) {
            return Err(Error::DomainError("J values must be non-empty and >= 1".into()));
        }
        Ok(SimPlan { framework, j_values: j_values.to_vec(), trials, seed })
    }

    pub fn j_max(&self) -> u32 {
        self.j_values.iter().copied().max().unwrap_or(1)
    }

    pub fn check_posterior(&self, p: &SimPosterior) -> Result<()> {
        if self.framework == Framework::Overlap && p.kind() != PosteriorKind::Positionwise {
            return Err(Error::PosteriorKindMismatch("overlap needs a positionwise posterior".into()));
        }
        Ok(())
    }

    /// Builds the result from accumulated trials, filling the analytic and
    /// enumerated columns.
    pub fn finish(&self, p: &SimPosterior, acc: &Accumulator) -> Result<SimResult> {
        let (estimates, std_errors) = acc.finish();
        let closed_form =
            self.j_values.iter().map(|&j| self.framework.closed_form(p, j)).collect::<Result<Vec<_>>>()?;
        let enumerated = self.j_values.iter().map(|&j| enumerate_expectation(p, self.framework, j)).collect();
        Ok(SimResult {
            framework: self.framework,
            j_values: self.j_values.clone(),
            estimates,
            std_errors,
            closed_form,
            enumerated,
            p_star: p.mode_probability(),
            trials: acc.trials,
            seed: self.seed,
        })
    }

    /// Runs every trial serially.
    pub fn run(&self, p: &SimPosterior) -> Result<SimResult> {
        self.check_posterior(p)?;
        let mut acc = Accumulator::new(&self.j_values);
        let j_max = self.j_max();
        for trial in 0..self.trials {
            acc.push(&run_trial(p, self.framework, self.seed, trial, j_max));
        }
        self.finish(p, &acc)
    }
}

pub fn simulate_exact_match(p: &SimPosterior, j_values: &[u32], trials: u64, seed: u64) -> Result<SimResult> {
    SimPlan::new(Framework::ExactMatch, j_values, trials, seed)?.run(p)
}

pub fn simulate_overlap(p: &SimPosterior, j_values: &[u32], trials: u64, seed: u64) -> Result<SimResult> {
    SimPlan::new(Framework::Overlap, j_values, trials, seed)?.run(p)
}

/// Which column of a [`SimResult`] to test for linear growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Column {
    #[default]
    Estimate,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearityReport {
    /// All J with `J p* <= 0.01` stay within `rel_tol` of `J` times the
    /// J = 1 value.
    pub passes: bool,
    pub rel_tol: f64,
    /// `(J, |v(J) - J v(1)| / (J v(1)))` for every J in the result.
    pub deviations: Vec<(u32, f64)>,
    /// Smallest J whose deviation exceeds `rel_tol`.
    pub saturation_onset: Option<u32>,
}

/// Regime where the linear approximation is claimed to hold.
pub const LINEAR_REGIME: f64 = 0.01;

pub fn linearity_check(result: &SimResult, rel_tol: f64, column: Column) -> Result<LinearityReport> {
    let values: Vec<f64> = match column {
        Column::Estimate => result.estimates.clone(),
        Column::ClosedForm => result
            .closed_form
            .iter()
            .map(|v| v.ok_or_else(|| Error::DomainError("closed form column is empty".into())))
            .collect::<Result<_>>()?,
    };
    let base_idx = result
        .j_values
        .iter()
        .position(|&j| j == 1)
        .ok_or_else(|| Error::DomainError("linearity check needs J = 1".into()))?;
    let base = values[base_idx];
    let mut deviations = Vec::with_capacity(values.len());
    let mut passes = true;
    let mut onset = None;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| result.j_values[i]);
    for i in order {
        let j = result.j_values[i];
        let linear = f64::from(j) * base;
        let dev = if linear == 0.0 {
            if values[i] == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (values[i] - linear).abs() / linear
        };
        if f64::from(j) * result.p_star <= LINEAR_REGIME && dev > rel_tol {
            passes = false;
        }
        if onset.is_none() && dev > rel_tol {
            onset = Some(j);
        }
        deviations.push((j, dev));
    }
    Ok(LinearityReport { passes, rel_tol, deviations, saturation_onset: onset })
}
