//! Progressive top-k selection among observed itemsets.
//!
//! Each round draws a batch of `batch_size` transactions, folds it into the
//! running estimates and computes the midpoint `m` between the k-th and
//! (k+1)-th largest estimates. Sampling stops once
//! `sum_A exp(-2n (f(A) - m)^2) < δ`, which bounds the probability that any
//! itemset sits on the wrong side of `m`. A cap
//! `N = min(|D|, ceil((ln 2|Ob| + ln 1/δ) / 2ε²))` ends runs whose boundary
//! frequencies (nearly) tie; the cap is checked after the batch is merged, so
//! the final sample may exceed `N` by at most one batch.

use std::fmt;
use std::io::Write;
use std::time::{Duration, Instant};

use crate::bounds::{required_sample_size, FunctionCount};
use crate::dataset::{Sample, Sampler, TransactionDataset};
use crate::error::{Error, Result};
use crate::support::{merge_partial_counts, FrequencyEstimates, Itemset, ObservedSet, PartialCounts};

pub const DEFAULT_BATCH_SIZE: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopKConfig {
    pub k: usize,
    pub batch_size: usize,
    pub epsilon: f64,
    pub log_inv_delta: f64,
    pub seed: u64,
    /// Batches are independent uniform draws when true (the default).
    /// Otherwise they walk a random permutation of the dataset and the run
    /// ends when it is used up.
    pub replacement: bool,
}

impl TopKConfig {
    pub fn new(k: usize, epsilon: f64, delta: f64, seed: u64) -> Result<Self> {
        let config = TopKConfig {
            k,
            batch_size: DEFAULT_BATCH_SIZE,
            epsilon,
            log_inv_delta: crate::bounds::log_inv_delta(delta)?,
            seed,
            replacement: true,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.log_inv_delta >= 0.0) || self.log_inv_delta.is_infinite() {
            return Err(Error::InvalidArgument(format!(
                "ln(1/delta) must be finite and non-negative, got {}",
                self.log_inv_delta
            )));
        }
        Ok(())
    }
}

/// Running state of one progressive run.
#[derive(Clone, Debug)]
pub struct TopKState {
    counts: PartialCounts,
    pub midpoint: Option<f64>,
    pub stop_metric: Option<f64>,
    pub cap: u64,
}

impl TopKState {
    pub fn new(observed: &ObservedSet, cap: u64) -> Self {
        TopKState {
            counts: PartialCounts::empty(observed),
            midpoint: None,
            stop_metric: None,
            cap,
        }
    }

    /// Transactions folded in so far.
    pub fn n(&self) -> usize {
        self.counts.segment_len()
    }

    /// `None` before the first batch.
    pub fn estimates(&self) -> Option<FrequencyEstimates> {
        self.counts.clone().into_estimates(false)
    }
}

/// Folds `batch` into the running estimates:
/// `f(A) <- (n f(A) + sum_i phi_A(tau_i)) / (n + Δn)`.
///
/// Support counts are accumulated as integers, which evaluates the weighted
/// average exactly.
pub fn update_estimates(state: TopKState, batch: &Sample) -> TopKState {
    let observed = state.counts.observed().clone();
    let fresh = PartialCounts::count_parallel(&observed, batch.transactions());
    TopKState {
        counts: merge_partial_counts(state.counts, fresh).expect("same observed set"),
        ..state
    }
}

/// Returns the midpoint `m` of the k-th and (k+1)-th largest estimates and
/// `sum_A exp(-2n (f(A) - m)^2)` over every estimated itemset.
pub fn stopping_metric(estimates: &FrequencyEstimates, k: usize) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if estimates.len() < k + 1 {
        return Err(Error::NotEnoughEstimates {
            needed: k + 1,
            available: estimates.len(),
        });
    }
    let ranked = estimates.ranked();
    let m = 0.5 * (ranked[k - 1].1 + ranked[k].1);
    let n = estimates.sample_size() as f64;
    let sum = estimates
        .iter()
        .map(|(_, f)| (-2.0 * n * (f - m) * (f - m)).exp())
        .sum();
    Ok((m, sum))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoppedBy {
    ConditionMet,
    CapReached,
    DatasetExhausted,
}

impl fmt::Display for StoppedBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StoppedBy::ConditionMet => "condition_met",
            StoppedBy::CapReached => "cap_reached",
            StoppedBy::DatasetExhausted => "dataset_exhausted",
        })
    }
}

#[derive(Clone, Debug)]
pub struct TopKResult {
    /// Best `min(k, |Ob|)` itemsets by estimate, descending. Estimates are
    /// NaN when the run short-circuited without sampling.
    pub selected: Vec<(Itemset, f64)>,
    pub rounds: usize,
    pub final_n: usize,
    pub stopped_by: StoppedBy,
    /// Stopping sum of the last round; 0 when no round ran.
    pub stop_metric: f64,
    pub midpoint: Option<f64>,
    pub cap: u64,
    pub estimates: Option<FrequencyEstimates>,
    pub elapsed: Duration,
}

impl TopKResult {
    /// Writes `rank,itemset,frequency` rows followed by a
    /// `rounds,final_n,stopped_by,stop_metric` summary.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(["rank", "itemset", "frequency"])?;
        for (rank, (itemset, f)) in self.selected.iter().enumerate() {
            w.write_record([(rank + 1).to_string(), itemset.to_string(), f.to_string()])?;
        }
        w.write_record(["rounds", "final_n", "stopped_by", "stop_metric"])?;
        w.write_record([
            self.rounds.to_string(),
            self.final_n.to_string(),
            self.stopped_by.to_string(),
            self.stop_metric.to_string(),
        ])?;
        w.flush().map_err(|e| Error::io("csv output", e))?;
        Ok(())
    }
}

/// `min(|D|, ceil((ln 2|Ob| + ln 1/δ) / 2ε²))`.
pub fn sample_cap(dataset_len: usize, observed_len: usize, epsilon: f64, log_inv_delta: f64) -> Result<u64> {
    let n = required_sample_size(epsilon, log_inv_delta, FunctionCount::Exact(observed_len as u64))?;
    Ok(n.min(dataset_len as u64))
}

/// Runs progressive sampling until the top-k membership is settled with
/// probability at least `1 - δ`, or until the sample cap is passed.
///
/// When `k >= |Ob|` every observed itemset is returned without sampling.
pub fn topk_progressive(
    dataset: &TransactionDataset,
    observed: &ObservedSet,
    config: &TopKConfig,
) -> Result<TopKResult> {
    config.validate()?;
    let start = Instant::now();
    let cap = sample_cap(dataset.len(), observed.len(), config.epsilon, config.log_inv_delta)?;

    if config.k >= observed.len() {
        let mut selected: Vec<_> = observed.iter().map(|a| (a.clone(), f64::NAN)).collect();
        selected.sort_by(|x, y| x.0.cmp(&y.0));
        return Ok(TopKResult {
            selected,
            rounds: 0,
            final_n: 0,
            stopped_by: StoppedBy::ConditionMet,
            stop_metric: 0.0,
            midpoint: None,
            cap,
            estimates: None,
            elapsed: start.elapsed(),
        });
    }

    let mut sampler = Sampler::new(dataset, config.seed, config.replacement);
    let mut state = TopKState::new(observed, cap);
    let mut rounds = 0;
    let stopped_by = loop {
        let batch = sampler.draw(config.batch_size);
        if batch.is_empty() {
            break StoppedBy::DatasetExhausted;
        }
        state = update_estimates(state, &batch);
        rounds += 1;
        let estimates = state.estimates().expect("at least one batch merged");
        let (m, sum) = stopping_metric(&estimates, config.k)?;
        state.midpoint = Some(m);
        state.stop_metric = Some(sum);
        if state.n() as u64 > cap {
            break StoppedBy::CapReached;
        }
        // sum < δ, compared in log space so tiny δ stays meaningful
        if sum.ln() < -config.log_inv_delta {
            break StoppedBy::ConditionMet;
        }
        if sampler.remaining() == Some(0) {
            break StoppedBy::DatasetExhausted;
        }
    };

    let estimates = state.estimates();
    let selected = estimates
        .as_ref()
        .map(|e| e.top_k(config.k))
        .unwrap_or_default();
    Ok(TopKResult {
        selected,
        rounds,
        final_n: state.n(),
        stopped_by,
        stop_metric: state.stop_metric.unwrap_or(0.0),
        midpoint: state.midpoint,
        cap,
        estimates,
        elapsed: start.elapsed(),
    })
}
