//! Candidate pair generation in the A-Priori style.
//!
//! 1. Approximate every single item's frequency and take the k-th largest
//!    estimate as the threshold `T`.
//! 2. Mine the pairs over the items that reached `T` whose exact frequency
//!    is at least `T`, with the two-pass SON algorithm.
//!
//! The resulting pairs are the observed family handed to the approximation
//! and top-k algorithms.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::approx::{approximate_observed, ApproxConfig};
use crate::dataset::{ItemId, Transaction, TransactionDataset};
use crate::error::{Error, Result};
use crate::support::{Itemset, ObservedSet, PartialCounts};

pub const DEFAULT_CHUNKS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidatePipelineConfig {
    pub k: usize,
    pub chunk_count: usize,
    pub epsilon: f64,
    pub log_inv_delta: f64,
    pub seed: u64,
}

impl CandidatePipelineConfig {
    pub fn new(k: usize, epsilon: f64, delta: f64, seed: u64) -> Result<Self> {
        let config = CandidatePipelineConfig {
            k,
            chunk_count: DEFAULT_CHUNKS,
            epsilon,
            log_inv_delta: crate::bounds::log_inv_delta(delta)?,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if self.chunk_count == 0 {
            return Err(Error::InvalidArgument("chunk count must be at least 1".into()));
        }
        self.approx_config().validate()
    }

    fn approx_config(&self) -> ApproxConfig {
        ApproxConfig {
            epsilon: self.epsilon,
            log_inv_delta: self.log_inv_delta,
            seed: self.seed,
        }
    }
}

/// Outcome of the single-item pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdPass {
    /// k-th largest estimated single-item frequency.
    pub threshold: f64,
    /// Items whose estimate is at least `threshold`; more than k under ties.
    pub frequent_items: Vec<ItemId>,
    pub sample_size_used: usize,
    pub full_dataset_used: bool,
}

/// Estimates all single-item frequencies and derives the threshold `T`.
pub fn pass1_threshold(
    dataset: &TransactionDataset,
    config: &CandidatePipelineConfig,
) -> Result<ThresholdPass> {
    config.validate()?;
    let items = dataset.item_universe();
    if items.len() < config.k {
        return Err(Error::TooFewItems {
            k: config.k,
            available: items.len(),
        });
    }
    let singles = ObservedSet::singletons(items)?;
    let result = approximate_observed(dataset, &singles, &config.approx_config())?;
    let ranked = result.estimates.ranked();
    let threshold = ranked[config.k - 1].1;
    let mut frequent_items: Vec<ItemId> = ranked
        .iter()
        .take_while(|(_, f)| *f >= threshold)
        .map(|(a, _)| a.items()[0])
        .collect();
    frequent_items.sort_unstable();
    Ok(ThresholdPass {
        threshold,
        frequent_items,
        sample_size_used: result.sample_size_used,
        full_dataset_used: result.full_dataset_used,
    })
}

/// Exact frequent pairs found by SON.
#[derive(Clone, Debug, PartialEq)]
pub struct SonPairs {
    /// Pairs with exact frequency at least `T`, in itemset order, with that frequency.
    pub pairs: Vec<(Itemset, f64)>,
    /// Number of locally frequent pairs found in each chunk.
    pub chunk_counts: Vec<usize>,
    /// Size of the union of per-chunk candidates counted in the second pass.
    pub candidates_checked: usize,
}

impl SonPairs {
    pub fn itemsets(&self) -> impl Iterator<Item = &Itemset> {
        self.pairs.iter().map(|(a, _)| a)
    }

    /// Fails with [`Error::EmptyObserved`] when no pair reached the threshold.
    pub fn to_observed(&self) -> Result<ObservedSet> {
        ObservedSet::new(self.itemsets().cloned())
    }
}

fn pair_counts(chunk: &[Transaction], allowed: &BTreeSet<ItemId>) -> HashMap<(ItemId, ItemId), u64> {
    let mut counts = HashMap::new();
    let mut kept = Vec::new();
    for t in chunk {
        kept.clear();
        kept.extend(t.items().iter().copied().filter(|i| allowed.contains(i)));
        for (i, &a) in kept.iter().enumerate() {
            for &b in &kept[i + 1..] {
                *counts.entry((a, b)).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Frequency test shared by both passes: `count / len >= threshold`.
fn reaches(count: u64, len: usize, threshold: f64) -> bool {
    count as f64 / len as f64 >= threshold
}

/// Finds every pair of `restrict_to` items whose exact frequency in
/// `dataset` is at least `threshold`.
///
/// Pass 1 splits the dataset into `chunk_count` contiguous chunks of
/// near-equal size and keeps each pair that is frequent within some chunk;
/// a globally frequent pair is frequent in at least one chunk, so nothing is
/// missed. Pass 2 counts the surviving candidates over the whole dataset and
/// drops the false positives.
pub fn son_frequent_pairs(
    dataset: &TransactionDataset,
    threshold: f64,
    chunk_count: usize,
    restrict_to: &[ItemId],
) -> Result<SonPairs> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!(
            "threshold must lie in [0, 1], got {threshold}"
        )));
    }
    if chunk_count == 0 {
        return Err(Error::InvalidArgument("chunk count must be at least 1".into()));
    }
    let len = dataset.len();
    let chunks = if chunk_count > len {
        log::warn!("chunk count {chunk_count} exceeds the {len} transactions; using {len}");
        len
    } else {
        chunk_count
    };
    let allowed: BTreeSet<ItemId> = restrict_to.iter().copied().collect();
    let transactions = dataset.transactions();

    let per_chunk: Vec<Vec<(ItemId, ItemId)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let chunk = &transactions[c * len / chunks..(c + 1) * len / chunks];
            if threshold <= 0.0 {
                // every pair qualifies, including ones that never occur
                let items: Vec<_> = allowed.iter().copied().collect();
                return items
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &a)| items[i + 1..].iter().map(move |&b| (a, b)))
                    .collect();
            }
            let mut local: Vec<_> = pair_counts(chunk, &allowed)
                .into_iter()
                .filter(|&(_, count)| reaches(count, chunk.len(), threshold))
                .map(|(pair, _)| pair)
                .collect();
            local.sort_unstable();
            local
        })
        .collect();
    let chunk_counts = per_chunk.iter().map(Vec::len).collect();
    let union: BTreeSet<(ItemId, ItemId)> = per_chunk.into_iter().flatten().collect();
    let candidates_checked = union.len();

    let pairs = if union.is_empty() {
        Vec::new()
    } else {
        let observed = ObservedSet::new(union.into_iter().map(|(a, b)| Itemset::pair(a, b)))?;
        let global = PartialCounts::count_parallel(&observed, transactions);
        observed
            .iter()
            .zip(global.counts())
            .filter(|&(_, &count)| reaches(count, len, threshold))
            .map(|(a, &count)| (a.clone(), count as f64 / len as f64))
            .collect()
    };
    Ok(SonPairs {
        pairs,
        chunk_counts,
        candidates_checked,
    })
}

/// Everything the candidate pipeline produced.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateReport {
    pub threshold: f64,
    pub frequent_items: Vec<ItemId>,
    /// Frequent pairs with their exact frequencies.
    pub candidate_pairs: Vec<(Itemset, f64)>,
    pub chunk_counts: Vec<usize>,
    pub pass1_sample_size: usize,
    pub pass1_full_dataset: bool,
}

impl CandidateReport {
    /// The candidate pairs as an observed family; fails when there are none.
    pub fn observed(&self) -> Result<ObservedSet> {
        ObservedSet::new(self.candidate_pairs.iter().map(|(a, _)| a.clone()))
    }

    /// Writes `itemset,exact_frequency` rows, then a summary header and row:
    /// `threshold,frequent_items,candidate_pairs,pass1_sample_size,chunk_counts`
    /// with the per-chunk totals joined by `;`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(["itemset", "exact_frequency"])?;
        for (a, f) in &self.candidate_pairs {
            w.write_record([a.to_string(), f.to_string()])?;
        }
        w.write_record([
            "threshold",
            "frequent_items",
            "candidate_pairs",
            "pass1_sample_size",
            "chunk_counts",
        ])?;
        let chunks: Vec<String> = self.chunk_counts.iter().map(usize::to_string).collect();
        w.write_record([
            self.threshold.to_string(),
            self.frequent_items.len().to_string(),
            self.candidate_pairs.len().to_string(),
            self.pass1_sample_size.to_string(),
            chunks.join(";"),
        ])?;
        w.flush().map_err(|e| Error::io("csv output", e))?;
        Ok(())
    }
}

/// Runs the threshold pass and then SON over the frequent items.
pub fn build_observed_pairs(
    dataset: &TransactionDataset,
    config: &CandidatePipelineConfig,
) -> Result<CandidateReport> {
    let pass1 = pass1_threshold(dataset, config)?;
    let son = son_frequent_pairs(dataset, pass1.threshold, config.chunk_count, &pass1.frequent_items)?;
    Ok(CandidateReport {
        threshold: pass1.threshold,
        frequent_items: pass1.frequent_items,
        candidate_pairs: son.pairs,
        chunk_counts: son.chunk_counts,
        pass1_sample_size: pass1.sample_size_used,
        pass1_full_dataset: pass1.full_dataset_used,
    })
}
