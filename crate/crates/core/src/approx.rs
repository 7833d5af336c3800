//! (ε, δ)-approximation of itemset frequencies with a sample size fixed in
//! advance by the Hoeffding/union bound.
//!
//! With probability at least `1 - δ`, every returned estimate is within ε of
//! the true frequency. When the required sample is at least as large as the
//! dataset, the dataset itself is used and the estimates are exact.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use crate::bounds::{required_sample_size, FunctionCount};
use crate::dataset::{draw_sample, Sample, TransactionDataset};
use crate::error::{Error, Result};
use crate::support::{sampled_frequencies, FrequencyEstimates, Itemset, ObservedSet, PartialCounts};

/// Largest item universe [`approximate_all`] will enumerate.
pub const MAX_ALL_ITEMS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxConfig {
    pub epsilon: f64,
    pub log_inv_delta: f64,
    pub seed: u64,
}

impl ApproxConfig {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Result<Self> {
        let config = ApproxConfig {
            epsilon,
            log_inv_delta: crate::bounds::log_inv_delta(delta)?,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
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

#[derive(Clone, Debug)]
pub struct ApproxResult {
    pub estimates: FrequencyEstimates,
    pub sample_size_used: usize,
    pub full_dataset_used: bool,
    /// Wall-clock time spent sampling and counting.
    pub elapsed: Duration,
}

/// Draws the sample the precomputed-size algorithms use: `n` independent
/// uniform draws, or the whole dataset when `n >= |D|`.
fn sample_for(dataset: &TransactionDataset, n: u64, seed: u64) -> Result<(Sample, bool)> {
    if n >= dataset.len() as u64 {
        Ok((Sample::full(dataset), true))
    } else {
        Ok((draw_sample(dataset, n as usize, seed, true)?, false))
    }
}

/// Estimates the frequency of every subset of the item universe, including
/// the empty set. Sized with `N = 2^|I|`.
pub fn approximate_all(dataset: &TransactionDataset, config: &ApproxConfig) -> Result<ApproxResult> {
    config.validate()?;
    let universe: Vec<_> = dataset.item_universe().iter().copied().collect();
    if universe.len() > MAX_ALL_ITEMS {
        return Err(Error::UniverseTooLarge {
            items: universe.len(),
            limit: MAX_ALL_ITEMS,
        });
    }
    let n = required_sample_size(
        config.epsilon,
        config.log_inv_delta,
        FunctionCount::subsets_of(universe.len()),
    )?;

    let start = Instant::now();
    let (sample, full) = sample_for(dataset, n, config.seed)?;
    let width = universe.len();
    // Occurrences of each exact transaction mask, then a superset-sum pass so
    // that counts[A] = #{transactions whose mask contains A}.
    let mut counts = vec![0u64; 1 << width];
    for t in sample.transactions() {
        let mask = t.items().iter().fold(0usize, |m, item| {
            m | 1 << universe.binary_search(item).expect("item is in the universe")
        });
        counts[mask] += 1;
    }
    for bit in 0..width {
        for mask in 0..counts.len() {
            if mask & (1 << bit) == 0 {
                counts[mask] += counts[mask | 1 << bit];
            }
        }
    }
    let entries: BTreeMap<Itemset, u64> = counts
        .iter()
        .enumerate()
        .map(|(mask, &c)| {
            let items = (0..width)
                .filter(|b| mask & (1 << b) != 0)
                .map(|b| universe[b])
                .collect();
            (Itemset::new(items), c)
        })
        .collect();
    let estimates = FrequencyEstimates::from_counts(entries, sample.len(), full);
    Ok(ApproxResult {
        estimates,
        sample_size_used: sample.len(),
        full_dataset_used: full,
        elapsed: start.elapsed(),
    })
}

/// Estimates the frequencies of the observed itemsets only. Sized with
/// `N = |Ob|`.
pub fn approximate_observed(
    dataset: &TransactionDataset,
    observed: &ObservedSet,
    config: &ApproxConfig,
) -> Result<ApproxResult> {
    config.validate()?;
    let n = required_sample_size(
        config.epsilon,
        config.log_inv_delta,
        FunctionCount::Exact(observed.len() as u64),
    )?;
    let start = Instant::now();
    let (sample, full) = sample_for(dataset, n, config.seed)?;
    let estimates = if full {
        PartialCounts::count_parallel(observed, sample.transactions())
            .into_estimates(true)
            .expect("datasets are non-empty")
    } else {
        sampled_frequencies(&sample, observed)?
    };
    Ok(ApproxResult {
        estimates,
        sample_size_used: sample.len(),
        full_dataset_used: full,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticSpec, Transaction};
    use crate::support::exact_frequency;

    fn config(epsilon: f64, delta: f64, seed: u64) -> ApproxConfig {
        ApproxConfig::new(epsilon, delta, seed).unwrap()
    }

    #[test]
    fn full_sample_gives_exact_subset_frequencies() {
        let ds = TransactionDataset::new(
            "t",
            vec![Transaction::new(vec![1]), Transaction::new(vec![1, 2])],
        )
        .unwrap();
        let r = approximate_all(&ds, &config(0.1, 0.01, 0)).unwrap();
        assert!(r.full_dataset_used);
        assert_eq!(r.sample_size_used, 2);
        let e = &r.estimates;
        assert_eq!(e.len(), 4);
        assert_eq!(e.frequency(&Itemset::empty()), Some(1.0));
        assert_eq!(e.frequency(&Itemset::from([1])), Some(1.0));
        assert_eq!(e.frequency(&Itemset::from([2])), Some(0.5));
        assert_eq!(e.frequency(&Itemset::from([1, 2])), Some(0.5));
        assert!(e.exact());
    }

    #[test]
    fn ten_item_sample_size() {
        let spec = SyntheticSpec {
            item_marginals: (1..=10).map(|i| (i, 0.5)).collect(),
            planted_pairs: vec![],
            transaction_count: 2000,
        };
        let ds = generate_synthetic(&spec, 1).unwrap();
        let r = approximate_all(&ds, &config(0.1, 0.01, 3)).unwrap();
        assert_eq!(r.sample_size_used, 612);
        assert!(!r.full_dataset_used);
        assert_eq!(r.estimates.len(), 1024);
    }

    #[test]
    fn subset_counts_match_direct_counting() {
        let spec = SyntheticSpec {
            item_marginals: vec![(3, 0.6), (8, 0.3), (11, 0.8), (20, 0.5)],
            planted_pairs: vec![(3, 11, 0.55)],
            transaction_count: 300,
        };
        let ds = generate_synthetic(&spec, 5).unwrap();
        // tiny epsilon forces the full-dataset fallback
        let r = approximate_all(&ds, &config(0.01, 0.01, 0)).unwrap();
        assert!(r.full_dataset_used);
        for (a, f) in r.estimates.iter() {
            assert_eq!(f, exact_frequency(&ds, a), "{a}");
        }
    }

    #[test]
    fn universe_guard() {
        let t = Transaction::new((0..25).collect());
        let ds = TransactionDataset::new("wide", vec![t]).unwrap();
        assert!(matches!(
            approximate_all(&ds, &config(0.1, 0.1, 0)),
            Err(Error::UniverseTooLarge { items: 25, .. })
        ));
    }

    #[test]
    fn observed_sample_size_follows_the_formula() {
        let spec = SyntheticSpec {
            item_marginals: (0..100).map(|i| (i, 0.2)).collect(),
            planted_pairs: vec![],
            transaction_count: 4000,
        };
        let ds = generate_synthetic(&spec, 2).unwrap();
        let items: Vec<_> = (0..100).collect();
        let pairs = ObservedSet::all_pairs(&items).unwrap();
        assert_eq!(pairs.len(), 4950);
        let r = approximate_observed(&ds, &pairs, &config(0.05, 1e-4, 9)).unwrap();
        assert_eq!(r.sample_size_used, 3683);
        assert!(!r.full_dataset_used);
        assert!(!r.estimates.exact());
        assert_eq!(r.estimates.len(), 4950);
    }

    #[test]
    fn small_dataset_falls_back_to_exact() {
        let spec = SyntheticSpec {
            item_marginals: vec![(1, 0.7), (2, 0.4), (3, 0.2)],
            planted_pairs: vec![],
            transaction_count: 500,
        };
        let ds = generate_synthetic(&spec, 4).unwrap();
        let o = ObservedSet::all_pairs(&[1, 2, 3]).unwrap();
        let r = approximate_observed(&ds, &o, &config(0.05, 1e-4, 0)).unwrap();
        assert!(r.full_dataset_used);
        assert_eq!(r.sample_size_used, 500);
        for a in o.iter() {
            assert_eq!(r.estimates.frequency(a).unwrap(), exact_frequency(&ds, a));
        }
    }

    #[test]
    fn empty_itemset_is_always_one() {
        let spec = SyntheticSpec {
            item_marginals: vec![(1, 0.5)],
            planted_pairs: vec![],
            transaction_count: 10_000,
        };
        let ds = generate_synthetic(&spec, 4).unwrap();
        let o = ObservedSet::new([Itemset::empty()]).unwrap();
        for seed in 0..5 {
            let r = approximate_observed(&ds, &o, &config(0.2, 0.1, seed)).unwrap();
            assert_eq!(r.estimates.frequency(&Itemset::empty()), Some(1.0));
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ApproxConfig::new(0.0, 0.1, 0).is_err());
        assert!(ApproxConfig::new(1.0, 0.1, 0).is_err());
        assert!(ApproxConfig::new(0.1, 0.0, 0).is_err());
    }

    #[test]
    fn monotone_cost() {
        let ds = generate_synthetic(
            &SyntheticSpec {
                item_marginals: (0..30).map(|i| (i, 0.3)).collect(),
                planted_pairs: vec![],
                transaction_count: 100_000,
            },
            0,
        )
        .unwrap();
        let size = |o: &ObservedSet, eps: f64, delta: f64| {
            approximate_observed(&ds, o, &config(eps, delta, 1)).unwrap().sample_size_used
        };
        let small = ObservedSet::all_pairs(&(0..10).collect::<Vec<_>>()).unwrap();
        let large = ObservedSet::all_pairs(&(0..30).collect::<Vec<_>>()).unwrap();
        assert!(size(&small, 0.05, 0.01) <= size(&large, 0.05, 0.01));
        assert!(size(&small, 0.05, 0.01) <= size(&small, 0.05, 0.001));
        assert!(size(&small, 0.05, 0.01) >= size(&small, 0.1, 0.01));
    }
}
