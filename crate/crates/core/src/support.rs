//! Support counting: the containment indicator, exact and sampled
//! frequencies, mergeable partial counts, and the exact top-k oracle.
//!
//! Counts are kept as integers and only turned into frequencies at the
//! boundary, so results never depend on summation order or on how a sample
//! was split across workers.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dataset::{ItemId, Sample, Transaction, TransactionDataset};
use crate::error::{Error, Result};

/// A set of items, stored sorted and deduplicated. Ordering is lexicographic
/// on the sorted ids, which is the tie-break used by every ranking.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Itemset {
    items: Vec<ItemId>,
}

impl Itemset {
    pub fn new(mut items: Vec<ItemId>) -> Self {
        items.sort_unstable();
        items.dedup();
        Itemset { items }
    }

    pub fn empty() -> Self {
        Itemset::default()
    }

    pub fn singleton(item: ItemId) -> Self {
        Itemset { items: vec![item] }
    }

    pub fn pair(a: ItemId, b: ItemId) -> Self {
        Itemset::new(vec![a, b])
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_subset_of(&self, other: &Itemset) -> bool {
        self.items.iter().all(|i| other.items.binary_search(i).is_ok())
    }
}

impl<const N: usize> From<[ItemId; N]> for Itemset {
    fn from(items: [ItemId; N]) -> Self {
        Itemset::new(items.to_vec())
    }
}

/// Renders as ids joined by `+`, e.g. `1+5+9`. The empty itemset renders as
/// the empty string.
impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

impl FromStr for Itemset {
    type Err = Error;

    /// Accepts the `+`-joined form as well as whitespace separated ids.
    fn from_str(s: &str) -> Result<Self> {
        s.split(|c: char| c == '+' || c.is_ascii_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<ItemId>().map_err(|_| Error::InvalidItem {
                    line: 0,
                    token: t.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Itemset::new)
    }
}

/// Containment indicator: true iff every item of `itemset` is in `transaction`.
pub fn phi(itemset: &Itemset, transaction: &Transaction) -> bool {
    transaction.contains_all(itemset.items())
}

/// The explicit, non-empty family of itemsets whose frequencies are tracked.
/// Cloning is cheap.
#[derive(Clone, Debug)]
pub struct ObservedSet {
    itemsets: Arc<[Itemset]>,
}

impl PartialEq for ObservedSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.itemsets, &other.itemsets) || self.itemsets == other.itemsets
    }
}

impl ObservedSet {
    /// Drops repeated itemsets, keeping the first occurrence.
    pub fn new(itemsets: impl IntoIterator<Item = Itemset>) -> Result<Self> {
        let mut seen = HashSet::new();
        let unique: Vec<Itemset> = itemsets
            .into_iter()
            .filter(|a| seen.insert(a.clone()))
            .collect();
        if unique.is_empty() {
            return Err(Error::EmptyObserved);
        }
        Ok(ObservedSet {
            itemsets: unique.into(),
        })
    }

    pub fn singletons<'a>(items: impl IntoIterator<Item = &'a ItemId>) -> Result<Self> {
        Self::new(items.into_iter().map(|&i| Itemset::singleton(i)))
    }

    /// All 2-itemsets over `items`.
    pub fn all_pairs(items: &[ItemId]) -> Result<Self> {
        let mut sorted = items.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut pairs = Vec::with_capacity(sorted.len() * sorted.len().saturating_sub(1) / 2);
        for (i, &a) in sorted.iter().enumerate() {
            for &b in &sorted[i + 1..] {
                pairs.push(Itemset::pair(a, b));
            }
        }
        Self::new(pairs)
    }

    /// Reads one itemset per line, ids separated by spaces. Blank lines and
    /// `#` comments are ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut itemsets = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let itemset = line.parse::<Itemset>().map_err(|e| match e {
                Error::InvalidItem { token, .. } => Error::InvalidItem {
                    line: idx + 1,
                    token,
                },
                other => other,
            })?;
            itemsets.push(itemset);
        }
        Self::new(itemsets)
    }

    pub fn itemsets(&self) -> &[Itemset] {
        &self.itemsets
    }

    pub fn len(&self) -> usize {
        self.itemsets.len()
    }

    /// Always false; kept for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.itemsets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Itemset> {
        self.itemsets.iter()
    }

    fn max_item(&self) -> Option<ItemId> {
        self.itemsets.iter().filter_map(|a| a.items.last().copied()).max()
    }
}

/// Support counts of an observed family over one segment of transactions.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialCounts {
    observed: ObservedSet,
    counts: Vec<u64>,
    segment_len: usize,
}

impl PartialCounts {
    /// The identity of [`merge_partial_counts`].
    pub fn empty(observed: &ObservedSet) -> Self {
        PartialCounts {
            observed: observed.clone(),
            counts: vec![0; observed.len()],
            segment_len: 0,
        }
    }

    /// Counts, for every observed itemset, the transactions of `segment`
    /// containing it.
    pub fn count(observed: &ObservedSet, segment: &[Transaction]) -> Self {
        const MAX_BITMAP_WIDTH: usize = 1 << 22;
        let mut counts = vec![0u64; observed.len()];
        // A bitmap of the current transaction turns each subset test into
        // |A| bit probes. Items above the largest observed id are irrelevant.
        let width = observed.max_item().map_or(0, |m| m as usize + 1);
        if width > MAX_BITMAP_WIDTH {
            for t in segment {
                for (count, itemset) in counts.iter_mut().zip(observed.iter()) {
                    *count += phi(itemset, t) as u64;
                }
            }
            return PartialCounts {
                observed: observed.clone(),
                counts,
                segment_len: segment.len(),
            };
        }
        let mut bits = vec![0u64; width.div_ceil(64)];
        for t in segment {
            for &item in t.items().iter().take_while(|&&i| (i as usize) < width) {
                bits[item as usize / 64] |= 1 << (item % 64);
            }
            for (count, itemset) in counts.iter_mut().zip(observed.iter()) {
                if itemset
                    .items
                    .iter()
                    .all(|&i| bits[i as usize / 64] & (1 << (i % 64)) != 0)
                {
                    *count += 1;
                }
            }
            for &item in t.items().iter().take_while(|&&i| (i as usize) < width) {
                bits[item as usize / 64] = 0;
            }
        }
        PartialCounts {
            observed: observed.clone(),
            counts,
            segment_len: segment.len(),
        }
    }

    /// Splits `segment` into blocks counted in parallel. The result does not
    /// depend on the block size or the number of workers.
    pub fn count_parallel(observed: &ObservedSet, segment: &[Transaction]) -> Self {
        const BLOCK: usize = 2048;
        if segment.len() <= BLOCK {
            return Self::count(observed, segment);
        }
        segment
            .par_chunks(BLOCK)
            .map(|block| Self::count(observed, block))
            .reduce(
                || Self::empty(observed),
                |a, b| merge_partial_counts(a, b).expect("blocks share the observed set"),
            )
    }

    pub fn observed(&self) -> &ObservedSet {
        &self.observed
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn segment_len(&self) -> usize {
        self.segment_len
    }

    /// Converts to frequencies; `None` when the segment is empty.
    pub fn into_estimates(self, exact: bool) -> Option<FrequencyEstimates> {
        if self.segment_len == 0 {
            return None;
        }
        Some(FrequencyEstimates {
            entries: self
                .observed
                .iter()
                .cloned()
                .zip(self.counts.iter().copied())
                .collect(),
            sample_size: self.segment_len,
            exact,
        })
    }
}

/// Adds the counts of two disjoint segments over the same observed family.
/// Associative and commutative.
pub fn merge_partial_counts(left: PartialCounts, right: PartialCounts) -> Result<PartialCounts> {
    if left.observed != right.observed {
        return Err(Error::MismatchedObserved);
    }
    let mut merged = left;
    for (a, b) in merged.counts.iter_mut().zip(&right.counts) {
        *a += b;
    }
    merged.segment_len += right.segment_len;
    Ok(merged)
}

/// Frequencies of observed itemsets together with the number of
/// transactions they were computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyEstimates {
    entries: BTreeMap<Itemset, u64>,
    sample_size: usize,
    exact: bool,
}

impl FrequencyEstimates {
    pub(crate) fn from_counts(entries: BTreeMap<Itemset, u64>, sample_size: usize, exact: bool) -> Self {
        debug_assert!(sample_size >= 1);
        debug_assert!(entries.values().all(|&c| c as usize <= sample_size));
        FrequencyEstimates {
            entries,
            sample_size,
            exact,
        }
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    /// True when computed over the whole dataset.
    pub fn exact(&self) -> bool {
        self.exact
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn frequency(&self, itemset: &Itemset) -> Option<f64> {
        self.entries
            .get(itemset)
            .map(|&c| c as f64 / self.sample_size as f64)
    }

    pub fn count(&self, itemset: &Itemset) -> Option<u64> {
        self.entries.get(itemset).copied()
    }

    /// Entries in itemset order.
    pub fn iter(&self) -> impl Iterator<Item = (&Itemset, f64)> + '_ {
        let n = self.sample_size as f64;
        self.entries.iter().map(move |(a, &c)| (a, c as f64 / n))
    }

    /// Entries by descending frequency, ties broken by ascending itemset.
    pub fn ranked(&self) -> Vec<(Itemset, f64)> {
        let mut by_count: Vec<(&Itemset, u64)> = self.entries.iter().map(|(a, &c)| (a, c)).collect();
        by_count.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(y.0)));
        let n = self.sample_size as f64;
        by_count
            .into_iter()
            .map(|(a, c)| (a.clone(), c as f64 / n))
            .collect()
    }

    /// The `k` highest entries of [`ranked`](Self::ranked).
    pub fn top_k(&self, k: usize) -> Vec<(Itemset, f64)> {
        let mut ranked = self.ranked();
        ranked.truncate(k);
        ranked
    }

    /// Writes `itemset,frequency,n,exact` rows under a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["itemset", "frequency", "n", "exact"])?;
        for (itemset, f) in self.iter() {
            w.write_record([
                itemset.to_string(),
                f.to_string(),
                self.sample_size.to_string(),
                self.exact.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("csv output", e))?;
        Ok(())
    }
}

fn exact_count(dataset: &TransactionDataset, itemset: &Itemset) -> u64 {
    dataset
        .transactions()
        .iter()
        .filter(|t| phi(itemset, t))
        .count() as u64
}

/// Fraction of the dataset's transactions that contain `itemset`.
pub fn exact_frequency(dataset: &TransactionDataset, itemset: &Itemset) -> f64 {
    exact_count(dataset, itemset) as f64 / dataset.len() as f64
}

/// Exact frequencies of every observed itemset over the whole dataset.
pub fn exact_frequencies(dataset: &TransactionDataset, observed: &ObservedSet) -> FrequencyEstimates {
    PartialCounts::count_parallel(observed, dataset.transactions())
        .into_estimates(true)
        .expect("datasets are non-empty")
}

/// Frequencies of the observed itemsets within `sample`.
pub fn sampled_frequencies(sample: &Sample, observed: &ObservedSet) -> Result<FrequencyEstimates> {
    PartialCounts::count_parallel(observed, sample.transactions())
        .into_estimates(false)
        .ok_or_else(|| Error::InvalidArgument("sample is empty".into()))
}

/// The `min(k, |observed|)` most frequent observed itemsets by exact
/// frequency, descending, ties broken by ascending itemset.
pub fn exact_top_k(
    dataset: &TransactionDataset,
    observed: &ObservedSet,
    k: usize,
) -> Result<Vec<(Itemset, f64)>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    Ok(exact_frequencies(dataset, observed).top_k(k))
}
