//! Transaction datasets: FIMI parsing and writing, a seeded synthetic
//! generator, and uniform sampling of transactions.
//!
//! All randomness in the crate flows through [`Sampler`] and
//! [`generate_synthetic`], both of which are driven by a `ChaCha8Rng` seeded
//! from a caller supplied `u64`. Results are bit-reproducible for a fixed
//! build and seed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Item identifier. Tokens that do not fit in 32 bits are rejected by the parser.
pub type ItemId = u32;

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A single basket: a strictly ascending list of distinct item ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transaction {
    items: Vec<ItemId>,
}

impl Transaction {
    /// Builds a transaction from arbitrary ids, sorting and removing duplicates.
    pub fn new(mut items: Vec<ItemId>) -> Self {
        items.sort_unstable();
        items.dedup();
        Transaction { items }
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

    pub fn contains(&self, item: ItemId) -> bool {
        self.items.binary_search(&item).is_ok()
    }

    /// True when every id of the sorted slice `items` occurs in this transaction.
    pub fn contains_all(&self, items: &[ItemId]) -> bool {
        if items.len() > self.items.len() {
            return false;
        }
        // both sides are sorted, so a single forward merge suffices
        let mut rest = self.items.iter();
        'outer: for want in items {
            for have in rest.by_ref() {
                match have.cmp(want) {
                    std::cmp::Ordering::Less => continue,
                    std::cmp::Ordering::Equal => continue 'outer,
                    std::cmp::Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }
}

impl FromIterator<ItemId> for Transaction {
    fn from_iter<I: IntoIterator<Item = ItemId>>(iter: I) -> Self {
        Transaction::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Transaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

/// The population of transactions being mined. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct TransactionDataset {
    transactions: Vec<Transaction>,
    item_universe: BTreeSet<ItemId>,
    source_name: String,
}

impl TransactionDataset {
    /// Builds a dataset whose universe is the union of the transactions' items.
    pub fn new(source_name: impl Into<String>, transactions: Vec<Transaction>) -> Result<Self> {
        let universe = transactions
            .iter()
            .flat_map(|t| t.items().iter().copied())
            .collect();
        Self::with_universe(source_name, transactions, universe)
    }

    /// Builds a dataset with an explicit universe, which may contain items
    /// that never occur.
    pub fn with_universe(
        source_name: impl Into<String>,
        transactions: Vec<Transaction>,
        item_universe: BTreeSet<ItemId>,
    ) -> Result<Self> {
        if transactions.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(stray) = transactions
            .iter()
            .flat_map(|t| t.items())
            .find(|item| !item_universe.contains(item))
        {
            return Err(Error::InvalidArgument(format!(
                "item {stray} is not part of the item universe"
            )));
        }
        Ok(TransactionDataset {
            transactions,
            item_universe,
            source_name: source_name.into(),
        })
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn item_universe(&self) -> &BTreeSet<ItemId> {
        &self.item_universe
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    /// Always false for a successfully constructed dataset.
    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Parses FIMI text: one transaction per line, base-10 ids separated by
    /// whitespace. Blank lines are skipped; `\r\n` endings are accepted.
    pub fn parse_fimi<R: BufRead>(reader: R, source_name: impl Into<String>) -> Result<Self> {
        let source_name = source_name.into();
        let mut transactions = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(&source_name, e))?;
            let line_no = idx + 1;
            let mut items = Vec::new();
            for token in line.split_ascii_whitespace() {
                let item: ItemId = token.parse().map_err(|_| Error::InvalidItem {
                    line: line_no,
                    token: token.to_string(),
                })?;
                items.push(item);
            }
            if !items.is_empty() {
                transactions.push(Transaction::new(items));
            }
        }
        Self::new(source_name, transactions)
    }

    /// Writes FIMI text. Empty transactions become empty lines, which the
    /// parser skips, so only datasets without empty baskets round-trip.
    pub fn write_fimi<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in &self.transactions {
            writeln!(out, "{t}")?;
        }
        Ok(())
    }

    pub fn to_fimi_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_fimi(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("FIMI output is ASCII")
    }

    /// Projects every transaction onto the `limit` smallest item ids of the
    /// universe. Transactions left empty are kept so that `len()` and every
    /// frequency denominator are unchanged.
    pub fn restrict_to_first_items(&self, limit: usize) -> TransactionDataset {
        let kept: BTreeSet<ItemId> = self.item_universe.iter().copied().take(limit).collect();
        let transactions = self
            .transactions
            .iter()
            .map(|t| {
                Transaction::new(
                    t.items()
                        .iter()
                        .copied()
                        .filter(|i| kept.contains(i))
                        .collect(),
                )
            })
            .collect();
        TransactionDataset {
            transactions,
            item_universe: kept,
            source_name: self.source_name.clone(),
        }
    }
}

/// Reads a FIMI `.dat` file.
pub fn load_fimi(path: impl AsRef<Path>) -> Result<TransactionDataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    TransactionDataset::parse_fimi(BufReader::new(file), name)
}

/// Parameters of the synthetic basket generator.
///
/// Every item is drawn independently with its marginal probability, except
/// items of a planted pair, which are drawn jointly so that both appear
/// together with the pair's joint probability.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SyntheticSpec {
    pub item_marginals: Vec<(ItemId, f64)>,
    pub planted_pairs: Vec<(ItemId, ItemId, f64)>,
    pub transaction_count: usize,
}

enum Draw {
    Single(ItemId, f64),
    // cumulative thresholds for: both, first only, second only
    Pair(ItemId, ItemId, [f64; 3]),
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.transaction_count == 0 {
            return bad("transaction count must be at least 1".into());
        }
        let mut marginals = BTreeMap::new();
        for &(item, p) in &self.item_marginals {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("probability {p} of item {item} is outside [0, 1]"));
            }
            if marginals.insert(item, p).is_some() {
                return bad(format!("item {item} declared twice"));
            }
        }
        let mut paired = BTreeSet::new();
        for &(a, b, joint) in &self.planted_pairs {
            if a == b {
                return bad(format!("pair ({a}, {b}) repeats an item"));
            }
            let (Some(&pa), Some(&pb)) = (marginals.get(&a), marginals.get(&b)) else {
                return bad(format!("pair ({a}, {b}) uses an undeclared item"));
            };
            if !(0.0..=1.0).contains(&joint) {
                return bad(format!("joint probability {joint} is outside [0, 1]"));
            }
            if joint > pa.min(pb) {
                return bad(format!(
                    "joint probability {joint} of ({a}, {b}) exceeds a marginal"
                ));
            }
            if pa + pb - joint > 1.0 + 1e-12 {
                return bad(format!(
                    "marginals of ({a}, {b}) cannot be met with joint probability {joint}"
                ));
            }
            if !paired.insert(a) || !paired.insert(b) {
                return bad(format!("item of pair ({a}, {b}) is already in another pair"));
            }
        }
        Ok(())
    }

    /// Parses the line-based spec format:
    ///
    /// ```text
    /// # comment
    /// item 1 0.9
    /// item 2 0.4
    /// pair 1 2 0.35
    /// count 5000
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = SyntheticSpec::default();
        let mut have_count = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let line_no = idx + 1;
            let err = || Error::InvalidSpec(format!("line {line_no}: cannot parse {raw:?}"));
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            match fields.as_slice() {
                ["item", id, p] => spec.item_marginals.push((
                    id.parse().map_err(|_| err())?,
                    p.parse().map_err(|_| err())?,
                )),
                ["pair", a, b, p] => spec.planted_pairs.push((
                    a.parse().map_err(|_| err())?,
                    b.parse().map_err(|_| err())?,
                    p.parse().map_err(|_| err())?,
                )),
                ["count", n] => {
                    spec.transaction_count = n.parse().map_err(|_| err())?;
                    have_count = true;
                }
                _ => return Err(err()),
            }
        }
        if !have_count {
            return Err(Error::InvalidSpec("missing `count` directive".into()));
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn draws(&self) -> Vec<Draw> {
        let marginal: BTreeMap<ItemId, f64> = self.item_marginals.iter().copied().collect();
        let paired: BTreeSet<ItemId> = self
            .planted_pairs
            .iter()
            .flat_map(|&(a, b, _)| [a, b])
            .collect();
        let mut draws: Vec<Draw> = self
            .planted_pairs
            .iter()
            .map(|&(a, b, joint)| {
                let both = joint;
                let a_only = both + (marginal[&a] - joint);
                let b_only = a_only + (marginal[&b] - joint);
                Draw::Pair(a, b, [both, a_only, b_only])
            })
            .collect();
        draws.extend(
            self.item_marginals
                .iter()
                .filter(|(item, _)| !paired.contains(item))
                .map(|&(item, p)| Draw::Single(item, p)),
        );
        draws
    }
}

/// Generates `spec.transaction_count` transactions. Deterministic for a
/// fixed `(spec, seed)`. The universe is the set of declared items.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<TransactionDataset> {
    spec.validate()?;
    let draws = spec.draws();
    let mut rng = rng_from_seed(seed);
    let mut transactions = Vec::with_capacity(spec.transaction_count);
    let mut items = Vec::new();
    for _ in 0..spec.transaction_count {
        items.clear();
        for draw in &draws {
            let u: f64 = rng.gen();
            match *draw {
                Draw::Single(item, p) => {
                    if u < p {
                        items.push(item);
                    }
                }
                Draw::Pair(a, b, [both, a_only, b_only]) => {
                    if u < both {
                        items.extend([a, b]);
                    } else if u < a_only {
                        items.push(a);
                    } else if u < b_only {
                        items.push(b);
                    }
                }
            }
        }
        transactions.push(Transaction::new(items.clone()));
    }
    let universe = spec.item_marginals.iter().map(|&(item, _)| item).collect();
    TransactionDataset::with_universe("synthetic", transactions, universe)
}

/// An ordered multiset of transactions drawn from a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    transactions: Vec<Transaction>,
    source_indices: Vec<usize>,
    seed: u64,
    replacement: bool,
    source_size: usize,
}

impl Sample {
    /// The whole dataset, in order.
    pub fn full(dataset: &TransactionDataset) -> Self {
        Sample {
            transactions: dataset.transactions().to_vec(),
            source_indices: (0..dataset.len()).collect(),
            seed: 0,
            replacement: false,
            source_size: dataset.len(),
        }
    }

    /// Wraps an explicit list of transactions, e.g. a hand-built test sample.
    pub fn from_transactions(transactions: Vec<Transaction>) -> Self {
        let n = transactions.len();
        Sample {
            transactions,
            source_indices: (0..n).collect(),
            seed: 0,
            replacement: false,
            source_size: n,
        }
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    /// Positions in the source dataset, parallel to `transactions()`.
    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replacement(&self) -> bool {
        self.replacement
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Appends `other` after this sample.
    pub fn extend(&mut self, other: Sample) {
        self.transactions.extend(other.transactions);
        self.source_indices.extend(other.source_indices);
    }
}

/// A seeded stream of uniform draws from a dataset.
///
/// With replacement every draw is independent. Without replacement the
/// sampler walks a lazily built random permutation and runs dry after
/// `dataset.len()` draws.
pub struct Sampler<'a> {
    dataset: &'a TransactionDataset,
    rng: ChaCha8Rng,
    seed: u64,
    replacement: bool,
    permutation: Vec<usize>,
    cursor: usize,
}

impl<'a> Sampler<'a> {
    pub fn new(dataset: &'a TransactionDataset, seed: u64, replacement: bool) -> Self {
        Sampler {
            dataset,
            rng: rng_from_seed(seed),
            seed,
            replacement,
            permutation: Vec::new(),
            cursor: 0,
        }
    }

    /// Draws with replacement never run out.
    pub fn remaining(&self) -> Option<usize> {
        (!self.replacement).then(|| self.dataset.len() - self.cursor)
    }

    /// Draws up to `n` transactions; fewer only when sampling without
    /// replacement and the dataset is exhausted.
    pub fn draw(&mut self, n: usize) -> Sample {
        let len = self.dataset.len();
        let indices: Vec<usize> = if self.replacement {
            (0..n).map(|_| self.rng.gen_range(0..len)).collect()
        } else {
            if self.permutation.is_empty() {
                self.permutation = (0..len).collect();
            }
            let end = (self.cursor + n).min(len);
            // partial Fisher-Yates
            for i in self.cursor..end {
                let j = self.rng.gen_range(i..len);
                self.permutation.swap(i, j);
            }
            let picked = self.permutation[self.cursor..end].to_vec();
            self.cursor = end;
            picked
        };
        Sample {
            transactions: indices
                .iter()
                .map(|&i| self.dataset.transactions()[i].clone())
                .collect(),
            source_indices: indices,
            seed: self.seed,
            replacement: self.replacement,
            source_size: len,
        }
    }
}

/// Draws `n` transactions uniformly at random.
///
/// Without replacement and `n >= |D|` the whole dataset is returned in its
/// original order.
pub fn draw_sample(
    dataset: &TransactionDataset,
    n: usize,
    seed: u64,
    replacement: bool,
) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !replacement && n >= dataset.len() {
        let mut sample = Sample::full(dataset);
        sample.seed = seed;
        return Ok(sample);
    }
    Ok(Sampler::new(dataset, seed, replacement).draw(n))
}
