//! End-to-end evaluation harness.
//!
//! Two pipelines find the top-k frequent pairs of a dataset restricted to
//! its first `item_limit` items:
//!
//! * `precomputed`: candidate pairs, then [`approximate_observed`] with the
//!   sample size fixed by the Hoeffding/union bound, then sort.
//! * `progressive`: candidate pairs, then [`topk_progressive`].
//!
//! Each trial is scored against the exact top-k over the same candidate
//! family. Exact results can be cached on disk because they dominate the
//! running time on real datasets.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::approx::{approximate_observed, ApproxConfig};
use crate::bounds::{delta_one, delta_two, log_inv_delta, BoundInputs, FunctionCount};
use crate::candidates::{build_observed_pairs, CandidatePipelineConfig, DEFAULT_CHUNKS};
use crate::dataset::TransactionDataset;
use crate::error::{Error, Result};
use crate::support::{exact_top_k, Itemset, ObservedSet};
use crate::topk::{topk_progressive, StoppedBy, TopKConfig, DEFAULT_BATCH_SIZE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Precomputed,
    Progressive,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Precomputed => "precomputed",
            Algorithm::Progressive => "progressive",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "precomputed" => Ok(Algorithm::Precomputed),
            "progressive" => Ok(Algorithm::Progressive),
            other => Err(Error::InvalidArgument(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub trials: usize,
    pub k: usize,
    pub item_limit: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub batch: usize,
    pub chunk_count: usize,
    /// One trial per seed. When empty, seeds `0..trials` are used.
    pub seeds: Vec<u64>,
    pub cache_dir: Option<PathBuf>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            trials: 10,
            k: 10,
            item_limit: 70,
            epsilon: 0.05,
            delta: 1e-4,
            batch: DEFAULT_BATCH_SIZE,
            chunk_count: DEFAULT_CHUNKS,
            seeds: Vec::new(),
            cache_dir: None,
        }
    }
}

impl EvalConfig {
    pub fn trial_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (0..self.trials as u64).collect()
        } else {
            self.seeds.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 && self.seeds.is_empty() {
            return Err(Error::InvalidArgument("at least one trial is required".into()));
        }
        if self.k == 0 || self.item_limit == 0 || self.batch == 0 || self.chunk_count == 0 {
            return Err(Error::InvalidArgument(
                "k, item limit, batch and chunk count must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One trial of one pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub dataset_name: String,
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub delta: f64,
    pub k: usize,
    pub elapsed_sec: f64,
    /// Transactions sampled across both passes.
    pub sample_size: usize,
    pub precision: f64,
    pub trial_seed: u64,
    pub pass1_sample_size: usize,
    pub pass2_sample_size: usize,
    pub pass2_full_dataset: bool,
    pub observed_len: usize,
    pub threshold: f64,
    /// Set for progressive runs only.
    pub stopped_by: Option<StoppedBy>,
}

pub const EVAL_CSV_HEADER: [&str; 9] = [
    "dataset",
    "algorithm",
    "epsilon",
    "delta",
    "k",
    "elapsed_sec",
    "sample_size",
    "precision",
    "trial_seed",
];

pub fn write_eval_csv<W: Write>(rows: &[EvalRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVAL_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.dataset_name.clone(),
            r.algorithm.to_string(),
            r.epsilon.to_string(),
            r.delta.to_string(),
            r.k.to_string(),
            format!("{:.6}", r.elapsed_sec),
            r.sample_size.to_string(),
            r.precision.to_string(),
            r.trial_seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("csv output", e))?;
    Ok(())
}

/// Share of the exact top-k recovered by the approximate top-k.
///
/// The denominator is `k`, or the length of the exact list when fewer than
/// `k` itemsets exist; an empty exact list scores 1.
pub fn precision(approx: &[Itemset], exact: &[Itemset], k: usize) -> f64 {
    let denom = k.min(exact.len());
    if denom == 0 {
        return 1.0;
    }
    let truth: std::collections::HashSet<&Itemset> = exact.iter().take(k).collect();
    let hits = approx.iter().take(k).filter(|a| truth.contains(a)).count();
    hits as f64 / denom as f64
}

/// Exact top-k results, optionally persisted in a directory keyed by a
/// SHA-256 of the dataset content, `k` and the observed family.
pub struct OracleCache {
    dir: Option<PathBuf>,
    dataset_digest: [u8; 32],
}

impl OracleCache {
    pub fn new(dataset: &TransactionDataset, dir: Option<PathBuf>) -> Self {
        let mut hasher = Sha256::new();
        if dir.is_some() {
            for t in dataset.transactions() {
                for item in t.items() {
                    hasher.update(item.to_le_bytes());
                }
                hasher.update(u32::MAX.to_le_bytes());
            }
        }
        OracleCache {
            dir,
            dataset_digest: hasher.finalize().into(),
        }
    }

    fn path_for(&self, observed: &ObservedSet, k: usize) -> Option<PathBuf> {
        let dir = self.dir.as_ref()?;
        let mut hasher = Sha256::new();
        hasher.update(self.dataset_digest);
        hasher.update((k as u64).to_le_bytes());
        for a in observed.iter() {
            hasher.update(a.to_string().as_bytes());
            hasher.update(b"\n");
        }
        let hex: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Some(dir.join(format!("exact-top{k}-{hex}.csv")))
    }

    fn read(path: &PathBuf) -> Option<Vec<(Itemset, f64)>> {
        let mut reader = csv::Reader::from_path(path).ok()?;
        reader
            .records()
            .map(|rec| {
                let rec = rec.ok()?;
                Some((rec.get(0)?.parse().ok()?, rec.get(1)?.parse().ok()?))
            })
            .collect()
    }

    pub fn exact_top_k(
        &self,
        dataset: &TransactionDataset,
        observed: &ObservedSet,
        k: usize,
    ) -> Result<Vec<(Itemset, f64)>> {
        let path = self.path_for(observed, k);
        if let Some(hit) = path.as_ref().and_then(Self::read) {
            return Ok(hit);
        }
        let top = exact_top_k(dataset, observed, k)?;
        if let Some(path) = path {
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["itemset", "frequency"])?;
            for (a, f) in &top {
                w.write_record([a.to_string(), f.to_string()])?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Ok(top)
    }
}

// Decorrelates the pass-2 stream from the pass-1 stream of the same trial.
fn second_pass_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one pipeline for every trial seed and scores it against the exact
/// top-k. Rows come back in seed order.
pub fn run_pipeline(
    dataset: &TransactionDataset,
    config: &EvalConfig,
    algorithm: Algorithm,
) -> Result<Vec<EvalRow>> {
    config.validate()?;
    let lid = log_inv_delta(config.delta)?;
    let restricted = dataset.restrict_to_first_items(config.item_limit);
    let available = restricted.item_universe().len();
    if available < config.k {
        return Err(Error::TooFewItems {
            k: config.k,
            available,
        });
    }
    let oracle = OracleCache::new(&restricted, config.cache_dir.clone());
    let mut seeds = config.trial_seeds();
    seeds.sort_unstable();

    let mut rows = Vec::with_capacity(seeds.len());
    for seed in seeds {
        let start = Instant::now();
        let cand_config = CandidatePipelineConfig {
            k: config.k,
            chunk_count: config.chunk_count,
            epsilon: config.epsilon,
            log_inv_delta: lid,
            seed,
        };
        let report = build_observed_pairs(&restricted, &cand_config)?;
        let observed = report.observed()?;
        let pass2_seed = second_pass_seed(seed);

        let (approx_top, pass2_sample_size, pass2_full, stopped_by) = match algorithm {
            Algorithm::Precomputed => {
                let approx_config = ApproxConfig {
                    epsilon: config.epsilon,
                    log_inv_delta: lid,
                    seed: pass2_seed,
                };
                let r = approximate_observed(&restricted, &observed, &approx_config)?;
                (r.estimates.top_k(config.k), r.sample_size_used, r.full_dataset_used, None)
            }
            Algorithm::Progressive => {
                let topk_config = TopKConfig {
                    k: config.k,
                    batch_size: config.batch,
                    epsilon: config.epsilon,
                    log_inv_delta: lid,
                    seed: pass2_seed,
                    replacement: true,
                };
                let r = topk_progressive(&restricted, &observed, &topk_config)?;
                (r.selected, r.final_n, false, Some(r.stopped_by))
            }
        };
        let elapsed_sec = start.elapsed().as_secs_f64();

        let exact = oracle.exact_top_k(&restricted, &observed, config.k)?;
        let approx_sets: Vec<Itemset> = approx_top.into_iter().map(|(a, _)| a).collect();
        let exact_sets: Vec<Itemset> = exact.into_iter().map(|(a, _)| a).collect();

        rows.push(EvalRow {
            dataset_name: dataset.source_name().to_string(),
            algorithm,
            epsilon: config.epsilon,
            delta: config.delta,
            k: config.k,
            elapsed_sec,
            sample_size: report.pass1_sample_size + pass2_sample_size,
            precision: precision(&approx_sets, &exact_sets, config.k),
            trial_seed: seed,
            pass1_sample_size: report.pass1_sample_size,
            pass2_sample_size,
            pass2_full_dataset: pass2_full,
            observed_len: observed.len(),
            threshold: report.threshold,
            stopped_by,
        });
    }
    Ok(rows)
}

/// How ℓ is chosen for each point of a bound curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EllRule {
    /// `ℓ = sqrt(n)`: some itemset occurs in every sampled transaction.
    SqrtN,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub n: u64,
    pub delta: f64,
    pub count: FunctionCount,
    pub ell: f64,
    pub delta1: f64,
    pub delta2: f64,
}

/// Δ1 and Δ2 at every `n` of the grid, once for `count_a` and once for
/// `count_b` (a single pass when they are equal).
pub fn emit_bound_curves(
    n_grid: &[u64],
    delta: f64,
    count_a: FunctionCount,
    count_b: FunctionCount,
    ell_rule: EllRule,
) -> Result<Vec<CurveRow>> {
    if n_grid.is_empty() {
        return Err(Error::InvalidArgument("n grid is empty".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n grid must be strictly ascending".into()));
    }
    let lid = log_inv_delta(delta)?;
    let counts: Vec<FunctionCount> = if count_a == count_b {
        vec![count_a]
    } else {
        vec![count_a, count_b]
    };
    let mut rows = Vec::with_capacity(n_grid.len() * counts.len());
    for &count in &counts {
        for &n in n_grid {
            let ell = match ell_rule {
                EllRule::SqrtN => (n as f64).sqrt(),
                EllRule::Fixed(v) => v,
            };
            let inputs = BoundInputs::new(n, lid, count, Some(ell))?;
            rows.push(CurveRow {
                n,
                delta,
                count,
                ell,
                delta1: delta_one(&inputs)?,
                delta2: delta_two(&inputs),
            });
        }
    }
    Ok(rows)
}

pub fn write_curves_csv<W: Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "delta", "count", "ell", "delta1", "delta2"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.delta.to_string(),
            r.count.to_string(),
            r.ell.to_string(),
            r.delta1.to_string(),
            r.delta2.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("csv output", e))?;
    Ok(())
}

/// `points` log-spaced sample sizes from `lo` to `hi`, deduplicated.
pub fn log_grid(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    if points <= 1 || lo >= hi {
        return vec![lo.max(1)];
    }
    let (a, b) = ((lo.max(1) as f64).ln(), (hi as f64).ln());
    let mut grid: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .collect();
    grid.dedup();
    grid
}
