//! Sampling-based estimation of itemset frequencies in transactional data.
//!
//! The crate covers:
//!
//! * [`dataset`]: FIMI loading, a synthetic generator and seeded sampling.
//! * [`support`]: itemsets, observed families, exact and sampled counts.
//! * [`bounds`]: uniform deviation bounds (Massart, `w*`, Hoeffding/union)
//!   and the sample size they imply.
//! * [`approx`]: (ε, δ)-approximation with a precomputed sample size.
//! * [`topk`]: progressive top-k with a midpoint stopping rule.
//! * [`candidates`]: threshold pass plus SON pair mining.
//! * [`eval`]: end-to-end pipelines, precision against exact results, and
//!   bound curves.
//!
//! ```
//! use itemset_sampler::{approximate_observed, ApproxConfig, ObservedSet, TransactionDataset};
//!
//! let ds = TransactionDataset::parse_fimi("1 2\n1 3\n2 3\n1 2 3\n".as_bytes(), "toy").unwrap();
//! let pairs = ObservedSet::all_pairs(&[1, 2, 3]).unwrap();
//! let config = ApproxConfig::new(0.1, 0.05, 7).unwrap();
//! let r = approximate_observed(&ds, &pairs, &config).unwrap();
//! // four transactions are fewer than the required sample, so counts are exact
//! assert!(r.full_dataset_used);
//! assert_eq!(r.estimates.frequency(&"1+2".parse().unwrap()), Some(0.5));
//! ```

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod bounds;
pub mod candidates;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod support;
pub mod topk;

pub use approx::{approximate_all, approximate_observed, ApproxConfig, ApproxResult};
pub use bounds::{
    delta_one, delta_one_prime, delta_two, exact_rademacher, log_inv_delta, massart_bound,
    massart_ell, minimize_w, required_sample_size, w_of_s, BoundInputs, BoundReport,
    FunctionCount, WFunction,
};
pub use candidates::{
    build_observed_pairs, pass1_threshold, son_frequent_pairs, CandidatePipelineConfig,
    CandidateReport, SonPairs, ThresholdPass,
};
pub use dataset::{
    draw_sample, generate_synthetic, load_fimi, ItemId, Sample, Sampler, SyntheticSpec,
    Transaction, TransactionDataset,
};
pub use error::{Error, Result};
pub use eval::{
    emit_bound_curves, precision, run_pipeline, Algorithm, CurveRow, EllRule, EvalConfig, EvalRow,
};
pub use support::{
    exact_frequencies, exact_frequency, exact_top_k, merge_partial_counts, phi, sampled_frequencies,
    FrequencyEstimates, Itemset, ObservedSet, PartialCounts,
};
pub use topk::{
    sample_cap, stopping_metric, topk_progressive, update_estimates, StoppedBy, TopKConfig,
    TopKResult, TopKState,
};
