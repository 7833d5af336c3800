//! Worst-case error bounds for sampled itemset frequencies.
//!
//! * [`delta_one`]: twice the Massart bound on the empirical Rademacher
//!   average plus the deviation term `sqrt(2 ln(2/δ) / n)`.
//! * [`delta_one_prime`]: the same deviation term added to `min_s w(s)`.
//! * [`delta_two`]: Hoeffding's inequality with a union bound over `N`
//!   functions, `sqrt((ln 2N + ln 1/δ) / 2n)`. With `N = |Ob|` this is the
//!   observed-family variant.
//!
//! Logarithms are natural. δ is carried as `ln(1/δ)` so that extremely small
//! failure probabilities stay representable, and function counts are carried
//! as exact integers or powers of two so that `2^|I|` never has to be
//! materialised.

use std::f64::consts::LN_2;
use std::fmt;

use rayon::prelude::*;

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::support::{ObservedSet, PartialCounts};

/// Converts a failure probability to `ln(1/δ)`.
pub fn log_inv_delta(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    Ok(-delta.ln())
}

/// Number of functions a maximum ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionCount {
    Exact(u64),
    /// `2^e`, e.g. the full family of subsets of an `e`-item universe.
    PowerOfTwo(u32),
}

impl FunctionCount {
    /// The full subset family of a universe with `items` items.
    pub fn subsets_of(items: usize) -> Self {
        FunctionCount::PowerOfTwo(items as u32)
    }

    pub fn ln(&self) -> f64 {
        match *self {
            FunctionCount::Exact(n) => (n as f64).ln(),
            FunctionCount::PowerOfTwo(e) => e as f64 * LN_2,
        }
    }

    /// `ln(2N)`, the union-bound term for two-sided deviations.
    pub fn ln_double(&self) -> f64 {
        LN_2 + self.ln()
    }

    fn validate(&self) -> Result<()> {
        if *self == FunctionCount::Exact(0) {
            return Err(Error::InvalidArgument("function count must be at least 1".into()));
        }
        Ok(())
    }
}

impl fmt::Display for FunctionCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionCount::Exact(n) => write!(f, "{n}"),
            FunctionCount::PowerOfTwo(e) => write!(f, "2^{e}"),
        }
    }
}

/// Everything the closed-form bounds depend on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub n: u64,
    pub log_inv_delta: f64,
    pub function_count: FunctionCount,
    /// Largest l2 norm of an indicator vector over the sample. Only [`delta_one`] needs it.
    pub ell: Option<f64>,
}

impl BoundInputs {
    pub fn new(
        n: u64,
        log_inv_delta: f64,
        function_count: FunctionCount,
        ell: Option<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if !(log_inv_delta >= 0.0) || log_inv_delta.is_infinite() {
            return Err(Error::InvalidArgument(format!(
                "ln(1/delta) must be finite and non-negative, got {log_inv_delta}"
            )));
        }
        function_count.validate()?;
        if let Some(ell) = ell {
            if !(0.0..=(n as f64).sqrt() * (1.0 + 1e-12)).contains(&ell) {
                return Err(Error::InvalidArgument(format!(
                    "ell must lie in [0, sqrt(n)], got {ell}"
                )));
            }
        }
        Ok(BoundInputs {
            n,
            log_inv_delta,
            function_count,
            ell,
        })
    }

    /// `sqrt(2 ln(2/δ) / n)`, shared by both Rademacher-based bounds.
    fn deviation_term(&self) -> f64 {
        (2.0 * (LN_2 + self.log_inv_delta) / self.n as f64).sqrt()
    }
}

/// All bounds for one set of inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    /// Missing when `inputs.ell` is.
    pub delta1: Option<f64>,
    pub delta1_prime: Option<f64>,
    pub delta2: f64,
    pub s_star: Option<f64>,
    pub w_star: Option<f64>,
}

impl BoundReport {
    /// `minimized` is the `(s*, w*)` pair from [`minimize_w`], when available.
    pub fn compute(inputs: BoundInputs, minimized: Option<(f64, f64)>) -> Self {
        BoundReport {
            inputs,
            delta1: delta_one(&inputs).ok(),
            delta1_prime: minimized.map(|(_, w)| delta_one_prime(&inputs, w)),
            delta2: delta_two(&inputs),
            s_star: minimized.map(|(s, _)| s),
            w_star: minimized.map(|(_, w)| w),
        }
    }
}

/// `max_A sqrt(sum_i phi_A(tau_i)^2)` over the observed family. Indicators
/// are 0/1 so this is the square root of the largest support count.
pub fn massart_ell(sample: &Sample, observed: &ObservedSet) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("sample is empty".into()));
    }
    let counts = PartialCounts::count_parallel(observed, sample.transactions());
    let max = counts.counts().iter().copied().max().unwrap_or(0);
    Ok((max as f64).sqrt())
}

/// Massart's finite-class bound on the Rademacher average, `(ℓ/n) sqrt(2 ln N)`.
pub fn massart_bound(ell: f64, n: u64, function_count: FunctionCount) -> f64 {
    ell / n as f64 * (2.0 * function_count.ln()).sqrt()
}

/// `(2ℓ/n) sqrt(2 ln N) + sqrt(2 ln(2/δ) / n)`.
pub fn delta_one(inputs: &BoundInputs) -> Result<f64> {
    let ell = inputs
        .ell
        .ok_or_else(|| Error::InvalidArgument("delta one needs ell".into()))?;
    Ok(2.0 * massart_bound(ell, inputs.n, inputs.function_count) + inputs.deviation_term())
}

/// `w* + sqrt(2 ln(2/δ) / n)`.
pub fn delta_one_prime(inputs: &BoundInputs, w_star: f64) -> f64 {
    w_star + inputs.deviation_term()
}

/// `sqrt((ln 2N + ln 1/δ) / 2n)`.
pub fn delta_two(inputs: &BoundInputs) -> f64 {
    ((inputs.function_count.ln_double() + inputs.log_inv_delta) / (2.0 * inputs.n as f64)).sqrt()
}

/// Smallest `n` with `delta_two(n) <= epsilon`:
/// `ceil((ln 2N + ln 1/δ) / 2ε²)`.
pub fn required_sample_size(
    epsilon: f64,
    log_inv_delta: f64,
    function_count: FunctionCount,
) -> Result<u64> {
    if !(epsilon > 0.0) || epsilon.is_infinite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(log_inv_delta >= 0.0) || log_inv_delta.is_infinite() {
        return Err(Error::InvalidArgument(format!(
            "ln(1/delta) must be finite and non-negative, got {log_inv_delta}"
        )));
    }
    function_count.validate()?;
    let n = ((function_count.ln_double() + log_inv_delta) / (2.0 * epsilon * epsilon)).ceil();
    Ok((n as u64).max(1))
}

/// `w(s) = (1/s) ln sum_A exp(s² c_A / 2n²)` where `c_A` is the support
/// count of `A` in the sample.
///
/// Terms are grouped by support count with a multiplicity, so families far
/// larger than memory (up to `2^64` members) can be described compactly.
#[derive(Clone, Debug)]
pub struct WFunction {
    // (c / 2n², ln multiplicity)
    terms: Vec<(f64, f64)>,
    ln_total: f64,
    max_coef: f64,
}

impl WFunction {
    /// `groups` holds `(support count, multiplicity)` pairs for a sample of size `n`.
    pub fn from_groups(n: u64, groups: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let scale = 2.0 * (n as f64) * (n as f64);
        let terms: Vec<(f64, f64)> = groups
            .into_iter()
            .filter(|&(_, m)| m > 0.0)
            .map(|(c, m)| (c as f64 / scale, m.ln()))
            .collect();
        if terms.is_empty() {
            return Err(Error::EmptyObserved);
        }
        let ln_total = log_sum_exp(terms.iter().map(|&(_, lm)| lm));
        let max_coef = terms.iter().map(|&(a, _)| a).fold(0.0, f64::max);
        Ok(WFunction {
            terms,
            ln_total,
            max_coef,
        })
    }

    pub fn from_sample(sample: &Sample, observed: &ObservedSet) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::InvalidArgument("sample is empty".into()));
        }
        let counts = PartialCounts::count_parallel(observed, sample.transactions());
        let mut grouped = std::collections::BTreeMap::<u64, f64>::new();
        for &c in counts.counts() {
            *grouped.entry(c).or_default() += 1.0;
        }
        Self::from_groups(sample.len() as u64, grouped)
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) || s.is_infinite() {
            return Err(Error::InvalidArgument(format!("s must be positive, got {s}")));
        }
        Ok(self.eval_unchecked(s))
    }

    fn eval_unchecked(&self, s: f64) -> f64 {
        let s2 = s * s;
        log_sum_exp(self.terms.iter().map(|&(a, lm)| s2 * a + lm)) / s
    }

    /// Returns `(s*, w*)` with `w*` within relative `1e-6` of `inf_s w(s)`.
    ///
    /// Degenerate families have their infimum on the boundary: a single
    /// function gives `(0, 0)`; a family whose members never occur in the
    /// sample gives `(inf, 0)`.
    pub fn minimize(&self) -> (f64, f64) {
        if self.ln_total == 0.0 {
            return (0.0, 0.0);
        }
        if self.max_coef == 0.0 {
            return (f64::INFINITY, 0.0);
        }
        // Work in x = log2(s). Walk from s = 1 by factors of two until the
        // middle point is no worse than both neighbours.
        let f = |x: f64| self.eval_unchecked(x.exp2());
        let mut mid = 0.0;
        let mut f_mid = f(mid);
        let (mut f_lo, mut f_hi) = (f(mid - 1.0), f(mid + 1.0));
        while f_hi < f_mid {
            mid += 1.0;
            (f_lo, f_mid, f_hi) = (f_mid, f_hi, f(mid + 1.0));
        }
        while f_lo < f_mid {
            mid -= 1.0;
            (f_lo, f_mid, f_hi) = (f(mid - 1.0), f_lo, f_mid);
        }
        let _ = f_hi;
        let x = golden_section(f, mid - 1.0, mid + 1.0, 1e-10);
        let s = x.exp2();
        (s, self.eval_unchecked(s))
    }
}

/// Minimises a unimodal `f` on `[lo, hi]` to an interval width of `tol`.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            (b, fb) = (a, fa);
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            (a, fa) = (b, fb);
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    if fa <= fb {
        a
    } else {
        b
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `w(s)` over exactly the observed family.
pub fn w_of_s(s: f64, sample: &Sample, observed: &ObservedSet) -> Result<f64> {
    WFunction::from_sample(sample, observed)?.eval(s)
}

/// `(s*, w*)` minimising `w` over `s > 0`; see [`WFunction::minimize`].
pub fn minimize_w(sample: &Sample, observed: &ObservedSet) -> Result<(f64, f64)> {
    Ok(WFunction::from_sample(sample, observed)?.minimize())
}

/// Largest sample size accepted by [`exact_rademacher`].
pub const EXACT_RADEMACHER_MAX_N: usize = 20;

/// `E_σ[max_A (1/n) sum_i σ_i phi_A(tau_i)]`, by enumerating all `2^n`
/// sign vectors.
///
/// Inner sums are integers, so the total is accumulated exactly and the
/// result does not depend on how the enumeration is split.
pub fn exact_rademacher(sample: &Sample, observed: &ObservedSet) -> Result<f64> {
    let n = sample.len();
    if n == 0 {
        return Err(Error::InvalidArgument("sample is empty".into()));
    }
    if n > EXACT_RADEMACHER_MAX_N {
        return Err(Error::SampleTooLarge {
            n,
            limit: EXACT_RADEMACHER_MAX_N,
        });
    }
    let indicators: Vec<(u32, i64)> = observed
        .iter()
        .map(|a| {
            let mask = sample
                .transactions()
                .iter()
                .enumerate()
                .filter(|(_, t)| t.contains_all(a.items()))
                .fold(0u32, |m, (i, _)| m | (1 << i));
            (mask, mask.count_ones() as i64)
        })
        .collect();
    // bit i of `signs` set means sigma_i = +1
    let total: i64 = (0u32..(1u32 << n))
        .into_par_iter()
        .map(|signs| {
            indicators
                .iter()
                .map(|&(mask, ones)| 2 * (mask & signs).count_ones() as i64 - ones)
                .max()
                .expect("observed sets are non-empty")
        })
        .sum();
    Ok(total as f64 / (n as f64 * (1u64 << n) as f64))
}
