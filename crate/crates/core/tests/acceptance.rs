//! Acceptance checks, one line per criterion. Exits non-zero if any fails.
//!
//! Criterion 9 needs the public FIMI `chess.dat`; point `CHESS_DAT` at it or
//! place it in `tests/data/chess.dat`. It is skipped otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::LN_10;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use itemset_sampler::bounds::WFunction;
use itemset_sampler::eval::log_grid;
use itemset_sampler::{
    approximate_observed, delta_one, delta_two, emit_bound_curves, exact_rademacher, exact_top_k,
    generate_synthetic, load_fimi, log_inv_delta, massart_ell, minimize_w, required_sample_size,
    run_pipeline, son_frequent_pairs, topk_progressive, Algorithm, ApproxConfig,
    BoundInputs, EllRule, EvalConfig, FunctionCount, ItemId, Itemset, ObservedSet, Sample,
    StoppedBy, SyntheticSpec, TopKConfig, Transaction, TransactionDataset,
};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

type Check = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn bound(n: u64, lid: f64, count: FunctionCount, ell: f64) -> BoundInputs {
    BoundInputs::new(n, lid, count, Some(ell)).unwrap()
}

fn bound_ordering() -> Check {
    let start = Instant::now();
    let grid = log_grid(1_000, 1_000_000, 61);
    let mut rows = Vec::new();
    for delta in [1e-4, 1e-5] {
        let c = FunctionCount::PowerOfTwo(70);
        rows.extend(emit_bound_curves(&grid, delta, c, c, EllRule::SqrtN).map_err(|e| e.to_string())?);
    }
    let elapsed = start.elapsed();
    for r in &rows {
        ensure(r.delta2 < r.delta1, || format!("n={} delta={}: {} >= {}", r.n, r.delta, r.delta2, r.delta1))?;
    }
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("delta2 < delta1 at all {} grid points", rows.len()))
}

fn headline_values() -> Check {
    let start = Instant::now();
    let n = 100_000u64;
    let lid = log_inv_delta(0.01).unwrap();
    let inputs = bound(n, lid, FunctionCount::PowerOfTwo(1000), (n as f64).sqrt());
    let (d1, d2) = (delta_one(&inputs).unwrap(), delta_two(&inputs));
    let elapsed = start.elapsed();

    let nf = n as f64;
    let ln_n = 1000.0 * std::f64::consts::LN_2;
    let oracle1 = 2.0 * nf.sqrt() / nf * (2.0 * ln_n).sqrt() + (2.0 * (100f64 * 2.0).ln() / nf).sqrt();
    let oracle2 = ((ln_n + 2f64.ln() + 100f64.ln()) / (2.0 * nf)).sqrt();
    ensure(d1 > 0.15, || format!("delta1 = {d1}"))?;
    ensure((d1 - 0.2458).abs() <= 5e-4 && (d1 - oracle1).abs() < 1e-12, || format!("delta1 = {d1}, oracle {oracle1}"))?;
    ensure((d2 - 0.0591).abs() <= 5e-4 && (d2 - oracle2).abs() < 1e-12, || format!("delta2 = {d2}, oracle {oracle2}"))?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("delta1 = {d1:.6}, delta2 = {d2:.6}"))
}

fn limit_ratio() -> Check {
    let start = Instant::now();
    let ratios: Vec<f64> = [10.0, 100.0, 10_000.0]
        .iter()
        .map(|e| {
            let i = bound(100, e * LN_10, FunctionCount::PowerOfTwo(10), 10.0);
            delta_one(&i).unwrap() / delta_two(&i)
        })
        .collect();
    let elapsed = start.elapsed();
    ensure(ratios.windows(2).all(|w| w[1] < w[0]), || format!("not decreasing: {ratios:?}"))?;
    let last = ratios[2];
    ensure((1.95..=2.15).contains(&last), || format!("last ratio {last}"))?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("ratios {:.4} > {:.4} > {:.4}", ratios[0], ratios[1], ratios[2]))
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Sample, ObservedSet) {
    let n = rng.gen_range(1..=12);
    let rows = (0..n)
        .map(|_| Transaction::new((0..5).filter(|_| rng.gen_bool(0.5)).collect()))
        .collect();
    let size = rng.gen_range(1..=8);
    let picks = (0..size).map(|_| {
        let len = rng.gen_range(1..=3);
        Itemset::new((0..len).map(|_| rng.gen_range(0..5)).collect())
    });
    (Sample::from_transactions(rows), ObservedSet::new(picks).unwrap())
}

fn grid_min_w(sample: &Sample, observed: &ObservedSet) -> f64 {
    const POINTS: usize = 1_000_000;
    let (lo, hi) = (-3.0f64, 6.0f64);
    let w = WFunction::from_sample(sample, observed).unwrap();
    (0..POINTS)
        .into_par_iter()
        .map(|i| {
            let s = 10f64.powf(lo + (hi - lo) * i as f64 / (POINTS - 1) as f64);
            w.eval(s).unwrap()
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn theorem_ordering() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut grid_checked = 0;
    for case in 0..200 {
        let (sample, observed) = random_instance(&mut rng);
        let n = sample.len() as f64;
        let r = exact_rademacher(&sample, &observed).map_err(|e| e.to_string())?;
        let ell = massart_ell(&sample, &observed).map_err(|e| e.to_string())?;
        let massart = ell / n * (2.0 * (observed.len() as f64).ln()).sqrt();
        let (s_star, w_star) = minimize_w(&sample, &observed).map_err(|e| e.to_string())?;
        ensure(r <= massart + 1e-12, || format!("case {case}: R = {r} > Massart {massart}"))?;
        ensure(r <= w_star + 1e-9, || format!("case {case}: R = {r} > w* {w_star}"))?;
        // boundary optima (one function, or nothing ever occurs) have no interior grid minimum
        if s_star.is_finite() && s_star > 0.0 {
            let grid = grid_min_w(&sample, &observed);
            ensure((w_star - grid).abs() <= 1e-6 * grid, || {
                format!("case {case}: w* = {w_star}, grid minimum {grid}")
            })?;
            grid_checked += 1;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!("200 instances, {grid_checked} grid-checked, {elapsed:.1?}"))
}

fn brute_frequencies(ds: &TransactionDataset, observed: &ObservedSet) -> BTreeMap<Itemset, f64> {
    let sets: Vec<BTreeSet<ItemId>> = ds
        .transactions()
        .iter()
        .map(|t| t.items().iter().copied().collect())
        .collect();
    observed
        .iter()
        .map(|a| {
            let hits = sets.iter().filter(|t| a.items().iter().all(|i| t.contains(i))).count();
            (a.clone(), hits as f64 / sets.len() as f64)
        })
        .collect()
}

fn calibration() -> Check {
    let start = Instant::now();
    let spec = SyntheticSpec {
        item_marginals: (0..20).map(|i| (i, 0.85 - 0.04 * i as f64)).collect(),
        planted_pairs: vec![],
        transaction_count: 5000,
    };
    let ds = generate_synthetic(&spec, 17).map_err(|e| e.to_string())?;
    let items: Vec<ItemId> = (0..20).collect();
    let observed = ObservedSet::all_pairs(&items).unwrap();
    ensure(observed.len() == 190, || format!("{} pairs", observed.len()))?;
    let truth = brute_frequencies(&ds, &observed);
    let failures = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let config = ApproxConfig::new(0.05, 0.01, seed).unwrap();
            let r = approximate_observed(&ds, &observed, &config).unwrap();
            assert!(!r.full_dataset_used && r.sample_size_used == 2110);
            let worst = truth
                .iter()
                .map(|(a, f)| (r.estimates.frequency(a).unwrap() - f).abs())
                .fold(0.0, f64::max);
            usize::from(worst > 0.05)
        })
        .sum::<usize>();
    let elapsed = start.elapsed();
    ensure(failures <= 5, || format!("{failures} of 100 trials exceeded epsilon"))?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("{failures}/100 trials exceeded epsilon at n = 2110"))
}

fn sample_size_formula() -> Check {
    let start = Instant::now();
    let lid = 1e4f64.ln();
    let n = required_sample_size(0.05, lid, FunctionCount::Exact(4950)).map_err(|e| e.to_string())?;
    let at = |n| delta_two(&BoundInputs::new(n, lid, FunctionCount::Exact(4950), None).unwrap());
    let (d, d_prev) = (at(n), at(n - 1));
    let elapsed = start.elapsed();
    let oracle = ((2.0 * 4950f64).ln() + lid) / (2.0 * 0.05 * 0.05);
    ensure(n == 3683 && n == oracle.ceil() as u64, || format!("n = {n}, oracle {oracle}"))?;
    ensure(d <= 0.05 && d_prev > 0.05, || format!("delta2({n}) = {d}, delta2({}) = {d_prev}", n - 1))?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("n = {n}, delta2 = {d:.6}"))
}

fn topk_fidelity() -> Check {
    let start = Instant::now();
    let planted = [(1, 2, 0.70), (3, 4, 0.55), (5, 6, 0.40), (7, 8, 0.25), (9, 10, 0.10)];
    let spec = SyntheticSpec {
        item_marginals: planted.iter().flat_map(|&(a, b, p)| [(a, p + 0.05), (b, p + 0.05)]).collect(),
        planted_pairs: planted.to_vec(),
        transaction_count: 50_000,
    };
    let ds = generate_synthetic(&spec, 8).map_err(|e| e.to_string())?;
    let observed = ObservedSet::new(planted.iter().map(|&(a, b, _)| Itemset::pair(a, b))).unwrap();

    let mut freqs: Vec<f64> = brute_frequencies(&ds, &observed).into_values().collect();
    freqs.sort_by(|x, y| y.total_cmp(x));
    let min_gap = freqs.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    ensure(min_gap >= 0.1, || format!("realised gap {min_gap}"))?;

    let exact: BTreeSet<Itemset> = exact_top_k(&ds, &observed, 3).unwrap().into_iter().map(|(a, _)| a).collect();
    let correct = (0..50u64)
        .into_par_iter()
        .filter(|&seed| {
            let config = TopKConfig::new(3, 0.05, 0.01, seed).unwrap();
            let r = topk_progressive(&ds, &observed, &config).unwrap();
            r.selected.into_iter().map(|(a, _)| a).collect::<BTreeSet<_>>() == exact
        })
        .count();
    ensure(correct >= 49, || format!("{correct}/50 runs matched the exact top-3"))?;

    // two pairs with exactly equal frequency in disjoint halves of the data
    let tied: Vec<Transaction> = (0..10_000)
        .map(|i| Transaction::new(if i % 2 == 0 { vec![1, 2] } else { vec![3, 4] }))
        .collect();
    let tied = TransactionDataset::new("tied", tied).unwrap();
    let pair_obs = ObservedSet::new([Itemset::pair(1, 2), Itemset::pair(3, 4)]).unwrap();
    let mut tie_n = Vec::new();
    for seed in 0..5 {
        let config = TopKConfig::new(1, 0.05, 0.01, seed).unwrap();
        let r = topk_progressive(&tied, &pair_obs, &config).unwrap();
        ensure(r.stopped_by == StoppedBy::CapReached, || format!("tie seed {seed} stopped by {}", r.stopped_by))?;
        ensure(r.final_n as u64 <= r.cap + 100, || format!("final_n {} > cap {} + 100", r.final_n, r.cap))?;
        tie_n.push(r.final_n);
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!(
        "{correct}/50 exact, min gap {min_gap:.3}; tie hit cap 1199 with final_n {tie_n:?}"
    ))
}

fn son_exactness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..30 {
        let rows = rng.gen_range(20..300);
        let width = rng.gen_range(3..12u32);
        let density = rng.gen_range(0.1..0.7);
        let transactions: Vec<Transaction> = (0..rows)
            .map(|_| Transaction::new((0..width).filter(|_| rng.gen_bool(density)).collect()))
            .collect();
        let ds = TransactionDataset::with_universe("son", transactions, (0..width).collect())
            .map_err(|e| e.to_string())?;
        let threshold = rng.gen_range(0.02..0.6);
        let items: Vec<ItemId> = (0..width).collect();
        let mut expected = Vec::new();
        for a in 0..width {
            for b in a + 1..width {
                let hits = ds.transactions().iter().filter(|t| t.contains(a) && t.contains(b)).count();
                if hits as f64 / rows as f64 >= threshold {
                    expected.push((Itemset::pair(a, b), hits as f64 / rows as f64));
                }
            }
        }
        for chunks in [1, 3, 7] {
            let son = son_frequent_pairs(&ds, threshold, chunks, &items).map_err(|e| e.to_string())?;
            ensure(son.pairs == expected, || {
                format!("case {case}, {chunks} chunks: {} pairs vs {} expected", son.pairs.len(), expected.len())
            })?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60))?;
    Ok("30 datasets x chunks {1, 3, 7} match brute force".into())
}

fn chess_path() -> Option<PathBuf> {
    std::env::var_os("CHESS_DAT")
        .map(PathBuf::from)
        .or_else(|| Some(PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/chess.dat"))))
        .filter(|p| p.is_file())
}

fn chess_row() -> Outcome {
    let Some(path) = chess_path() else {
        return Skip("chess.dat not found (set CHESS_DAT or add tests/data/chess.dat)".into());
    };
    let start = Instant::now();
    let result = load_fimi(&path).and_then(|ds| {
        let n = ds.len();
        run_pipeline(&ds, &EvalConfig::default(), Algorithm::Precomputed).map(|rows| (n, rows))
    });
    let (len, rows) = match result {
        Ok(v) => v,
        Err(e) => return Fail(e.to_string()),
    };
    let elapsed = start.elapsed();
    let mut problems = Vec::new();
    for r in &rows {
        if r.pass2_sample_size != len || r.pass2_sample_size != 3196 {
            problems.push(format!(
                "seed {}: pass 2 used {} of {len} transactions (|Ob| = {})",
                r.trial_seed, r.pass2_sample_size, r.observed_len
            ));
        }
        if r.precision != 1.0 {
            problems.push(format!("seed {}: precision {}", r.trial_seed, r.precision));
        }
    }
    if elapsed > Duration::from_secs(60) {
        problems.push(format!("took {elapsed:?}"));
    }
    if problems.is_empty() {
        Pass(format!("{} trials, whole dataset in pass 2, precision 1.0", rows.len()))
    } else {
        Fail(problems.join("; "))
    }
}

fn main() -> ExitCode {
    let checks: Vec<Criterion> = vec![
        ("bound ordering over the n grid", Box::new(|| wrap(bound_ordering()))),
        ("headline delta1/delta2 values", Box::new(|| wrap(headline_values()))),
        ("delta1/delta2 ratio tends to 2", Box::new(|| wrap(limit_ratio()))),
        ("Rademacher <= Massart and <= w*", Box::new(|| wrap(theorem_ordering()))),
        ("(eps, delta) calibration", Box::new(|| wrap(calibration()))),
        ("sample size formula", Box::new(|| wrap(sample_size_formula()))),
        ("progressive top-k fidelity", Box::new(|| wrap(topk_fidelity()))),
        ("SON exactness", Box::new(|| wrap(son_exactness()))),
        ("chess precomputed row", Box::new(chess_row)),
        (
            "wall-clock and large-dataset runs",
            Box::new(|| Skip("not reproduced by design".into())),
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let (tag, detail) = match check() {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("criterion {:>2} {tag}  {name}: {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn wrap(check: Check) -> Outcome {
    match check {
        Ok(d) => Pass(d),
        Err(d) => Fail(d),
    }
}
