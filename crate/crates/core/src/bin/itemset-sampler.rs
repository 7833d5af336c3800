//! Command-line front end. Every subcommand writes CSV to `--out` or stdout.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use itemset_sampler::bounds::{delta_one, delta_one_prime, delta_two, BoundInputs, FunctionCount};
use itemset_sampler::eval::{log_grid, write_curves_csv, write_eval_csv};
use itemset_sampler::{
    approximate_observed, build_observed_pairs, emit_bound_curves, generate_synthetic, load_fimi,
    run_pipeline, topk_progressive, Algorithm, ApproxConfig, CandidatePipelineConfig, EllRule,
    Error, EvalConfig, ObservedSet, Result, SyntheticSpec, TopKConfig,
};

#[derive(Parser)]
#[command(name = "itemset-sampler", version, about = "Sampling-based itemset frequency estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deviation bounds for a single sample size.
    Bounds(BoundsArgs),
    /// Deviation bounds over a log-spaced grid of sample sizes.
    BoundsSweep(SweepArgs),
    /// Estimate observed itemset frequencies with a precomputed sample size.
    Approx(ApproxArgs),
    /// Progressive top-k selection over an observed family.
    Topk(TopkArgs),
    /// Threshold pass plus SON pair mining.
    Candidates(CandidatesArgs),
    /// Run the evaluation pipelines against the exact top-k.
    Eval(EvalArgs),
    /// Δ1 and Δ2 curves for two function counts.
    Curves(CurvesArgs),
    /// Write a synthetic FIMI dataset from a spec file.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct DeltaArgs {
    /// Failure probability.
    #[arg(long, conflicts_with = "log_inv_delta")]
    delta: Option<f64>,
    /// ln(1/δ), for δ too small to represent.
    #[arg(long)]
    log_inv_delta: Option<f64>,
}

impl DeltaArgs {
    fn resolve(&self, default: f64) -> Result<f64> {
        match (self.delta, self.log_inv_delta) {
            (_, Some(l)) => Ok(l),
            (Some(d), None) => itemset_sampler::log_inv_delta(d),
            (None, None) => itemset_sampler::log_inv_delta(default),
        }
    }
}

#[derive(Args)]
struct CountArgs {
    /// Number of functions: an integer or `2^e`.
    #[arg(long, value_parser = parse_count, conflicts_with = "items")]
    count: Option<FunctionCount>,
    /// Item universe size; the count becomes 2^items.
    #[arg(long)]
    items: Option<u32>,
}

impl CountArgs {
    fn resolve(&self) -> Result<FunctionCount> {
        match (self.count, self.items) {
            (Some(c), _) => Ok(c),
            (None, Some(i)) => Ok(FunctionCount::PowerOfTwo(i)),
            (None, None) => Err(Error::InvalidArgument("one of --count or --items is required".into())),
        }
    }
}

fn parse_count(s: &str) -> std::result::Result<FunctionCount, String> {
    if let Some(e) = s.strip_prefix("2^") {
        e.parse().map(FunctionCount::PowerOfTwo).map_err(|e| format!("{e}"))
    } else {
        s.parse().map(FunctionCount::Exact).map_err(|e| format!("{e}"))
    }
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    delta: DeltaArgs,
    #[command(flatten)]
    count: CountArgs,
    /// Largest indicator l2 norm; Δ1 is left blank without it.
    #[arg(long)]
    ell: Option<f64>,
    /// Minimized w value; Δ1′ is left blank without it.
    #[arg(long)]
    w_star: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1000)]
    n_min: u64,
    #[arg(long, default_value_t = 1_000_000)]
    n_max: u64,
    #[arg(long, default_value_t = 31)]
    points: usize,
    #[command(flatten)]
    delta: DeltaArgs,
    #[command(flatten)]
    count: CountArgs,
    /// Fixed ℓ; defaults to sqrt(n) at each point.
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ApproxArgs {
    #[arg(long)]
    input: PathBuf,
    /// One itemset per line, ids separated by spaces.
    #[arg(long)]
    observed: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TopkArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    observed: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    batch: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Walk a random permutation instead of drawing with replacement.
    #[arg(long)]
    without_replacement: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CandidatesArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    chunks: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep only the given number of smallest item ids first.
    #[arg(long)]
    item_limit: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoChoice {
    Precomputed,
    Progressive,
    Both,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgoChoice::Both)]
    algo: AlgoChoice,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 70)]
    item_limit: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    batch: usize,
    /// Comma-separated trial seeds; overrides --trials.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 8)]
    chunks: usize,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long, default_value_t = 1000)]
    n_min: u64,
    #[arg(long, default_value_t = 1_000_000)]
    n_max: u64,
    #[arg(long, default_value_t = 31)]
    points: usize,
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    #[arg(long, value_parser = parse_count, default_value = "2^70")]
    count_a: FunctionCount,
    #[arg(long, value_parser = parse_count, default_value = "2^70")]
    count_b: FunctionCount,
    /// Fixed ℓ; defaults to sqrt(n).
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn bound_row(inputs: &BoundInputs, w_star: Option<f64>) -> [String; 7] {
    [
        inputs.n.to_string(),
        inputs.log_inv_delta.to_string(),
        inputs.function_count.to_string(),
        fmt_opt(inputs.ell),
        fmt_opt(delta_one(inputs).ok()),
        fmt_opt(w_star.map(|w| delta_one_prime(inputs, w))),
        delta_two(inputs).to_string(),
    ]
}

const BOUND_HEADER: [&str; 7] = ["n", "log_inv_delta", "count", "ell", "delta1", "delta1_prime", "delta2"];

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bounds(a) => {
            let inputs = BoundInputs::new(a.n, a.delta.resolve(0.01)?, a.count.resolve()?, a.ell)?;
            let mut w = csv::Writer::from_writer(output(&a.out)?);
            w.write_record(BOUND_HEADER)?;
            w.write_record(bound_row(&inputs, a.w_star))?;
            w.flush().map_err(|e| Error::io("csv output", e))?;
        }
        Command::BoundsSweep(a) => {
            let lid = a.delta.resolve(0.01)?;
            let count = a.count.resolve()?;
            let mut w = csv::Writer::from_writer(output(&a.out)?);
            w.write_record(BOUND_HEADER)?;
            for n in log_grid(a.n_min, a.n_max, a.points) {
                let ell = a.ell.unwrap_or((n as f64).sqrt());
                w.write_record(bound_row(&BoundInputs::new(n, lid, count, Some(ell))?, None))?;
            }
            w.flush().map_err(|e| Error::io("csv output", e))?;
        }
        Command::Approx(a) => {
            let ds = load_fimi(&a.input)?;
            let observed = ObservedSet::load(&a.observed)?;
            let r = approximate_observed(&ds, &observed, &ApproxConfig::new(a.epsilon, a.delta, a.seed)?)?;
            let mut out = output(&a.out)?;
            r.estimates.write_csv(&mut out)?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["n", "elapsed_sec", "full_dataset"])?;
            w.write_record([
                r.sample_size_used.to_string(),
                format!("{:.6}", r.elapsed.as_secs_f64()),
                r.full_dataset_used.to_string(),
            ])?;
            w.flush().map_err(|e| Error::io("csv output", e))?;
        }
        Command::Topk(a) => {
            let ds = load_fimi(&a.input)?;
            let observed = ObservedSet::load(&a.observed)?;
            let mut config = TopKConfig::new(a.k, a.epsilon, a.delta, a.seed)?.with_batch_size(a.batch);
            config.replacement = !a.without_replacement;
            let r = topk_progressive(&ds, &observed, &config)?;
            log::info!("top-k stopped by {} after {} rounds", r.stopped_by, r.rounds);
            r.write_csv(output(&a.out)?)?;
        }
        Command::Candidates(a) => {
            let mut ds = load_fimi(&a.input)?;
            if let Some(limit) = a.item_limit {
                ds = ds.restrict_to_first_items(limit);
            }
            let mut config = CandidatePipelineConfig::new(a.k, a.epsilon, a.delta, a.seed)?;
            config.chunk_count = a.chunks;
            build_observed_pairs(&ds, &config)?.write_csv(output(&a.out)?)?;
        }
        Command::Eval(a) => {
            let ds = load_fimi(&a.input)?;
            let config = EvalConfig {
                trials: a.trials,
                k: a.k,
                item_limit: a.item_limit,
                epsilon: a.epsilon,
                delta: a.delta,
                batch: a.batch,
                chunk_count: a.chunks,
                seeds: a.seeds,
                cache_dir: a.cache_dir,
            };
            let restricted: Vec<_> = ds.item_universe().iter().take(a.item_limit).collect();
            if let (Some(lo), Some(hi)) = (restricted.first(), restricted.last()) {
                eprintln!(
                    "# item restriction: {} smallest ids ({lo}..={hi})",
                    restricted.len()
                );
            }
            let algos: &[Algorithm] = match a.algo {
                AlgoChoice::Precomputed => &[Algorithm::Precomputed],
                AlgoChoice::Progressive => &[Algorithm::Progressive],
                AlgoChoice::Both => &[Algorithm::Precomputed, Algorithm::Progressive],
            };
            let mut rows = Vec::new();
            for &algo in algos {
                rows.extend(run_pipeline(&ds, &config, algo)?);
            }
            write_eval_csv(&rows, output(&a.out)?)?;
        }
        Command::Curves(a) => {
            let rule = a.ell.map_or(EllRule::SqrtN, EllRule::Fixed);
            let grid = log_grid(a.n_min, a.n_max, a.points);
            let rows = emit_bound_curves(&grid, a.delta, a.count_a, a.count_b, rule)?;
            write_curves_csv(&rows, output(&a.out)?)?;
        }
        Command::Generate(a) => {
            let spec = SyntheticSpec::load(&a.spec)?;
            let ds = generate_synthetic(&spec, a.seed)?;
            let mut out = output(&a.out)?;
            ds.write_fimi(&mut out)
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("fimi output", e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
