//! Evaluation runs in the shape of the accuracy tables, plus bound curves.
//!
//! cargo run --release --example reproduce_tables [chess.dat]
//!
//! Without an argument a synthetic dataset stands in for the real one.

use itemset_sampler::eval::{log_grid, write_curves_csv, write_eval_csv};
use itemset_sampler::{
    emit_bound_curves, generate_synthetic, load_fimi, run_pipeline, Algorithm, EllRule,
    EvalConfig, FunctionCount, SyntheticSpec,
};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

fn main() -> itemset_sampler::Result<()> {
    let ds = match std::env::args().nth(1) {
        Some(path) => load_fimi(path)?,
        None => generate_synthetic(&SyntheticSpec::load(format!("{DATA}/dense.spec"))?, 0)?,
    };
    let config = EvalConfig {
        trials: 3,
        ..EvalConfig::default()
    };
    let mut rows = run_pipeline(&ds, &config, Algorithm::Precomputed)?;
    rows.extend(run_pipeline(&ds, &config, Algorithm::Progressive)?);
    write_eval_csv(&rows, std::io::stdout())?;
    for r in &rows {
        eprintln!(
            "{} seed {}: |Ob| = {}, pass 1 n = {}, pass 2 n = {}{}",
            r.algorithm,
            r.trial_seed,
            r.observed_len,
            r.pass1_sample_size,
            r.pass2_sample_size,
            if r.pass2_full_dataset { " (whole dataset)" } else { "" }
        );
    }

    println!();
    let curves = emit_bound_curves(
        &log_grid(1_000, 1_000_000, 7),
        1e-4,
        FunctionCount::PowerOfTwo(70),
        FunctionCount::Exact(4950),
        EllRule::SqrtN,
    )?;
    write_curves_csv(&curves, std::io::stdout())?;
    Ok(())
}
