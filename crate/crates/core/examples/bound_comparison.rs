//! Compare the Rademacher-based bound Δ1 with the Hoeffding/union bound Δ2.

use itemset_sampler::{
    delta_one, delta_two, log_inv_delta, required_sample_size, BoundInputs, FunctionCount,
};

fn main() -> itemset_sampler::Result<()> {
    // 1000 items, so 2^1000 candidate itemsets
    let n = 100_000;
    let inputs = BoundInputs::new(
        n,
        log_inv_delta(0.01)?,
        FunctionCount::PowerOfTwo(1000),
        Some((n as f64).sqrt()),
    )?;
    println!("n = {n}, δ = 0.01, |I| = 1000");
    println!("  Δ1 = {:.4}", delta_one(&inputs)?);
    println!("  Δ2 = {:.4}", delta_two(&inputs));

    println!("\n{:>8} {:>10} {:>10}", "n", "Δ1", "Δ2");
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let i = BoundInputs::new(n, log_inv_delta(1e-4)?, FunctionCount::PowerOfTwo(70), Some((n as f64).sqrt()))?;
        println!("{n:>8} {:>10.5} {:>10.5}", delta_one(&i)?, delta_two(&i));
    }

    // the ratio tends to 2 as δ shrinks
    println!("\nratio Δ1/Δ2 at n = 100, 2^10 functions:");
    for exp in [10.0, 100.0, 10_000.0] {
        let lid = exp * std::f64::consts::LN_10;
        let i = BoundInputs::new(100, lid, FunctionCount::PowerOfTwo(10), Some(10.0))?;
        println!("  δ = 1e-{exp:<6} {:.4}", delta_one(&i)? / delta_two(&i));
    }

    let n = required_sample_size(0.05, log_inv_delta(1e-4)?, FunctionCount::Exact(4950))?;
    println!("\nall pairs of 100 items at ε = 0.05, δ = 1e-4 need {n} transactions");
    Ok(())
}
