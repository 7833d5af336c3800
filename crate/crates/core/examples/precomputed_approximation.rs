//! (ε, δ)-approximation with the sample size fixed up front.

use itemset_sampler::{
    approximate_all, approximate_observed, exact_frequency, generate_synthetic, ApproxConfig,
    ObservedSet, SyntheticSpec,
};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

fn main() -> itemset_sampler::Result<()> {
    let spec = SyntheticSpec::load(format!("{DATA}/basket.spec"))?;
    let ds = generate_synthetic(&spec, 1)?;
    let config = ApproxConfig::new(0.05, 0.01, 11)?;

    let items: Vec<u32> = ds.item_universe().iter().copied().collect();
    let pairs = ObservedSet::all_pairs(&items)?;
    let r = approximate_observed(&ds, &pairs, &config)?;
    let worst = pairs
        .iter()
        .map(|a| (r.estimates.frequency(a).unwrap() - exact_frequency(&ds, a)).abs())
        .fold(0.0, f64::max);
    println!(
        "{} pairs from {} of {} transactions in {:?}: max error {worst:.4} (ε = 0.05)",
        pairs.len(),
        r.sample_size_used,
        ds.len(),
        r.elapsed
    );
    for (a, f) in r.estimates.top_k(5) {
        println!("  {a:>6}  est {f:.3}  true {:.3}", exact_frequency(&ds, &a));
    }

    // every subset of the first 10 items
    let small = ds.restrict_to_first_items(10);
    let all = approximate_all(&small, &ApproxConfig::new(0.1, 0.01, 11)?)?;
    println!(
        "\n{} itemsets over 10 items from a sample of {}",
        all.estimates.len(),
        all.sample_size_used
    );
    Ok(())
}
