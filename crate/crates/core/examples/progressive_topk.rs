//! Progressive top-k: grow the sample until the k-th and (k+1)-th estimates
//! are confidently separated.

use itemset_sampler::{
    exact_top_k, generate_synthetic, topk_progressive, Itemset, ObservedSet, SyntheticSpec,
    TopKConfig,
};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

fn main() -> itemset_sampler::Result<()> {
    let spec = SyntheticSpec::load(format!("{DATA}/gapped.spec"))?;
    let ds = generate_synthetic(&spec, 3)?;
    let observed = ObservedSet::new(
        spec.planted_pairs.iter().map(|&(a, b, _)| Itemset::pair(a, b)),
    )?;

    let config = TopKConfig::new(3, 0.05, 0.01, 5)?;
    let r = topk_progressive(&ds, &observed, &config)?;
    println!(
        "stopped by {} after {} rounds, n = {} (cap {})",
        r.stopped_by, r.rounds, r.final_n, r.cap
    );
    for (a, f) in &r.selected {
        println!("  {a:>5}  {f:.3}");
    }

    let exact: Vec<Itemset> = exact_top_k(&ds, &observed, 3)?.into_iter().map(|(a, _)| a).collect();
    let got: Vec<Itemset> = r.selected.iter().map(|(a, _)| a.clone()).collect();
    println!("matches exact top-3: {}", got == exact);

    r.write_csv(std::io::stdout())?;
    Ok(())
}
