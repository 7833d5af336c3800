//! Exact support counting and merging of per-segment partial counts.

use itemset_sampler::{
    exact_frequencies, exact_top_k, load_fimi, merge_partial_counts, phi, Itemset, ObservedSet,
    PartialCounts,
};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

fn main() -> itemset_sampler::Result<()> {
    let ds = load_fimi(format!("{DATA}/tiny.dat"))?;
    let observed = ObservedSet::load(format!("{DATA}/tiny_pairs.txt"))?;

    let a: Itemset = "1+2".parse()?;
    let hits = ds.transactions().iter().filter(|t| phi(&a, t)).count();
    println!("{a} occurs in {hits} of {} transactions", ds.len());

    let exact = exact_frequencies(&ds, &observed);
    for (itemset, f) in exact.ranked() {
        println!("  {itemset:>5}  {f:.3}");
    }

    // counting two halves separately gives the same answer
    let (left, right) = ds.transactions().split_at(3);
    let merged = merge_partial_counts(
        PartialCounts::count(&observed, left),
        PartialCounts::count(&observed, right),
    )?;
    let merged = merged.into_estimates(true).expect("non-empty");
    assert_eq!(merged, exact);

    println!("top 2:");
    for (itemset, f) in exact_top_k(&ds, &observed, 2)? {
        println!("  {itemset}  {f:.3}");
    }
    Ok(())
}
