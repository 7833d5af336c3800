//! Load a FIMI file, generate a synthetic dataset and draw seeded samples.
//!
//! cargo run --example load_and_sample [path/to/file.dat]

use itemset_sampler::{draw_sample, generate_synthetic, load_fimi, Sampler, SyntheticSpec};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

fn main() -> itemset_sampler::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{DATA}/tiny.dat"));
    let ds = load_fimi(&path)?;
    println!(
        "{}: {} transactions over {} items",
        ds.source_name(),
        ds.len(),
        ds.item_universe().len()
    );
    for t in ds.transactions().iter().take(3) {
        println!("  {t}");
    }

    let spec = SyntheticSpec::load(format!("{DATA}/basket.spec"))?;
    let synth = generate_synthetic(&spec, 42)?;
    println!("synthetic: {} transactions", synth.len());

    // same seed, same sample
    let a = draw_sample(&synth, 5, 7, true)?;
    let b = draw_sample(&synth, 5, 7, true)?;
    assert_eq!(a.source_indices(), b.source_indices());
    println!("with replacement:    {:?}", a.source_indices());

    let c = draw_sample(&synth, 5, 7, false)?;
    println!("without replacement: {:?}", c.source_indices());

    // progressive draws walk one permutation until it runs out
    let mut sampler = Sampler::new(&ds, 3, false);
    while sampler.remaining() != Some(0) {
        let batch = sampler.draw(3);
        println!("batch {:?}, {:?} left", batch.source_indices(), sampler.remaining());
    }

    let restricted = synth.restrict_to_first_items(5);
    println!(
        "restricted to items {:?}, still {} transactions",
        restricted.item_universe(),
        restricted.len()
    );
    Ok(())
}
