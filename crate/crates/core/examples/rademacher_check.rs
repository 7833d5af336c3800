//! Exact Rademacher average of a small sample against the Massart and w* bounds.

use itemset_sampler::{
    delta_one_prime, exact_rademacher, log_inv_delta, massart_bound, massart_ell, minimize_w,
    BoundInputs, FunctionCount, ObservedSet, Sample, Transaction,
};

fn main() -> itemset_sampler::Result<()> {
    let rows: [&[u32]; 10] = [
        &[1, 2], &[1, 2, 3], &[2], &[1, 3], &[1, 2],
        &[3], &[1, 2, 3], &[2, 3], &[1], &[1, 2],
    ];
    let sample = Sample::from_transactions(rows.iter().map(|r| Transaction::new(r.to_vec())).collect());
    let observed = ObservedSet::all_pairs(&[1, 2, 3])?;
    let n = sample.len() as u64;

    let exact = exact_rademacher(&sample, &observed)?;
    let ell = massart_ell(&sample, &observed)?;
    let massart = massart_bound(ell, n, FunctionCount::Exact(observed.len() as u64));
    let (s_star, w_star) = minimize_w(&sample, &observed)?;

    println!("exact R(S)     = {exact:.5}");
    println!("Massart bound  = {massart:.5}  (ℓ = {ell:.3})");
    println!("w(s*)          = {w_star:.5}  (s* = {s_star:.3})");
    assert!(exact <= massart && exact <= w_star + 1e-9);

    let inputs = BoundInputs::new(n, log_inv_delta(0.05)?, FunctionCount::Exact(3), Some(ell))?;
    println!("Δ1' at δ = 0.05 = {:.4}", delta_one_prime(&inputs, w_star));
    Ok(())
}
