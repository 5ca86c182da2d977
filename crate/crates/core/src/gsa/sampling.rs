//! Latin-hypercube designs with per-dimension random streams.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::UncertainParameter;

/// `n` stratified samples in physical units, one row per sample.
///
/// Dimension `i` of design `design_id` draws from ChaCha stream
/// `(design_id << 32) | i`, so adding parameters never perturbs the
/// columns of existing ones.
pub fn latin_hypercube(params: &[UncertainParameter], n: usize, seed: u64, design_id: u32) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; params.len()]; n];
    for (i, p) in params.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((u64::from(design_id) << 32) | i as u64);
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        for (row, &k) in rows.iter_mut().zip(&strata) {
            let u = (k as f64 + rng.random::<f64>()) / n as f64;
            row[i] = if p.lo == p.hi { p.lo } else { p.lo + u * (p.hi - p.lo) };
        }
    }
    rows
}

/// Sample count for a fit with `basis` terms: twice the basis, at least 50.
pub fn default_sample_count(basis: usize) -> usize {
    (2 * basis).max(50)
}
