//! Shared test fixtures. Not part of the public API.

use alloc::vec::Vec;

use crate::domain::VarDomain;
use crate::model::{FreeParams, MarginalTable, MoatModel};
use rand::SeedableRng;

/// The three-variable worked example: weights (2, 6, 3) on pairs (0,1),
/// (0,2), (1,2); marginals p = (0.6, 0.3, 0.5) with (1,1) cells
/// p_01 = 0.1, p_02 = 0.2, p_12 = 0.2. Normalizer Z = 36.
pub fn three_var_example() -> MoatModel {
    let domain = VarDomain::binary(3).unwrap();
    let univariate = alloc::vec![
        alloc::vec![0.4, 0.6],
        alloc::vec![0.7, 0.3],
        alloc::vec![0.5, 0.5],
    ];
    let pairwise = alloc::vec![
        alloc::vec![0.2, 0.2, 0.5, 0.1],
        alloc::vec![0.1, 0.3, 0.4, 0.2],
        alloc::vec![0.4, 0.3, 0.1, 0.2],
    ];
    let table = MarginalTable::new(domain, univariate, pairwise).unwrap();
    debug_assert!(table.validate().is_empty());
    MoatModel::new(alloc::vec![2.0, 6.0, 3.0], table).unwrap()
}

/// A valid model with standard-normal free parameters, deterministic in
/// the seed.
pub fn random_model(cards: &[usize], seed: u64) -> MoatModel {
    let domain = VarDomain::new(cards.to_vec()).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    FreeParams::standard_normal(&domain, &mut rng)
        .realize(&domain)
        .unwrap()
}

/// Strictly positive random weights in pair-index order, deterministic in
/// the seed.
pub fn random_weights(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n * (n - 1) / 2).map(|_| rng.gen_range(lo..hi)).collect()
}
