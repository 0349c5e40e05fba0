//! Shared helpers for the integration suites.
#![allow(dead_code)] // each test target compiles its own copy

use std::io::Write;
use std::path::Path;

use moat_core::domain::Evidence;
use moat_core::math::subseed;
use moat_core::model::MoatModel;
use moat_core::st_sampler::sample_tree;
use moat_core::tree::tree_conditional_sample;
use rand::SeedableRng;

/// Draws `rows` full samples from a model (tree, then tree-conditional).
pub fn sample_rows(model: &MoatModel, rows: usize, seed: u64) -> Vec<usize> {
    let n = model.domain().n();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let empty = Evidence::empty();
    let mut out = Vec::with_capacity(rows * n);
    for _ in 0..rows {
        let tree = sample_tree(n, model.weights(), &mut rng).unwrap();
        let x = tree_conditional_sample(&tree, model.table(), &empty, &mut rng).unwrap();
        out.extend(x);
    }
    out
}

/// Writes one split file in the benchmark's comma-separated layout.
pub fn write_split(dir: &Path, name: &str, suffix: &str, flat: &[usize], n_cols: usize) {
    let path = dir.join(format!("{name}.{suffix}"));
    let mut f = std::fs::File::create(path).unwrap();
    for row in flat.chunks_exact(n_cols) {
        let line: Vec<String> = row.iter().map(usize::to_string).collect();
        writeln!(f, "{}", line.join(",")).unwrap();
    }
}

/// Materializes a train/valid/test triple sampled from a ground-truth
/// model, and returns the per-split row counts used.
pub fn write_synthetic_triple(
    dir: &Path,
    name: &str,
    model: &MoatModel,
    rows: (usize, usize, usize),
    seed: u64,
) {
    let n = model.domain().n();
    for (split, count, stream) in [
        ("ts.data", rows.0, 1u64),
        ("valid.data", rows.1, 2),
        ("test.data", rows.2, 3),
    ] {
        let flat = sample_rows(model, count, subseed(seed, stream));
        write_split(dir, name, split, &flat, n);
    }
}
