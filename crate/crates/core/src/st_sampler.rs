//! Spanning-tree sampling with probability proportional to the product of
//! edge weights.
//!
//! Wilson's algorithm: from a fixed root, repeatedly run a random walk with
//! transition probabilities proportional to incident edge weights, erase
//! loops as they close, and graft each loop-erased branch onto the tree.
//! The resulting tree has probability `prod_{e in T} w_e / Z`, matching the
//! mixture weights in the MoAT definition. An exact determinant-based
//! reference sampler lives in [`crate::oracle`].

use alloc::vec::Vec;

use crate::domain::pair_index;
use crate::error::MoatError;
use crate::likelihood::log_weighted_tree_sum;
use crate::math;
use crate::tree::SpanningTree;

/// Checks that the strictly-positive-weight subgraph spans all vertices.
fn positive_connected(n: usize, weights: &[f64]) -> bool {
    let mut reached = alloc::vec![false; n];
    let mut stack = alloc::vec![0usize];
    reached[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if v != u && !reached[v] {
                let (a, b) = if u < v { (u, v) } else { (v, u) };
                if weights[pair_index(n, a, b)] > 0.0 {
                    reached[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
    }
    count == n
}

/// Draws one spanning tree with probability `prod_{e in T} w_e / Z` by
/// Wilson's loop-erased random walk. The walk root is vertex 0, fixed so a
/// given seed yields a reproducible sample stream.
///
/// `weights` are per unordered pair in pair-index order; the
/// strictly-positive subgraph must be connected.
pub fn sample_tree<R: rand::Rng + ?Sized>(
    n: usize,
    weights: &[f64],
    rng: &mut R,
) -> Result<SpanningTree, MoatError> {
    if weights.len() != n * (n - 1) / 2 {
        return Err(MoatError::ShapeMismatch("weight count".into()));
    }
    if !positive_connected(n, weights) {
        return Err(MoatError::DisconnectedGraph);
    }

    let weight = |u: usize, v: usize| -> f64 {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        weights[pair_index(n, a, b)]
    };

    let mut in_tree = alloc::vec![false; n];
    let mut next = alloc::vec![usize::MAX; n];
    in_tree[0] = true;

    for start in 1..n {
        // random walk until the current tree is hit; `next` implicitly
        // erases loops because revisits overwrite the old successor
        let mut u = start;
        while !in_tree[u] {
            let total: f64 = (0..n).map(|v| if v == u { 0.0 } else { weight(u, v) }).sum();
            let mut r = rng.gen::<f64>() * total;
            let mut chosen = usize::MAX;
            for v in 0..n {
                if v == u {
                    continue;
                }
                let w = weight(u, v);
                if w <= 0.0 {
                    continue;
                }
                chosen = v;
                r -= w;
                if r < 0.0 {
                    break;
                }
            }
            next[u] = chosen;
            u = chosen;
        }
        let mut v = start;
        while !in_tree[v] {
            in_tree[v] = true;
            v = next[v];
        }
    }

    let edges: Vec<(usize, usize)> =
        (1..n).map(|v| (v, next[v])).collect();
    SpanningTree::new(n, edges)
}

/// `log Pr(T)` under the spanning-tree distribution:
/// `sum_{e in T} ln w_e - ln Z`. A zero-weight edge gives `-inf`.
pub fn exact_tree_log_prob(n: usize, weights: &[f64], tree: &SpanningTree) -> f64 {
    let mut acc = 0.0;
    for &(u, v) in tree.edges() {
        let w = weights[pair_index(n, u, v)];
        if w <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += math::ln(w);
    }
    acc - log_weighted_tree_sum(n, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn k3_trees() -> [SpanningTree; 3] {
        [
            SpanningTree::new(3, alloc::vec![(0, 1), (0, 2)]).unwrap(),
            SpanningTree::new(3, alloc::vec![(0, 1), (1, 2)]).unwrap(),
            SpanningTree::new(3, alloc::vec![(0, 2), (1, 2)]).unwrap(),
        ]
    }

    #[test]
    fn uniform_k3_draws_each_tree_a_third_of_the_time() {
        let weights = [1.0, 1.0, 1.0];
        let trees = k3_trees();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; 3];
        let draws = 30_000;
        for _ in 0..draws {
            let t = sample_tree(3, &weights, &mut rng).unwrap();
            let i = trees.iter().position(|c| c == &t).unwrap();
            counts[i] += 1;
        }
        for &c in &counts {
            assert!((c as f64 / draws as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn worked_example_weights_give_known_tree_probabilities() {
        // weights 2, 6, 3 on pairs (0,1), (0,2), (1,2): tree products
        // 12, 6, 18 over Z = 36
        let weights = [2.0, 6.0, 3.0];
        let trees = k3_trees();
        let expect = [12.0 / 36.0, 6.0 / 36.0, 18.0 / 36.0];
        for (t, &p) in trees.iter().zip(&expect) {
            let lp = exact_tree_log_prob(3, &weights, t);
            assert!((lp.exp() - p).abs() < 1e-12);
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0usize; 3];
        let draws = 60_000;
        for _ in 0..draws {
            let t = sample_tree(3, &weights, &mut rng).unwrap();
            counts[trees.iter().position(|c| c == &t).unwrap()] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 / draws as f64 - expect[i]).abs() < 0.01,
                "tree {i}: {c} of {draws}"
            );
        }
    }

    #[test]
    fn uniform_weights_give_cayley_probability() {
        let n = 5;
        let weights = alloc::vec![1.0; 10];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let t = sample_tree(n, &weights, &mut rng).unwrap();
        let lp = exact_tree_log_prob(n, &weights, &t);
        assert!((lp + 125.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_edge_in_tree_has_log_prob_neg_inf() {
        let weights = [0.0, 1.0, 1.0];
        let t = SpanningTree::new(3, alloc::vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(exact_tree_log_prob(3, &weights, &t), f64::NEG_INFINITY);
    }

    #[test]
    fn disconnected_positive_subgraph_is_rejected() {
        // only edge (0,1) positive: vertex 2 unreachable
        let weights = [1.0, 0.0, 0.0];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            sample_tree(3, &weights, &mut rng),
            Err(MoatError::DisconnectedGraph)
        ));
    }

    #[test]
    fn power_of_two_rescaling_reproduces_the_same_stream() {
        // transition scans compare r * total against partial sums; scaling
        // by 2^k is exact in binary floating point, so the draw sequence is
        // bitwise identical
        let weights = [0.7, 2.3, 1.1, 0.4, 1.9, 0.8];
        let scaled: Vec<f64> = weights.iter().map(|w| w * 4.0).collect();
        let mut rng_a = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut rng_b = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2_000 {
            let a = sample_tree(4, &weights, &mut rng_a).unwrap();
            let b = sample_tree(4, &scaled, &mut rng_b).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn walks_avoid_zero_weight_edges() {
        // positive subgraph is the path 0-1-2: the only spanning tree
        let weights = [1.0, 0.0, 1.0];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let t = sample_tree(3, &weights, &mut rng).unwrap();
            assert_eq!(t.edges(), &[(0, 1), (1, 2)]);
        }
    }
}
