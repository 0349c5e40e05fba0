//! Brute-force reference implementations and executable hardness gadgets.
//!
//! Everything here trades scale for transparency: spanning trees are
//! enumerated explicitly, likelihoods are summed over trees, posteriors and
//! MAP states over assignments. These are the correctness anchors for the
//! determinant, message-passing, and sampling fast paths at small `n`.
//!
//! Two constructions from the hardness analysis are built as runnable
//! computations: the signed-marginal gadget whose semiring queries count
//! spanning trees by leaf set, and the three-coloring gadget whose MAP
//! probability hits `1/(3 * 2^(n-1))` exactly on 3-colorable graphs.

use alloc::vec::Vec;

use crate::domain::{pair_index, pairs, Evidence, VarDomain};
use crate::error::MoatError;
use crate::inference::PosteriorEstimate;
use crate::likelihood::{log_weighted_tree_sum, raw_semiring_sum, RawMoat};
use crate::math;
use crate::model::{MarginalTable, MoatModel};
use crate::tree::{tree_log_likelihood, SpanningTree};

/// Enumeration is capped at this many vertices.
pub const MAX_ENUMERATION_VERTICES: usize = 9;
/// Brute likelihood/posterior caps.
const MAX_BRUTE_VERTICES: usize = 8;
/// Exhaustive MAP cap on the number of assignments.
const MAX_MAP_STATES: usize = 1_000_000;

/// A simple undirected graph over vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    present: Vec<bool>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, MoatError> {
        if n < 2 {
            return Err(MoatError::ShapeMismatch("graph needs >= 2 vertices".into()));
        }
        let mut present = alloc::vec![false; n * (n - 1) / 2];
        for &(a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(MoatError::ShapeMismatch("bad edge".into()));
            }
            present[pair_index(n, a.min(b), a.max(b))] = true;
        }
        Ok(Graph { n, present })
    }

    pub fn complete(n: usize) -> Self {
        Graph { n, present: alloc::vec![true; n * (n - 1) / 2] }
    }

    /// Edges of the strictly positive entries of a pair-indexed weight
    /// vector.
    pub fn from_positive_weights(n: usize, weights: &[f64]) -> Self {
        Graph { n, present: weights.iter().map(|&w| w > 0.0).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.present[pair_index(self.n, u.min(v), u.max(v))]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        pairs(self.n)
            .filter(|&(u, v)| self.has_edge(u, v))
            .collect()
    }

    /// 0/1 weights in pair-index order.
    pub fn unit_weights(&self) -> Vec<f64> {
        self.present.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect()
    }

    pub fn is_connected(&self) -> bool {
        let mut reached = alloc::vec![false; self.n];
        reached[0] = true;
        let mut stack = alloc::vec![0usize];
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for v in 0..self.n {
                if v != u && !reached[v] && self.has_edge(u, v) {
                    reached[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// Every labeled connected graph on `n` vertices, in ascending order of
    /// the edge-set bitmask.
    pub fn all_connected(n: usize) -> Vec<Graph> {
        let m = n * (n - 1) / 2;
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << m) {
            let present: Vec<bool> = (0..m).map(|i| mask >> i & 1 == 1).collect();
            let g = Graph { n, present };
            if g.is_connected() {
                out.push(g);
            }
        }
        out
    }
}

/// All spanning trees of the graph, each exactly once, in a deterministic
/// order, by recursive edge contraction/deletion over the canonical edge
/// ordering.
pub fn enumerate_spanning_trees(graph: &Graph) -> Result<Vec<SpanningTree>, MoatError> {
    let n = graph.n();
    if n > MAX_ENUMERATION_VERTICES {
        return Err(MoatError::DomainTooLarge { limit: MAX_ENUMERATION_VERTICES, requested: n });
    }
    if !graph.is_connected() {
        return Err(MoatError::DisconnectedGraph);
    }
    let edges = graph.edges();
    let mut out = Vec::new();
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(n - 1);
    let uf: Vec<usize> = (0..n).collect();
    recurse_trees(n, &edges, 0, uf, &mut chosen, &mut out);
    Ok(out)
}

fn uf_find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// True if the components of `uf` can still be joined using `edges[from..]`.
fn can_still_connect(n: usize, uf: &[usize], edges: &[(usize, usize)], from: usize) -> bool {
    let mut probe = uf.to_vec();
    let mut components = {
        let mut c = 0;
        for v in 0..n {
            if uf_find(&mut probe, v) == v {
                c += 1;
            }
        }
        c
    };
    for &(u, v) in &edges[from..] {
        let (ru, rv) = (uf_find(&mut probe, u), uf_find(&mut probe, v));
        if ru != rv {
            probe[ru] = rv;
            components -= 1;
            if components == 1 {
                return true;
            }
        }
    }
    components == 1
}

fn recurse_trees(
    n: usize,
    edges: &[(usize, usize)],
    idx: usize,
    mut uf: Vec<usize>,
    chosen: &mut Vec<(usize, usize)>,
    out: &mut Vec<SpanningTree>,
) {
    if chosen.len() == n - 1 {
        out.push(SpanningTree::new(n, chosen.clone()).expect("chosen edges form a tree"));
        return;
    }
    if idx == edges.len() {
        return;
    }
    let (u, v) = edges[idx];
    let (ru, rv) = (uf_find(&mut uf, u), uf_find(&mut uf, v));
    if ru == rv {
        // cycle edge: exclusion is forced
        recurse_trees(n, edges, idx + 1, uf, chosen, out);
        return;
    }
    // include (contract)
    let mut uf_inc = uf.clone();
    uf_inc[ru] = rv;
    chosen.push((u, v));
    recurse_trees(n, edges, idx + 1, uf_inc, chosen, out);
    chosen.pop();
    // exclude (delete), only if a spanning tree remains reachable
    if can_still_connect(n, &uf, edges, idx + 1) {
        recurse_trees(n, edges, idx + 1, uf, chosen, out);
    }
}

/// `sum_T prod_{e in T} w_e` by explicit enumeration (linear space).
pub fn brute_partition(n: usize, weights: &[f64]) -> Result<f64, MoatError> {
    let graph = Graph::from_positive_weights(n, weights);
    let trees = enumerate_spanning_trees(&graph)?;
    Ok(trees
        .iter()
        .map(|t| t.edges().iter().map(|&(u, v)| weights[pair_index(n, u, v)]).product::<f64>())
        .sum())
}

/// `Pr_MoAT(x)` as `(1/Z) sum_T (prod w_e) Pr_T(x)` by direct enumeration.
pub fn brute_likelihood(model: &MoatModel, x: &[usize]) -> Result<f64, MoatError> {
    let n = model.domain().n();
    if n > MAX_BRUTE_VERTICES {
        return Err(MoatError::DomainTooLarge { limit: MAX_BRUTE_VERTICES, requested: n });
    }
    let graph = Graph::from_positive_weights(n, model.weights());
    let trees = enumerate_spanning_trees(&graph)?;
    brute_likelihood_given(model, x, &trees)
}

fn tree_weight(model: &MoatModel, t: &SpanningTree) -> f64 {
    t.edges()
        .iter()
        .map(|&(u, v)| model.weights()[pair_index(model.domain().n(), u, v)])
        .product()
}

fn brute_likelihood_given(
    model: &MoatModel,
    x: &[usize],
    trees: &[SpanningTree],
) -> Result<f64, MoatError> {
    let mut z = 0.0;
    let mut acc = 0.0;
    for t in trees {
        let w = tree_weight(model, t);
        z += w;
        let lp = tree_log_likelihood(t, model.table(), x)?;
        if lp > f64::NEG_INFINITY {
            acc += w * math::exp(lp);
        }
    }
    Ok(acc / z)
}

/// Exact posterior marginals `P(X_i | e)` by summing [`brute_likelihood`]
/// over all completions of the evidence.
pub fn brute_posterior(
    model: &MoatModel,
    evidence: &Evidence,
) -> Result<PosteriorEstimate, MoatError> {
    let domain = model.domain();
    let n = domain.n();
    if n > MAX_BRUTE_VERTICES {
        return Err(MoatError::DomainTooLarge { limit: MAX_BRUTE_VERTICES, requested: n });
    }
    let graph = Graph::from_positive_weights(n, model.weights());
    let trees = enumerate_spanning_trees(&graph)?;
    let free = evidence.free_variables(domain);
    let mut mass: Vec<Vec<f64>> =
        free.iter().map(|&v| alloc::vec![0.0; domain.cardinality(v)]).collect();
    let mut z = 0.0;
    let mut err = None;
    evidence.for_each_completion(domain, |x| {
        if err.is_some() {
            return;
        }
        match brute_likelihood_given(model, x, &trees) {
            Ok(p) => {
                z += p;
                for (i, &v) in free.iter().enumerate() {
                    mass[i][x[v]] += p;
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    if z <= 0.0 {
        return Err(MoatError::ZeroProbabilityEvidence);
    }
    for m in &mut mass {
        for p in m.iter_mut() {
            *p /= z;
        }
    }
    PosteriorEstimate::new(free, mass, 0, f64::INFINITY)
}

/// Exhaustive MAP state: the lexicographically smallest maximizer of
/// [`brute_likelihood`], with its probability.
pub fn brute_map(model: &MoatModel) -> Result<(Vec<usize>, f64), MoatError> {
    let domain = model.domain();
    match domain.state_count() {
        Some(states) if states <= MAX_MAP_STATES => {}
        states => {
            return Err(MoatError::DomainTooLarge {
                limit: MAX_MAP_STATES,
                requested: states.unwrap_or(usize::MAX),
            })
        }
    }
    let graph = Graph::from_positive_weights(domain.n(), model.weights());
    let trees = enumerate_spanning_trees(&graph)?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut err = None;
    domain.for_each_assignment(|x| {
        if err.is_some() {
            return;
        }
        match brute_likelihood_given(model, x, &trees) {
            Ok(p) => {
                // lexicographic iteration order + strict inequality keeps
                // the smallest maximizer
                if best.as_ref().is_none_or(|(_, bp)| p > *bp) {
                    best = Some((x.to_vec(), p));
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    best.ok_or(MoatError::EmptyData)
}

/// The three-coloring MAP gadget: ternary variables, unit weights on the
/// graph's edges, uniform univariates, and pairwise mass 1/6 exactly off
/// the diagonal. Its MAP probability attains `1/(3 * 2^(n-1))` iff the
/// graph is 3-colorable.
pub fn map_hardness_gadget(graph: &Graph) -> Result<MoatModel, MoatError> {
    if !graph.is_connected() {
        return Err(MoatError::DisconnectedGraph);
    }
    let n = graph.n();
    let domain = VarDomain::new(alloc::vec![3; n])?;
    let univariate = alloc::vec![alloc::vec![1.0 / 3.0; 3]; n];
    let off = 1.0 / 6.0;
    let pair_matrix = alloc::vec![
        0.0, off, off, //
        off, 0.0, off, //
        off, off, 0.0,
    ];
    let pairwise = alloc::vec![pair_matrix; domain.pair_count()];
    let table = MarginalTable::new(domain, univariate, pairwise)?;
    MoatModel::new(graph.unit_weights(), table)
}

/// The MAP probability a 3-colorable graph attains: `1/(3 * 2^(n-1))`.
pub fn colorable_map_probability(n: usize) -> f64 {
    1.0 / (3.0 * math::exp((n as f64 - 1.0) * math::ln(2.0)))
}

/// Direct search for a proper 3-coloring; independent of the gadget.
pub fn is_three_colorable(graph: &Graph) -> bool {
    let n = graph.n();
    let edges = graph.edges();
    let mut color = alloc::vec![0usize; n];
    loop {
        if edges.iter().all(|&(u, v)| color[u] != color[v]) {
            return true;
        }
        let mut i = n;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            color[i] += 1;
            if color[i] < 3 {
                break;
            }
            color[i] = 0;
        }
    }
}

/// The signed-marginal gadget: binary variables with `P_v(0) = eps`,
/// `P_v(1) = -1`, pairwise `(0,0) = eps`, `(1,1) = 0`, mixed `= -eps`, and
/// 0/1 edge weights. Evaluations count spanning trees by leaf set.
pub fn leafcount_gadget(graph: &Graph, eps: f64) -> Result<RawMoat, MoatError> {
    if !graph.is_connected() {
        return Err(MoatError::DisconnectedGraph);
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(MoatError::ShapeMismatch("eps must lie in (0, 1)".into()));
    }
    let n = graph.n();
    let domain = VarDomain::binary(n)?;
    let univariate = alloc::vec![alloc::vec![eps, -1.0]; n];
    let pair_matrix = alloc::vec![eps, -eps, -eps, 0.0];
    let pairwise = alloc::vec![pair_matrix; domain.pair_count()];
    RawMoat::new(domain, graph.unit_weights(), univariate, pairwise)
}

/// The `eps` threshold below which the rounding arguments are exact:
/// `1 / (2^(n+1) n^(n-2))`.
pub fn exact_rounding_eps_bound(n: usize) -> f64 {
    1.0 / (math::exp((n as f64 + 1.0) * math::ln(2.0))
        * math::exp((n as f64 - 2.0) * math::ln(n as f64)))
}

/// Assignment with 1 exactly on `K`.
fn leaf_indicator(n: usize, k_set: &[usize]) -> Vec<usize> {
    let mut x = alloc::vec![0usize; n];
    for &v in k_set {
        x[v] = 1;
    }
    x
}

/// Number of spanning trees whose leaf set CONTAINS `K`, recovered from one
/// signed point evaluation as `|round(Z p(x_K) / eps)|`. Exact for `eps`
/// below [`exact_rounding_eps_bound`].
///
/// Each tree whose leaves contain the ones of `x` contributes
/// `(-1)^|x| eps` to `Z p(x)` (numerator `eps^(n-1)` over the degree-sum
/// denominator `eps^(n-2)`), and every other tree at most `eps^2`, so
/// dividing by one power of `eps` isolates the count.
pub fn count_leaf_superset_trees(
    graph: &Graph,
    k_set: &[usize],
    eps: f64,
) -> Result<u64, MoatError> {
    let raw = leafcount_gadget(graph, eps)?;
    let n = graph.n();
    let x = leaf_indicator(n, k_set);
    let p = crate::likelihood::raw_evaluate(&raw, &x)?;
    let log_z = raw.log_partition();
    let scaled = p * math::exp(log_z - math::ln(eps));
    Ok(round_magnitude(scaled))
}

/// Number of spanning trees whose leaf set EQUALS `K`, recovered from one
/// semiring query by inclusion-exclusion: `|round(Z f(e_K) / eps)|` where
/// the evidence fixes `K` to 1 and sums out the rest. The signs alternate
/// with the number of ones, which is exactly the inclusion-exclusion over
/// leaf supersets.
pub fn count_exact_leaf_trees(
    graph: &Graph,
    k_set: &[usize],
    eps: f64,
) -> Result<u64, MoatError> {
    let n = graph.n();
    let free = n - k_set.len();
    if free > 16 {
        return Err(MoatError::DomainTooLarge { limit: 16, requested: free });
    }
    let raw = leafcount_gadget(graph, eps)?;
    let domain = VarDomain::binary(n)?;
    let evidence = Evidence::new(k_set.iter().map(|&v| (v, 1usize)).collect(), &domain)?;
    let f = raw_semiring_sum(&raw, &evidence)?;
    let log_z = raw.log_partition();
    let scaled = f * math::exp(log_z - math::ln(eps));
    Ok(round_magnitude(scaled))
}

fn round_magnitude(x: f64) -> u64 {
    let r = x.abs() + 0.5;
    r as u64
}

/// Ground truth for the leaf-count gadgets: enumerate and filter.
pub fn enumerate_leaf_counts(
    graph: &Graph,
    k_set: &[usize],
) -> Result<(u64, u64), MoatError> {
    let trees = enumerate_spanning_trees(graph)?;
    let mut superset = 0u64;
    let mut exact = 0u64;
    for t in &trees {
        let leaves = t.leaves();
        let contains_all = k_set.iter().all(|v| leaves.contains(v));
        if contains_all {
            superset += 1;
            if leaves.len() == k_set.len() {
                exact += 1;
            }
        }
    }
    Ok((superset, exact))
}

/// Exact spanning-tree sampler by sequential edge conditioning on ratios of
/// Matrix-Tree determinants. `O(m n^3)` per draw; the correctness reference
/// for the Wilson sampler.
pub fn exact_tree_sampler_reference<R: rand::Rng + ?Sized>(
    n: usize,
    weights: &[f64],
    rng: &mut R,
) -> Result<SpanningTree, MoatError> {
    if n > MAX_BRUTE_VERTICES {
        return Err(MoatError::DomainTooLarge { limit: MAX_BRUTE_VERTICES, requested: n });
    }
    // supervertex labels under contraction
    let mut uf: Vec<usize> = (0..n).collect();
    let mut included: Vec<(usize, usize)> = Vec::with_capacity(n - 1);
    let all_edges: Vec<(usize, usize, f64)> = pairs(n)
        .enumerate()
        .filter(|&(q, _)| weights[q] > 0.0)
        .map(|(q, (u, v))| (u, v, weights[q]))
        .collect();

    // weighted tree count of the contracted remainder, in log space
    let tree_log_sum = |uf: &mut Vec<usize>, edges: &[(usize, usize, f64)]| -> f64 {
        let mut labels: Vec<usize> = (0..n).map(|v| uf_find(uf, v)).collect();
        let mut compact: Vec<usize> = labels.clone();
        compact.sort_unstable();
        compact.dedup();
        let k = compact.len();
        if k == 1 {
            return 0.0;
        }
        for l in &mut labels {
            *l = compact.binary_search(l).unwrap();
        }
        let mut w = alloc::vec![0.0; k * (k - 1) / 2];
        for &(u, v, wt) in edges {
            let (a, b) = (labels[u], labels[v]);
            if a != b {
                w[pair_index(k, a.min(b), a.max(b))] += wt;
            }
        }
        log_weighted_tree_sum(k, &w)
    };

    for i in 0..all_edges.len() {
        if included.len() == n - 1 {
            break;
        }
        let (u, v, w) = all_edges[i];
        let (ru, rv) = (uf_find(&mut uf, u), uf_find(&mut uf, v));
        if ru == rv {
            continue; // would close a cycle: excluded with probability 1
        }
        let remaining = &all_edges[i..];
        let log_cur = tree_log_sum(&mut uf, remaining);
        if log_cur == f64::NEG_INFINITY {
            return Err(MoatError::DisconnectedGraph);
        }
        let mut uf_inc = uf.clone();
        uf_inc[ru] = rv;
        let log_inc = tree_log_sum(&mut uf_inc, &remaining[1..]);
        let p_include = if log_inc == f64::NEG_INFINITY {
            0.0
        } else {
            math::exp(math::ln(w) + log_inc - log_cur).min(1.0)
        };
        if rng.gen::<f64>() < p_include {
            uf = uf_inc;
            included.push((u, v));
        }
    }
    SpanningTree::new(n, included)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_weights, three_var_example};
    use crate::likelihood::{log_likelihood, log_partition, raw_evaluate};
    use rand::SeedableRng;

    #[test]
    fn cayley_counts_from_enumeration() {
        assert_eq!(enumerate_spanning_trees(&Graph::complete(3)).unwrap().len(), 3);
        assert_eq!(enumerate_spanning_trees(&Graph::complete(5)).unwrap().len(), 125);
        let path = Graph::new(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(enumerate_spanning_trees(&path).unwrap().len(), 1);
    }

    #[test]
    fn enumeration_yields_distinct_valid_trees() {
        let trees = enumerate_spanning_trees(&Graph::complete(6)).unwrap();
        assert_eq!(trees.len(), 1296);
        for w in trees.windows(2) {
            assert_ne!(w[0], w[1]);
        }
        let mut sorted: Vec<_> = trees.iter().map(|t| t.edges().to_vec()).collect();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 1296);
    }

    #[test]
    fn determinant_partition_matches_enumeration() {
        for n in 3..=6 {
            let weights = random_weights(n, 0.2, 3.0, n as u64);
            let by_det = log_partition(
                &MoatModel::new(
                    weights.clone(),
                    crate::fixtures::random_model(&alloc::vec![2; n], 0).table().clone(),
                )
                .unwrap(),
            );
            let by_enum = brute_partition(n, &weights).unwrap().ln();
            assert!((by_det - by_enum).abs() < 1e-10 * by_enum.abs().max(1.0));
        }
    }

    #[test]
    fn brute_likelihood_agrees_with_determinant_on_the_worked_example() {
        let model = three_var_example();
        let x = [1, 0, 1];
        let brute = brute_likelihood(&model, &x).unwrap();
        let det = log_likelihood(&model, &x).unwrap().exp();
        assert!((brute - det).abs() < 1e-12);
        assert!((brute - 0.151_269_841_269_841_27).abs() < 1e-13);
    }

    #[test]
    fn brute_posterior_with_empty_evidence_returns_table_univariates() {
        let model = crate::fixtures::random_model(&[2, 2, 3, 2], 77);
        let post = brute_posterior(&model, &Evidence::empty()).unwrap();
        for (i, &v) in post.free_variables().iter().enumerate() {
            for (a, &p) in post.marginals()[i].iter().enumerate() {
                assert!(
                    (p - model.table().univariate(v)[a]).abs() < 1e-10,
                    "var {v} value {a}"
                );
            }
        }
    }

    #[test]
    fn map_of_point_mass_model_is_the_point() {
        let domain = VarDomain::binary(3).unwrap();
        let mut joint = [0.0; 8];
        joint[0b110] = 1.0;
        let table = MarginalTable::from_joint(&joint, &domain).unwrap();
        let model = MoatModel::new(alloc::vec![1.0; 3], table).unwrap();
        let (x, p) = brute_map(&model).unwrap();
        assert_eq!(x, alloc::vec![1, 1, 0]);
        assert!((p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coloring_gadget_attains_bound_iff_three_colorable() {
        // K_3 and the path P_3 are 3-colorable; K_4 is not
        let k3 = Graph::complete(3);
        let model = map_hardness_gadget(&k3).unwrap();
        assert!(model.table().validate().is_empty());
        let (_, p) = brute_map(&model).unwrap();
        assert!((p - 1.0 / 12.0).abs() < 1e-12);

        let p3 = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let (_, p) = brute_map(&map_hardness_gadget(&p3).unwrap()).unwrap();
        assert!((p - colorable_map_probability(3)).abs() < 1e-12);

        let k4 = Graph::complete(4);
        assert!(!is_three_colorable(&k4));
        let (_, p) = brute_map(&map_hardness_gadget(&k4).unwrap()).unwrap();
        assert!(p < colorable_map_probability(4) - 1e-12);
    }

    #[test]
    fn three_colorability_search_is_sane() {
        assert!(is_three_colorable(&Graph::complete(3)));
        assert!(is_three_colorable(&Graph::new(4, &[(0, 1), (1, 2), (2, 3)]).unwrap()));
        assert!(!is_three_colorable(&Graph::complete(4)));
        // even-rim wheel: the 4-cycle takes two colors, the hub a third
        let wheel = Graph::new(
            5,
            &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 4), (2, 4), (3, 4)],
        )
        .unwrap();
        assert!(is_three_colorable(&wheel));
        // K_5 minus one edge still contains K_4
        let k5_minus: Vec<(usize, usize)> = pairs(5).filter(|&e| e != (0, 1)).collect();
        assert!(!is_three_colorable(&Graph::new(5, &k5_minus).unwrap()));
    }

    #[test]
    fn path_gadget_counts_its_single_tree() {
        // P_3 has one spanning tree with leaves {0, 2}
        let p3 = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let eps = 1e-4;
        assert!(eps < exact_rounding_eps_bound(3));
        let raw = leafcount_gadget(&p3, eps).unwrap();
        let x = leaf_indicator(3, &[0, 2]);
        let p = raw_evaluate(&raw, &x).unwrap();
        let z = raw.log_partition().exp();
        let scaled = z * p / eps;
        assert!((scaled - 1.0).abs() < 0.5, "scaled = {scaled}");
        // the separation band: within n^(n-2) eps of the count
        assert!((scaled - 1.0).abs() <= 3.0 * eps + 1e-12);
        assert_eq!(count_leaf_superset_trees(&p3, &[0, 2], eps).unwrap(), 1);
        assert_eq!(count_exact_leaf_trees(&p3, &[0, 2], eps).unwrap(), 1);
    }

    #[test]
    fn odd_ones_assignments_evaluate_nonpositive() {
        let g = Graph::complete(4);
        let raw = leafcount_gadget(&g, 1e-4).unwrap();
        for x in [[1usize, 0, 0, 0], [1, 1, 1, 0], [0, 0, 1, 0]] {
            let p = raw_evaluate(&raw, &x).unwrap();
            assert!(p <= 0.0, "p({x:?}) = {p}");
        }
    }

    #[test]
    fn k4_leaf_counts_match_enumeration() {
        let g = Graph::complete(4);
        let eps = 1e-4;
        assert!(eps < exact_rounding_eps_bound(4));
        let (superset, exact) = enumerate_leaf_counts(&g, &[0, 1]).unwrap();
        assert_eq!(count_leaf_superset_trees(&g, &[0, 1], eps).unwrap(), superset);
        assert_eq!(count_exact_leaf_trees(&g, &[0, 1], eps).unwrap(), exact);
    }

    #[test]
    fn star_leaves_are_counted_once() {
        // star with hub 0 inside K_4 weights restricted to the star edges
        let star = Graph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(count_exact_leaf_trees(&star, &[1, 2, 3], 1e-5).unwrap(), 1);
    }

    #[test]
    fn all_vertices_as_leaves_is_impossible_beyond_an_edge() {
        let g = Graph::complete(4);
        assert_eq!(count_exact_leaf_trees(&g, &[0, 1, 2, 3], 1e-4).unwrap(), 0);
    }

    #[test]
    fn exact_sampler_reproduces_worked_example_probabilities() {
        let weights = [2.0, 6.0, 3.0];
        let expect = [12.0 / 36.0, 6.0 / 36.0, 18.0 / 36.0];
        let trees = enumerate_spanning_trees(&Graph::complete(3)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(123);
        let mut counts = alloc::vec![0usize; 3];
        let draws = 60_000;
        for _ in 0..draws {
            let t = exact_tree_sampler_reference(3, &weights, &mut rng).unwrap();
            counts[trees.iter().position(|c| c == &t).unwrap()] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 / draws as f64 - expect[i]).abs() < 0.01,
                "tree {i}: {c}/{draws} vs {}",
                expect[i]
            );
        }
    }

    #[test]
    fn connected_graph_census_matches_known_counts() {
        assert_eq!(Graph::all_connected(2).len(), 1);
        assert_eq!(Graph::all_connected(3).len(), 4);
        assert_eq!(Graph::all_connected(4).len(), 38);
        assert_eq!(Graph::all_connected(5).len(), 728);
    }
}
