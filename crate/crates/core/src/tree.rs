//! Exact computation on a single tree-shaped MRF.
//!
//! A spanning tree plus a consistent marginal table defines the normalized
//! distribution
//! `Pr_T(x) = prod_{(u,v) in T} P_uv(x_u, x_v) / prod_v P_v(x_v)^(deg v - 1)`.
//! Evidence probabilities, conditional marginals, and conditional samples
//! all come from two-pass message passing over the tree in `O(n k^2)`.
//! Messages live in log space; impossible states propagate as `-inf` and
//! `0 * log 0` is treated as 0 throughout.

use alloc::vec::Vec;

use crate::domain::Evidence;
use crate::error::MoatError;
use crate::math::{self, log_sum_exp};
use crate::model::MarginalTable;

/// A spanning tree over vertices `0..n`: `n - 1` edges, connected, acyclic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl SpanningTree {
    /// Edges may arrive in any orientation and order; they are normalized
    /// to `u < v` and sorted. Fails unless they form a spanning tree.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, MoatError> {
        if n < 2 || edges.len() != n - 1 {
            return Err(MoatError::ShapeMismatch("edge count != n - 1".into()));
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(MoatError::ShapeMismatch("bad edge endpoints".into()));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        // n - 1 edges are a tree iff they connect all n vertices
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(u, v) in &norm {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return Err(MoatError::ShapeMismatch("edges contain a cycle".into()));
            }
            parent[ru] = rv;
        }
        Ok(SpanningTree { n, edges: norm })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges normalized to `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Vertices of degree one.
    pub fn leaves(&self) -> Vec<usize> {
        let mut deg = alloc::vec![0usize; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        (0..self.n).filter(|&v| deg[v] == 1).collect()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = alloc::vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }
}

/// `log Pr_T(x)` by direct evaluation of the tree factorization.
///
/// A zero univariate denominator at an internal vertex with nonzero edge
/// numerators means the table is inconsistent and is reported as an error;
/// zero numerators simply give `-inf`.
pub fn tree_log_likelihood(
    tree: &SpanningTree,
    table: &MarginalTable,
    x: &[usize],
) -> Result<f64, MoatError> {
    let domain = table.domain();
    domain.check_assignment(x)?;
    let mut log_num = 0.0;
    for &(u, v) in tree.edges() {
        let cell = table.pair_cell(u, v, x[u], x[v]);
        if cell <= 0.0 {
            log_num = f64::NEG_INFINITY;
        } else {
            log_num += math::ln(cell);
        }
    }
    let mut log_den = 0.0;
    for v in 0..tree.n() {
        let deg = tree.degree(v);
        if deg <= 1 {
            continue;
        }
        let p = table.univariate(v)[x[v]];
        if p <= 0.0 {
            if log_num == f64::NEG_INFINITY {
                return Ok(f64::NEG_INFINITY);
            }
            let w = tree
                .edges()
                .iter()
                .find(|&&(a, b)| a == v || b == v)
                .map(|&(a, b)| if a == v { b } else { a })
                .unwrap_or(v);
            return Err(MoatError::InconsistentTable { u: v.min(w), v: v.max(w) });
        }
        log_den += (deg as f64 - 1.0) * math::ln(p);
    }
    Ok(log_num - log_den)
}

/// Shared machinery for the two-pass algorithms: rooted orientation plus
/// upward (leaf-to-root) messages.
struct UpwardPass {
    /// Vertices in a root-first BFS order.
    order: Vec<usize>,
    children: Vec<Vec<usize>>,
    /// `up[v][a]`: log probability of the evidence inside v's subtree given
    /// `X_v = a` (including v's own evidence indicator).
    up: Vec<Vec<f64>>,
    /// `child_msg[c][a]`: log of the message from child c into its parent,
    /// as a function of the parent's value `a`.
    child_msg: Vec<Vec<f64>>,
}

/// `log P(X_c = b | X_p = a)` for tree edge `{p, c}`; 0/0 rows are `-inf`.
fn log_cond(table: &MarginalTable, p: usize, c: usize, a: usize, b: usize) -> f64 {
    let cell = if p < c {
        table.pair_cell(p, c, a, b)
    } else {
        table.pair_cell(c, p, b, a)
    };
    let den = table.univariate(p)[a];
    if cell <= 0.0 || den <= 0.0 {
        f64::NEG_INFINITY
    } else {
        math::ln(cell / den)
    }
}

fn upward_pass(
    tree: &SpanningTree,
    table: &MarginalTable,
    evidence: &Evidence,
    root: usize,
) -> UpwardPass {
    let n = tree.n();
    let domain = table.domain();
    let adj = tree.adjacency();

    let mut order = Vec::with_capacity(n);
    let mut parent: Vec<Option<usize>> = alloc::vec![None; n];
    let mut children: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    let mut visited = alloc::vec![false; n];
    order.push(root);
    visited[root] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &w in &adj[v] {
            if !visited[w] {
                visited[w] = true;
                parent[w] = Some(v);
                children[v].push(w);
                order.push(w);
            }
        }
    }

    let mut up: Vec<Vec<f64>> = (0..n)
        .map(|v| match evidence.value_of(v) {
            Some(val) => {
                let mut m = alloc::vec![f64::NEG_INFINITY; domain.cardinality(v)];
                m[val] = 0.0;
                m
            }
            None => alloc::vec![0.0; domain.cardinality(v)],
        })
        .collect();
    let mut child_msg: Vec<Vec<f64>> = (0..n)
        .map(|c| match parent[c] {
            Some(p) => alloc::vec![f64::NEG_INFINITY; domain.cardinality(p)],
            None => Vec::new(),
        })
        .collect();

    let mut scratch = Vec::new();
    for &c in order.iter().rev() {
        let p = match parent[c] {
            Some(p) => p,
            None => continue,
        };
        let (kp, kc) = (domain.cardinality(p), domain.cardinality(c));
        for a in 0..kp {
            scratch.clear();
            for b in 0..kc {
                let term = log_cond(table, p, c, a, b) + up[c][b];
                scratch.push(if term.is_nan() { f64::NEG_INFINITY } else { term });
            }
            child_msg[c][a] = log_sum_exp(&scratch);
        }
        for a in 0..kp {
            up[p][a] += child_msg[c][a];
        }
    }

    UpwardPass { order, children, up, child_msg }
}

/// Picks the message-passing root: the lowest-index free variable, fixed
/// for determinism.
fn pick_root(evidence: &Evidence, n: usize) -> Option<usize> {
    (0..n).find(|&v| evidence.value_of(v).is_none())
}

/// `log sum_z Pr_T(z, e)`: the evidence probability under the tree, by one
/// upward pass. May be `-inf`.
pub fn tree_evidence_log_prob(
    tree: &SpanningTree,
    table: &MarginalTable,
    evidence: &Evidence,
) -> Result<f64, MoatError> {
    let root = match pick_root(evidence, tree.n()) {
        Some(r) => r,
        None => {
            let x: Vec<usize> = (0..tree.n())
                .map(|v| evidence.value_of(v).expect("all variables fixed"))
                .collect();
            return tree_log_likelihood(tree, table, &x);
        }
    };
    let pass = upward_pass(tree, table, evidence, root);
    let terms: Vec<f64> = table
        .univariate(root)
        .iter()
        .zip(&pass.up[root])
        .map(|(&p, &m)| if p > 0.0 { math::ln(p) + m } else { f64::NEG_INFINITY })
        .collect();
    Ok(log_sum_exp(&terms))
}

/// Exact `P_T(X_i | e)` for every free variable `i`, in ascending variable
/// order, via an upward and a downward pass.
pub fn tree_conditional_marginals(
    tree: &SpanningTree,
    table: &MarginalTable,
    evidence: &Evidence,
) -> Result<Vec<Vec<f64>>, MoatError> {
    let domain = table.domain();
    let free = evidence.free_variables(domain);
    if free.is_empty() {
        return Ok(Vec::new());
    }
    let root = free[0];
    let pass = upward_pass(tree, table, evidence, root);

    // down[v][a]: log P(X_v = a, evidence outside v's subtree)
    let n = tree.n();
    let mut down: Vec<Vec<f64>> =
        (0..n).map(|v| alloc::vec![f64::NEG_INFINITY; domain.cardinality(v)]).collect();
    for (a, &p) in table.univariate(root).iter().enumerate() {
        down[root][a] = if p > 0.0 { math::ln(p) } else { f64::NEG_INFINITY };
    }
    let mut scratch = Vec::new();
    for &v in &pass.order {
        for &c in &pass.children[v] {
            let (kv, kc) = (domain.cardinality(v), domain.cardinality(c));
            for b in 0..kc {
                scratch.clear();
                for a in 0..kv {
                    // all sibling messages plus v's own evidence indicator
                    // are up[v][a] with c's message divided back out
                    if pass.up[v][a] == f64::NEG_INFINITY
                        || down[v][a] == f64::NEG_INFINITY
                    {
                        continue;
                    }
                    let without_c = pass.up[v][a] - pass.child_msg[c][a];
                    let term = down[v][a] + without_c + log_cond(table, v, c, a, b);
                    if !term.is_nan() {
                        scratch.push(term);
                    }
                }
                down[c][b] = log_sum_exp(&scratch);
            }
        }
    }

    let log_pe = {
        let terms: Vec<f64> = (0..domain.cardinality(root))
            .map(|a| down[root][a] + pass.up[root][a])
            .collect();
        log_sum_exp(&terms)
    };
    if log_pe == f64::NEG_INFINITY {
        return Err(MoatError::ZeroProbabilityEvidence);
    }

    let mut out = Vec::with_capacity(free.len());
    for &v in &free {
        let k = domain.cardinality(v);
        let mut probs = alloc::vec![0.0; k];
        let logs: Vec<f64> = (0..k).map(|a| down[v][a] + pass.up[v][a]).collect();
        let norm = log_sum_exp(&logs);
        for a in 0..k {
            probs[a] = if logs[a] == f64::NEG_INFINITY {
                0.0
            } else {
                math::exp(logs[a] - norm)
            };
        }
        out.push(probs);
    }
    Ok(out)
}

/// Draws one exact sample from `P_T(X | e)` by root-to-leaf ancestral
/// sampling after an upward pass. The result agrees with the evidence.
pub fn tree_conditional_sample<R: rand::Rng + ?Sized>(
    tree: &SpanningTree,
    table: &MarginalTable,
    evidence: &Evidence,
    rng: &mut R,
) -> Result<Vec<usize>, MoatError> {
    let domain = table.domain();
    let n = tree.n();
    let root = match pick_root(evidence, n) {
        Some(r) => r,
        None => {
            return Ok((0..n)
                .map(|v| evidence.value_of(v).expect("all variables fixed"))
                .collect())
        }
    };
    let pass = upward_pass(tree, table, evidence, root);

    let mut x = alloc::vec![0usize; n];
    let root_logs: Vec<f64> = table
        .univariate(root)
        .iter()
        .zip(&pass.up[root])
        .map(|(&p, &m)| if p > 0.0 { math::ln(p) + m } else { f64::NEG_INFINITY })
        .collect();
    x[root] = sample_from_logs(&root_logs, rng)?;
    for &v in &pass.order {
        for &c in &pass.children[v] {
            let kc = domain.cardinality(c);
            let logs: Vec<f64> = (0..kc)
                .map(|b| log_cond(table, v, c, x[v], b) + pass.up[c][b])
                .collect();
            x[c] = sample_from_logs(&logs, rng)?;
        }
    }
    debug_assert!(evidence.agrees_with(&x));
    Ok(x)
}

fn sample_from_logs<R: rand::Rng + ?Sized>(
    logs: &[f64],
    rng: &mut R,
) -> Result<usize, MoatError> {
    let norm = log_sum_exp(logs);
    if norm == f64::NEG_INFINITY {
        return Err(MoatError::ZeroProbabilityEvidence);
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &l) in logs.iter().enumerate() {
        if l == f64::NEG_INFINITY {
            continue;
        }
        last_positive = i;
        acc += math::exp(l - norm);
        if u < acc {
            return Ok(i);
        }
    }
    Ok(last_positive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::VarDomain;
    use crate::model::{FreeParams, MarginalTable};
    use rand::SeedableRng;

    fn random_table(cards: &[usize], seed: u64) -> MarginalTable {
        let domain = VarDomain::new(cards.to_vec()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        FreeParams::standard_normal(&domain, &mut rng)
            .realize(&domain)
            .unwrap()
            .table()
            .clone()
    }

    /// Chain-rule oracle: P(x_1) prod P(x_{i+1} | x_i) along a path tree.
    fn path_chain_log_prob(table: &MarginalTable, x: &[usize]) -> f64 {
        let mut lp = table.univariate(0)[x[0]].ln();
        for i in 0..x.len() - 1 {
            let joint = table.pair_cell(i, i + 1, x[i], x[i + 1]);
            lp += (joint / table.univariate(i)[x[i]]).ln();
        }
        lp
    }

    #[test]
    fn invalid_trees_rejected() {
        assert!(SpanningTree::new(3, alloc::vec![(0, 1)]).is_err());
        assert!(SpanningTree::new(3, alloc::vec![(0, 1), (1, 0)]).is_err());
        assert!(SpanningTree::new(4, alloc::vec![(0, 1), (1, 2), (0, 2)]).is_err());
        let t = SpanningTree::new(4, alloc::vec![(3, 2), (0, 1), (2, 1)]).unwrap();
        assert_eq!(t.edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(t.leaves(), alloc::vec![0, 3]);
    }

    #[test]
    fn two_vertex_tree_is_the_pair_table() {
        let table = random_table(&[2, 3], 1);
        let tree = SpanningTree::new(2, alloc::vec![(0, 1)]).unwrap();
        for a in 0..2 {
            for b in 0..3 {
                let ll = tree_log_likelihood(&tree, &table, &[a, b]).unwrap();
                assert!((ll - table.pair_cell(0, 1, a, b).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn star_of_independent_uniform_binaries() {
        let domain = VarDomain::binary(3).unwrap();
        let table = MarginalTable::from_joint(&[0.125; 8], &domain).unwrap();
        let tree = SpanningTree::new(3, alloc::vec![(0, 1), (0, 2)]).unwrap();
        for x in [[0, 0, 0], [1, 0, 1], [1, 1, 1]] {
            let ll = tree_log_likelihood(&tree, &table, &x).unwrap();
            assert!((ll - 0.125f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn path_tree_matches_chain_rule_oracle() {
        let table = random_table(&[2, 2, 2, 2], 7);
        let tree = SpanningTree::new(4, alloc::vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let domain = table.domain().clone();
        domain.for_each_assignment(|x| {
            let ll = tree_log_likelihood(&tree, &table, x).unwrap();
            assert!((ll - path_chain_log_prob(&table, x)).abs() < 1e-11);
        });
    }

    #[test]
    fn tree_distribution_is_normalized_for_consistent_tables() {
        // the property that makes every mixture component normalized
        for seed in 0..5u64 {
            let table = random_table(&[2, 3, 2, 4, 2], seed);
            let tree = SpanningTree::new(
                5,
                alloc::vec![(0, 2), (2, 1), (2, 3), (3, 4)],
            )
            .unwrap();
            let mut total = 0.0;
            table.domain().clone().for_each_assignment(|x| {
                total += tree_log_likelihood(&tree, &table, x).unwrap().exp();
            });
            assert!((total - 1.0).abs() < 1e-9, "seed {seed}: total {total}");
        }
    }

    #[test]
    fn evidence_log_prob_matches_exhaustive_sum() {
        let table = random_table(&[2, 3, 2, 2, 3, 2], 21);
        let domain = table.domain().clone();
        let tree = SpanningTree::new(
            6,
            alloc::vec![(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)],
        )
        .unwrap();
        let evidence = Evidence::new(alloc::vec![(1, 2), (4, 0)], &domain).unwrap();
        let mut direct = 0.0;
        evidence.for_each_completion(&domain, |x| {
            direct += tree_log_likelihood(&tree, &table, x).unwrap().exp();
        });
        let lp = tree_evidence_log_prob(&tree, &table, &evidence).unwrap();
        assert!((lp.exp() - direct).abs() < 1e-10);

        // full assignment reduces to the likelihood, empty evidence to 1
        let full = Evidence::new(
            (0..6).map(|v| (v, 1usize.min(domain.cardinality(v) - 1))).collect(),
            &domain,
        )
        .unwrap();
        let x: Vec<usize> = (0..6).map(|v| full.value_of(v).unwrap()).collect();
        let a = tree_evidence_log_prob(&tree, &table, &full).unwrap();
        let b = tree_log_likelihood(&tree, &table, &x).unwrap();
        assert!((a - b).abs() < 1e-12);
        let empty = tree_evidence_log_prob(&tree, &table, &Evidence::empty()).unwrap();
        assert!(empty.abs() < 1e-10);
    }

    #[test]
    fn conditional_marginals_match_brute_force() {
        let table = random_table(&[2, 2, 3, 2, 2, 2], 33);
        let domain = table.domain().clone();
        let tree = SpanningTree::new(
            6,
            alloc::vec![(0, 1), (0, 2), (2, 3), (2, 4), (4, 5)],
        )
        .unwrap();
        let evidence = Evidence::new(alloc::vec![(0, 1), (3, 0)], &domain).unwrap();
        let free = evidence.free_variables(&domain);
        let marg = tree_conditional_marginals(&tree, &table, &evidence).unwrap();

        let mut totals: Vec<Vec<f64>> =
            free.iter().map(|&v| alloc::vec![0.0; domain.cardinality(v)]).collect();
        let mut z = 0.0;
        evidence.for_each_completion(&domain, |x| {
            let p = tree_log_likelihood(&tree, &table, x).unwrap().exp();
            z += p;
            for (i, &v) in free.iter().enumerate() {
                totals[i][x[v]] += p;
            }
        });
        for (i, t) in totals.iter().enumerate() {
            for (a, &mass) in t.iter().enumerate() {
                assert!(
                    (marg[i][a] - mass / z).abs() < 1e-10,
                    "var {} value {a}: {} vs {}",
                    free[i],
                    marg[i][a],
                    mass / z
                );
            }
        }
    }

    #[test]
    fn empty_evidence_marginals_are_table_univariates() {
        let table = random_table(&[2, 3, 2, 2], 39);
        let tree = SpanningTree::new(4, alloc::vec![(0, 1), (1, 2), (1, 3)]).unwrap();
        let marg = tree_conditional_marginals(&tree, &table, &Evidence::empty()).unwrap();
        for (v, probs) in marg.iter().enumerate() {
            for (a, &p) in probs.iter().enumerate() {
                assert!((p - table.univariate(v)[a]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn neighbors_screen_off_the_rest_of_the_tree() {
        // evidence on all neighbors of 2: the conditional for 2 depends
        // only on those neighbors (Markov property)
        let table = random_table(&[2, 2, 2, 2, 2], 45);
        let domain = table.domain().clone();
        let tree =
            SpanningTree::new(5, alloc::vec![(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let e1 = Evidence::new(alloc::vec![(1, 0), (3, 1), (0, 0)], &domain).unwrap();
        let e2 = Evidence::new(alloc::vec![(1, 0), (3, 1), (0, 1), (4, 0)], &domain).unwrap();
        let m1 = tree_conditional_marginals(&tree, &table, &e1).unwrap();
        let m2 = tree_conditional_marginals(&tree, &table, &e2).unwrap();
        // var 2 is the first free variable of e2; in e1 free vars are {2, 4}
        let p1 = &m1[0];
        let p2 = &m2[0];
        for a in 0..2 {
            assert!((p1[a] - p2[a]).abs() < 1e-10);
        }
    }

    #[test]
    fn conditional_sampling_tracks_exact_conditionals() {
        let table = random_table(&[2, 2, 2, 2, 2], 51);
        let domain = table.domain().clone();
        let tree =
            SpanningTree::new(5, alloc::vec![(0, 1), (0, 2), (2, 3), (2, 4)]).unwrap();
        let evidence = Evidence::new(alloc::vec![(1, 1)], &domain).unwrap();

        // exact completion probabilities by enumeration
        let mut states: Vec<Vec<usize>> = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        evidence.for_each_completion(&domain, |x| {
            states.push(x.to_vec());
            probs.push(tree_log_likelihood(&tree, &table, x).unwrap().exp());
        });
        let z: f64 = probs.iter().sum();

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
        let draws = 100_000usize;
        let mut counts = alloc::vec![0usize; states.len()];
        for _ in 0..draws {
            let x = tree_conditional_sample(&tree, &table, &evidence, &mut rng).unwrap();
            let idx = states.iter().position(|s| s == &x).unwrap();
            counts[idx] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let p = probs[i] / z;
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            let freq = c as f64 / draws as f64;
            assert!(
                (freq - p).abs() <= 3.0 * sigma + 1e-4,
                "state {i}: freq {freq} vs p {p}"
            );
        }
    }

    #[test]
    fn full_evidence_sample_is_returned_unchanged() {
        let table = random_table(&[2, 2, 2], 57);
        let domain = table.domain().clone();
        let tree = SpanningTree::new(3, alloc::vec![(0, 1), (1, 2)]).unwrap();
        let evidence =
            Evidence::new(alloc::vec![(0, 1), (1, 0), (2, 1)], &domain).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let x = tree_conditional_sample(&tree, &table, &evidence, &mut rng).unwrap();
        assert_eq!(x, alloc::vec![1, 0, 1]);
    }

    #[test]
    fn point_mass_table_always_samples_the_point() {
        let domain = VarDomain::binary(3).unwrap();
        let mut joint = [0.0; 8];
        joint[0b101] = 1.0; // point mass on (1, 0, 1)
        let table = MarginalTable::from_joint(&joint, &domain).unwrap();
        let tree = SpanningTree::new(3, alloc::vec![(0, 1), (1, 2)]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x = tree_conditional_sample(&tree, &table, &Evidence::empty(), &mut rng)
                .unwrap();
            assert_eq!(x, alloc::vec![1, 0, 1]);
        }
    }

    #[test]
    fn zero_probability_evidence_is_an_error() {
        let domain = VarDomain::binary(2).unwrap();
        let mut joint = [0.0; 4];
        joint[0b11] = 1.0;
        let table = MarginalTable::from_joint(&joint, &domain).unwrap();
        let tree = SpanningTree::new(2, alloc::vec![(0, 1)]).unwrap();
        let evidence = Evidence::new(alloc::vec![(0, 0)], &domain).unwrap();
        assert!(matches!(
            tree_conditional_marginals(&tree, &table, &evidence),
            Err(MoatError::ZeroProbabilityEvidence)
        ));
    }

    #[test]
    fn marginal_preservation_along_tree_edges() {
        // the tree MRF's own univariate and edge marginals equal the table's
        let table = random_table(&[2, 3, 2, 2], 63);
        let domain = table.domain().clone();
        let tree = SpanningTree::new(4, alloc::vec![(0, 2), (1, 2), (2, 3)]).unwrap();
        let mut univ: Vec<Vec<f64>> =
            (0..4).map(|v| alloc::vec![0.0; domain.cardinality(v)]).collect();
        let mut edge02 = alloc::vec![0.0; 4];
        domain.for_each_assignment(|x| {
            let p = tree_log_likelihood(&tree, &table, x).unwrap().exp();
            for v in 0..4 {
                univ[v][x[v]] += p;
            }
            edge02[x[0] * 2 + x[2]] += p;
        });
        for v in 0..4 {
            for (a, &m) in univ[v].iter().enumerate() {
                assert!((m - table.univariate(v)[a]).abs() < 1e-10);
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                assert!((edge02[a * 2 + b] - table.pair_cell(0, 2, a, b)).abs() < 1e-10);
            }
        }
    }
}
