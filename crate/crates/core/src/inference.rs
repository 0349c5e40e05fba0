//! Sampling-based posterior-marginal estimation on MoAT.
//!
//! Viewing the mixture as a latent-variable model whose latent is the
//! spanning tree, the proposal "sample a tree unconditionally, then sample
//! the free variables from that tree conditioned on the evidence" has
//! importance weight `w'(y) = P(e | y)`, a quantity the tree engine
//! computes exactly. The self-normalized estimator over those weights gives
//! posterior marginals; the collapsed variant replaces each sampled
//! completion with the tree's exact conditional marginals, removing the
//! inner sampling noise. A systematic-scan Gibbs chain over full likelihood
//! evaluations serves as the baseline.
//!
//! All weight arithmetic stays in log space and is normalized by
//! max-subtraction before exponentiation.

use alloc::vec::Vec;

use crate::domain::{Evidence, VarDomain};
use crate::error::MoatError;
use crate::likelihood::{log_likelihood_given, log_partition};
use crate::math::{self, log_sum_exp};
use crate::model::MoatModel;
use crate::st_sampler::sample_tree;
use crate::tree::{
    tree_conditional_marginals, tree_conditional_sample, tree_evidence_log_prob, SpanningTree,
};

/// A proposal draw: the sampled tree, a completion of the evidence, and the
/// unnormalized importance weight `P(e | tree)` in log form.
#[derive(Clone, Debug)]
pub struct WeightedSample {
    pub tree: SpanningTree,
    pub x: Vec<usize>,
    pub log_weight: f64,
}

impl WeightedSample {
    pub fn weight(&self) -> f64 {
        math::exp(self.log_weight)
    }
}

/// Posterior marginals over the free variables, with the sample budget and
/// effective sample size that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorEstimate {
    free: Vec<usize>,
    marginals: Vec<Vec<f64>>,
    sample_count: usize,
    ess: f64,
}

impl PosteriorEstimate {
    pub fn new(
        free: Vec<usize>,
        marginals: Vec<Vec<f64>>,
        sample_count: usize,
        ess: f64,
    ) -> Result<Self, MoatError> {
        if free.len() != marginals.len() {
            return Err(MoatError::ShapeMismatch("marginals vs free variables".into()));
        }
        for m in &marginals {
            let sum: f64 = m.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(MoatError::ShapeMismatch(alloc::format!(
                    "posterior vector sums to {sum}"
                )));
            }
        }
        Ok(PosteriorEstimate { free, marginals, sample_count, ess })
    }

    /// Free variables, ascending.
    pub fn free_variables(&self) -> &[usize] {
        &self.free
    }

    /// Marginal vectors aligned with [`PosteriorEstimate::free_variables`].
    pub fn marginals(&self) -> &[Vec<f64>] {
        &self.marginals
    }

    pub fn marginal_for(&self, var: usize) -> Option<&[f64]> {
        self.free
            .iter()
            .position(|&v| v == var)
            .map(|i| self.marginals[i].as_slice())
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn effective_sample_size(&self) -> f64 {
        self.ess
    }
}

/// Draws `m` importance samples: tree from the spanning-tree distribution,
/// completion from the tree conditioned on the evidence, weight
/// `P(e | tree)`. Fails as degenerate if every weight is zero.
pub fn importance_sample<R: rand::Rng + ?Sized>(
    model: &MoatModel,
    evidence: &Evidence,
    m: usize,
    rng: &mut R,
) -> Result<Vec<WeightedSample>, MoatError> {
    let mut trees = Vec::with_capacity(m);
    for _ in 0..m {
        trees.push(sample_tree(model.domain().n(), model.weights(), rng)?);
    }
    importance_sample_with_trees(model, evidence, trees, rng)
}

/// [`importance_sample`] over a caller-supplied tree stream, so collapsed
/// and plain estimators can be compared on identical trees.
pub fn importance_sample_with_trees<R: rand::Rng + ?Sized>(
    model: &MoatModel,
    evidence: &Evidence,
    trees: Vec<SpanningTree>,
    rng: &mut R,
) -> Result<Vec<WeightedSample>, MoatError> {
    let table = model.table();
    let mut out = Vec::with_capacity(trees.len());
    let mut any_positive = false;
    for tree in trees {
        let log_weight = tree_evidence_log_prob(&tree, table, evidence)?;
        let x = if log_weight == f64::NEG_INFINITY {
            // zero-weight draw: keep the slot so the sample count is
            // honest, with an arbitrary completion that never contributes
            let mut x = alloc::vec![0usize; model.domain().n()];
            for &(v, a) in evidence.entries() {
                x[v] = a;
            }
            x
        } else {
            any_positive = true;
            tree_conditional_sample(&tree, table, evidence, rng)?
        };
        out.push(WeightedSample { tree, x, log_weight });
    }
    if !any_positive {
        return Err(MoatError::DegenerateWeights);
    }
    Ok(out)
}

/// Self-normalized importance-sampling estimate of every free-variable
/// posterior marginal.
pub fn estimate_marginals_is(
    samples: &[WeightedSample],
    evidence: &Evidence,
    domain: &VarDomain,
) -> Result<PosteriorEstimate, MoatError> {
    if samples.is_empty() {
        return Err(MoatError::EmptyData);
    }
    let log_weights: Vec<f64> = samples.iter().map(|s| s.log_weight).collect();
    let norm = normalized_weights(&log_weights)?;
    let free = evidence.free_variables(domain);
    let mut marginals: Vec<Vec<f64>> =
        free.iter().map(|&v| alloc::vec![0.0; domain.cardinality(v)]).collect();
    for (s, &w) in samples.iter().zip(&norm.weights) {
        for (i, &v) in free.iter().enumerate() {
            marginals[i][s.x[v]] += w;
        }
    }
    for m in &mut marginals {
        let sum: f64 = m.iter().sum();
        for p in m.iter_mut() {
            *p /= sum;
        }
    }
    PosteriorEstimate::new(free, marginals, samples.len(), norm.ess)
}

/// Collapsed (Rao-Blackwellized) estimate: trees are sampled, but each
/// tree contributes its exact conditional marginals instead of one draw.
pub fn estimate_marginals_collapsed<R: rand::Rng + ?Sized>(
    model: &MoatModel,
    evidence: &Evidence,
    m: usize,
    rng: &mut R,
) -> Result<PosteriorEstimate, MoatError> {
    let mut trees = Vec::with_capacity(m);
    for _ in 0..m {
        trees.push(sample_tree(model.domain().n(), model.weights(), rng)?);
    }
    estimate_marginals_collapsed_with_trees(model, evidence, &trees)
}

/// [`estimate_marginals_collapsed`] over a caller-supplied tree stream.
pub fn estimate_marginals_collapsed_with_trees(
    model: &MoatModel,
    evidence: &Evidence,
    trees: &[SpanningTree],
) -> Result<PosteriorEstimate, MoatError> {
    if trees.is_empty() {
        return Err(MoatError::EmptyData);
    }
    let domain = model.domain();
    let table = model.table();
    let free = evidence.free_variables(domain);

    let log_weights: Vec<f64> = trees
        .iter()
        .map(|t| tree_evidence_log_prob(t, table, evidence))
        .collect::<Result<_, _>>()?;
    let norm = normalized_weights(&log_weights)?;

    let mut marginals: Vec<Vec<f64>> =
        free.iter().map(|&v| alloc::vec![0.0; domain.cardinality(v)]).collect();
    for (tree, &w) in trees.iter().zip(&norm.weights) {
        if w == 0.0 {
            continue;
        }
        let cond = tree_conditional_marginals(tree, table, evidence)?;
        for (i, probs) in cond.iter().enumerate() {
            for (a, &p) in probs.iter().enumerate() {
                marginals[i][a] += w * p;
            }
        }
    }
    for m in &mut marginals {
        let sum: f64 = m.iter().sum();
        for p in m.iter_mut() {
            *p /= sum;
        }
    }
    PosteriorEstimate::new(free, marginals, trees.len(), norm.ess)
}

struct NormalizedWeights {
    /// Weights rescaled to sum to 1.
    weights: Vec<f64>,
    ess: f64,
}

fn normalized_weights(log_weights: &[f64]) -> Result<NormalizedWeights, MoatError> {
    let total = log_sum_exp(log_weights);
    if total == f64::NEG_INFINITY {
        return Err(MoatError::DegenerateWeights);
    }
    let weights: Vec<f64> = log_weights
        .iter()
        .map(|&lw| if lw == f64::NEG_INFINITY { 0.0 } else { math::exp(lw - total) })
        .collect();
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    Ok(NormalizedWeights { weights, ess: 1.0 / sum_sq })
}

/// Exact posterior marginals by summing the determinant likelihood over
/// every completion of the evidence. Exponential in the number of free
/// variables (capped at 2^20 completions); the ground truth for
/// convergence studies at sizes where tree enumeration is hopeless.
pub fn exact_posterior(
    model: &MoatModel,
    evidence: &Evidence,
) -> Result<PosteriorEstimate, MoatError> {
    let domain = model.domain();
    let free = evidence.free_variables(domain);
    let completions: usize = free
        .iter()
        .map(|&v| domain.cardinality(v))
        .try_fold(1usize, |a, k| a.checked_mul(k))
        .ok_or(MoatError::DomainTooLarge { limit: 1 << 20, requested: usize::MAX })?;
    if completions > 1 << 20 {
        return Err(MoatError::DomainTooLarge { limit: 1 << 20, requested: completions });
    }
    let log_z = log_partition(model);
    if log_z == f64::NEG_INFINITY {
        return Err(MoatError::DisconnectedGraph);
    }
    let mut mass: Vec<Vec<f64>> =
        free.iter().map(|&v| alloc::vec![0.0; domain.cardinality(v)]).collect();
    let mut total = 0.0;
    let mut err = None;
    evidence.for_each_completion(domain, |x| {
        if err.is_some() {
            return;
        }
        match log_likelihood_given(model, x, log_z) {
            Ok(ll) => {
                if ll > f64::NEG_INFINITY {
                    let p = math::exp(ll);
                    total += p;
                    for (i, &v) in free.iter().enumerate() {
                        mass[i][x[v]] += p;
                    }
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    if total <= 0.0 {
        return Err(MoatError::ZeroProbabilityEvidence);
    }
    for m in &mut mass {
        for p in m.iter_mut() {
            *p /= total;
        }
    }
    PosteriorEstimate::new(free, mass, 0, f64::INFINITY)
}

/// `(sum w)^2 / sum w^2` for nonnegative weights.
pub fn effective_sample_size(weights: &[f64]) -> Result<f64, MoatError> {
    if weights.is_empty() {
        return Err(MoatError::EmptyData);
    }
    let sum: f64 = weights.iter().sum();
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    if sum_sq == 0.0 {
        return Err(MoatError::DegenerateWeights);
    }
    Ok(sum * sum / sum_sq)
}

/// Systematic-scan Gibbs chain. Each full conditional is computed from
/// `k_v` exact likelihood evaluations; the first `burn_in` sweeps are
/// discarded and each subsequent sweep contributes one state.
pub fn gibbs_sample<R: rand::Rng + ?Sized>(
    model: &MoatModel,
    evidence: &Evidence,
    m: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>, MoatError> {
    let domain = model.domain();
    let table = model.table();
    let free = evidence.free_variables(domain);
    let log_z = log_partition(model);
    if log_z == f64::NEG_INFINITY {
        return Err(MoatError::DisconnectedGraph);
    }

    // initial state by rejection from the univariate marginals
    let mut x = alloc::vec![0usize; domain.n()];
    for &(v, a) in evidence.entries() {
        x[v] = a;
    }
    let mut found = false;
    for _ in 0..1000 {
        for &v in &free {
            x[v] = sample_index(table.univariate(v), rng);
        }
        if log_likelihood_given(model, &x, log_z)? > f64::NEG_INFINITY {
            found = true;
            break;
        }
    }
    if !found {
        return Err(MoatError::NoValidInitialState);
    }

    let mut out = Vec::with_capacity(m);
    let mut logs = Vec::new();
    for sweep in 0..burn_in + m {
        for &v in &free {
            logs.clear();
            for a in 0..domain.cardinality(v) {
                x[v] = a;
                logs.push(log_likelihood_given(model, &x, log_z)?);
            }
            let norm = log_sum_exp(&logs);
            if norm == f64::NEG_INFINITY {
                return Err(MoatError::ZeroProbabilityEvidence);
            }
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = 0;
            for (a, &l) in logs.iter().enumerate() {
                if l == f64::NEG_INFINITY {
                    continue;
                }
                chosen = a;
                acc += math::exp(l - norm);
                if u < acc {
                    break;
                }
            }
            x[v] = chosen;
        }
        if sweep >= burn_in {
            out.push(x.clone());
        }
    }
    Ok(out)
}

fn sample_index<R: rand::Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = i;
        acc += p;
        if u < acc {
            return i;
        }
    }
    last
}

/// Empirical frequencies of equally weighted chain states, as a posterior
/// estimate (used for Gibbs output).
pub fn estimate_marginals_from_states(
    states: &[Vec<usize>],
    evidence: &Evidence,
    domain: &VarDomain,
) -> Result<PosteriorEstimate, MoatError> {
    if states.is_empty() {
        return Err(MoatError::EmptyData);
    }
    let free = evidence.free_variables(domain);
    let mut marginals: Vec<Vec<f64>> =
        free.iter().map(|&v| alloc::vec![0.0; domain.cardinality(v)]).collect();
    let w = 1.0 / states.len() as f64;
    for x in states {
        for (i, &v) in free.iter().enumerate() {
            marginals[i][x[v]] += w;
        }
    }
    PosteriorEstimate::new(free, marginals, states.len(), states.len() as f64)
}

/// Average KL divergence `D(exact || estimate)` summed over the free
/// variables. Estimate cells are floored at 1e-12 so the metric stays
/// finite; exact zero cells contribute nothing.
pub fn kl_metric(
    exact: &PosteriorEstimate,
    estimate: &PosteriorEstimate,
) -> Result<f64, MoatError> {
    if exact.free != estimate.free {
        return Err(MoatError::FreeVariableMismatch);
    }
    let mut total = 0.0;
    for (pe, ph) in exact.marginals.iter().zip(&estimate.marginals) {
        for (&p, &q) in pe.iter().zip(ph) {
            if p > 0.0 {
                total += p * math::ln(p / q.max(1e-12));
            }
        }
    }
    Ok(total)
}
