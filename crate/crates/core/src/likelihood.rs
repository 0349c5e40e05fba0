//! Exact MoAT likelihood via weighted Laplacian log-determinants.
//!
//! By the Matrix Tree Theorem, deleting one row/column of the weighted
//! Laplacian of `K_n` and taking the determinant yields the weighted
//! spanning-tree sum. With edge indeterminates set to 1 this is the
//! normalization constant `Z`; setting them to
//! `P_uv(x_u, x_v) / (P_u(x_u) P_v(x_v))` turns the same determinant into
//! the unnormalized mixture likelihood of the assignment `x`, so one `O(n^3)`
//! factorization replaces a sum over `n^(n-2)` trees.
//!
//! [`RawMoat`] evaluates the identical algebraic expression with no sign or
//! consistency constraints on the marginals. That is the "semiring query"
//! regime: determinants may legitimately come out negative, which the
//! hardness gadgets in [`crate::oracle`] rely on.

use alloc::vec::Vec;

use crate::domain::{Assignments, Evidence, VarDomain};
use crate::error::MoatError;
use crate::linalg::{signed_log_det, Matrix};
use crate::math;
use crate::model::MoatModel;

/// Univariate cells below this are treated as exact zeros (log-likelihood
/// `-inf`) instead of being pushed through the ratio arithmetic.
const UNIVARIATE_FLOOR: f64 = 1e-300;

/// Deleted row/column for every principal minor. Any choice is valid; the
/// last index is fixed for determinism.
fn minor_dim(n: usize) -> usize {
    n - 1
}

/// Builds the principal minor of the weighted Laplacian, with the
/// coefficient of each edge supplied by `coef(u, v, pair_index)`.
fn laplacian_minor(n: usize, mut coef: impl FnMut(usize, usize, usize) -> f64) -> Matrix {
    let dim = minor_dim(n);
    let mut m = Matrix::zeros(dim);
    for (q, (u, v)) in crate::domain::pairs(n).enumerate() {
        let c = coef(u, v, q);
        if c == 0.0 {
            continue;
        }
        *m.at_mut(u, u) += c;
        if v < dim {
            *m.at_mut(v, v) += c;
            *m.at_mut(u, v) -= c;
            *m.at_mut(v, u) -= c;
        }
    }
    m
}

/// `log Z`: the log of the weighted spanning-tree sum over `K_n`.
///
/// Returns `-inf` when the strictly-positive-weight subgraph is
/// disconnected (the tree sum is empty).
pub fn log_partition(model: &MoatModel) -> f64 {
    log_weighted_tree_sum(model.domain().n(), model.weights())
}

/// `log sum_T prod_{e in T} w_e` over spanning trees of `K_n`, for weights
/// in pair-index order. Weights are rescaled by their maximum before
/// factorization so very large or very small weights cannot overflow the
/// determinant; the exact correction is added back in log space.
pub fn log_weighted_tree_sum(n: usize, weights: &[f64]) -> f64 {
    let scale = max_weight(weights);
    if scale <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let m = laplacian_minor(n, |_, _, q| weights[q] / scale);
    let det = signed_log_det(&m);
    if det.sign <= 0 {
        return f64::NEG_INFINITY;
    }
    det.log_abs + (n as f64 - 1.0) * math::ln(scale)
}

fn max_weight(w: &[f64]) -> f64 {
    w.iter().fold(0.0f64, |a, &b| a.max(b))
}

/// `log Pr_MoAT(x)`.
///
/// `P_v(x_v) = 0` yields `-inf`; a NaN table cell is an error; a
/// disconnected positive-weight subgraph (Z = 0) is an error.
pub fn log_likelihood(model: &MoatModel, x: &[usize]) -> Result<f64, MoatError> {
    let log_z = log_partition(model);
    if log_z == f64::NEG_INFINITY {
        return Err(MoatError::DisconnectedGraph);
    }
    log_likelihood_given(model, x, log_z)
}

/// [`log_likelihood`] with a precomputed `log Z`, so batch evaluations
/// factor the normalizer once.
pub fn log_likelihood_given(
    model: &MoatModel,
    x: &[usize],
    log_z: f64,
) -> Result<f64, MoatError> {
    let domain = model.domain();
    domain.check_assignment(x)?;
    let n = domain.n();
    let table = model.table();

    let mut log_univ = 0.0;
    for v in 0..n {
        let p = table.univariate(v)[x[v]];
        if p.is_nan() {
            return Err(MoatError::NonFiniteTable);
        }
        if p < UNIVARIATE_FLOOR {
            return Ok(f64::NEG_INFINITY);
        }
        log_univ += math::ln(p);
    }

    let scale = max_weight(model.weights());
    let mut nan = false;
    let m = laplacian_minor(n, |u, v, q| {
        let pu = table.univariate(u)[x[u]];
        let pv = table.univariate(v)[x[v]];
        let z = table.pair_cell(u, v, x[u], x[v]) / (pu * pv);
        if z.is_nan() {
            nan = true;
            return 0.0;
        }
        (model.weights()[q] / scale) * z
    });
    if nan {
        return Err(MoatError::NonFiniteTable);
    }
    let det = signed_log_det(&m);
    if det.sign <= 0 {
        // the determinant is a sum of nonnegative tree terms; zero (or
        // rounding noise below zero) means no tree supports x
        return Ok(f64::NEG_INFINITY);
    }
    Ok(log_univ + det.log_abs + (n as f64 - 1.0) * math::ln(scale) - log_z)
}

/// Arithmetic mean of per-row log-likelihoods. The partition function is
/// factored once and shared across rows.
pub fn batch_mean_log_likelihood(
    model: &MoatModel,
    data: &Assignments<'_>,
) -> Result<f64, MoatError> {
    if data.is_empty() {
        return Err(MoatError::EmptyData);
    }
    let log_z = log_partition(model);
    if log_z == f64::NEG_INFINITY {
        return Err(MoatError::DisconnectedGraph);
    }
    let mut acc = 0.0;
    for row in data.rows() {
        acc += log_likelihood_given(model, row, log_z)?;
    }
    Ok(acc / data.n_rows() as f64)
}

/// A MoAT-shaped likelihood function with no sign or consistency
/// constraints on its "marginals". Only the cells actually touched by an
/// evaluation must have nonzero univariate entries.
#[derive(Clone, Debug)]
pub struct RawMoat {
    domain: VarDomain,
    weights: Vec<f64>,
    univariate: Vec<Vec<f64>>,
    pairwise: Vec<Vec<f64>>,
}

impl RawMoat {
    /// Shapes as in [`crate::model::MarginalTable`]; values unconstrained.
    pub fn new(
        domain: VarDomain,
        weights: Vec<f64>,
        univariate: Vec<Vec<f64>>,
        pairwise: Vec<Vec<f64>>,
    ) -> Result<Self, MoatError> {
        if weights.len() != domain.pair_count() {
            return Err(MoatError::ShapeMismatch("weight count".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MoatError::NonFiniteTable);
        }
        if univariate.len() != domain.n()
            || univariate
                .iter()
                .enumerate()
                .any(|(v, p)| p.len() != domain.cardinality(v))
        {
            return Err(MoatError::ShapeMismatch("univariate shapes".into()));
        }
        let pair_shapes_ok = domain
            .pairs()
            .enumerate()
            .all(|(q, (u, v))| {
                pairwise.get(q).map(Vec::len)
                    == Some(domain.cardinality(u) * domain.cardinality(v))
            });
        if pairwise.len() != domain.pair_count() || !pair_shapes_ok {
            return Err(MoatError::ShapeMismatch("pairwise shapes".into()));
        }
        Ok(RawMoat { domain, weights, univariate, pairwise })
    }

    /// Wraps a valid model's tables as an unconstrained evaluator.
    pub fn from_model(model: &MoatModel) -> Self {
        let domain = model.domain().clone();
        RawMoat {
            weights: model.weights().to_vec(),
            univariate: (0..domain.n())
                .map(|v| model.table().univariate(v).to_vec())
                .collect(),
            pairwise: domain
                .pairs()
                .map(|(u, v)| model.table().pairwise(u, v).to_vec())
                .collect(),
        domain,
        }
    }

    pub fn domain(&self) -> &VarDomain {
        &self.domain
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn univ(&self, v: usize, a: usize) -> f64 {
        self.univariate[v][a]
    }

    fn pair_cell(&self, u: usize, v: usize, a: usize, b: usize) -> f64 {
        self.pairwise[self.domain.pair_index(u, v)][a * self.domain.cardinality(v) + b]
    }

    /// `log Z` of the weight graph, ignoring the marginals entirely.
    pub fn log_partition(&self) -> f64 {
        let n = self.domain.n();
        let scale = max_weight(&self.weights);
        if scale <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let m = laplacian_minor(n, |_, _, q| self.weights[q] / scale);
        let det = signed_log_det(&m);
        if det.sign <= 0 {
            return f64::NEG_INFINITY;
        }
        det.log_abs + (n as f64 - 1.0) * math::ln(scale)
    }
}

/// Evaluates `(1/Z) (prod_v P_v(x_v)) det(L*|_x)` with no sign checks; the
/// result may be negative. Signs and magnitudes are tracked separately so
/// gadget-scale values (`~ eps^-(n-2)`) stay representable.
pub fn raw_evaluate(raw: &RawMoat, x: &[usize]) -> Result<f64, MoatError> {
    let log_z = raw.log_partition();
    if log_z == f64::NEG_INFINITY {
        return Err(MoatError::DisconnectedGraph);
    }
    raw_evaluate_given(raw, x, log_z)
}

fn raw_evaluate_given(raw: &RawMoat, x: &[usize], log_z: f64) -> Result<f64, MoatError> {
    let domain = raw.domain();
    domain.check_assignment(x)?;
    let n = domain.n();

    let mut sign = 1i8;
    let mut log_abs = 0.0;
    for v in 0..n {
        let p = raw.univ(v, x[v]);
        if !p.is_finite() {
            return Err(MoatError::NonFiniteTable);
        }
        if p == 0.0 {
            return Err(MoatError::ZeroDivisorCell { var: v });
        }
        if p < 0.0 {
            sign = -sign;
        }
        log_abs += math::ln(p.abs());
    }

    let scale = max_weight(&raw.weights);
    let m = laplacian_minor(n, |u, v, q| {
        let z = raw.pair_cell(u, v, x[u], x[v]) / (raw.univ(u, x[u]) * raw.univ(v, x[v]));
        (raw.weights[q] / scale) * z
    });
    let det = signed_log_det(&m);
    if det.sign == 0 {
        return Ok(0.0);
    }
    sign *= det.sign;
    let magnitude =
        math::exp(log_abs + det.log_abs + (n as f64 - 1.0) * math::ln(scale) - log_z);
    Ok(sign as f64 * magnitude)
}

/// Semiring query `f(e) = sum_z p(z, e)`: the raw evaluation summed over
/// every completion of the evidence. Exhaustive; at most 20 free variables.
pub fn raw_semiring_sum(raw: &RawMoat, evidence: &Evidence) -> Result<f64, MoatError> {
    let domain = raw.domain();
    let free = evidence.free_variables(domain);
    if free.len() > 20 {
        return Err(MoatError::DomainTooLarge { limit: 20, requested: free.len() });
    }
    let log_z = raw.log_partition();
    if log_z == f64::NEG_INFINITY {
        return Err(MoatError::DisconnectedGraph);
    }
    let mut acc = 0.0;
    let mut err = None;
    evidence.for_each_completion(domain, |x| {
        if err.is_some() {
            return;
        }
        match raw_evaluate_given(raw, x, log_z) {
            Ok(v) => acc += v,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}
