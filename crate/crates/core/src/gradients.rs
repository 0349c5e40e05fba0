//! Analytic gradient of the log-likelihood with respect to the free
//! parameters.
//!
//! Both determinants in the likelihood are differentiated via
//! `d ln det M / d theta = tr(M^-1 dM/dtheta)`. Each edge parameter touches
//! the Laplacian minor in a 2x2 pattern, so after one matrix inverse every
//! trace is O(1):
//! `tr(M^-1 A_e) = M^-1[u,u] + M^-1[v,v] - 2 M^-1[u,v]` (the deleted vertex
//! drops its terms). Derivatives of the edge indeterminates
//! `z_e = P_uv / (P_u P_v)` with respect to marginal parameters are exact
//! directional derivatives obtained by replaying the realization of the
//! touched pair with a seeded dual number; the construction is tiny next
//! to the `O(n^3)` inverse.

use alloc::vec::Vec;

use crate::domain::Assignments;
use crate::error::MoatError;
use crate::linalg::{LuFactors, Matrix};
use crate::math::Dual;
use crate::model::params::{realize_pair, softmax_pinned};
use crate::model::{FreeParams, MoatModel};

/// Gradient of the mean log-likelihood; same shape as the parameters.
pub type Gradient = FreeParams;

/// Per-batch context: everything that depends on the parameters but not on
/// the data row. The normalizer minor is factored once here and shared.
struct GradContext<'a> {
    model: &'a MoatModel,
    params: &'a FreeParams,
    /// Weight preconditioner (max weight); constant under differentiation.
    scale: f64,
    /// Trace terms of the normalizer: `tr(L_Z^-1 A_e)` per pair.
    z_traces: Vec<f64>,
    /// Dual univariates per variable per logit direction:
    /// `dual_univ[v][b]` is the softmax of variable v seeded at logit b.
    dual_univ: Vec<Vec<Vec<Dual>>>,
    /// Plain univariates lifted to constant duals, for the untouched side
    /// of a pair.
    const_univ: Vec<Vec<Dual>>,
}

fn minor_trace(inv: &Matrix, u: usize, v: usize, deleted: usize) -> f64 {
    if v == deleted {
        inv.at(u, u)
    } else {
        inv.at(u, u) + inv.at(v, v) - inv.at(u, v) - inv.at(v, u)
    }
}

fn build_minor(n: usize, mut coef: impl FnMut(usize, usize, usize) -> f64) -> Matrix {
    let dim = n - 1;
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

impl<'a> GradContext<'a> {
    fn new(model: &'a MoatModel, params: &'a FreeParams) -> Result<Self, MoatError> {
        params.check_shape(model.domain())?;
        let n = model.domain().n();
        let scale = model.weights().iter().fold(0.0f64, |a, &b| a.max(b));
        if scale <= 0.0 {
            return Err(MoatError::DisconnectedGraph);
        }
        let z_minor = build_minor(n, |_, _, q| model.weights()[q] / scale);
        let lu = LuFactors::factor(&z_minor);
        if lu.signed_log_det().sign <= 0 {
            return Err(MoatError::SingularMinor);
        }
        let z_inv = lu.inverse().ok_or(MoatError::SingularMinor)?;
        let z_traces = crate::domain::pairs(n)
            .map(|(u, v)| minor_trace(&z_inv, u, v, n - 1))
            .collect();

        let dual_univ: Vec<Vec<Vec<Dual>>> = params
            .univariate_logits
            .iter()
            .map(|logits| {
                (0..logits.len())
                    .map(|b| {
                        let seeded: Vec<Dual> = logits
                            .iter()
                            .enumerate()
                            .map(|(i, &l)| Dual::new(l, if i == b { 1.0 } else { 0.0 }))
                            .collect();
                        softmax_pinned(&seeded)
                    })
                    .collect()
            })
            .collect();
        let const_univ: Vec<Vec<Dual>> = (0..n)
            .map(|v| {
                model
                    .table()
                    .univariate(v)
                    .iter()
                    .map(|&p| Dual::new(p, 0.0))
                    .collect()
            })
            .collect();

        Ok(GradContext { model, params, scale, z_traces, dual_univ, const_univ })
    }

    /// Gradient of `log Pr(x)`, accumulated into `out` with coefficient
    /// `coef` (so batch means need no intermediate allocations).
    fn accumulate(&self, x: &[usize], coef: f64, out: &mut Gradient) -> Result<(), MoatError> {
        let domain = self.model.domain();
        domain.check_assignment(x)?;
        let n = domain.n();
        let table = self.model.table();

        for v in 0..n {
            if table.univariate(v)[x[v]] <= 0.0 {
                return Err(MoatError::SingularMinor);
            }
        }

        let star = build_minor(n, |u, v, q| {
            let z = table.pair_cell(u, v, x[u], x[v])
                / (table.univariate(u)[x[u]] * table.univariate(v)[x[v]]);
            (self.model.weights()[q] / self.scale) * z
        });
        let lu = LuFactors::factor(&star);
        if lu.signed_log_det().sign <= 0 {
            return Err(MoatError::SingularMinor);
        }
        let inv = lu.inverse().ok_or(MoatError::SingularMinor)?;

        for (q, (u, v)) in domain.pairs().enumerate() {
            let w_scaled = self.model.weights()[q] / self.scale;
            let tr_star = minor_trace(&inv, u, v, n - 1);
            let z = table.pair_cell(u, v, x[u], x[v])
                / (table.univariate(u)[x[u]] * table.univariate(v)[x[v]]);

            // edge logit: dw/dlogit = w on both determinants
            out.edge_logits[q] += coef * w_scaled * (z * tr_star - self.z_traces[q]);

            // pairwise chain parameters: only z_q moves
            let sensitivity = w_scaled * tr_star;
            let denom = table.univariate(u)[x[u]] * table.univariate(v)[x[v]];
            for c in 0..self.params.pair_params[q].len() {
                let chain: Vec<Dual> = self.params.pair_params[q]
                    .iter()
                    .enumerate()
                    .map(|(i, &t)| Dual::new(t, if i == c { 1.0 } else { 0.0 }))
                    .collect();
                let cells = realize_pair(&self.const_univ[u], &self.const_univ[v], &chain);
                let dcell = cells[x[u] * domain.cardinality(v) + x[v]].dot;
                out.pair_params[q][c] += coef * sensitivity * dcell / denom;
            }
        }

        // univariate logits: the direct log P_v(x_v) term plus every pair
        // containing v through z = P_uv / (P_u P_v)
        for v in 0..n {
            for b in 0..self.params.univariate_logits[v].len() {
                let pu_dual = &self.dual_univ[v][b];
                let mut acc = pu_dual[x[v]].dot / pu_dual[x[v]].val;
                for w in 0..n {
                    if w == v {
                        continue;
                    }
                    let (lo, hi) = (v.min(w), v.max(w));
                    let q = domain.pair_index(lo, hi);
                    let w_scaled = self.model.weights()[q] / self.scale;
                    let tr_star = {
                        // recompute the trace for this pair orientation
                        minor_trace(&inv, lo, hi, n - 1)
                    };
                    let chain: Vec<Dual> = self.params.pair_params[q]
                        .iter()
                        .map(|&t| Dual::new(t, 0.0))
                        .collect();
                    let (pl, ph): (&[Dual], &[Dual]) = if v == lo {
                        (pu_dual, &self.const_univ[hi])
                    } else {
                        (&self.const_univ[lo], pu_dual)
                    };
                    let cells = realize_pair(pl, ph, &chain);
                    let cell = cells[x[lo] * domain.cardinality(hi) + x[hi]];
                    let z_dual = cell / (pl[x[lo]] * ph[x[hi]]);
                    acc += w_scaled * tr_star * z_dual.dot;
                }
                out.univariate_logits[v][b] += coef * acc;
            }
        }
        Ok(())
    }
}

/// Exact gradient of `log Pr(x)` with respect to every free parameter.
/// `model` must be the realization of `params`.
pub fn grad_log_likelihood(
    model: &MoatModel,
    params: &FreeParams,
    x: &[usize],
) -> Result<Gradient, MoatError> {
    let ctx = GradContext::new(model, params)?;
    let mut out = FreeParams::zeros(model.domain());
    ctx.accumulate(x, 1.0, &mut out)?;
    Ok(out)
}

/// Mean per-row gradient over a batch. The normalizer minor is factored
/// once and shared across all rows.
pub fn grad_batch(
    model: &MoatModel,
    params: &FreeParams,
    data: &Assignments<'_>,
) -> Result<Gradient, MoatError> {
    if data.is_empty() {
        return Err(MoatError::EmptyData);
    }
    let ctx = GradContext::new(model, params)?;
    let mut out = FreeParams::zeros(model.domain());
    let coef = 1.0 / data.n_rows() as f64;
    for row in data.rows() {
        ctx.accumulate(row, coef, &mut out)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::VarDomain;
    use crate::likelihood::log_likelihood;
    use rand::SeedableRng;

    /// Central finite difference of the log-likelihood along one flat
    /// parameter coordinate.
    fn fd_coordinate(
        params: &FreeParams,
        domain: &VarDomain,
        x: &[usize],
        idx: usize,
        step: f64,
    ) -> f64 {
        let base = params.to_flat();
        let eval = |v: f64| {
            let mut flat = base.clone();
            flat[idx] = v;
            let mut p = params.clone();
            p.assign_from_flat(&flat);
            let m = p.realize(domain).unwrap();
            log_likelihood(&m, x).unwrap()
        };
        (eval(base[idx] + step) - eval(base[idx] - step)) / (2.0 * step)
    }

    #[test]
    fn independence_zeroes_the_edge_gradient() {
        // product-form marginals make the likelihood weight-free
        let domain = VarDomain::binary(4).unwrap();
        // zero pair logits give the Frechet midpoint, not independence;
        // invert an explicitly independent table instead
        let univariate: Vec<Vec<f64>> = alloc::vec![
            alloc::vec![0.3, 0.7],
            alloc::vec![0.5, 0.5],
            alloc::vec![0.8, 0.2],
            alloc::vec![0.4, 0.6],
        ];
        let pairwise = crate::domain::pairs(4)
            .map(|(u, v)| {
                let mut m = alloc::vec![0.0; 4];
                for a in 0..2 {
                    for b in 0..2 {
                        m[a * 2 + b] = univariate[u][a] * univariate[v][b];
                    }
                }
                m
            })
            .collect();
        let table =
            crate::model::MarginalTable::new(domain.clone(), univariate, pairwise).unwrap();
        let params = FreeParams::invert_marginals(&table).unwrap();
        let model = params.realize(&domain).unwrap();
        let g = grad_log_likelihood(&model, &params, &[1, 0, 1, 1]).unwrap();
        for &e in &g.edge_logits {
            assert!(e.abs() < 1e-9, "edge gradient {e}");
        }
    }

    #[test]
    fn matches_central_finite_differences() {
        let domain = VarDomain::new(alloc::vec![2, 3, 2, 2]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(101);
        for trial in 0..5 {
            let params = FreeParams::standard_normal(&domain, &mut rng);
            let model = params.realize(&domain).unwrap();
            let x = [trial % 2, trial % 3, (trial + 1) % 2, 0];
            let g = grad_log_likelihood(&model, &params, &x).unwrap();
            let flat_g = g.to_flat();
            for idx in 0..flat_g.len() {
                let fd = fd_coordinate(&params, &domain, &x, idx, 1e-5);
                let scale = flat_g[idx].abs().max(fd.abs()).max(1e-4);
                assert!(
                    (flat_g[idx] - fd).abs() / scale < 1e-5,
                    "trial {trial} coord {idx}: analytic {} vs fd {fd}",
                    flat_g[idx]
                );
            }
        }
    }

    #[test]
    fn permutation_symmetry_of_the_gradient() {
        // identical variables, uniform weights, symmetric assignment:
        // every symmetric parameter slot gets the same gradient
        let domain = VarDomain::binary(4).unwrap();
        let mut params = FreeParams::zeros(&domain);
        params.univariate_logits.iter_mut().for_each(|l| l[0] = 0.37);
        params.pair_params.iter_mut().for_each(|l| l[0] = -0.85);
        let model = params.realize(&domain).unwrap();
        let g = grad_log_likelihood(&model, &params, &[1, 1, 1, 1]).unwrap();
        for w in g.edge_logits.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-12);
        }
        for w in g.univariate_logits.windows(2) {
            assert!((w[0][0] - w[1][0]).abs() < 1e-12);
        }
        for w in g.pair_params.windows(2) {
            assert!((w[0][0] - w[1][0]).abs() < 1e-12);
        }
    }

    #[test]
    fn batch_gradient_is_the_mean_of_rows() {
        let domain = VarDomain::binary(5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(303);
        let params = FreeParams::standard_normal(&domain, &mut rng);
        let model = params.realize(&domain).unwrap();

        let single = [1usize, 0, 0, 1, 0];
        let g1 = grad_log_likelihood(&model, &params, &single).unwrap();
        let twice = [1usize, 0, 0, 1, 0, 1, 0, 0, 1, 0];
        let data = Assignments::new(&twice, 5).unwrap();
        let g2 = grad_batch(&model, &params, &data).unwrap();
        for (a, b) in g1.to_flat().iter().zip(g2.to_flat()) {
            assert!((a - b).abs() < 1e-12);
        }

        let mixed = [1usize, 0, 0, 1, 0, 0, 1, 1, 0, 1];
        let data = Assignments::new(&mixed, 5).unwrap();
        let gm = grad_batch(&model, &params, &data).unwrap();
        let ga = grad_log_likelihood(&model, &params, &mixed[..5]).unwrap();
        let gb = grad_log_likelihood(&model, &params, &mixed[5..]).unwrap();
        for ((m, a), b) in gm.to_flat().iter().zip(ga.to_flat()).zip(gb.to_flat()) {
            assert!((m - 0.5 * (a + b)).abs() < 1e-12);
        }
    }
}

