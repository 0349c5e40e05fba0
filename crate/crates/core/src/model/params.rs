//! Unconstrained free parameters and the total map onto consistent
//! marginals.
//!
//! Univariate marginals come from a softmax over `k-1` logits with value 0
//! pinned at logit zero. A binary pairwise marginal is a single logit
//! squashed into the Frechet interval
//! `[max(0, p_u + p_v - 1), min(p_u, p_v)]` for the (1,1) cell. Categorical
//! pairs use an inductive scaling chain of `min(k_u, k_v) - 1` logits: a
//! one-parameter base block is grown one row and one column at a time, each
//! step scaling the previous block by a bounded factor and filling the new
//! row/column so the block's margins stay proportional to the univariates.
//! Every bound is recomputed from the current univariates, so the whole map
//! is total: any finite parameter vector realizes a consistent table.

use alloc::vec::Vec;

use crate::domain::VarDomain;
use crate::error::MoatError;
use crate::math::{self, safe_div, smax, smin, Scalar};
use crate::model::{MarginalTable, MoatModel};

/// Marginals are clamped this far inside [0, 1] before inversion so that
/// empirical point masses invert to finite logits.
const INTERIOR_CLAMP: f64 = 1e-6;

/// Unconstrained real parameters for a MoAT model.
///
/// Shapes, per [`VarDomain`]: one edge logit per unordered pair (row-major
/// upper-triangular order, `w_e = exp(logit)`), `k_v - 1` univariate logits
/// per variable, and `min(k_u, k_v) - 1` pairwise parameters per pair.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeParams {
    pub edge_logits: Vec<f64>,
    pub univariate_logits: Vec<Vec<f64>>,
    pub pair_params: Vec<Vec<f64>>,
}

impl FreeParams {
    /// All-zero parameters: unit edge weights, uniform univariates, and
    /// midpoint pairwise cells.
    pub fn zeros(domain: &VarDomain) -> Self {
        FreeParams {
            edge_logits: alloc::vec![0.0; domain.pair_count()],
            univariate_logits: (0..domain.n())
                .map(|v| alloc::vec![0.0; domain.cardinality(v) - 1])
                .collect(),
            pair_params: domain
                .pairs()
                .map(|(u, v)| {
                    let k = domain.cardinality(u).min(domain.cardinality(v));
                    alloc::vec![0.0; k - 1]
                })
                .collect(),
        }
    }

    /// Every entry drawn i.i.d. from N(0, 1).
    pub fn standard_normal<R: rand::Rng + ?Sized>(domain: &VarDomain, rng: &mut R) -> Self {
        let mut p = Self::zeros(domain);
        p.for_each_mut(|x| *x = math::standard_normal(rng));
        p
    }

    pub fn check_shape(&self, domain: &VarDomain) -> Result<(), MoatError> {
        if self.edge_logits.len() != domain.pair_count() {
            return Err(MoatError::ShapeMismatch("edge logit count".into()));
        }
        if self.univariate_logits.len() != domain.n() {
            return Err(MoatError::ShapeMismatch("univariate logit count".into()));
        }
        for (v, l) in self.univariate_logits.iter().enumerate() {
            if l.len() != domain.cardinality(v) - 1 {
                return Err(MoatError::ShapeMismatch(alloc::format!(
                    "univariate logits of variable {v}"
                )));
            }
        }
        if self.pair_params.len() != domain.pair_count() {
            return Err(MoatError::ShapeMismatch("pair param count".into()));
        }
        for (q, (u, v)) in domain.pairs().enumerate() {
            let k = domain.cardinality(u).min(domain.cardinality(v));
            if self.pair_params[q].len() != k - 1 {
                return Err(MoatError::ShapeMismatch(alloc::format!(
                    "pair params of ({u},{v})"
                )));
            }
        }
        Ok(())
    }

    /// Maps the parameters onto a full model. Total for finite parameters:
    /// the result always passes [`MarginalTable::validate`].
    pub fn realize(&self, domain: &VarDomain) -> Result<MoatModel, MoatError> {
        self.check_shape(domain)?;
        let univariate: Vec<Vec<f64>> = self
            .univariate_logits
            .iter()
            .map(|l| softmax_pinned(l))
            .collect();
        let pairwise: Vec<Vec<f64>> = domain
            .pairs()
            .enumerate()
            .map(|(q, (u, v))| {
                realize_pair(&univariate[u], &univariate[v], &self.pair_params[q])
            })
            .collect();
        let weights: Vec<f64> = self.edge_logits.iter().map(|&l| math::exp(l)).collect();
        let table = MarginalTable::new(domain.clone(), univariate, pairwise)?;
        MoatModel::new(weights, table)
    }

    /// Recovers free parameters whose realization reproduces `table`
    /// (exactly for binary pairs; categorical pairs are projected onto the
    /// scaling-chain family, which preserves univariates and prefix
    /// masses). Marginals are clamped to the interior first so empirical
    /// point masses stay invertible. Edge logits are set to zero.
    pub fn invert_marginals(table: &MarginalTable) -> Result<Self, MoatError> {
        let domain = table.domain();
        let mut clamped: Vec<Vec<f64>> = Vec::with_capacity(domain.n());
        let mut univariate_logits = Vec::with_capacity(domain.n());
        for v in 0..domain.n() {
            let p = table.univariate(v);
            if p.iter().any(|x| !x.is_finite()) {
                return Err(MoatError::NonFiniteTable);
            }
            let cu = clamp_interior(p);
            if cu.iter().any(|&x| x <= 0.0 || x >= 1.0) {
                return Err(MoatError::BoundaryTable { var: v });
            }
            univariate_logits.push((1..cu.len()).map(|a| math::ln(cu[a] / cu[0])).collect());
            clamped.push(cu);
        }
        let mut pair_params = Vec::with_capacity(domain.pair_count());
        for (u, v) in domain.pairs() {
            let target = table.pairwise(u, v);
            if target.iter().any(|x| !x.is_finite()) {
                return Err(MoatError::NonFiniteTable);
            }
            pair_params.push(invert_pair(target, &clamped[u], &clamped[v]));
        }
        Ok(FreeParams {
            edge_logits: alloc::vec![0.0; domain.pair_count()],
            univariate_logits,
            pair_params,
        })
    }

    /// Number of scalar parameters.
    pub fn len(&self) -> usize {
        self.edge_logits.len()
            + self.univariate_logits.iter().map(Vec::len).sum::<usize>()
            + self.pair_params.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        self.edge_logits.iter_mut().for_each(&mut f);
        self.univariate_logits
            .iter_mut()
            .for_each(|l| l.iter_mut().for_each(&mut f));
        self.pair_params
            .iter_mut()
            .for_each(|l| l.iter_mut().for_each(&mut f));
    }

    /// `self += c * other`, elementwise over identical shapes.
    pub fn scaled_add(&mut self, c: f64, other: &FreeParams) {
        for (a, b) in self.edge_logits.iter_mut().zip(&other.edge_logits) {
            *a += c * b;
        }
        for (la, lb) in self.univariate_logits.iter_mut().zip(&other.univariate_logits) {
            for (a, b) in la.iter_mut().zip(lb) {
                *a += c * b;
            }
        }
        for (la, lb) in self.pair_params.iter_mut().zip(&other.pair_params) {
            for (a, b) in la.iter_mut().zip(lb) {
                *a += c * b;
            }
        }
    }

    /// Flat copy of all parameters: edge logits, then univariate logits by
    /// variable, then pair parameters by pair.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.edge_logits);
        for l in &self.univariate_logits {
            out.extend_from_slice(l);
        }
        for l in &self.pair_params {
            out.extend_from_slice(l);
        }
        out
    }

    /// Inverse of [`FreeParams::to_flat`] for an identically shaped vector.
    pub fn assign_from_flat(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        self.for_each_mut(|x| *x = *it.next().expect("flat vector too short"));
    }
}

/// Softmax over `[logits..., 0]`-style pinning: value 0 carries an implicit
/// zero logit, `logits[a-1]` belongs to value `a`.
pub(crate) fn softmax_pinned<T: Scalar>(logits: &[T]) -> Vec<T> {
    let mut m = 0.0;
    for l in logits {
        if l.value() > m {
            m = l.value();
        }
    }
    let shift = T::constant(m);
    let mut probs = Vec::with_capacity(logits.len() + 1);
    probs.push((T::constant(0.0) - shift).exp());
    for &l in logits {
        probs.push((l - shift).exp());
    }
    let mut total = T::constant(0.0);
    for &p in &probs {
        total = total + p;
    }
    for p in &mut probs {
        *p = *p / total;
    }
    probs
}

/// Realizes the pairwise matrix for one pair, rows indexed by the first
/// argument's values. `chain` holds `min(k_u, k_v) - 1` raw logits.
pub(crate) fn realize_pair<T: Scalar>(pu: &[T], pv: &[T], chain: &[T]) -> Vec<T> {
    let (ku, kv) = (pu.len(), pv.len());
    if ku == 2 && kv == 2 {
        realize_pair_binary(pu, pv, chain[0])
    } else if ku <= kv {
        chain_build(pu, pv, chain)
    } else {
        transpose(&chain_build(pv, pu, chain), kv, ku)
    }
}

/// Binary pair: the (1,1) cell is squashed into its Frechet interval, the
/// remaining cells follow from the margins.
fn realize_pair_binary<T: Scalar>(pu: &[T], pv: &[T], beta: T) -> Vec<T> {
    let zero = T::constant(0.0);
    let one = T::constant(1.0);
    let (a, b) = (pu[1], pv[1]);
    let lo = smax(zero, a + b - one);
    let hi = smin(a, b);
    let p11 = lo + beta.sigmoid() * (hi - lo);
    alloc::vec![one - a - b + p11, b - p11, a - p11, p11]
}

/// Inductive scaling-chain construction for `k_r <= k_c`. Returns the
/// row-major `k_r x k_c` matrix.
///
/// The base block spans rows {0,1} and the first `k_c - k_r + 2` columns:
/// the columns past the first are merged into one super-column, the merged
/// 2x2 block gets its Frechet-interval parameter, and the super-column is
/// split back proportionally to the column margins. Each later step scales
/// the previous block by `lambda` and appends one row and one column.
fn chain_build<T: Scalar>(r: &[T], c: &[T], chain: &[T]) -> Vec<T> {
    let (kr, kc) = (r.len(), c.len());
    debug_assert!(kr >= 2 && kr <= kc);
    debug_assert_eq!(chain.len(), kr - 1);
    let zero = T::constant(0.0);
    let one = T::constant(1.0);
    let m = kc - kr + 2;

    // base: rows {0, 1}, columns 0..m
    let su = r[0] + r[1];
    let mut sv = zero;
    for &cj in &c[..m] {
        sv = sv + cj;
    }
    let q0 = safe_div(r[0], su);
    let d0 = safe_div(c[0], sv);
    let lo = smax(zero, q0 + d0 - one);
    let hi = smin(q0, d0);
    let lambda = lo + chain[0].sigmoid() * (hi - lo);

    let mut block = alloc::vec![zero; 2 * m];
    block[0] = lambda;
    block[m] = d0 - lambda;
    let tail = sv - c[0];
    for j in 1..m {
        let dj = safe_div(c[j], sv);
        let top = (q0 - lambda) * safe_div(c[j], tail);
        block[j] = top;
        block[m + j] = dj - top;
    }

    let (mut rows, mut cols) = (2usize, m);
    let mut su_prev = su;
    let mut sv_prev = sv;
    for (step, &theta) in chain.iter().enumerate().skip(1) {
        let new_row = rows; // value index of the appended row/column
        let new_col = cols;
        let su_new = su_prev + r[new_row];
        let sv_new = sv_prev + c[new_col];
        let ru = safe_div(su_prev, su_new);
        let rv = safe_div(sv_prev, sv_new);
        let lo = smax(zero, ru + rv - one);
        let hi = smin(ru, rv);
        let lambda = lo + theta.sigmoid() * (hi - lo);

        let mut next = alloc::vec![zero; (rows + 1) * (cols + 1)];
        for i in 0..rows {
            for j in 0..cols {
                next[i * (cols + 1) + j] = lambda * block[i * cols + j];
            }
            next[i * (cols + 1) + new_col] =
                safe_div(r[i], su_new) - lambda * safe_div(r[i], su_prev);
        }
        for j in 0..cols {
            next[new_row * (cols + 1) + j] =
                safe_div(c[j], sv_new) - lambda * safe_div(c[j], sv_prev);
        }
        next[new_row * (cols + 1) + new_col] = one - ru - rv + lambda;

        block = next;
        rows += 1;
        cols += 1;
        su_prev = su_new;
        sv_prev = sv_new;
        let _ = step;
    }
    debug_assert_eq!(rows, kr);
    debug_assert_eq!(cols, kc);
    block
}

fn transpose<T: Copy>(m: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(m.len());
    for j in 0..cols {
        for i in 0..rows {
            out.push(m[i * cols + j]);
        }
    }
    out
}

/// Raises every entry to at least [`INTERIOR_CLAMP`], then renormalizes.
fn clamp_interior(p: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = p.iter().map(|&x| x.max(INTERIOR_CLAMP)).collect();
    let total: f64 = out.iter().sum();
    for x in &mut out {
        *x /= total;
    }
    out
}

fn clamp_unit_ratio(t: f64) -> f64 {
    if !t.is_finite() {
        return 0.5;
    }
    t.clamp(INTERIOR_CLAMP, 1.0 - INTERIOR_CLAMP)
}

/// Recovers the chain logits that (re)produce `target` for the given
/// clamped univariates. Exact when `target` lies in the chain family.
fn invert_pair(target: &[f64], pu: &[f64], pv: &[f64]) -> Vec<f64> {
    let (ku, kv) = (pu.len(), pv.len());
    if ku == 2 && kv == 2 {
        let (a, b) = (pu[1], pv[1]);
        let lo = (a + b - 1.0).max(0.0);
        let hi = a.min(b);
        let p11 = target[3];
        let t = clamp_unit_ratio(if hi > lo { (p11 - lo) / (hi - lo) } else { 0.5 });
        return alloc::vec![math::logit(t)];
    }
    if ku <= kv {
        invert_chain(target, pu, pv)
    } else {
        invert_chain(&transpose(target, ku, kv), pv, pu)
    }
}

/// Chain-family inversion via prefix masses: each step's scaling factor is
/// the ratio of consecutive prefix masses of the target matrix.
fn invert_chain(target: &[f64], r: &[f64], c: &[f64]) -> Vec<f64> {
    let (kr, kc) = (r.len(), c.len());
    let m = kc - kr + 2;
    let prefix_mass = |rows: usize, cols: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..rows {
            for j in 0..cols {
                acc += target[i * kc + j];
            }
        }
        acc
    };

    let mut chain = Vec::with_capacity(kr - 1);

    // base parameter: collapsed (0,0) cell of the conditional base block
    let m0 = prefix_mass(2, m);
    let lambda0 = if m0 > 0.0 { target[0] / m0 } else { 0.0 };
    let q0 = r[0] / (r[0] + r[1]);
    let sv: f64 = c[..m].iter().sum();
    let d0 = c[0] / sv;
    let lo = (q0 + d0 - 1.0).max(0.0);
    let hi = q0.min(d0);
    let t = clamp_unit_ratio(if hi > lo { (lambda0 - lo) / (hi - lo) } else { 0.5 });
    chain.push(math::logit(t));

    let mut su_prev: f64 = r[0] + r[1];
    let mut sv_prev = sv;
    let mut mass_prev = m0;
    for step in 1..kr - 1 {
        let (rows, cols) = (2 + step, m + step);
        let su_new = su_prev + r[rows - 1];
        let sv_new = sv_prev + c[cols - 1];
        let mass_new = prefix_mass(rows, cols);
        let lambda = if mass_new > 0.0 { mass_prev / mass_new } else { 0.0 };
        let ru = su_prev / su_new;
        let rv = sv_prev / sv_new;
        let lo = (ru + rv - 1.0).max(0.0);
        let hi = ru.min(rv);
        let t = clamp_unit_ratio(if hi > lo { (lambda - lo) / (hi - lo) } else { 0.5 });
        chain.push(math::logit(t));
        su_prev = su_new;
        sv_prev = sv_new;
        mass_prev = mass_new;
    }
    chain
}
