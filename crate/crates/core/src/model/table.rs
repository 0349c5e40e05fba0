//! Realized univariate and pairwise marginals, and their consistency checks.

use alloc::vec::Vec;

use crate::domain::VarDomain;
use crate::error::MoatError;

/// Tolerance for univariate normalization.
const UNIVARIATE_SUM_TOL: f64 = 1e-12;
/// Tolerance for pairwise row/column/total sums against the univariates.
const PAIR_SUM_TOL: f64 = 1e-10;
/// Entries this far below zero are genuine sign violations rather than
/// floating-point dust.
const NEGATIVITY_TOL: f64 = 1e-12;

/// Mutually consistent univariate and pairwise marginals for all variables
/// and all unordered pairs.
///
/// For pair `{u, v}` with `u < v`, the pairwise matrix is stored row-major
/// with rows indexed by `u`'s values and columns by `v`'s values. Pair
/// matrices appear in row-major upper-triangular pair order.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalTable {
    domain: VarDomain,
    univariate: Vec<Vec<f64>>,
    pairwise: Vec<Vec<f64>>,
}

impl MarginalTable {
    /// Shape-checks only; use [`MarginalTable::validate`] for the
    /// consistency invariants.
    pub fn new(
        domain: VarDomain,
        univariate: Vec<Vec<f64>>,
        pairwise: Vec<Vec<f64>>,
    ) -> Result<Self, MoatError> {
        if univariate.len() != domain.n() {
            return Err(MoatError::ShapeMismatch("univariate count != n".into()));
        }
        for (v, p) in univariate.iter().enumerate() {
            if p.len() != domain.cardinality(v) {
                return Err(MoatError::ShapeMismatch(alloc::format!(
                    "univariate {v} has {} entries, expected {}",
                    p.len(),
                    domain.cardinality(v)
                )));
            }
        }
        if pairwise.len() != domain.pair_count() {
            return Err(MoatError::ShapeMismatch("pairwise count != n(n-1)/2".into()));
        }
        for (u, v) in domain.pairs() {
            let q = domain.pair_index(u, v);
            let expect = domain.cardinality(u) * domain.cardinality(v);
            if pairwise[q].len() != expect {
                return Err(MoatError::ShapeMismatch(alloc::format!(
                    "pair ({u},{v}) has {} entries, expected {expect}",
                    pairwise[q].len()
                )));
            }
        }
        Ok(MarginalTable { domain, univariate, pairwise })
    }

    pub fn domain(&self) -> &VarDomain {
        &self.domain
    }

    /// `P_v` as a probability vector over `v`'s values.
    pub fn univariate(&self, v: usize) -> &[f64] {
        &self.univariate[v]
    }

    /// Pairwise matrix for `{u, v}` (`u < v` required), row-major `k_u x k_v`.
    pub fn pairwise(&self, u: usize, v: usize) -> &[f64] {
        &self.pairwise[self.domain.pair_index(u, v)]
    }

    /// `P_uv(a, b)` for `u < v`.
    #[inline]
    pub fn pair_cell(&self, u: usize, v: usize, a: usize, b: usize) -> f64 {
        self.pairwise[self.domain.pair_index(u, v)][a * self.domain.cardinality(v) + b]
    }

    /// Computes exact marginals of an explicit joint distribution given as
    /// probabilities in lexicographic assignment order (last variable
    /// fastest). The joint must sum to 1 within 1e-9.
    pub fn from_joint(joint: &[f64], domain: &VarDomain) -> Result<Self, MoatError> {
        let states = domain
            .state_count()
            .ok_or(MoatError::DomainTooLarge { limit: usize::MAX, requested: 0 })?;
        if joint.len() != states {
            return Err(MoatError::ShapeMismatch("joint length != state count".into()));
        }
        let total: f64 = joint.iter().sum();
        if !(total.is_finite() && (total - 1.0).abs() <= 1e-9) {
            return Err(MoatError::UnnormalizedJoint { sum: total });
        }

        let n = domain.n();
        let mut univariate: Vec<Vec<f64>> =
            (0..n).map(|v| alloc::vec![0.0; domain.cardinality(v)]).collect();
        let mut pairwise: Vec<Vec<f64>> = domain
            .pairs()
            .map(|(u, v)| alloc::vec![0.0; domain.cardinality(u) * domain.cardinality(v)])
            .collect();

        let mut idx = 0usize;
        domain.for_each_assignment(|x| {
            let p = joint[idx];
            idx += 1;
            if p == 0.0 {
                return;
            }
            for v in 0..n {
                univariate[v][x[v]] += p;
            }
            for (u, v) in crate::domain::pairs(n) {
                let q = crate::domain::pair_index(n, u, v);
                pairwise[q][x[u] * domain.cardinality(v) + x[v]] += p;
            }
        });

        MarginalTable::new(domain.clone(), univariate, pairwise)
    }

    /// Checks every table invariant, returning one entry per violation.
    /// An empty result means the table is consistent.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.domain.n();

        for v in 0..n {
            let p = &self.univariate[v];
            if p.iter().any(|x| !x.is_finite()) {
                out.push(Violation::NonFinite { var: Some(v), pair: None });
                continue;
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > UNIVARIATE_SUM_TOL {
                out.push(Violation::UnivariateNormalization { var: v, sum });
            }
            for (value, &x) in p.iter().enumerate() {
                if !(-NEGATIVITY_TOL..=1.0 + NEGATIVITY_TOL).contains(&x) {
                    out.push(Violation::UnivariateRange { var: v, value, p: x });
                }
            }
        }

        for (u, v) in self.domain.pairs() {
            let q = self.domain.pair_index(u, v);
            let m = &self.pairwise[q];
            let (ku, kv) = (self.domain.cardinality(u), self.domain.cardinality(v));
            if m.iter().any(|x| !x.is_finite()) {
                out.push(Violation::NonFinite { var: None, pair: Some((u, v)) });
                continue;
            }
            for a in 0..ku {
                for b in 0..kv {
                    let cell = m[a * kv + b];
                    if cell < -NEGATIVITY_TOL {
                        out.push(Violation::NegativePairCell { u, v, a, b, p: cell });
                    }
                }
            }
            let mut total = 0.0;
            for a in 0..ku {
                let row: f64 = m[a * kv..(a + 1) * kv].iter().sum();
                total += row;
                let err = row - self.univariate[u][a];
                if err.abs() > PAIR_SUM_TOL {
                    out.push(Violation::RowSumMismatch { u, v, a, err });
                }
            }
            for b in 0..kv {
                let col: f64 = (0..ku).map(|a| m[a * kv + b]).sum();
                let err = col - self.univariate[v][b];
                if err.abs() > PAIR_SUM_TOL {
                    out.push(Violation::ColSumMismatch { u, v, b, err });
                }
            }
            if (total - 1.0).abs() > PAIR_SUM_TOL {
                out.push(Violation::PairNormalization { u, v, sum: total });
            }
        }

        out
    }
}

/// A single consistency violation, with the offending location and its
/// magnitude.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    UnivariateNormalization { var: usize, sum: f64 },
    UnivariateRange { var: usize, value: usize, p: f64 },
    NegativePairCell { u: usize, v: usize, a: usize, b: usize, p: f64 },
    RowSumMismatch { u: usize, v: usize, a: usize, err: f64 },
    ColSumMismatch { u: usize, v: usize, b: usize, err: f64 },
    PairNormalization { u: usize, v: usize, sum: f64 },
    NonFinite { var: Option<usize>, pair: Option<(usize, usize)> },
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::UnivariateNormalization { var, sum } => {
                write!(f, "P_{var} sums to {sum}")
            }
            Violation::UnivariateRange { var, value, p } => {
                write!(f, "P_{var}({value}) = {p} outside [0,1]")
            }
            Violation::NegativePairCell { u, v, a, b, p } => {
                write!(f, "P_{{{u},{v}}}({a},{b}) = {p} < 0")
            }
            Violation::RowSumMismatch { u, v, a, err } => {
                write!(f, "row {a} of P_{{{u},{v}}} off its univariate by {err}")
            }
            Violation::ColSumMismatch { u, v, b, err } => {
                write!(f, "column {b} of P_{{{u},{v}}} off its univariate by {err}")
            }
            Violation::PairNormalization { u, v, sum } => {
                write!(f, "P_{{{u},{v}}} sums to {sum}")
            }
            Violation::NonFinite { var, pair } => match (var, pair) {
                (Some(v), _) => write!(f, "P_{v} has a non-finite entry"),
                (_, Some((u, v))) => write!(f, "P_{{{u},{v}}} has a non-finite entry"),
                _ => write!(f, "non-finite entry"),
            },
        }
    }
}
