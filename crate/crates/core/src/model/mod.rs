//! The MoAT parameterization: free parameters, realized marginal tables,
//! and the assembled model.
//!
//! A model is the triple (domain, edge weights, marginal table). All tree
//! mixture components share the table; the weights induce the spanning-tree
//! mixture distribution. Free parameters are unconstrained reals mapped
//! onto this triple by [`FreeParams::realize`]; the map is total, so any
//! finite parameter vector yields a valid model.

pub(crate) mod params;
mod table;

pub use params::FreeParams;
pub use table::{MarginalTable, Violation};

use alloc::vec::Vec;

use crate::domain::VarDomain;
use crate::error::MoatError;

/// A full MoAT distribution: nonnegative edge weights over all pairs plus a
/// consistent marginal table.
#[derive(Clone, Debug, PartialEq)]
pub struct MoatModel {
    weights: Vec<f64>,
    table: MarginalTable,
}

impl MoatModel {
    /// `weights` in row-major upper-triangular pair order; all must be
    /// nonnegative and finite.
    pub fn new(weights: Vec<f64>, table: MarginalTable) -> Result<Self, MoatError> {
        if weights.len() != table.domain().pair_count() {
            return Err(MoatError::ShapeMismatch("weight count != pair count".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MoatError::NonFiniteTable);
        }
        Ok(MoatModel { weights, table })
    }

    pub fn domain(&self) -> &VarDomain {
        self.table.domain()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[self.domain().pair_index(u, v)]
    }

    pub fn table(&self) -> &MarginalTable {
        &self.table
    }

    /// True if the strictly-positive-weight subgraph spans all vertices.
    /// When false the mixture has normalization constant zero.
    pub fn positive_subgraph_connected(&self) -> bool {
        let n = self.domain().n();
        let mut reached = alloc::vec![false; n];
        let mut stack = alloc::vec![0usize];
        reached[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if v != u && !reached[v] {
                    let (a, b) = if u < v { (u, v) } else { (v, u) };
                    if self.weights[self.domain().pair_index(a, b)] > 0.0 {
                        reached[v] = true;
                        count += 1;
                        stack.push(v);
                    }
                }
            }
        }
        count == n
    }
}
