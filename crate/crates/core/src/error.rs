//! Error type shared by the crate.

use alloc::string::String;

/// Errors surfaced by model construction, evaluation, and inference.
#[derive(Clone, Debug, PartialEq)]
pub enum MoatError {
    /// Parameter vector shapes do not match the variable domain.
    ShapeMismatch(String),
    /// A joint table does not sum to 1 within tolerance.
    UnnormalizedJoint { sum: f64 },
    /// A marginal sits exactly on an interval boundary after clamping.
    BoundaryTable { var: usize },
    /// The positive-weight subgraph does not connect all vertices.
    DisconnectedGraph,
    /// A table cell is NaN or infinite.
    NonFiniteTable,
    /// A pairwise cell is nonzero while its univariate denominator is zero.
    InconsistentTable { u: usize, v: usize },
    /// An evaluation divides by a zero univariate cell.
    ZeroDivisorCell { var: usize },
    /// An assignment value falls outside the variable's domain.
    ValueOutOfDomain { var: usize, value: usize },
    /// Evidence has probability zero under the distribution being queried.
    ZeroProbabilityEvidence,
    /// Every importance weight collapsed to zero.
    DegenerateWeights,
    /// No positive-likelihood initial state found for the Gibbs chain.
    NoValidInitialState,
    /// An exhaustive operation was asked to range over too large a space.
    DomainTooLarge { limit: usize, requested: usize },
    /// A dataset or batch was empty where rows are required.
    EmptyData,
    /// Likelihood or normalizer is zero/singular where a gradient is needed.
    SingularMinor,
    /// Training produced a non-finite loss.
    NanLoss { epoch: usize, batch: usize },
    /// Mismatched free-variable sets between two posterior estimates.
    FreeVariableMismatch,
}

impl core::fmt::Display for MoatError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MoatError::ShapeMismatch(what) => write!(f, "shape mismatch: {what}"),
            MoatError::UnnormalizedJoint { sum } => {
                write!(f, "joint table sums to {sum}, expected 1")
            }
            MoatError::BoundaryTable { var } => {
                write!(f, "marginal of variable {var} is at an interval boundary")
            }
            MoatError::DisconnectedGraph => {
                write!(f, "positive-weight subgraph is disconnected (Z = 0)")
            }
            MoatError::NonFiniteTable => write!(f, "marginal table contains NaN or infinity"),
            MoatError::InconsistentTable { u, v } => {
                write!(f, "pair ({u},{v}) has mass on a zero-probability value")
            }
            MoatError::ZeroDivisorCell { var } => {
                write!(f, "division by zero univariate cell of variable {var}")
            }
            MoatError::ValueOutOfDomain { var, value } => {
                write!(f, "value {value} outside domain of variable {var}")
            }
            MoatError::ZeroProbabilityEvidence => write!(f, "evidence has probability zero"),
            MoatError::DegenerateWeights => write!(f, "all importance weights are zero"),
            MoatError::NoValidInitialState => {
                write!(f, "no positive-likelihood initial state found")
            }
            MoatError::DomainTooLarge { limit, requested } => {
                write!(f, "exhaustive operation over {requested} states exceeds limit {limit}")
            }
            MoatError::EmptyData => write!(f, "empty dataset"),
            MoatError::SingularMinor => write!(f, "singular Laplacian minor (zero likelihood)"),
            MoatError::NanLoss { epoch, batch } => {
                write!(f, "non-finite loss at epoch {epoch}, batch {batch}")
            }
            MoatError::FreeVariableMismatch => {
                write!(f, "posterior estimates cover different free variables")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MoatError {}
