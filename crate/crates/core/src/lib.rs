//! Mixture-of-all-trees (MoAT) density estimation.
//!
//! A MoAT model over `n` discrete variables is a mixture over every spanning
//! tree of the complete graph `K_n`, where each component is a tree-shaped
//! MRF sharing one set of univariate and pairwise marginals, and the mixture
//! weight of a tree is proportional to the product of its edge weights. The
//! whole mixture is parameterized by `O(n^2)` numbers yet has `n^(n-2)`
//! components.
//!
//! The crate provides:
//!
//! - [`model`]: the compact parameterization (free parameters to consistent
//!   marginals) for binary and categorical variables,
//! - [`likelihood`]: exact normalized likelihood via log-determinants of
//!   weighted Laplacian minors (Matrix Tree Theorem),
//! - [`gradients`] and [`training`]: analytic log-likelihood gradients and
//!   SGD maximum-likelihood training with deterministic initialization,
//! - [`tree`]: exact computation on single tree-shaped MRFs (message
//!   passing, conditioning, sampling),
//! - [`st_sampler`]: weight-proportional spanning-tree sampling (Wilson's
//!   loop-erased random walk),
//! - [`inference`]: importance sampling, collapsed importance sampling, and
//!   Gibbs sampling for posterior marginals,
//! - [`oracle`]: brute-force references and the executable hardness-proof
//!   gadgets, used to validate every fast path at small `n`.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable default
//! features and enable `libm` for builds without the standard library.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("moat-core requires either the `std` or the `libm` feature");

pub mod domain;
pub mod error;
#[doc(hidden)]
pub mod fixtures;
pub mod gradients;
pub mod inference;
pub mod likelihood;
pub mod linalg;
pub mod math;
pub mod model;
pub mod oracle;
pub mod st_sampler;
pub mod training;
pub mod tree;

pub use domain::{Evidence, VarDomain};
pub use error::MoatError;
pub use model::{FreeParams, MarginalTable, MoatModel};
pub use tree::SpanningTree;

