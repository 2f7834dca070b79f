//! Sparse polynomial collocation on Gauss-Hermite grids.
//!
//! This crate approximates functions `u(ξ)` of countably many independent
//! standard Gaussian variables by sparse-grid interpolation,
//!
//! ```text
//! U_Λ u = Σ_{i ∈ Λ} Δ_i u ,      Δ_i = ⊗_m (U_{i_m} - U_{i_m - 1}) ,
//! ```
//!
//! where `U_k` is univariate Lagrange interpolation on the `k+1`-point
//! Gauss-Hermite rule and `Λ` is a monotone (downward closed) set of
//! multi-indices. The main pieces:
//!
//! * [`hermite`]: orthonormal Hermite polynomials, Gauss-Hermite rules with
//!   process-wide caching, barycentric interpolation, and the `L²` norms of
//!   interpolated and detail Hermite polynomials.
//! * [`multi_index`]: multi-indices with finite support, monotone sets,
//!   admissible neighbors, total-degree and hyperbolic-cross families,
//!   combination coefficients, and sparse-grid point enumeration.
//! * [`collocation`]: the sparse interpolation operator over an evaluation
//!   cache, detail operators, conversion to a Hermite expansion, best-N-term
//!   truncation curves, and worst-case error constants.
//! * [`adaptive`]: a-priori and a-posteriori greedy index selection.
//! * [`lognormal`]: a 1D diffusion problem with lognormal coefficient used
//!   as the test model.
//!
//! Model outputs are treated as elements of a normed vector space through
//! the [`NormedVector`] trait; scalars and discretized PDE solutions share
//! every code path.

pub mod adaptive;
pub mod collocation;
mod error;
pub mod hermite;
pub mod lognormal;
pub mod multi_index;
mod vector;

pub use adaptive::{
    run_aposteriori, run_apriori, APosterioriRun, APrioriWeights, AdaptiveState, StepRecord,
};
pub use collocation::{
    detail_from_store, worst_case_error, DetailOperator, HermiteExpansion, SparseCollocation,
    ValueStore,
};
pub use error::Error;
pub use hermite::GaussHermiteRule;
pub use lognormal::{FieldConfig, LognormalModel, SpatialFunction};
pub use multi_index::{CombinationCoefficients, GridPoint, MonotoneSet, MultiIndex};
pub use vector::NormedVector;

/// Convenience alias for results with this crate's [`Error`].
pub type Result<T> = std::result::Result<T, Error>;
