//! Noncommutative subsequential weighted ergodic averages on finite direct
//! sums of matrix algebras.
//!
//! The crate models `(M, τ)` as `M_{d_1} ⊕ ... ⊕ M_{d_r}` with a weighted
//! trace ([`algebra`]), builds positive Dunford-Schwartz maps on it
//! ([`ds`]), generates subsequences and weights ([`subsequence`],
//! [`weights`]), streams the averages `M_n^{β,k}(T)(x)` ([`averages`]) and
//! searches for projection witnesses of almost-uniform convergence
//! ([`convergence`]). [`experiment`] ties these together behind a JSON config.

pub mod algebra;
pub mod averages;
pub mod convergence;
pub mod ds;
pub mod eigen;
pub mod experiment;
pub mod error;
pub mod random;
pub mod subsequence;
pub mod weights;

pub use algebra::{AlgebraSpec, Block, OperatorElement, Projection};
pub use error::{Error, Result};

/// Crate version recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
