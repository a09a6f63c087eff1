//! Spectral statistics of banded sample covariance matrices.
//!
//! The crate simulates i.i.d. rows of a stationary linear process
//! `Z_j = Σ_ℓ h(j + ℓ) W_ℓ`, forms the banded estimator `Y = B ∘ XᵀX`, and
//! compares its trace powers and eigenvalue distribution against closed-form
//! limits built from the autocovariance `R` and the fourth-cumulant array `Q`.
//!
//! Besides the Monte Carlo harness there is an exact finite-size evaluator for
//! joint cumulants of `trace Yᵏ`, built on the set-partition lattice and
//! Möbius inversion between moments and cumulants.

pub mod cumulants;
pub mod error;
pub mod harness;
pub mod limits;
pub mod matrices;
pub mod numeric;
pub mod oracle;
pub mod partitions;
pub mod process;
pub mod rng;

pub use cumulants::{CumulantFunctional, MomentFunctional};
pub use error::{Error, Result};
pub use limits::LimitTable;
pub use matrices::{BandedMatrix, Histogram};
pub use partitions::Partition;
pub use process::{DriverFamily, DriverSpec, Kernel, ProcessModel};
pub use rng::RandomStream;
