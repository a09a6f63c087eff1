//! The banded estimator `Y = B ∘ XᵀX`, its centered variant, trace powers,
//! eigenvalues and empirical spectral histograms.

mod banded;
mod dump;
mod eigen;
mod histogram;

pub use banded::{banded_covariance, centered_banded_covariance, BandedMatrix};
pub use dump::{read_dump, write_dump};
pub use eigen::{jacobi_eigenvalues, symmetric_eigenvalues, DEFAULT_SWEEP_CAP};
pub use histogram::{empirical_spectral_histogram, Histogram};
