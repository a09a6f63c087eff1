//! Experiment orchestration: configuration, deterministic parallel Monte
//! Carlo runs, and report files.
//!
//! Every replica draws from its own substream
//! `seed → experiment → size index → replica index → row index`, and
//! per-replica results are gathered in replica order, so outputs do not
//! depend on the number of workers.

mod centered;
mod clt;
mod config;
mod lln;
mod oracle_check;
mod report;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrices::{banded_covariance, BandedMatrix};
use crate::process::ProcessModel;
use crate::rng::RandomStream;

pub use centered::{run_centered, CenteredReport, CenteredSize, CENTERED_RATIO_LIMIT};
pub use clt::{run_clt, CltReport, CltSize, Diagnostic, DEGENERATE_TARGET_FLOOR, DIAGNOSTIC_Z};
pub use config::{
    DriverConfig, ExperimentConfig, ExperimentKind, KernelTerm, ModelConfig, SizeSpec, CLT_BAND_RATIO_WARNING,
    MAX_TRACE_POWER, MIN_CLT_REPLICAS, MIN_ORACLE_REPLICAS,
};
pub use lln::{run_lln, LlnReport, LlnSize, MomentComparison, TrendSummary};
pub use oracle_check::{run_oracle_check, OracleCheckReport, OracleRow};
pub use report::{
    emit_reports, format_value, render_spectrum_svg, EmittedFiles, ExperimentReport, HistogramRow, SpectrumPanel,
    SummaryRow, SUMMARY_HEADER,
};

/// Maps `f` over `0..count` on a pool of `workers` threads, returning the
/// results in index order.
pub(crate) fn par_map<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}

/// Stream for one replica of one size of an experiment.
pub(crate) fn replica_stream(seed: u64, kind: ExperimentKind, size_index: usize, replica: usize) -> RandomStream {
    RandomStream::new(seed)
        .child(kind.stream_id())
        .child(size_index as u64)
        .child(replica as u64)
}

/// Simulates one data matrix and returns its banded estimator.
pub(crate) fn simulate_estimator(model: &ProcessModel, size: SizeSpec, stream: &RandomStream) -> Result<BandedMatrix> {
    let x = model.simulate_data_matrix(size.n, size.p, stream)?;
    Ok(banded_covariance(x.view(), size.b))
}
