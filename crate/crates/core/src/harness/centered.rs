use std::time::Instant;

use crate::error::Result;
use crate::matrices::centered_banded_covariance;
use crate::numeric::{mean, variance};

use super::report::{ExperimentReport, SummaryRow};
use super::{par_map, replica_stream, ExperimentConfig, ExperimentKind, SizeSpec};

/// Largest accepted ratio between the biggest and smallest normalized mean.
pub const CENTERED_RATIO_LIMIT: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct CenteredSize {
    pub size: SizeSpec,
    /// Replica mean of `‖Δ‖²_F · n² / (b·p)`.
    pub mean_normalized: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CenteredReport {
    pub sizes: Vec<CenteredSize>,
    /// max/min of `mean_normalized` over the schedule.
    pub ratio: f64,
    pub pass: bool,
    pub warnings: Vec<String>,
    pub runtime_seconds: f64,
}

/// Measures the perturbation `Δ = Y − Ỹ` caused by column centering. Its
/// squared Frobenius norm should scale like `b·p/n²`.
pub fn run_centered(config: &ExperimentConfig) -> Result<CenteredReport> {
    let start = Instant::now();
    let warnings = config.validate(ExperimentKind::Centered)?;
    let model = config.model.build()?;

    let mut sizes = Vec::with_capacity(config.sizes.len());
    for (si, &size) in config.sizes.iter().enumerate() {
        let scale = (size.n * size.n) as f64 / (size.b * size.p) as f64;
        let values = par_map(config.workers, config.replicas, |r| {
            let stream = replica_stream(config.seed, ExperimentKind::Centered, si, r);
            let x = model.simulate_data_matrix(size.n, size.p, &stream)?;
            let (_, delta) = centered_banded_covariance(x.view(), size.b)?;
            Ok(delta.frobenius_sq() * scale)
        })?;
        sizes.push(CenteredSize {
            size,
            mean_normalized: mean(&values),
            se: (variance(&values) / values.len() as f64).sqrt(),
        });
    }
    let hi = sizes.iter().map(|s| s.mean_normalized).fold(f64::NEG_INFINITY, f64::max);
    let lo = sizes.iter().map(|s| s.mean_normalized).fold(f64::INFINITY, f64::min);
    let ratio = hi / lo;

    Ok(CenteredReport {
        sizes,
        ratio,
        pass: ratio.is_finite() && ratio < CENTERED_RATIO_LIMIT,
        warnings,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

impl ExperimentReport for CenteredReport {
    fn kind(&self) -> ExperimentKind {
        ExperimentKind::Centered
    }

    fn summary_rows(&self) -> Vec<SummaryRow> {
        let mut rows: Vec<SummaryRow> = self
            .sizes
            .iter()
            .map(|s| SummaryRow {
                experiment: "centered_delta",
                size: s.size,
                k: None,
                l: None,
                sample_value: s.mean_normalized,
                target_value: f64::NAN,
                se: s.se,
                z: f64::NAN,
                pass: s.mean_normalized.is_finite(),
            })
            .collect();
        if let Some(last) = self.sizes.last() {
            rows.push(SummaryRow {
                experiment: "centered_ratio",
                size: last.size,
                k: None,
                l: None,
                sample_value: self.ratio,
                target_value: CENTERED_RATIO_LIMIT,
                se: f64::NAN,
                z: f64::NAN,
                pass: self.pass,
            });
        }
        rows
    }

    fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn runtime_seconds(&self) -> f64 {
        self.runtime_seconds
    }

    fn notes(&self) -> Vec<String> {
        vec![
            "centered_delta is the replica mean of ||Y - Y_centered||_F^2 * n^2 / (b p)".into(),
            format!("centered_ratio is max/min of centered_delta over the schedule; pass when below {CENTERED_RATIO_LIMIT}"),
        ]
    }
}
