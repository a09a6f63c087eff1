use std::time::Instant;

use ndarray::{s, Array2};

use crate::cumulants::empirical_joint_cumulant;
use crate::error::Result;
use crate::numeric::{batched_se, z_score};
use crate::oracle::exact_trace_cumulant;

use super::report::{ExperimentReport, SummaryRow};
use super::{par_map, replica_stream, simulate_estimator, ExperimentConfig, ExperimentKind, SizeSpec};

/// Relative floor on the standard error. Statistics that are constant for a
/// model (e.g. `trace Y` under ±1 white noise) have a batched SE made of
/// rounding noise, which would turn last-digit differences into huge z.
const SE_ROUNDING_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRow {
    pub size: SizeSpec,
    /// Trace powers `(k₁, …, k_r)` of the joint cumulant.
    pub orders: Vec<usize>,
    pub exact: f64,
    pub sample: f64,
    pub se: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheckReport {
    pub rows: Vec<OracleRow>,
    pub replicas: usize,
    pub warnings: Vec<String>,
    pub runtime_seconds: f64,
}

/// Compares the exact joint cumulants of trace powers with plug-in
/// estimates from simulated replicas, for every size and order.
pub fn run_oracle_check(config: &ExperimentConfig) -> Result<OracleCheckReport> {
    let start = Instant::now();
    let warnings = config.validate(ExperimentKind::Oracle)?;
    let model = config.model.build()?;
    let orders = config.oracle_orders();
    let max_power = orders.iter().flatten().copied().max().unwrap_or(1);
    let m = config.replicas;

    let mut rows = Vec::new();
    for (si, &size) in config.sizes.iter().enumerate() {
        // exact values first, so cap violations fail before any simulation
        let exact = orders
            .iter()
            .map(|o| exact_trace_cumulant(&model, o, size.p, size.n, size.b))
            .collect::<Result<Vec<f64>>>()?;
        let traces = par_map(config.workers, m, |r| {
            let y = simulate_estimator(&model, size, &replica_stream(config.seed, ExperimentKind::Oracle, si, r))?;
            Ok((1..=max_power).map(|k| y.trace_power(k)).collect::<Vec<f64>>())
        })?;
        let table = Array2::from_shape_fn((m, max_power), |(r, c)| traces[r][c]);

        for (order, exact) in orders.iter().zip(exact) {
            let columns: Vec<usize> = order.iter().map(|&k| k - 1).collect();
            let sample = empirical_joint_cumulant(table.view(), &columns)?;
            let se = batched_se(m, |r| {
                empirical_joint_cumulant(table.slice(s![r, ..]), &columns).unwrap_or(f64::NAN)
            });
            let se = se.max(SE_ROUNDING_FLOOR * (1.0 + exact.abs().max(sample.abs())));
            let z = z_score(sample, exact, se);
            rows.push(OracleRow {
                size,
                orders: order.clone(),
                exact,
                sample,
                se,
                z,
                pass: z.abs() <= config.z_threshold,
            });
        }
    }

    Ok(OracleCheckReport {
        rows,
        replicas: m,
        warnings,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

impl OracleCheckReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }
}

impl ExperimentReport for OracleCheckReport {
    fn kind(&self) -> ExperimentKind {
        ExperimentKind::Oracle
    }

    /// One row per (size, order); `k` and `l` carry the first two trace
    /// powers of the order.
    fn summary_rows(&self) -> Vec<SummaryRow> {
        self.rows
            .iter()
            .map(|r| SummaryRow {
                experiment: "oracle",
                size: r.size,
                k: r.orders.first().copied(),
                l: r.orders.get(1).copied(),
                sample_value: r.sample,
                target_value: r.exact,
                se: r.se,
                z: r.z,
                pass: r.pass,
            })
            .collect()
    }

    fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn runtime_seconds(&self) -> f64 {
        self.runtime_seconds
    }

    fn notes(&self) -> Vec<String> {
        vec![
            format!("{} replicas per size; sample cumulants are plug-in, order 2 unbiased", self.replicas),
            format!("largest |z| over all rows: {:.3}", self.max_abs_z()),
        ]
    }
}
