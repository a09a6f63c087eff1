//! Closed-form large-`p` limits: moment targets for `p⁻¹ trace Yᵏ`, the
//! limiting covariance of the fluctuations `√(n/p)(trace Yᵏ − E trace Yᵏ)`,
//! and the limiting spectral distribution `ν_Z` as a histogram.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrices::{jacobi_eigenvalues, Histogram};
use crate::process::{LagSequence, ProcessModel};

/// Default θ-grid size for [`nu_reference_histogram`].
pub const DEFAULT_NU_GRID: usize = 100_000;
pub const MIN_NU_GRID: usize = 1_000;

/// `lim p⁻¹ E trace Yᵏ = R₀^{(k)}`.
pub fn lln_limit(model: &ProcessModel, k: usize) -> f64 {
    model.nu_moment(k)
}

/// `E G_k G_ℓ = kℓ (2R₀^{(k+ℓ)} + Σ_{i,j} R_i^{(k−1)} Q_ij R_j^{(ℓ−1)})`, the
/// limiting covariance of `√(n/p)(trace Yᵏ − E trace Yᵏ)` and its `ℓ` twin.
pub fn clt_covariance(model: &ProcessModel, k: usize, l: usize) -> Result<f64> {
    if k == 0 || l == 0 {
        return Err(Error::domain("trace powers start at 1"));
    }
    let rk = model.iterated_autocovariance_sequence(k - 1);
    let rl = model.iterated_autocovariance_sequence(l - 1);
    let r2 = model.iterated_autocovariance(k + l, 0);
    let q = QBlock::new(model)?;
    Ok(assemble_clt(k, l, r2, &rk, &rl, &q))
}

fn assemble_clt(k: usize, l: usize, r_sum: f64, rk: &LagSequence, rl: &LagSequence, q: &QBlock) -> f64 {
    let d = q.radius;
    let mut fourth = 0.0;
    for i in -d..=d {
        let ri = rk.at(i);
        if ri == 0.0 {
            continue;
        }
        for j in -d..=d {
            fourth += ri * q.get(i, j) * rl.at(j);
        }
    }
    (k * l) as f64 * (2.0 * r_sum + fourth)
}

/// `Q_ij` on `[−D, D]²`.
#[derive(Clone, Debug, PartialEq)]
struct QBlock {
    radius: i64,
    values: Vec<f64>,
}

impl QBlock {
    fn new(model: &ProcessModel) -> Result<Self> {
        let d = model.q_support();
        let w = (2 * d + 1) as usize;
        let mut values = vec![0.0; w * w];
        // Q is symmetric; mirror the upper triangle so it is exactly so
        for i in 0..w {
            for j in i..w {
                let q = model.q_coefficient(i as i64 - d, j as i64 - d)?;
                values[i * w + j] = q;
                values[j * w + i] = q;
            }
        }
        Ok(Self { radius: d, values })
    }

    fn get(&self, i: i64, j: i64) -> f64 {
        let d = self.radius;
        if i.abs() > d || j.abs() > d {
            return 0.0;
        }
        let w = 2 * d + 1;
        self.values[((i + d) * w + (j + d)) as usize]
    }
}

/// Histogram of `f_Z(θ)` over the midpoints of a uniform grid on `[0, 1]`,
/// each point carrying mass `1/grid`; this discretizes `ν_Z`.
pub fn nu_reference_histogram(model: &ProcessModel, edges: &[f64], grid: usize) -> Result<Histogram> {
    if grid < MIN_NU_GRID {
        return Err(Error::domain(format!("θ-grid of {grid} points is below {MIN_NU_GRID}")));
    }
    let values: Vec<f64> = (0..grid)
        .map(|g| model.spectral_density_unchecked((g as f64 + 0.5) / grid as f64))
        .collect();
    Histogram::from_values(&values, edges.to_vec())
}

/// Every limit needed to judge experiments with trace powers up to `K`.
#[derive(Clone, Debug)]
pub struct LimitTable {
    max_order: usize,
    /// `iterated[m] = R^{(m)}` for `m = 0..=2K`
    iterated: Vec<LagSequence>,
    q: QBlock,
    /// `clt[k−1][l−1] = E G_k G_ℓ`
    clt: Vec<Vec<f64>>,
}

impl LimitTable {
    pub fn build(model: &ProcessModel, max_order: usize) -> Result<Self> {
        if max_order == 0 {
            return Err(Error::domain("limit table needs K ≥ 1"));
        }
        let r = model.autocovariance_sequence();
        let mut iterated = vec![LagSequence::delta()];
        for m in 1..=2 * max_order {
            let next = iterated[m - 1].convolve(&r);
            iterated.push(next);
        }
        let q = QBlock::new(model)?;
        // upper triangle only, mirrored so the matrix is exactly symmetric
        let mut clt = vec![vec![0.0; max_order]; max_order];
        for k in 1..=max_order {
            for l in k..=max_order {
                let v = assemble_clt(k, l, iterated[k + l].at(0), &iterated[k - 1], &iterated[l - 1], &q);
                clt[k - 1][l - 1] = v;
                clt[l - 1][k - 1] = v;
            }
        }
        Ok(Self {
            max_order,
            iterated,
            q,
            clt,
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `R_i^{(m)}` for `m ≤ 2K`.
    pub fn iterated_autocovariance(&self, m: usize, lag: i64) -> f64 {
        self.iterated[m].at(lag)
    }

    pub fn q(&self, i: i64, j: i64) -> f64 {
        self.q.get(i, j)
    }

    /// `∫ xᵏ ν_Z(dx)` for `k ≤ K`; the same number as the LLN target.
    pub fn nu_moment(&self, k: usize) -> f64 {
        self.iterated[k].at(0)
    }

    /// `E G_k G_ℓ` for `1 ≤ k, ℓ ≤ K`.
    pub fn clt_covariance(&self, k: usize, l: usize) -> f64 {
        self.clt[k - 1][l - 1]
    }

    pub fn clt_matrix(&self) -> &[Vec<f64>] {
        &self.clt
    }

    /// Smallest eigenvalue of the `K × K` covariance matrix. It should be
    /// nonnegative up to rounding; callers surface violations.
    pub fn clt_min_eigenvalue(&self) -> Result<f64> {
        let k = self.max_order;
        let mut a: Vec<f64> = self.clt.iter().flatten().copied().collect();
        let eigs = jacobi_eigenvalues(&mut a, k, 1e-15, crate::matrices::DEFAULT_SWEEP_CAP)?;
        Ok(eigs[0])
    }

    /// CSV with columns `kind,k,l,i,j,value`; unused index columns are blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,k,l,i,j,value\n");
        for (m, seq) in self.iterated.iter().enumerate() {
            for (lag, v) in seq.iter() {
                if v != 0.0 {
                    writeln!(out, "iterated_autocovariance,{m},,{lag},,{v:e}").unwrap();
                }
            }
        }
        let d = self.q.radius;
        for i in -d..=d {
            for j in -d..=d {
                writeln!(out, "q,,,{i},{j},{:e}", self.q.get(i, j)).unwrap();
            }
        }
        for k in 1..=self.max_order {
            writeln!(out, "nu_moment,{k},,,,{:e}", self.nu_moment(k)).unwrap();
        }
        for k in 1..=self.max_order {
            for l in 1..=self.max_order {
                let v = self.clt_covariance(k, l);
                writeln!(out, "clt_covariance,{k},{l},,,{v:e}").unwrap();
                writeln!(out, "clt_covariance_per_kl,{k},{l},,,{:e}", v / (k * l) as f64).unwrap();
            }
        }
        out
    }
}
