//! Exact joint cumulants of `trace Y^{k₁}, …, trace Y^{k_r}` at tiny sizes.
//!
//! Writing each trace power as a sum over row words `i` (constant on the
//! pairs of `Π₀`) and column words `j` (constant on the pairs of `Π₁`) and
//! expanding the expectation into cumulants gives
//!
//! ```text
//! C(trace Y^{k₁}, …) = Σ_Π n^{−k + #(Π₀∨Π)} Σ_j B(j) C_Π(j)
//! ```
//!
//! where `Π` ranges over partitions of `{1..2k}` without singletons that
//! connect `Π₀ ∨ Π₁` into a single block, `B(j) = ∏_α B(j(2α−1), j(2α))` is
//! the band mask on each factor and `C_Π(j)` is the product over blocks of
//! `Π` of joint cumulants of the process. The sum is finite and exact for
//! every `n`.

use crate::cumulants::linear_process_cumulant;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::partitions::{enumerate_no_singleton, standard_matchings, Partition};
use crate::process::ProcessModel;

/// Limits on the total trace order `k = Σ k_i` and the dimension `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_k: usize,
    pub max_p: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self { max_k: 3, max_p: 8 }
    }
}

impl OracleCaps {
    /// Larger caps for deliberate, slower runs (up to `|Part₂(8)|·10⁴`
    /// word evaluations).
    pub fn raised() -> Self {
        Self { max_k: 4, max_p: 10 }
    }
}

/// A column word `j : {1..2k} → {1..p}` constant on each part of a partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordAssignment {
    values: Vec<usize>,
}

impl WordAssignment {
    /// Checks that `values` lie in `1..=p` and are constant on the parts of
    /// `partition`.
    pub fn new(values: Vec<usize>, partition: &Partition, p: usize) -> Result<Self> {
        if values.len() != partition.ground_size() {
            return Err(Error::domain("word length differs from the partitioned set"));
        }
        if values.iter().any(|&v| v == 0 || v > p) {
            return Err(Error::domain(format!("word values must lie in 1..={p}")));
        }
        for block in partition.blocks() {
            if block.iter().any(|&i| values[i] != values[block[0]]) {
                return Err(Error::domain("word is not constant on a part of its partition"));
            }
        }
        Ok(Self { values })
    }

    /// The word taking `block_values[b]` on the `b`-th part.
    pub fn from_block_values(partition: &Partition, block_values: &[usize], p: usize) -> Result<Self> {
        if block_values.len() != partition.len() {
            return Err(Error::domain("one value per part is required"));
        }
        let mut values = vec![0; partition.ground_size()];
        for (block, &v) in partition.blocks().iter().zip(block_values) {
            for &i in block {
                values[i] = v;
            }
        }
        Self::new(values, partition, p)
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// `B(j) = ∏_α 1{|j(2α−1) − j(2α)| ≤ b}`.
    pub fn band_weight(&self, bandwidth: usize) -> f64 {
        band_weight(&self.values, Some(bandwidth))
    }

    /// `C_Π(j) = ∏_{A∈Π} C(Z_{j(a)} : a ∈ A)`.
    pub fn cumulant_product(&self, model: &ProcessModel, pi: &Partition) -> Result<f64> {
        cumulant_product(model, pi, &self.values)
    }
}

fn band_weight(values: &[usize], bandwidth: Option<usize>) -> f64 {
    match bandwidth {
        None => 1.0,
        Some(b) => {
            if values.chunks_exact(2).all(|pair| pair[0].abs_diff(pair[1]) <= b) {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn cumulant_product(model: &ProcessModel, pi: &Partition, values: &[usize]) -> Result<f64> {
    let mut prod = 1.0;
    let mut idx = Vec::with_capacity(values.len());
    for block in pi.blocks() {
        idx.clear();
        idx.extend(block.iter().map(|&a| values[a] as i64));
        prod *= linear_process_cumulant(model, &idx)?;
        if prod == 0.0 {
            break;
        }
    }
    Ok(prod)
}

/// Exact `C(trace Y^{k₁}, …, trace Y^{k_r})` for `Y = B ∘ XᵀX` built from
/// `n` rows of dimension `p` with bandwidth `b`, under the default caps.
pub fn exact_trace_cumulant(
    model: &ProcessModel,
    block_sizes: &[usize],
    p: usize,
    n: usize,
    bandwidth: usize,
) -> Result<f64> {
    exact_trace_cumulant_with_caps(model, block_sizes, p, n, bandwidth, OracleCaps::default())
}

pub fn exact_trace_cumulant_with_caps(
    model: &ProcessModel,
    block_sizes: &[usize],
    p: usize,
    n: usize,
    bandwidth: usize,
    caps: OracleCaps,
) -> Result<f64> {
    evaluate(model, block_sizes, p, n, Some(bandwidth), caps)
}

/// The same sum with the band mask removed (`B ≡ 1`), evaluated without
/// consulting any bandwidth.
pub fn exact_trace_cumulant_unmasked(
    model: &ProcessModel,
    block_sizes: &[usize],
    p: usize,
    n: usize,
) -> Result<f64> {
    evaluate(model, block_sizes, p, n, None, OracleCaps::default())
}

/// Exact `E trace Yᵏ`.
pub fn exact_mean_trace(model: &ProcessModel, k: usize, p: usize, n: usize, bandwidth: usize) -> Result<f64> {
    exact_trace_cumulant(model, &[k], p, n, bandwidth)
}

fn evaluate(
    model: &ProcessModel,
    block_sizes: &[usize],
    p: usize,
    n: usize,
    bandwidth: Option<usize>,
    caps: OracleCaps,
) -> Result<f64> {
    let k: usize = block_sizes.iter().sum();
    if k > caps.max_k {
        return Err(Error::Capacity {
            what: "total trace order k",
            requested: k,
            cap: caps.max_k,
        });
    }
    if p > caps.max_p {
        return Err(Error::Capacity {
            what: "dimension p",
            requested: p,
            cap: caps.max_p,
        });
    }
    if p == 0 || n == 0 {
        return Err(Error::domain(format!("need p, n ≥ 1, got p={p}, n={n}")));
    }
    if model.max_cumulant_order() < 2 * k {
        return Err(Error::config(format!(
            "driver supplies cumulants up to order {}, the oracle needs {}",
            model.max_cumulant_order(),
            2 * k
        )));
    }
    let (pi0, pi1) = standard_matchings(block_sizes)?;
    let mut total = CompensatedSum::new();
    let mut block_values = vec![1usize; pi1.len()];
    let mut word = vec![0usize; 2 * k];
    for pi in enumerate_no_singleton(2 * k)? {
        if Partition::join_count(&[&pi0, &pi1, &pi]) != 1 {
            continue;
        }
        let exponent = Partition::join_count(&[&pi0, &pi]) as i32 - k as i32;
        let mut inner = CompensatedSum::new();
        block_values.fill(1);
        loop {
            for (block, &v) in pi1.blocks().iter().zip(&block_values) {
                for &i in block {
                    word[i] = v;
                }
            }
            if band_weight(&word, bandwidth) != 0.0 {
                inner.add(cumulant_product(model, &pi, &word)?);
            }
            if !advance(&mut block_values, p) {
                break;
            }
        }
        total.add((n as f64).powi(exponent) * inner.value());
    }
    Ok(total.value())
}

/// Odometer over `{1..p}^len`; false once every word has been visited.
fn advance(values: &mut [usize], p: usize) -> bool {
    for v in values.iter_mut() {
        if *v < p {
            *v += 1;
            return true;
        }
        *v = 1;
    }
    false
}
