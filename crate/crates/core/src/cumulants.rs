//! Moments, joint cumulants, and the partition-lattice formulas relating them.
//!
//! Joint moments and cumulants of `(X₁,…,X_k)` are symmetric, so both are
//! stored as functionals on the non-empty subsets of `{1..k}`, indexed by
//! bitmask. For a partition `Π`,
//!
//! ```text
//! E_Π = ∏_{A∈Π} E ∏_{i∈A} X_i        C_Π = ∏_{A∈Π} C{X_i}_{i∈A}
//! E_Π = Σ_{Σ ≤ Π} C_Σ                C_Π = Σ_{Σ ≤ Π} μ(Σ, Π) E_Σ
//! ```
//!
//! with `μ(Σ, Π) = ∏_{A∈Π} (−1)^{m_A−1} (m_A−1)!` the Möbius function of the
//! partition lattice.

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, mobius_weight, Partition};
use crate::process::ProcessModel;

/// Largest arity for lattice-based conversions (Bell(10) = 115975 terms).
pub const MAX_ARITY: usize = 10;

/// Largest order supported by [`empirical_joint_cumulant`].
pub const MAX_EMPIRICAL_ORDER: usize = 3;

#[derive(Clone, Debug, PartialEq)]
struct SubsetTable {
    arity: usize,
    /// `values[mask]` for `mask ∈ 1..2^arity`; slot 0 is unused.
    values: Vec<f64>,
}

impl SubsetTable {
    fn from_fn<F: FnMut(&[usize]) -> f64>(arity: usize, mut f: F) -> Result<Self> {
        check_arity(arity)?;
        let mut values = vec![f64::NAN; 1 << arity];
        let mut subset = Vec::with_capacity(arity);
        for mask in 1..(1usize << arity) {
            subset.clear();
            subset.extend((0..arity).filter(|i| mask & (1 << i) != 0));
            values[mask] = f(&subset);
        }
        Ok(Self { arity, values })
    }

    fn at(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    fn product_over(&self, partition: &Partition) -> Result<f64> {
        if partition.ground_size() != self.arity {
            return Err(Error::domain(format!(
                "partition of {} elements applied to a functional of arity {}",
                partition.ground_size(),
                self.arity
            )));
        }
        Ok(partition.block_masks().iter().map(|&m| self.at(m)).product())
    }
}

fn check_arity(arity: usize) -> Result<()> {
    if arity == 0 {
        return Err(Error::domain("functional of arity 0"));
    }
    if arity > MAX_ARITY {
        return Err(Error::Capacity {
            what: "functional arity",
            requested: arity,
            cap: MAX_ARITY,
        });
    }
    Ok(())
}

fn subset_mask(subset: &[usize]) -> u64 {
    subset.iter().fold(0, |m, &i| m | (1 << i))
}

/// Joint moments `S ↦ E ∏_{i∈S} X_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentFunctional(SubsetTable);

/// Joint cumulants `S ↦ C{X_i}_{i∈S}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantFunctional(SubsetTable);

macro_rules! functional_accessors {
    ($ty:ident) => {
        impl $ty {
            /// Tabulates `f` on every non-empty subset of `0..arity`; the
            /// subset is passed as its sorted elements.
            pub fn from_fn<F: FnMut(&[usize]) -> f64>(arity: usize, f: F) -> Result<Self> {
                SubsetTable::from_fn(arity, f).map($ty)
            }

            pub fn arity(&self) -> usize {
                self.0.arity
            }

            /// Value on a subset given by its (0-based) elements.
            pub fn value(&self, subset: &[usize]) -> f64 {
                assert!(!subset.is_empty(), "functional evaluated on the empty set");
                self.0.at(subset_mask(subset))
            }

            pub fn value_at_mask(&self, mask: u64) -> f64 {
                self.0.at(mask)
            }
        }
    };
}

functional_accessors!(MomentFunctional);
functional_accessors!(CumulantFunctional);

impl MomentFunctional {
    /// Moments of every sub-collection implied by the given cumulants.
    pub fn from_cumulants(c: &CumulantFunctional) -> Result<Self> {
        let lattices: Vec<Vec<Partition>> = (1..=c.arity())
            .map(enumerate_partitions)
            .collect::<Result<_>>()?;
        Self::from_fn(c.arity(), |subset| {
            lattices[subset.len() - 1]
                .iter()
                .map(|sigma| {
                    sigma
                        .blocks()
                        .iter()
                        .map(|b| c.value(&b.iter().map(|&i| subset[i]).collect::<Vec<_>>()))
                        .product::<f64>()
                })
                .sum()
        })
    }

    /// Plug-in moments of the columns `indices` of a sample matrix (rows are
    /// observations).
    pub fn from_samples(samples: ArrayView2<f64>, indices: &[usize]) -> Result<Self> {
        let cols = samples.ncols();
        if let Some(&bad) = indices.iter().find(|&&i| i >= cols) {
            return Err(Error::domain(format!(
                "column {bad} out of range for {cols} columns"
            )));
        }
        let rows = samples.nrows() as f64;
        Self::from_fn(indices.len(), |subset| {
            let total: f64 = samples
                .rows()
                .into_iter()
                .map(|row| subset.iter().map(|&a| row[indices[a]]).product::<f64>())
                .sum();
            total / rows
        })
    }
}

impl CumulantFunctional {
    /// Cumulants of every sub-collection implied by the given moments.
    pub fn from_moments(m: &MomentFunctional) -> Result<Self> {
        let lattices: Vec<Vec<Partition>> = (1..=m.arity())
            .map(enumerate_partitions)
            .collect::<Result<_>>()?;
        Self::from_fn(m.arity(), |subset| {
            let whole = Partition::single_block(subset.len());
            lattices[subset.len() - 1]
                .iter()
                .map(|sigma| {
                    let w = mobius_weight(&whole, sigma).expect("every partition refines the top") as f64;
                    w * sigma
                        .blocks()
                        .iter()
                        .map(|b| m.value(&b.iter().map(|&i| subset[i]).collect::<Vec<_>>()))
                        .product::<f64>()
                })
                .sum()
        })
    }
}

/// `E_Π = ∏_{A∈Π} m(A)`.
pub fn moment_product(partition: &Partition, m: &MomentFunctional) -> Result<f64> {
    m.0.product_over(partition)
}

/// `C_Π = ∏_{A∈Π} c(A)`.
pub fn cumulant_product(partition: &Partition, c: &CumulantFunctional) -> Result<f64> {
    c.0.product_over(partition)
}

/// `E_Π` from cumulants: the sum of `C_Σ` over all `Σ` refining `Π`.
pub fn moments_from_cumulants(c: &CumulantFunctional, partition: &Partition) -> Result<f64> {
    if partition.ground_size() != c.arity() {
        return Err(Error::domain("partition and functional arity differ"));
    }
    partition
        .refinements()
        .iter()
        .map(|sigma| cumulant_product(sigma, c))
        .sum()
}

/// `C_Π` from moments by Möbius inversion over the refinements of `Π`.
pub fn cumulant_from_moments(m: &MomentFunctional, partition: &Partition) -> Result<f64> {
    if partition.ground_size() != m.arity() {
        return Err(Error::domain("partition and functional arity differ"));
    }
    let mut total = 0.0;
    for sigma in partition.refinements() {
        total += mobius_weight(partition, &sigma)? as f64 * moment_product(&sigma, m)?;
    }
    Ok(total)
}

/// Plug-in estimate of the joint cumulant of the sample columns `indices`
/// (repeats allowed).
///
/// Moments are sample means of products; order 2 carries the `m/(m−1)`
/// correction, giving the unbiased sample covariance.
pub fn empirical_joint_cumulant(samples: ArrayView2<f64>, indices: &[usize]) -> Result<f64> {
    let m = samples.nrows();
    if m < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: m,
        });
    }
    if indices.is_empty() {
        return Err(Error::domain("cumulant of an empty tuple"));
    }
    if indices.len() > MAX_EMPIRICAL_ORDER {
        return Err(Error::Capacity {
            what: "empirical cumulant order",
            requested: indices.len(),
            cap: MAX_EMPIRICAL_ORDER,
        });
    }
    let moments = MomentFunctional::from_samples(samples, indices)?;
    let plug_in = cumulant_from_moments(&moments, &Partition::single_block(indices.len()))?;
    Ok(if indices.len() == 2 {
        plug_in * m as f64 / (m - 1) as f64
    } else {
        plug_in
    })
}

/// Exact joint cumulant `C(Z_{j₀},…,Z_{j_r})` of the linear process:
/// `κ_{r+1}(W) · Σ_ℓ h(j₀+ℓ)⋯h(j_r+ℓ)`, a finite sum over the kernel support.
pub fn linear_process_cumulant(model: &ProcessModel, indices: &[i64]) -> Result<f64> {
    let order = indices.len();
    if order == 0 {
        return Err(Error::domain("cumulant of an empty tuple"));
    }
    let kappa = model.driver().cumulant(order)?;
    if kappa == 0.0 {
        return Ok(0.0);
    }
    let kernel = model.kernel();
    let (lo, hi) = kernel.support();
    let min_j = *indices.iter().min().unwrap();
    let max_j = *indices.iter().max().unwrap();
    // every j_i + ℓ must land in [lo, hi]
    let mut sum = 0.0;
    for shift in (lo - min_j)..=(hi - max_j) {
        let term: f64 = indices.iter().map(|&j| kernel.coefficient(j + shift)).product();
        sum += term;
    }
    Ok(kappa * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{DriverSpec, Kernel};
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cumulants(arity: usize, rng: &mut ChaCha8Rng) -> CumulantFunctional {
        CumulantFunctional::from_fn(arity, |_| rng.random_range(-1.0..1.0)).unwrap()
    }

    /// Moments from cumulants by the set recursion
    /// `m(S) = Σ_{T ⊆ S, min S ∈ T} c(T) m(S∖T)`, independent of the lattice code.
    fn moments_by_recursion(c: &CumulantFunctional) -> Vec<f64> {
        let k = c.arity();
        let mut m = vec![0.0; 1 << k];
        m[0] = 1.0;
        for s in 1usize..(1 << k) {
            let low = s & s.wrapping_neg();
            let rest = s ^ low;
            // iterate submasks of rest; T = low | sub
            let mut sub = rest;
            let mut acc = 0.0;
            loop {
                let t = low | sub;
                acc += c.value_at_mask(t as u64) * m[s ^ t];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            m[s] = acc;
        }
        m
    }

    fn p(ground: usize, blocks: &[&[usize]]) -> Partition {
        Partition::from_blocks(
            ground,
            blocks.iter().map(|b| b.iter().map(|e| e - 1).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn product_examples() {
        let m = MomentFunctional::from_fn(3, |s| (s.iter().sum::<usize>() + 2) as f64).unwrap();
        let single = moment_product(&Partition::singletons(3), &m).unwrap();
        assert_eq!(single, 2.0 * 3.0 * 4.0);
        assert_eq!(moment_product(&Partition::single_block(3), &m).unwrap(), 5.0);

        let zero_mean = MomentFunctional::from_fn(2, |s| if s.len() == 1 { 0.0 } else { 1.0 }).unwrap();
        assert_eq!(moment_product(&Partition::singletons(2), &zero_mean).unwrap(), 0.0);
        assert!(moment_product(&Partition::singletons(3), &zero_mean).is_err());

        let cov = [[2.0, 0.5, 0.1, 0.3], [0.5, 1.0, 0.7, 0.2], [0.1, 0.7, 3.0, 0.4], [0.3, 0.2, 0.4, 1.5]];
        let c = CumulantFunctional::from_fn(4, |s| match s {
            [i, j] => cov[*i][*j],
            [_] => 0.0,
            _ => 0.25,
        })
        .unwrap();
        assert_eq!(cumulant_product(&Partition::single_block(4), &c).unwrap(), 0.25);
        assert_eq!(cumulant_product(&p(4, &[&[1, 2], &[3], &[4]]), &c).unwrap(), 0.0);
        assert_eq!(cumulant_product(&p(4, &[&[1, 2], &[3, 4]]), &c).unwrap(), 0.5 * 0.4);
    }

    #[test]
    fn low_order_conversions() {
        let c = CumulantFunctional::from_fn(2, |s| match s {
            [0] => 1.5,
            [1] => -0.5,
            _ => 0.3,
        })
        .unwrap();
        assert_eq!(
            moments_from_cumulants(&c, &Partition::single_block(2)).unwrap(),
            0.3 + 1.5 * -0.5
        );
        let c1 = CumulantFunctional::from_fn(1, |_| 0.7).unwrap();
        assert_eq!(moments_from_cumulants(&c1, &Partition::single_block(1)).unwrap(), 0.7);

        // covariance from moments
        let m = MomentFunctional::from_fn(2, |s| match s {
            [0] => 2.0,
            [1] => 3.0,
            _ => 7.0,
        })
        .unwrap();
        assert_eq!(cumulant_from_moments(&m, &Partition::single_block(2)).unwrap(), 7.0 - 6.0);

        // X₁ = X₂: variance
        let var = MomentFunctional::from_fn(2, |s| if s.len() == 1 { 2.0 } else { 5.0 }).unwrap();
        assert_eq!(cumulant_from_moments(&var, &Partition::single_block(2)).unwrap(), 1.0);

        // zero-mean third cumulant equals the third moment
        let m3 = MomentFunctional::from_fn(3, |s| match s.len() {
            1 => 0.0,
            2 => 0.4 + s[0] as f64,
            _ => 1.7,
        })
        .unwrap();
        assert!((cumulant_from_moments(&m3, &Partition::single_block(3)).unwrap() - 1.7).abs() < 1e-15);
    }

    #[test]
    fn wick_sum_for_pair_cumulants() {
        let cov = [[1.0, 0.2, 0.3, 0.4], [0.2, 1.0, 0.5, 0.6], [0.3, 0.5, 1.0, 0.7], [0.4, 0.6, 0.7, 1.0]];
        let c = CumulantFunctional::from_fn(4, |s| match s {
            [i, j] => cov[*i][*j],
            _ => 0.0,
        })
        .unwrap();
        // brute force over Part(4): only perfect matchings survive
        let brute: f64 = enumerate_partitions(4)
            .unwrap()
            .iter()
            .map(|sigma| cumulant_product(sigma, &c).unwrap())
            .sum();
        let wick = cov[0][1] * cov[2][3] + cov[0][2] * cov[1][3] + cov[0][3] * cov[1][2];
        let got = moments_from_cumulants(&c, &Partition::single_block(4)).unwrap();
        assert!((got - brute).abs() < 1e-15);
        assert!((got - wick).abs() < 1e-15);
    }

    #[test]
    fn lattice_moments_match_set_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..=6 {
            let c = random_cumulants(k, &mut rng);
            let want = moments_by_recursion(&c);
            let m = MomentFunctional::from_cumulants(&c).unwrap();
            for mask in 1..(1u64 << k) {
                assert!((m.value_at_mask(mask) - want[mask as usize]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_for_every_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..=5 {
            let c = random_cumulants(k, &mut rng);
            let m = MomentFunctional::from_cumulants(&c).unwrap();
            for pi in enumerate_partitions(k).unwrap() {
                let back = cumulant_from_moments(&m, &pi).unwrap();
                let direct = cumulant_product(&pi, &c).unwrap();
                assert!((back - direct).abs() <= 1e-12 * direct.abs().max(1.0), "{pi}");
                let e = moments_from_cumulants(&c, &pi).unwrap();
                assert!((e - moment_product(&pi, &m).unwrap()).abs() <= 1e-12 * e.abs().max(1.0));
            }
            let c_again = CumulantFunctional::from_moments(&m).unwrap();
            for mask in 1..(1u64 << k) {
                assert!((c_again.value_at_mask(mask) - c.value_at_mask(mask)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn independent_blocks_have_zero_mixed_cumulant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 2..=4 {
            for split in 1..k {
                // L = {0..split}; m(S) = m(S∩L) · m(S∖L)
                let left = MomentFunctional::from_fn(k, |_| rng.random_range(-1.0..1.0)).unwrap();
                let right = MomentFunctional::from_fn(k, |_| rng.random_range(-1.0..1.0)).unwrap();
                let m = MomentFunctional::from_fn(k, |s| {
                    let l: Vec<usize> = s.iter().copied().filter(|&i| i < split).collect();
                    let r: Vec<usize> = s.iter().copied().filter(|&i| i >= split).collect();
                    let ml = if l.is_empty() { 1.0 } else { left.value(&l) };
                    let mr = if r.is_empty() { 1.0 } else { right.value(&r) };
                    ml * mr
                })
                .unwrap();
                let mixed = cumulant_from_moments(&m, &Partition::single_block(k)).unwrap();
                assert!(mixed.abs() < 1e-12, "k={k} split={split}: {mixed}");
            }
        }
    }

    #[test]
    fn cumulant_is_symmetric_and_multilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let k = 4;
        let c = random_cumulants(k, &mut rng);
        let m = MomentFunctional::from_cumulants(&c).unwrap();
        let top = Partition::single_block(k);
        let base = cumulant_from_moments(&m, &top).unwrap();

        let perm = [2, 0, 3, 1];
        let permuted = MomentFunctional::from_fn(k, |s| {
            m.value(&s.iter().map(|&i| perm[i]).collect::<Vec<_>>())
        })
        .unwrap();
        assert!((cumulant_from_moments(&permuted, &top).unwrap() - base).abs() < 1e-12);

        // scale coordinate 1 by a
        let a = -2.5;
        let scaled = MomentFunctional::from_fn(k, |s| {
            let v = m.value(s);
            if s.contains(&1) { a * v } else { v }
        })
        .unwrap();
        assert!((cumulant_from_moments(&scaled, &top).unwrap() - a * base).abs() < 1e-12);
    }

    #[test]
    fn arity_caps() {
        assert!(matches!(
            MomentFunctional::from_fn(11, |_| 0.0),
            Err(Error::Capacity { cap: 10, .. })
        ));
        assert!(MomentFunctional::from_fn(0, |_| 0.0).is_err());
    }

    #[test]
    fn empirical_cumulant_examples() {
        let constant = Array2::from_shape_fn((50, 1), |_| 4.2);
        assert!(empirical_joint_cumulant(constant.view(), &[0, 0]).unwrap().abs() < 1e-12);

        let xs = [1.0, 4.0, -2.0, 0.5, 3.0];
        let data = Array2::from_shape_fn((5, 2), |(i, _)| xs[i]);
        let var = crate::numeric::variance(&xs);
        assert!((empirical_joint_cumulant(data.view(), &[0, 1]).unwrap() - var).abs() < 1e-12);

        let one = Array2::from_shape_fn((1, 2), |_| 1.0);
        assert!(matches!(
            empirical_joint_cumulant(one.view(), &[0, 1]),
            Err(Error::InsufficientData { .. })
        ));
        assert!(matches!(
            empirical_joint_cumulant(data.view(), &[0, 0, 1, 1]),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn empirical_third_cumulant_of_normal_draws_vanishes() {
        let stream = crate::rng::RandomStream::new(2024);
        let mut rng = stream.generator();
        let draws = DriverSpec::gaussian(1.0).unwrap().sample_vec(&mut rng, 1_000_000).unwrap();
        let data = Array2::from_shape_vec((draws.len(), 1), draws.clone()).unwrap();
        let k3 = empirical_joint_cumulant(data.view(), &[0, 0, 0]).unwrap();
        // Var(k̂₃) ≈ 6σ⁶/m for a normal sample
        let se = (6.0 / draws.len() as f64).sqrt();
        assert!(k3.abs() < 5.0 * se, "k3 = {k3}, se = {se}");
    }

    #[test]
    fn linear_process_cumulant_examples() {
        let white = ProcessModel::new(Kernel::impulse(), DriverSpec::centered_exponential(1.0).unwrap());
        // κ_r = (r−1)! for the centered exponential
        assert_eq!(linear_process_cumulant(&white, &[3, 3, 3]).unwrap(), 2.0);
        assert_eq!(linear_process_cumulant(&white, &[3, 3, 4]).unwrap(), 0.0);

        let ma = ProcessModel::new(Kernel::moving_average(&[1.0, 0.5]).unwrap(), DriverSpec::gaussian(1.0).unwrap());
        assert_eq!(linear_process_cumulant(&ma, &[0, 1, 1]).unwrap(), 0.0);
        assert_eq!(linear_process_cumulant(&ma, &[0, 1]).unwrap(), 0.5);

        let custom = ProcessModel::new(Kernel::impulse(), DriverSpec::custom(vec![0.0, 1.0]).unwrap());
        assert!(matches!(
            linear_process_cumulant(&custom, &[0, 0, 0]),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn linear_process_cumulant_matches_autocovariance_and_is_stationary() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let coefs: Vec<(i64, f64)> = (-1..=2).map(|o| (o, rng.random_range(-1.0..1.0))).collect();
            let model = ProcessModel::new(Kernel::new(coefs).unwrap(), DriverSpec::rademacher(1.0).unwrap());
            let j: i64 = rng.random_range(-5..=5);
            let off: i64 = rng.random_range(-7..=7);
            let r = model.autocovariance(j);
            assert!((linear_process_cumulant(&model, &[off, off + j]).unwrap() - r).abs() < 1e-14);

            let t = [rng.random_range(-3..=3), rng.random_range(-3..=3), rng.random_range(-3..=3), 0];
            let base = linear_process_cumulant(&model, &t).unwrap();
            let shifted: Vec<i64> = t.iter().map(|x| x + off).collect();
            assert!((linear_process_cumulant(&model, &shifted).unwrap() - base).abs() < 1e-14);
            let perm = [t[2], t[0], t[3], t[1]];
            assert!((linear_process_cumulant(&model, &perm).unwrap() - base).abs() < 1e-14);
        }
    }
}
