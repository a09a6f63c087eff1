//! Summation and sample-statistics helpers shared by the matrix kernels and
//! the experiment harness.

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a sequence.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

/// Unbiased sample covariance of two equally long series.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "covariance of series with unequal length");
    let m = xs.len();
    if m < 2 {
        return f64::NAN;
    }
    let (mx, my) = (mean(xs), mean(ys));
    compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my))) / (m - 1) as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    covariance(xs, xs)
}

/// Sample skewness `g₁ = m₃ / m₂^{3/2}` (plug-in central moments).
pub fn skewness(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    let m2 = mean(&xs.iter().map(|x| (x - mu).powi(2)).collect::<Vec<_>>());
    let m3 = mean(&xs.iter().map(|x| (x - mu).powi(3)).collect::<Vec<_>>());
    m3 / m2.powf(1.5)
}

/// Sample excess kurtosis `g₂ = m₄ / m₂² − 3`.
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    let m2 = mean(&xs.iter().map(|x| (x - mu).powi(2)).collect::<Vec<_>>());
    let m4 = mean(&xs.iter().map(|x| (x - mu).powi(4)).collect::<Vec<_>>());
    m4 / (m2 * m2) - 3.0
}

/// Standard error of the sample skewness under normality.
pub fn skewness_se(m: usize) -> f64 {
    let m = m as f64;
    (6.0 * m * (m - 1.0) / ((m - 2.0) * (m + 1.0) * (m + 3.0))).sqrt()
}

/// Standard error of the sample excess kurtosis under normality.
pub fn kurtosis_se(m: usize) -> f64 {
    let mf = m as f64;
    2.0 * skewness_se(m) * ((mf * mf - 1.0) / ((mf - 3.0) * (mf + 5.0))).sqrt()
}

/// Number of batches used for batched standard errors.
pub const SE_BATCHES: usize = 20;

/// Batched standard error of a statistic.
///
/// The replicas `0..m` are split into [`SE_BATCHES`] contiguous groups of
/// near-equal size, `statistic` is evaluated on each group, and the spread
/// of the group values (divided by `√batches`) is returned. Needs at least
/// two replicas per batch; otherwise NaN.
pub fn batched_se<F>(m: usize, statistic: F) -> f64
where
    F: Fn(std::ops::Range<usize>) -> f64,
{
    let batches = SE_BATCHES;
    if m < 2 * batches {
        return f64::NAN;
    }
    let values: Vec<f64> = (0..batches)
        .map(|g| statistic(g * m / batches..(g + 1) * m / batches))
        .collect();
    (variance(&values) / batches as f64).sqrt()
}

/// z-score of `sample` against `target`, with the degenerate zero-SE case
/// mapped to 0 (exact agreement) or ±∞.
pub fn z_score(sample: f64, target: f64, se: f64) -> f64 {
    let diff = sample - target;
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}
