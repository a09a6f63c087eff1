//! Stationary linear processes `Z_j = Σ_ℓ h(j + ℓ) W_ℓ` driven by i.i.d.
//! innovations, and their exact second- and fourth-order structure.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Number of analytic cumulants carried by the named driver families.
pub const DRIVER_MAX_ORDER: usize = 12;

/// Bernoulli numbers `B₂, B₄, …, B₁₂`.
const BERNOULLI_EVEN: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriverFamily {
    Gaussian,
    Rademacher,
    Uniform,
    CenteredExponential,
    Custom,
}

impl DriverFamily {
    pub fn name(self) -> &'static str {
        match self {
            DriverFamily::Gaussian => "gaussian",
            DriverFamily::Rademacher => "rademacher",
            DriverFamily::Uniform => "uniform",
            DriverFamily::CenteredExponential => "centered-exponential",
            DriverFamily::Custom => "custom",
        }
    }
}

impl fmt::Display for DriverFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DriverFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" => DriverFamily::Gaussian,
            "rademacher" => DriverFamily::Rademacher,
            "uniform" => DriverFamily::Uniform,
            "centered-exponential" => DriverFamily::CenteredExponential,
            "custom" => DriverFamily::Custom,
            other => return Err(Error::config(format!("unknown driver family `{other}`"))),
        })
    }
}

/// Distribution of the innovations `W`, described by its cumulants.
///
/// Sampling algorithms are fixed per family so streams replay exactly:
/// polar Box–Muller for `gaussian`, the low bit of a 64-bit draw for
/// `rademacher`, `√3·s·(2U − 1)` for `uniform`, and `−ln(1 − U)/λ − 1/λ` for
/// `centered-exponential`. `custom` drivers only carry cumulants and cannot
/// be simulated.
#[derive(Clone, Debug, PartialEq)]
pub struct DriverSpec {
    family: DriverFamily,
    /// Scale for gaussian/rademacher/uniform, rate for centered-exponential.
    parameter: f64,
    /// `cumulants[r - 1] = κ_r`
    cumulants: Vec<f64>,
}

impl DriverSpec {
    /// `N(0, σ²)`.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        check_positive("gaussian sigma", sigma)?;
        let mut k = vec![0.0; DRIVER_MAX_ORDER];
        k[1] = sigma * sigma;
        Ok(Self::named(DriverFamily::Gaussian, sigma, k))
    }

    /// `±s` with equal probability: `κ_{2m} = s^{2m} 2^{2m}(2^{2m}−1) B_{2m}/(2m)`.
    pub fn rademacher(scale: f64) -> Result<Self> {
        check_positive("rademacher scale", scale)?;
        let k = even_cumulants(|m| {
            let two_m = 2.0 * m as f64;
            let pow = 2f64.powf(two_m);
            scale.powf(two_m) * pow * (pow - 1.0) * BERNOULLI_EVEN[m - 1] / two_m
        });
        Ok(Self::named(DriverFamily::Rademacher, scale, k))
    }

    /// Uniform on `[−√3 s, √3 s]` (variance `s²`):
    /// `κ_{2m} = (2a)^{2m} B_{2m}/(2m)` with `a = √3 s`.
    pub fn uniform(scale: f64) -> Result<Self> {
        check_positive("uniform scale", scale)?;
        let a = 3f64.sqrt() * scale;
        let k = even_cumulants(|m| {
            let two_m = 2.0 * m as f64;
            (2.0 * a).powf(two_m) * BERNOULLI_EVEN[m - 1] / two_m
        });
        Ok(Self::named(DriverFamily::Uniform, scale, k))
    }

    /// `Exp(λ) − 1/λ`: `κ_r = (r−1)!/λ^r` for `r ≥ 2`.
    pub fn centered_exponential(rate: f64) -> Result<Self> {
        check_positive("exponential rate", rate)?;
        let mut k = vec![0.0; DRIVER_MAX_ORDER];
        let mut fact = 1.0;
        for r in 2..=DRIVER_MAX_ORDER {
            fact *= (r - 1) as f64;
            k[r - 1] = fact / rate.powi(r as i32);
        }
        Ok(Self::named(DriverFamily::CenteredExponential, rate, k))
    }

    /// A driver known only through `κ₁, κ₂, …`; `κ₁` must be 0 and `κ₂ > 0`.
    pub fn custom(cumulants: Vec<f64>) -> Result<Self> {
        if cumulants.len() < 2 {
            return Err(Error::config("custom driver needs at least κ₁ and κ₂"));
        }
        if cumulants.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("custom driver cumulants must be finite"));
        }
        if cumulants[0] != 0.0 {
            return Err(Error::config("driver must be centered (κ₁ = 0)"));
        }
        if cumulants[1] <= 0.0 {
            return Err(Error::config("driver variance κ₂ must be positive"));
        }
        Ok(Self {
            family: DriverFamily::Custom,
            parameter: f64::NAN,
            cumulants,
        })
    }

    fn named(family: DriverFamily, parameter: f64, cumulants: Vec<f64>) -> Self {
        Self {
            family,
            parameter,
            cumulants,
        }
    }

    pub fn family(&self) -> DriverFamily {
        self.family
    }

    pub fn parameter(&self) -> f64 {
        self.parameter
    }

    pub fn max_order(&self) -> usize {
        self.cumulants.len()
    }

    pub fn cumulants(&self) -> &[f64] {
        &self.cumulants
    }

    /// `κ_r(W)`.
    pub fn cumulant(&self, order: usize) -> Result<f64> {
        if order == 0 {
            return Err(Error::domain("cumulant order 0"));
        }
        self.cumulants.get(order - 1).copied().ok_or_else(|| {
            Error::config(format!(
                "driver supplies cumulants up to order {}, order {order} requested",
                self.max_order()
            ))
        })
    }

    pub fn variance(&self) -> f64 {
        self.cumulants[1]
    }

    /// Fills `out` with i.i.d. draws.
    pub fn sample_into<R: RngCore>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        match self.family {
            DriverFamily::Gaussian => {
                let sigma = self.parameter;
                let mut chunks = out.chunks_exact_mut(2);
                for pair in &mut chunks {
                    let (a, b) = polar_pair(rng);
                    pair[0] = sigma * a;
                    pair[1] = sigma * b;
                }
                if let [last] = chunks.into_remainder() {
                    *last = sigma * polar_pair(rng).0;
                }
            }
            DriverFamily::Rademacher => {
                let s = self.parameter;
                for x in out.iter_mut() {
                    *x = if rng.next_u64() & 1 == 1 { s } else { -s };
                }
            }
            DriverFamily::Uniform => {
                let a = 3f64.sqrt() * self.parameter;
                for x in out.iter_mut() {
                    *x = a * (2.0 * rng.random::<f64>() - 1.0);
                }
            }
            DriverFamily::CenteredExponential => {
                let rate = self.parameter;
                for x in out.iter_mut() {
                    let u: f64 = rng.random();
                    *x = (-(1.0 - u).ln() - 1.0) / rate;
                }
            }
            DriverFamily::Custom => {
                return Err(Error::config(
                    "custom drivers are described by cumulants only and cannot be sampled",
                ))
            }
        }
        Ok(())
    }

    pub fn sample_vec<R: RngCore>(&self, rng: &mut R, len: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; len];
        self.sample_into(rng, &mut out)?;
        Ok(out)
    }
}

fn check_positive(what: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{what} must be positive and finite, got {x}")))
    }
}

fn even_cumulants(kappa_2m: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut k = vec![0.0; DRIVER_MAX_ORDER];
    for m in 1..=DRIVER_MAX_ORDER / 2 {
        k[2 * m - 1] = kappa_2m(m);
    }
    k
}

/// Two independent standard normals by the Marsaglia polar method.
fn polar_pair<R: RngCore>(rng: &mut R) -> (f64, f64) {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}

/// Finitely supported convolution kernel `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    min_offset: i64,
    /// `coefs[i] = h(min_offset + i)`; first and last entries are nonzero.
    coefs: Vec<f64>,
}

impl Kernel {
    /// Builds a kernel from `(offset, coefficient)` pairs; offsets not listed
    /// are zero.
    pub fn new<I: IntoIterator<Item = (i64, f64)>>(terms: I) -> Result<Self> {
        let mut terms: Vec<(i64, f64)> = terms.into_iter().collect();
        if terms.is_empty() {
            return Err(Error::config("kernel has no terms"));
        }
        terms.sort_by_key(|t| t.0);
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::config("kernel lists an offset twice"));
        }
        if terms.iter().any(|t| !t.1.is_finite()) {
            return Err(Error::config("kernel coefficients must be finite"));
        }
        let nonzero: Vec<&(i64, f64)> = terms.iter().filter(|t| t.1 != 0.0).collect();
        let (Some(first), Some(last)) = (nonzero.first(), nonzero.last()) else {
            return Err(Error::config("kernel has no nonzero coefficient"));
        };
        let (lo, hi) = (first.0, last.0);
        let mut coefs = vec![0.0; (hi - lo + 1) as usize];
        for &(o, c) in &terms {
            if (lo..=hi).contains(&o) {
                coefs[(o - lo) as usize] = c;
            }
        }
        Ok(Self {
            min_offset: lo,
            coefs,
        })
    }

    /// `h = δ₀` (white noise).
    pub fn impulse() -> Self {
        Self {
            min_offset: 0,
            coefs: vec![1.0],
        }
    }

    /// `h(i) = coefs[i]` for `i = 0, 1, …`.
    pub fn moving_average(coefs: &[f64]) -> Result<Self> {
        Self::new(coefs.iter().enumerate().map(|(i, &c)| (i as i64, c)))
    }

    /// Inclusive offset range `(lo, hi)` outside of which `h` vanishes.
    pub fn support(&self) -> (i64, i64) {
        (self.min_offset, self.min_offset + self.coefs.len() as i64 - 1)
    }

    /// `hi − lo`.
    pub fn diameter(&self) -> i64 {
        self.coefs.len() as i64 - 1
    }

    #[inline]
    pub fn coefficient(&self, offset: i64) -> f64 {
        let i = offset - self.min_offset;
        if i < 0 || i >= self.coefs.len() as i64 {
            0.0
        } else {
            self.coefs[i as usize]
        }
    }

    /// Nonzero `(offset, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.coefs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(move |(i, &c)| (self.min_offset + i as i64, c))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.terms().map(|(o, c)| (o, c * factor)))
    }
}

/// A real sequence on a finite window of integer lags.
#[derive(Clone, Debug, PartialEq)]
pub struct LagSequence {
    min_lag: i64,
    values: Vec<f64>,
}

impl LagSequence {
    /// The unit impulse at lag 0.
    pub fn delta() -> Self {
        Self {
            min_lag: 0,
            values: vec![1.0],
        }
    }

    pub fn from_values(min_lag: i64, values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "lag sequence needs at least one value");
        Self { min_lag, values }
    }

    #[inline]
    pub fn at(&self, lag: i64) -> f64 {
        let i = lag - self.min_lag;
        if i < 0 || i >= self.values.len() as i64 {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    /// Inclusive lag window carried by the sequence.
    pub fn window(&self) -> (i64, i64) {
        (self.min_lag, self.min_lag + self.values.len() as i64 - 1)
    }

    /// `(F ⋆ G)(j) = Σ_k F(j − k) G(k)`.
    pub fn convolve(&self, other: &LagSequence) -> LagSequence {
        let mut values = vec![0.0; self.values.len() + other.values.len() - 1];
        for (i, &f) in self.values.iter().enumerate() {
            if f == 0.0 {
                continue;
            }
            for (j, &g) in other.values.iter().enumerate() {
                values[i + j] += f * g;
            }
        }
        LagSequence {
            min_lag: self.min_lag + other.min_lag,
            values,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.min_lag + i as i64, v))
    }
}

/// Kernel plus driver.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessModel {
    kernel: Kernel,
    driver: DriverSpec,
}

impl ProcessModel {
    pub fn new(kernel: Kernel, driver: DriverSpec) -> Self {
        Self { kernel, driver }
    }

    /// White noise with the given driver.
    pub fn white(driver: DriverSpec) -> Self {
        Self::new(Kernel::impulse(), driver)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn driver(&self) -> &DriverSpec {
        &self.driver
    }

    pub fn max_cumulant_order(&self) -> usize {
        self.driver.max_order()
    }

    /// `R(j) = Cov(Z₀, Z_j) = κ₂ Σ_ℓ h(ℓ) h(j + ℓ)`.
    pub fn autocovariance(&self, lag: i64) -> f64 {
        let d = self.kernel.diameter();
        if lag.abs() > d {
            return 0.0;
        }
        let (lo, hi) = self.kernel.support();
        let sum: f64 = (lo..=hi)
            .map(|l| self.kernel.coefficient(l) * self.kernel.coefficient(l + lag))
            .sum();
        self.driver.variance() * sum
    }

    /// `R` on its full support `[−D, D]`, `D` the kernel diameter.
    pub fn autocovariance_sequence(&self) -> LagSequence {
        let d = self.kernel.diameter();
        LagSequence::from_values(-d, (-d..=d).map(|j| self.autocovariance(j)).collect())
    }

    /// `f_Z(θ) = R(0) + 2 Σ_{j≥1} R(j) cos(2πjθ)` for `θ ∈ [0, 1]`.
    pub fn spectral_density(&self, theta: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::domain(format!("θ = {theta} outside [0, 1]")));
        }
        Ok(self.spectral_density_unchecked(theta))
    }

    pub(crate) fn spectral_density_unchecked(&self, theta: f64) -> f64 {
        let two_pi_theta = 2.0 * std::f64::consts::PI * theta;
        let tail: f64 = (1..=self.kernel.diameter())
            .map(|j| self.autocovariance(j) * (two_pi_theta * j as f64).cos())
            .sum();
        self.autocovariance(0) + 2.0 * tail
    }

    /// `R^{(m)}`, the `m`-fold self-convolution of `R` (`R^{(0)} = δ`).
    pub fn iterated_autocovariance_sequence(&self, m: usize) -> LagSequence {
        let r = self.autocovariance_sequence();
        (0..m).fold(LagSequence::delta(), |acc, _| acc.convolve(&r))
    }

    /// `R_i^{(m)}`.
    pub fn iterated_autocovariance(&self, m: usize, lag: i64) -> f64 {
        self.iterated_autocovariance_sequence(m).at(lag)
    }

    /// `Q_ij = Σ_ℓ C(Z_i, Z₀, Z_{j+ℓ}, Z_ℓ)
    ///       = κ₄ Σ_{ℓ,m} h(i+m) h(m) h(j+ℓ+m) h(ℓ+m)`.
    pub fn q_coefficient(&self, i: i64, j: i64) -> Result<f64> {
        let kappa4 = self.driver.cumulant(4)?;
        let (lo, hi) = self.kernel.support();
        let h = |o: i64| self.kernel.coefficient(o);
        let mut sum = 0.0;
        for m in lo..=hi {
            let outer = h(i + m) * h(m);
            if outer == 0.0 {
                continue;
            }
            for l in (lo - m)..=(hi - m) {
                sum += outer * h(j + l + m) * h(l + m);
            }
        }
        Ok(kappa4 * sum)
    }

    /// Lags outside `[−D, D]²` have `Q_ij = 0`.
    pub fn q_support(&self) -> i64 {
        self.kernel.diameter()
    }

    /// `∫ x^k ν_Z(dx) = R₀^{(k)}`.
    pub fn nu_moment(&self, k: usize) -> f64 {
        self.iterated_autocovariance(k, 0)
    }

    /// `n × p` data matrix whose rows are independent copies of
    /// `(Z₁, …, Z_p)/√n`.
    ///
    /// Row `i` draws `W` over exactly the window the kernel touches, from the
    /// substream `stream.child(i)`.
    pub fn simulate_data_matrix(&self, n: usize, p: usize, stream: &RandomStream) -> Result<Array2<f64>> {
        if n == 0 || p == 0 {
            return Err(Error::domain(format!("data matrix needs n, p ≥ 1, got n={n}, p={p}")));
        }
        if self.driver.family() == DriverFamily::Custom {
            return Err(Error::config(
                "custom drivers are described by cumulants only and cannot be sampled",
            ));
        }
        let (lo, _) = self.kernel.support();
        let d = self.kernel.diameter() as usize;
        let terms: Vec<(usize, f64)> = self
            .kernel
            .terms()
            .map(|(s, c)| ((s - lo) as usize, c))
            .collect();
        let inv_sqrt_n = 1.0 / (n as f64).sqrt();
        let mut x = Array2::zeros((n, p));
        let mut w = vec![0.0; p + d];
        for (i, mut row) in x.rows_mut().into_iter().enumerate() {
            let mut rng = stream.child(i as u64).generator();
            self.driver.sample_into(&mut rng, &mut w)?;
            // Z_j = Σ_s h(s) W_{s−j}; W_ℓ is stored at ℓ − (lo − p)
            for (col, z) in row.iter_mut().enumerate() {
                let back = p - 1 - col;
                let acc: f64 = terms.iter().map(|&(s, c)| c * w[s + back]).sum();
                *z = acc * inv_sqrt_n;
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::linear_process_cumulant;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ma1(theta: f64, driver: DriverSpec) -> ProcessModel {
        ProcessModel::new(Kernel::moving_average(&[1.0, theta]).unwrap(), driver)
    }

    fn random_model(rng: &mut ChaCha8Rng, driver: DriverSpec) -> ProcessModel {
        let len = rng.random_range(1..=4);
        let start = rng.random_range(-2..=2);
        let terms: Vec<(i64, f64)> = (0..len).map(|i| (start + i, rng.random_range(-1.0..1.0))).collect();
        ProcessModel::new(Kernel::new(terms).unwrap(), driver)
    }

    #[test]
    fn named_driver_cumulants() {
        let g = DriverSpec::gaussian(2.0).unwrap();
        assert_eq!(g.cumulant(2).unwrap(), 4.0);
        assert_eq!(g.cumulant(4).unwrap(), 0.0);
        let r = DriverSpec::rademacher(1.0).unwrap();
        let want = [0.0, 1.0, 0.0, -2.0, 0.0, 16.0, 0.0, -272.0, 0.0, 7936.0, 0.0, -353792.0];
        for (got, want) in r.cumulants().iter().zip(want) {
            assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{got} vs {want}");
        }
        let u = DriverSpec::uniform(1.0).unwrap();
        assert!((u.cumulant(2).unwrap() - 1.0).abs() < 1e-14);
        // uniform on [−a, a]: κ₄ = −2a⁴/15 with a² = 3
        assert!((u.cumulant(4).unwrap() + 2.0 * 9.0 / 15.0).abs() < 1e-13);
        let e = DriverSpec::centered_exponential(1.0).unwrap();
        assert_eq!(e.cumulant(1).unwrap(), 0.0);
        assert_eq!(e.cumulant(5).unwrap(), 24.0);
        assert!(matches!(e.cumulant(13), Err(Error::Configuration(_))));
    }

    #[test]
    fn custom_driver_validation() {
        assert!(DriverSpec::custom(vec![0.1, 1.0]).is_err());
        assert!(DriverSpec::custom(vec![0.0, 0.0]).is_err());
        assert!(DriverSpec::custom(vec![0.0]).is_err());
        let c = DriverSpec::custom(vec![0.0, 1.0, 0.5, -1.0]).unwrap();
        assert_eq!(c.max_order(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(c.sample_vec(&mut rng, 3).is_err());
    }

    #[test]
    fn sampled_moments_match_declared_cumulants() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = 400_000;
        for driver in [
            DriverSpec::gaussian(1.5).unwrap(),
            DriverSpec::rademacher(1.0).unwrap(),
            DriverSpec::uniform(0.5).unwrap(),
            DriverSpec::centered_exponential(2.0).unwrap(),
        ] {
            let xs = driver.sample_vec(&mut rng, m).unwrap();
            let mean = crate::numeric::mean(&xs);
            let var = crate::numeric::variance(&xs);
            let k2 = driver.variance();
            // fourth central moment = κ₄ + 3κ₂²
            let mu4 = driver.cumulant(4).unwrap() + 3.0 * k2 * k2;
            let se_mean = (k2 / m as f64).sqrt();
            let se_var = ((mu4 - k2 * k2) / m as f64).sqrt();
            assert!(mean.abs() < 5.0 * se_mean, "{}: mean {mean}", driver.family());
            // rademacher has no variance noise beyond the O(1/m) mean correction
            assert!((var - k2).abs() < 5.0 * se_var.max(k2 / m as f64), "{}: var {var}", driver.family());
        }
    }

    #[test]
    fn kernel_validation_and_support() {
        assert!(Kernel::new(Vec::new()).is_err());
        assert!(Kernel::new([(0, 0.0), (1, 0.0)]).is_err());
        assert!(Kernel::new([(0, 1.0), (0, 2.0)]).is_err());
        let k = Kernel::new([(-1, 0.0), (2, 0.5), (0, 1.0), (5, 0.0)]).unwrap();
        assert_eq!(k.support(), (0, 2));
        assert_eq!(k.coefficient(1), 0.0);
        assert_eq!(k.coefficient(2), 0.5);
        assert_eq!(k.terms().collect::<Vec<_>>(), vec![(0, 1.0), (2, 0.5)]);
    }

    #[test]
    fn autocovariance_examples() {
        let white = ProcessModel::white(DriverSpec::gaussian(1.0).unwrap());
        assert_eq!(white.autocovariance(0), 1.0);
        assert_eq!(white.autocovariance(1), 0.0);
        let m = ma1(0.5, DriverSpec::gaussian(1.0).unwrap());
        assert_eq!(m.autocovariance(0), 1.25);
        assert_eq!(m.autocovariance(1), 0.5);
        assert_eq!(m.autocovariance(-1), 0.5);
        assert_eq!(m.autocovariance(2), 0.0);
    }

    #[test]
    fn autocovariance_is_even_and_supported_on_diameter() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let m = random_model(&mut rng, DriverSpec::gaussian(1.3).unwrap());
            let d = m.kernel().diameter();
            for j in -(d + 3)..=(d + 3) {
                assert_eq!(m.autocovariance(j), m.autocovariance(-j));
                if j.abs() > d {
                    assert_eq!(m.autocovariance(j), 0.0);
                }
                let via_cumulant = linear_process_cumulant(&m, &[0, j]).unwrap();
                assert!((via_cumulant - m.autocovariance(j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spectral_density_examples() {
        let white = ProcessModel::white(DriverSpec::gaussian(1.0).unwrap());
        for theta in [0.0, 0.13, 0.5, 1.0] {
            assert!((white.spectral_density(theta).unwrap() - 1.0).abs() < 1e-15);
        }
        let m = ma1(0.3, DriverSpec::gaussian(2.0).unwrap());
        assert!((m.spectral_density(0.0).unwrap() - 1.3f64.powi(2) * 4.0).abs() < 1e-12);
        assert!(m.spectral_density(1.1).is_err());
        assert!(m.spectral_density(-0.1).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let m = random_model(&mut rng, DriverSpec::gaussian(1.0).unwrap());
            let grid = 100_000;
            let integral: f64 = (0..grid)
                .map(|g| m.spectral_density((g as f64 + 0.5) / grid as f64).unwrap())
                .sum::<f64>()
                / grid as f64;
            assert!((integral - m.autocovariance(0)).abs() < 1e-8);
            for theta in [0.1, 0.27, 0.4] {
                let a = m.spectral_density(theta).unwrap();
                let b = m.spectral_density(1.0 - theta).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn iterated_autocovariance_examples() {
        let m = ma1(0.5, DriverSpec::gaussian(1.0).unwrap());
        assert_eq!(m.iterated_autocovariance(0, 0), 1.0);
        assert_eq!(m.iterated_autocovariance(0, 1), 0.0);
        for j in -3..=3 {
            assert_eq!(m.iterated_autocovariance(1, j), m.autocovariance(j));
        }
        assert!((m.iterated_autocovariance(2, 0) - 2.0625).abs() < 1e-15);

        let white = ProcessModel::white(DriverSpec::gaussian(1.5).unwrap());
        for k in 0..6 {
            assert!((white.iterated_autocovariance(k, 0) - 2.25f64.powi(k as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_recurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = random_model(&mut rng, DriverSpec::gaussian(1.0).unwrap());
        let d = m.kernel().diameter();
        for order in 0..4 {
            for i in -(order as i64 + 1) * d - 1..=(order as i64 + 1) * d + 1 {
                let direct: f64 = (-d..=d)
                    .map(|k| m.iterated_autocovariance(order, i - k) * m.autocovariance(k))
                    .sum();
                assert!((m.iterated_autocovariance(order + 1, i) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn q_coefficient_examples() {
        let g = ma1(0.5, DriverSpec::gaussian(1.0).unwrap());
        for i in -2..=2 {
            for j in -2..=2 {
                assert_eq!(g.q_coefficient(i, j).unwrap(), 0.0);
            }
        }
        let white = ProcessModel::white(DriverSpec::centered_exponential(1.0).unwrap());
        for i in -2..=2 {
            for j in -2..=2 {
                let want = if i == 0 && j == 0 { 6.0 } else { 0.0 };
                assert_eq!(white.q_coefficient(i, j).unwrap(), want);
            }
        }
        let r = ma1(0.5, DriverSpec::rademacher(1.0).unwrap());
        assert!((r.q_coefficient(0, 0).unwrap() + 3.125).abs() < 1e-14);

        let custom = ProcessModel::white(DriverSpec::custom(vec![0.0, 1.0]).unwrap());
        assert!(matches!(custom.q_coefficient(0, 0), Err(Error::Configuration(_))));
    }

    #[test]
    fn q_coefficient_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let m = random_model(&mut rng, DriverSpec::uniform(1.0).unwrap());
            let d = m.q_support();
            let kappa4 = m.driver().cumulant(4).unwrap();
            let kappa2 = m.driver().variance();
            let mut total = 0.0;
            let mut boxed = 0.0;
            for i in -(d + 2)..=(d + 2) {
                for j in -(d + 2)..=(d + 2) {
                    let q = m.q_coefficient(i, j).unwrap();
                    assert!((q - m.q_coefficient(j, i).unwrap()).abs() < 1e-14);
                    // definitional sum of fourth-order cumulants over ℓ
                    let by_cumulants: f64 = (-3 * d - 3..=3 * d + 3)
                        .map(|l| linear_process_cumulant(&m, &[i, 0, j + l, l]).unwrap())
                        .sum();
                    assert!((q - by_cumulants).abs() < 1e-13);
                    // linear processes factorize: Q_ij = κ₄/κ₂² R(i) R(j)
                    let factored = kappa4 / (kappa2 * kappa2) * m.autocovariance(i) * m.autocovariance(j);
                    assert!((q - factored).abs() < 1e-13);
                    total += q.abs();
                    if i.abs() <= d && j.abs() <= d {
                        boxed += q.abs();
                    }
                }
            }
            assert!(total.is_finite());
            assert_eq!(total, boxed);
        }
    }

    #[test]
    fn nu_moment_matches_quadrature() {
        let white = ProcessModel::white(DriverSpec::gaussian(1.0).unwrap());
        for k in 1..6 {
            assert_eq!(white.nu_moment(k), 1.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let terms: Vec<(i64, f64)> = (0..3).map(|i| (i, rng.random_range(-1.0..1.0))).collect();
        let m = ProcessModel::new(Kernel::new(terms).unwrap(), DriverSpec::gaussian(1.0).unwrap());
        assert_eq!(m.nu_moment(1), m.autocovariance(0));
        let grid = 100_000;
        for k in 1..=4 {
            let quad: f64 = (0..grid)
                .map(|g| m.spectral_density((g as f64 + 0.5) / grid as f64).unwrap().powi(k as i32))
                .sum::<f64>()
                / grid as f64;
            assert!((quad - m.nu_moment(k)).abs() < 1e-6, "k = {k}");
        }
    }

    #[test]
    fn white_gaussian_entries_have_variance_one_over_n() {
        let model = ProcessModel::white(DriverSpec::gaussian(1.0).unwrap());
        let (n, p) = (1000, 1000);
        let x = model.simulate_data_matrix(n, p, &RandomStream::new(99)).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * (n as f64).sqrt()).collect();
        let var = crate::numeric::variance(&scaled);
        // Var of the sample variance of N(0,1): 2/(np)
        let se = (2.0 / scaled.len() as f64).sqrt();
        assert!((var - 1.0).abs() < 5.0 * se, "var = {var}");
    }

    #[test]
    fn simulated_lag_one_covariance() {
        let model = ma1(0.5, DriverSpec::rademacher(1.0).unwrap());
        let (n, p) = (2000, 200);
        let x = model.simulate_data_matrix(n, p, &RandomStream::new(5)).unwrap();
        let products: Vec<f64> = x
            .rows()
            .into_iter()
            .flat_map(|row| (0..p - 1).map(move |j| row[j] * row[j + 1] * n as f64).collect::<Vec<_>>())
            .collect();
        let est = crate::numeric::mean(&products);
        // rows are independent; within a row products are 2-dependent, so
        // inflate the naive SE by √5
        let se = (crate::numeric::variance(&products) / products.len() as f64).sqrt() * 5f64.sqrt();
        assert!((est - 0.5).abs() < 5.0 * se, "est {est} se {se}");
    }

    #[test]
    fn simulation_is_reproducible() {
        let model = ma1(-0.7, DriverSpec::uniform(1.0).unwrap());
        let s = RandomStream::new(123).child(4);
        let a = model.simulate_data_matrix(7, 11, &s).unwrap();
        let b = model.simulate_data_matrix(7, 11, &s).unwrap();
        assert_eq!(a, b);
        let c = model.simulate_data_matrix(7, 11, &RandomStream::new(124).child(4)).unwrap();
        assert_ne!(a, c);
        assert!(model.simulate_data_matrix(0, 3, &s).is_err());
    }
}
