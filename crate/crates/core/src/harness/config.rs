use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::OracleCaps;
use crate::process::{DriverFamily, DriverSpec, Kernel, ProcessModel};

pub const MAX_TRACE_POWER: usize = 5;
pub const MIN_CLT_REPLICAS: usize = 200;
/// Batched standard errors need two replicas in each of the 20 batches.
pub const MIN_ORACLE_REPLICAS: usize = 40;
/// `b/n` above this is outside the regime where the CLT is expected to show.
pub const CLT_BAND_RATIO_WARNING: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Lln,
    Clt,
    Oracle,
    Centered,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Lln => "lln",
            ExperimentKind::Clt => "clt",
            ExperimentKind::Oracle => "oracle",
            ExperimentKind::Centered => "centered",
        }
    }

    /// First path component of every random stream the experiment uses.
    pub fn stream_id(self) -> u64 {
        match self {
            ExperimentKind::Lln => 1,
            ExperimentKind::Clt => 2,
            ExperimentKind::Oracle => 3,
            ExperimentKind::Centered => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTerm {
    pub offset: i64,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverConfig {
    pub family: DriverFamily,
    /// σ for gaussian, `s` for rademacher (`±s`) and uniform (variance `s²`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// λ for centered-exponential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// `[κ₁, κ₂, …]` for custom drivers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cumulants: Option<Vec<f64>>,
}

impl DriverConfig {
    pub fn build(&self) -> Result<DriverSpec> {
        let scale = self.scale.unwrap_or(1.0);
        let misplaced = |field: &str| {
            Err(Error::config(format!(
                "`{field}` does not apply to the {} driver",
                self.family
            )))
        };
        match self.family {
            DriverFamily::Gaussian | DriverFamily::Rademacher | DriverFamily::Uniform => {
                if self.rate.is_some() {
                    return misplaced("rate");
                }
                if self.cumulants.is_some() {
                    return misplaced("cumulants");
                }
            }
            DriverFamily::CenteredExponential => {
                if self.scale.is_some() {
                    return misplaced("scale");
                }
                if self.cumulants.is_some() {
                    return misplaced("cumulants");
                }
            }
            DriverFamily::Custom => {
                if self.scale.is_some() {
                    return misplaced("scale");
                }
                if self.rate.is_some() {
                    return misplaced("rate");
                }
            }
        }
        match self.family {
            DriverFamily::Gaussian => DriverSpec::gaussian(scale),
            DriverFamily::Rademacher => DriverSpec::rademacher(scale),
            DriverFamily::Uniform => DriverSpec::uniform(scale),
            DriverFamily::CenteredExponential => DriverSpec::centered_exponential(self.rate.unwrap_or(1.0)),
            DriverFamily::Custom => match &self.cumulants {
                Some(c) => DriverSpec::custom(c.clone()),
                None => Err(Error::config("custom driver needs `cumulants`")),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kernel: Vec<KernelTerm>,
    pub driver: DriverConfig,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ProcessModel> {
        let kernel = Kernel::new(self.kernel.iter().map(|t| (t.offset, t.coefficient)))?;
        Ok(ProcessModel::new(kernel, self.driver.build()?))
    }

    /// White noise with a named driver family and unit parameter.
    pub fn white(family: DriverFamily) -> Self {
        Self::moving_average(&[1.0], family)
    }

    /// `h(i) = coefs[i]` with a named driver family and unit parameter.
    pub fn moving_average(coefs: &[f64], family: DriverFamily) -> Self {
        Self {
            kernel: coefs
                .iter()
                .enumerate()
                .map(|(i, &c)| KernelTerm {
                    offset: i as i64,
                    coefficient: c,
                })
                .collect(),
            driver: DriverConfig {
                family,
                scale: None,
                rate: None,
                cumulants: None,
            },
        }
    }
}

/// One `(p, n, b)` point of a size schedule. `n` defaults to `8p` and `b`
/// to `⌈√p / 2⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RawSize")]
pub struct SizeSpec {
    pub p: usize,
    pub n: usize,
    pub b: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSize {
    p: usize,
    n: Option<usize>,
    b: Option<usize>,
}

impl From<RawSize> for SizeSpec {
    fn from(raw: RawSize) -> Self {
        let default = SizeSpec::with_defaults(raw.p);
        SizeSpec {
            p: raw.p,
            n: raw.n.unwrap_or(default.n),
            b: raw.b.unwrap_or(default.b),
        }
    }
}

impl SizeSpec {
    pub fn new(p: usize, n: usize, b: usize) -> Self {
        Self { p, n, b }
    }

    pub fn with_defaults(p: usize) -> Self {
        Self {
            p,
            n: 8 * p,
            b: ((p as f64).sqrt() / 2.0).ceil() as usize,
        }
    }
}

fn default_k_list() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_bins() -> usize {
    40
}
fn default_workers() -> usize {
    1
}
fn default_z_threshold() -> f64 {
    3.0
}
fn default_lln_tolerance() -> f64 {
    0.05
}

/// Everything an experiment run needs; the JSON form uses these field names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub sizes: Vec<SizeSpec>,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<usize>,
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Require variance and histogram distance to shrink along the schedule.
    #[serde(default)]
    pub trend_checks: bool,
    /// Replicas per size whose full spectrum is computed (LLN); all if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_replicas: Option<usize>,
    /// Cumulant orders checked by the oracle experiment.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orders: Vec<Vec<usize>>,
    /// Largest accepted |z| for CLT covariance entries and oracle checks.
    #[serde(default = "default_z_threshold")]
    pub z_threshold: f64,
    /// Largest accepted relative error of LLN moments.
    #[serde(default = "default_lln_tolerance")]
    pub lln_tolerance: f64,
}

impl ExperimentConfig {
    pub fn new(model: ModelConfig, sizes: Vec<SizeSpec>, replicas: usize, seed: u64) -> Self {
        Self {
            model,
            sizes,
            k_list: default_k_list(),
            replicas,
            seed,
            bins: default_bins(),
            out_dir: None,
            workers: default_workers(),
            trend_checks: false,
            spectrum_replicas: None,
            orders: Vec::new(),
            z_threshold: default_z_threshold(),
            lln_tolerance: default_lln_tolerance(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("experiment configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Oracle orders, defaulting to `(1), (2), (1,1), (2,1)`.
    pub fn oracle_orders(&self) -> Vec<Vec<usize>> {
        if self.orders.is_empty() {
            vec![vec![1], vec![2], vec![1, 1], vec![2, 1]]
        } else {
            self.orders.clone()
        }
    }

    /// Checks the configuration for one experiment kind. Every violation is
    /// reported at once; soft problems come back as warnings.
    pub fn validate(&self, kind: ExperimentKind) -> Result<Vec<String>> {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();

        let model = match self.model.build() {
            Ok(m) => Some(m),
            Err(e) => {
                errors.push(format!("model: {e}"));
                None
            }
        };
        if self.sizes.is_empty() {
            errors.push("size schedule is empty".into());
        }
        for (idx, s) in self.sizes.iter().enumerate() {
            let at = format!("sizes[{idx}] = (p={}, n={}, b={})", s.p, s.n, s.b);
            if s.p == 0 {
                errors.push(format!("{at}: p must be ≥ 1"));
            }
            if s.n == 0 {
                errors.push(format!("{at}: n must be ≥ 1"));
            }
            if s.b > s.p {
                errors.push(format!("{at}: bandwidth must not exceed p"));
            }
            if s.b == 0 && kind != ExperimentKind::Oracle {
                errors.push(format!("{at}: bandwidth must be ≥ 1"));
            }
            if kind == ExperimentKind::Centered && s.n < 2 {
                errors.push(format!("{at}: centering needs n ≥ 2"));
            }
            if kind == ExperimentKind::Clt && s.n > 0 && s.b as f64 / s.n as f64 > CLT_BAND_RATIO_WARNING {
                warnings.push(format!(
                    "{at}: b/n = {:.3} exceeds {CLT_BAND_RATIO_WARNING}",
                    s.b as f64 / s.n as f64
                ));
            }
        }
        if self.trend_checks && self.sizes.windows(2).any(|w| w[0].p >= w[1].p) {
            errors.push("trend checks need a schedule strictly increasing in p".into());
        }
        if self.k_list.is_empty() {
            errors.push("k_list is empty".into());
        }
        if self.k_list.iter().any(|&k| k == 0 || k > MAX_TRACE_POWER) {
            errors.push(format!("k_list values must lie in 1..={MAX_TRACE_POWER}"));
        }
        if self.replicas == 0 {
            errors.push("replicas must be ≥ 1".into());
        }
        match kind {
            ExperimentKind::Clt if self.replicas < MIN_CLT_REPLICAS => errors.push(format!(
                "CLT runs need at least {MIN_CLT_REPLICAS} replicas, got {}",
                self.replicas
            )),
            ExperimentKind::Oracle if self.replicas < MIN_ORACLE_REPLICAS => errors.push(format!(
                "oracle checks need at least {MIN_ORACLE_REPLICAS} replicas, got {}",
                self.replicas
            )),
            _ => {}
        }
        if self.bins == 0 {
            errors.push("bins must be ≥ 1".into());
        }
        if self.workers == 0 {
            errors.push("workers must be ≥ 1".into());
        }
        if self.spectrum_replicas == Some(0) {
            errors.push("spectrum_replicas must be ≥ 1".into());
        }
        if !(self.z_threshold > 0.0) {
            errors.push("z_threshold must be positive".into());
        }
        if !(self.lln_tolerance > 0.0) {
            errors.push("lln_tolerance must be positive".into());
        }
        if kind == ExperimentKind::Oracle {
            for o in self.oracle_orders() {
                if o.is_empty() || o.contains(&0) {
                    errors.push(format!("oracle order {o:?} must list positive block sizes"));
                }
                if o.len() > crate::cumulants::MAX_EMPIRICAL_ORDER {
                    errors.push(format!(
                        "oracle order {o:?} has more than {} blocks",
                        crate::cumulants::MAX_EMPIRICAL_ORDER
                    ));
                }
            }
        }
        if let Some(model) = &model {
            let needed = match kind {
                ExperimentKind::Clt => 4,
                ExperimentKind::Oracle => {
                    2 * self.oracle_orders().iter().map(|o| o.iter().sum::<usize>()).max().unwrap_or(0)
                }
                _ => 2,
            };
            if model.max_cumulant_order() < needed {
                errors.push(format!(
                    "driver supplies cumulants up to order {}, this experiment needs {needed}",
                    model.max_cumulant_order()
                ));
            }
            if kind != ExperimentKind::Oracle && model.driver().family() == DriverFamily::Custom {
                errors.push("custom drivers cannot be simulated".into());
            }
            if kind == ExperimentKind::Oracle && model.driver().family() == DriverFamily::Custom {
                errors.push("oracle checks simulate the model; custom drivers cannot be simulated".into());
            }
        }
        if kind == ExperimentKind::Oracle {
            let caps = OracleCaps::default();
            if self.sizes.iter().any(|s| s.p > caps.max_p) {
                warnings.push(format!("sizes with p > {} exceed the oracle caps", caps.max_p));
            }
        }

        if errors.is_empty() {
            Ok(warnings)
        } else {
            Err(Error::Validation(errors))
        }
    }
}
