//! Finite-sample efficiency by Monte-Carlo, bootstrap efficiency on observed
//! data, and the contamination probe for the finite-sample breakdown point.
//!
//! Replication `j` (or resample `b`) always draws from RNG stream `j` (`b`)
//! of the run seed and results are reduced in index order, so reports are
//! bit-identical whether the work runs on one thread or many.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{CovariateLaw, ErrorLaw, SeededRng};
use crate::error::{Error, Result};
use crate::estimator::{order_pairs, trim_count, PairedSample};
use crate::kernels::{BandwidthRule, KernelSpec};

/// Default trimming grid: 0.05, 0.10, ..., 0.45.
pub fn default_alphas() -> Vec<f64> {
    (1..=9).map(|k| k as f64 * 0.05).map(|a| (a * 1e12).round() / 1e12).collect()
}

/// Mean-regression function of the simulation models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionFunction {
    /// `g(x) = 5x`
    Linear5x,
    /// `g(x) = 4x³`
    Cubic4x3,
}

impl RegressionFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            RegressionFunction::Linear5x => 5.0 * x,
            RegressionFunction::Cubic4x3 => 4.0 * x * x * x,
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            RegressionFunction::Linear5x => 5.0,
            RegressionFunction::Cubic4x3 => 12.0 * x * x,
        }
    }

    pub fn second_derivative(self, x: f64) -> f64 {
        match self {
            RegressionFunction::Linear5x => 0.0,
            RegressionFunction::Cubic4x3 => 24.0 * x,
        }
    }
}

/// What a Monte-Carlo run does when a replication has no retained point in
/// the kernel window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowPolicy {
    /// Fail the run, naming the first failing replication.
    #[default]
    Abort,
    /// Leave the replication out of that alpha's variance ratio.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionScenario {
    pub g: RegressionFunction,
    pub error: ErrorLaw,
    pub covariate: CovariateLaw,
    pub n: usize,
    pub x0: f64,
    pub alphas: Vec<f64>,
    pub replications: usize,
    pub kernel: KernelSpec,
    pub bandwidth: BandwidthRule,
    pub seed: u64,
    #[serde(default)]
    pub on_empty_window: WindowPolicy,
}

impl RegressionScenario {
    /// Simulation models 1-4: `5x` or `4x³`, each with standard normal or
    /// t(5) errors, uniform covariates, `x0 = 0.5`, 1000 replications.
    pub fn example(id: u8, n: usize, seed: u64) -> Result<Self> {
        let (g, error) = match id {
            1 => (RegressionFunction::Linear5x, ErrorLaw::StdNormal),
            2 => (RegressionFunction::Cubic4x3, ErrorLaw::StdNormal),
            3 => (RegressionFunction::Linear5x, ErrorLaw::StudentT5),
            4 => (RegressionFunction::Cubic4x3, ErrorLaw::StudentT5),
            _ => return Err(Error::InvalidParameter(format!("example must be 1-4, got {id}"))),
        };
        Ok(RegressionScenario {
            g,
            error,
            covariate: CovariateLaw::Uniform01,
            n,
            x0: 0.5,
            alphas: default_alphas(),
            replications: 1000,
            kernel: KernelSpec::default(),
            bandwidth: BandwidthRule::PaperDefault,
            seed,
            on_empty_window: WindowPolicy::Abort,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 5 {
            return Err(Error::InvalidParameter(format!("sample size must be at least 5, got {}", self.n)));
        }
        if self.replications < 2 {
            return Err(Error::InvalidParameter("at least two replications are required".into()));
        }
        if !self.x0.is_finite() {
            return Err(Error::InvalidParameter("query point must be finite".into()));
        }
        for &a in &self.alphas {
            trim_count(self.n, a)?;
        }
        self.bandwidth.bandwidth(self.n)?;
        Ok(())
    }

    /// Draws replication `j`: covariates then errors, both from stream `j`.
    pub fn draw(&self, j: usize) -> PairedSample {
        let mut rng = SeededRng::new(self.seed, j as u64);
        let xs = self.covariate.sample(&mut rng, self.n);
        let es = self.error.sample(&mut rng, self.n);
        let ys = xs.iter().zip(&es).map(|(&x, &e)| self.g.eval(x) + e).collect();
        PairedSample::new(xs, ys).expect("simulated draws are finite and non-empty")
    }
}

/// Estimates at `x0` for every replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateTable {
    pub alphas: Vec<f64>,
    /// Nadaraya-Watson value per replication.
    pub nw: Vec<Option<f64>>,
    /// `trimmed[a][j]`: trimmed value for `alphas[a]` in replication `j`.
    pub trimmed: Vec<Vec<Option<f64>>>,
}

struct Outcome {
    nw: Result<f64>,
    trimmed: Vec<Result<f64>>,
}

fn evaluate(sample: &PairedSample, x0: f64, alphas: &[f64], kernel: &KernelSpec, h: f64) -> Outcome {
    let ordered = order_pairs(sample);
    let nw = ordered.trimmed_nw(x0, 0.0, kernel, h).map(|e| e.value);
    let trimmed = alphas.iter().map(|&a| ordered.trimmed_nw(x0, a, kernel, h).map(|e| e.value)).collect();
    Outcome { nw, trimmed }
}

fn is_window_failure(r: &Result<f64>) -> bool {
    matches!(r, Err(Error::EmptyKernelWindow { .. }))
}

/// Runs every replication and applies the scenario's empty-window policy.
pub fn monte_carlo_replicates(sc: &RegressionScenario) -> Result<ReplicateTable> {
    sc.validate()?;
    let h = sc.bandwidth.bandwidth(sc.n)?;
    let outcomes: Vec<Outcome> =
        (0..sc.replications).into_par_iter().map(|j| evaluate(&sc.draw(j), sc.x0, &sc.alphas, &sc.kernel, h)).collect();

    for (j, o) in outcomes.iter().enumerate() {
        for r in std::iter::once(&o.nw).chain(&o.trimmed) {
            if let Err(e) = r {
                if sc.on_empty_window == WindowPolicy::Abort || !is_window_failure(r) {
                    return Err(Error::ReplicationFailed { index: j, source: Box::new(clone_error(e)) });
                }
            }
        }
    }
    Ok(tabulate(&sc.alphas, outcomes))
}

fn tabulate(alphas: &[f64], outcomes: Vec<Outcome>) -> ReplicateTable {
    let mut trimmed = vec![Vec::with_capacity(outcomes.len()); alphas.len()];
    let mut nw = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        nw.push(o.nw.ok());
        for (col, r) in trimmed.iter_mut().zip(o.trimmed) {
            col.push(r.ok());
        }
    }
    ReplicateTable { alphas: alphas.to_vec(), nw, trimmed }
}

// Estimator failures are plain data variants; rebuild them so the run-level
// error can own a copy while the table keeps the rest.
fn clone_error(e: &Error) -> Error {
    match e {
        Error::EmptyKernelWindow { x0 } => Error::EmptyKernelWindow { x0: *x0 },
        Error::DegenerateTrim { n, alpha } => Error::DegenerateTrim { n: *n, alpha: *alpha },
        Error::InvalidAlpha(a) => Error::InvalidAlpha(*a),
        Error::InvalidBandwidth(h) => Error::InvalidBandwidth(*h),
        other => Error::InvalidParameter(other.to_string()),
    }
}

/// Population variance (divides by the count).
pub fn population_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub alpha: f64,
    /// `var(NW) / var(trimmed)`.
    pub efficiency: f64,
    pub nw_variance: f64,
    pub trimmed_variance: f64,
    /// Replications (or resamples) that entered this ratio.
    pub used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EfficiencySource {
    MonteCarlo { scenario: RegressionScenario },
    Bootstrap { resamples: usize, sample_size: usize, kernel: KernelSpec, bandwidth_rule: BandwidthRule },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub source: EfficiencySource,
    pub seed: u64,
    pub x0: f64,
    pub bandwidth: f64,
    pub rows: Vec<EfficiencyRow>,
}

impl EfficiencyReport {
    pub fn efficiencies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.efficiency).collect()
    }

    pub fn at(&self, alpha: f64) -> Option<&EfficiencyRow> {
        self.rows.iter().find(|r| (r.alpha - alpha).abs() < 1e-12)
    }
}

fn efficiency_rows(table: &ReplicateTable) -> Result<Vec<EfficiencyRow>> {
    table
        .alphas
        .iter()
        .zip(&table.trimmed)
        .map(|(&alpha, col)| {
            let (v, u): (Vec<f64>, Vec<f64>) =
                table.nw.iter().zip(col).filter_map(|(a, b)| Some(((*a)?, (*b)?))).unzip();
            if v.len() < 2 {
                return Err(Error::TooFewReplications { alpha });
            }
            let nw_variance = population_variance(&v);
            let trimmed_variance = population_variance(&u);
            if trimmed_variance == 0.0 {
                return Err(Error::DegenerateVariance { alpha });
            }
            Ok(EfficiencyRow {
                alpha,
                efficiency: nw_variance / trimmed_variance,
                nw_variance,
                trimmed_variance,
                used: v.len(),
            })
        })
        .collect()
}

pub fn run_mc_efficiency(sc: &RegressionScenario) -> Result<EfficiencyReport> {
    let table = monte_carlo_replicates(sc)?;
    Ok(EfficiencyReport {
        source: EfficiencySource::MonteCarlo { scenario: sc.clone() },
        seed: sc.seed,
        x0: sc.x0,
        bandwidth: sc.bandwidth.bandwidth(sc.n)?,
        rows: efficiency_rows(&table)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub alphas: Vec<f64>,
    pub x0: f64,
    pub kernel: KernelSpec,
    pub bandwidth: BandwidthRule,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 1000,
            alphas: default_alphas(),
            x0: 0.5,
            kernel: KernelSpec::default(),
            bandwidth: BandwidthRule::PaperDefault,
            seed: 0,
        }
    }
}

/// Bootstrap variance ratio of Nadaraya-Watson to the trimmed estimator.
///
/// Resamples whose kernel window comes up empty are left out of the affected
/// ratios; if that happens to more than half of them the query point is
/// reported as not estimable.
pub fn run_bootstrap_efficiency(data: &PairedSample, cfg: &BootstrapConfig) -> Result<EfficiencyReport> {
    if cfg.resamples < 2 {
        return Err(Error::InvalidParameter("at least two bootstrap resamples are required".into()));
    }
    let n = data.len();
    for &a in &cfg.alphas {
        trim_count(n, a)?;
    }
    let h = cfg.bandwidth.bandwidth(n)?;
    let (xs, ys) = (data.xs(), data.ys());
    let outcomes: Vec<Outcome> = (0..cfg.resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = SeededRng::new(cfg.seed, b as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let resample =
                PairedSample::new(idx.iter().map(|&i| xs[i]).collect(), idx.iter().map(|&i| ys[i]).collect())
                    .expect("resample of a valid sample");
            evaluate(&resample, cfg.x0, &cfg.alphas, &cfg.kernel, h)
        })
        .collect();

    for (b, o) in outcomes.iter().enumerate() {
        for r in std::iter::once(&o.nw).chain(&o.trimmed) {
            if let Err(e) = r {
                if !is_window_failure(r) {
                    return Err(Error::ResampleFailed { index: b, source: Box::new(clone_error(e)) });
                }
            }
        }
    }
    let total = outcomes.len();
    for a in 0..cfg.alphas.len() {
        let failed = outcomes.iter().filter(|o| o.nw.is_err() || o.trimmed[a].is_err()).count();
        if 2 * failed > total {
            return Err(Error::UnestimableQuery { failed, total });
        }
    }
    let table = tabulate(&cfg.alphas, outcomes);
    Ok(EfficiencyReport {
        source: EfficiencySource::Bootstrap {
            resamples: cfg.resamples,
            sample_size: n,
            kernel: cfg.kernel,
            bandwidth_rule: cfg.bandwidth,
        },
        seed: cfg.seed,
        x0: cfg.x0,
        bandwidth: h,
        rows: efficiency_rows(&table)?,
    })
}

/// Where replaced pairs are moved to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// `(X', Y') = (magnitude, magnitude)`: the contaminated pairs become the
    /// largest covariate values.
    #[default]
    UpperTail,
    /// `(X', Y') = (x0, magnitude)`: the contaminated pairs sit at the query
    /// point with maximal kernel weight.
    KernelWindow,
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper-tail" => Ok(Placement::UpperTail),
            "kernel-window" => Ok(Placement::KernelWindow),
            other => Err(Error::InvalidParameter(format!("unknown placement `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationPlan {
    /// Number of pairs replaced.
    pub m: usize,
    pub magnitude: f64,
    #[serde(default)]
    pub placement: Placement,
}

impl ContaminationPlan {
    pub fn new(m: usize, magnitude: f64) -> Self {
        ContaminationPlan { m, magnitude, placement: Placement::UpperTail }
    }
}

/// Replaces the `m` pairs with the largest covariates according to the plan.
pub fn contaminate(sample: &PairedSample, plan: &ContaminationPlan, x0: f64) -> Result<PairedSample> {
    let n = sample.len();
    if plan.m > n {
        return Err(Error::ContaminationTooLarge { m: plan.m, n });
    }
    if !(plan.magnitude.is_finite() && plan.magnitude > 0.0) {
        return Err(Error::InvalidParameter(format!("magnitude must be positive, got {}", plan.magnitude)));
    }
    let ordered = order_pairs(sample);
    let (mut xs, mut ys) = sample.clone().into_parts();
    let x_new = match plan.placement {
        Placement::UpperTail => plan.magnitude,
        Placement::KernelWindow => x0,
    };
    for &i in &ordered.perm()[n - plan.m..] {
        xs[i] = x_new;
        ys[i] = plan.magnitude;
    }
    PairedSample::new(xs, ys)
}

/// `|T(contaminated) - T(clean)|` for the plan's contamination, a lower bound
/// on the worst-case bias with `m` replaced pairs.
pub fn breakdown_bias(
    sample: &PairedSample,
    plan: &ContaminationPlan,
    x0: f64,
    alpha: f64,
    kernel: &KernelSpec,
    bw: &BandwidthRule,
) -> Result<f64> {
    let clean = crate::estimator::trimmed_nw(sample, x0, alpha, kernel, bw)?;
    let dirty = crate::estimator::trimmed_nw(&contaminate(sample, plan, x0)?, x0, alpha, kernel, bw)?;
    Ok((dirty.value - clean.value).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakdownProbe {
    pub magnitude: f64,
    /// Bias above this counts as unbounded.
    pub threshold: f64,
    pub placement: Placement,
}

impl Default for BreakdownProbe {
    fn default() -> Self {
        BreakdownProbe { magnitude: 1e9, threshold: 1e2, placement: Placement::UpperTail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasPoint {
    pub m: usize,
    /// `None` when the contaminated estimate is undefined (empty kernel window).
    pub bias: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub n: usize,
    pub alpha: f64,
    pub m_star: usize,
    pub ratio: f64,
    pub bias_curve: Vec<BiasPoint>,
}

/// Smallest `m` whose contamination pushes the bias past the threshold, or
/// leaves the estimator undefined. Scans `m = 0, 1, ..., n`.
pub fn empirical_breakdown_point(
    sample: &PairedSample,
    x0: f64,
    alpha: f64,
    kernel: &KernelSpec,
    bw: &BandwidthRule,
    probe: &BreakdownProbe,
) -> Result<BreakdownReport> {
    let n = sample.len();
    let clean = crate::estimator::trimmed_nw(sample, x0, alpha, kernel, bw)?.value;
    let mut curve = Vec::new();
    for m in 0..=n {
        let plan = ContaminationPlan { m, magnitude: probe.magnitude, placement: probe.placement };
        let bias = match crate::estimator::trimmed_nw(&contaminate(sample, &plan, x0)?, x0, alpha, kernel, bw) {
            Ok(e) => Some((e.value - clean).abs()),
            Err(Error::EmptyKernelWindow { .. }) => None,
            Err(e) => return Err(e),
        };
        curve.push(BiasPoint { m, bias });
        if bias.is_none_or(|b| b > probe.threshold) {
            return Ok(BreakdownReport { n, alpha, m_star: m, ratio: m as f64 / n as f64, bias_curve: curve });
        }
    }
    Err(Error::NoBreakdownDetected)
}

/// Reproducible regression sample from model 1 (`5x` plus standard normal noise).
pub fn synthetic_sample(n: usize, seed: u64) -> Result<PairedSample> {
    if n < 5 {
        return Err(Error::InvalidParameter(format!("synthetic samples need n >= 5, got {n}")));
    }
    Ok(RegressionScenario::example(1, n, seed)?.draw(0))
}
