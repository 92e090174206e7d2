//! Monte Carlo checks that the statistic is distributed as χ²(k - 1).

use serde::Serialize;

use super::ks::{ks_distance, ks_threshold, ks_two_sample, ks_two_sample_threshold};
use super::poisson::{poisson_conditioning_exact, MAX_ENUM_CATEGORIES, MAX_ENUM_TOTAL, PMF_GAP_TOL};
use super::{CheckResult, SuiteId};
use crate::distributions::{chi2_cf, sample_multinomial, sample_poisson, ChiSquared, Complex, Rng};
use crate::engine::chi2_statistic;
use crate::error::{domain, Error, Result};
use crate::tables::{CountVector, ProbVector};

pub const MIN_SAMPLE_SIZE: u64 = 100;
pub const MIN_REPLICATIONS: usize = 1000;
/// Points at which empirical and limiting characteristic functions are compared.
pub const CF_POINTS: [f64; 3] = [0.1, 0.25, 0.5];
pub const CF_TOL: f64 = 0.02;
/// Moment checks allow this many standard errors.
pub const MOMENT_SE: f64 = 5.0;
/// Consecutive rejections after which conditioned sampling gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: u64 = 1_000_000;
/// Conditioned-Poisson replications draw from streams offset by this much so
/// they never share a stream with the multinomial replications.
const POISSON_STREAM_OFFSET: u64 = 1 << 62;

/// Parameters of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub p: ProbVector,
    pub n: u64,
    pub replications: usize,
    pub seed: u64,
}

impl ConvergenceConfig {
    pub const DEFAULT_N: u64 = 2000;
    pub const DEFAULT_REPLICATIONS: usize = 20_000;
    pub const DEFAULT_SEED: u64 = 42;

    pub fn new(p: ProbVector) -> Self {
        Self {
            p,
            n: Self::DEFAULT_N,
            replications: Self::DEFAULT_REPLICATIONS,
            seed: Self::DEFAULT_SEED,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < MIN_SAMPLE_SIZE {
            return domain(format!("sample size must be >= {MIN_SAMPLE_SIZE}, got {}", self.n));
        }
        if self.replications < MIN_REPLICATIONS {
            return domain(format!(
                "replications must be >= {MIN_REPLICATIONS}, got {}",
                self.replications
            ));
        }
        self.p.require_strictly_positive("the convergence suites")
    }

    fn dof(&self) -> u32 {
        (self.p.len() - 1) as u32
    }
}

/// Outcome of a Monte Carlo convergence run.
///
/// `passed` records only `ks_distance <= threshold`; the auxiliary `checks`
/// (moments, characteristic function, exact pmf identities) are reported
/// alongside and folded in by [`ConvergenceReport::all_passed`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub suite: SuiteId,
    pub p: Vec<f64>,
    pub n: u64,
    pub replications: usize,
    pub seed: u64,
    pub ks_distance: f64,
    pub threshold: f64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl ConvergenceReport {
    pub fn all_passed(&self) -> bool {
        self.passed && self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Sorted statistics of `replications` multinomial(n, p) samples.
///
/// Replication `r` uses substream `r` of `seed`, so the result does not
/// depend on evaluation order.
pub fn simulate_statistics(cfg: &ConvergenceConfig) -> Result<Vec<f64>> {
    let mut stats = (0..cfg.replications as u64)
        .map(|r| {
            let mut rng = Rng::substream(cfg.seed, r);
            chi2_statistic(&sample_multinomial(&mut rng, cfg.n, &cfg.p), &cfg.p)
        })
        .collect::<Result<Vec<_>>>()?;
    stats.sort_by(f64::total_cmp);
    Ok(stats)
}

/// Draws independent `Poisson(n p_i)` counts until their total is exactly `n`.
pub fn sample_conditioned_poisson(rng: &mut Rng, n: u64, p: &ProbVector) -> Result<CountVector> {
    let means: Vec<f64> = p.as_slice().iter().map(|pi| n as f64 * pi).collect();
    for _ in 0..MAX_CONSECUTIVE_REJECTIONS {
        let counts = means
            .iter()
            .map(|&m| sample_poisson(rng, m))
            .collect::<Result<Vec<u64>>>()?;
        if counts.iter().sum::<u64>() == n {
            return Ok(CountVector::new(counts));
        }
    }
    Err(Error::Sampling(format!(
        "{MAX_CONSECUTIVE_REJECTIONS} consecutive Poisson totals differed from n = {n}"
    )))
}

/// Sorted statistics of conditioned-Poisson samples.
pub fn simulate_conditioned_poisson_statistics(cfg: &ConvergenceConfig) -> Result<Vec<f64>> {
    let mut stats = (0..cfg.replications as u64)
        .map(|r| {
            let mut rng = Rng::substream(cfg.seed, POISSON_STREAM_OFFSET + r);
            chi2_statistic(&sample_conditioned_poisson(&mut rng, cfg.n, &cfg.p)?, &cfg.p)
        })
        .collect::<Result<Vec<_>>>()?;
    stats.sort_by(f64::total_cmp);
    Ok(stats)
}

pub mod names {
    pub const MEAN: &str = "mean_within_5_se";
    pub const VARIANCE: &str = "variance_within_5_se";
    pub const CF_PREFIX: &str = "cf_modulus_error_t=";
    pub const PMF_GAP: &str = "poisson_conditioning_pmf_gap";
}

fn moment_checks(stats: &[f64], dof: u32) -> Vec<CheckResult> {
    let m = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / m;
    let central = |pow: i32| stats.iter().map(|x| (x - mean).powi(pow)).sum::<f64>() / m;
    let var = central(2) * m / (m - 1.0);
    let m4 = central(4);
    let mean_se = (var / m).sqrt();
    let var_se = ((m4 - var * var).max(0.0) / m).sqrt();
    let k1 = f64::from(dof);
    vec![
        CheckResult::measured(names::MEAN, (mean - k1).abs() / mean_se, MOMENT_SE)
            .with_detail(format!("mean {mean:.6}, target {k1}, se {mean_se:.3e}")),
        CheckResult::measured(names::VARIANCE, (var - 2.0 * k1).abs() / var_se, MOMENT_SE)
            .with_detail(format!("variance {var:.6}, target {}, se {var_se:.3e}", 2.0 * k1)),
    ]
}

/// `(1/m) Σ e^{i t x}` over the sample.
pub fn empirical_cf(stats: &[f64], t: f64) -> Complex {
    let sum = stats
        .iter()
        .fold(Complex::new(0.0, 0.0), |acc, &x| acc + Complex::from_polar(1.0, t * x));
    sum / stats.len() as f64
}

fn cf_checks(stats: &[f64], dof: u32) -> Vec<CheckResult> {
    CF_POINTS
        .iter()
        .map(|&t| {
            let err = (empirical_cf(stats, t) - chi2_cf(dof, t)).norm();
            CheckResult::measured(&format!("{}{t}", names::CF_PREFIX), err, CF_TOL)
        })
        .collect()
}

fn exact_pmf_check(p: &ProbVector) -> Result<CheckResult> {
    let third = 1.0 / 3.0;
    let mut cases = vec![
        ProbVector::new(vec![0.4, 0.6])?,
        ProbVector::new(vec![third; 3])?,
        ProbVector::new(vec![0.7, 0.2, 0.1])?,
        ProbVector::new(vec![0.1, 0.2, 0.3, 0.4])?,
    ];
    if p.len() <= MAX_ENUM_CATEGORIES {
        cases.push(p.clone());
    }
    let mut gap = 0.0f64;
    for case in &cases {
        for n in 0..=MAX_ENUM_TOTAL {
            gap = gap.max(poisson_conditioning_exact(case, n)?);
        }
    }
    Ok(CheckResult::measured(names::PMF_GAP, gap, PMF_GAP_TOL)
        .with_detail(format!("{} probability vectors, n = 0..={MAX_ENUM_TOTAL}", cases.len())))
}

/// Runs one of the Monte Carlo suites: [`SuiteId::Main`] (KS distance to
/// χ²(k-1) plus moments), [`SuiteId::P4`] (adds the characteristic-function
/// comparison) or [`SuiteId::P7`] (conditioned-Poisson statistics against
/// multinomial ones, plus the exact pmf identity).
pub fn run_convergence_suite(suite: SuiteId, cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let dof = cfg.dof();
    let chi2 = ChiSquared::new(dof)?;
    let stats = simulate_statistics(cfg)?;

    let (ks, threshold, checks) = match suite {
        SuiteId::Main => {
            let ks = ks_distance(&stats, |x| chi2.cdf(x));
            (ks, ks_threshold(cfg.replications), moment_checks(&stats, dof))
        }
        SuiteId::P4 => {
            let ks = ks_distance(&stats, |x| chi2.cdf(x));
            let mut checks = cf_checks(&stats, dof);
            checks.extend(moment_checks(&stats, dof));
            (ks, ks_threshold(cfg.replications), checks)
        }
        SuiteId::P7 => {
            let poisson = simulate_conditioned_poisson_statistics(cfg)?;
            let ks = ks_two_sample(&poisson, &stats);
            let threshold = ks_two_sample_threshold(poisson.len(), stats.len());
            let mut checks = vec![exact_pmf_check(&cfg.p)?];
            // moments of the conditioned-Poisson statistics
            checks.extend(moment_checks(&poisson, dof));
            (ks, threshold, checks)
        }
        other => return domain(format!("{other} is not a Monte Carlo suite")),
    };

    Ok(ConvergenceReport {
        suite,
        p: cfg.p.as_slice().to_vec(),
        n: cfg.n,
        replications: cfg.replications,
        seed: cfg.seed,
        ks_distance: ks,
        threshold,
        passed: ks <= threshold,
        checks,
    })
}
