//! Suite dispatch and the uniform report shape shared by every suite.

use std::collections::BTreeMap;

use serde::Serialize;

use super::convergence::{run_convergence_suite, ConvergenceConfig, ConvergenceReport};
use super::induction::{covariance_nullity_check, decompose_induction};
use super::structural::{names as s, structural_identity_suite, StructuralReport};
use super::{CheckResult, CheckStatus, SuiteId};
use crate::distributions::{sample_multinomial, Rng};
use crate::engine::{chi2_quadratic_form, chi2_statistic, chi2_whitened_norm};
use crate::error::Result;
use crate::tables::{CountVector, ProbVector};

/// Random probability vectors checked by each structural suite, besides the configured one.
pub const STRUCTURAL_INSTANCES: usize = 100;
pub const STRUCTURAL_MAX_K: usize = 10;
pub const INDUCTION_INSTANCES: usize = 1000;
/// Inclusive range of `k + 1` for the induction instances.
pub const INDUCTION_K_RANGE: (usize, usize) = (3, 8);
pub const INDUCTION_TOL: f64 = 1e-10;
pub const V_PATH_TOL: f64 = 1e-12;
/// Covariances must be below this times `n`.
pub const COVARIANCE_TOL: f64 = 1e-12;
pub const ROUTE_AGREEMENT_TOL: f64 = 1e-10;

// Streams used for instance generation, kept away from replication indices.
const STRUCTURAL_STREAM: u64 = 1 << 61;
const INDUCTION_STREAM: u64 = (1 << 61) + 1;

pub mod names {
    pub const QUADRATIC_FORM: &str = "quadratic_form_equals_statistic";
    pub const WHITENED_NORM: &str = "whitened_norm_equals_statistic";
    pub const INDUCTION_IDENTITY: &str = "induction_identity";
    pub const V_PATH: &str = "u_squared_equals_v_squared";
    pub const COVARIANCE: &str = "covariance_nullity";
}

/// The report emitted for any suite.
///
/// Structural and algebraic suites leave the Monte Carlo fields empty; for
/// them `passed` means every check passed. For Monte Carlo suites `passed`
/// is `ks_distance <= threshold` and the auxiliary checks sit in `checks`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteId,
    pub p: Vec<f64>,
    pub n: Option<u64>,
    pub replications: Option<usize>,
    pub seed: u64,
    pub ks_distance: Option<f64>,
    pub threshold: Option<f64>,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
}

impl SuiteReport {
    /// `passed` together with every auxiliary check.
    pub fn all_passed(&self) -> bool {
        self.passed && self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn algebraic(suite: SuiteId, cfg: &ConvergenceConfig, checks: Vec<CheckResult>) -> Self {
        Self {
            suite,
            p: cfg.p.as_slice().to_vec(),
            n: None,
            replications: None,
            seed: cfg.seed,
            ks_distance: None,
            threshold: None,
            passed: checks.iter().all(CheckResult::passed),
            checks,
            eigenvalues: None,
        }
    }
}

impl From<ConvergenceReport> for SuiteReport {
    fn from(r: ConvergenceReport) -> Self {
        Self {
            suite: r.suite,
            p: r.p,
            n: Some(r.n),
            replications: Some(r.replications),
            seed: r.seed,
            ks_distance: Some(r.ks_distance),
            threshold: Some(r.threshold),
            passed: r.passed,
            checks: r.checks,
            eigenvalues: None,
        }
    }
}

/// Strictly positive probability vector of length `k` with entries bounded
/// away from zero.
fn random_probs(rng: &mut Rng, k: usize) -> ProbVector {
    let w: Vec<f64> = (0..k).map(|_| 0.01 + rng.uniform()).collect();
    ProbVector::from_weights(&w).expect("weights are positive")
}

/// Keeps the worst outcome per check name, preserving first-seen order.
#[derive(Default)]
struct Worst {
    order: Vec<String>,
    by_name: BTreeMap<String, (CheckResult, usize)>,
}

impl Worst {
    fn add(&mut self, c: CheckResult) {
        let rank = |c: &CheckResult| match c.status {
            CheckStatus::Pass => 0,
            CheckStatus::Fail => 1,
            CheckStatus::DomainError => 2,
        };
        match self.by_name.get_mut(&c.name) {
            None => {
                self.order.push(c.name.clone());
                self.by_name.insert(c.name.clone(), (c, 1));
            }
            Some((cur, seen)) => {
                *seen += 1;
                let worse = rank(&c) > rank(cur)
                    || (rank(&c) == rank(cur) && c.value.unwrap_or(0.0) > cur.value.unwrap_or(0.0));
                if worse {
                    *cur = c;
                }
            }
        }
    }

    fn finish(mut self) -> Vec<CheckResult> {
        self.order
            .iter()
            .map(|name| {
                let (c, seen) = self.by_name.remove(name).expect("recorded");
                let note = format!("worst of {seen} instances");
                let detail = match c.detail.clone() {
                    Some(d) => format!("{note}; {d}"),
                    None => note,
                };
                c.with_detail(detail)
            })
            .collect()
    }
}

fn structural_names(suite: SuiteId) -> &'static [&'static str] {
    match suite {
        SuiteId::P1 => &[s::SM_PRODUCT, s::SM_EXPLICIT],
        SuiteId::P2 => &[s::COLUMN_SUMS, s::WHITENED, s::SYMMETRIC, s::ANNIHILATES],
        SuiteId::P3 => &[s::SPECTRUM, s::SYLVESTER],
        SuiteId::P5 => &[s::IDEMPOTENT, s::TRACE, s::SYMMETRIC],
        _ => &[],
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

fn structural_suite(suite: SuiteId, cfg: &ConvergenceConfig) -> Result<SuiteReport> {
    let wanted = structural_names(suite);
    let mut rng = Rng::substream(cfg.seed, STRUCTURAL_STREAM);
    let mut instances = vec![cfg.p.clone()];
    for _ in 0..STRUCTURAL_INSTANCES {
        let k = 2 + (rng.uniform() * (STRUCTURAL_MAX_K - 1) as f64) as usize;
        instances.push(random_probs(&mut rng, k.min(STRUCTURAL_MAX_K)));
    }

    let mut worst = Worst::default();
    let mut eigenvalues = None;
    for (i, p) in instances.iter().enumerate() {
        let report: StructuralReport = structural_identity_suite(p);
        if i == 0 && suite == SuiteId::P3 {
            eigenvalues = report.eigenvalues.clone();
        }
        for c in report.checks.into_iter().filter(|c| wanted.contains(&c.name.as_str())) {
            worst.add(c);
        }

        let route = match suite {
            SuiteId::P1 => Some((names::QUADRATIC_FORM, chi2_quadratic_form as fn(&_, &_) -> _)),
            SuiteId::P2 => Some((names::WHITENED_NORM, chi2_whitened_norm as fn(&_, &_) -> _)),
            _ => None,
        };
        if let Some((name, other)) = route {
            if !p.is_strictly_positive() {
                let err = p.require_strictly_positive(name).unwrap_err();
                worst.add(CheckResult::domain_error(name, &err));
                continue;
            }
            let counts = sample_multinomial(&mut rng, 1000, p);
            let direct = chi2_statistic(&counts, p)?;
            worst.add(CheckResult::measured(
                name,
                relative_gap(direct, other(&counts, p)?),
                ROUTE_AGREEMENT_TOL,
            ));
        }
    }

    let mut report = SuiteReport::algebraic(suite, cfg, worst.finish());
    report.eigenvalues = eigenvalues;
    Ok(report)
}

fn induction_suite(cfg: &ConvergenceConfig) -> Result<SuiteReport> {
    let mut rng = Rng::substream(cfg.seed, INDUCTION_STREAM);
    let (lo, hi) = INDUCTION_K_RANGE;
    let mut worst = Worst::default();
    let mut done = 0;
    while done < INDUCTION_INSTANCES {
        let len = lo + (rng.uniform() * (hi - lo + 1) as f64) as usize;
        let p = random_probs(&mut rng, len.min(hi));
        // counts unrelated to p: the identity is algebraic, not asymptotic
        let counts: Vec<u64> = (0..p.len()).map(|_| (rng.uniform() * 500.0) as u64).collect();
        if counts.iter().sum::<u64>() == 0 {
            continue;
        }
        let n = counts.iter().sum::<u64>();
        let d = decompose_induction(&CountVector::new(counts), &p)?;
        worst.add(CheckResult::measured(names::INDUCTION_IDENTITY, d.identity_error(), INDUCTION_TOL));
        worst.add(CheckResult::measured(names::V_PATH, d.v_path_error(), V_PATH_TOL));
        let cov = covariance_nullity_check(&p, n)?;
        worst.add(CheckResult::measured(names::COVARIANCE, cov / n as f64, COVARIANCE_TOL));
        done += 1;
    }
    if cfg.p.len() >= lo {
        match covariance_nullity_check(&cfg.p, cfg.n) {
            Ok(cov) => worst.add(CheckResult::measured(
                names::COVARIANCE,
                cov / cfg.n.max(1) as f64,
                COVARIANCE_TOL,
            )),
            Err(e) => worst.add(CheckResult::domain_error(names::COVARIANCE, &e)),
        }
    }
    Ok(SuiteReport::algebraic(SuiteId::P6, cfg, worst.finish()))
}

/// Runs one suite against `cfg`.
pub fn run_suite(suite: SuiteId, cfg: &ConvergenceConfig) -> Result<SuiteReport> {
    match suite {
        SuiteId::P1 | SuiteId::P2 | SuiteId::P3 | SuiteId::P5 => structural_suite(suite, cfg),
        SuiteId::P6 => induction_suite(cfg),
        SuiteId::Main | SuiteId::P4 | SuiteId::P7 => run_convergence_suite(suite, cfg).map(Into::into),
    }
}

/// Runs every suite in [`SuiteId::ALL`] order.
pub fn run_all(cfg: &ConvergenceConfig) -> Result<Vec<SuiteReport>> {
    SuiteId::ALL.iter().map(|&id| run_suite(id, cfg)).collect()
}
