//! Numerical checks for each of the seven routes to the χ² limit.
//!
//! Exact identities are compared to a floating tolerance and the limit
//! statements are exercised through seeded Monte Carlo with a
//! Kolmogorov–Smirnov distance. Every check produces a [`CheckResult`] so a
//! failing identity is reported rather than panicking.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub mod convergence;
pub mod induction;
pub mod ks;
pub mod poisson;
pub mod structural;
pub mod suites;

pub use convergence::{
    empirical_cf, run_convergence_suite, sample_conditioned_poisson, simulate_conditioned_poisson_statistics,
    simulate_statistics, ConvergenceConfig, ConvergenceReport,
};
pub use induction::{covariance_nullity_check, decompose_induction, InductionDecomposition};
pub use ks::{ks_distance, ks_threshold, ks_two_sample, ks_two_sample_threshold};
pub use poisson::{for_each_composition, poisson_conditioning_exact};
pub use structural::{structural_identity_suite, StructuralReport};
pub use suites::{run_all, run_suite, SuiteReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check is undefined for this input, e.g. an inverse of a singular matrix.
    DomainError,
}

/// One named measurement and its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    /// Passes when `value <= tolerance`. A NaN value fails.
    pub fn measured(name: &str, value: f64, tolerance: f64) -> Self {
        let status = if value <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
        Self {
            name: name.to_owned(),
            value: Some(value),
            tolerance: Some(tolerance),
            status,
            detail: None,
        }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self {
            name: name.to_owned(),
            value: None,
            tolerance: None,
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            detail: None,
        }
    }

    pub fn domain_error(name: &str, err: &Error) -> Self {
        Self {
            name: name.to_owned(),
            value: None,
            tolerance: None,
            status: CheckStatus::DomainError,
            detail: Some(err.to_string()),
        }
    }

    pub fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// Which suite to run. `Main` is the plain convergence run; `P1` to `P7`
/// follow the seven routes in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SuiteId {
    #[serde(rename = "P-main")]
    Main,
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
}

impl SuiteId {
    pub const ALL: [SuiteId; 8] = [
        SuiteId::Main,
        SuiteId::P1,
        SuiteId::P2,
        SuiteId::P3,
        SuiteId::P4,
        SuiteId::P5,
        SuiteId::P6,
        SuiteId::P7,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteId::Main => "P-main",
            SuiteId::P1 => "P1",
            SuiteId::P2 => "P2",
            SuiteId::P3 => "P3",
            SuiteId::P4 => "P4",
            SuiteId::P5 => "P5",
            SuiteId::P6 => "P6",
            SuiteId::P7 => "P7",
        }
    }

    pub fn is_monte_carlo(self) -> bool {
        matches!(self, SuiteId::Main | SuiteId::P4 | SuiteId::P7)
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        SuiteId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(t))
            .or_else(|| t.eq_ignore_ascii_case("main").then_some(SuiteId::Main))
            .ok_or_else(|| Error::Domain(format!("unknown suite {s:?}; expected P-main or P1..P7")))
    }
}
