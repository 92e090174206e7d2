//! The battery of exact matrix identities behind the first, second, third
//! and fifth arguments.

use serde::Serialize;

use super::CheckResult;
use crate::linalg::{
    build_sigma, build_sigma_star, cochran_projection, explicit_sigma_star_inverse, sherman_morrison_inverse,
    shifted_projection_det, spectrum_check, sylvester_det, whitened_covariance, Matrix,
};
use crate::tables::ProbVector;

pub const STRUCTURAL_TOL: f64 = 1e-12;
pub const INVERSE_TOL: f64 = 1e-9;
pub const SPECTRUM_TOL: f64 = 1e-9;
pub const DET_REL_TOL: f64 = 1e-8;
pub const COLUMN_SUM_TOL: f64 = 1e-14;

/// Shifts at which the closed-form determinant is compared with LU.
pub const SYLVESTER_LAMBDAS: [f64; 3] = [0.3, 0.5, 2.0];

pub mod names {
    pub const COLUMN_SUMS: &str = "sigma_column_sums";
    pub const SM_PRODUCT: &str = "sherman_morrison_product";
    pub const SM_EXPLICIT: &str = "sherman_morrison_explicit_form";
    pub const WHITENED: &str = "whitened_equals_projection";
    pub const SYMMETRIC: &str = "projection_symmetric";
    pub const IDEMPOTENT: &str = "projection_idempotent";
    pub const ANNIHILATES: &str = "projection_annihilates_sqrt_p";
    pub const SPECTRUM: &str = "spectrum_zero_and_ones";
    pub const TRACE: &str = "trace_k_minus_1";
    pub const SYLVESTER: &str = "sylvester_vs_lu";
}

/// Per-check outcome of [`structural_identity_suite`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralReport {
    pub p: Vec<f64>,
    pub eigenvalues: Option<Vec<f64>>,
    pub checks: Vec<CheckResult>,
}

impl StructuralReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn identity_gap(m: &Matrix) -> f64 {
    m.max_abs_diff(&Matrix::identity(m.rows()))
}

/// Runs every structural identity for `p`. Checks that need `p > 0`
/// report [`super::CheckStatus::DomainError`] for vectors with a zero entry.
pub fn structural_identity_suite(p: &ProbVector) -> StructuralReport {
    let k = p.len();
    let mut checks = Vec::new();

    let sigma = build_sigma(p);
    let col = sigma.col_sums().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    checks.push(CheckResult::measured(names::COLUMN_SUMS, col, COLUMN_SUM_TOL));

    match sherman_morrison_inverse(p) {
        Ok(inv) => {
            let gap = identity_gap(&(&inv * &build_sigma_star(p)));
            checks.push(CheckResult::measured(names::SM_PRODUCT, gap, INVERSE_TOL));
            let explicit = explicit_sigma_star_inverse(p).expect("p is strictly positive here");
            let scale = explicit.row(0).iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let rel = inv.max_abs_diff(&explicit) / scale;
            checks.push(CheckResult::measured(names::SM_EXPLICIT, rel, STRUCTURAL_TOL));
        }
        Err(e) => {
            checks.push(CheckResult::domain_error(names::SM_PRODUCT, &e));
            checks.push(CheckResult::domain_error(names::SM_EXPLICIT, &e));
        }
    }

    let projection = cochran_projection(p);
    let omega = match whitened_covariance(p) {
        Ok(w) => {
            checks.push(CheckResult::measured(
                names::WHITENED,
                w.max_abs_diff(&projection),
                STRUCTURAL_TOL,
            ));
            w
        }
        Err(e) => {
            checks.push(CheckResult::domain_error(names::WHITENED, &e));
            projection.clone()
        }
    };

    checks.push(CheckResult::measured(names::SYMMETRIC, projection.asymmetry(), STRUCTURAL_TOL));
    checks.push(CheckResult::measured(
        names::IDEMPOTENT,
        (&projection * &projection).max_abs_diff(&projection),
        STRUCTURAL_TOL,
    ));
    let killed = projection
        .mul_vec(&p.sqrt_embed())
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    checks.push(CheckResult::measured(names::ANNIHILATES, killed, STRUCTURAL_TOL));

    let mut eigenvalues = None;
    match spectrum_check(&omega) {
        Ok(sp) => {
            let expected = std::iter::once(0.0).chain(std::iter::repeat(1.0).take(k - 1));
            let gap = sp
                .eigenvalues
                .iter()
                .zip(expected)
                .fold(0.0f64, |m, (got, want)| m.max((got - want).abs()));
            checks.push(
                CheckResult::measured(names::SPECTRUM, gap, SPECTRUM_TOL)
                    .with_detail(format!("eigenvalues {:?}", sp.eigenvalues)),
            );
            checks.push(CheckResult::measured(
                names::TRACE,
                (sp.trace - (k as f64 - 1.0)).abs(),
                STRUCTURAL_TOL,
            ));
            eigenvalues = Some(sp.eigenvalues);
        }
        Err(e) => {
            checks.push(CheckResult::domain_error(names::SPECTRUM, &e));
            checks.push(CheckResult::domain_error(names::TRACE, &e));
        }
    }

    let worst = SYLVESTER_LAMBDAS
        .iter()
        .map(|&l| {
            let closed = sylvester_det(p, l);
            ((closed - shifted_projection_det(p, l)) / closed).abs()
        })
        .fold(0.0f64, f64::max);
    checks.push(CheckResult::measured(names::SYLVESTER, worst, DET_REL_TOL));

    StructuralReport {
        p: p.as_slice().to_vec(),
        eigenvalues,
        checks,
    }
}
