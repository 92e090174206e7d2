//! The merge-two-categories recursion `Q_{k+1} = Q'_k + U²` and the null
//! covariance between the merged counts and `L`.

use serde::Serialize;

use crate::engine::chi2_statistic;
use crate::error::{domain, Result};
use crate::linalg::build_sigma;
use crate::tables::{CountVector, ProbVector};

/// `Q_{k+1}` split into the statistic on the merged categories and the
/// one-degree-of-freedom remainder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InductionDecomposition {
    pub q_k_plus_1: f64,
    pub q_prime_k: f64,
    pub u_squared: f64,
    /// `V = (p_{k+1} N_k - p_k N_{k+1}) / √(n p_k p_{k+1} (p_k + p_{k+1}))`.
    pub v: f64,
    pub merged_counts: CountVector,
    pub merged_probs: ProbVector,
}

impl InductionDecomposition {
    /// `|Q_{k+1} - (Q'_k + U²)|` relative to `max(1, Q_{k+1})`.
    pub fn identity_error(&self) -> f64 {
        (self.q_k_plus_1 - (self.q_prime_k + self.u_squared)).abs() / self.q_k_plus_1.max(1.0)
    }

    /// `|U² - V²|` relative to `max(1, Q_{k+1})`.
    pub fn v_path_error(&self) -> f64 {
        (self.u_squared - self.v * self.v).abs() / self.q_k_plus_1.max(1.0)
    }
}

fn pearson_term(obs: f64, expected: f64) -> f64 {
    let d = obs - expected;
    d * d / expected
}

/// Merges the last two categories and decomposes the statistic.
///
/// `U²` is evaluated as the difference of the two unmerged Pearson terms and
/// the merged one; `V` is computed independently from the counts.
pub fn decompose_induction(counts: &CountVector, p: &ProbVector) -> Result<InductionDecomposition> {
    let len = p.len();
    if len < 3 {
        return domain(format!("the recursion needs at least 3 categories, got {len}"));
    }
    if counts.len() != len {
        return domain(format!("{} counts but {len} probabilities", counts.len()));
    }
    p.require_strictly_positive("the induction decomposition")?;

    let q_k_plus_1 = chi2_statistic(counts, p)?;

    let c = counts.counts();
    let pr = p.as_slice();
    let (a, b) = (len - 2, len - 1);
    let mut merged = c[..a].to_vec();
    merged.push(c[a] + c[b]);
    let merged_counts = CountVector::new(merged);
    let mut mp = pr[..a].to_vec();
    mp.push(pr[a] + pr[b]);
    let merged_probs = ProbVector::new(mp)?;
    let q_prime_k = chi2_statistic(&merged_counts, &merged_probs)?;

    let n = counts.total() as f64;
    let (na, nb) = (c[a] as f64, c[b] as f64);
    let (pa, pb) = (pr[a], pr[b]);
    let u_squared = (pearson_term(na, n * pa) + pearson_term(nb, n * pb)
        - pearson_term(na + nb, n * (pa + pb)))
    .max(0.0);
    let v = (pb * na - pa * nb) / (n * pa * pb * (pa + pb)).sqrt();

    Ok(InductionDecomposition {
        q_k_plus_1,
        q_prime_k,
        u_squared,
        v,
        merged_counts,
        merged_probs,
    })
}

/// Largest `|Cov(·, L)|` over the merged coordinates, where
/// `L = p_{k+1} N_k - p_k N_{k+1}` and the covariances come from the
/// multinomial(n, p) covariance `n (diag(p) - p pᵀ)`.
///
/// Covers `Cov(N_j, L)` for each unmerged `j` and `Cov(N_k + N_{k+1}, L)`.
/// Individually `Cov(N_k, L) = n p_k p_{k+1} = -Cov(N_{k+1}, L)`; only
/// their sum vanishes.
pub fn covariance_nullity_check(p: &ProbVector, n: u64) -> Result<f64> {
    let len = p.len();
    if len < 3 {
        return domain(format!("the recursion needs at least 3 categories, got {len}"));
    }
    p.require_strictly_positive("the covariance check")?;
    let cov = build_sigma(p).scale(n as f64);
    let pr = p.as_slice();
    let (a, b) = (len - 2, len - 1);
    let mut l = vec![0.0; len];
    l[a] = pr[b];
    l[b] = -pr[a];
    let cov_l = cov.mul_vec(&l);
    let merged = cov_l[a] + cov_l[b];
    Ok(cov_l[..a]
        .iter()
        .chain(std::iter::once(&merged))
        .fold(0.0f64, |m, v| m.max(v.abs())))
}
