//! Pearson's statistic and the goodness-of-fit and independence tests.

use serde::Serialize;

use crate::distributions::ChiSquared;
use crate::error::{domain, Error, Result};
use crate::linalg::{sherman_morrison_inverse, Matrix};
use crate::tables::{ContingencyTable, CountVector, ProbVector};

/// Expected counts below this trigger a small-sample warning.
pub const SMALL_EXPECTED: f64 = 5.0;

/// Outcome of a chi-squared test at level `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub dof: u32,
    pub p_value: f64,
    pub alpha: f64,
    pub reject_null: bool,
}

impl TestResult {
    fn new(statistic: f64, dof: u32, alpha: f64) -> Result<Self> {
        let p_value = ChiSquared::new(dof)?.sf(statistic);
        Ok(Self {
            statistic,
            dof,
            p_value,
            alpha,
            reject_null: p_value < alpha,
        })
    }

    /// Critical value `chi2_quantile(dof, 1 - alpha)`.
    pub fn critical_value(&self) -> f64 {
        ChiSquared::new(self.dof)
            .and_then(|d| d.quantile(1.0 - self.alpha))
            .expect("dof and alpha validated at construction")
    }
}

/// Expected counts and Pearson residuals `(O - E) / √E` of a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualTable {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub expected: Vec<f64>,
    /// Row-major.
    pub residuals: Vec<f64>,
}

impl ResidualTable {
    pub fn expected(&self, row: usize, col: usize) -> f64 {
        self.expected[row * self.cols + col]
    }

    pub fn residual(&self, row: usize, col: usize) -> f64 {
        self.residuals[row * self.cols + col]
    }

    pub fn min_expected(&self) -> f64 {
        self.expected.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// A warning when some expected count is below 5, where the chi-squared
    /// approximation is unreliable.
    pub fn small_sample_warning(&self) -> Option<String> {
        let small = self.expected.iter().filter(|&&e| e < SMALL_EXPECTED).count();
        (small > 0).then(|| {
            format!(
                "{small} cell(s) have expected count below {SMALL_EXPECTED} (minimum {:.3}); \
                 the chi-squared approximation may be poor",
                self.min_expected()
            )
        })
    }

    /// Residuals as a list of rows.
    pub fn residual_rows(&self) -> Vec<Vec<f64>> {
        self.residuals.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("significance level {alpha} outside (0, 1)"))
    }
}

fn check_gof_inputs(counts: &CountVector, p: &ProbVector) -> Result<()> {
    if counts.len() != p.len() {
        return domain(format!(
            "{} counts but {} probabilities",
            counts.len(),
            p.len()
        ));
    }
    p.require_strictly_positive("the chi-squared statistic")?;
    if counts.total() == 0 {
        return domain("the chi-squared statistic needs n >= 1");
    }
    Ok(())
}

/// `Σ_j (N_j - n p_j)^2 / (n p_j)`.
pub fn chi2_statistic(counts: &CountVector, p: &ProbVector) -> Result<f64> {
    check_gof_inputs(counts, p)?;
    let n = counts.total() as f64;
    Ok(counts
        .counts()
        .iter()
        .zip(p.as_slice())
        .map(|(&obs, &pj)| {
            let e = n * pj;
            let d = obs as f64 - e;
            d * d / e
        })
        .sum())
}

/// The statistic as the quadratic form `n (x̄* - p*)ᵀ (Σ*)⁻¹ (x̄* - p*)` on
/// the first `k - 1` coordinates, with the Sherman–Morrison inverse.
pub fn chi2_quadratic_form(counts: &CountVector, p: &ProbVector) -> Result<f64> {
    check_gof_inputs(counts, p)?;
    let inv = sherman_morrison_inverse(p)?;
    let k = p.len() - 1;
    let diff: Vec<f64> = counts
        .proportions()
        .iter()
        .zip(p.as_slice())
        .take(k)
        .map(|(x, pj)| x - pj)
        .collect();
    Ok(counts.total() as f64 * inv.quadratic_form(&diff))
}

/// The statistic as `‖√n Γ^{-1/2} (x̄ - p)‖²` with `Γ = diag(p)`.
pub fn chi2_whitened_norm(counts: &CountVector, p: &ProbVector) -> Result<f64> {
    check_gof_inputs(counts, p)?;
    let n = counts.total() as f64;
    let g = Matrix::diag(&p.as_slice().iter().map(|v| 1.0 / v.sqrt()).collect::<Vec<_>>());
    let diff: Vec<f64> = counts
        .proportions()
        .iter()
        .zip(p.as_slice())
        .map(|(x, pj)| n.sqrt() * (x - pj))
        .collect();
    Ok(g.mul_vec(&diff).iter().map(|a| a * a).sum())
}

/// Goodness-of-fit test against a fully specified `p`; `dof = k - 1`.
pub fn goodness_of_fit_test(counts: &CountVector, p: &ProbVector, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let stat = chi2_statistic(counts, p)?;
    TestResult::new(stat, (p.len() - 1) as u32, alpha)
}

/// Expected counts `E_ij = row_i col_j / N` and Pearson residuals.
pub fn residual_table(t: &ContingencyTable) -> Result<ResidualTable> {
    let m = t.margins();
    if let Some(i) = m.row_totals.iter().position(|&v| v == 0) {
        return Err(Error::DegenerateMargin(format!(
            "row {:?} has total 0",
            t.row_labels()[i]
        )));
    }
    if let Some(j) = m.col_totals.iter().position(|&v| v == 0) {
        return Err(Error::DegenerateMargin(format!(
            "column {:?} has total 0",
            t.col_labels()[j]
        )));
    }
    let (r, c) = t.shape();
    let total = m.grand_total as f64;
    let mut expected = Vec::with_capacity(r * c);
    let mut residuals = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            let e = m.row_totals[i] as f64 * m.col_totals[j] as f64 / total;
            expected.push(e);
            residuals.push((t.get(i, j) as f64 - e) / e.sqrt());
        }
    }
    Ok(ResidualTable {
        rows: r,
        cols: c,
        expected,
        residuals,
    })
}

/// Pearson's test of independence for a two-way table;
/// `dof = (r - 1)(c - 1)`, no continuity correction.
pub fn independence_test(t: &ContingencyTable, alpha: f64) -> Result<(TestResult, ResidualTable)> {
    check_alpha(alpha)?;
    let residuals = residual_table(t)?;
    let statistic = residuals.residuals.iter().map(|z| z * z).sum();
    let (r, c) = t.shape();
    let result = TestResult::new(statistic, ((r - 1) * (c - 1)) as u32, alpha)?;
    Ok((result, residuals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample_multinomial, Rng};
    use crate::tables::parse_table;
    use proptest::prelude::*;

    fn cv(c: &[u64]) -> CountVector {
        CountVector::new(c.to_vec())
    }

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn statistic_examples() {
        let q = pv(&[0.25; 4]);
        assert_eq!(chi2_statistic(&cv(&[50, 50, 50, 50]), &q).unwrap(), 0.0);
        // (37.5² + 3·12.5²)/62.5
        assert!((chi2_statistic(&cv(&[100, 50, 50, 50]), &q).unwrap() - 30.0).abs() < 1e-12);
        assert!((chi2_statistic(&cv(&[60, 40]), &pv(&[0.5, 0.5])).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn statistic_errors() {
        assert!(chi2_statistic(&cv(&[1, 2]), &pv(&[1.0, 0.0])).is_err());
        assert!(chi2_statistic(&cv(&[1, 2, 3]), &pv(&[0.5, 0.5])).is_err());
        assert!(chi2_statistic(&cv(&[0, 0]), &pv(&[0.5, 0.5])).is_err());
        assert!(goodness_of_fit_test(&cv(&[1, 2]), &pv(&[0.5, 0.5]), 1.0).is_err());
    }

    #[test]
    fn goodness_of_fit_examples() {
        let half = pv(&[0.5, 0.5]);
        let r = goodness_of_fit_test(&cv(&[50, 50]), &half, 0.05).unwrap();
        assert_eq!((r.statistic, r.p_value, r.reject_null, r.dof), (0.0, 1.0, false, 1));

        let r = goodness_of_fit_test(&cv(&[60, 40]), &half, 0.05).unwrap();
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert!(r.statistic > 3.8415 && r.reject_null);

        let r = goodness_of_fit_test(&cv(&[59, 41]), &half, 0.05).unwrap();
        assert!((r.statistic - 3.24).abs() < 1e-12);
        assert!(r.statistic < 3.8415 && !r.reject_null);
    }

    #[test]
    fn independence_case_tables() {
        let run = |csv: &str| independence_test(&parse_table(csv).unwrap(), 0.05).unwrap();
        let (r, _) = run(",C,D\nA,50,50\nB,50,50");
        assert_eq!((r.statistic, r.reject_null), (0.0, false));

        let (r, res) = run(",C,D\nA,75,50\nB,50,50");
        let want_e = [125.0 * 125.0 / 225.0, 125.0 * 100.0 / 225.0, 125.0 * 100.0 / 225.0, 100.0 * 100.0 / 225.0];
        for (got, want) in res.expected.iter().zip(want_e) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((r.statistic - 2.25).abs() < 1e-9);
        assert!(!r.reject_null);
        assert_eq!(r.dof, 1);

        let (r, _) = run(",C,D\nA,100,50\nB,50,50");
        // N (ad - bc)² / (r1 r2 c1 c2) = 250·2500² / (150²·100²)
        assert!((r.statistic - 250.0 * 2500.0f64.powi(2) / (150.0f64.powi(2) * 100.0f64.powi(2))).abs() < 1e-9);
        assert!(r.reject_null);

        let (r, _) = run(",C,D\nA,200,50\nB,50,50");
        assert!((r.statistic - 31.5).abs() < 1e-9);
        assert!(r.reject_null);
    }

    #[test]
    fn degenerate_margin() {
        let t = parse_table(",C,D\nA,0,0\nB,3,4").unwrap();
        assert!(matches!(independence_test(&t, 0.05), Err(Error::DegenerateMargin(_))));
        let t = parse_table(",C,D\nA,0,5\nB,0,4").unwrap();
        assert!(matches!(independence_test(&t, 0.05), Err(Error::DegenerateMargin(_))));
    }

    #[test]
    fn small_expected_counts_warn() {
        let t = parse_table(",C,D\nA,1,3\nB,2,8").unwrap();
        let (_, res) = independence_test(&t, 0.05).unwrap();
        assert!(res.small_sample_warning().is_some());
        let t = parse_table(",C,D\nA,50,50\nB,50,50").unwrap();
        assert!(independence_test(&t, 0.05).unwrap().1.small_sample_warning().is_none());
    }

    #[test]
    fn decision_matches_critical_value() {
        let half = pv(&[0.5, 0.5]);
        for a in 30..=70u64 {
            let r = goodness_of_fit_test(&cv(&[a, 100 - a]), &half, 0.05).unwrap();
            assert_eq!(r.reject_null, r.statistic > r.critical_value(), "a={a}");
        }
    }

    #[test]
    fn two_by_two_independence_vs_flattened_goodness_of_fit() {
        let t = parse_table(",C,D\nA,100,50\nB,50,50").unwrap();
        let (ind, _) = independence_test(&t, 0.05).unwrap();
        let m = t.margins();
        let n = m.grand_total as f64;
        let outer: Vec<f64> = m
            .row_totals
            .iter()
            .flat_map(|&r| m.col_totals.iter().map(move |&c| r as f64 * c as f64 / (n * n)))
            .collect();
        let gof = goodness_of_fit_test(&t.flatten(), &ProbVector::new(outer).unwrap(), 0.05).unwrap();
        assert!((ind.statistic - gof.statistic).abs() < 1e-10);
        assert_eq!((ind.dof, gof.dof), (1, 3));
    }

    fn random_instance(seed: u64) -> (CountVector, ProbVector) {
        let mut rng = Rng::new(seed);
        let k = 2 + (rng.uniform() * 8.0) as usize;
        let w: Vec<f64> = (0..k).map(|_| 0.02 + rng.uniform()).collect();
        let p = ProbVector::from_weights(&w).unwrap();
        let n = 1 + (rng.uniform() * 5000.0) as u64;
        (sample_multinomial(&mut rng, n, &p), p)
    }

    proptest! {
        #[test]
        fn three_routes_to_the_statistic_agree(seed in any::<u64>()) {
            let (counts, p) = random_instance(seed);
            let direct = chi2_statistic(&counts, &p).unwrap();
            let quad = chi2_quadratic_form(&counts, &p).unwrap();
            let white = chi2_whitened_norm(&counts, &p).unwrap();
            let scale = direct.max(1e-300);
            prop_assert!((quad - direct).abs() <= 1e-10 * scale.max(1.0));
            prop_assert!((white - direct).abs() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn permutation_invariance(seed in any::<u64>(), rot in 0usize..10) {
            let (counts, p) = random_instance(seed);
            let k = p.len();
            let perm: Vec<usize> = (0..k).map(|i| (i + rot) % k).rev().collect();
            let a = chi2_statistic(&counts, &p).unwrap();
            let b = chi2_statistic(&counts.permuted(&perm).unwrap(), &p.permuted(&perm).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn transpose_invariance(cells in proptest::collection::vec(1u64..500, 6)) {
            let t = ContingencyTable::from_counts(vec![cells[..3].to_vec(), cells[3..].to_vec()]).unwrap();
            let (a, _) = independence_test(&t, 0.05).unwrap();
            let (b, _) = independence_test(&t.transpose(), 0.05).unwrap();
            prop_assert!((a.statistic - b.statistic).abs() <= 1e-12 * a.statistic.max(1.0));
            prop_assert_eq!(a.dof, b.dof);
            prop_assert!((a.p_value - b.p_value).abs() <= 1e-12);
        }
    }
}
