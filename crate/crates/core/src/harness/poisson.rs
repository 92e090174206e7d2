//! Independent Poisson counts conditioned on their total are multinomial.

use crate::distributions::special::ln_factorial;
use crate::error::{domain, Result};
use crate::tables::ProbVector;

pub const MAX_ENUM_CATEGORIES: usize = 4;
pub const MAX_ENUM_TOTAL: u64 = 12;
pub const PMF_GAP_TOL: f64 = 1e-12;

fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * lambda.ln() - lambda - ln_factorial(k)).exp()
}

fn factorial(k: u64) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

fn multinomial_pmf(outcome: &[u64], p: &[f64]) -> f64 {
    let n: u64 = outcome.iter().sum();
    let mut v = factorial(n);
    for (&c, &pi) in outcome.iter().zip(p) {
        v *= pi.powi(c as i32) / factorial(c);
    }
    v
}

/// `P(V = outcome | Σ V = n)` for independent `V_i ~ Poisson(n p_i)`.
fn conditional_poisson_pmf(outcome: &[u64], p: &[f64]) -> f64 {
    let n: u64 = outcome.iter().sum();
    let nf = n as f64;
    let joint: f64 = outcome.iter().zip(p).map(|(&c, &pi)| poisson_pmf(c, nf * pi)).product();
    joint / poisson_pmf(n, nf)
}

/// Calls `f` on every composition of `n` into `k` nonnegative parts.
pub fn for_each_composition(n: u64, k: usize, mut f: impl FnMut(&[u64])) {
    fn rec(rest: u64, slot: usize, buf: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
        if slot + 1 == buf.len() {
            buf[slot] = rest;
            f(buf);
            return;
        }
        for v in 0..=rest {
            buf[slot] = v;
            rec(rest - v, slot + 1, buf, f);
        }
    }
    let mut buf = vec![0u64; k];
    rec(n, 0, &mut buf, &mut f);
}

/// Largest absolute gap between the conditioned-Poisson pmf and the
/// multinomial(n, p) pmf over all outcomes with total `n`.
pub fn poisson_conditioning_exact(p: &ProbVector, n: u64) -> Result<f64> {
    if p.len() > MAX_ENUM_CATEGORIES || n > MAX_ENUM_TOTAL {
        return domain(format!(
            "exact enumeration supports k <= {MAX_ENUM_CATEGORIES} and n <= {MAX_ENUM_TOTAL}"
        ));
    }
    let probs = p.as_slice();
    let mut gap = 0.0f64;
    for_each_composition(n, probs.len(), |o| {
        gap = gap.max((conditional_poisson_pmf(o, probs) - multinomial_pmf(o, probs)).abs());
    });
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_case() {
        let p = ProbVector::new(vec![0.4, 0.6]).unwrap();
        // Binomial(3, 0.4) pmf at 0..=3
        let binom = [0.216, 0.432, 0.288, 0.064];
        for (x, want) in binom.iter().enumerate() {
            let o = [x as u64, 3 - x as u64];
            assert!((conditional_poisson_pmf(&o, p.as_slice()) - want).abs() < 1e-14);
            assert!((multinomial_pmf(&o, p.as_slice()) - want).abs() < 1e-15);
        }
        assert!(poisson_conditioning_exact(&p, 3).unwrap() < 1e-14);
    }

    #[test]
    fn small_uniform_case() {
        let p = ProbVector::uniform(3).unwrap();
        let mut outcomes = 0;
        for_each_composition(2, 3, |_| outcomes += 1);
        assert_eq!(outcomes, 6);
        assert!(poisson_conditioning_exact(&p, 2).unwrap() < 1e-14);
    }

    #[test]
    fn empty_total() {
        let p = ProbVector::new(vec![0.3, 0.7]).unwrap();
        let mut seen = Vec::new();
        for_each_composition(0, 2, |o| seen.push(o.to_vec()));
        assert_eq!(seen, vec![vec![0, 0]]);
        assert_eq!(conditional_poisson_pmf(&[0, 0], p.as_slice()), 1.0);
        assert_eq!(poisson_conditioning_exact(&p, 0).unwrap(), 0.0);
    }

    #[test]
    fn conditional_pmf_sums_to_one() {
        let p = ProbVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut total = 0.0;
        for_each_composition(12, 4, |o| total += conditional_poisson_pmf(o, p.as_slice()));
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range() {
        assert!(poisson_conditioning_exact(&ProbVector::uniform(5).unwrap(), 3).is_err());
        assert!(poisson_conditioning_exact(&ProbVector::uniform(2).unwrap(), 13).is_err());
    }
}
