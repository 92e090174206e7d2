use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use super::special::ln_factorial;
use crate::error::{domain, Result};
use crate::tables::{CountVector, ProbVector};

/// Seeded, deterministic random number generator.
///
/// Backed by ChaCha8. A master seed plus a 64-bit stream index selects an
/// independent, non-overlapping substream, so Monte Carlo replications can be
/// generated in any order and still reproduce bit for bit.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Substream `stream` of the generator seeded with `seed`.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// One Binomial(n, p) draw (inversion for small `n p`, BTPE otherwise).
pub fn sample_binomial(rng: &mut Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("p checked to lie in (0, 1)")
        .sample(rng)
}

/// Multinomial(n, p) counts via `k - 1` sequential conditional binomials.
///
/// Category `i` is drawn from the trials still unassigned with probability
/// `p_i / (p_i + ... + p_k)`; the last category takes the remainder.
pub fn sample_multinomial(rng: &mut Rng, n: u64, p: &ProbVector) -> CountVector {
    let probs = p.as_slice();
    let k = probs.len();
    let mut counts = vec![0u64; k];
    let mut remaining = n;
    let mut mass_left = 1.0f64;
    for i in 0..k - 1 {
        if remaining == 0 {
            break;
        }
        let pi = probs[i];
        if pi > 0.0 {
            let cond = if mass_left > 0.0 { (pi / mass_left).min(1.0) } else { 1.0 };
            let draw = sample_binomial(rng, remaining, cond);
            counts[i] = draw;
            remaining -= draw;
        }
        mass_left -= pi;
    }
    if probs[k - 1] > 0.0 {
        counts[k - 1] = remaining;
    } else if remaining > 0 {
        // rounding left mass on an earlier category; give it to the last
        // positive one so zero-probability cells stay empty
        let last = probs.iter().rposition(|&v| v > 0.0).expect("some entry is positive");
        counts[last] += remaining;
    }
    CountVector::new(counts)
}

const INVERSION_LIMIT: f64 = 30.0;

/// One Poisson(lambda) draw.
///
/// Sequential-search inversion for `lambda < 30`, Hörmann's PTRS
/// transformed rejection otherwise.
pub fn sample_poisson(rng: &mut Rng, lambda: f64) -> Result<u64> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return domain(format!("Poisson mean must be finite and >= 0, got {lambda}"));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    if lambda < INVERSION_LIMIT {
        Ok(poisson_inversion(rng, lambda))
    } else {
        Ok(poisson_ptrs(rng, lambda))
    }
}

fn poisson_inversion(rng: &mut Rng, lambda: f64) -> u64 {
    let p0 = (-lambda).exp();
    loop {
        let u = rng.uniform();
        let mut x = 0u64;
        let mut p = p0;
        let mut cdf = p0;
        while u > cdf {
            x += 1;
            p *= lambda / x as f64;
            cdf += p;
            if p < f64::MIN_POSITIVE && x as f64 > lambda {
                break;
            }
        }
        if u <= cdf {
            return x;
        }
        // u fell into the rounding gap above the accumulated cdf; redraw
    }
}

fn poisson_ptrs(rng: &mut Rng, lambda: f64) -> u64 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.024_83 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.uniform() - 0.5;
        let v = rng.uniform();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -lambda + k * loglam - ln_factorial(k as u64);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_deterministic_and_distinct() {
        let mut a = Rng::substream(42, 7);
        let mut b = Rng::substream(42, 7);
        let mut c = Rng::substream(42, 8);
        let xs: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..16).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
        let p = ProbVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let mut r1 = Rng::new(9);
        let mut r2 = Rng::new(9);
        for _ in 0..50 {
            assert_eq!(sample_multinomial(&mut r1, 1000, &p), sample_multinomial(&mut r2, 1000, &p));
            assert_eq!(sample_poisson(&mut r1, 44.0).unwrap(), sample_poisson(&mut r2, 44.0).unwrap());
        }
    }

    #[test]
    fn multinomial_edge_cases() {
        let mut rng = Rng::new(1);
        let p = ProbVector::new(vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(sample_multinomial(&mut rng, 0, &p).counts(), [0, 0, 0]);
        let degenerate = ProbVector::new(vec![1.0, 0.0]).unwrap();
        for n in [0, 1, 17, 100_000] {
            assert_eq!(sample_multinomial(&mut rng, n, &degenerate).counts(), [n, 0]);
        }
        let holes = ProbVector::new(vec![0.0, 0.6, 0.0, 0.4, 0.0]).unwrap();
        for _ in 0..100 {
            let c = sample_multinomial(&mut rng, 500, &holes);
            assert_eq!(c.total(), 500);
            assert_eq!((c.counts()[0], c.counts()[2], c.counts()[4]), (0, 0, 0));
        }
    }

    #[test]
    fn multinomial_mean_within_clt_bound() {
        // mean of counts[0]/n over 200 replications; sd of one draw is
        // sqrt(0.21 / 1e5), so 3 sd of the mean is 3 sqrt(0.21/1e5)/sqrt(200)
        let p = ProbVector::new(vec![0.3, 0.7]).unwrap();
        let n = 100_000u64;
        let reps = 200;
        let mean: f64 = (0..reps)
            .map(|r| {
                let mut rng = Rng::substream(2024, r);
                sample_multinomial(&mut rng, n, &p).counts()[0] as f64 / n as f64
            })
            .sum::<f64>()
            / reps as f64;
        let bound = 3.0 * (0.21f64 / n as f64).sqrt() / (reps as f64).sqrt();
        assert!((mean - 0.3).abs() < bound, "mean {mean}, bound {bound}");
    }

    fn moments(draws: &[f64]) -> (f64, f64) {
        let m = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / m;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (mean, var)
    }

    #[test]
    fn poisson_small_mean_moments() {
        let mut rng = Rng::new(42);
        assert_eq!(sample_poisson(&mut rng, 0.0).unwrap(), 0);
        assert!(sample_poisson(&mut rng, -1.0).is_err());
        assert!(sample_poisson(&mut rng, f64::NAN).is_err());
        let draws: Vec<f64> = (0..100_000).map(|_| sample_poisson(&mut rng, 4.0).unwrap() as f64).collect();
        let (mean, var) = moments(&draws);
        let m = draws.len() as f64;
        assert!((mean - 4.0).abs() < 4.0 * 2.0 / m.sqrt(), "mean {mean}");
        // Var of the sample variance for Poisson: (μ4 - σ⁴)/m with μ4 = λ + 3λ²
        let var_se = ((4.0 + 3.0 * 16.0 - 16.0) / m).sqrt();
        assert!((var - 4.0).abs() < 4.0 * var_se, "var {var}");
    }

    #[test]
    fn poisson_ptrs_moments() {
        let mut rng = Rng::new(7);
        for &lambda in &[30.0, 250.0, 2000.0] {
            let draws: Vec<f64> = (0..100_000).map(|_| sample_poisson(&mut rng, lambda).unwrap() as f64).collect();
            let (mean, var) = moments(&draws);
            let m = draws.len() as f64;
            assert!((mean - lambda).abs() < 4.0 * (lambda / m).sqrt(), "λ={lambda} mean {mean}");
            let var_se = ((lambda + 2.0 * lambda * lambda) / m).sqrt();
            assert!((var - lambda).abs() < 4.0 * var_se, "λ={lambda} var {var}");
        }
    }

    #[test]
    fn poisson_pmf_frequencies_at_switch_point() {
        // chi-squared style comparison of observed frequencies near the
        // mode against the exact pmf, on both sides of the method switch
        for &lambda in &[29.5, 30.5] {
            let mut rng = Rng::new(11);
            let m = 200_000usize;
            let mut hist = vec![0usize; 100];
            for _ in 0..m {
                let x = sample_poisson(&mut rng, lambda).unwrap() as usize;
                if x < hist.len() {
                    hist[x] += 1;
                }
            }
            for x in 20..40usize {
                let pmf = (x as f64 * lambda.ln() - lambda - ln_factorial(x as u64)).exp();
                let expected = pmf * m as f64;
                let sd = expected.sqrt();
                assert!(((hist[x] as f64) - expected).abs() < 5.0 * sd, "λ={lambda} x={x}");
            }
        }
    }
}
