//! Kolmogorov–Smirnov distances.

/// Coefficient of the asymptotic 5% critical value `c / √m`.
pub const KS_CRITICAL_05: f64 = 1.36;

/// Slack applied to the one-sample critical value to absorb the finite-`n`
/// bias of the statistic itself.
pub const KS_SLACK: f64 = 2.0;

/// One-sample threshold `2 · 1.36 / √m`.
pub fn ks_threshold(replications: usize) -> f64 {
    KS_SLACK * KS_CRITICAL_05 / (replications as f64).sqrt()
}

/// Two-sample 5% critical value `1.36 · √((m + n) / (m n))`.
pub fn ks_two_sample_threshold(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    KS_CRITICAL_05 * ((m + n) / (m * n)).sqrt()
}

/// `sup_x |F_m(x) - F(x)|` for an ascending sample.
///
/// `F` is assumed continuous. Ties are grouped so that the whole jump of the
/// empirical CDF at a repeated value is compared against `F` on both sides.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let m = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        let below = i as f64 / m;
        let above = j as f64 / m;
        d = d.max((f - below).abs()).max((above - f).abs());
        i = j;
    }
    d
}

/// `sup_x |F_a(x) - F_b(x)|` for two ascending samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / ma - j as f64 / mb).abs());
    }
    d
}
