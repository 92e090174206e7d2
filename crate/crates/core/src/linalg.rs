//! The structured matrices behind the chi-squared limit: the multinomial
//! covariance `Σ`, its truncation `Σ*` and the closed-form inverse of `Σ*`,
//! the whitened covariance `Γ^{-1/2} Σ Γ^{-1/2}` and the projection
//! `I - √p √pᵀ` it equals.
//!
//! Dense row-major storage, intended for small `k` (category counts).

use std::ops::Mul;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::tables::ProbVector;

/// Dense row-major matrix of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return domain("matrix rows must be nonempty and of equal length");
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return domain("matrix entries must be finite");
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::from_fn(values.len(), values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// `u vᵀ`.
    pub fn outer(u: &[f64], v: &[f64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `xᵀ M x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch");
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch");
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| s * self[(i, j)])
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|m_ij - m_ji|`; infinite for non-square input.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Column sums.
    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)]).sum()).collect()
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn determinant(&self) -> Result<f64> {
        if !self.is_square() {
            return domain("determinant of a non-square matrix");
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
                .expect("nonempty range");
            if a[pivot * n + col] == 0.0 {
                return Ok(0.0);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for r in col + 1..n {
                let factor = a[r * n + col] / d;
                if factor != 0.0 {
                    for j in col..n {
                        a[r * n + j] -= factor * a[col * n + j];
                    }
                }
            }
        }
        Ok(det)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(l, j)];
                }
            }
        }
        out
    }
}

/// Covariance of one multinomial(1, p) trial: `diag(p) - p pᵀ`.
pub fn build_sigma(p: &ProbVector) -> Matrix {
    let v = p.as_slice();
    Matrix::from_fn(v.len(), v.len(), |i, j| {
        if i == j {
            v[i] * (1.0 - v[i])
        } else {
            -v[i] * v[j]
        }
    })
}

/// `Σ` restricted to its first `k - 1` rows and columns.
pub fn build_sigma_star(p: &ProbVector) -> Matrix {
    let sigma = build_sigma(p);
    let k = p.len() - 1;
    Matrix::from_fn(k, k, |i, j| sigma[(i, j)])
}

/// Inverse of `A + u vᵀ` from a known `A⁻¹`:
/// `A⁻¹ - A⁻¹ u vᵀ A⁻¹ / (1 + vᵀ A⁻¹ u)`.
pub fn sherman_morrison_update(a_inv: &Matrix, u: &[f64], v: &[f64]) -> Result<Matrix> {
    let a_inv_u = a_inv.mul_vec(u);
    let v_a_inv = a_inv.transpose().mul_vec(v);
    let denom = 1.0 + v.iter().zip(&a_inv_u).map(|(a, b)| a * b).sum::<f64>();
    if denom == 0.0 || !denom.is_finite() {
        return domain("rank-one update makes the matrix singular");
    }
    Ok(a_inv.sub(&Matrix::outer(&a_inv_u, &v_a_inv).scale(1.0 / denom)))
}

/// `(Σ*)⁻¹` through the Sherman–Morrison formula applied to
/// `Σ* = diag(p*) - p* p*ᵀ`.
///
/// The result has `1/p_i + 1/p_k` on the diagonal and `1/p_k` elsewhere.
pub fn sherman_morrison_inverse(p: &ProbVector) -> Result<Matrix> {
    if !p.is_strictly_positive() {
        return domain("Σ* is singular when some p_i = 0");
    }
    let b = p.truncate();
    let a_inv = Matrix::diag(&b.iter().map(|v| 1.0 / v).collect::<Vec<_>>());
    let neg_b: Vec<f64> = b.iter().map(|v| -v).collect();
    sherman_morrison_update(&a_inv, &neg_b, &b)
}

/// The explicit entrywise form of `(Σ*)⁻¹` read off the characteristic
/// function: `1/p_i + 1/p_k` on the diagonal, `1/p_k` off it.
pub fn explicit_sigma_star_inverse(p: &ProbVector) -> Result<Matrix> {
    p.require_strictly_positive("the inverse of Σ*")?;
    let v = p.as_slice();
    let k = v.len() - 1;
    let last = 1.0 / v[k];
    Ok(Matrix::from_fn(k, k, |i, j| if i == j { 1.0 / v[i] + last } else { last }))
}

/// Projection onto the orthogonal complement of `√p`: `I - √p √pᵀ`.
pub fn cochran_projection(p: &ProbVector) -> Matrix {
    let s = p.sqrt_embed();
    Matrix::identity(s.len()).sub(&Matrix::outer(&s, &s))
}

/// `Γ^{-1/2} Σ Γ^{-1/2}` with `Γ = diag(p)`, by explicit multiplication.
///
/// This is also the limiting covariance of the standardized residuals
/// `(N_i - n p_i) / √(n p_i)`.
pub fn whitened_covariance(p: &ProbVector) -> Result<Matrix> {
    p.require_strictly_positive("whitening by diag(p)^(-1/2)")?;
    let g = Matrix::diag(&p.as_slice().iter().map(|v| 1.0 / v.sqrt()).collect::<Vec<_>>());
    Ok(&(&g * &build_sigma(p)) * &g)
}

/// Eigenvalues (ascending) and trace of a symmetric matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
}

pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues by cyclic Jacobi rotations, sorted ascending, with the trace.
pub fn spectrum_check(m: &Matrix) -> Result<Spectrum> {
    if !m.is_square() {
        return domain("spectrum of a non-square matrix");
    }
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOL {
        return domain(format!("matrix is not symmetric (max asymmetry {asym:e})"));
    }
    let mut eigenvalues = jacobi_eigenvalues(m);
    eigenvalues.sort_by(f64::total_cmp);
    Ok(Spectrum {
        eigenvalues,
        trace: m.trace(),
    })
}

fn jacobi_eigenvalues(m: &Matrix) -> Vec<f64> {
    const MAX_SWEEPS: usize = 100;
    let n = m.rows();
    let mut a = m.clone();
    // symmetrize away rounding-level asymmetry
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let scale = a.data.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= f64::EPSILON * scale * 1e-3 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        let new_rp = arp - s * (arq + tau * arp);
                        let new_rq = arq + s * (arp - tau * arq);
                        a[(r, p)] = new_rp;
                        a[(p, r)] = new_rp;
                        a[(r, q)] = new_rq;
                        a[(q, r)] = new_rq;
                    }
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// `det(Ω - λI)` in closed form, `-λ (1 - λ)^(k-1)`, where
/// `Ω = I - √p √pᵀ` is `k x k`.
///
/// The sign follows from `det((1-λ)I - s sᵀ) = (1-λ)^k (1 - 1/(1-λ))` for the
/// unit vector `s = √p`; it is the characteristic polynomial `det(λI - Ω)`
/// multiplied by `(-1)^k`.
pub fn sylvester_det(p: &ProbVector, lambda: f64) -> f64 {
    let k = p.len() as i32;
    -lambda * (1.0 - lambda).powi(k - 1)
}

/// `det(Ω - λI)` by LU decomposition of the explicitly built matrix; the
/// brute-force counterpart of [`sylvester_det`].
pub fn shifted_projection_det(p: &ProbVector, lambda: f64) -> f64 {
    let omega = cochran_projection(p);
    omega
        .sub(&Matrix::identity(p.len()).scale(lambda))
        .determinant()
        .expect("square by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Rng;

    /// Gauss–Jordan inversion with partial pivoting; test-only oracle.
    fn gauss_jordan_inverse(m: &Matrix) -> Matrix {
        let n = m.rows();
        let mut a = m.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs())).unwrap();
            for j in 0..n {
                let t = a[(piv, j)];
                a[(piv, j)] = a[(col, j)];
                a[(col, j)] = t;
                let t = inv[(piv, j)];
                inv[(piv, j)] = inv[(col, j)];
                inv[(col, j)] = t;
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)];
                    for j in 0..n {
                        a[(r, j)] -= f * a[(col, j)];
                        inv[(r, j)] -= f * inv[(col, j)];
                    }
                }
            }
        }
        inv
    }

    /// Cholesky succeeds iff the matrix is positive definite.
    fn cholesky_ok(m: &Matrix) -> bool {
        let n = m.rows();
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..j).map(|t| l[(i, t)] * l[(j, t)]).sum();
                if i == j {
                    let d = m[(i, i)] - s;
                    if d <= 0.0 {
                        return false;
                    }
                    l[(i, i)] = d.sqrt();
                } else {
                    l[(i, j)] = (m[(i, j)] - s) / l[(j, j)];
                }
            }
        }
        true
    }

    fn random_p(rng: &mut Rng, k: usize) -> ProbVector {
        let w: Vec<f64> = (0..k).map(|_| 0.05 + rng.uniform()).collect();
        ProbVector::from_weights(&w).unwrap()
    }

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sigma_examples() {
        let s = build_sigma(&pv(&[0.5, 0.5]));
        assert_eq!(s, Matrix::from_rows(&[vec![0.25, -0.25], vec![-0.25, 0.25]]).unwrap());
        let third = 1.0 / 3.0;
        let s = build_sigma(&pv(&[third; 3]));
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 / 9.0 } else { -1.0 / 9.0 };
                assert!((s[(i, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sigma_columns_sum_to_zero() {
        let mut rng = Rng::new(3);
        for k in 2..=10 {
            let s = build_sigma(&random_p(&mut rng, k));
            assert!(s.col_sums().iter().all(|c| c.abs() < 1e-14));
            assert_eq!(s.asymmetry(), 0.0);
        }
    }

    #[test]
    fn sigma_star_examples() {
        let third = 1.0 / 3.0;
        let s = build_sigma_star(&pv(&[third; 3]));
        let want = Matrix::from_rows(&[vec![2.0 / 9.0, -1.0 / 9.0], vec![-1.0 / 9.0, 2.0 / 9.0]]).unwrap();
        assert!(s.max_abs_diff(&want) < 1e-15);
        assert_eq!(build_sigma_star(&pv(&[0.5, 0.5])), Matrix::from_rows(&[vec![0.25]]).unwrap());
        let mut rng = Rng::new(5);
        for k in 2..=10 {
            let s = build_sigma_star(&random_p(&mut rng, k));
            assert_eq!(s.asymmetry(), 0.0);
            assert!(cholesky_ok(&s));
        }
    }

    #[test]
    fn sherman_morrison_examples() {
        let third = 1.0 / 3.0;
        let inv = sherman_morrison_inverse(&pv(&[third; 3])).unwrap();
        let want = Matrix::from_rows(&[vec![6.0, 3.0], vec![3.0, 6.0]]).unwrap();
        assert!(inv.max_abs_diff(&want) < 1e-12);
        let inv = sherman_morrison_inverse(&pv(&[0.5, 0.5])).unwrap();
        assert!((inv[(0, 0)] - 4.0).abs() < 1e-14);
        assert!(sherman_morrison_inverse(&pv(&[0.5, 0.0, 0.5])).is_err());
        assert!(explicit_sigma_star_inverse(&pv(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn sherman_morrison_matches_gauss_jordan_and_explicit_form() {
        let mut rng = Rng::new(17);
        for _ in 0..100 {
            let k = 2 + (rng.uniform() * 7.0) as usize;
            let p = random_p(&mut rng, k);
            let sm = sherman_morrison_inverse(&p).unwrap();
            let star = build_sigma_star(&p);
            let gj = gauss_jordan_inverse(&star);
            let scale = gj.data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            assert!(sm.max_abs_diff(&gj) < 1e-9 * scale);
            assert!((&sm * &star).max_abs_diff(&Matrix::identity(k - 1)) < 1e-10);
            assert!(sm.max_abs_diff(&explicit_sigma_star_inverse(&p).unwrap()) < 1e-12 * scale);
        }
    }

    #[test]
    fn projection_examples() {
        let pr = cochran_projection(&pv(&[0.5, 0.5]));
        let want = Matrix::from_rows(&[vec![0.5, -0.5], vec![-0.5, 0.5]]).unwrap();
        assert!(pr.max_abs_diff(&want) < 1e-15);
        let mut rng = Rng::new(23);
        for k in 2..=10 {
            let p = random_p(&mut rng, k);
            let pr = cochran_projection(&p);
            assert!(pr.mul_vec(&p.sqrt_embed()).iter().all(|v| v.abs() < 1e-12));
            assert!((&pr * &pr).max_abs_diff(&pr) < 1e-12);
            assert_eq!(pr.asymmetry(), 0.0);
        }
    }

    #[test]
    fn whitened_covariance_is_the_projection() {
        let w = whitened_covariance(&pv(&[0.5, 0.5])).unwrap();
        assert!(w.max_abs_diff(&cochran_projection(&pv(&[0.5, 0.5]))) < 1e-15);
        let p = pv(&[0.1, 0.2, 0.3, 0.4]);
        let w = whitened_covariance(&p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 - p.get(i) } else { -(p.get(i) * p.get(j)).sqrt() };
                assert!((w[(i, j)] - want).abs() < 1e-15);
            }
        }
        assert!(whitened_covariance(&pv(&[1.0, 0.0])).is_err());
        let mut rng = Rng::new(29);
        for k in 2..=10 {
            let p = random_p(&mut rng, k);
            assert!(whitened_covariance(&p).unwrap().max_abs_diff(&cochran_projection(&p)) < 1e-12);
        }
    }

    #[test]
    fn spectrum_examples() {
        let sp = spectrum_check(&Matrix::identity(3)).unwrap();
        assert_eq!(sp.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert_eq!(sp.trace, 3.0);
        let p = pv(&[0.1, 0.2, 0.3, 0.4]);
        let sp = spectrum_check(&whitened_covariance(&p).unwrap()).unwrap();
        for (got, want) in sp.eigenvalues.iter().zip([0.0, 1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-9, "{:?}", sp.eigenvalues);
        }
        assert!((sp.trace - 3.0).abs() < 1e-12);
        let asym = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(spectrum_check(&asym).is_err());
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // Q diag(d) Qᵀ for a Householder reflector Q
        let d = [-2.0, 0.5, 1.0, 3.0, 7.5];
        let v = [0.3, -0.1, 0.8, 0.2, -0.4];
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let q = Matrix::identity(5).sub(&Matrix::outer(&v, &v).scale(2.0 / vv));
        let m = &(&q * &Matrix::diag(&d)) * &q.transpose();
        let sp = spectrum_check(&m).unwrap();
        for (got, want) in sp.eigenvalues.iter().zip(d) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sylvester_determinant() {
        let third = 1.0 / 3.0;
        let p = pv(&[third; 3]);
        assert_eq!(sylvester_det(&p, 0.0), 0.0);
        assert_eq!(sylvester_det(&p, 1.0), 0.0);
        let lu = shifted_projection_det(&p, 0.5);
        // -0.5 * 0.5^2
        assert!((sylvester_det(&p, 0.5) - (-0.125)).abs() < 1e-15);
        assert!((lu - (-0.125)).abs() < 1e-12, "{lu}");
        let mut rng = Rng::new(31);
        for k in 2..=10 {
            let p = random_p(&mut rng, k);
            for &l in &[0.3, 0.5, 2.0, -1.7] {
                let closed = sylvester_det(&p, l);
                let brute = shifted_projection_det(&p, l);
                assert!(((closed - brute) / closed).abs() < 1e-8, "k={k} λ={l}");
            }
        }
    }

    #[test]
    fn determinant_by_lu() {
        let m = Matrix::from_rows(&[vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]]).unwrap();
        // cofactor expansion: 0*(1) - 2*(1-0) + 1*(0-3) = -5
        assert!((m.determinant().unwrap() + 5.0).abs() < 1e-14);
        assert!(Matrix::zeros(2, 3).determinant().is_err());
    }
}
