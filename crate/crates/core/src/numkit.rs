//! Small dense real linear algebra.
//!
//! Everything in this crate is at most 16×16, so the kernels here favour
//! clarity and accuracy over blocking or sparsity. Matrices are stored
//! row-major.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{PuError, Result};

/// Dense row-major real matrix.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting shape mismatches and
    /// non-finite values.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(PuError::InvalidInput(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let m = Self { rows, cols, data: entries.to_vec() };
        m.check_finite()?;
        Ok(m)
    }

    /// Square matrix from fixed-size rows. Used for the hand-written tensors.
    pub fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self { rows: N, cols: N, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Outer product `u vᵀ`.
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(PuError::InvalidInput("matrix has non-finite entries".into()))
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| k * x).collect() }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Quadratic form `uᵀ A v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(self.mul_vec(v)).map(|(a, b)| a * b).sum()
    }

    /// `½(A + Aᵀ)`.
    pub fn symmetric_part(&self) -> Self {
        (self + &self.transpose()).scale(0.5)
    }

    /// Largest entry of `|A − Aᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        (self - &self.transpose()).max_abs()
    }

    /// Top-left `k×k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        Self::from_fn(k, k, |i, j| self[(i, j)])
    }

    pub fn powi(&self, n: u32) -> Self {
        assert!(self.is_square());
        (0..n).fold(Self::identity(self.rows), |acc, _| &acc * self)
    }

    /// Commutator `self·other − other·self`.
    pub fn commutator(&self, other: &Mat) -> Self {
        &(self * other) - &(other * self)
    }

    /// Matrix-level distance `max|A − B|`.
    pub fn distance(&self, other: &Mat) -> f64 {
        (self - other).max_abs()
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn vec_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
///
/// Returns `(sigma, v)` where `v` is the orthogonal matrix of right singular
/// vectors stored column-wise and `sigma[j]` is the norm of `A·v_j`. The
/// singular values are not sorted.
fn jacobi_svd(m: &Mat) -> (Vec<f64>, Mat) {
    let (rows, cols) = (m.rows, m.cols);
    // Column-major working copies.
    let mut u: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut u, p, q, c, s, rows);
                rotate_rows(&mut v, p, q, c, s, cols);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma = u.iter().map(|c| vec_norm(c)).collect();
    let vmat = Mat::from_fn(cols, cols, |i, j| v[j][i]);
    (sigma, vmat)
}

/// Singular values in descending order.
/// Givens rotation of rows `p < q` over their first `n` entries.
fn rotate_rows(a: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64, n: usize) {
    debug_assert!(p < q);
    let (lo, hi) = a.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()).take(n) {
        (*x, *y) = (c * *x - s * *y, s * *x + c * *y);
    }
}

pub fn singular_values(m: &Mat) -> Result<Vec<f64>> {
    m.check_finite()?;
    let (mut sigma, _) = jacobi_svd(m);
    sigma.sort_by(|a, b| b.total_cmp(a));
    Ok(sigma)
}

/// 2-norm condition number, `σ_max / σ_min`; infinite for singular input.
pub fn condition_number(m: &Mat) -> Result<f64> {
    let sigma = singular_values(m)?;
    let (max, min) = (sigma[0], *sigma.last().unwrap_or(&0.0));
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

/// Orthonormal basis of the numerical kernel of `m`.
///
/// A right singular vector `v` is kept when `‖m·v‖ ≤ tol·(1 + ‖m‖_F)`.
/// Since the SVD is rank revealing, the returned span is the largest
/// subspace meeting that residual bound.
pub fn nullspace(m: &Mat, tol: f64) -> Result<Vec<Vec<f64>>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(PuError::InvalidInput(format!("nullspace tolerance must be positive, got {tol}")));
    }
    m.check_finite()?;
    let threshold = tol * (1.0 + m.norm());
    let (sigma, v) = jacobi_svd(m);
    let mut basis: Vec<(f64, Vec<f64>)> = sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(j, &s)| (s, v.column(j)))
        .collect();
    basis.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(basis.into_iter().map(|(_, vec)| vec).collect())
}

/// LU factorisation with partial pivoting. Returns `None` for a pivot below
/// `1e-13·max|m|`.
fn lu(m: &Mat) -> Option<(Mat, Vec<usize>, f64)> {
    let n = m.rows;
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let floor = 1e-13 * m.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (piv, pval) = (k..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pval <= floor {
            return None;
        }
        if piv != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        for i in (k + 1)..n {
            let f = a[(i, k)] / a[(k, k)];
            a[(i, k)] = f;
            for j in (k + 1)..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    Some((a, perm, sign))
}

/// Determinant of a square matrix. Exactly singular input gives `0.0`.
pub fn det(m: &Mat) -> Result<f64> {
    if !m.is_square() {
        return Err(PuError::InvalidInput("determinant of a non-square matrix".into()));
    }
    m.check_finite()?;
    if m.rows == 0 {
        return Ok(1.0);
    }
    // Plain elimination without a rank cut-off: minors near zero must keep
    // their sign information.
    let n = m.rows;
    let mut a = m.clone();
    let mut d = 1.0;
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs())).unwrap();
        if a[(piv, k)] == 0.0 {
            return Ok(0.0);
        }
        if piv != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            d = -d;
        }
        d *= a[(k, k)];
        for i in (k + 1)..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in (k + 1)..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    Ok(d)
}

/// Inverse by LU with partial pivoting.
pub fn inverse(m: &Mat) -> Result<Mat> {
    if !m.is_square() {
        return Err(PuError::InvalidInput("inverse of a non-square matrix".into()));
    }
    m.check_finite()?;
    let n = m.rows;
    let (lu, perm, _) = lu(m).ok_or(PuError::SingularMatrix)?;
    let mut inv = Mat::zeros(n, n);
    for col in 0..n {
        // Solve L U x = P e_col.
        let mut x: Vec<f64> = (0..n).map(|i| if perm[i] == col { 1.0 } else { 0.0 }).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= lu[(i, k)] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= lu[(i, k)] * x[k];
            }
            x[i] /= lu[(i, i)];
        }
        for i in 0..n {
            inv[(i, col)] = x[i];
        }
    }
    Ok(inv)
}

/// Matrix exponential by scaling and squaring around a Taylor kernel.
///
/// The argument is scaled until its 1-norm is at most ½; an 18-term Taylor
/// sum then has truncation error far below `f64` resolution.
pub fn expm(m: &Mat) -> Result<Mat> {
    if !m.is_square() {
        return Err(PuError::InvalidInput("exponential of a non-square matrix".into()));
    }
    m.check_finite()?;
    let n = m.rows;
    let norm = m.norm_one();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = m.scale(0.5f64.powi(squarings));

    let mut result = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=18 {
        term = (&term * &a).scale(1.0 / k as f64);
        result = &result + &term;
        if term.max_abs() <= f64::EPSILON * 1e-3 * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// Determinants of the leading `k×k` blocks, `k = 1..n`.
///
/// All positive is Sylvester's criterion for positive definiteness.
pub fn leading_minors(m: &Mat) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(PuError::InvalidInput("leading minors of a non-square matrix".into()));
    }
    m.check_finite()?;
    if m.asymmetry() > 1e-10 * (1.0 + m.max_abs()) {
        return Err(PuError::InvalidInput("leading minors require a symmetric matrix".into()));
    }
    (1..=m.rows).map(|k| det(&m.leading_block(k))).collect()
}

/// `true` when every leading minor is strictly positive.
pub fn is_positive_definite(m: &Mat) -> Result<bool> {
    Ok(leading_minors(m)?.iter().all(|&d| d > 0.0))
}

/// Least-squares coefficients of `target` on the span of `basis`, all
/// treated as flat vectors. Returns the coefficients and the residual norm
/// `‖target − Σ cᵢ basisᵢ‖`.
///
/// Uses modified Gram-Schmidt with one re-orthogonalisation pass, which is
/// ample for the handful of basis elements used here.
pub fn least_squares(basis: &[&[f64]], target: &[f64]) -> Result<(Vec<f64>, f64)> {
    let k = basis.len();
    let n = target.len();
    if basis.iter().any(|b| b.len() != n) {
        return Err(PuError::InvalidInput("least-squares basis length mismatch".into()));
    }
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = Mat::zeros(k, k);
    for (j, b) in basis.iter().enumerate() {
        let mut w = b.to_vec();
        for _pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c = dot(qi, &w);
                r[(i, j)] += c;
                for (wl, ql) in w.iter_mut().zip(qi) {
                    *wl -= c * ql;
                }
            }
        }
        let nw = vec_norm(&w);
        let scale = vec_norm(b).max(f64::MIN_POSITIVE);
        if nw <= 1e-12 * scale {
            return Err(PuError::InvalidInput("least-squares basis is linearly dependent".into()));
        }
        r[(j, j)] = nw;
        q.push(w.iter().map(|x| x / nw).collect());
    }
    let qt_b: Vec<f64> = q.iter().map(|qi| dot(qi, target)).collect();
    let mut coeffs = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qt_b[i];
        for j in (i + 1)..k {
            s -= r[(i, j)] * coeffs[j];
        }
        coeffs[i] = s / r[(i, i)];
    }
    let mut resid = target.to_vec();
    for (c, b) in coeffs.iter().zip(basis) {
        for (rl, bl) in resid.iter_mut().zip(b.iter()) {
            *rl -= c * bl;
        }
    }
    Ok((coeffs, vec_norm(&resid)))
}

/// Distance of `target` from the span of an orthonormal family.
pub fn projection_residual(orthonormal: &[Vec<f64>], target: &[f64]) -> f64 {
    let mut resid = target.to_vec();
    for b in orthonormal {
        let c = dot(b, target);
        for (rl, bl) in resid.iter_mut().zip(b) {
            *rl -= c * bl;
        }
    }
    vec_norm(&resid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn companion(alpha: f64, beta: f64) -> Mat {
        Mat::from_rows([
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [-beta, 0.0, -alpha, 0.0],
        ])
    }

    #[test]
    fn nullspace_of_identity_is_empty() {
        assert!(nullspace(&Mat::identity(4), 1e-12).unwrap().is_empty());
    }

    #[test]
    fn nullspace_of_zero_is_everything() {
        let basis = nullspace(&Mat::zeros(2, 2), 1e-12).unwrap();
        assert_eq!(basis.len(), 2);
        assert!(dot(&basis[0], &basis[1]).abs() < 1e-15);
        for b in &basis {
            assert!((vec_norm(b) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn companion_matrix_with_nonzero_beta_is_invertible() {
        let m = companion(5.0, 4.0);
        assert_eq!(det(&m).unwrap(), 4.0);
        assert!(nullspace(&m, 1e-12).unwrap().is_empty());
    }

    #[test]
    fn nullspace_rejects_bad_input() {
        let mut m = Mat::identity(2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(nullspace(&m, 1e-12), Err(PuError::InvalidInput(_))));
        assert!(matches!(nullspace(&Mat::identity(2), 0.0), Err(PuError::InvalidInput(_))));
    }

    #[test]
    fn wide_matrix_nullspace() {
        let m = Mat::from_row_slice(1, 3, &[1.0, 1.0, 0.0]).unwrap();
        let basis = nullspace(&m, 1e-12).unwrap();
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!(m.mul_vec(b)[0].abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_of_identity_and_zero() {
        assert_eq!(inverse(&Mat::identity(3)).unwrap(), Mat::identity(3));
        assert!(matches!(inverse(&Mat::zeros(3, 3)), Err(PuError::SingularMatrix)));
    }

    #[test]
    fn inverse_of_standard_poisson_tensor() {
        let alpha = 5.0;
        let j1 = Mat::from_rows([
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, alpha],
            [1.0, 0.0, -alpha, 0.0],
        ]);
        let inv = inverse(&j1).unwrap();
        assert!((&inv * &j1).distance(&Mat::identity(4)) <= 1e-12);
    }

    #[test]
    fn expm_basic_cases() {
        assert!(expm(&Mat::zeros(3, 3)).unwrap().distance(&Mat::identity(3)) == 0.0);
        let e = expm(&Mat::diag(&[1.0, 2.0])).unwrap();
        assert!((e[(0, 0)] - 1f64.exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - 2f64.exp()).abs() < 1e-13);
        assert!(e[(0, 1)].abs() < 1e-16);
        // The dilation generator ½I.
        let e = expm(&Mat::identity(4).scale(0.5)).unwrap();
        assert!(e.distance(&Mat::identity(4).scale(0.5f64.exp())) < 1e-14);
    }

    #[test]
    fn expm_derivative_at_zero_by_finite_differences() {
        let m = companion(5.0, 4.0);
        let h = 1e-5;
        let plus = expm(&m.scale(h)).unwrap();
        let minus = expm(&m.scale(-h)).unwrap();
        let fd = (&plus - &minus).scale(1.0 / (2.0 * h));
        assert!(fd.distance(&m) < 1e-8);
    }

    #[test]
    fn expm_of_rotation() {
        let theta = 2.3;
        let m = Mat::from_rows([[0.0, -theta], [theta, 0.0]]);
        let e = expm(&m).unwrap();
        assert!((e[(0, 0)] - theta.cos()).abs() < 1e-14);
        assert!((e[(1, 0)] - theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn leading_minors_examples() {
        assert_eq!(leading_minors(&Mat::identity(3)).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(leading_minors(&Mat::diag(&[1.0, -1.0])).unwrap(), vec![1.0, -1.0]);
        let asym = Mat::from_rows([[1.0, 2.0], [0.0, 1.0]]);
        assert!(matches!(leading_minors(&asym), Err(PuError::InvalidInput(_))));
    }

    #[test]
    fn least_squares_recovers_coefficients() {
        let a = [1.0, 0.0, 1.0];
        let b = [0.0, 1.0, 1.0];
        let t = [2.0, -3.0, -1.0];
        let (c, r) = least_squares(&[&a, &b], &t).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-14 && (c[1] + 3.0).abs() < 1e-14);
        assert!(r < 1e-14);
    }
}
