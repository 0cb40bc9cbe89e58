//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `D(A)`: keeps the diagonal of a square matrix.
pub fn diag_part(m: &CMat) -> CMat {
    let n = m.nrows().min(m.ncols());
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for i in 0..n {
        out[(i, i)] = m[(i, i)];
    }
    out
}

pub fn trace_re(m: &CMat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

pub fn frob2(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `(A + A^H) / 2`, used to strip rounding asymmetry before eigen solves.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Relative Frobenius distance `||a - b|| / max(||b||, tiny)`.
pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    let den = frob2(b).sqrt().max(f64::MIN_POSITIVE);
    frob2(&(a - b)).sqrt() / den
}

/// Matrix with i.i.d. `CN(0, var)` entries.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, var: f64, rng: &mut R) -> CMat {
    let s = (var / 2.0).sqrt();
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    })
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitize(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn cholesky(m: &CMat, what: &str) -> Result<Cholesky<Complex64, Dyn>> {
    Cholesky::new(hermitize(m)).ok_or_else(|| Error::SingularCovariance(what.to_string()))
}

/// `C^{-1} B` for Hermitian positive-definite `C`.
pub fn solve_hpd(c: &CMat, b: &CMat, what: &str) -> Result<CMat> {
    Ok(cholesky(c, what)?.solve(b))
}

/// `ln det C` for Hermitian positive-definite `C`.
pub fn ln_det_hpd(c: &CMat, what: &str) -> Result<f64> {
    let chol = cholesky(c, what)?;
    Ok(chol.l_dirty().diagonal().iter().map(|z| 2.0 * z.re.ln()).sum())
}

pub(crate) fn check_dims(context: &'static str, m: &CMat, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::DimensionMismatch {
            context,
            expected: (rows, cols),
            got: (m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigen_reconstructs_and_sorts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = complex_gaussian(5, 5, 1.0, &mut rng);
        let h = &a * a.adjoint();
        let (vals, q) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(5, vals.iter().map(|&v| real(v))));
        assert!(rel_diff(&(&q * d * q.adjoint()), &h) < 1e-12);
    }

    #[test]
    fn hpd_solve_and_logdet() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = complex_gaussian(4, 4, 1.0, &mut rng);
        let c = &a * a.adjoint() + identity(4);
        let b = complex_gaussian(4, 2, 1.0, &mut rng);
        let x = solve_hpd(&c, &b, "test").unwrap();
        assert!(rel_diff(&(&c * x), &b) < 1e-12);
        let det = c.clone().determinant().re;
        assert!((ln_det_hpd(&c, "test").unwrap() - det.ln()).abs() < 1e-10);
    }
}
