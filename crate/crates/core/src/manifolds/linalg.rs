use nalgebra::{DMatrix, SymmetricEigen, SVD};

use super::points::{check_spd_eigenvalues, SpdMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_apply<T: Real>(m: &DMatrix<T>, f: impl Fn(T) -> T) -> DMatrix<T> {
    let eig = SymmetricEigen::new(m.clone());
    let mut v = eig.eigenvectors.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let fl = f(lam);
        v.column_mut(j).scale_mut(fl);
    }
    v * eig.eigenvectors.transpose()
}

/// Matrix logarithm of an SPD matrix, `U diag(log λ) Uᵀ`.
pub fn matrix_log<T: Real>(x: &SpdMatrix<T>) -> Result<DMatrix<T>> {
    let eig = SymmetricEigen::new(x.matrix().clone());
    check_spd_eigenvalues(&eig.eigenvalues)?;
    let mut v = eig.eigenvectors.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        v.column_mut(j).scale_mut(lam.ln());
    }
    Ok(symmetrize(&(v * eig.eigenvectors.transpose())))
}

/// Matrix exponential of a symmetric matrix; the result is SPD.
pub fn matrix_exp<T: Real>(s: &DMatrix<T>) -> Result<SpdMatrix<T>> {
    if !s.is_square() {
        return Err(Error::InvalidPoint("matrix_exp needs a square matrix".into()));
    }
    let scale = s.amax().max(T::one());
    if (s - s.transpose()).amax() > T::invariant_tol() * scale {
        return Err(Error::InvalidPoint(
            "matrix_exp needs a symmetric matrix".into(),
        ));
    }
    let out = symmetrize(&sym_apply(&symmetrize(s), |l| l.exp()));
    Ok(SpdMatrix::from_raw(out))
}

/// Symmetric square root of an SPD matrix.
pub fn spd_sqrt<T: Real>(x: &SpdMatrix<T>) -> DMatrix<T> {
    symmetrize(&sym_apply(x.matrix(), |l| l.max(T::zero()).sqrt()))
}

pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

/// Exponential of a general square matrix by scaling and squaring of a Taylor series.
pub fn expm<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|j| a.column(j).iter().fold(T::zero(), |s, x| s + x.abs()))
        .fold(T::zero(), |m, x| m.max(x));
    let mut squarings = 0u32;
    let mut scaled = a.clone();
    let half = T::lit(0.5);
    let mut nrm = norm;
    while nrm > half {
        scaled *= half;
        nrm *= half;
        squarings += 1;
    }
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled * T::lit(1.0 / k as f64);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Orthonormal polar factor `U Vᵀ` of a full-column-rank `p × k` matrix.
pub fn polar_factor<T: Real>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let svd = SVD::new(a.clone(), true, true);
    let smin = svd
        .singular_values
        .iter()
        .copied()
        .fold(T::max_value().unwrap_or(T::one()), |m, x| m.min(x));
    let smax = svd
        .singular_values
        .iter()
        .copied()
        .fold(T::zero(), |m, x| m.max(x));
    if !(smin > T::spd_rel_tol() * smax) {
        return Err(Error::UndefinedEstimate(
            "polar factor of a rank-deficient matrix".into(),
        ));
    }
    let u = svd.u.ok_or_else(|| Error::NonConvergence("SVD".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::NonConvergence("SVD".into()))?;
    Ok(u * vt)
}

/// `log det` of an SPD matrix via its eigenvalues.
pub fn log_det<T: Real>(x: &SpdMatrix<T>) -> T {
    SymmetricEigen::new(x.matrix().clone())
        .eigenvalues
        .iter()
        .fold(T::zero(), |s, &l| s + l.ln())
}
