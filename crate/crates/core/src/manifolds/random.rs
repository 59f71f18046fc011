//! Uniform and Haar random generation on the supported spaces and groups.

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;
use rand_distr::StandardNormal;

use super::isometry::Isometry;
use super::points::{HyperboloidPoint, StiefelFrame, UnitVector};
use crate::scalar::Real;

fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<T> {
    // Column-major fill order is part of the determinism contract.
    DMatrix::from_fn(rows, cols, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)))
}

/// Q factor of a Gaussian matrix with the diagonal of R made positive.
fn sign_fixed_q<T: Real>(g: DMatrix<T>) -> DMatrix<T> {
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Haar-distributed element of `O(p)`.
pub fn haar_orthogonal<T: Real, R: Rng + ?Sized>(p: usize, rng: &mut R) -> DMatrix<T> {
    assert!(p >= 1, "haar_orthogonal needs p >= 1");
    sign_fixed_q(gaussian_matrix(p, p, rng))
}

/// Uniform point of `S^k ⊂ R^{k+1}`.
pub fn uniform_on_sphere<T: Real, R: Rng + ?Sized>(k: usize, rng: &mut R) -> UnitVector<T> {
    loop {
        let v: DVector<T> = DVector::from_fn(k + 1, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)));
        if let Ok(u) = UnitVector::normalize(v) {
            return u;
        }
    }
}

/// Uniform point of `V_k(R^p)`.
pub fn uniform_on_stiefel<T: Real, R: Rng + ?Sized>(p: usize, k: usize, rng: &mut R) -> StiefelFrame<T> {
    assert!(1 <= k && k <= p, "uniform_on_stiefel needs 1 <= k <= p");
    StiefelFrame::from_raw(sign_fixed_q(gaussian_matrix(p, k, rng)))
}

/// Haar-distributed element of `O(2)^p`.
pub fn haar_torus_element<T: Real, R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<Matrix2<T>> {
    (0..p)
        .map(|_| {
            let theta = T::lit(rng.random::<f64>() * std::f64::consts::TAU);
            if rng.random::<bool>() {
                Isometry::rotation2(theta)
            } else {
                Isometry::reflection2(theta)
            }
        })
        .collect()
}

/// Embeds `U ∈ O(k)` as a spatial rotation in `O⁺(k,1)`.
pub fn spatial_rotation<T: Real>(u: &DMatrix<T>) -> DMatrix<T> {
    let k = u.nrows();
    let mut l = DMatrix::identity(k + 1, k + 1);
    l.view_mut((0, 0), (k, k)).copy_from(u);
    l
}

/// Boost of rapidity `t` along the first spatial axis.
pub fn axis_boost<T: Real>(k: usize, t: T) -> DMatrix<T> {
    let mut l = DMatrix::identity(k + 1, k + 1);
    let (c, s) = (t.cosh(), t.sinh());
    l[(0, 0)] = c;
    l[(k, k)] = c;
    l[(0, k)] = s;
    l[(k, 0)] = s;
    l
}

/// The pure boost carrying the apex `(0, …, 0, R)` to `mu`.
pub fn boost_from_apex<T: Real>(mu: &HyperboloidPoint<T>) -> DMatrix<T> {
    let n = mu.coords().len();
    let k = n - 1;
    let u = mu.coords() / mu.radius();
    let ut = u[k];
    let us = u.rows(0, k).into_owned();
    let mut l = DMatrix::zeros(n, n);
    let block = DMatrix::identity(k, k) + &us * us.transpose() / (T::one() + ut);
    l.view_mut((0, 0), (k, k)).copy_from(&block);
    l.view_mut((0, k), (k, 1)).copy_from(&us);
    l.view_mut((k, 0), (1, k)).copy_from(&us.transpose());
    l[(k, k)] = ut;
    l
}

/// Random element of `O⁺(k,1)` as rotation × boost × rotation, with Haar rotations
/// and rapidity uniform on `[0, max_rapidity]`.
pub fn random_lorentz<T: Real, R: Rng + ?Sized>(k: usize, max_rapidity: f64, rng: &mut R) -> DMatrix<T> {
    let r1 = spatial_rotation(&haar_orthogonal::<T, _>(k, rng));
    let t = T::lit(rng.random::<f64>() * max_rapidity);
    let r2 = spatial_rotation(&haar_orthogonal::<T, _>(k, rng));
    r1 * axis_boost(k, t) * r2
}
