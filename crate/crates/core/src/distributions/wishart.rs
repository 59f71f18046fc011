use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::manifolds::{log_det, symmetrize};
use crate::SpdMatrix;

/// `Wishart_p(n, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WishartParams {
    pub dof: usize,
    pub sigma: SpdMatrix,
}

impl WishartParams {
    pub fn new(dof: usize, sigma: SpdMatrix) -> Result<Self> {
        if dof < sigma.p() {
            return Err(Error::InvalidParameter(format!(
                "Wishart needs n >= p, got n = {dof}, p = {}",
                sigma.p()
            )));
        }
        Ok(Self { dof, sigma })
    }

    pub fn p(&self) -> usize {
        self.sigma.p()
    }
}

/// Log density with respect to the invariant measure `det(X)^{−(p+1)/2} dX`, up to a
/// constant depending only on `(n, p)`:
/// `(n/2)(log det X − log det Σ) − tr(Σ⁻¹X)/2`.
pub fn wishart_log_density(x: &SpdMatrix, theta: &WishartParams) -> Result<f64> {
    if x.p() != theta.p() {
        return Err(Error::DimensionMismatch {
            expected: theta.p(),
            found: x.p(),
        });
    }
    let n = theta.dof as f64;
    let chol = theta
        .sigma
        .matrix()
        .clone()
        .cholesky()
        .ok_or(Error::NotSpd { min_eigenvalue: 0.0 })?;
    let tr = chol.solve(x.matrix()).trace();
    Ok(0.5 * n * (log_det(x) - log_det(&theta.sigma)) - 0.5 * tr)
}

/// Lower-triangular Bartlett factor `A` with `AAᵀ ~ Wishart_p(n, I)`:
/// `A_ii = √χ²_{n−i}` (0-based `i`), `A_ij ~ N(0,1)` below the diagonal.
pub fn bartlett_factor<R: Rng + ?Sized>(p: usize, dof: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(dof >= p, "Bartlett factor needs n >= p");
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        let chi = ChiSquared::new((dof - i) as f64).expect("positive degrees of freedom");
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    a
}

/// `M (AAᵀ) Mᵀ` for any square root `MMᵀ = Σ`.
pub fn wishart_from_factor(m: &DMatrix<f64>, a: &DMatrix<f64>) -> SpdMatrix {
    let la = m * a;
    SpdMatrix::from_raw(symmetrize(&(&la * la.transpose())))
}

/// Exact Wishart draw `L A Aᵀ Lᵀ` with `L` the Cholesky factor of `Σ`.
pub fn wishart_sample<R: Rng + ?Sized>(theta: &WishartParams, rng: &mut R) -> SpdMatrix {
    let l = theta
        .sigma
        .matrix()
        .clone()
        .cholesky()
        .expect("Σ is SPD")
        .l();
    let a = bartlett_factor(theta.p(), theta.dof, rng);
    wishart_from_factor(&l, &a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_small_dof() {
        assert!(WishartParams::new(1, SpdMatrix::identity(2)).is_err());
    }

    #[test]
    fn draws_are_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let th = WishartParams::new(4, SpdMatrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0]).unwrap()).unwrap();
        for _ in 0..100 {
            let x = wishart_sample(&th, &mut rng);
            assert!(SpdMatrix::new(x.into_inner()).is_ok());
        }
    }

    #[test]
    fn density_is_conjugation_invariant() {
        let th = WishartParams::new(5, SpdMatrix::from_diagonal(&[1.0, 2.0]).unwrap()).unwrap();
        let x = SpdMatrix::new(DMatrix::from_row_slice(2, 2, &[3.0, 0.4, 0.4, 6.0])).unwrap();
        let t = 0.6f64;
        let u = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let gx = SpdMatrix::new(&u * x.matrix() * u.transpose()).unwrap();
        let gs = SpdMatrix::new(&u * th.sigma.matrix() * u.transpose()).unwrap();
        let gth = WishartParams::new(5, gs).unwrap();
        let a = wishart_log_density(&x, &th).unwrap();
        let b = wishart_log_density(&gx, &gth).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
