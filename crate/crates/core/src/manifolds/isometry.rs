//! Isometry-group elements and their actions on points.

use nalgebra::{DMatrix, Matrix2};

use super::linalg::symmetrize;
use super::points::{
    HyperboloidPoint, ManifoldPoint, SpdMatrix, StiefelFrame, TorusPoint, UnitVector,
};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A group element acting isometrically on one of the supported manifolds.
///
/// Construct through the validating constructors; variants are public for
/// pattern matching.
#[derive(Debug, Clone, PartialEq)]
pub enum Isometry<T: Real> {
    /// `x ↦ Ux` on `S^{p-1}`, `UᵀU = I`.
    Orthogonal(DMatrix<T>),
    /// `x ↦ Lx` on `H^k(R)`, `LᵀJL = J`, `L_{kk} > 0`.
    Lorentz(DMatrix<T>),
    /// Componentwise `O(2)` action on `T^p`.
    TorusElement(Vec<Matrix2<T>>),
    /// `X ↦ UXUᵀ` on SPD matrices.
    SpdConjugation(DMatrix<T>),
    /// `X ↦ UXVᵀ` on `V_k(R^p)`.
    StiefelPair { u: DMatrix<T>, v: DMatrix<T> },
    /// `X ↦ aX`, `a > 0`; a log-Euclidean translation along the identity direction.
    SpdScaling(T),
}

fn orth_dev<T: Real>(u: &DMatrix<T>) -> T {
    let n = u.nrows();
    (u.transpose() * u - DMatrix::identity(n, n)).amax()
}

fn check_orthogonal<T: Real>(u: &DMatrix<T>, what: &str) -> Result<()> {
    if !u.is_square() || u.nrows() == 0 {
        return Err(Error::InvalidIsometry(format!("{what}: matrix must be square")));
    }
    let dev = orth_dev(u);
    if !(dev <= T::invariant_tol()) {
        return Err(Error::InvalidIsometry(format!(
            "{what}: UᵀU deviates from I by {}",
            dev.to_f64()
        )));
    }
    Ok(())
}

/// Minkowski Gram matrix `J = diag(1, …, 1, −1)`.
pub fn minkowski_gram<T: Real>(n: usize) -> DMatrix<T> {
    let mut j = DMatrix::identity(n, n);
    j[(n - 1, n - 1)] = -T::one();
    j
}

impl<T: Real> Isometry<T> {
    pub fn orthogonal(u: DMatrix<T>) -> Result<Self> {
        check_orthogonal(&u, "orthogonal")?;
        Ok(Isometry::Orthogonal(u))
    }

    pub fn lorentz(l: DMatrix<T>) -> Result<Self> {
        if !l.is_square() || l.nrows() < 2 {
            return Err(Error::InvalidIsometry("Lorentz matrix must be square, n >= 2".into()));
        }
        let n = l.nrows();
        let j = minkowski_gram::<T>(n);
        let scale = l.amax().max(T::one());
        let dev = (l.transpose() * &j * &l - &j).amax();
        if !(dev <= T::invariant_tol() * scale * scale) {
            return Err(Error::InvalidIsometry(format!(
                "LᵀJL deviates from J by {}",
                dev.to_f64()
            )));
        }
        if !(l[(n - 1, n - 1)] > T::zero()) {
            return Err(Error::InvalidIsometry("Lorentz matrix reverses time".into()));
        }
        Ok(Isometry::Lorentz(l))
    }

    pub fn torus(elements: Vec<Matrix2<T>>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyInput);
        }
        for g in &elements {
            let dev = (g.transpose() * g - Matrix2::identity()).amax();
            if !(dev <= T::invariant_tol()) {
                return Err(Error::InvalidIsometry(format!(
                    "torus factor is not in O(2) (deviation {})",
                    dev.to_f64()
                )));
            }
        }
        Ok(Isometry::TorusElement(elements))
    }

    pub fn spd_conjugation(u: DMatrix<T>) -> Result<Self> {
        check_orthogonal(&u, "conjugation")?;
        Ok(Isometry::SpdConjugation(u))
    }

    pub fn stiefel_pair(u: DMatrix<T>, v: DMatrix<T>) -> Result<Self> {
        check_orthogonal(&u, "Stiefel left factor")?;
        check_orthogonal(&v, "Stiefel right factor")?;
        Ok(Isometry::StiefelPair { u, v })
    }

    pub fn spd_scaling(a: T) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::InvalidIsometry("scaling factor must be positive".into()));
        }
        Ok(Isometry::SpdScaling(a))
    }

    /// Rotation of `S^1` by `theta`.
    pub fn rotation2(theta: T) -> Matrix2<T> {
        let (s, c) = theta.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    /// Reflection of `S^1` across the line at angle `theta / 2`.
    pub fn reflection2(theta: T) -> Matrix2<T> {
        let (s, c) = theta.sin_cos();
        Matrix2::new(c, s, s, -c)
    }

    /// The identity element acting on the same space as `self`.
    pub fn identity_like(&self) -> Self {
        match self {
            Isometry::Orthogonal(u) => Isometry::Orthogonal(DMatrix::identity(u.nrows(), u.nrows())),
            Isometry::Lorentz(l) => Isometry::Lorentz(DMatrix::identity(l.nrows(), l.nrows())),
            Isometry::TorusElement(g) => {
                Isometry::TorusElement(vec![Matrix2::identity(); g.len()])
            }
            Isometry::SpdConjugation(u) => {
                Isometry::SpdConjugation(DMatrix::identity(u.nrows(), u.nrows()))
            }
            Isometry::StiefelPair { u, v } => Isometry::StiefelPair {
                u: DMatrix::identity(u.nrows(), u.nrows()),
                v: DMatrix::identity(v.nrows(), v.nrows()),
            },
            Isometry::SpdScaling(_) => Isometry::SpdScaling(T::one()),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        use Isometry as I;
        let dims = |a: usize, b: usize| {
            if a == b {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected: a, found: b })
            }
        };
        Ok(match (self, other) {
            (I::Orthogonal(a), I::Orthogonal(b)) => {
                dims(a.nrows(), b.nrows())?;
                I::Orthogonal(a * b)
            }
            (I::Lorentz(a), I::Lorentz(b)) => {
                dims(a.nrows(), b.nrows())?;
                I::Lorentz(a * b)
            }
            (I::TorusElement(a), I::TorusElement(b)) => {
                dims(a.len(), b.len())?;
                I::TorusElement(a.iter().zip(b).map(|(x, y)| x * y).collect())
            }
            (I::SpdConjugation(a), I::SpdConjugation(b)) => {
                dims(a.nrows(), b.nrows())?;
                I::SpdConjugation(a * b)
            }
            (I::StiefelPair { u: u1, v: v1 }, I::StiefelPair { u: u2, v: v2 }) => {
                dims(u1.nrows(), u2.nrows())?;
                dims(v1.nrows(), v2.nrows())?;
                I::StiefelPair { u: u1 * u2, v: v1 * v2 }
            }
            (I::SpdScaling(a), I::SpdScaling(b)) => I::SpdScaling(*a * *b),
            _ => return Err(Error::VariantMismatch),
        })
    }

    pub fn inverse(&self) -> Self {
        match self {
            Isometry::Orthogonal(u) => Isometry::Orthogonal(u.transpose()),
            Isometry::Lorentz(l) => {
                let j = minkowski_gram::<T>(l.nrows());
                Isometry::Lorentz(&j * l.transpose() * &j)
            }
            Isometry::TorusElement(g) => {
                Isometry::TorusElement(g.iter().map(|m| m.transpose()).collect())
            }
            Isometry::SpdConjugation(u) => Isometry::SpdConjugation(u.transpose()),
            Isometry::StiefelPair { u, v } => Isometry::StiefelPair {
                u: u.transpose(),
                v: v.transpose(),
            },
            Isometry::SpdScaling(a) => Isometry::SpdScaling(T::one() / *a),
        }
    }

    pub fn apply_sphere(&self, x: &UnitVector<T>) -> Result<UnitVector<T>> {
        match self {
            Isometry::Orthogonal(u) => {
                if u.nrows() != x.ambient_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: u.nrows(),
                        found: x.ambient_dim(),
                    });
                }
                UnitVector::normalize(u * x.coords())
            }
            _ => Err(Error::VariantMismatch),
        }
    }

    pub fn apply_hyperboloid(&self, x: &HyperboloidPoint<T>) -> Result<HyperboloidPoint<T>> {
        match self {
            Isometry::Lorentz(l) => {
                if l.nrows() != x.coords().len() {
                    return Err(Error::DimensionMismatch {
                        expected: l.nrows(),
                        found: x.coords().len(),
                    });
                }
                HyperboloidPoint::normalize_timelike(l * x.coords(), x.radius())
            }
            _ => Err(Error::VariantMismatch),
        }
    }

    pub fn apply_torus(&self, x: &TorusPoint<T>) -> Result<TorusPoint<T>> {
        match self {
            Isometry::TorusElement(g) => {
                if g.len() != x.p() {
                    return Err(Error::DimensionMismatch {
                        expected: g.len(),
                        found: x.p(),
                    });
                }
                let comps = g
                    .iter()
                    .zip(x.components())
                    .map(|(m, c)| {
                        let v = m * nalgebra::Vector2::new(c.coords()[0], c.coords()[1]);
                        UnitVector::normalize(nalgebra::DVector::from_column_slice(v.as_slice()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                TorusPoint::new(comps)
            }
            _ => Err(Error::VariantMismatch),
        }
    }

    pub fn apply_spd(&self, x: &SpdMatrix<T>) -> Result<SpdMatrix<T>> {
        match self {
            Isometry::SpdConjugation(u) => {
                if u.nrows() != x.p() {
                    return Err(Error::DimensionMismatch {
                        expected: u.nrows(),
                        found: x.p(),
                    });
                }
                Ok(SpdMatrix::from_raw(symmetrize(&(u * x.matrix() * u.transpose()))))
            }
            Isometry::SpdScaling(a) => Ok(SpdMatrix::from_raw(x.matrix() * *a)),
            _ => Err(Error::VariantMismatch),
        }
    }

    pub fn apply_stiefel(&self, x: &StiefelFrame<T>) -> Result<StiefelFrame<T>> {
        match self {
            Isometry::StiefelPair { u, v } => {
                let (p, k) = x.shape();
                if u.nrows() != p || v.nrows() != k {
                    return Err(Error::DimensionMismatch {
                        expected: u.nrows() * v.nrows(),
                        found: p * k,
                    });
                }
                Ok(StiefelFrame::from_raw(u * x.matrix() * v.transpose()))
            }
            _ => Err(Error::VariantMismatch),
        }
    }
}

/// Evaluates the action `g · x`.
pub fn apply_isometry<T: Real>(g: &Isometry<T>, x: &ManifoldPoint<T>) -> Result<ManifoldPoint<T>> {
    Ok(match x {
        ManifoldPoint::Sphere(p) => g.apply_sphere(p)?.into(),
        ManifoldPoint::Hyperboloid(p) => g.apply_hyperboloid(p)?.into(),
        ManifoldPoint::Torus(p) => g.apply_torus(p)?.into(),
        ManifoldPoint::Spd(p) => g.apply_spd(p)?.into(),
        ManifoldPoint::Stiefel(p) => g.apply_stiefel(p)?.into(),
    })
}
