use super::linalg::matrix_log;
use super::points::{
    minkowski, HyperboloidPoint, ManifoldKind, ManifoldPoint, SpdMatrix, StiefelFrame,
    TorusPoint, UnitVector,
};
use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn clamp<T: Real>(x: T, lo: T, hi: T) -> T {
    x.max(lo).min(hi)
}

/// Great-circle distance `arccos⟨x, y⟩`, in `[0, π]`.
pub fn sphere_distance<T: Real>(x: &UnitVector<T>, y: &UnitVector<T>) -> Result<T> {
    check_len(x.ambient_dim(), y.ambient_dim())?;
    Ok(clamp(x.dot(y), -T::one(), T::one()).acos())
}

/// Chordal distance `‖x − y‖`, in `[0, 2]`.
pub fn sphere_extrinsic_distance<T: Real>(x: &UnitVector<T>, y: &UnitVector<T>) -> Result<T> {
    check_len(x.ambient_dim(), y.ambient_dim())?;
    Ok((x.coords() - y.coords()).norm())
}

/// `R · arcosh(−(x, y)/R²)`.
pub fn hyperboloid_distance<T: Real>(
    x: &HyperboloidPoint<T>,
    y: &HyperboloidPoint<T>,
) -> Result<T> {
    check_len(x.coords().len(), y.coords().len())?;
    let (rx, ry) = (x.radius(), y.radius());
    if (rx - ry).abs() > T::invariant_tol() * rx.max(ry) {
        return Err(Error::RadiusMismatch(rx.to_f64(), ry.to_f64()));
    }
    let arg = -minkowski(x.coords(), y.coords()) / (rx * rx);
    Ok(rx * arg.max(T::one()).acosh())
}

/// `‖log X − log Y‖_F`.
pub fn log_euclidean_distance<T: Real>(x: &SpdMatrix<T>, y: &SpdMatrix<T>) -> Result<T> {
    check_len(x.p(), y.p())?;
    Ok((matrix_log(x)? - matrix_log(y)?).norm())
}

/// Product distance on `T^p`: square root of the summed squared angular distances.
pub fn torus_distance<T: Real>(x: &TorusPoint<T>, y: &TorusPoint<T>) -> Result<T> {
    check_len(x.p(), y.p())?;
    let mut s = T::zero();
    for (a, b) in x.components().iter().zip(y.components()) {
        let d = sphere_distance(a, b)?;
        s += d * d;
    }
    Ok(s.sqrt())
}

/// Frobenius distance `‖X − Y‖_F` between Stiefel frames.
pub fn stiefel_extrinsic_distance<T: Real>(
    x: &StiefelFrame<T>,
    y: &StiefelFrame<T>,
) -> Result<T> {
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch {
            expected: x.shape().0 * x.shape().1,
            found: y.shape().0 * y.shape().1,
        });
    }
    Ok((x.matrix() - y.matrix()).norm())
}

/// Distance functions available for Fréchet means and losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    SphereGeodesic,
    SphereChordal,
    Hyperbolic,
    LogEuclidean,
    FlatTorus,
    StiefelFrobenius,
}

impl Metric {
    /// The intrinsic (or, for Stiefel, the Frobenius) metric of a manifold.
    pub fn default_for(kind: ManifoldKind) -> Self {
        match kind {
            ManifoldKind::Sphere => Metric::SphereGeodesic,
            ManifoldKind::Hyperboloid => Metric::Hyperbolic,
            ManifoldKind::Torus => Metric::FlatTorus,
            ManifoldKind::Spd => Metric::LogEuclidean,
            ManifoldKind::Stiefel => Metric::StiefelFrobenius,
        }
    }

    pub fn manifold(self) -> ManifoldKind {
        match self {
            Metric::SphereGeodesic | Metric::SphereChordal => ManifoldKind::Sphere,
            Metric::Hyperbolic => ManifoldKind::Hyperboloid,
            Metric::LogEuclidean => ManifoldKind::Spd,
            Metric::FlatTorus => ManifoldKind::Torus,
            Metric::StiefelFrobenius => ManifoldKind::Stiefel,
        }
    }

    pub fn distance<T: Real>(self, x: &ManifoldPoint<T>, y: &ManifoldPoint<T>) -> Result<T> {
        use ManifoldPoint as P;
        match (self, x, y) {
            (Metric::SphereGeodesic, P::Sphere(a), P::Sphere(b)) => sphere_distance(a, b),
            (Metric::SphereChordal, P::Sphere(a), P::Sphere(b)) => {
                sphere_extrinsic_distance(a, b)
            }
            (Metric::Hyperbolic, P::Hyperboloid(a), P::Hyperboloid(b)) => {
                hyperboloid_distance(a, b)
            }
            (Metric::LogEuclidean, P::Spd(a), P::Spd(b)) => log_euclidean_distance(a, b),
            (Metric::FlatTorus, P::Torus(a), P::Torus(b)) => torus_distance(a, b),
            (Metric::StiefelFrobenius, P::Stiefel(a), P::Stiefel(b)) => {
                stiefel_extrinsic_distance(a, b)
            }
            _ => Err(Error::VariantMismatch),
        }
    }
}
