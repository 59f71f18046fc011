//! Scalar abstraction for the geometry layer.
//!
//! Point types, distances, matrix functions and isometries are generic over
//! [`Real`], so the same code runs in `f32` or `f64`. Samplers and estimators
//! are written against the `f64` aliases exported from the crate root.

use nalgebra::RealField;

pub trait Real: RealField + Copy {
    /// Tolerance used when validating manifold invariants.
    fn invariant_tol() -> Self;
    /// Relative eigenvalue floor below which a matrix is treated as singular.
    fn spd_rel_tol() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    fn to_f64(self) -> f64;
}

impl Real for f64 {
    fn invariant_tol() -> Self {
        1e-9
    }
    fn spd_rel_tol() -> Self {
        1e-12
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    fn invariant_tol() -> Self {
        1e-4
    }
    fn spd_rel_tol() -> Self {
        1e-6
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}
