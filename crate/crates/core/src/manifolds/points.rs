//! Point types for the supported homogeneous spaces.
//!
//! Every constructor validates the manifold invariant at [`Real::invariant_tol`]
//! and returns an error rather than silently projecting.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point of the unit sphere `S^k`, stored as a unit vector in `R^{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector<T: Real> {
    coords: DVector<T>,
}

impl<T: Real> UnitVector<T> {
    pub fn new(coords: DVector<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        let norm = coords.norm();
        if (norm - T::one()).abs() > T::invariant_tol() {
            return Err(Error::InvalidPoint(format!(
                "unit vector has norm {}",
                norm.to_f64()
            )));
        }
        Ok(Self { coords })
    }

    /// Normalizes `v`; fails when `v` is (numerically) zero.
    pub fn normalize(v: DVector<T>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > T::lit(1e-300).max(T::default_epsilon() * T::default_epsilon())) {
            return Err(Error::InvalidPoint("cannot normalize a zero vector".into()));
        }
        Ok(Self { coords: v / norm })
    }

    pub fn from_slice(xs: &[T]) -> Result<Self> {
        Self::new(DVector::from_column_slice(xs))
    }

    /// The `i`-th standard basis vector of `R^{ambient}`.
    pub fn basis(ambient: usize, i: usize) -> Self {
        let mut v = DVector::zeros(ambient);
        v[i] = T::one();
        Self { coords: v }
    }

    /// Point of `S^1` at the given angle from `(1, 0)`.
    pub fn from_angle(theta: T) -> Self {
        Self {
            coords: DVector::from_column_slice(&[theta.cos(), theta.sin()]),
        }
    }

    /// Angle in `[0, 2π)` of a point of `S^1`.
    pub fn angle(&self) -> T {
        debug_assert_eq!(self.coords.len(), 2);
        wrap_angle(self.coords[1].atan2(self.coords[0]))
    }

    pub fn coords(&self) -> &DVector<T> {
        &self.coords
    }

    pub fn into_inner(self) -> DVector<T> {
        self.coords
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    /// Intrinsic dimension `k` of `S^k`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn dot(&self, other: &Self) -> T {
        self.coords.dot(&other.coords)
    }

    pub fn neg(&self) -> Self {
        Self {
            coords: -&self.coords,
        }
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::two_pi();
    let mut t = theta % two_pi;
    if t < T::zero() {
        t += two_pi;
    }
    if t >= two_pi {
        t -= two_pi;
    }
    t
}

/// Minkowski pseudo inner product with the time coordinate last.
pub fn minkowski<T: Real>(a: &DVector<T>, b: &DVector<T>) -> T {
    let k = a.len() - 1;
    let mut s = T::zero();
    for i in 0..k {
        s += a[i] * b[i];
    }
    s - a[k] * b[k]
}

/// A point of the hyperboloid `H^k(R) = {x : (x,x) = -R², x_{k+1} > 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperboloidPoint<T: Real> {
    coords: DVector<T>,
    radius: T,
}

impl<T: Real> HyperboloidPoint<T> {
    pub fn new(coords: DVector<T>, radius: T) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidPoint("hyperboloid needs k >= 1".into()));
        }
        if !(radius > T::zero()) {
            return Err(Error::InvalidParameter("radius must be positive".into()));
        }
        let k = coords.len() - 1;
        if !(coords[k] > T::zero()) {
            return Err(Error::InvalidPoint(
                "time coordinate must be positive".into(),
            ));
        }
        let q = minkowski(&coords, &coords);
        let r2 = radius * radius;
        let scale = r2.max(coords[k] * coords[k]);
        if (q + r2).abs() > T::invariant_tol() * scale {
            return Err(Error::InvalidPoint(format!(
                "Minkowski norm {} differs from -R^2 = {}",
                q.to_f64(),
                (-r2).to_f64()
            )));
        }
        Ok(Self { coords, radius })
    }

    /// Lifts spatial coordinates onto the upper sheet.
    pub fn from_spatial(spatial: &[T], radius: T) -> Result<Self> {
        let s2 = spatial.iter().fold(T::zero(), |acc, &x| acc + x * x);
        let mut v: Vec<T> = spatial.to_vec();
        v.push((radius * radius + s2).sqrt());
        Self::new(DVector::from_vec(v), radius)
    }

    /// The apex `(0, …, 0, R)`.
    pub fn apex(k: usize, radius: T) -> Self {
        let mut v = DVector::zeros(k + 1);
        v[k] = radius;
        Self { coords: v, radius }
    }

    /// Scales an arbitrary future-timelike vector onto the sheet of the given radius.
    pub fn normalize_timelike(v: DVector<T>, radius: T) -> Result<Self> {
        let q = minkowski(&v, &v);
        let k = v.len() - 1;
        if !(q < T::zero()) || !(v[k] > T::zero()) {
            return Err(Error::InvalidPoint(
                "vector is not future timelike".into(),
            ));
        }
        let s = radius / (-q).sqrt();
        Ok(Self {
            coords: v * s,
            radius,
        })
    }

    pub fn coords(&self) -> &DVector<T> {
        &self.coords
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }
}

/// A point of the flat torus `T^p`, stored as `p` unit vectors of `S^1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint<T: Real> {
    components: Vec<UnitVector<T>>,
}

impl<T: Real> TorusPoint<T> {
    pub fn new(components: Vec<UnitVector<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(c) = components.iter().find(|c| c.ambient_dim() != 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: c.ambient_dim(),
            });
        }
        Ok(Self { components })
    }

    pub fn from_angles(angles: &[T]) -> Self {
        Self {
            components: angles.iter().map(|&a| UnitVector::from_angle(a)).collect(),
        }
    }

    pub fn angles(&self) -> Vec<T> {
        self.components.iter().map(|c| c.angle()).collect()
    }

    pub fn components(&self) -> &[UnitVector<T>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &UnitVector<T> {
        &self.components[i]
    }

    pub fn set_component(&mut self, i: usize, c: UnitVector<T>) {
        debug_assert_eq!(c.ambient_dim(), 2);
        self.components[i] = c;
    }

    /// Number of circle factors.
    pub fn p(&self) -> usize {
        self.components.len()
    }
}

/// A symmetric positive definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix<T: Real> {
    m: DMatrix<T>,
}

impl<T: Real> SpdMatrix<T> {
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidPoint("SPD matrix must be square".into()));
        }
        let scale = m.amax().max(T::one());
        let asym = (&m - m.transpose()).amax();
        if asym > T::invariant_tol() * scale {
            return Err(Error::InvalidPoint(format!(
                "matrix is not symmetric (asymmetry {})",
                asym.to_f64()
            )));
        }
        let sym = (&m + m.transpose()) * T::lit(0.5);
        check_spd_eigenvalues(&SymmetricEigen::new(sym.clone()).eigenvalues)?;
        Ok(Self { m: sym })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            m: DMatrix::identity(p, p),
        }
    }

    pub fn from_diagonal(d: &[T]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.m
    }

    pub fn into_inner(self) -> DMatrix<T> {
        self.m
    }

    pub fn p(&self) -> usize {
        self.m.nrows()
    }

    /// Eigenvalues sorted in descending order.
    pub fn sorted_eigenvalues(&self) -> Vec<T> {
        let mut ev: Vec<T> = SymmetricEigen::new(self.m.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    pub(crate) fn from_raw(m: DMatrix<T>) -> Self {
        Self { m }
    }
}

pub(crate) fn check_spd_eigenvalues<T: Real>(ev: &DVector<T>) -> Result<()> {
    let max = ev.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let min = ev
        .iter()
        .copied()
        .fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b));
    if !(min > T::spd_rel_tol() * max) || !(max > T::zero()) {
        return Err(Error::NotSpd {
            min_eigenvalue: min.to_f64(),
        });
    }
    Ok(())
}

/// A point of the Stiefel manifold `V_k(R^p)`: a `p × k` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelFrame<T: Real> {
    m: DMatrix<T>,
}

impl<T: Real> StiefelFrame<T> {
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        let (p, k) = m.shape();
        if k == 0 || k > p {
            return Err(Error::InvalidPoint(format!(
                "Stiefel frame shape {p}x{k} needs 1 <= k <= p"
            )));
        }
        let gram = m.transpose() * &m;
        let dev = (gram - DMatrix::identity(k, k)).amax();
        if dev > T::invariant_tol() {
            return Err(Error::InvalidPoint(format!(
                "columns not orthonormal (deviation {})",
                dev.to_f64()
            )));
        }
        Ok(Self { m })
    }

    /// `[I_k, 0]^T`.
    pub fn canonical(p: usize, k: usize) -> Self {
        Self {
            m: DMatrix::identity(p, k),
        }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.m
    }

    pub fn into_inner(self) -> DMatrix<T> {
        self.m
    }

    pub fn shape(&self) -> (usize, usize) {
        self.m.shape()
    }

    pub(crate) fn from_raw(m: DMatrix<T>) -> Self {
        Self { m }
    }
}

/// Tag for the manifold of a [`ManifoldPoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    Sphere,
    Hyperboloid,
    Torus,
    Spd,
    Stiefel,
}

impl ManifoldKind {
    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::Sphere => "sphere",
            ManifoldKind::Hyperboloid => "hyperboloid",
            ManifoldKind::Torus => "torus",
            ManifoldKind::Spd => "spd",
            ManifoldKind::Stiefel => "stiefel",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "sphere" => ManifoldKind::Sphere,
            "hyperboloid" => ManifoldKind::Hyperboloid,
            "torus" => ManifoldKind::Torus,
            "spd" => ManifoldKind::Spd,
            "stiefel" => ManifoldKind::Stiefel,
            other => return Err(Error::Config(format!("unknown manifold '{other}'"))),
        })
    }
}

/// A point of any supported manifold.
#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldPoint<T: Real> {
    Sphere(UnitVector<T>),
    Hyperboloid(HyperboloidPoint<T>),
    Torus(TorusPoint<T>),
    Spd(SpdMatrix<T>),
    Stiefel(StiefelFrame<T>),
}

impl<T: Real> ManifoldPoint<T> {
    pub fn kind(&self) -> ManifoldKind {
        match self {
            ManifoldPoint::Sphere(_) => ManifoldKind::Sphere,
            ManifoldPoint::Hyperboloid(_) => ManifoldKind::Hyperboloid,
            ManifoldPoint::Torus(_) => ManifoldKind::Torus,
            ManifoldPoint::Spd(_) => ManifoldKind::Spd,
            ManifoldPoint::Stiefel(_) => ManifoldKind::Stiefel,
        }
    }

    pub fn as_sphere(&self) -> Option<&UnitVector<T>> {
        match self {
            ManifoldPoint::Sphere(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_hyperboloid(&self) -> Option<&HyperboloidPoint<T>> {
        match self {
            ManifoldPoint::Hyperboloid(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_torus(&self) -> Option<&TorusPoint<T>> {
        match self {
            ManifoldPoint::Torus(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_spd(&self) -> Option<&SpdMatrix<T>> {
        match self {
            ManifoldPoint::Spd(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_stiefel(&self) -> Option<&StiefelFrame<T>> {
        match self {
            ManifoldPoint::Stiefel(x) => Some(x),
            _ => None,
        }
    }
}

impl<T: Real> From<UnitVector<T>> for ManifoldPoint<T> {
    fn from(x: UnitVector<T>) -> Self {
        ManifoldPoint::Sphere(x)
    }
}
impl<T: Real> From<HyperboloidPoint<T>> for ManifoldPoint<T> {
    fn from(x: HyperboloidPoint<T>) -> Self {
        ManifoldPoint::Hyperboloid(x)
    }
}
impl<T: Real> From<TorusPoint<T>> for ManifoldPoint<T> {
    fn from(x: TorusPoint<T>) -> Self {
        ManifoldPoint::Torus(x)
    }
}
impl<T: Real> From<SpdMatrix<T>> for ManifoldPoint<T> {
    fn from(x: SpdMatrix<T>) -> Self {
        ManifoldPoint::Spd(x)
    }
}
impl<T: Real> From<StiefelFrame<T>> for ManifoldPoint<T> {
    fn from(x: StiefelFrame<T>) -> Self {
        ManifoldPoint::Stiefel(x)
    }
}
