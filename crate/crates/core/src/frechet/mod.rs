//! Sample and population Fréchet means.

mod circle;

pub use circle::{circle_frechet_mean, circle_objective};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::distributions::{GibbsConfig, ModelParams};
use crate::error::{Error, Result};
use crate::manifolds::{
    matrix_exp, matrix_log, minkowski, polar_factor, HyperboloidPoint, ManifoldPoint, Metric,
    SpdMatrix, StiefelFrame, TorusPoint, UnitVector,
};
use crate::scalar::Real;

/// Default number of draws behind a Monte-Carlo population mean.
pub const DEFAULT_POPULATION_DRAWS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrechetSolverConfig<T: Real> {
    pub max_iters: usize,
    /// Stop once the Riemannian step norm falls below this.
    pub tol: T,
    /// Fraction of the Riemannian gradient step taken per iteration, in `(0, 1]`.
    pub step_size: T,
}

impl<T: Real> Default for FrechetSolverConfig<T> {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: T::lit(1e-10).max(T::default_epsilon() * T::lit(64.0)),
            step_size: T::one(),
        }
    }
}

impl<T: Real> FrechetSolverConfig<T> {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.tol > T::zero()) {
            return Err(Error::InvalidParameter("solver needs max_iters >= 1 and tol > 0".into()));
        }
        if !(self.step_size > T::zero()) || self.step_size > T::one() {
            return Err(Error::InvalidParameter("step size must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrechetResult<T: Real> {
    pub mean: ManifoldPoint<T>,
    /// `(1/n) Σ d(xᵢ, mean)²`.
    pub objective: T,
    pub converged: bool,
    pub iterations: usize,
    /// Number of points averaged (draw count for population means).
    pub n_points: usize,
}

/// `(1/n) Σ d(xᵢ, m)²`.
pub fn frechet_objective<T: Real>(points: &[ManifoldPoint<T>], m: &ManifoldPoint<T>, metric: Metric) -> Result<T> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut s = T::zero();
    for x in points {
        let d = metric.distance(x, m)?;
        s += d * d;
    }
    Ok(s / T::lit(points.len() as f64))
}

macro_rules! collect_variant {
    ($points:expr, $variant:ident) => {
        $points
            .iter()
            .map(|p| match p {
                ManifoldPoint::$variant(x) => Ok(x),
                _ => Err(Error::VariantMismatch),
            })
            .collect::<Result<Vec<_>>>()
    };
}

/// Sample Fréchet mean under `metric`.
///
/// Closed forms for the log-Euclidean, chordal and Stiefel-Frobenius metrics, the
/// exact circle algorithm per factor on the torus, and Karcher iterations on the
/// sphere and hyperboloid started at the normalized extrinsic average. The
/// iterative solvers return a local minimizer; non-convergence is reported in the
/// flag rather than as an error.
pub fn sample_frechet_mean<T: Real>(
    points: &[ManifoldPoint<T>],
    metric: Metric,
    cfg: &FrechetSolverConfig<T>,
) -> Result<FrechetResult<T>> {
    cfg.validate()?;
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (mean, converged, iterations): (ManifoldPoint<T>, bool, usize) = match metric {
        Metric::SphereGeodesic => {
            let xs = collect_variant!(points, Sphere)?;
            let (m, c, it) = karcher_sphere(&xs, cfg)?;
            (m.into(), c, it)
        }
        Metric::SphereChordal => {
            let xs = collect_variant!(points, Sphere)?;
            (extrinsic_sphere_mean(&xs)?.into(), true, 0)
        }
        Metric::Hyperbolic => {
            let xs = collect_variant!(points, Hyperboloid)?;
            let (m, c, it) = karcher_hyperboloid(&xs, cfg)?;
            (m.into(), c, it)
        }
        Metric::LogEuclidean => {
            let xs = collect_variant!(points, Spd)?;
            (log_euclidean_mean(&xs)?.into(), true, 0)
        }
        Metric::FlatTorus => {
            let xs = collect_variant!(points, Torus)?;
            (torus_mean(&xs)?.into(), true, 0)
        }
        Metric::StiefelFrobenius => {
            let xs = collect_variant!(points, Stiefel)?;
            (stiefel_extrinsic_mean(&xs)?.into(), true, 0)
        }
    };
    let objective = frechet_objective(points, &mean, metric)?;
    Ok(FrechetResult {
        mean,
        objective,
        converged,
        iterations,
        n_points: points.len(),
    })
}

fn check_same_len(lens: impl Iterator<Item = usize>) -> Result<usize> {
    let mut first = None;
    for l in lens {
        match first {
            None => first = Some(l),
            Some(f) if f != l => return Err(Error::DimensionMismatch { expected: f, found: l }),
            _ => {}
        }
    }
    first.ok_or(Error::EmptyInput)
}

fn extrinsic_sphere_mean<T: Real>(xs: &[&UnitVector<T>]) -> Result<UnitVector<T>> {
    let d = check_same_len(xs.iter().map(|x| x.ambient_dim()))?;
    let mut s = DVector::zeros(d);
    for x in xs {
        s += x.coords();
    }
    UnitVector::normalize(s).map_err(|_| Error::UndefinedEstimate("extrinsic sphere mean of points summing to zero".into()))
}

/// `Log_m(x)` on the unit sphere, as an ambient tangent vector at `m`.
pub fn sphere_log<T: Real>(m: &DVector<T>, x: &DVector<T>) -> DVector<T> {
    let c = m.dot(x).max(-T::one()).min(T::one());
    let v = x - m * c;
    let nv = v.norm();
    if nv <= T::default_epsilon() {
        return DVector::zeros(m.len());
    }
    // atan2 keeps the angle accurate near both c = 1 and c = −1.
    let theta = nv.atan2(c);
    v * (theta / nv)
}

/// `Exp_m(v)` on the unit sphere.
pub fn sphere_exp<T: Real>(m: &DVector<T>, v: &DVector<T>) -> DVector<T> {
    let t = v.norm();
    if t <= T::default_epsilon() {
        return m + v;
    }
    m * t.cos() + v * (t.sin() / t)
}

fn karcher_sphere<T: Real>(xs: &[&UnitVector<T>], cfg: &FrechetSolverConfig<T>) -> Result<(UnitVector<T>, bool, usize)> {
    let start = match extrinsic_sphere_mean(xs) {
        Ok(m) => m,
        Err(_) => xs[0].clone(),
    };
    let mut m = start.into_inner();
    let inv_n = T::one() / T::lit(xs.len() as f64);
    for it in 1..=cfg.max_iters {
        let mut g = DVector::zeros(m.len());
        for x in xs {
            g += sphere_log(&m, x.coords());
        }
        g *= inv_n * cfg.step_size;
        let step = g.norm();
        m = sphere_exp(&m, &g);
        let nm = m.norm();
        m /= nm;
        if step < cfg.tol {
            return Ok((UnitVector::normalize(m)?, true, it));
        }
    }
    Ok((UnitVector::normalize(m)?, false, cfg.max_iters))
}

/// `Log_m(x)` on `H^k(R)`, as an ambient tangent vector at `m`.
pub fn hyperboloid_log<T: Real>(m: &DVector<T>, x: &DVector<T>, radius: T) -> DVector<T> {
    let r2 = radius * radius;
    let c = (-minkowski(m, x) / r2).max(T::one());
    let d = c.acosh();
    let v = x / radius - m * (c / radius);
    if d <= T::default_epsilon() {
        return v * radius;
    }
    v * (radius * d / d.sinh())
}

/// `Exp_m(w)` on `H^k(R)`.
pub fn hyperboloid_exp<T: Real>(m: &DVector<T>, w: &DVector<T>, radius: T) -> DVector<T> {
    let q = minkowski(w, w).max(T::zero());
    let s = q.sqrt();
    if s <= T::default_epsilon() * radius {
        return m + w;
    }
    let t = s / radius;
    m * t.cosh() + w * (radius * t.sinh() / s)
}

fn karcher_hyperboloid<T: Real>(
    xs: &[&HyperboloidPoint<T>],
    cfg: &FrechetSolverConfig<T>,
) -> Result<(HyperboloidPoint<T>, bool, usize)> {
    let d = check_same_len(xs.iter().map(|x| x.coords().len()))?;
    let radius = xs[0].radius();
    if let Some(x) = xs.iter().find(|x| (x.radius() - radius).abs() > T::invariant_tol() * radius) {
        return Err(Error::RadiusMismatch(radius.to_f64(), x.radius().to_f64()));
    }
    let mut s = DVector::zeros(d);
    for x in xs {
        s += x.coords();
    }
    let mut m = HyperboloidPoint::normalize_timelike(s, radius)?.coords().clone();
    let inv_n = T::one() / T::lit(xs.len() as f64);
    for it in 1..=cfg.max_iters {
        let mut g = DVector::zeros(d);
        for x in xs {
            g += hyperboloid_log(&m, x.coords(), radius);
        }
        g *= inv_n * cfg.step_size;
        let step = minkowski(&g, &g).max(T::zero()).sqrt();
        let next = hyperboloid_exp(&m, &g, radius);
        m = HyperboloidPoint::normalize_timelike(next, radius)?.coords().clone();
        if step < cfg.tol * radius.max(T::one()) {
            return Ok((HyperboloidPoint::normalize_timelike(m, radius)?, true, it));
        }
    }
    Ok((HyperboloidPoint::normalize_timelike(m, radius)?, false, cfg.max_iters))
}

/// `exp((1/n) Σ log Xᵢ)`.
pub fn log_euclidean_mean<T: Real>(xs: &[&SpdMatrix<T>]) -> Result<SpdMatrix<T>> {
    let p = check_same_len(xs.iter().map(|x| x.p()))?;
    let mut s = DMatrix::zeros(p, p);
    for x in xs {
        s += matrix_log(x)?;
    }
    s /= T::lit(xs.len() as f64);
    matrix_exp(&s)
}

fn torus_mean<T: Real>(xs: &[&TorusPoint<T>]) -> Result<TorusPoint<T>> {
    let p = check_same_len(xs.iter().map(|x| x.p()))?;
    let angles: Vec<T> = (0..p)
        .map(|i| {
            let a: Vec<T> = xs.iter().map(|x| x.component(i).angle()).collect();
            circle_frechet_mean(&a)
        })
        .collect();
    Ok(TorusPoint::from_angles(&angles))
}

fn stiefel_extrinsic_mean<T: Real>(xs: &[&StiefelFrame<T>]) -> Result<StiefelFrame<T>> {
    let (p, k) = xs[0].shape();
    if let Some(x) = xs.iter().find(|x| x.shape() != (p, k)) {
        return Err(Error::DimensionMismatch {
            expected: p * k,
            found: x.shape().0 * x.shape().1,
        });
    }
    let mut s = DMatrix::zeros(p, k);
    for x in xs {
        s += x.matrix();
    }
    s /= T::lit(xs.len() as f64);
    StiefelFrame::new(polar_factor(&s)?)
}

/// Fréchet mean of `n_draws` fresh samples from `θ`.
pub fn population_frechet_mean_mc<R: Rng + ?Sized>(
    theta: &ModelParams,
    metric: Metric,
    n_draws: usize,
    rng: &mut R,
    cfg: &FrechetSolverConfig<f64>,
) -> Result<FrechetResult<f64>> {
    if metric.manifold() != theta.manifold() {
        return Err(Error::VariantMismatch);
    }
    if n_draws == 0 {
        return Err(Error::EmptyInput);
    }
    let draws = theta.sample_n(n_draws, GibbsConfig { thin: 10, ..GibbsConfig::default() }, rng)?;
    sample_frechet_mean(&draws, metric, cfg)
}
