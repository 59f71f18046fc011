//! Multivariate circular model on `T^p` with sine interactions.
//!
//! Log density `Σᵢ κᵢ cos(φᵢ) + Σ_{i<j} λᵢⱼ sin(φᵢ) sin(φⱼ)` in the offsets
//! `φᵢ = ∠xᵢ − ∠μᵢ`.

use nalgebra::{DVector, Vector2};
use rand::Rng;

use super::special::log_bessel_i0;
use super::vmf::{sample_vmf_cosine, VmfParams};
use crate::error::{Error, Result};
use crate::{TorusPoint, UnitVector};

/// Largest `p` for which the normalizer quadrature is offered.
pub const MAX_NORMALIZER_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct TorusModelParams {
    pub mu: TorusPoint,
    pub kappa: Vec<f64>,
    /// `λᵢⱼ` for `i < j` in row-major upper-triangle order.
    pub lambda: Vec<f64>,
}

/// Position of `λᵢⱼ` (`i < j`) in the packed upper triangle.
pub fn lambda_index(i: usize, j: usize, p: usize) -> usize {
    debug_assert!(i < j && j < p);
    i * p - i * (i + 1) / 2 + (j - i - 1)
}

pub fn n_pairs(p: usize) -> usize {
    p * (p.saturating_sub(1)) / 2
}

impl TorusModelParams {
    pub fn new(mu: TorusPoint, kappa: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        let p = mu.p();
        if kappa.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: kappa.len(),
            });
        }
        if lambda.len() != n_pairs(p) {
            return Err(Error::DimensionMismatch {
                expected: n_pairs(p),
                found: lambda.len(),
            });
        }
        if let Some(k) = kappa.iter().find(|k| !(**k > 0.0) || !k.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "torus kappa entries must be positive, got {k}"
            )));
        }
        if lambda.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidParameter("torus lambda must be finite".into()));
        }
        Ok(Self { mu, kappa, lambda })
    }

    /// Homogeneous parameters with every `κᵢ = kappa` and every `λᵢⱼ = lambda`.
    pub fn homogeneous(mu: TorusPoint, kappa: f64, lambda: f64) -> Result<Self> {
        let p = mu.p();
        Self::new(mu, vec![kappa; p], vec![lambda; n_pairs(p)])
    }

    pub fn p(&self) -> usize {
        self.mu.p()
    }

    /// Symmetric accessor; zero on the diagonal.
    pub fn lambda_ij(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.lambda[lambda_index(i, j, self.p())],
            std::cmp::Ordering::Greater => self.lambda[lambda_index(j, i, self.p())],
            std::cmp::Ordering::Equal => 0.0,
        }
    }
}

fn check_dim(x: &TorusPoint, theta: &TorusModelParams) -> Result<()> {
    if x.p() != theta.p() {
        return Err(Error::DimensionMismatch {
            expected: theta.p(),
            found: x.p(),
        });
    }
    Ok(())
}

/// `Rμ = (−μ₂, μ₁)`, the quarter turn of a unit 2-vector.
fn quarter_turn(u: &UnitVector) -> Vector2<f64> {
    Vector2::new(-u.coords()[1], u.coords()[0])
}

fn v2(u: &UnitVector) -> Vector2<f64> {
    Vector2::new(u.coords()[0], u.coords()[1])
}

/// Unnormalized log density in the angle form.
pub fn torus_log_density_unnormalized(x: &TorusPoint, theta: &TorusModelParams) -> Result<f64> {
    check_dim(x, theta)?;
    let p = theta.p();
    let phi: Vec<f64> = x
        .angles()
        .iter()
        .zip(theta.mu.angles())
        .map(|(a, m)| a - m)
        .collect();
    let mut s = 0.0;
    for i in 0..p {
        s += theta.kappa[i] * phi[i].cos();
        for j in (i + 1)..p {
            s += theta.lambda[lambda_index(i, j, p)] * phi[i].sin() * phi[j].sin();
        }
    }
    Ok(s)
}

/// Unnormalized log density in the matrix form `Σ κᵢ xᵢᵀμᵢ + Σ λᵢⱼ xᵢᵀ Rμᵢ (Rμⱼ)ᵀ xⱼ`.
pub fn torus_log_density_matrix_form(x: &TorusPoint, theta: &TorusModelParams) -> Result<f64> {
    check_dim(x, theta)?;
    let p = theta.p();
    let sines: Vec<f64> = (0..p)
        .map(|i| quarter_turn(theta.mu.component(i)).dot(&v2(x.component(i))))
        .collect();
    let mut s = 0.0;
    for i in 0..p {
        s += theta.kappa[i] * x.component(i).dot(theta.mu.component(i));
        for j in (i + 1)..p {
            s += theta.lambda[lambda_index(i, j, p)] * sines[i] * sines[j];
        }
    }
    Ok(s)
}

/// Normalized log density; `p ≤ 4`.
pub fn torus_log_density(x: &TorusPoint, theta: &TorusModelParams) -> Result<f64> {
    Ok(torus_log_density_matrix_form(x, theta)? - torus_log_normalizer(&theta.kappa, &theta.lambda)?)
}

/// Full conditional of one circle factor.
#[derive(Debug, Clone, PartialEq)]
pub enum CircleConditional {
    Vmf(VmfParams),
    /// `ηᵢ = 0`: the conditional is uniform.
    Uniform,
}

/// Natural parameter `ηᵢ = κᵢμᵢ + Σ_{j≠i} λᵢⱼ (Rμᵢ)(Rμⱼ)ᵀxⱼ` of `xᵢ | x₋ᵢ`.
pub fn torus_conditional_natural(i: usize, x: &TorusPoint, theta: &TorusModelParams) -> Vector2<f64> {
    let mut coupling = 0.0;
    for j in 0..theta.p() {
        if j != i {
            coupling += theta.lambda_ij(i, j) * quarter_turn(theta.mu.component(j)).dot(&v2(x.component(j)));
        }
    }
    v2(theta.mu.component(i)) * theta.kappa[i] + quarter_turn(theta.mu.component(i)) * coupling
}

fn natural_to_conditional(eta: Vector2<f64>) -> CircleConditional {
    let k = eta.norm();
    if k <= 1e-300 {
        return CircleConditional::Uniform;
    }
    let mu = UnitVector::normalize(DVector::from_column_slice(&[eta[0], eta[1]]))
        .expect("nonzero natural parameter");
    CircleConditional::Vmf(VmfParams { mu, kappa: k })
}

/// vMF parameters `(ηᵢ/‖ηᵢ‖, ‖ηᵢ‖)` of `xᵢ | x₋ᵢ`; `xᵢ` itself is ignored.
pub fn torus_conditional_vmf(i: usize, x: &TorusPoint, theta: &TorusModelParams) -> Result<CircleConditional> {
    check_dim(x, theta)?;
    if i >= theta.p() {
        return Err(Error::InvalidParameter(format!("component {i} out of range")));
    }
    Ok(natural_to_conditional(torus_conditional_natural(i, x, theta)))
}

/// Draw from a vMF on `S¹` given its natural parameter.
pub(crate) fn sample_circle<R: Rng + ?Sized>(eta: Vector2<f64>, rng: &mut R) -> UnitVector {
    let k = eta.norm();
    if k <= 1e-300 {
        let t = rng.random::<f64>() * std::f64::consts::TAU;
        return UnitVector::from_angle(t);
    }
    let m = eta / k;
    let w = sample_vmf_cosine(2, k, rng);
    let s = (1.0 - w * w).max(0.0).sqrt();
    let s = if rng.random::<bool>() { s } else { -s };
    let x = m * w + Vector2::new(-m[1], m[0]) * s;
    UnitVector::normalize(DVector::from_column_slice(&[x[0], x[1]])).expect("unit circle draw")
}

/// One systematic-scan sweep in place.
pub fn gibbs_sweep<R: Rng + ?Sized>(state: &mut TorusPoint, theta: &TorusModelParams, rng: &mut R) {
    for i in 0..theta.p() {
        let eta = torus_conditional_natural(i, state, theta);
        state.set_component(i, sample_circle(eta, rng));
    }
}

/// Burn-in and thinning of the data-generating Gibbs chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsConfig {
    pub burn_in: usize,
    pub thin: usize,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self { burn_in: 50, thin: 1 }
    }
}

/// State after `n_sweeps` sweeps of a chain started at `μ`.
pub fn torus_gibbs_sample<R: Rng + ?Sized>(theta: &TorusModelParams, n_sweeps: usize, rng: &mut R) -> TorusPoint {
    let mut state = theta.mu.clone();
    for _ in 0..n_sweeps {
        gibbs_sweep(&mut state, theta, rng);
    }
    state
}

/// `n` draws from one chain: `burn_in` sweeps, then one retained state every `thin` sweeps.
pub fn torus_gibbs_chain<R: Rng + ?Sized>(
    theta: &TorusModelParams,
    n: usize,
    cfg: GibbsConfig,
    rng: &mut R,
) -> Vec<TorusPoint> {
    let thin = cfg.thin.max(1);
    let mut state = torus_gibbs_sample(theta, cfg.burn_in, rng);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..thin {
            gibbs_sweep(&mut state, theta, rng);
        }
        out.push(state.clone());
    }
    out
}

/// Per-axis grid size `max(64, ⌈8√c⌉)` with `c = maxᵢ(κᵢ + Σⱼ|λᵢⱼ|)`.
pub fn default_resolution(kappa: &[f64], lambda: &[f64]) -> usize {
    let p = kappa.len();
    let mut c: f64 = 0.0;
    for i in 0..p {
        let mut ci = kappa[i];
        for j in 0..p {
            if j != i {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                ci += lambda[lambda_index(a, b, p)].abs();
            }
        }
        c = c.max(ci);
    }
    64usize.max((8.0 * c.sqrt()).ceil() as usize)
}

/// `log ∫_{T^p} exp(log density)` at the default resolution.
pub fn torus_log_normalizer(kappa: &[f64], lambda: &[f64]) -> Result<f64> {
    torus_log_normalizer_with(kappa, lambda, default_resolution(kappa, lambda))
}

/// As [`torus_log_normalizer`] with per-axis resolution `m`.
///
/// The last axis is integrated in closed form, `∫ exp(a cos φ + b sin φ) dφ = 2π I₀(√(a²+b²))`;
/// the remaining `p − 1` axes use the periodic trapezoid rule on `m` nodes.
pub fn torus_log_normalizer_with(kappa: &[f64], lambda: &[f64], m: usize) -> Result<f64> {
    log_normalizer_shifted(kappa, lambda, m, &vec![0.0; kappa.len()])
}

/// Normalizer quadrature with grid nodes at `2πj/m − shiftᵢ` on axis `i`.
pub fn log_normalizer_shifted(kappa: &[f64], lambda: &[f64], m: usize, shift: &[f64]) -> Result<f64> {
    let p = kappa.len();
    if p == 0 {
        return Err(Error::EmptyInput);
    }
    if p > MAX_NORMALIZER_DIM {
        return Err(Error::Unsupported(format!(
            "torus normalizer quadrature supports p <= {MAX_NORMALIZER_DIM}, got {p}"
        )));
    }
    if lambda.len() != n_pairs(p) || shift.len() != p {
        return Err(Error::DimensionMismatch {
            expected: n_pairs(p),
            found: lambda.len(),
        });
    }
    if m < 2 {
        return Err(Error::InvalidParameter("quadrature resolution must be >= 2".into()));
    }
    let tau = std::f64::consts::TAU;
    let last = p - 1;
    let log_tau = tau.ln();
    if last == 0 {
        return Ok(log_tau + log_bessel_i0(kappa[0]));
    }
    let h = tau / m as f64;
    let cs: Vec<Vec<(f64, f64)>> = (0..last)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let phi = j as f64 * h - shift[i];
                    (phi.cos(), phi.sin())
                })
                .collect()
        })
        .collect();
    let total = m.pow(last as u32);
    let mut vals = Vec::with_capacity(total);
    let mut idx = vec![0usize; last];
    for _ in 0..total {
        let mut s = 0.0;
        let mut b = 0.0;
        for i in 0..last {
            let (ci, si) = cs[i][idx[i]];
            s += kappa[i] * ci;
            for j in (i + 1)..last {
                s += lambda[lambda_index(i, j, p)] * si * cs[j][idx[j]].1;
            }
            b += lambda[lambda_index(i, last, p)] * si;
        }
        let a = kappa[last];
        vals.push(s + log_bessel_i0((a * a + b * b).sqrt()));
        for d in idx.iter_mut() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }
    let mx = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = vals.iter().map(|v| (v - mx).exp()).sum();
    Ok(mx + sum.ln() + (last as f64) * h.ln() + log_tau)
}
