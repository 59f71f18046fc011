use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::manifolds::{boost_from_apex, minkowski, uniform_on_sphere};
use crate::HyperboloidPoint;

/// Hyperbolic law on `H^k(R)`: density `∝ exp(κ (x, μ)/R²)` against the volume measure.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicParams {
    pub mu: HyperboloidPoint,
    pub kappa: f64,
}

impl HyperbolicParams {
    pub fn new(mu: HyperboloidPoint, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "hyperbolic kappa must be positive, got {kappa}"
            )));
        }
        Ok(Self { mu, kappa })
    }

    pub fn radius(&self) -> f64 {
        self.mu.radius()
    }
}

/// `κ (x, μ)/R²`.
pub fn hyperbolic_log_density(x: &HyperboloidPoint, theta: &HyperbolicParams) -> Result<f64> {
    if x.coords().len() != theta.mu.coords().len() {
        return Err(Error::DimensionMismatch {
            expected: theta.mu.coords().len(),
            found: x.coords().len(),
        });
    }
    let r = theta.radius();
    if (x.radius() - r).abs() > 1e-9 * r {
        return Err(Error::RadiusMismatch(x.radius(), r));
    }
    Ok(theta.kappa * minkowski(x.coords(), theta.mu.coords()) / (r * r))
}

/// Rejection sampler for the radial law `f(s) ∝ exp(−κ cosh s) sinh^{k−1} s` on `s ≥ 0`.
///
/// `log f` is concave, so the envelope is flat at the mode between the two points
/// where `log f` has dropped by one, with tangent exponential tails outside.
#[derive(Debug, Clone)]
pub struct RadialSampler {
    kappa: f64,
    km1: f64,
    log_fmax: f64,
    s_l: f64,
    s_r: f64,
    slope_l: f64,
    slope_r: f64,
    w_l: f64,
    w_mid: f64,
    w_r: f64,
}

impl RadialSampler {
    pub fn new(k: usize, kappa: f64) -> Self {
        let km1 = (k as f64) - 1.0;
        let mode = if km1 == 0.0 {
            0.0
        } else {
            let c = (km1 + (km1 * km1 + 4.0 * kappa * kappa).sqrt()) / (2.0 * kappa);
            c.max(1.0).acosh()
        };
        let lf = |s: f64| log_radial(kappa, km1, s);
        let log_fmax = lf(mode);
        let target = log_fmax - 1.0;
        // Right crossing: expand then bisect.
        let mut hi = mode + 1.0;
        while lf(hi) > target {
            hi = mode + 2.0 * (hi - mode);
        }
        let s_r = bisect(&lf, target, mode, hi);
        let s_l = if mode > 0.0 && lf(0.0) < target {
            bisect(&lf, target, mode, 0.0)
        } else {
            0.0
        };
        let slope_r = d_log_radial(kappa, km1, s_r);
        let slope_l = if s_l > 0.0 { d_log_radial(kappa, km1, s_l) } else { 0.0 };
        let e1 = (-1.0f64).exp();
        let w_mid = s_r - s_l;
        let w_r = e1 / (-slope_r);
        let w_l = if s_l > 0.0 {
            e1 * (1.0 - (-slope_l * s_l).exp()) / slope_l
        } else {
            0.0
        };
        Self {
            kappa,
            km1,
            log_fmax,
            s_l,
            s_r,
            slope_l,
            slope_r,
            w_l,
            w_mid,
            w_r,
        }
    }

    /// Envelope mass in units of the density's maximum.
    pub fn envelope_mass(&self) -> f64 {
        self.w_l + self.w_mid + self.w_r
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = self.envelope_mass();
        loop {
            let pick = rng.random::<f64>() * total;
            let u: f64 = rng.random();
            let (s, log_env) = if pick < self.w_mid {
                let s = self.s_l + rng.random::<f64>() * self.w_mid;
                (s, 0.0)
            } else if pick < self.w_mid + self.w_r {
                // Exponential tail beyond s_r with rate −slope_r.
                let e: f64 = -(1.0 - rng.random::<f64>()).ln() / (-self.slope_r);
                (self.s_r + e, -1.0 + self.slope_r * e)
            } else {
                // Truncated exponential on [0, s_l] growing with rate slope_l.
                let a = self.slope_l * self.s_l;
                let v: f64 = rng.random();
                let t = (1.0 + v * ((-a).exp() - 1.0)).ln() / self.slope_l;
                let s = self.s_l + t;
                (s.max(0.0), -1.0 + self.slope_l * t)
            };
            let log_f = log_radial(self.kappa, self.km1, s) - self.log_fmax;
            if u.ln() <= log_f - log_env {
                return s;
            }
        }
    }
}

fn log_radial(kappa: f64, km1: f64, s: f64) -> f64 {
    let base = -kappa * s.cosh();
    if km1 == 0.0 {
        base
    } else if s <= 0.0 {
        f64::NEG_INFINITY
    } else {
        base + km1 * s.sinh().ln()
    }
}

fn d_log_radial(kappa: f64, km1: f64, s: f64) -> f64 {
    let mut d = -kappa * s.sinh();
    if km1 != 0.0 {
        d += km1 / s.tanh();
    }
    d
}

/// Finds `s` between `a` (where `f > target`) and `b` (where `f ≤ target`).
fn bisect(f: &impl Fn(f64) -> f64, target: f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) > target {
            a = m;
        } else {
            b = m;
        }
        if (a - b).abs() < 1e-15 * a.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Exact draw in polar coordinates about the apex, mapped to `μ` by the pure boost.
pub fn hyperbolic_sample<R: Rng + ?Sized>(theta: &HyperbolicParams, rng: &mut R) -> HyperboloidPoint {
    let sampler = RadialSampler::new(theta.mu.dim(), theta.kappa);
    hyperbolic_sample_with(theta, &sampler, rng)
}

/// As [`hyperbolic_sample`] with a prebuilt radial sampler for `(k, κ)`.
pub fn hyperbolic_sample_with<R: Rng + ?Sized>(
    theta: &HyperbolicParams,
    radial: &RadialSampler,
    rng: &mut R,
) -> HyperboloidPoint {
    let k = theta.mu.dim();
    let r = theta.radius();
    let s = radial.sample(rng);
    let omega = uniform_on_sphere::<f64, _>(k - 1, rng);
    let mut v = DVector::zeros(k + 1);
    v.rows_mut(0, k).copy_from(&(omega.coords() * (r * s.sinh())));
    v[k] = r * s.cosh();
    let l = boost_from_apex(&theta.mu);
    HyperboloidPoint::normalize_timelike(l * v, r).expect("boost preserves the upper sheet")
}
