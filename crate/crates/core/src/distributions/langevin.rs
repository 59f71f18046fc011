use rand::Rng;

use crate::error::{Error, Result};
use crate::manifolds::uniform_on_stiefel;
use crate::StiefelFrame;

/// Number of proposals inspected before the acceptance-rate guard fires.
pub const LANGEVIN_PROBE: usize = 10_000;
/// Smallest tolerated acceptance rate of the uniform-proposal rejection sampler.
pub const LANGEVIN_MIN_ACCEPTANCE: f64 = 1e-4;

/// Matrix Langevin law on `V_k(R^p)` with `θ = λH`: density `∝ etr(xᵀθ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LangevinParams {
    pub h: StiefelFrame,
    pub lambda: f64,
}

impl LangevinParams {
    pub fn new(h: StiefelFrame, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Langevin lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self { h, lambda })
    }
}

fn trace_xt_h(x: &StiefelFrame, h: &StiefelFrame) -> f64 {
    x.matrix().dot(h.matrix())
}

/// `λ tr(xᵀH)`.
pub fn langevin_log_density(x: &StiefelFrame, theta: &LangevinParams) -> Result<f64> {
    if x.shape() != theta.h.shape() {
        let (p, k) = theta.h.shape();
        let (q, l) = x.shape();
        return Err(Error::DimensionMismatch {
            expected: p * k,
            found: q * l,
        });
    }
    Ok(theta.lambda * trace_xt_h(x, &theta.h))
}

/// Rejection sampler with uniform proposals, accepting with `etr(λxᵀH − λk) ≤ 1`.
#[derive(Debug, Clone)]
pub struct LangevinSampler {
    params: LangevinParams,
    acceptance_rate: f64,
}

impl LangevinSampler {
    /// Probes the acceptance rate with [`LANGEVIN_PROBE`] proposals.
    pub fn new<R: Rng + ?Sized>(params: LangevinParams, rng: &mut R) -> Result<Self> {
        let (p, k) = params.h.shape();
        let mut acc = 0usize;
        for _ in 0..LANGEVIN_PROBE {
            let x = uniform_on_stiefel::<f64, _>(p, k, rng);
            if accept(&x, &params, rng) {
                acc += 1;
            }
        }
        let rate = acc as f64 / LANGEVIN_PROBE as f64;
        if rate < LANGEVIN_MIN_ACCEPTANCE {
            return Err(Error::LowAcceptance { rate });
        }
        Ok(Self {
            params,
            acceptance_rate: rate,
        })
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance_rate
    }

    pub fn params(&self) -> &LangevinParams {
        &self.params
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> StiefelFrame {
        let (p, k) = self.params.h.shape();
        loop {
            let x = uniform_on_stiefel::<f64, _>(p, k, rng);
            if accept(&x, &self.params, rng) {
                return x;
            }
        }
    }
}

fn accept<R: Rng + ?Sized>(x: &StiefelFrame, theta: &LangevinParams, rng: &mut R) -> bool {
    let k = theta.h.shape().1 as f64;
    let log_a = theta.lambda * (trace_xt_h(x, &theta.h) - k);
    let u: f64 = rng.random();
    u.ln() <= log_a
}

/// One exact draw. Fails with [`Error::LowAcceptance`] when the first
/// [`LANGEVIN_PROBE`] proposals are all rejected.
pub fn langevin_sample<R: Rng + ?Sized>(theta: &LangevinParams, rng: &mut R) -> Result<StiefelFrame> {
    let (p, k) = theta.h.shape();
    for _ in 0..LANGEVIN_PROBE {
        let x = uniform_on_stiefel::<f64, _>(p, k, rng);
        if accept(&x, theta, rng) {
            return Ok(x);
        }
    }
    Err(Error::LowAcceptance {
        rate: 0.0,
    })
}
