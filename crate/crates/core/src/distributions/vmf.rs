use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::UnitVector;

/// von Mises–Fisher law on `S^k`: density `∝ exp(κ⟨x, μ⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VmfParams {
    pub mu: UnitVector,
    pub kappa: f64,
}

impl VmfParams {
    pub fn new(mu: UnitVector, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("vMF kappa must be positive, got {kappa}")));
        }
        Ok(Self { mu, kappa })
    }
}

/// `κ⟨x, μ⟩`.
pub fn vmf_log_density(x: &UnitVector, theta: &VmfParams) -> Result<f64> {
    if x.ambient_dim() != theta.mu.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: theta.mu.ambient_dim(),
            found: x.ambient_dim(),
        });
    }
    Ok(theta.kappa * x.dot(&theta.mu))
}

/// Uniform unit vector orthogonal to `mu`.
pub(crate) fn tangent_direction<R: Rng + ?Sized>(mu: &DVector<f64>, rng: &mut R) -> DVector<f64> {
    loop {
        let g: DVector<f64> = DVector::from_fn(mu.len(), |_, _| rng.sample(StandardNormal));
        let v = &g - mu * mu.dot(&g);
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Cosine `w = ⟨x, μ⟩` of a vMF draw in ambient dimension `d`, by Wood's rejection step.
pub(crate) fn sample_vmf_cosine<R: Rng + ?Sized>(d: usize, kappa: f64, rng: &mut R) -> f64 {
    let m1 = (d - 1) as f64;
    let b = m1 / (2.0 * kappa + (4.0 * kappa * kappa + m1 * m1).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    // log(1 − x0²) written without cancellation.
    let log1mx02 = (4.0 * b).ln() - 2.0 * (1.0 + b).ln();
    let c = kappa * x0 + m1 * log1mx02;
    let beta = Beta::new(0.5 * m1, 0.5 * m1).expect("beta parameters are positive");
    loop {
        let z: f64 = beta.sample(rng);
        let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        let u: f64 = rng.random();
        if kappa * w + m1 * (1.0 - x0 * w).ln() - c >= u.ln() {
            return w.clamp(-1.0, 1.0);
        }
    }
}

/// Exact vMF draw by tangent-normal decomposition `x = wμ + √(1−w²) v`.
pub fn vmf_sample<R: Rng + ?Sized>(theta: &VmfParams, rng: &mut R) -> UnitVector {
    let mu = theta.mu.coords();
    let w = sample_vmf_cosine(mu.len(), theta.kappa, rng);
    let v = tangent_direction(mu, rng);
    let x = mu * w + v * (1.0 - w * w).max(0.0).sqrt();
    UnitVector::normalize(x).expect("vMF draw has unit norm")
}
