use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ChainTrace, McmcConfig, StepRecord};
use crate::distributions::{lambda_index, sample_circle};
use crate::error::{Error, Result};
use crate::TorusPoint;

/// Natural parameter of `μᵢ | μ₋ᵢ, data` under a flat prior on the location:
/// `ηᵢ = Σ_k [κᵢ x_ki + (Σ_{j≠i} λᵢⱼ sin(x_kj − μⱼ)) (sin x_ki, −cos x_ki)]`.
pub fn torus_posterior_natural(i: usize, mu: &TorusPoint, data: &[TorusPoint], kappa: &[f64], lambda: &[f64]) -> Vector2<f64> {
    let p = mu.p();
    let mut eta = Vector2::zeros();
    for x in data {
        let xi = x.component(i).coords();
        let mut c = 0.0;
        for j in (0..p).filter(|&j| j != i) {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            let l = lambda[lambda_index(a, b, p)];
            if l != 0.0 {
                let xj = x.component(j).coords();
                let mj = mu.component(j).coords();
                // sin(x − μ) = x₂μ₁ − x₁μ₂
                c += l * (xj[1] * mj[0] - xj[0] * mj[1]);
            }
        }
        eta[0] += kappa[i] * xi[0] + c * xi[1];
        eta[1] += kappa[i] * xi[1] - c * xi[0];
    }
    eta
}

fn posterior_log_target(mu: &TorusPoint, data: &[TorusPoint], kappa: &[f64], lambda: &[f64]) -> f64 {
    let p = mu.p();
    let mut s = 0.0;
    for x in data {
        let sins: Vec<f64> = (0..p)
            .map(|j| {
                let (xj, mj) = (x.component(j).coords(), mu.component(j).coords());
                xj[1] * mj[0] - xj[0] * mj[1]
            })
            .collect();
        for i in 0..p {
            s += kappa[i] * x.component(i).dot(mu.component(i));
            for j in (i + 1)..p {
                s += lambda[lambda_index(i, j, p)] * sins[i] * sins[j];
            }
        }
    }
    s
}

/// Gibbs sampler over the torus location `μ` given data and fixed `(κ, Λ)`. Every
/// conditional is a von Mises law, so each sweep is exact and always accepted.
pub fn gibbs_torus_posterior<R: Rng + ?Sized>(
    data: &[TorusPoint],
    kappa: &[f64],
    lambda: &[f64],
    init: TorusPoint,
    cfg: &McmcConfig,
    rng: &mut R,
) -> Result<ChainTrace<TorusPoint>> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let p = init.p();
    if kappa.len() != p || lambda.len() != p * (p - 1) / 2 {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: kappa.len(),
        });
    }
    if let Some(x) = data.iter().find(|x| x.p() != p) {
        return Err(Error::DimensionMismatch { expected: p, found: x.p() });
    }
    match cfg.seed {
        Some(seed) => run(data, kappa, lambda, init, cfg, &mut ChaCha8Rng::seed_from_u64(seed)),
        None => run(data, kappa, lambda, init, cfg, rng),
    }
}

fn run<R: Rng + ?Sized>(
    data: &[TorusPoint],
    kappa: &[f64],
    lambda: &[f64],
    mut mu: TorusPoint,
    cfg: &McmcConfig,
    rng: &mut R,
) -> Result<ChainTrace<TorusPoint>> {
    let retained = cfg.retained();
    let mut states = Vec::with_capacity(retained);
    let mut log_targets = Vec::with_capacity(retained);
    let mut steps = Vec::with_capacity(cfg.iterations);
    for step in 0..cfg.iterations {
        for i in 0..mu.p() {
            let eta = torus_posterior_natural(i, &mu, data, kappa, lambda);
            mu.set_component(i, sample_circle(eta, rng));
        }
        let lt = posterior_log_target(&mu, data, kappa, lambda);
        steps.push(StepRecord {
            step,
            log_target: lt,
            accepted: true,
        });
        if step >= cfg.burn_in && (step - cfg.burn_in + 1) % cfg.thin == 0 && states.len() < retained {
            states.push(mu.clone());
            log_targets.push(lt);
        }
    }
    Ok(ChainTrace {
        states,
        log_targets,
        acceptance_rate: 1.0,
        accepted_count: cfg.iterations,
        seed: cfg.seed,
        steps,
    })
}
