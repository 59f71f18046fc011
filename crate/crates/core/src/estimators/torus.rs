use super::nelder_mead::{nelder_mead, NelderMeadConfig};
use crate::distributions::special::circle_a_inverse;
use crate::distributions::{lambda_index, n_pairs, torus_log_normalizer, TorusModelParams, MAX_NORMALIZER_DIM};
use crate::error::{Error, Result};
use crate::frechet::{sample_frechet_mean, FrechetSolverConfig};
use crate::manifolds::Metric;
use crate::mcmc::torus_posterior_natural;
use crate::{ManifoldPoint, TorusPoint, UnitVector};

/// Profile log-likelihood box: `|log κᵢ| ≤ LOG_KAPPA_BOUND`, `|λᵢⱼ| ≤ LAMBDA_BOUND`.
const LOG_KAPPA_BOUND: f64 = 6.0;
const LAMBDA_BOUND: f64 = 60.0;
const MU_SWEEPS: usize = 1000;
const LAMBDA_STARTS: [f64; 3] = [0.0, 2.0, -2.0];

#[derive(Debug, Clone, PartialEq)]
pub struct TorusMleFit {
    pub params: TorusModelParams,
    /// Normalized log-likelihood at the estimate.
    pub log_likelihood: f64,
    pub converged: bool,
    pub evaluations: usize,
}

fn log_lik_unnormalized(mu: &TorusPoint, data: &[TorusPoint], kappa: &[f64], lambda: &[f64]) -> f64 {
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

/// Equivariant starting points: the sample Fréchet mean and the per-component mean
/// direction.
fn mu_starts(data: &[TorusPoint]) -> Result<Vec<TorusPoint>> {
    let pts: Vec<ManifoldPoint> = data.iter().cloned().map(Into::into).collect();
    let fm = sample_frechet_mean(&pts, Metric::FlatTorus, &FrechetSolverConfig::default())?.mean;
    let mut starts = vec![fm.as_torus().cloned().ok_or(Error::VariantMismatch)?];
    let p = data[0].p();
    let dirs: Vec<UnitVector> = (0..p)
        .map(|i| {
            let (mut c, mut s) = (0.0, 0.0);
            for x in data {
                c += x.component(i).coords()[0];
                s += x.component(i).coords()[1];
            }
            UnitVector::from_angle(s.atan2(c))
        })
        .collect();
    starts.push(TorusPoint::new(dirs)?);
    Ok(starts)
}

fn ascend(mut mu: TorusPoint, data: &[TorusPoint], kappa: &[f64], lambda: &[f64]) -> TorusPoint {
    for _ in 0..MU_SWEEPS {
        let mut moved: f64 = 0.0;
        for i in 0..mu.p() {
            let eta = torus_posterior_natural(i, &mu, data, kappa, lambda);
            let n = eta.norm();
            if n > 0.0 {
                let c = eta / n;
                let old = mu.component(i).coords();
                moved = moved.max((old[0] - c[0]).abs().max((old[1] - c[1]).abs()));
                mu.set_component(i, UnitVector::from_angle(c[1].atan2(c[0])));
            }
        }
        if moved < 1e-12 {
            break;
        }
    }
    mu
}

/// Maximizer of the likelihood in `μ` for fixed `(κ, Λ)`. The likelihood is linear in
/// each `μᵢ` given the others, with slope `ηᵢ`, so each coordinate step is the exact
/// maximizer `ηᵢ/‖ηᵢ‖`. Ascent runs from every start and the best end point wins.
pub fn torus_mu_hat(data: &[TorusPoint], kappa: &[f64], lambda: &[f64], starts: &[TorusPoint]) -> TorusPoint {
    let mut best: Option<(f64, TorusPoint)> = None;
    for s in starts {
        let mu = ascend(s.clone(), data, kappa, lambda);
        let ll = log_lik_unnormalized(&mu, data, kappa, lambda);
        if best.as_ref().is_none_or(|(b, _)| ll > *b) {
            best = Some((ll, mu));
        }
    }
    best.expect("at least one start").1
}

/// Maximum likelihood fit of the torus model: profile out `μ` by coordinate ascent
/// and maximize the profile log-likelihood over `(log κ, Λ)` by Nelder–Mead.
pub fn torus_mle(data: &[TorusPoint]) -> Result<TorusMleFit> {
    if data.len() < 2 {
        return Err(Error::InvalidParameter(format!("torus MLE needs n >= 2, got {}", data.len())));
    }
    let p = data[0].p();
    if data.iter().any(|x| x.p() != p) {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: data.iter().map(|x| x.p()).find(|&q| q != p).unwrap_or(0),
        });
    }
    if p > MAX_NORMALIZER_DIM {
        return Err(Error::Unsupported(format!("torus MLE supports p <= {MAX_NORMALIZER_DIM}, got {p}")));
    }
    let m = n_pairs(p);
    let nf = data.len() as f64;
    let starts = mu_starts(data)?;

    let split = |z: &[f64]| -> (Vec<f64>, Vec<f64>) { (z[..p].iter().map(|v| v.exp()).collect(), z[p..].to_vec()) };
    let neg_profile = |z: &[f64]| -> f64 {
        if z[..p].iter().any(|v| v.abs() > LOG_KAPPA_BOUND) || z[p..].iter().any(|v| v.abs() > LAMBDA_BOUND) {
            return f64::INFINITY;
        }
        let (kappa, lambda) = split(z);
        let Ok(log_z) = torus_log_normalizer(&kappa, &lambda) else {
            return f64::INFINITY;
        };
        let mu = torus_mu_hat(data, &kappa, &lambda, &starts);
        -(log_lik_unnormalized(&mu, data, &kappa, &lambda) - nf * log_z)
    };

    let mut z0 = Vec::with_capacity(p + m);
    for i in 0..p {
        let (mut c, mut s) = (0.0, 0.0);
        for x in data {
            c += x.component(i).coords()[0];
            s += x.component(i).coords()[1];
        }
        let r = ((c * c + s * s).sqrt() / nf).min(0.999);
        z0.push(circle_a_inverse(r).max(0.05).ln().clamp(-LOG_KAPPA_BOUND + 0.5, LOG_KAPPA_BOUND - 0.5));
    }
    // The profile is multimodal in Λ: start from independent, positively and negatively
    // coupled components, then restart from the best end point.
    let nm = NelderMeadConfig::default();
    let scout = NelderMeadConfig { f_tol: 1e-3, x_tol: 1e-3, ..nm };
    let mut res: Option<super::NelderMeadResult> = None;
    for l0 in LAMBDA_STARTS {
        let mut z = z0.clone();
        z.extend(std::iter::repeat_n(l0, m));
        let r = nelder_mead(neg_profile, &z, &scout);
        if res.as_ref().is_none_or(|b| r.f < b.f) {
            res = Some(r);
        }
    }
    let best = res.expect("at least one start");
    let again = nelder_mead(neg_profile, &best.x, &NelderMeadConfig { initial_step: 0.1, ..nm });
    let res = if again.f <= best.f { again } else { best };
    if !res.f.is_finite() {
        return Err(Error::NonConvergence("profile likelihood is not finite anywhere visited".into()));
    }
    let (kappa, lambda) = split(&res.x);
    let mu = torus_mu_hat(data, &kappa, &lambda, &starts);
    let params = TorusModelParams::new(mu, kappa, lambda)?;
    Ok(TorusMleFit {
        params,
        log_likelihood: -res.f,
        converged: res.converged,
        evaluations: res.evals,
    })
}
