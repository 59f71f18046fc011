use nalgebra::DMatrix;
use rand::Rng;

use super::wishart::sorted_eigen;
use super::{mre_monte_carlo_with, torus_mle, wishart_mom_orbit, EstimatorOptions, MreDiagnostics, OrbitLabel};
use crate::distributions::special::circle_a_inverse;
use crate::error::{Error, Result};
use crate::frechet::log_euclidean_mean;
use crate::mcmc::McmcConfig;
use crate::{ManifoldPoint, SpdMatrix, TorusPoint};

/// How the adaptive MRE picks its orbit.
#[derive(Debug, Clone, PartialEq)]
pub enum OrbitEstimator {
    /// Orbit through the maximum likelihood estimate (Wishart, torus, circular vMF).
    Mle,
    /// Wishart only: orbit solving `X/n = E(Y/n)`.
    MethodOfMoments,
    Supplied(OrbitLabel),
}

/// Orbit estimate and whether its solver converged.
pub fn estimate_orbit<R: Rng + ?Sized>(
    data: &[ManifoldPoint],
    est: &OrbitEstimator,
    wishart_dof: Option<usize>,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Result<(OrbitLabel, bool)> {
    let first = data.first().ok_or(Error::EmptyInput)?;
    let dof = || wishart_dof.ok_or_else(|| Error::Config("Wishart orbit estimates need the degrees of freedom".into()));
    match (est, first) {
        (OrbitEstimator::Supplied(o), _) => Ok((o.clone(), true)),
        (OrbitEstimator::Mle, ManifoldPoint::Spd(x)) => {
            let n = dof()?;
            let mut s = DMatrix::zeros(x.p(), x.p());
            for y in data {
                s += y.as_spd().ok_or(Error::VariantMismatch)?.matrix();
            }
            let (_, lam) = sorted_eigen(&s);
            let scale = (n * data.len()) as f64;
            Ok((
                OrbitLabel::Wishart {
                    eigenvalues: lam.iter().map(|l| l / scale).collect(),
                    dof: n,
                },
                true,
            ))
        }
        (OrbitEstimator::MethodOfMoments, ManifoldPoint::Spd(_)) => {
            let xs: Vec<&SpdMatrix> = data.iter().filter_map(ManifoldPoint::as_spd).collect();
            let m = log_euclidean_mean(&xs)?;
            let fit = wishart_mom_orbit(&m, dof()?, opts.inner_draws, rng)?;
            Ok((fit.orbit, fit.converged))
        }
        (OrbitEstimator::Mle, ManifoldPoint::Torus(_)) => {
            let xs: Vec<TorusPoint> = data.iter().filter_map(|x| x.as_torus().cloned()).collect();
            let fit = torus_mle(&xs)?;
            Ok((
                OrbitLabel::Torus {
                    kappa: fit.params.kappa,
                    lambda: fit.params.lambda,
                },
                fit.converged,
            ))
        }
        (OrbitEstimator::Mle, ManifoldPoint::Sphere(x)) if x.ambient_dim() == 2 => {
            let (mut c, mut s) = (0.0, 0.0);
            for y in data {
                let v = y.as_sphere().ok_or(Error::VariantMismatch)?.coords();
                c += v[0];
                s += v[1];
            }
            let r = (c * c + s * s).sqrt() / data.len() as f64;
            let kappa = circle_a_inverse(r);
            if !(kappa > 0.0 && kappa.is_finite()) {
                return Err(Error::UndefinedEstimate(format!("concentration MLE undefined at R = {r}")));
            }
            Ok((OrbitLabel::Vmf { kappa }, true))
        }
        (OrbitEstimator::MethodOfMoments, _) => {
            Err(Error::Unsupported("method-of-moments orbits are defined for the Wishart family only".into()))
        }
        (OrbitEstimator::Mle, x) => Err(Error::Unsupported(format!(
            "no orbit MLE for the {} family",
            x.kind().name()
        ))),
    }
}

/// Result of [`adaptive_mre`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveFit {
    pub estimate: ManifoldPoint,
    pub orbit: OrbitLabel,
    pub diagnostics: MreDiagnostics,
    pub orbit_converged: bool,
}

/// The MRE for the estimated orbit. Equivariant whenever the orbit estimate is invariant.
pub fn adaptive_mre<R: Rng + ?Sized>(
    data: &[ManifoldPoint],
    est: &OrbitEstimator,
    wishart_dof: Option<usize>,
    cfg: &McmcConfig,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Result<AdaptiveFit> {
    let (orbit, orbit_converged) = estimate_orbit(data, est, wishart_dof, opts, rng)?;
    let (estimate, diagnostics) = mre_monte_carlo_with(data, &orbit, cfg, opts, rng)?;
    Ok(AdaptiveFit {
        estimate,
        orbit,
        diagnostics,
        orbit_converged,
    })
}
