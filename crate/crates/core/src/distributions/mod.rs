//! Parametric families: densities and exact samplers.

mod hyperbolic;
mod langevin;
pub mod special;
mod torus;
mod vmf;
mod wishart;

pub use hyperbolic::{hyperbolic_log_density, hyperbolic_sample, hyperbolic_sample_with, HyperbolicParams, RadialSampler};
pub use langevin::{
    langevin_log_density, langevin_sample, LangevinParams, LangevinSampler, LANGEVIN_MIN_ACCEPTANCE,
    LANGEVIN_PROBE,
};
pub use torus::{
    default_resolution, gibbs_sweep, lambda_index, log_normalizer_shifted, n_pairs,
    torus_conditional_natural, torus_conditional_vmf, torus_gibbs_chain, torus_gibbs_sample,
    torus_log_density, torus_log_density_matrix_form, torus_log_density_unnormalized,
    torus_log_normalizer, torus_log_normalizer_with, CircleConditional, GibbsConfig,
    TorusModelParams, MAX_NORMALIZER_DIM,
};
pub(crate) use torus::sample_circle;
pub use vmf::{vmf_log_density, vmf_sample, VmfParams};
pub use wishart::{bartlett_factor, wishart_from_factor, wishart_log_density, wishart_sample, WishartParams};

use rand::Rng;

use crate::error::{Error, Result};
use crate::manifolds::{symmetrize, ManifoldKind};
use crate::{Isometry, ManifoldPoint, SpdMatrix, StiefelFrame};

/// Parameters of one of the five families.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Vmf(VmfParams),
    Hyperbolic(HyperbolicParams),
    Langevin(LangevinParams),
    Wishart(WishartParams),
    Torus(TorusModelParams),
}

impl ModelParams {
    /// Manifold on which the family lives.
    pub fn manifold(&self) -> ManifoldKind {
        match self {
            ModelParams::Vmf(_) => ManifoldKind::Sphere,
            ModelParams::Hyperbolic(_) => ManifoldKind::Hyperboloid,
            ModelParams::Langevin(_) => ManifoldKind::Stiefel,
            ModelParams::Wishart(_) => ManifoldKind::Spd,
            ModelParams::Torus(_) => ManifoldKind::Torus,
        }
    }

    /// Log density of `x`; unnormalized except for the Wishart family, whose value is
    /// taken against the invariant measure (see [`wishart_log_density`]).
    pub fn log_density(&self, x: &ManifoldPoint) -> Result<f64> {
        match (self, x) {
            (ModelParams::Vmf(t), ManifoldPoint::Sphere(p)) => vmf_log_density(p, t),
            (ModelParams::Hyperbolic(t), ManifoldPoint::Hyperboloid(p)) => hyperbolic_log_density(p, t),
            (ModelParams::Langevin(t), ManifoldPoint::Stiefel(p)) => langevin_log_density(p, t),
            (ModelParams::Wishart(t), ManifoldPoint::Spd(p)) => wishart_log_density(p, t),
            (ModelParams::Torus(t), ManifoldPoint::Torus(p)) => torus_log_density_matrix_form(p, t),
            _ => Err(Error::VariantMismatch),
        }
    }

    /// Sum of log densities over a sample.
    pub fn log_likelihood(&self, data: &[ManifoldPoint]) -> Result<f64> {
        data.iter().map(|x| self.log_density(x)).sum()
    }

    /// Induced action `θ ↦ gθ` so that `p(gx | gθ) = p(x | θ)`.
    ///
    /// On the torus a reflection in factor `i` flips the sign of `sin φᵢ`, so the
    /// action sends `λᵢⱼ` to `det(gᵢ) det(gⱼ) λᵢⱼ`.
    pub fn transform(&self, g: &Isometry) -> Result<Self> {
        Ok(match (self, g) {
            (ModelParams::Vmf(t), Isometry::Orthogonal(_)) => ModelParams::Vmf(VmfParams {
                mu: g.apply_sphere(&t.mu)?,
                kappa: t.kappa,
            }),
            (ModelParams::Hyperbolic(t), Isometry::Lorentz(_)) => ModelParams::Hyperbolic(HyperbolicParams {
                mu: g.apply_hyperboloid(&t.mu)?,
                kappa: t.kappa,
            }),
            (ModelParams::Langevin(t), Isometry::StiefelPair { .. }) => ModelParams::Langevin(LangevinParams {
                h: g.apply_stiefel(&t.h)?,
                lambda: t.lambda,
            }),
            (ModelParams::Wishart(t), Isometry::SpdConjugation(_) | Isometry::SpdScaling(_)) => {
                ModelParams::Wishart(WishartParams {
                    dof: t.dof,
                    sigma: SpdMatrix::new(symmetrize(g.apply_spd(&t.sigma)?.matrix()))?,
                })
            }
            (ModelParams::Torus(t), Isometry::TorusElement(gs)) => {
                let p = t.p();
                let dets: Vec<f64> = gs.iter().map(|m| m.determinant().signum()).collect();
                let mut lambda = t.lambda.clone();
                for i in 0..p {
                    for j in (i + 1)..p {
                        lambda[lambda_index(i, j, p)] *= dets[i] * dets[j];
                    }
                }
                ModelParams::Torus(TorusModelParams {
                    mu: g.apply_torus(&t.mu)?,
                    kappa: t.kappa.clone(),
                    lambda,
                })
            }
            _ => return Err(Error::VariantMismatch),
        })
    }

    /// One draw. Torus draws run a fresh Gibbs chain from `μ` for the default burn-in.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ManifoldPoint> {
        Ok(match self {
            ModelParams::Vmf(t) => vmf_sample(t, rng).into(),
            ModelParams::Hyperbolic(t) => hyperbolic_sample(t, rng).into(),
            ModelParams::Langevin(t) => langevin_sample(t, rng)?.into(),
            ModelParams::Wishart(t) => wishart_sample(t, rng).into(),
            ModelParams::Torus(t) => torus_gibbs_sample(t, GibbsConfig::default().burn_in, rng).into(),
        })
    }

    /// `n` draws; uses prebuilt samplers where construction is costly, and a single
    /// Gibbs chain (per `gibbs`) for the torus.
    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, gibbs: GibbsConfig, rng: &mut R) -> Result<Vec<ManifoldPoint>> {
        Ok(match self {
            ModelParams::Hyperbolic(t) => {
                let radial = RadialSampler::new(t.mu.dim(), t.kappa);
                (0..n).map(|_| hyperbolic_sample_with(t, &radial, rng).into()).collect()
            }
            ModelParams::Langevin(t) => {
                let s = LangevinSampler::new(t.clone(), rng)?;
                (0..n).map(|_| s.sample(rng).into()).collect()
            }
            ModelParams::Torus(t) => torus_gibbs_chain(t, n, gibbs, rng).into_iter().map(Into::into).collect(),
            _ => (0..n).map(|_| self.sample(rng)).collect::<Result<Vec<_>>>()?,
        })
    }

    /// Location parameter, which is the population Fréchet mean for every family except
    /// the Wishart (whose mean under the log-Euclidean metric has no closed form).
    pub fn location(&self) -> Option<ManifoldPoint> {
        match self {
            ModelParams::Vmf(t) => Some(t.mu.clone().into()),
            ModelParams::Hyperbolic(t) => Some(t.mu.clone().into()),
            ModelParams::Langevin(t) => Some(StiefelFrame::clone(&t.h).into()),
            ModelParams::Torus(t) => Some(t.mu.clone().into()),
            ModelParams::Wishart(_) => None,
        }
    }
}
