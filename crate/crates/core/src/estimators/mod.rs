//! Maximum likelihood, closed-form and Monte-Carlo minimum risk equivariant (MRE)
//! estimators, orbit estimators and the adaptive MRE.

mod adaptive;
mod mre;
mod nelder_mead;
mod torus;
mod wishart;

pub use adaptive::{adaptive_mre, estimate_orbit, AdaptiveFit, OrbitEstimator};
pub use mre::{mre_monte_carlo, mre_monte_carlo_with};
pub use nelder_mead::{nelder_mead, NelderMeadConfig, NelderMeadResult};
pub use torus::{torus_mle, torus_mu_hat, TorusMleFit};
pub use wishart::{
    frame_matrix, sorted_eigen, wishart_mle_frechet, wishart_mom_orbit, wishart_population_mean_eigs, MomFit,
    WishartDraws,
};

use nalgebra::DVector;

use crate::distributions::{
    HyperbolicParams, LangevinParams, ModelParams, TorusModelParams, VmfParams, WishartParams,
};
use crate::error::{Error, Result};
use crate::frechet::{FrechetSolverConfig, DEFAULT_POPULATION_DRAWS};
use crate::manifolds::{minkowski, ManifoldKind};
use crate::mcmc::{ProposalKind, StepRecord};
use crate::{HyperboloidPoint, ManifoldPoint, SpdMatrix, StiefelFrame, TorusPoint, UnitVector};

/// Default draw count for the inner Wishart MLE and method-of-moments loops.
pub const DEFAULT_INNER_DRAWS: usize = 2000;

/// Index of a parameter-space orbit.
#[derive(Debug, Clone, PartialEq)]
pub enum OrbitLabel {
    Vmf { kappa: f64 },
    Hyperbolic { kappa: f64, radius: f64 },
    Langevin { lambda: f64 },
    /// Eigenvalues of `Σ` sorted descending; the known degrees of freedom ride along
    /// because the data alone do not carry them.
    Wishart { eigenvalues: Vec<f64>, dof: usize },
    Torus { kappa: Vec<f64>, lambda: Vec<f64> },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl OrbitLabel {
    pub fn validate(&self) -> Result<()> {
        match self {
            OrbitLabel::Vmf { kappa } => positive("kappa", *kappa),
            OrbitLabel::Hyperbolic { kappa, radius } => {
                positive("kappa", *kappa)?;
                positive("radius", *radius)
            }
            OrbitLabel::Langevin { lambda } => positive("lambda", *lambda),
            OrbitLabel::Wishart { eigenvalues, dof } => {
                if eigenvalues.is_empty() {
                    return Err(Error::EmptyInput);
                }
                for &e in eigenvalues {
                    positive("Wishart eigenvalue", e)?;
                }
                if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
                    return Err(Error::InvalidParameter("Wishart eigenvalues must be sorted descending".into()));
                }
                if *dof < eigenvalues.len() {
                    return Err(Error::InvalidParameter(format!("Wishart needs n >= p, got n = {dof}")));
                }
                Ok(())
            }
            OrbitLabel::Torus { kappa, lambda } => {
                let p = kappa.len();
                if p == 0 {
                    return Err(Error::EmptyInput);
                }
                if lambda.len() != p * (p - 1) / 2 {
                    return Err(Error::DimensionMismatch {
                        expected: p * (p - 1) / 2,
                        found: lambda.len(),
                    });
                }
                for &k in kappa {
                    positive("kappa", k)?;
                }
                if lambda.iter().any(|l| !l.is_finite()) {
                    return Err(Error::InvalidParameter("lambda must be finite".into()));
                }
                Ok(())
            }
        }
    }

    pub fn manifold(&self) -> ManifoldKind {
        match self {
            OrbitLabel::Vmf { .. } => ManifoldKind::Sphere,
            OrbitLabel::Hyperbolic { .. } => ManifoldKind::Hyperboloid,
            OrbitLabel::Langevin { .. } => ManifoldKind::Stiefel,
            OrbitLabel::Wishart { .. } => ManifoldKind::Spd,
            OrbitLabel::Torus { .. } => ManifoldKind::Torus,
        }
    }

    /// Orbit through `theta`.
    pub fn of(theta: &ModelParams) -> Self {
        match theta {
            ModelParams::Vmf(t) => OrbitLabel::Vmf { kappa: t.kappa },
            ModelParams::Hyperbolic(t) => OrbitLabel::Hyperbolic {
                kappa: t.kappa,
                radius: t.radius(),
            },
            ModelParams::Langevin(t) => OrbitLabel::Langevin { lambda: t.lambda },
            ModelParams::Wishart(t) => OrbitLabel::Wishart {
                eigenvalues: t.sigma.sorted_eigenvalues(),
                dof: t.dof,
            },
            ModelParams::Torus(t) => OrbitLabel::Torus {
                kappa: t.kappa.clone(),
                lambda: t.lambda.clone(),
            },
        }
    }

    /// Canonical representative `θ₀`, with dimensions read off `like`: first basis
    /// vector, apex, `[I_k 0]ᵀ`, `diag(eigenvalues)` or zero angles.
    pub fn canonical(&self, like: &ManifoldPoint) -> Result<ModelParams> {
        self.validate()?;
        if like.kind() != self.manifold() {
            return Err(Error::VariantMismatch);
        }
        Ok(match (self, like) {
            (OrbitLabel::Vmf { kappa }, ManifoldPoint::Sphere(x)) => {
                ModelParams::Vmf(VmfParams::new(UnitVector::basis(x.ambient_dim(), 0), *kappa)?)
            }
            (OrbitLabel::Hyperbolic { kappa, radius }, ManifoldPoint::Hyperboloid(x)) => {
                if (x.radius() - radius).abs() > 1e-12 * radius {
                    return Err(Error::RadiusMismatch(x.radius(), *radius));
                }
                ModelParams::Hyperbolic(HyperbolicParams::new(HyperboloidPoint::apex(x.dim(), *radius), *kappa)?)
            }
            (OrbitLabel::Langevin { lambda }, ManifoldPoint::Stiefel(x)) => {
                let (p, k) = x.shape();
                ModelParams::Langevin(LangevinParams::new(StiefelFrame::canonical(p, k), *lambda)?)
            }
            (OrbitLabel::Wishart { eigenvalues, dof }, ManifoldPoint::Spd(x)) => {
                if x.p() != eigenvalues.len() {
                    return Err(Error::DimensionMismatch {
                        expected: eigenvalues.len(),
                        found: x.p(),
                    });
                }
                ModelParams::Wishart(WishartParams::new(*dof, SpdMatrix::from_diagonal(eigenvalues)?)?)
            }
            (OrbitLabel::Torus { kappa, lambda }, ManifoldPoint::Torus(x)) => {
                if x.p() != kappa.len() {
                    return Err(Error::DimensionMismatch {
                        expected: kappa.len(),
                        found: x.p(),
                    });
                }
                ModelParams::Torus(TorusModelParams::new(
                    TorusPoint::from_angles(&vec![0.0; kappa.len()]),
                    kappa.clone(),
                    lambda.clone(),
                )?)
            }
            _ => unreachable!("kinds checked above"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MreDiagnostics {
    pub acceptance_rate: f64,
    /// Retained states behind the estimate.
    pub chain_length: usize,
    pub frechet_converged: bool,
    /// Proposal actually used, after resolving [`ProposalKind::Auto`].
    pub proposal: ProposalKind,
    /// Every iteration of the chain behind the estimate, for debug dumps.
    pub steps: Vec<StepRecord>,
}

/// Monte-Carlo knobs shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    /// Draws behind `E P_{θ₀}` when it has no closed form.
    pub population_draws: usize,
    /// Draws behind the Wishart MLE and method-of-moments inner loops.
    pub inner_draws: usize,
    pub frechet: FrechetSolverConfig<f64>,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            population_draws: DEFAULT_POPULATION_DRAWS,
            inner_draws: DEFAULT_INNER_DRAWS,
            frechet: FrechetSolverConfig::default(),
        }
    }
}

/// Loss under which the vMF MRE is computed. Both give `S_n/‖S_n‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereLoss {
    Geodesic,
    Chordal,
}

/// `S_n/‖S_n‖` with `S_n = Σ xᵢ`.
pub fn mre_vmf_closed_form(data: &[UnitVector], _loss: SphereLoss) -> Result<UnitVector> {
    let first = data.first().ok_or(Error::EmptyInput)?;
    let mut s = DVector::zeros(first.ambient_dim());
    for x in data {
        if x.ambient_dim() != s.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                found: x.ambient_dim(),
            });
        }
        s += x.coords();
    }
    if s.norm() < 1e-12 {
        return Err(Error::UndefinedEstimate("resultant vector vanishes".into()));
    }
    UnitVector::normalize(s)
}

/// `R S_n / (−(S_n, S_n))^{1/2}`.
pub fn mre_hyperbolic_closed_form(data: &[HyperboloidPoint]) -> Result<HyperboloidPoint> {
    let first = data.first().ok_or(Error::EmptyInput)?;
    let r = first.radius();
    let mut s = DVector::zeros(first.coords().len());
    for x in data {
        if (x.radius() - r).abs() > 1e-12 * r {
            return Err(Error::RadiusMismatch(r, x.radius()));
        }
        if x.coords().len() != s.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                found: x.coords().len(),
            });
        }
        s += x.coords();
    }
    let q = -minkowski(&s, &s);
    if !(q > 0.0) {
        return Err(Error::UndefinedEstimate("Minkowski sum is not timelike".into()));
    }
    HyperboloidPoint::new(s * (r / q.sqrt()), r)
}

/// With one observation the Langevin MRE of `H` is the observation itself.
pub fn mre_langevin_single_obs(data: &[StiefelFrame]) -> Result<StiefelFrame> {
    match data {
        [x] => Ok(x.clone()),
        _ => Err(Error::InvalidParameter(format!(
            "closed-form Langevin MRE needs exactly one observation, got {}",
            data.len()
        ))),
    }
}
