use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::wishart::{frame_matrix, sorted_eigen};
use super::{EstimatorOptions, MreDiagnostics, OrbitLabel, WishartDraws};
use crate::error::{Error, Result};
use crate::frechet::sample_frechet_mean;
use crate::manifolds::{boost_from_apex, minkowski, Metric};
use crate::mcmc::{
    gibbs_torus_posterior, metropolis_hastings, ChainTrace, GroupKind, GroupProposal, McmcConfig, ProposalKind,
    AUTO_MIN_ACCEPTANCE, AUTO_PILOT,
};
use crate::{HyperboloidPoint, Isometry, ManifoldPoint, SpdMatrix, StiefelFrame, TorusPoint, UnitVector};

/// Seed offset for the pilot chain behind [`ProposalKind::Auto`].
const PILOT_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// [`mre_monte_carlo_with`] under default options.
pub fn mre_monte_carlo<R: Rng + ?Sized>(
    data: &[ManifoldPoint],
    orbit: &OrbitLabel,
    cfg: &McmcConfig,
    rng: &mut R,
) -> Result<(ManifoldPoint, MreDiagnostics)> {
    mre_monte_carlo_with(data, orbit, cfg, &EstimatorOptions::default(), rng)
}

/// Bayes estimate under the Haar prior on the orbit through the canonical `θ₀`:
/// sample `g` from `p_n(x | gθ₀)`, push `E P_{θ₀}` through each draw and take the
/// sample Fréchet mean of the pushed points.
///
/// On the torus the location is drawn directly from its posterior by Gibbs
/// sampling, and `E P_{gθ₀}` is the location itself. For a scalar Wishart the
/// orthogonal group acts trivially, so the positive scalings act instead.
pub fn mre_monte_carlo_with<R: Rng + ?Sized>(
    data: &[ManifoldPoint],
    orbit: &OrbitLabel,
    cfg: &McmcConfig,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Result<(ManifoldPoint, MreDiagnostics)> {
    cfg.validate()?;
    let first = data.first().ok_or(Error::EmptyInput)?;
    if data.iter().any(|x| x.kind() != first.kind()) {
        return Err(Error::VariantMismatch);
    }
    // Validates the orbit against the data dimensions.
    orbit.canonical(first)?;
    match orbit {
        OrbitLabel::Vmf { kappa } => mre_vmf(data, *kappa, cfg, opts, rng),
        OrbitLabel::Hyperbolic { kappa, radius } => mre_hyperbolic(data, *kappa, *radius, cfg, opts, rng),
        OrbitLabel::Langevin { lambda } => mre_langevin(data, *lambda, cfg, opts, rng),
        OrbitLabel::Wishart { eigenvalues, dof } if eigenvalues.len() == 1 => {
            mre_wishart_scalar(data, eigenvalues[0], *dof, cfg, opts, rng)
        }
        OrbitLabel::Wishart { eigenvalues, dof } => mre_wishart(data, eigenvalues, *dof, cfg, opts, rng),
        OrbitLabel::Torus { kappa, lambda } => mre_torus(data, kappa, lambda, cfg, opts, rng),
    }
}

/// Runs the group chain, resolving [`ProposalKind::Auto`] by a Haar pilot.
fn run_group_chain<F, R>(
    group: GroupKind,
    mut target: F,
    init: Isometry,
    cfg: &McmcConfig,
    scale_hint: f64,
    rng: &mut R,
) -> Result<(ChainTrace<Isometry>, ProposalKind)>
where
    F: FnMut(&Isometry) -> f64,
    R: Rng + ?Sized,
{
    let kind = match cfg.proposal {
        ProposalKind::Auto if !group.is_compact() => ProposalKind::RandomWalk(scale_hint),
        ProposalKind::Auto => {
            let pilot_cfg = McmcConfig {
                iterations: AUTO_PILOT,
                burn_in: 0,
                thin: 1,
                proposal: ProposalKind::UniformHaar,
                seed: cfg.seed.map(|s| s ^ PILOT_SALT),
            };
            let haar = GroupProposal::new(group, ProposalKind::UniformHaar)?;
            let pilot = metropolis_hastings(&mut target, &haar, init.clone(), &pilot_cfg, rng)?;
            if pilot.acceptance_rate < AUTO_MIN_ACCEPTANCE {
                ProposalKind::RandomWalk(scale_hint)
            } else {
                ProposalKind::UniformHaar
            }
        }
        k => k,
    };
    let proposal = GroupProposal::new(group, kind)?;
    let trace = metropolis_hastings(&mut target, &proposal, init, cfg, rng)?;
    if trace.accepted_count == 0 {
        return Err(Error::ZeroAcceptance {
            iterations: cfg.iterations,
        });
    }
    Ok((trace, kind))
}

fn diagnostics(trace: &ChainTrace<Isometry>, proposal: ProposalKind, frechet_converged: bool) -> MreDiagnostics {
    MreDiagnostics {
        acceptance_rate: trace.acceptance_rate,
        chain_length: trace.states.len(),
        frechet_converged,
        proposal,
        steps: trace.steps.clone(),
    }
}

fn sum_coords<'a>(xs: impl Iterator<Item = &'a DVector<f64>>, dim: usize) -> DVector<f64> {
    let mut s = DVector::zeros(dim);
    for x in xs {
        s += x;
    }
    s
}

/// Orthogonal reflection taking `e₁` to `v`.
fn householder_to(v: &DVector<f64>) -> DMatrix<f64> {
    let d = v.len();
    let mut w = -v.clone();
    w[0] += 1.0;
    let n = w.norm();
    if n < 1e-12 {
        return DMatrix::identity(d, d);
    }
    w /= n;
    DMatrix::identity(d, d) - &w * w.transpose() * 2.0
}

fn mre_vmf<R: Rng + ?Sized>(
    data: &[ManifoldPoint],
    kappa: f64,
    cfg: &McmcConfig,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Result<(ManifoldPoint, MreDiagnostics)> {
    let xs: Vec<&UnitVector> = data.iter().filter_map(ManifoldPoint::as_sphere).collect();
    let d = xs[0].ambient_dim();
    let s = sum_coords(xs.iter().map(|x| x.coords()), d);
    let init = if s.norm() > 1e-12 {
        householder_to(&(&s / s.norm()))
    } else {
        DMatrix::identity(d, d)
    };
    // log p_n(x | U e₁) = κ ⟨S_n, U e₁⟩ + const
    let target = |g: &Isometry| match g {
        Isometry::Orthogonal(u) => kappa * u.column(0).dot(&s),
        _ => f64::NAN,
    };
    let hint = 1.0 / (1.0 + kappa * s.norm()).sqrt();
    let (trace, kind) = run_group_chain(GroupKind::Orthogonal(d), target, Isometry::Orthogonal(init), cfg, hint, rng)?;
    let pushed: Vec<ManifoldPoint> = trace
        .states
        .iter()
        .map(|g| match g {
            Isometry::Orthogonal(u) => UnitVector::normalize(u.column(0).into_owned()).map(Into::into),
            _ => Err(Error::VariantMismatch),
        })
        .collect::<Result<_>>()?;
    let fm = sample_frechet_mean(&pushed, Metric::SphereGeodesic, &opts.frechet)?;
    Ok((fm.mean, diagnostics(&trace, kind, fm.converged)))
}

fn mre_hyperbolic<R: Rng + ?Sized>(
    data: &[ManifoldPoint],
    kappa: f64,
    radius: f64,
    cfg: &McmcConfig,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Result<(ManifoldPoint, MreDiagnostics)> {
    let xs: Vec<&HyperboloidPoint> = data.iter().filter_map(ManifoldPoint::as_hyperboloid).collect();
    let k = xs[0].dim();
    let s = sum_coords(xs.iter().map(|x| x.coords()), k + 1);
    let start = HyperboloidPoint::normalize_timelike(s.clone(), radius)?;
    let init = boost_from_apex(&start);
    // log p_n(x | L·apex) = (κ/R²) Σ (xᵢ, R L e_{k+1}) + const
    let target = |g: &Isometry| match g {
        Isometry::Lorentz(l) => kappa / radius * minkowski(&s, &l.column(k).into_owned()),
        _ => f64::NAN,
    };
    let hint = 1.0 / (1.0 + kappa * xs.len() as f64).sqrt();
    let (trace, kind) = run_group_chain(GroupKind::Lorentz(k), target, Isometry::Lorentz(init), cfg, hint, rng)?;
    let pushed: Vec<ManifoldPoint> = trace
        .states
        .iter()
        .map(|g| match g {
            Isometry::Lorentz(l) => HyperboloidPoint::normalize_timelike(l.column(k) * radius, radius).map(Into::into),
            _ => Err(Error::VariantMismatch),
        })
        .collect::<Result<_>>()?;
    let fm = sample_frechet_mean(&pushed, Metric::Hyperbolic, &opts.frechet)?;
    Ok((fm.mean, diagnostics(&trace, kind, fm.converged)))
}

fn mre_langevin<R: Rng + ?Sized>(
    data: &[ManifoldPoint],
    lambda: f64,
    cfg: &McmcConfig,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Result<(ManifoldPoint, MreDiagnostics)> {
    let xs: Vec<&StiefelFrame> = data.iter().filter_map(ManifoldPoint::as_stiefel).collect();
    let (p, k) = xs[0].shape();
    let mut s = DMatrix::zeros(p, k);
    for x in &xs {
        s += x.matrix();
    }
    let frame = |u: &DMatrix<f64>, v: &DMatrix<f64>| u.columns(0, k) * v.transpose();
    // log p_n(x | U H₀ Vᵀ) = λ tr(S_nᵀ U H₀ Vᵀ) + const
    let target = |g: &Isometry| match g {
        Isometry::StiefelPair { u, v } => lambda * frame(u, v).dot(&s),
        _ => f64::NAN,
    };
    let hint = 1.0 / (1.0 + lambda * xs.len() as f64).sqrt();
    let init = GroupKind::StiefelPair(p, k).identity();
    let (trace, kind) = run_group_chain(GroupKind::StiefelPair(p, k), target, init, cfg, hint, rng)?;
    let pushed: Vec<ManifoldPoint> = trace
        .states
        .iter()
        .map(|g| match g {
            Isometry::StiefelPair { u, v } => Ok(StiefelFrame::from_raw(frame(u, v)).into()),
            _ => Err(Error::VariantMismatch),
        })
        .collect::<Result<_>>()?;
    let fm = sample_frechet_mean(&pushed, Metric::StiefelFrobenius, &opts.frechet)?;
    Ok((fm.mean, diagnostics(&trace, kind, fm.converged)))
}

fn spd_data(data: &[ManifoldPoint], dof: usize) -> Result<Vec<&SpdMatrix>> {
    let xs: Vec<&SpdMatrix> = data.iter().filter_map(ManifoldPoint::as_spd).collect();
    if xs.iter().any(|x| x.p() != xs[0].p()) {
        return Err(Error::DimensionMismatch {
            expected: xs[0].p(),
            found: xs.iter().map(|x| x.p()).find(|&q| q != xs[0].p()).unwrap_or(0),
        });
    }
    if dof < xs[0].p() {
        return Err(Error::InvalidParameter(format!("Wishart needs n >= p, got n = {dof}")));
    }
    Ok(xs)
}

/// `O(p)` acting by conjugation on the orbit through `diag(s)`.
///
/// The chain runs over `W` with `U = Q W`, `Q` the sorted eigenframe of `S_n = Σ Xᵢ`,
/// so the target depends on the data only through the eigenvalues of `S_n`. The
/// pushed means are averaged over axis sign flips, under which the posterior of `W`
/// is invariant; this keeps the diagonal of the mean log in the frame of `Q` and
/// makes the estimate exactly equivariant for a fixed stream.
fn mre_wishart<R: Rng + ?Sized>(
    data: &[ManifoldPoint],
    s: &[f64],
    dof: usize,
    cfg: &McmcConfig,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Result<(ManifoldPoint, MreDiagnostics)> {
    let xs = spd_data(data, dof)?;
    let p = s.len();
    let mut sum = DMatrix::zeros(p, p);
    for x in &xs {
        sum += x.matrix();
    }
    let (q, lam) = sorted_eigen(&sum);
    let draws = WishartDraws::new(p, dof, opts.population_draws, rng)?;
    let log_e0 = draws.log_frechet_mean(&s.iter().map(|v| v.ln()).collect::<Vec<_>>()).0;
    let inv_s: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
    // log p_n(x | QW Σ₀ WᵀQᵀ) = −½ tr(Σ₀⁻¹ Wᵀ Λ W) + const
    let target = |g: &Isometry| match g {
        Isometry::SpdConjugation(w) => {
            let mut t = 0.0;
            for i in 0..p {
                for k in 0..p {
                    t += inv_s[i] * w[(k, i)] * w[(k, i)] * lam[k];
                }
            }
            -0.5 * t
        }
        _ => f64::NAN,
    };
    // Curvature of the target along the rotation in the (i, k) plane at the mode is
    // (1/sᵢ − 1/sₖ)(λₖ − λᵢ); the step follows the stiffest plane.
    let mut stiff: f64 = 0.0;
    for i in 0..p {
        for k in i + 1..p {
            stiff = stiff.max(((inv_s[i] - inv_s[k]) * (lam[k] - lam[i])).abs());
        }
    }
    let planes = (p * (p - 1) / 2).max(1) as f64;
    let hint = (2.4 / (planes * stiff).sqrt()).min(1.0);
    let init = GroupKind::Conjugation(p).identity();
    let (trace, kind) = run_group_chain(GroupKind::Conjugation(p), target, init, cfg, hint, rng)?;
    let mut mean_diag = vec![0.0; p];
    for g in &trace.states {
        let Isometry::SpdConjugation(w) = g else {
            return Err(Error::VariantMismatch);
        };
        for (k, m) in mean_diag.iter_mut().enumerate() {
            *m += (0..p).map(|i| w[(k, i)] * w[(k, i)] * log_e0[i]).sum::<f64>();
        }
    }
    let n = trace.states.len() as f64;
    let e: Vec<f64> = mean_diag.iter().map(|m| (m / n).exp()).collect();
    let est = SpdMatrix::new(frame_matrix(&q, &e))?;
    Ok((est.into(), diagnostics(&trace, kind, true)))
}

/// Positive scalings `X ↦ aX` acting on the scalar Wishart orbit through `s₀`.
fn mre_wishart_scalar<R: Rng + ?Sized>(
    data: &[ManifoldPoint],
    s0: f64,
    dof: usize,
    cfg: &McmcConfig,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Result<(ManifoldPoint, MreDiagnostics)> {
    let xs = spd_data(data, dof)?;
    let total: f64 = xs.iter().map(|x| x.matrix()[(0, 0)]).sum();
    let nn = (dof * xs.len()) as f64;
    let draws = WishartDraws::new(1, dof, opts.population_draws, rng)?;
    let log_e0 = draws.log_frechet_mean(&[s0.ln()]).0[0];
    // log p_n(x | a s₀) = −(Nn/2) log(a s₀) − S/(2 a s₀) + const
    let target = |g: &Isometry| match g {
        Isometry::SpdScaling(a) => -0.5 * nn * (a * s0).ln() - total / (2.0 * a * s0),
        _ => f64::NAN,
    };
    let hint = 2.4 * (2.0 / nn).sqrt();
    let init = Isometry::SpdScaling(total / (nn * s0));
    let (trace, kind) = run_group_chain(GroupKind::Scaling, target, init, cfg, hint, rng)?;
    let mut acc = 0.0;
    for g in &trace.states {
        let Isometry::SpdScaling(a) = g else {
            return Err(Error::VariantMismatch);
        };
        acc += a.ln() + log_e0;
    }
    let est = SpdMatrix::from_diagonal(&[(acc / trace.states.len() as f64).exp()])?;
    Ok((est.into(), diagnostics(&trace, kind, true)))
}

fn mre_torus<R: Rng + ?Sized>(
    data: &[ManifoldPoint],
    kappa: &[f64],
    lambda: &[f64],
    cfg: &McmcConfig,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Result<(ManifoldPoint, MreDiagnostics)> {
    let xs: Vec<TorusPoint> = data.iter().filter_map(|x| x.as_torus().cloned()).collect();
    let init = sample_frechet_mean(data, Metric::FlatTorus, &opts.frechet)?.mean;
    let init = init.as_torus().cloned().ok_or(Error::VariantMismatch)?;
    let trace = gibbs_torus_posterior(&xs, kappa, lambda, init, cfg, rng)?;
    let pts: Vec<ManifoldPoint> = trace.states.iter().cloned().map(Into::into).collect();
    let fm = sample_frechet_mean(&pts, Metric::FlatTorus, &opts.frechet)?;
    Ok((
        fm.mean,
        MreDiagnostics {
            acceptance_rate: trace.acceptance_rate,
            chain_length: trace.states.len(),
            frechet_converged: fm.converged,
            proposal: cfg.proposal,
            steps: trace.steps,
        },
    ))
}
