//! Risk simulations behind the two benchmark tables, output formatting and
//! configuration.
//!
//! Replicate `r` of a scenario draws its data and runs each estimator on
//! ChaCha8 streams derived from `(seed, r)`, so results do not depend on how
//! replicates are scheduled across workers.

pub mod config;
pub mod format;
mod tables;

pub use config::{default_threads, KeyValueConfig, THREADS_ENV};
pub use format::{fmt_g6, rows_to_json, write_csv, write_json, CSV_HEADER};
pub use tables::{
    ratio_row, run_table1, run_table2, table1_scenarios, table2_scenarios, TableOverrides, DEFAULT_SEED, TABLE1_REPS,
    TABLE2_REPS,
};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{GibbsConfig, ModelParams};
use crate::error::{Error, Result};
use crate::estimators::{
    adaptive_mre, mre_hyperbolic_closed_form, mre_vmf_closed_form, torus_mle, wishart_mle_frechet,
    wishart_population_mean_eigs, EstimatorOptions, MreDiagnostics, OrbitEstimator, OrbitLabel, SphereLoss, TorusMleFit,
};
use crate::frechet::{log_euclidean_mean, sample_frechet_mean};
use crate::manifolds::{point_to_array, polar_factor, Metric};
use crate::mcmc::McmcConfig;
use crate::{ManifoldPoint, SpdMatrix, StiefelFrame};

/// Draws behind the true Fréchet mean when it has no closed form.
pub const TRUTH_DRAWS: usize = 200_000;
const TRUTH_SALT: u64 = 0x5eed_7a11_0f_7e57;

/// Estimators the harness can score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorSpec {
    SampleFrechet,
    /// Fréchet mean of the fitted model.
    Mle,
    /// Adaptive MRE on the orbit through the MLE.
    MreMleOrbit,
    /// Adaptive MRE on the method-of-moments orbit (Wishart).
    MreMomOrbit,
    /// MRE on the orbit of the true parameter.
    MreTrueOrbit,
    /// Returns the true Fréchet mean; zero risk by construction.
    Oracle,
}

impl EstimatorSpec {
    pub fn id(self) -> &'static str {
        match self {
            EstimatorSpec::SampleFrechet => "sample_frechet",
            EstimatorSpec::Mle => "mle",
            EstimatorSpec::MreMleOrbit => "mre_mle_orbit",
            EstimatorSpec::MreMomOrbit => "mre_mom_orbit",
            EstimatorSpec::MreTrueOrbit => "mre_true_orbit",
            EstimatorSpec::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "sample_frechet" => EstimatorSpec::SampleFrechet,
            "mle" => EstimatorSpec::Mle,
            "mre_mle_orbit" => EstimatorSpec::MreMleOrbit,
            "mre_mom_orbit" => EstimatorSpec::MreMomOrbit,
            "mre_true_orbit" => EstimatorSpec::MreTrueOrbit,
            "oracle" => EstimatorSpec::Oracle,
            _ => return Err(Error::Config(format!("unknown estimator {s:?}"))),
        })
    }
}

/// One simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: String,
    pub truth: ModelParams,
    /// Observations per data set.
    pub n: usize,
    pub reps: usize,
    pub estimators: Vec<EstimatorSpec>,
    pub mcmc: McmcConfig,
    pub options: EstimatorOptions,
    /// Gibbs settings for torus data.
    pub gibbs: GibbsConfig,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("sample size must be >= 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("estimator list is empty".into()));
        }
        if self.options.population_draws < 2 || self.options.inner_draws < 2 {
            return Err(Error::Config("Monte-Carlo draw counts must be >= 2".into()));
        }
        self.mcmc.validate()?;
        OrbitLabel::of(&self.truth).validate()
    }
}

/// One line of a risk table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskRow {
    pub scenario: String,
    pub estimator: String,
    pub p: usize,
    pub n: usize,
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    /// Replicates that entered the average.
    pub reps: usize,
    pub failures: usize,
    pub risk: f64,
    pub mc_se: f64,
    pub seed: u64,
}

/// Rows plus the per-replicate losses behind them, in replicate order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub rows: Vec<RiskRow>,
    /// `losses[e][r]` for estimator `e` over the retained replicates.
    pub losses: Vec<Vec<f64>>,
    /// Hash of each replicate's data set, shared by every estimator.
    pub data_hashes: Vec<u64>,
}

/// `(p, κ, λ)` columns describing the truth.
pub fn scenario_fields(truth: &ModelParams) -> (usize, Option<f64>, Option<f64>) {
    let common = |v: &[f64]| -> Option<f64> {
        let f = *v.first()?;
        v.iter().all(|x| (x - f).abs() <= 1e-12 * f.abs().max(1.0)).then_some(f)
    };
    match truth {
        ModelParams::Vmf(t) => (t.mu.ambient_dim(), Some(t.kappa), None),
        ModelParams::Hyperbolic(t) => (t.mu.dim(), Some(t.kappa), None),
        ModelParams::Langevin(t) => (t.h.shape().0, None, Some(t.lambda)),
        ModelParams::Wishart(t) => (t.p(), None, None),
        ModelParams::Torus(t) => (t.p(), common(&t.kappa), if t.p() > 1 { common(&t.lambda) } else { None }),
    }
}

/// Stable FNV-1a hash of a data set's coordinates.
pub fn data_hash(data: &[ManifoldPoint]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in data {
        for v in point_to_array(x) {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    h
}

/// Stream `slot` of replicate `r`.
pub fn replicate_rng(seed: u64, r: usize, slot: u8) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((r as u64) << 8) | u64::from(slot));
    rng
}

/// Estimand: the Fréchet mean of one draw, under the family's default metric. For
/// the Wishart family the estimand is the log-Euclidean mean of `X/n`, computed by
/// Monte Carlo in the eigenframe of `Σ`.
pub fn true_frechet_mean(truth: &ModelParams, seed: u64) -> Result<ManifoldPoint> {
    match truth {
        ModelParams::Wishart(t) => {
            let (q, s) = crate::estimators::sorted_eigen(t.sigma.matrix());
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ TRUTH_SALT);
            let e = wishart_population_mean_eigs(&s, t.dof, TRUTH_DRAWS, &mut rng)?;
            Ok(SpdMatrix::new(crate::estimators::frame_matrix(&q, &e))?.into())
        }
        _ => truth.location().ok_or_else(|| Error::Unsupported("no closed-form location".into())),
    }
}

fn wishart_dof(truth: &ModelParams) -> Option<usize> {
    match truth {
        ModelParams::Wishart(t) => Some(t.dof),
        _ => None,
    }
}

/// Output of one estimator run: `Ok(None)` marks a numerical failure.
type Outcome = Result<Option<PointEstimate>>;

/// An estimate, with the chain diagnostics when it came from an MRE.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub estimate: ManifoldPoint,
    pub diagnostics: Option<MreDiagnostics>,
}

impl From<ManifoldPoint> for PointEstimate {
    fn from(estimate: ManifoldPoint) -> Self {
        Self { estimate, diagnostics: None }
    }
}

fn numerical<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_numerical() => {
            log::debug!("estimator failure: {e}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn sample_frechet(data: &[ManifoldPoint], model: &ModelParams, opts: &EstimatorOptions) -> Result<Option<ManifoldPoint>> {
    if let ModelParams::Wishart(t) = model {
        let xs: Vec<&SpdMatrix> = data.iter().filter_map(ManifoldPoint::as_spd).collect();
        let m = log_euclidean_mean(&xs)?;
        return Ok(Some(SpdMatrix::new(m.matrix() / t.dof as f64)?.into()));
    }
    let metric = Metric::default_for(model.manifold());
    Ok(numerical(sample_frechet_mean(data, metric, &opts.frechet))?.and_then(|f| f.converged.then_some(f.mean)))
}

/// Torus MLE shared by the `mle` and `mre_mle_orbit` estimators of one replicate; the
/// fit uses no random numbers, so sharing it changes no result. `None` marks a
/// numerical failure or a fit that did not converge.
fn torus_fit(data: &[ManifoldPoint]) -> Result<Option<TorusMleFit>> {
    let xs: Vec<_> = data.iter().filter_map(|x| x.as_torus().cloned()).collect();
    Ok(numerical(torus_mle(&xs))?.filter(|f| f.converged))
}

fn mle<R: rand::Rng + ?Sized>(
    data: &[ManifoldPoint],
    model: &ModelParams,
    fit: Option<&Option<TorusMleFit>>,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Result<Option<ManifoldPoint>> {
    match model {
        ModelParams::Wishart(t) => {
            let p = t.p();
            let mut s = DMatrix::zeros(p, p);
            for x in data {
                s += x.as_spd().ok_or(Error::VariantMismatch)?.matrix();
            }
            let xbar = SpdMatrix::new(s / data.len() as f64)?;
            Ok(numerical(wishart_mle_frechet(&xbar, t.dof, opts.inner_draws, rng))?.map(Into::into))
        }
        ModelParams::Torus(_) => {
            let own;
            let fit = match fit {
                Some(f) => f,
                None => {
                    own = torus_fit(data)?;
                    &own
                }
            };
            Ok(fit.as_ref().map(|f| f.params.mu.clone().into()))
        }
        ModelParams::Vmf(_) => {
            let xs: Vec<_> = data.iter().filter_map(|x| x.as_sphere().cloned()).collect();
            Ok(numerical(mre_vmf_closed_form(&xs, SphereLoss::Geodesic))?.map(Into::into))
        }
        ModelParams::Hyperbolic(_) => {
            let xs: Vec<_> = data.iter().filter_map(|x| x.as_hyperboloid().cloned()).collect();
            Ok(numerical(mre_hyperbolic_closed_form(&xs))?.map(Into::into))
        }
        ModelParams::Langevin(t) => {
            let (p, k) = t.h.shape();
            let mut s = DMatrix::zeros(p, k);
            for x in data {
                s += x.as_stiefel().ok_or(Error::VariantMismatch)?.matrix();
            }
            Ok(numerical(polar_factor(&s).and_then(StiefelFrame::new))?.map(Into::into))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn dispatch<R: rand::Rng + ?Sized>(
    spec: EstimatorSpec,
    data: &[ManifoldPoint],
    model: &ModelParams,
    fit: Option<&Option<TorusMleFit>>,
    mcmc: &McmcConfig,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Outcome {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    if data.iter().any(|x| x.kind() != model.manifold()) {
        return Err(Error::VariantMismatch);
    }
    let adaptive = |est: OrbitEstimator, rng: &mut R| -> Outcome {
        let fit = numerical(adaptive_mre(data, &est, wishart_dof(model), mcmc, opts, rng))?;
        Ok(fit.and_then(|f| {
            (f.orbit_converged && f.diagnostics.frechet_converged).then_some(PointEstimate {
                estimate: f.estimate,
                diagnostics: Some(f.diagnostics),
            })
        }))
    };
    match spec {
        EstimatorSpec::SampleFrechet => Ok(sample_frechet(data, model, opts)?.map(Into::into)),
        EstimatorSpec::Mle => Ok(mle(data, model, fit, opts, rng)?.map(Into::into)),
        EstimatorSpec::MreMleOrbit => match model {
            ModelParams::Torus(_) => {
                let own;
                let fit = match fit {
                    Some(f) => f,
                    None => {
                        own = torus_fit(data)?;
                        &own
                    }
                };
                let Some(f) = fit else { return Ok(None) };
                let orbit = OrbitLabel::Torus {
                    kappa: f.params.kappa.clone(),
                    lambda: f.params.lambda.clone(),
                };
                adaptive(OrbitEstimator::Supplied(orbit), rng)
            }
            _ => adaptive(OrbitEstimator::Mle, rng),
        },
        EstimatorSpec::MreMomOrbit => adaptive(OrbitEstimator::MethodOfMoments, rng),
        EstimatorSpec::MreTrueOrbit => adaptive(OrbitEstimator::Supplied(OrbitLabel::of(model)), rng),
        EstimatorSpec::Oracle => Err(Error::Config("the oracle estimator needs a known truth".into())),
    }
}

/// Runs one estimator on a data set. `model` names the family and, for
/// `mre_true_orbit`, the orbit; its location is ignored. `Ok(None)` marks a numerical
/// failure or an unconverged solver.
pub fn estimate_point<R: rand::Rng + ?Sized>(
    spec: EstimatorSpec,
    data: &[ManifoldPoint],
    model: &ModelParams,
    mcmc: &McmcConfig,
    opts: &EstimatorOptions,
    rng: &mut R,
) -> Result<Option<PointEstimate>> {
    dispatch(spec, data, model, None, mcmc, opts, rng)
}

struct ReplicateCtx<'a> {
    data: &'a [ManifoldPoint],
    truth_mean: &'a ManifoldPoint,
    torus_fit: Option<Option<TorusMleFit>>,
    r: usize,
}

fn run_estimator(spec: EstimatorSpec, cfg: &SimConfig, ctx: &ReplicateCtx, slot: u8) -> Result<Option<ManifoldPoint>> {
    if spec == EstimatorSpec::Oracle {
        return Ok(Some(ctx.truth_mean.clone()));
    }
    let mut rng = replicate_rng(cfg.seed, ctx.r, slot);
    let out = dispatch(spec, ctx.data, &cfg.truth, ctx.torus_fit.as_ref(), &cfg.mcmc, &cfg.options, &mut rng)?;
    Ok(out.map(|p| p.estimate))
}

struct Replicate {
    hash: u64,
    losses: Option<Vec<f64>>,
}

fn run_replicate(cfg: &SimConfig, truth_mean: &ManifoldPoint, metric: Metric, r: usize) -> Result<Replicate> {
    let mut rng = replicate_rng(cfg.seed, r, 0);
    let data = cfg.truth.sample_n(cfg.n, cfg.gibbs, &mut rng)?;
    let hash = data_hash(&data);
    log::debug!("scenario {} replicate {r} data hash {hash:016x}", cfg.scenario);
    let ctx = ReplicateCtx {
        data: &data,
        truth_mean,
        torus_fit: if matches!(cfg.truth, ModelParams::Torus(_))
            && cfg.estimators.iter().any(|e| matches!(e, EstimatorSpec::Mle | EstimatorSpec::MreMleOrbit))
        {
            Some(torus_fit(&data)?)
        } else {
            None
        },
        r,
    };
    let mut losses = Vec::with_capacity(cfg.estimators.len());
    for (e, spec) in cfg.estimators.iter().enumerate() {
        let slot = u8::try_from(e + 1).map_err(|_| Error::Config("too many estimators".into()))?;
        match run_estimator(*spec, cfg, &ctx, slot)? {
            Some(est) => {
                let d = metric.distance(&est, truth_mean)?;
                losses.push(d * d);
            }
            None => {
                log::debug!("scenario {} replicate {r}: {} failed", cfg.scenario, spec.id());
                return Ok(Replicate { hash, losses: None });
            }
        }
    }
    Ok(Replicate { hash, losses: Some(losses) })
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Monte-Carlo risk of every estimator under the paired design: all estimators see the
/// same data, and a replicate on which any estimator fails is dropped for all of them
/// and counted in `failures`.
pub fn estimate_risk(cfg: &SimConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    // Per-replicate streams drive the chains; a fixed chain seed would repeat them.
    cfg.mcmc.seed = None;
    let truth_mean = true_frechet_mean(&cfg.truth, cfg.seed)?;
    let metric = Metric::default_for(cfg.truth.manifold());
    let reps: Vec<Replicate> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| run_replicate(&cfg, &truth_mean, metric, r))
        .collect::<Result<_>>()?;
    let k = cfg.estimators.len();
    let mut losses = vec![Vec::new(); k];
    let mut failures = 0;
    for rep in &reps {
        match &rep.losses {
            Some(l) => l.iter().zip(losses.iter_mut()).for_each(|(v, col)| col.push(*v)),
            None => failures += 1,
        }
    }
    let (p, kappa, lambda) = scenario_fields(&cfg.truth);
    // Wishart scenarios are indexed by degrees of freedom rather than sample size.
    let n_col = match &cfg.truth {
        ModelParams::Wishart(w) => w.dof,
        _ => cfg.n,
    };
    let rows = cfg
        .estimators
        .iter()
        .zip(&losses)
        .map(|(spec, l)| {
            let (risk, mc_se) = mean_se(l);
            RiskRow {
                scenario: cfg.scenario.clone(),
                estimator: spec.id().to_string(),
                p,
                n: n_col,
                kappa,
                lambda,
                reps: l.len(),
                failures,
                risk,
                mc_se,
                seed: cfg.seed,
            }
        })
        .collect();
    Ok(ScenarioResult {
        rows,
        losses,
        data_hashes: reps.iter().map(|r| r.hash).collect(),
    })
}
