//! Metropolis–Hastings and Gibbs drivers.
//!
//! All arithmetic is in log space. A driver is a deterministic function of its
//! inputs and RNG stream; with [`McmcConfig::seed`] set it ignores the caller's
//! RNG and reseeds a private ChaCha8 stream.

mod gibbs;
mod group;

pub use gibbs::{gibbs_torus_posterior, torus_posterior_natural};
pub use group::{lorentz_algebra_exp, GroupKind, GroupProposal};

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Proposal family for chains over groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProposalKind {
    /// Independence proposals from Haar measure (compact groups only).
    UniformHaar,
    /// Left-invariant geodesic perturbation with the given scale.
    RandomWalk(f64),
    /// Pilot run with Haar proposals, falling back to a random walk when the pilot
    /// acceptance rate is below [`AUTO_MIN_ACCEPTANCE`].
    Auto,
}

/// Length of the pilot run behind [`ProposalKind::Auto`].
pub const AUTO_PILOT: usize = 200;
/// Pilot acceptance rate below which [`ProposalKind::Auto`] switches to a random walk.
pub const AUTO_MIN_ACCEPTANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub proposal: ProposalKind,
    /// When set, the driver runs on its own stream seeded from this value.
    pub seed: Option<u64>,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 1500,
            burn_in: 500,
            thin: 1,
            proposal: ProposalKind::UniformHaar,
            seed: None,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::Config(format!(
                "MCMC needs iterations > burn_in, got {} <= {}",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("MCMC thin must be >= 1".into()));
        }
        if let ProposalKind::RandomWalk(s) = self.proposal {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Config(format!("random-walk scale must be positive, got {s}")));
            }
        }
        Ok(())
    }

    /// Number of retained states, `(iterations − burn_in) / thin`.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Live state of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState<S> {
    pub current: S,
    pub log_target: f64,
    pub accepted_count: usize,
    pub step_index: usize,
}

/// One row of the per-step debug trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub log_target: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace<S> {
    pub states: Vec<S>,
    /// Log target at each retained state.
    pub log_targets: Vec<f64>,
    pub acceptance_rate: f64,
    pub accepted_count: usize,
    pub seed: Option<u64>,
    /// Every iteration, including burn-in.
    pub steps: Vec<StepRecord>,
}

impl<S> ChainTrace<S> {
    /// Writes `step,log_target,accepted` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_steps_csv(w, &self.steps)
    }
}

/// Writes `step,log_target,accepted` rows.
pub fn write_steps_csv<W: Write>(mut w: W, steps: &[StepRecord]) -> Result<()> {
    writeln!(w, "step,log_target,accepted")?;
    for r in steps {
        writeln!(w, "{},{:e},{}", r.step, r.log_target, u8::from(r.accepted))?;
    }
    Ok(())
}

/// A Metropolis–Hastings proposal kernel.
pub trait Proposal<S> {
    fn propose<R: Rng + ?Sized>(&self, current: &S, rng: &mut R) -> S;

    /// `log q(current | proposed) − log q(proposed | current)`; zero for symmetric
    /// and Haar-independence kernels.
    fn log_correction(&self, _current: &S, _proposed: &S) -> f64 {
        0.0
    }
}

/// Runs a Metropolis–Hastings chain.
///
/// A NaN target at `init` is fatal; at a proposal it counts as `−∞`.
pub fn metropolis_hastings<S, F, P, R>(
    mut log_target: F,
    proposal: &P,
    init: S,
    cfg: &McmcConfig,
    rng: &mut R,
) -> Result<ChainTrace<S>>
where
    S: Clone,
    F: FnMut(&S) -> f64,
    P: Proposal<S>,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    match cfg.seed {
        Some(seed) => {
            let mut own = ChaCha8Rng::seed_from_u64(seed);
            run_mh(&mut log_target, proposal, init, cfg, &mut own)
        }
        None => run_mh(&mut log_target, proposal, init, cfg, rng),
    }
}

fn run_mh<S, F, P, R>(log_target: &mut F, proposal: &P, init: S, cfg: &McmcConfig, rng: &mut R) -> Result<ChainTrace<S>>
where
    S: Clone,
    F: FnMut(&S) -> f64,
    P: Proposal<S>,
    R: Rng + ?Sized,
{
    let lt0 = log_target(&init);
    if lt0.is_nan() {
        return Err(Error::NanTarget { step: 0 });
    }
    if lt0 == f64::NEG_INFINITY {
        return Err(Error::InvalidParameter("log target is -inf at the initial state".into()));
    }
    let mut state = ChainState {
        current: init,
        log_target: lt0,
        accepted_count: 0,
        step_index: 0,
    };
    let retained = cfg.retained();
    let mut states = Vec::with_capacity(retained);
    let mut log_targets = Vec::with_capacity(retained);
    let mut steps = Vec::with_capacity(cfg.iterations);
    for i in 0..cfg.iterations {
        let cand = proposal.propose(&state.current, rng);
        let mut lt = log_target(&cand);
        if lt.is_nan() {
            lt = f64::NEG_INFINITY;
        }
        let log_ratio = lt - state.log_target + proposal.log_correction(&state.current, &cand);
        let u: f64 = rng.random();
        let accepted = lt > f64::NEG_INFINITY && (log_ratio >= 0.0 || u.ln() < log_ratio);
        if accepted {
            state.current = cand;
            state.log_target = lt;
            state.accepted_count += 1;
        }
        state.step_index = i + 1;
        steps.push(StepRecord {
            step: i,
            log_target: state.log_target,
            accepted,
        });
        if i >= cfg.burn_in && (i - cfg.burn_in + 1) % cfg.thin == 0 && states.len() < retained {
            states.push(state.current.clone());
            log_targets.push(state.log_target);
        }
    }
    Ok(ChainTrace {
        states,
        log_targets,
        acceptance_rate: state.accepted_count as f64 / cfg.iterations as f64,
        accepted_count: state.accepted_count,
        seed: cfg.seed,
        steps,
    })
}

/// Effective sample size by Geyer's initial positive sequence, capped at `n`.
/// A constant trace has ESS `n` by convention.
pub fn effective_sample_size(trace: &[f64]) -> Result<f64> {
    let n = trace.len();
    if n < 10 {
        return Err(Error::InvalidParameter(format!("ESS needs at least 10 values, got {n}")));
    }
    let nf = n as f64;
    let mean = trace.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = trace.iter().map(|x| x - mean).collect();
    let var = centered.iter().map(|x| x * x).sum::<f64>() / nf;
    if !(var > 1e-300 * mean.abs().max(1.0)) {
        return Ok(nf);
    }
    let rho = |lag: usize| -> f64 {
        let s: f64 = centered[..n - lag].iter().zip(&centered[lag..]).map(|(a, b)| a * b).sum();
        s / nf / var
    };
    let mut tau = -1.0;
    let mut m = 0;
    while 2 * m + 1 < n {
        let gamma = rho(2 * m) + rho(2 * m + 1);
        if gamma <= 0.0 {
            break;
        }
        tau += 2.0 * gamma;
        m += 1;
    }
    Ok((nf / tau.max(1.0 / nf)).min(nf))
}
