use std::f64::consts::FRAC_PI_2;

use super::{estimate_risk, EstimatorSpec, RiskRow, ScenarioResult, SimConfig};
use crate::distributions::{GibbsConfig, ModelParams, TorusModelParams, WishartParams};
use crate::error::{Error, Result};
use crate::estimators::EstimatorOptions;
use crate::mcmc::{McmcConfig, ProposalKind};
use crate::{SpdMatrix, TorusPoint};

/// Default replicate counts of the two tables.
pub const TABLE1_REPS: usize = 500;
pub const TABLE2_REPS: usize = 1000;
pub const DEFAULT_SEED: u64 = 20_190_601;

const TABLE1_P: [usize; 2] = [2, 4];
const TABLE1_N: [usize; 3] = [5, 10, 40];
/// `(κ, λ, n)` for every Table 2 scenario; `p = 3` throughout.
const TABLE2_SCENARIOS: [(f64, f64, usize); 5] = [(2.0, 1.0, 5), (2.0, 1.0, 25), (2.0, 3.0, 5), (2.0, 3.0, 15), (2.0, 3.0, 25)];

/// Knobs shared by both tables; `None` keeps the default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableOverrides {
    pub p: Option<Vec<usize>>,
    pub n: Option<Vec<usize>>,
    pub kappa: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub mcmc_iters: Option<usize>,
    pub burn_in: Option<usize>,
    pub proposal: Option<ProposalKind>,
    pub population_draws: Option<usize>,
    pub inner_draws: Option<usize>,
    /// Sweeps between retained torus observations.
    pub gibbs_thin: Option<usize>,
    pub estimators: Option<Vec<EstimatorSpec>>,
}

impl TableOverrides {
    fn mcmc(&self) -> McmcConfig {
        let d = McmcConfig::default();
        McmcConfig {
            iterations: self.mcmc_iters.unwrap_or(d.iterations),
            burn_in: self.burn_in.unwrap_or(d.burn_in),
            thin: 1,
            proposal: self.proposal.unwrap_or(ProposalKind::Auto),
            seed: None,
        }
    }

    fn options(&self) -> EstimatorOptions {
        let d = EstimatorOptions::default();
        EstimatorOptions {
            population_draws: self.population_draws.unwrap_or(d.population_draws),
            inner_draws: self.inner_draws.unwrap_or(d.inner_draws),
            ..d
        }
    }

    fn keep<T: PartialEq>(filter: &Option<Vec<T>>, v: T) -> bool {
        filter.as_ref().is_none_or(|f| f.contains(&v))
    }
}

/// `Wishart_p(n, diag(1, …, p))` for `p ∈ {2, 4}`, `n ∈ {5, 10, 40}`.
pub fn table1_scenarios(o: &TableOverrides) -> Result<Vec<SimConfig>> {
    let estimators = o.estimators.clone().unwrap_or_else(|| {
        vec![
            EstimatorSpec::SampleFrechet,
            EstimatorSpec::Mle,
            EstimatorSpec::MreMleOrbit,
            EstimatorSpec::MreMomOrbit,
        ]
    });
    let mut out = Vec::new();
    for p in TABLE1_P.into_iter().filter(|&p| TableOverrides::keep(&o.p, p)) {
        let diag: Vec<f64> = (1..=p).map(|i| i as f64).collect();
        for n in TABLE1_N.into_iter().filter(|&n| TableOverrides::keep(&o.n, n)) {
            out.push(SimConfig {
                scenario: format!("t1_p{p}_n{n}"),
                truth: ModelParams::Wishart(WishartParams::new(n, SpdMatrix::from_diagonal(&diag)?)?),
                n: 1,
                reps: o.reps.unwrap_or(TABLE1_REPS),
                estimators: estimators.clone(),
                mcmc: o.mcmc(),
                options: o.options(),
                gibbs: GibbsConfig::default(),
                seed: o.seed.unwrap_or(DEFAULT_SEED),
            });
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no Table 1 scenario matches the p/n filters".into()));
    }
    Ok(out)
}

/// Torus scenarios with `p = 3`, `μᵢ = (0, 1)`, homogeneous `κ` and `λ`.
pub fn table2_scenarios(o: &TableOverrides) -> Result<Vec<SimConfig>> {
    if o.p.as_ref().is_some_and(|p| !p.contains(&3)) {
        return Err(Error::Config("Table 2 scenarios have p = 3".into()));
    }
    let estimators = o
        .estimators
        .clone()
        .unwrap_or_else(|| vec![EstimatorSpec::SampleFrechet, EstimatorSpec::Mle, EstimatorSpec::MreMleOrbit]);
    let mu = TorusPoint::from_angles(&[FRAC_PI_2; 3]);
    let mut out = Vec::new();
    for (kappa, lambda, n) in TABLE2_SCENARIOS {
        if !(TableOverrides::keep(&o.n, n) && TableOverrides::keep(&o.kappa, kappa) && TableOverrides::keep(&o.lambda, lambda)) {
            continue;
        }
        out.push(SimConfig {
            scenario: format!("t2_k{kappa}_l{lambda}_n{n}"),
            truth: ModelParams::Torus(TorusModelParams::homogeneous(mu.clone(), kappa, lambda)?),
            n,
            reps: o.reps.unwrap_or(TABLE2_REPS),
            estimators: estimators.clone(),
            mcmc: o.mcmc(),
            options: o.options(),
            gibbs: GibbsConfig {
                thin: o.gibbs_thin.unwrap_or(GibbsConfig::default().thin),
                ..GibbsConfig::default()
            },
            seed: o.seed.unwrap_or(DEFAULT_SEED),
        });
    }
    if out.is_empty() {
        return Err(Error::Config("no Table 2 scenario matches the filters".into()));
    }
    Ok(out)
}

pub fn run_table1(o: &TableOverrides) -> Result<Vec<RiskRow>> {
    let mut rows = Vec::new();
    for cfg in table1_scenarios(o)? {
        log::info!("running {}", cfg.scenario);
        rows.extend(estimate_risk(&cfg)?.rows);
    }
    Ok(rows)
}

/// Risk ratio `risk(num)/risk(den)` over the shared replicates, with a delta-method
/// standard error that accounts for the pairing.
pub fn ratio_row(res: &ScenarioResult, num: usize, den: usize) -> RiskRow {
    let (a, b) = (&res.losses[num], &res.losses[den]);
    let m = a.len() as f64;
    let ma = a.iter().sum::<f64>() / m;
    let mb = b.iter().sum::<f64>() / m;
    let r = ma / mb;
    let mc_se = if a.len() > 1 {
        let cov = |x: &[f64], mx: f64, y: &[f64], my: f64| {
            x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum::<f64>() / (m - 1.0)
        };
        let var = (cov(a, ma, a, ma) + r * r * cov(b, mb, b, mb) - 2.0 * r * cov(a, ma, b, mb)) / (mb * mb);
        (var.max(0.0) / m).sqrt()
    } else {
        0.0
    };
    let base = &res.rows[num];
    RiskRow {
        estimator: format!("{}/{}", res.rows[num].estimator, res.rows[den].estimator),
        risk: r,
        mc_se,
        ..base.clone()
    }
}

/// Risk rows for each scenario followed by the ratios of every other estimator to
/// the last one in the list (the adaptive MRE by default).
pub fn run_table2(o: &TableOverrides) -> Result<Vec<RiskRow>> {
    let mut rows = Vec::new();
    for cfg in table2_scenarios(o)? {
        log::info!("running {}", cfg.scenario);
        let res = estimate_risk(&cfg)?;
        rows.extend(res.rows.iter().cloned());
        let den = cfg.estimators.len() - 1;
        for num in 0..den {
            rows.push(ratio_row(&res, num, den));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_grids() {
        assert_eq!(table1_scenarios(&TableOverrides::default()).unwrap().len(), 6);
        let o = TableOverrides {
            p: Some(vec![2]),
            n: Some(vec![10]),
            ..TableOverrides::default()
        };
        let s = table1_scenarios(&o).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].scenario, "t1_p2_n10");
        assert_eq!(table2_scenarios(&TableOverrides::default()).unwrap().len(), 5);
        let o = TableOverrides {
            lambda: Some(vec![3.0]),
            n: Some(vec![25]),
            ..TableOverrides::default()
        };
        assert_eq!(table2_scenarios(&o).unwrap().len(), 1);
    }
}
