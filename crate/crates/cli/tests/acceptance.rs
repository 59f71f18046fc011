//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every criterion runs at the scale it states. The process exits 0 once all criteria
//! have been evaluated so that the workspace test run completes; set
//! `EQFRECHET_ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails, and
//! `EQFRECHET_ACCEPTANCE_ONLY=1,8` to run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::digamma;

use eqfrechet::distributions::{
    torus_conditional_natural, torus_log_density_unnormalized, vmf_sample, GibbsConfig, HyperbolicParams,
    LangevinParams, ModelParams, TorusModelParams, VmfParams, WishartParams,
};
use eqfrechet::estimators::{
    adaptive_mre, estimate_orbit, mre_hyperbolic_closed_form, mre_langevin_single_obs, mre_monte_carlo,
    mre_monte_carlo_with, mre_vmf_closed_form, wishart_mom_orbit, EstimatorOptions, OrbitEstimator, OrbitLabel,
    SphereLoss,
};
use eqfrechet::frechet::{log_euclidean_mean, population_frechet_mean_mc, FrechetSolverConfig};
use eqfrechet::harness::{run_table1, run_table2, RiskRow, TableOverrides};
use eqfrechet::manifolds::{
    apply_isometry, haar_orthogonal, haar_torus_element, log_det, matrix_exp, matrix_log, random_lorentz,
    uniform_on_sphere, uniform_on_stiefel, Metric,
};
use eqfrechet::mcmc::{McmcConfig, ProposalKind};
use eqfrechet::{HyperboloidPoint, Isometry, ManifoldPoint, SpdMatrix, StiefelFrame, TorusPoint, UnitVector};

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn chain(iterations: usize, burn_in: usize, proposal: ProposalKind) -> McmcConfig {
    McmcConfig { iterations, burn_in, thin: 1, proposal, seed: None }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn act(g: &Isometry, xs: &[ManifoldPoint]) -> Vec<ManifoldPoint> {
    xs.iter().map(|x| apply_isometry(g, x).unwrap()).collect()
}

fn dist(a: &ManifoldPoint, b: &ManifoldPoint) -> f64 {
    Metric::default_for(a.kind()).distance(a, b).unwrap()
}

fn random_spd(p: usize, spread: f64, r: &mut ChaCha8Rng) -> SpdMatrix {
    let q: DMatrix<f64> = haar_orthogonal(p, r);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(p, |_, _| r.random_range(-spread..spread).exp()));
    let m = &q * d * q.transpose();
    SpdMatrix::new((&m + m.transpose()) * 0.5).unwrap()
}

fn random_hyperboloid(k: usize, r: &mut ChaCha8Rng) -> HyperboloidPoint {
    let v: Vec<f64> = (0..k).map(|_| r.sample(StandardNormal)).collect();
    HyperboloidPoint::from_spatial(&v, 1.0).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 8.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = x * x;
    acc + 1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x) + 1.0 / (42.0 * x2 * x2 * x2 * x)
}

/// S¹ vMF, κ₀ = 2, n = 5: the MC MRE lands within 0.05 of the closed form on 95 of 100 trials.
fn criterion1() -> Outcome {
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let mut r = rng(1000 + trial);
        let theta = ModelParams::Vmf(VmfParams::new(uniform_on_sphere(1, &mut r), 2.0).map_err(e2s)?);
        let data = theta.sample_n(5, GibbsConfig::default(), &mut r).map_err(e2s)?;
        let xs: Vec<UnitVector> = data.iter().map(|x| x.as_sphere().unwrap().clone()).collect();
        let closed: ManifoldPoint = mre_vmf_closed_form(&xs, SphereLoss::Geodesic).map_err(e2s)?.into();
        let cfg = chain(20_000, 500, ProposalKind::UniformHaar);
        let (mc, _) = mre_monte_carlo(&data, &OrbitLabel::Vmf { kappa: 2.0 }, &cfg, &mut r).map_err(e2s)?;
        let d = dist(&mc, &closed);
        worst = worst.max(d);
        hits += usize::from(d < 0.05);
    }
    ensure(hits >= 95, || format!("{hits}/100 within 0.05"))?;
    Ok(format!("{hits}/100 within 0.05 (largest distance {worst:.4})"))
}

/// p = 1, n = 10: MC MRE vs quadrature Bayes estimate, and the MoM orbit vs its digamma form.
fn criterion2() -> Outcome {
    let dof = 10;
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for &s2 in &[0.5, 1.0, 3.0] {
        let theta = ModelParams::Wishart(WishartParams::new(dof, SpdMatrix::from_diagonal(&[s2]).unwrap()).map_err(e2s)?);
        let data = theta.sample_n(1, GibbsConfig::default(), &mut r).map_err(e2s)?;
        let x = data[0].as_spd().unwrap().matrix()[(0, 0)];
        let nn = dof as f64;
        // Posterior of u = log σ² under the invariant prior, then the log-Euclidean mean of X/n.
        let logpost = |u: f64| -0.5 * nn * u - 0.5 * x * (-u).exp();
        let mode = (x / nn).ln();
        let shift = logpost(mode);
        let z = simpson(|u| (logpost(u) - shift).exp(), mode - 8.0, mode + 8.0, 4000);
        let eu = simpson(|u| u * (logpost(u) - shift).exp(), mode - 8.0, mode + 8.0, 4000) / z;
        let oracle = (eu + (2.0 / nn).ln() + digamma(nn / 2.0)).exp();
        let orbit = OrbitLabel::Wishart { eigenvalues: vec![1.0], dof };
        let opts = EstimatorOptions { population_draws: 20_000, ..EstimatorOptions::default() };
        let (est, _) =
            mre_monte_carlo_with(&data, &orbit, &chain(20_000, 1000, ProposalKind::Auto), &opts, &mut r).map_err(e2s)?;
        let rel = (est.as_spd().unwrap().matrix()[(0, 0)] - oracle).abs() / oracle;
        worst = worst.max(rel);
        ensure(rel < 0.02, || format!("MRE relative error {rel:.4} at σ² = {s2}"))?;

        let n_mc = 4000;
        let fit = wishart_mom_orbit(&SpdMatrix::from_diagonal(&[x]).unwrap(), dof, n_mc, &mut r).map_err(e2s)?;
        let OrbitLabel::Wishart { eigenvalues, .. } = &fit.orbit else {
            return Err("MoM returned a non-Wishart orbit".into());
        };
        let expected = x * (-digamma(nn / 2.0)).exp() / 2.0;
        let se = (trigamma(nn / 2.0) / n_mc as f64).sqrt();
        let err = (eigenvalues[0] / expected).ln().abs();
        ensure(fit.converged && err < 3.0 * se, || format!("MoM log error {err:.4} vs 3 SE {:.4}", 3.0 * se))?;
    }
    Ok(format!("largest MRE relative error {worst:.4}; MoM within 3 SE"))
}

/// Population Fréchet means equal the location parameter.
fn criterion3() -> Outcome {
    let mut r = rng(3);
    let cfg = FrechetSolverConfig::default();
    let mu = uniform_on_sphere::<f64, _>(2, &mut r);
    let hmu = random_hyperboloid(2, &mut r);
    let h = uniform_on_stiefel::<f64, _>(4, 2, &mut r);
    let cases: [(ModelParams, ManifoldPoint, f64); 3] = [
        (ModelParams::Vmf(VmfParams::new(mu.clone(), 2.0).map_err(e2s)?), mu.into(), 0.03),
        (ModelParams::Hyperbolic(HyperbolicParams::new(hmu.clone(), 2.0).map_err(e2s)?), hmu.into(), 0.05),
        (ModelParams::Langevin(LangevinParams::new(h.clone(), 2.0).map_err(e2s)?), h.into(), 0.05),
    ];
    let mut report = Vec::new();
    for (theta, loc, tol) in cases {
        let m = Metric::default_for(theta.manifold());
        let fm = population_frechet_mean_mc(&theta, m, 20_000, &mut r, &cfg).map_err(e2s)?;
        let d = m.distance(&fm.mean, &loc).map_err(e2s)?;
        ensure(d < tol, || format!("{:?}: distance {d:.4} > {tol}", theta.manifold()))?;
        report.push(format!("{:?} {d:.4}", theta.manifold()));
    }
    Ok(report.join(", "))
}

fn find<'a>(rows: &'a [RiskRow], scenario: &str, est: &str) -> &'a RiskRow {
    rows.iter().find(|r| r.scenario == scenario && r.estimator == est).unwrap()
}

fn ordering_holds(rows: &[RiskRow], scenario: &str) -> bool {
    let mom = find(rows, scenario, "mre_mom_orbit").risk;
    mom < find(rows, scenario, "sample_frechet").risk && mom < find(rows, scenario, "mle").risk
}

/// Wishart risk table at 200 replicates.
fn criterion4() -> Outcome {
    const IDS: [&str; 4] = ["sample_frechet", "mle", "mre_mle_orbit", "mre_mom_orbit"];
    const REFERENCE: [(usize, [f64; 4]); 3] = [
        (5, [1.796, 2.234, 2.004, 0.216]),
        (10, [0.723, 0.803, 0.715, 0.168]),
        (40, [0.143, 0.146, 0.144, 0.055]),
    ];
    let o = |p| TableOverrides { p: Some(vec![p]), reps: Some(200), ..TableOverrides::default() };
    let p2 = run_table1(&o(2)).map_err(e2s)?;
    let p4 = run_table1(&o(4)).map_err(e2s)?;
    let mut misses = Vec::new();
    for (n, values) in REFERENCE {
        let scenario = format!("t1_p2_n{n}");
        for (id, want) in IDS.iter().zip(values) {
            let row = find(&p2, &scenario, id);
            let ok = (row.risk - want).abs() <= 0.25 * want || (row.risk - want).abs() <= 3.0 * row.mc_se;
            if !ok {
                misses.push(format!("n={n} {id} {:.3} vs {want}", row.risk));
            }
        }
    }
    let mut disorder = Vec::new();
    for (p, rows) in [(2, &p2), (4, &p4)] {
        for n in [5, 10, 40] {
            let scenario = format!("t1_p{p}_n{n}");
            if !ordering_holds(rows, &scenario) {
                disorder.push(scenario);
            }
        }
    }
    let failures: usize = p2.iter().chain(&p4).map(|r| r.failures).max().unwrap_or(0);
    let detail = format!(
        "ordering fails in [{}]; {} of 12 cells off [{}]; max failures per scenario {failures}",
        disorder.join(", "),
        misses.len(),
        misses.join("; ")
    );
    ensure(misses.is_empty() && disorder.is_empty(), || detail.clone())?;
    Ok(detail)
}

/// Torus risk ratios at 300 replicates.
fn criterion5() -> Outcome {
    let run = |lambda: f64, n: usize| -> Result<Vec<RiskRow>, String> {
        run_table2(&TableOverrides {
            kappa: Some(vec![2.0]),
            lambda: Some(vec![lambda]),
            n: Some(vec![n]),
            reps: Some(300),
            ..TableOverrides::default()
        })
        .map_err(e2s)
    };
    let ratio = |rows: &[RiskRow], num: &str| {
        rows.iter().find(|r| r.estimator == format!("{num}/mre_mle_orbit")).map(|r| r.risk).unwrap()
    };
    let a = run(1.0, 25)?;
    let b = run(3.0, 25)?;
    let c = run(3.0, 5)?;
    let checks = [
        ("l1 n25 sample", ratio(&a, "sample_frechet"), (1.3..=2.2).contains(&ratio(&a, "sample_frechet"))),
        ("l1 n25 mle", ratio(&a, "mle"), (1.1..=1.9).contains(&ratio(&a, "mle"))),
        ("l3 n25 sample > 5", ratio(&b, "sample_frechet"), ratio(&b, "sample_frechet") > 5.0),
        ("l3 n5 mle < 1.1", ratio(&c, "mle"), ratio(&c, "mle") < 1.1),
    ];
    let detail: Vec<String> =
        checks.iter().map(|(k, v, ok)| format!("{k}: {v:.3} {}", if *ok { "ok" } else { "off" })).collect();
    let detail = detail.join("; ");
    ensure(checks.iter().all(|c| c.2), || detail.clone())?;
    Ok(detail)
}

/// Closed forms exactly, MC and orbit estimators at 0.05, and the adaptive composition.
fn criterion6() -> Outcome {
    let mut r = rng(6);
    let mut worst_exact: f64 = 0.0;
    for k in 1..5 {
        let xs: Vec<UnitVector> = (0..6).map(|_| uniform_on_sphere(k, &mut r)).collect();
        let g = Isometry::orthogonal(haar_orthogonal(k + 1, &mut r)).map_err(e2s)?;
        let gxs: Vec<UnitVector> = xs.iter().map(|x| g.apply_sphere(x).unwrap()).collect();
        let lhs = mre_vmf_closed_form(&gxs, SphereLoss::Geodesic).map_err(e2s)?;
        let rhs = g.apply_sphere(&mre_vmf_closed_form(&xs, SphereLoss::Geodesic).map_err(e2s)?).map_err(e2s)?;
        worst_exact = worst_exact.max((lhs.coords() - rhs.coords()).amax());

        let hs: Vec<HyperboloidPoint> = (0..5).map(|_| random_hyperboloid(k, &mut r)).collect();
        let l = Isometry::lorentz(random_lorentz(k, 1.0, &mut r)).map_err(e2s)?;
        let ghs: Vec<HyperboloidPoint> = hs.iter().map(|x| l.apply_hyperboloid(x).unwrap()).collect();
        let lhs = mre_hyperbolic_closed_form(&ghs).map_err(e2s)?;
        let rhs = l.apply_hyperboloid(&mre_hyperbolic_closed_form(&hs).map_err(e2s)?).map_err(e2s)?;
        worst_exact = worst_exact.max((lhs.coords() - rhs.coords()).amax() / rhs.coords().amax());
    }
    let x = uniform_on_stiefel::<f64, _>(4, 2, &mut r);
    let g = Isometry::stiefel_pair(haar_orthogonal(4, &mut r), haar_orthogonal(2, &mut r)).map_err(e2s)?;
    let lhs = mre_langevin_single_obs(&[g.apply_stiefel(&x).map_err(e2s)?]).map_err(e2s)?;
    let rhs = g.apply_stiefel(&mre_langevin_single_obs(&[x]).map_err(e2s)?).map_err(e2s)?;
    worst_exact = worst_exact.max((lhs.matrix() - rhs.matrix()).amax());
    ensure(worst_exact < 1e-10, || format!("closed-form equivariance error {worst_exact:e}"))?;

    let opts = EstimatorOptions::default();
    let mut worst_mc: f64 = 0.0;
    let mc_cases: Vec<(ModelParams, Isometry, usize, ProposalKind)> = vec![
        (
            ModelParams::Vmf(VmfParams::new(uniform_on_sphere(2, &mut r), 2.0).map_err(e2s)?),
            Isometry::orthogonal(haar_orthogonal(3, &mut r)).map_err(e2s)?,
            5,
            ProposalKind::UniformHaar,
        ),
        (
            ModelParams::Hyperbolic(HyperbolicParams::new(random_hyperboloid(2, &mut r), 2.0).map_err(e2s)?),
            Isometry::lorentz(random_lorentz(2, 1.0, &mut r)).map_err(e2s)?,
            5,
            ProposalKind::Auto,
        ),
        (
            ModelParams::Langevin(LangevinParams::new(StiefelFrame::canonical(3, 2), 2.0).map_err(e2s)?),
            Isometry::stiefel_pair(haar_orthogonal(3, &mut r), haar_orthogonal(2, &mut r)).map_err(e2s)?,
            3,
            ProposalKind::UniformHaar,
        ),
        (
            ModelParams::Wishart(WishartParams::new(10, random_spd(2, 0.5, &mut r)).map_err(e2s)?),
            Isometry::spd_conjugation(haar_orthogonal(2, &mut r)).map_err(e2s)?,
            1,
            ProposalKind::Auto,
        ),
    ];
    for (theta, g, n, proposal) in mc_cases {
        let data = theta.sample_n(n, GibbsConfig::default(), &mut r).map_err(e2s)?;
        let orbit = OrbitLabel::of(&theta);
        let cfg = chain(60_000, 6_000, proposal);
        let (a, _) = mre_monte_carlo_with(&act(&g, &data), &orbit, &cfg, &opts, &mut rng(11)).map_err(e2s)?;
        let (b, _) = mre_monte_carlo_with(&data, &orbit, &cfg, &opts, &mut rng(11)).map_err(e2s)?;
        worst_mc = worst_mc.max(dist(&a, &apply_isometry(&g, &b).map_err(e2s)?));
    }
    ensure(worst_mc < 0.05, || format!("MC equivariance distance {worst_mc:.4}"))?;

    // Both orbit estimators are invariant under conjugation.
    let theta = ModelParams::Wishart(WishartParams::new(7, random_spd(3, 0.6, &mut r)).map_err(e2s)?);
    let data = theta.sample_n(3, GibbsConfig::default(), &mut r).map_err(e2s)?;
    let g = Isometry::spd_conjugation(haar_orthogonal(3, &mut r)).map_err(e2s)?;
    let inner = EstimatorOptions { inner_draws: 400, ..EstimatorOptions::default() };
    let mut worst_orbit: f64 = 0.0;
    for est in [OrbitEstimator::Mle, OrbitEstimator::MethodOfMoments] {
        let (a, _) = estimate_orbit(&act(&g, &data), &est, Some(7), &inner, &mut rng(12)).map_err(e2s)?;
        let (b, _) = estimate_orbit(&data, &est, Some(7), &inner, &mut rng(12)).map_err(e2s)?;
        let (OrbitLabel::Wishart { eigenvalues: ea, .. }, OrbitLabel::Wishart { eigenvalues: eb, .. }) = (&a, &b) else {
            return Err("non-Wishart orbit".into());
        };
        for (x, y) in ea.iter().zip(eb) {
            worst_orbit = worst_orbit.max((x.ln() - y.ln()).abs());
        }
    }
    ensure(worst_orbit < 0.05, || format!("orbit invariance error {worst_orbit:.4}"))?;

    // Invariant orbit estimate composed with an equivariant MRE.
    let cfg = chain(20_000, 2_000, ProposalKind::Auto);
    let opts = EstimatorOptions { inner_draws: 500, population_draws: 2000, ..EstimatorOptions::default() };
    let mut worst_adaptive: f64 = 0.0;
    let adaptive_cases: Vec<(ModelParams, Isometry, usize, OrbitEstimator, Option<usize>)> = vec![
        (
            ModelParams::Wishart(WishartParams::new(10, random_spd(2, 0.5, &mut r)).map_err(e2s)?),
            Isometry::spd_conjugation(haar_orthogonal(2, &mut r)).map_err(e2s)?,
            1,
            OrbitEstimator::MethodOfMoments,
            Some(10),
        ),
        (
            ModelParams::Torus(TorusModelParams::homogeneous(TorusPoint::from_angles(&[0.4, 2.0]), 2.0, 1.0).map_err(e2s)?),
            Isometry::torus(haar_torus_element(2, &mut r)).map_err(e2s)?,
            15,
            OrbitEstimator::Mle,
            None,
        ),
    ];
    for (theta, g, n, est, dof) in adaptive_cases {
        let data = theta.sample_n(n, GibbsConfig::default(), &mut r).map_err(e2s)?;
        let a = adaptive_mre(&act(&g, &data), &est, dof, &cfg, &opts, &mut rng(13)).map_err(e2s)?;
        let b = adaptive_mre(&data, &est, dof, &cfg, &opts, &mut rng(13)).map_err(e2s)?;
        worst_adaptive = worst_adaptive.max(dist(&a.estimate, &apply_isometry(&g, &b.estimate).map_err(e2s)?));
    }
    ensure(worst_adaptive < 0.05, || format!("adaptive equivariance distance {worst_adaptive:.4}"))?;
    Ok(format!(
        "exact {worst_exact:.1e}, MC {worst_mc:.4}, orbit {worst_orbit:.1e}, adaptive {worst_adaptive:.4}"
    ))
}

fn random_point(kind: usize, dim: usize, r: &mut ChaCha8Rng) -> (ManifoldPoint, Isometry) {
    match kind {
        0 => (uniform_on_sphere::<f64, _>(dim, r).into(), Isometry::orthogonal(haar_orthogonal(dim + 1, r)).unwrap()),
        1 => (random_hyperboloid(dim, r).into(), Isometry::lorentz(random_lorentz(dim, 2.0, r)).unwrap()),
        2 => {
            let a: Vec<f64> = (0..dim).map(|_| r.random_range(-3.0..3.0)).collect();
            (TorusPoint::from_angles(&a).into(), Isometry::torus(haar_torus_element(dim, r)).unwrap())
        }
        3 => (random_spd(dim, 2.0, r).into(), Isometry::spd_conjugation(haar_orthogonal(dim, r)).unwrap()),
        _ => {
            let (p, k) = (dim + 1, 1 + dim / 2);
            (
                uniform_on_stiefel::<f64, _>(p, k, r).into(),
                Isometry::stiefel_pair(haar_orthogonal(p, r), haar_orthogonal(k, r)).unwrap(),
            )
        }
    }
}

/// Metric axioms, isometries, matrix functions, sampler χ² and torus density consistency.
fn criterion7() -> Outcome {
    let mut r = rng(7);
    for case in 0..500 {
        let (kind, dim) = (case % 5, 1 + case % 4);
        let (x, g) = random_point(kind, dim, &mut r);
        let mut r2 = r.clone();
        let (y, _) = random_point(kind, dim, &mut r2);
        let (z, _) = random_point(kind, dim, &mut r2);
        r = r2;
        let m = Metric::default_for(x.kind());
        let d = |a: &ManifoldPoint, b: &ManifoldPoint| m.distance(a, b).unwrap();
        let (dxy, dyx) = (d(&x, &y), d(&y, &x));
        ensure(dxy >= 0.0 && (dxy - dyx).abs() <= 1e-10 * (1.0 + dxy), || format!("symmetry, case {case}"))?;
        ensure(d(&x, &x) <= 1e-7, || format!("identity, case {case}"))?;
        ensure(dxy <= d(&x, &z) + d(&z, &y) + 1e-8, || format!("triangle, case {case}"))?;
        let gd = d(&apply_isometry(&g, &x).unwrap(), &apply_isometry(&g, &y).unwrap());
        ensure((gd - dxy).abs() <= 1e-8 * (1.0 + dxy), || format!("isometry, case {case}: {gd} vs {dxy}"))?;
    }
    for p in 1..6 {
        let s = random_spd(p, 2.0, &mut r);
        let back = matrix_exp(&matrix_log(&s).map_err(e2s)?).map_err(e2s)?;
        ensure((back.matrix() - s.matrix()).amax() <= 1e-10 * s.matrix().amax(), || format!("log/exp, p = {p}"))?;
        let xs: Vec<SpdMatrix> = (0..6).map(|_| random_spd(p, 1.5, &mut r)).collect();
        let refs: Vec<&SpdMatrix> = xs.iter().collect();
        let lhs = log_det(&log_euclidean_mean(&refs).map_err(e2s)?);
        let rhs = xs.iter().map(log_det).sum::<f64>() / xs.len() as f64;
        ensure((lhs - rhs).abs() < 1e-10, || format!("log det identity, p = {p}: {lhs} vs {rhs}"))?;
    }
    // S¹ vMF angle histogram against quadrature.
    let kappa = 1.5;
    let theta = VmfParams::new(UnitVector::from_angle(0.0), kappa).map_err(e2s)?;
    let bins = 12;
    let width = std::f64::consts::TAU / bins as f64;
    let draws = 20_000;
    let mut counts = vec![0.0; bins];
    for _ in 0..draws {
        counts[((vmf_sample(&theta, &mut r).angle() / width) as usize).min(bins - 1)] += 1.0;
    }
    let z = simpson(|a| (kappa * a.cos()).exp(), 0.0, std::f64::consts::TAU, 4000);
    let chi2: f64 = counts
        .iter()
        .enumerate()
        .map(|(b, o)| {
            let pb = simpson(|a| (kappa * a.cos()).exp(), b as f64 * width, (b + 1) as f64 * width, 200) / z;
            (o - draws as f64 * pb).powi(2) / (draws as f64 * pb)
        })
        .sum();
    let crit = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
    ensure(chi2 < crit, || format!("vMF χ² {chi2:.2} > {crit:.2}"))?;
    // Torus full conditionals reproduce sections of the joint density.
    let theta = TorusModelParams::new(TorusPoint::from_angles(&[0.3, 1.2, -2.0]), vec![1.0, 2.0, 0.7], vec![0.9, -1.3, 2.1])
        .map_err(e2s)?;
    let base = TorusPoint::from_angles(&[2.5, -0.4, 1.1]);
    for i in 0..3 {
        let eta = torus_conditional_natural(i, &base, &theta);
        let section = |a: f64| {
            let mut x = base.clone();
            x.set_component(i, UnitVector::from_angle(a));
            let xi = x.component(i).coords();
            torus_log_density_unnormalized(&x, &theta).unwrap() - (eta[0] * xi[0] + eta[1] * xi[1])
        };
        let c = section(0.0);
        for s in 1..32 {
            let a = s as f64 * std::f64::consts::TAU / 32.0;
            ensure((section(a) - c).abs() < 1e-8, || format!("torus conditional, component {i}"))?;
        }
    }
    Ok(format!("500 metric cases, matrix identities, vMF χ² {chi2:.2} < {crit:.2}, torus conditionals"))
}

/// Every CLI command twice with the same seed and config: byte-identical output.
fn criterion8() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_eqfrechet");
    let dir = std::env::temp_dir().join(format!("eqfrechet-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(e2s)?;
    let write_cfg = |name: &str, text: &str| -> Result<String, String> {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(e2s)?;
        Ok(path.to_str().unwrap().to_owned())
    };
    let table_cfg = write_cfg("table.cfg", "reps = 4\nmcmc-iters = 400\nburn-in = 100\n")?;
    let cfg = write_cfg("chain.cfg", "mcmc-iters = 400\nburn-in = 100\n")?;
    let run = |args: &[&str]| -> Result<Vec<u8>, String> {
        let out = Command::new(bin).args(args).output().map_err(e2s)?;
        ensure(out.status.success(), || {
            format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
        })?;
        Ok(out.stdout)
    };
    let mut commands: Vec<Vec<String>> = vec![
        ["table1", "--config", &table_cfg, "--p", "2", "--n", "5", "--seed", "3"].map(String::from).to_vec(),
        ["table1", "--config", &table_cfg, "--p", "2", "--n", "10", "--seed", "3", "--format", "json"].map(String::from).to_vec(),
        ["table2", "--config", &table_cfg, "--lambda", "3", "--n", "5", "--reps", "2", "--seed", "3"].map(String::from).to_vec(),
    ];
    let families: [(&str, &[&str]); 5] = [
        ("vmf", &["--dim", "2", "--kappa", "2"]),
        ("hyperbolic", &["--dim", "2", "--kappa", "2"]),
        ("langevin", &["--dim", "3", "--cols", "2", "--lambda", "2"]),
        ("wishart", &["--dim", "2", "--dof", "6", "--sigma-diag", "1,2"]),
        ("torus", &["--dim", "3", "--kappa", "2", "--lambda", "1"]),
    ];
    let mut files = Vec::new();
    for (family, extra) in families {
        let mut args: Vec<String> = ["sample", "--family", family, "--n", "6", "--seed", "9"].map(String::from).to_vec();
        args.extend(extra.iter().map(|s| s.to_string()));
        commands.push(args.clone());
        let path = dir.join(format!("{family}.txt"));
        std::fs::write(&path, run(&args.iter().map(String::as_str).collect::<Vec<_>>())?).map_err(e2s)?;
        let path = path.to_str().unwrap().to_owned();
        commands.push(vec!["frechet-mean".into(), "--data".into(), path.clone()]);
        files.push((family, path));
    }
    for (family, path) in &files {
        let mut args: Vec<String> =
            ["estimate", "--config", &cfg, "--data", path, "--seed", "5"].map(String::from).to_vec();
        let extra: &[&str] = match *family {
            "vmf" | "hyperbolic" => &["--estimator", "mre", "--kappa", "2"],
            "langevin" => &["--estimator", "mre", "--lambda", "2"],
            "wishart" => &["--estimator", "mre_mom_orbit", "--dof", "6", "--inner-draws", "200", "--population-draws", "500"],
            _ => &["--estimator", "mre_mle_orbit"],
        };
        args.extend(extra.iter().map(|s| s.to_string()));
        commands.push(args);
    }
    for args in &commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (a, b) = (run(&args)?, run(&args)?);
        ensure(!a.is_empty() && a == b, || format!("{args:?} differs between runs"))?;
    }
    // File output and the MCMC trace dump.
    let trace = dir.join("trace.csv");
    let out = dir.join("out.csv");
    let args = [
        "estimate", "--config", &cfg, "--data", &files[0].1, "--seed", "5", "--estimator", "mre", "--kappa", "2",
        "--out", out.to_str().unwrap(), "--trace-out", trace.to_str().unwrap(),
    ];
    run(&args)?;
    let first = (std::fs::read(&out).map_err(e2s)?, std::fs::read(&trace).map_err(e2s)?);
    run(&args)?;
    let second = (std::fs::read(&out).map_err(e2s)?, std::fs::read(&trace).map_err(e2s)?);
    ensure(first == second, || "file outputs differ between runs".into())?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} commands plus file and trace output byte-identical", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("closed-form and MC oracle agreement", criterion1),
        ("scalar Wishart quadrature oracle", criterion2),
        ("population Frechet mean equals location", criterion3),
        ("Wishart risk table at 200 replicates", criterion4),
        ("torus risk ratios at 300 replicates", criterion5),
        ("equivariance suite", criterion6),
        ("property suite", criterion7),
        ("CLI determinism", criterion8),
    ];
    let only: Option<Vec<usize>> = std::env::var("EQFRECHET_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let (mut failed, mut ran) = (0, 0);
    for (k, (name, f)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(k + 1))) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}, {secs:.1}s): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}, {secs:.1}s): {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 && std::env::var("EQFRECHET_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
