mod common;

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::{random_torus, rng, simpson};
use eqfrechet::distributions::{torus_gibbs_chain, torus_log_density_unnormalized, GibbsConfig, TorusModelParams};
use eqfrechet::frechet::circle_frechet_mean;
use eqfrechet::manifolds::{torus_distance, wrap_angle};
use eqfrechet::mcmc::{
    effective_sample_size, gibbs_torus_posterior, metropolis_hastings, GroupKind, GroupProposal, McmcConfig,
    Proposal, ProposalKind,
};
use eqfrechet::{Isometry, TorusPoint};

fn trace_of(g: &Isometry) -> f64 {
    match g {
        Isometry::Orthogonal(u) => u.trace(),
        _ => unreachable!(),
    }
}

fn cfg(iterations: usize, burn_in: usize, thin: usize, proposal: ProposalKind) -> McmcConfig {
    McmcConfig { iterations, burn_in, thin, proposal, seed: None }
}

#[test]
fn constant_target_accepts_everything() {
    let mut r = rng(1);
    let prop = GroupProposal::new(GroupKind::Orthogonal(2), ProposalKind::UniformHaar).unwrap();
    let c = cfg(500, 100, 1, ProposalKind::UniformHaar);
    let t = metropolis_hastings(|_| 0.0, &prop, GroupKind::Orthogonal(2).identity(), &c, &mut r).unwrap();
    assert_eq!(t.acceptance_rate, 1.0);
    assert_eq!(t.states.len(), c.retained());
}

#[test]
fn exp_trace_target_on_o2_matches_quadrature() {
    let mut r = rng(2);
    let kappa = 0.5;
    let prop = GroupProposal::new(GroupKind::Orthogonal(2), ProposalKind::UniformHaar).unwrap();
    let c = cfg(40_000, 1000, 1, ProposalKind::UniformHaar);
    let t = metropolis_hastings(|g| kappa * trace_of(g), &prop, GroupKind::Orthogonal(2).identity(), &c, &mut r).unwrap();
    let tr: Vec<f64> = t.states.iter().map(trace_of).collect();
    // Haar on O(2): half the mass on rotations (tr = 2cos θ), half on reflections (tr = 0).
    let tau = std::f64::consts::TAU;
    let rot_mass = simpson(|a| (2.0 * kappa * a.cos()).exp(), 0.0, tau, 4000) / tau;
    let rot_moment = simpson(|a| 2.0 * a.cos() * (2.0 * kappa * a.cos()).exp(), 0.0, tau, 4000) / tau;
    let expected = rot_moment / (rot_mass + 1.0);
    let n = tr.len() as f64;
    let mean = tr.iter().sum::<f64>() / n;
    let var = tr.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / effective_sample_size(&tr).unwrap()).sqrt();
    assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected} (se {se})");
}

#[test]
fn fixed_seed_gives_identical_traces() {
    let prop = GroupProposal::new(GroupKind::StiefelPair(3, 2), ProposalKind::RandomWalk(0.4)).unwrap();
    let c = McmcConfig { seed: Some(99), ..cfg(800, 100, 2, ProposalKind::RandomWalk(0.4)) };
    let target = |g: &Isometry| match g {
        Isometry::StiefelPair { u, v } => 2.0 * (u[(0, 0)] + v[(1, 1)]),
        _ => unreachable!(),
    };
    let id = GroupKind::StiefelPair(3, 2).identity();
    let a = metropolis_hastings(target, &prop, id.clone(), &c, &mut rng(1)).unwrap();
    let b = metropolis_hastings(target, &prop, id, &c, &mut rng(2)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bookkeeping_and_retained_log_targets_are_consistent() {
    let mut r = rng(3);
    let prop = GroupProposal::new(GroupKind::Orthogonal(3), ProposalKind::RandomWalk(0.5)).unwrap();
    let c = cfg(1003, 200, 3, ProposalKind::RandomWalk(0.5));
    let target = |g: &Isometry| 3.0 * trace_of(g);
    let t = metropolis_hastings(target, &prop, GroupKind::Orthogonal(3).identity(), &c, &mut r).unwrap();
    assert_eq!(t.states.len(), (1003 - 200) / 3);
    let recount = t.steps.iter().filter(|s| s.accepted).count();
    assert_eq!(recount, t.accepted_count);
    assert!((t.acceptance_rate - recount as f64 / 1003.0).abs() < 1e-15);
    for (s, lt) in t.states.iter().zip(&t.log_targets) {
        assert!((target(s) - lt).abs() < 1e-10);
    }
    let mut csv = Vec::new();
    t.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next(), Some("step,log_target,accepted"));
    assert_eq!(text.lines().count(), 1004);
}

#[test]
fn nan_at_init_is_fatal() {
    let mut r = rng(4);
    let prop = GroupProposal::new(GroupKind::Orthogonal(2), ProposalKind::UniformHaar).unwrap();
    let c = cfg(10, 1, 1, ProposalKind::UniformHaar);
    assert!(metropolis_hastings(|_| f64::NAN, &prop, GroupKind::Orthogonal(2).identity(), &c, &mut r).is_err());
}

struct Flip;

impl Proposal<usize> for Flip {
    fn propose<R: Rng + ?Sized>(&self, current: &usize, _rng: &mut R) -> usize {
        1 - current
    }
}

#[test]
fn two_state_chain_has_target_as_stationary_law() {
    let mut r = rng(5);
    let pi = [0.3f64, 0.7];
    // Thinning by 10 makes retained states nearly independent (second eigenvalue -3/7).
    let c = cfg(200_000, 1000, 10, ProposalKind::UniformHaar);
    let t = metropolis_hastings(|&s: &usize| pi[s].ln(), &Flip, 0, &c, &mut r).unwrap();
    let n = t.states.len() as f64;
    let ones = t.states.iter().filter(|&&s| s == 1).count() as f64;
    let chi2 = (n - ones - n * pi[0]).powi(2) / (n * pi[0]) + (ones - n * pi[1]).powi(2) / (n * pi[1]);
    assert!(chi2 < ChiSquared::new(1.0).unwrap().inverse_cdf(0.99), "chi2 = {chi2}");
}

#[test]
fn ess_examples() {
    let mut r = rng(6);
    let n = 10_000;
    let iid: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
    let e = effective_sample_size(&iid).unwrap() / n as f64;
    assert!((0.8..=1.2).contains(&e), "iid ESS/n = {e}");
    let rho = 0.9f64;
    let mut x = 0.0;
    let ar: Vec<f64> = (0..n)
        .map(|_| {
            x = rho * x + (1.0 - rho * rho).sqrt() * r.sample::<f64, _>(StandardNormal);
            x
        })
        .collect();
    let e = effective_sample_size(&ar).unwrap() / n as f64;
    let target = (1.0 - rho) / (1.0 + rho);
    assert!((e - target).abs() <= 0.5 * target, "AR(1) ESS/n = {e}, expected about {target}");
    assert_eq!(effective_sample_size(&[3.0; 50]).unwrap(), 50.0);
    assert!(effective_sample_size(&[1.0; 5]).is_err());
}

#[test]
fn posterior_concentrates_on_circular_means() {
    let mut r = rng(7);
    let p = 3;
    let mu = random_torus(p, &mut r);
    let kappa = vec![2.0; p];
    let lambda = vec![0.0; 3];
    let theta = TorusModelParams::new(mu, kappa.clone(), lambda.clone()).unwrap();
    let data = torus_gibbs_chain(&theta, 500, GibbsConfig::default(), &mut r);
    let c = cfg(600, 100, 1, ProposalKind::UniformHaar);
    let t = gibbs_torus_posterior(&data, &kappa, &lambda, random_torus(p, &mut r), &c, &mut r).unwrap();
    for i in 0..p {
        // With λ = 0 the posterior of μᵢ is von Mises about the resultant direction of the data.
        let (sx, sy) = data.iter().fold((0.0, 0.0), |(a, b), x| {
            let c = x.component(i).coords();
            (a + c[0], b + c[1])
        });
        let mle = sy.atan2(sx);
        let draws: Vec<f64> = t.states.iter().map(|m| m.component(i).angle()).collect();
        let post = circle_frechet_mean(&draws);
        let d = wrap_angle(post - mle + std::f64::consts::PI) - std::f64::consts::PI;
        assert!(d.abs() < 0.1, "component {i}: {post} vs {mle}");
    }
}

#[test]
fn two_dimensional_posterior_histogram_matches_quadrature() {
    let mut r = rng(8);
    let (kappa, lambda) = (vec![1.0, 0.8], vec![1.5]);
    let theta = TorusModelParams::new(TorusPoint::from_angles(&[0.3, 2.0]), kappa.clone(), lambda.clone()).unwrap();
    let data = torus_gibbs_chain(&theta, 3, GibbsConfig::default(), &mut r);
    let c = cfg(100_500, 500, 5, ProposalKind::UniformHaar);
    let t = gibbs_torus_posterior(&data, &kappa, &lambda, TorusPoint::from_angles(&[0.0, 0.0]), &c, &mut r).unwrap();
    let bins = 8;
    let tau = std::f64::consts::TAU;
    let width = tau / bins as f64;
    let mut counts = vec![0.0; bins];
    for m in &t.states {
        counts[((m.component(0).angle() / width) as usize).min(bins - 1)] += 1.0;
    }
    // The normalizer of the likelihood does not depend on μ, so the flat-prior posterior
    // is proportional to the product of unnormalized densities.
    let log_post = |a: f64, b: f64| -> f64 {
        let params = TorusModelParams::new(TorusPoint::from_angles(&[a, b]), kappa.clone(), lambda.clone()).unwrap();
        data.iter().map(|x| torus_log_density_unnormalized(x, &params).unwrap()).sum()
    };
    let m = 64;
    let h = width / m as f64;
    let hb = tau / (m * bins) as f64;
    let mut probs = vec![0.0; bins];
    for (bi, prob) in probs.iter_mut().enumerate() {
        for u in 0..m {
            let a = bi as f64 * width + (u as f64 + 0.5) * h;
            for v in 0..m * bins {
                *prob += log_post(a, (v as f64 + 0.5) * hb).exp() * h * hb;
            }
        }
    }
    let z: f64 = probs.iter().sum();
    let n = t.states.len() as f64;
    let chi2: f64 = counts.iter().zip(&probs).map(|(o, p)| (o - n * p / z).powi(2) / (n * p / z)).sum();
    assert!(chi2 < ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99), "chi2 = {chi2}");
}

#[test]
fn gibbs_posterior_is_reproducible() {
    let mut r = rng(9);
    let theta = TorusModelParams::homogeneous(random_torus(2, &mut r), 2.0, 1.0).unwrap();
    let data = torus_gibbs_chain(&theta, 10, GibbsConfig::default(), &mut r);
    let c = McmcConfig { seed: Some(5), ..cfg(300, 50, 1, ProposalKind::UniformHaar) };
    let init = TorusPoint::from_angles(&[0.0, 0.0]);
    let a = gibbs_torus_posterior(&data, &theta.kappa, &theta.lambda, init.clone(), &c, &mut rng(1)).unwrap();
    let b = gibbs_torus_posterior(&data, &theta.kappa, &theta.lambda, init, &c, &mut rng(2)).unwrap();
    assert_eq!(a, b);
    assert!(a.states.iter().all(|s| torus_distance(s, &a.states[0]).is_ok()));
}
