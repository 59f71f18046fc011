#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use eqfrechet::manifolds::{haar_orthogonal, haar_torus_element, random_lorentz, uniform_on_sphere, uniform_on_stiefel};
use eqfrechet::{HyperboloidPoint, Isometry, ManifoldPoint, SpdMatrix, TorusPoint};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn normal_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// SPD matrix `Q diag(e^t) Qᵀ` with `tᵢ` uniform on `(-spread, spread)`.
pub fn random_spd(p: usize, spread: f64, rng: &mut ChaCha8Rng) -> SpdMatrix {
    let q: DMatrix<f64> = haar_orthogonal(p, rng);
    let d: Vec<f64> = (0..p).map(|_| rng.random_range(-spread..spread).exp()).collect();
    let m = &q * DMatrix::from_diagonal(&DVector::from_vec(d)) * q.transpose();
    SpdMatrix::new((&m + m.transpose()) * 0.5).unwrap()
}

pub fn random_hyperboloid(k: usize, radius: f64, rng: &mut ChaCha8Rng) -> HyperboloidPoint {
    HyperboloidPoint::from_spatial(&normal_vec(k, rng), radius).unwrap()
}

pub fn random_torus(p: usize, rng: &mut ChaCha8Rng) -> TorusPoint {
    let a: Vec<f64> = (0..p).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
    TorusPoint::from_angles(&a)
}

/// A random point and a random isometry of the matching variant.
pub fn random_point_and_isometry(kind: usize, dim: usize, rng: &mut ChaCha8Rng) -> (ManifoldPoint, Isometry) {
    match kind % 5 {
        0 => (
            uniform_on_sphere::<f64, _>(dim, rng).into(),
            Isometry::orthogonal(haar_orthogonal(dim + 1, rng)).unwrap(),
        ),
        1 => (
            random_hyperboloid(dim, 1.5, rng).into(),
            Isometry::lorentz(random_lorentz(dim, 2.0, rng)).unwrap(),
        ),
        2 => (random_torus(dim, rng).into(), Isometry::torus(haar_torus_element(dim, rng)).unwrap()),
        3 => (
            random_spd(dim, 2.0, rng).into(),
            Isometry::spd_conjugation(haar_orthogonal(dim, rng)).unwrap(),
        ),
        _ => {
            let k = 1 + dim / 2;
            let p = dim + 1;
            (
                uniform_on_stiefel::<f64, _>(p, k, rng).into(),
                Isometry::stiefel_pair(haar_orthogonal(p, rng), haar_orthogonal(k, rng)).unwrap(),
            )
        }
    }
}

/// A second point on the same manifold as `x`.
pub fn companion(x: &ManifoldPoint, rng: &mut ChaCha8Rng) -> ManifoldPoint {
    match x {
        ManifoldPoint::Sphere(u) => uniform_on_sphere::<f64, _>(u.dim(), rng).into(),
        ManifoldPoint::Hyperboloid(h) => random_hyperboloid(h.dim(), h.radius(), rng).into(),
        ManifoldPoint::Torus(t) => random_torus(t.p(), rng).into(),
        ManifoldPoint::Spd(s) => random_spd(s.p(), 2.0, rng).into(),
        ManifoldPoint::Stiefel(s) => {
            let (p, k) = s.shape();
            uniform_on_stiefel::<f64, _>(p, k, rng).into()
        }
    }
}

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Composite Simpson rule on `[a, b]` with `m` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Asymptotic Kolmogorov critical value at the 1% level.
pub const KS_1PCT: f64 = 1.628;

/// One-sample KS statistic against a continuous CDF.
pub fn ks_one(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS statistic.
pub fn ks_two(a: &[f64], b: &[f64]) -> f64 {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn ks_one_passes(xs: &[f64], cdf: impl Fn(f64) -> f64) -> bool {
    ks_one(xs, cdf) < KS_1PCT / (xs.len() as f64).sqrt()
}

pub fn ks_two_passes(a: &[f64], b: &[f64]) -> bool {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    ks_two(a, b) < KS_1PCT * ((na + nb) / (na * nb)).sqrt()
}
