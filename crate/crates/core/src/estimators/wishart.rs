use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use super::OrbitLabel;
use crate::distributions::bartlett_factor;
use crate::error::{Error, Result};
use crate::SpdMatrix;

/// Common random numbers for Wishart log-moment computations: Gram matrices
/// `Z_j = A_j A_jᵀ ~ Wishart_p(n, I)` from Bartlett factors.
#[derive(Debug, Clone)]
pub struct WishartDraws {
    dof: usize,
    z: Vec<DMatrix<f64>>,
}

impl WishartDraws {
    pub fn new<R: Rng + ?Sized>(p: usize, dof: usize, n_draws: usize, rng: &mut R) -> Result<Self> {
        if dof < p {
            return Err(Error::InvalidParameter(format!("Wishart needs n >= p, got n = {dof}, p = {p}")));
        }
        if n_draws < 2 {
            return Err(Error::InvalidParameter("need at least two Monte-Carlo draws".into()));
        }
        let z = (0..n_draws)
            .map(|_| {
                let a = bartlett_factor(p, dof, rng);
                &a * a.transpose()
            })
            .collect();
        Ok(Self { dof, z })
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Log eigenvalues of the log-Euclidean mean of `Y/n` for `Y ~ Wishart_p(n, diag(e^t))`,
    /// with per-axis Monte-Carlo standard errors.
    ///
    /// The law of `Y` is invariant under sign flips of the coordinate axes, so the
    /// population mean is diagonal in this frame. Averaging the estimate over those
    /// flips keeps just the diagonal of `log Y`, which is what is returned.
    pub fn log_frechet_mean(&self, t: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = t.len();
        let half: Vec<f64> = t.iter().map(|ti| (0.5 * ti).exp()).collect();
        let mut sum = vec![0.0; p];
        let mut sum2 = vec![0.0; p];
        for z in &self.z {
            let b = DMatrix::from_fn(p, p, |i, j| half[i] * z[(i, j)] * half[j]);
            let eig = SymmetricEigen::new(b);
            let logs: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(f64::MIN_POSITIVE).ln()).collect();
            for i in 0..p {
                let d: f64 = (0..p).map(|k| eig.eigenvectors[(i, k)].powi(2) * logs[k]).sum();
                sum[i] += d;
                sum2[i] += d * d;
            }
        }
        let m = self.z.len() as f64;
        let ln_n = (self.dof as f64).ln();
        let mean: Vec<f64> = sum.iter().map(|s| s / m - ln_n).collect();
        let se = (0..p)
            .map(|i| {
                let mu = sum[i] / m;
                ((sum2[i] / m - mu * mu).max(0.0) * m / (m - 1.0) / m).sqrt()
            })
            .collect();
        (mean, se)
    }
}

/// Eigenvalues (axis order) of the log-Euclidean population mean of `Y/n` for
/// `Y ~ Wishart_p(n, diag(sigma_eigs))`.
pub fn wishart_population_mean_eigs<R: Rng + ?Sized>(
    sigma_eigs: &[f64],
    dof: usize,
    n_draws: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if sigma_eigs.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("eigenvalues must be positive".into()));
    }
    let draws = WishartDraws::new(sigma_eigs.len(), dof, n_draws, rng)?;
    let t: Vec<f64> = sigma_eigs.iter().map(|e| e.ln()).collect();
    Ok(draws.log_frechet_mean(&t).0.into_iter().map(f64::exp).collect())
}

/// Eigenvectors (columns) and eigenvalues of a symmetric `x`, sorted descending.
pub fn sorted_eigen(x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let eig = SymmetricEigen::new(x.clone());
    let p = x.nrows();
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let q = DMatrix::from_fn(p, p, |i, j| eig.eigenvectors[(i, idx[j])]);
    (q, idx.iter().map(|&k| eig.eigenvalues[k]).collect())
}

/// `Q diag(d) Qᵀ`, symmetrized.
pub fn frame_matrix(q: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let p = d.len();
    let scaled = DMatrix::from_fn(p, p, |i, j| q[(i, j)] * d[j]);
    let m = scaled * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// MLE of the Fréchet mean of `X/n`: the log-Euclidean mean of `Y/n` with
/// `Y ~ Wishart_p(n, X/n)`, over `n_mc` draws.
///
/// Computed in the eigenframe of `X` with sign-symmetrized draws, so that with the
/// same stream `MLE(UXUᵀ) = U MLE(X) Uᵀ` up to eigensolver rounding.
pub fn wishart_mle_frechet<R: Rng + ?Sized>(x: &SpdMatrix, dof: usize, n_mc: usize, rng: &mut R) -> Result<SpdMatrix> {
    let p = x.p();
    let draws = WishartDraws::new(p, dof, n_mc, rng)?;
    let (q, lam) = sorted_eigen(x.matrix());
    let t: Vec<f64> = lam.iter().map(|l| (l / dof as f64).ln()).collect();
    let (m, _) = draws.log_frechet_mean(&t);
    let e: Vec<f64> = m.into_iter().map(f64::exp).collect();
    SpdMatrix::new(frame_matrix(&q, &e))
}

/// Method-of-moments orbit estimate with its solver report.
#[derive(Debug, Clone, PartialEq)]
pub struct MomFit {
    pub orbit: OrbitLabel,
    /// `‖log eigs(E(Y/n)) − log eigs(X/n)‖₂` at the returned solution.
    pub residual: f64,
    /// False when the residual exceeds `0.05 ‖log(X/n)‖_F`.
    pub converged: bool,
    pub iterations: usize,
}

const MOM_FIXED_POINT_ITERS: usize = 100;
const MOM_NEWTON_ITERS: usize = 30;

/// Solves `X/n = E(Y/n)`, `Y ~ Wishart_p(n, Σ)`, for the eigenvalues of `Σ` under
/// common random numbers: damped fixed-point iteration in log-eigenvalue space,
/// then Newton steps with a finite-difference Jacobian if that stalls.
pub fn wishart_mom_orbit<R: Rng + ?Sized>(x: &SpdMatrix, dof: usize, n_mc: usize, rng: &mut R) -> Result<MomFit> {
    let p = x.p();
    let draws = WishartDraws::new(p, dof, n_mc, rng)?;
    let (_, lam) = sorted_eigen(x.matrix());
    let target: Vec<f64> = lam.iter().map(|l| (l / dof as f64).ln()).collect();
    let target_norm = target.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-10 * (1.0 + target_norm);

    let resid = |t: &[f64]| -> Vec<f64> {
        let (g, _) = draws.log_frechet_mean(t);
        g.iter().zip(&target).map(|(a, b)| a - b).collect()
    };
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();

    let mut t: Vec<f64> = {
        let r0 = resid(&target);
        target.iter().zip(&r0).map(|(a, r)| a - r).collect()
    };
    let mut r = resid(&t);
    let mut rn = norm(&r);
    let mut alpha = 1.0;
    let mut iterations = 0;
    while rn > tol && iterations < MOM_FIXED_POINT_ITERS {
        iterations += 1;
        let cand: Vec<f64> = t.iter().zip(&r).map(|(a, b)| a - alpha * b).collect();
        let rc = resid(&cand);
        let rcn = norm(&rc);
        if rcn < rn {
            t = cand;
            r = rc;
            rn = rcn;
            alpha = (alpha * 1.5).min(1.0);
        } else {
            alpha *= 0.5;
            if alpha < 1e-6 {
                break;
            }
        }
    }
    let mut newton = 0;
    while rn > tol && newton < MOM_NEWTON_ITERS {
        newton += 1;
        let h = 1e-6;
        let mut jac = DMatrix::zeros(p, p);
        for j in 0..p {
            let mut tp = t.clone();
            tp[j] += h;
            let rp = resid(&tp);
            for i in 0..p {
                jac[(i, j)] = (rp[i] - r[i]) / h;
            }
        }
        let Some(step) = jac.lu().solve(&nalgebra::DVector::from_column_slice(&r)) else {
            break;
        };
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-4 {
            let cand: Vec<f64> = t.iter().enumerate().map(|(i, a)| a - lambda * step[i]).collect();
            let rc = resid(&cand);
            let rcn = norm(&rc);
            if rcn < rn {
                t = cand;
                r = rc;
                rn = rcn;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let mut eigenvalues: Vec<f64> = t.iter().map(|v| v.exp()).collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    Ok(MomFit {
        orbit: OrbitLabel::Wishart { eigenvalues, dof },
        residual: rn,
        converged: rn <= 0.05 * target_norm.max(tol),
        iterations: iterations + newton,
    })
}
