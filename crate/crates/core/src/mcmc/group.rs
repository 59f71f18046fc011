use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Proposal, ProposalKind};
use crate::error::{Error, Result};
use crate::manifolds::{expm, haar_orthogonal, haar_torus_element};
use crate::Isometry;

/// Probability that a random-walk step also composes with a fixed reflection, so
/// chains over `O(p)` and `O⁺(k,1)` reach every connected component.
const FLIP_PROB: f64 = 0.1;

/// Groups over which the chains run. The state type is always [`Isometry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// `O(d)` acting on `S^{d−1}`.
    Orthogonal(usize),
    /// `O(p)` acting on SPD matrices by conjugation.
    Conjugation(usize),
    /// `O(p) × O(k)` acting on `V_k(ℝ^p)`.
    StiefelPair(usize, usize),
    /// `O⁺(k,1)` acting on `H^k`.
    Lorentz(usize),
    /// `O(2)^p` acting on `T^p`.
    Torus(usize),
    /// Positive scalars acting on SPD matrices.
    Scaling,
}

impl GroupKind {
    pub fn is_compact(self) -> bool {
        !matches!(self, GroupKind::Lorentz(_) | GroupKind::Scaling)
    }

    pub fn identity(self) -> Isometry {
        match self {
            GroupKind::Orthogonal(d) => Isometry::Orthogonal(DMatrix::identity(d, d)),
            GroupKind::Conjugation(p) => Isometry::SpdConjugation(DMatrix::identity(p, p)),
            GroupKind::StiefelPair(p, k) => Isometry::StiefelPair {
                u: DMatrix::identity(p, p),
                v: DMatrix::identity(k, k),
            },
            GroupKind::Lorentz(k) => Isometry::Lorentz(DMatrix::identity(k + 1, k + 1)),
            GroupKind::Torus(p) => Isometry::TorusElement(vec![Matrix2::identity(); p]),
            GroupKind::Scaling => Isometry::SpdScaling(1.0),
        }
    }

    /// A Haar draw; only defined for compact groups.
    pub fn haar<R: Rng + ?Sized>(self, rng: &mut R) -> Result<Isometry> {
        Ok(match self {
            GroupKind::Orthogonal(d) => Isometry::Orthogonal(haar_orthogonal(d, rng)),
            GroupKind::Conjugation(p) => Isometry::SpdConjugation(haar_orthogonal(p, rng)),
            GroupKind::StiefelPair(p, k) => Isometry::StiefelPair {
                u: haar_orthogonal(p, rng),
                v: haar_orthogonal(k, rng),
            },
            GroupKind::Torus(p) => Isometry::TorusElement(haar_torus_element(p, rng)),
            GroupKind::Lorentz(_) | GroupKind::Scaling => {
                return Err(Error::Config(format!("{self:?} is not compact; Haar proposals are undefined")))
            }
        })
    }
}

/// Either Haar independence proposals or a left-invariant random walk `g ↦ g·exp(sξ)`.
/// Both are symmetric with respect to Haar measure, so no correction term is needed.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupProposal {
    pub group: GroupKind,
    pub kind: ProposalKind,
}

impl GroupProposal {
    /// `kind` must already be resolved: [`ProposalKind::Auto`] is rejected here.
    pub fn new(group: GroupKind, kind: ProposalKind) -> Result<Self> {
        match kind {
            ProposalKind::UniformHaar if !group.is_compact() => Err(Error::Config(format!(
                "uniform Haar proposals need a compact group, got {group:?}"
            ))),
            ProposalKind::Auto => Err(Error::Config("Auto proposals must be resolved before use".into())),
            ProposalKind::RandomWalk(s) if !(s > 0.0 && s.is_finite()) => {
                Err(Error::Config(format!("random-walk scale must be positive, got {s}")))
            }
            _ => Ok(Self { group, kind }),
        }
    }
}

fn skew<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    (&g - g.transpose()) * (scale / std::f64::consts::SQRT_2)
}

fn first_axis_reflection(d: usize) -> DMatrix<f64> {
    let mut r = DMatrix::identity(d, d);
    r[(0, 0)] = -1.0;
    r
}

fn orthogonal_step<R: Rng + ?Sized>(u: &DMatrix<f64>, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let d = u.nrows();
    let mut out = u * expm(&skew(d, scale, rng));
    if rng.random::<f64>() < FLIP_PROB {
        out *= first_axis_reflection(d);
    }
    out
}

/// `exp` of the Lorentz-algebra element `[[A, b], [bᵀ, 0]]` with `A` skew.
pub fn lorentz_algebra_exp(a: &DMatrix<f64>, b: &[f64]) -> DMatrix<f64> {
    let k = a.nrows();
    let mut xi = DMatrix::zeros(k + 1, k + 1);
    xi.view_mut((0, 0), (k, k)).copy_from(a);
    for (i, &bi) in b.iter().enumerate() {
        xi[(i, k)] = bi;
        xi[(k, i)] = bi;
    }
    expm(&xi)
}

impl Proposal<Isometry> for GroupProposal {
    fn propose<R: Rng + ?Sized>(&self, current: &Isometry, rng: &mut R) -> Isometry {
        let scale = match self.kind {
            ProposalKind::UniformHaar => return self.group.haar(rng).expect("compactness checked in new"),
            ProposalKind::RandomWalk(s) => s,
            ProposalKind::Auto => unreachable!("rejected in GroupProposal::new"),
        };
        match current {
            Isometry::Orthogonal(u) => Isometry::Orthogonal(orthogonal_step(u, scale, rng)),
            Isometry::SpdConjugation(u) => Isometry::SpdConjugation(orthogonal_step(u, scale, rng)),
            Isometry::StiefelPair { u, v } => Isometry::StiefelPair {
                u: orthogonal_step(u, scale, rng),
                v: orthogonal_step(v, scale, rng),
            },
            Isometry::Lorentz(l) => {
                let k = l.nrows() - 1;
                let a = skew(k, scale, rng);
                let b: Vec<f64> = (0..k).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
                let mut out = l * lorentz_algebra_exp(&a, &b);
                if rng.random::<f64>() < FLIP_PROB {
                    out *= first_axis_reflection(k + 1);
                }
                Isometry::Lorentz(out)
            }
            Isometry::TorusElement(gs) => Isometry::TorusElement(
                gs.iter()
                    .map(|g| {
                        let d: f64 = scale * rng.sample::<f64, _>(StandardNormal);
                        let mut out = g * Isometry::rotation2(d);
                        if rng.random::<f64>() < FLIP_PROB {
                            out *= Isometry::reflection2(0.0);
                        }
                        out
                    })
                    .collect(),
            ),
            Isometry::SpdScaling(a) => {
                let z: f64 = rng.sample(StandardNormal);
                Isometry::SpdScaling(a * (scale * z).exp())
            }
        }
    }
}
