//! Projective measurement: collapse, the pinching (hat) operation, the
//! disturbance functional, and the successive-measurement lower bound.

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::sample;
use crate::state::{
    covariance, real_expectation, variance, DensityMatrix, Observable, Pvm,
    DEFAULT_DEGENERACY_TOL,
};

/// Probability threshold below which a conditioning branch counts as null.
pub const NULL_EVENT_TOL: f64 = 1e-12;

/// Post-measurement state together with the outcome distribution.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    /// The collapsed state.
    pub post_state: DensityMatrix,
    /// `(eigenvalue, probability)` pairs, in the measure's outcome order.
    pub outcome_probs: Vec<(f64, f64)>,
}

impl MeasurementOutcome {
    fn new(post_state: DensityMatrix, outcome_probs: Vec<(f64, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for &(_, p) in &outcome_probs {
            if p < -1e-10 {
                return Err(Error::NumericalContract {
                    what: "outcome probability must be non-negative",
                    defect: -p,
                    tol: 1e-10,
                });
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::NumericalContract {
                what: "outcome probabilities must sum to one",
                defect: (total - 1.0).abs(),
                tol: 1e-10,
            });
        }
        Ok(Self {
            post_state,
            outcome_probs,
        })
    }
}

/// Pinches `m` against the measure's eigenspaces: `sum_i P_i m P_i`.
pub(crate) fn pinch(m: &ComplexMatrix, pvm: &Pvm) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.dim());
    for p in pvm.projectors() {
        out = out.add(&p.mul(m).mul(p));
    }
    out
}

/// Projective collapse `rho -> sum_i P_i rho P_i` with outcome probabilities
/// `Tr(P_i rho)`.
pub fn collapse_pvm(rho: &DensityMatrix, pvm: &Pvm) -> Result<MeasurementOutcome> {
    if rho.dim() != pvm.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: pvm.dim(),
        });
    }
    let post = DensityMatrix::new(pinch(rho.matrix(), pvm))?;
    let mut probs = Vec::with_capacity(pvm.len());
    for (i, p) in pvm.projectors().iter().enumerate() {
        let prob = real_expectation(p.trace_product(rho.matrix()), pvm.dim() as f64)?;
        probs.push((pvm.eigenvalue(i), prob));
    }
    MeasurementOutcome::new(post, probs)
}

/// The block-diagonal part of `B` in the measured eigenbasis,
/// `B_hat = sum_i P_i B P_i`. Idempotent, and commutes with the measured
/// observable.
pub fn hat_operator(b: &Observable, pvm: &Pvm) -> Result<Observable> {
    if b.dim() != pvm.dim() {
        return Err(Error::DimensionMismatch {
            left: b.dim(),
            right: pvm.dim(),
        });
    }
    Observable::new(pinch(b.matrix(), pvm))
}

/// Off-block pieces `M_i = P_i B (1 - P_i)`; `sum_i M_i M_i^H` is the positive
/// operator behind the second term of the successive-measurement bound.
fn off_block_gram(b: &Observable, pvm: &Pvm) -> ComplexMatrix {
    let one = ComplexMatrix::identity(b.dim());
    let mut gram = ComplexMatrix::zeros(b.dim());
    for p in pvm.projectors() {
        let m_i = p.mul(b.matrix()).mul(&one.sub(p));
        gram = gram.add(&m_i.mul(&m_i.adjoint()));
    }
    gram
}

/// Squared disturbance of `B` caused by projectively measuring the observable
/// behind `pvm`, evaluated in `rho`:
///
/// `eta(B)^2 = Tr[((B - B_hat)^2 + (B^2)_hat - B_hat^2) rho]`.
///
/// The identity `(B^2)_hat - B_hat^2 = sum_i M_i M_i^H` is verified on every
/// call; a violation signals a broken measure rather than a caller error.
pub fn disturbance_eta_sq(b: &Observable, pvm: &Pvm, rho: &DensityMatrix) -> Result<f64> {
    if b.dim() != pvm.dim() || b.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: b.dim(),
            right: if b.dim() != pvm.dim() {
                pvm.dim()
            } else {
                rho.dim()
            },
        });
    }
    let b_hat = pinch(b.matrix(), pvm);
    let b_sq_hat = pinch(&b.matrix().mul(b.matrix()), pvm);
    let spread = b_sq_hat.sub(&b_hat.mul(&b_hat));

    let gram = off_block_gram(b, pvm);
    let scale = b.matrix().max_norm().powi(2).max(1.0);
    let defect = spread.sub(&gram).max_norm();
    let tol = 1e-10 * scale;
    if defect > tol {
        return Err(Error::NumericalContract {
            what: "(B^2)_hat - B_hat^2 must equal sum_i M_i M_i^H",
            defect,
            tol,
        });
    }

    let diff = b.matrix().sub(&b_hat);
    let total = diff.mul(&diff).add(&spread);
    let eta_sq = real_expectation(total.trace_product(rho.matrix()), scale)?;
    Ok(eta_sq.max(0.0))
}

/// Disturbance `eta(B)`, the square root of [`disturbance_eta_sq`].
pub fn disturbance_eta(b: &Observable, pvm: &Pvm, rho: &DensityMatrix) -> Result<f64> {
    Ok(disturbance_eta_sq(b, pvm, rho)?.sqrt())
}

/// The two sides of the successive-measurement inequality for measuring `A`
/// and then `B`.
#[derive(Clone, Copy, Debug)]
pub struct SuccessiveBound {
    /// `(Delta A)^2_rho (Delta B)^2_rho_hat`.
    pub product: f64,
    /// `Cov(A, B_hat)_rho^2`, equal to the covariance squared in the
    /// collapsed state.
    pub covariance_term: f64,
    /// `(Delta A)^2_rho sum_i Tr(M_i M_i^H rho)`.
    pub collapse_term: f64,
}

impl SuccessiveBound {
    pub fn bound(&self) -> f64 {
        self.covariance_term + self.collapse_term
    }

    pub fn margin(&self) -> f64 {
        self.product - self.bound()
    }
}

/// Evaluates the successive-measurement bound: measure `A` first, then `B`.
pub fn successive_bound(
    a: &Observable,
    b: &Observable,
    rho: &DensityMatrix,
) -> Result<SuccessiveBound> {
    if a.dim() != b.dim() || a.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: if a.dim() != b.dim() { b.dim() } else { rho.dim() },
        });
    }
    let pvm = crate::state::pvm_from_observable(a, DEFAULT_DEGENERACY_TOL)?;
    let collapsed = collapse_pvm(rho, &pvm)?;
    let var_a = variance(a, rho)?;
    let var_b_post = variance(b, &collapsed.post_state)?;

    let b_hat = hat_operator(b, &pvm)?;
    let covariance_term = covariance(a, &b_hat, rho)?.powi(2);

    let gram = off_block_gram(b, &pvm);
    let scale = b.matrix().max_norm().powi(2).max(1.0);
    let gram_expectation = real_expectation(gram.trace_product(rho.matrix()), scale)?;
    let collapse_term = var_a * gram_expectation.max(0.0);

    Ok(SuccessiveBound {
        product: var_a * var_b_post,
        covariance_term,
        collapse_term,
    })
}

/// Expectation of `O` conditioned on the branch selected by `projector`,
/// `Tr(P O P rho_hat) / Tr(P rho_hat)`. Errors when the branch probability is
/// below [`NULL_EVENT_TOL`].
pub fn conditional_expectation(
    o: &Observable,
    projector: &ComplexMatrix,
    rho_hat: &DensityMatrix,
) -> Result<f64> {
    if o.dim() != projector.dim() || o.dim() != rho_hat.dim() {
        return Err(Error::DimensionMismatch {
            left: o.dim(),
            right: if o.dim() != projector.dim() {
                projector.dim()
            } else {
                rho_hat.dim()
            },
        });
    }
    let z = real_expectation(projector.trace_product(rho_hat.matrix()), o.dim() as f64)?;
    if z <= NULL_EVENT_TOL {
        return Err(Error::NullEvent {
            prob: z,
            tol: NULL_EVENT_TOL,
        });
    }
    let pop = projector.mul(o.matrix()).mul(projector);
    let scale = o.matrix().max_norm() * o.dim() as f64;
    let num = real_expectation(pop.trace_product(rho_hat.matrix()), scale)?;
    Ok(num / z)
}

/// Signed change of the variance of `B` under the collapse, `(Delta B)^2_post
/// - (Delta B)^2_pre`. Legitimately negative for some states; never clamped.
pub fn delta_uncertainty(b: &Observable, pvm: &Pvm, rho: &DensityMatrix) -> Result<f64> {
    let collapsed = collapse_pvm(rho, pvm)?;
    Ok(variance(b, &collapsed.post_state)? - variance(b, rho)?)
}

/// A candidate from [`search_zero_disturbance_counterexample`]: a state with
/// `eta(B) ~ 0` and the largest observed shift of the outcome distribution
/// of `B` under the collapse.
#[derive(Clone, Debug)]
pub struct ZeroDisturbanceCandidate {
    pub eta: f64,
    /// Total-variation distance between the outcome distributions of `B` in
    /// the initial and collapsed states.
    pub distribution_shift: f64,
}

/// Randomized search for a state with vanishing disturbance but a shifted
/// outcome distribution for `B`. Whether such a case exists is an open
/// question; this search only reports the best candidate it finds and asserts
/// nothing.
pub fn search_zero_disturbance_counterexample(
    dim: usize,
    trials: usize,
    seed: u64,
) -> Option<ZeroDisturbanceCandidate> {
    let mut rng = sample::seeded_rng(seed);
    let mut best: Option<ZeroDisturbanceCandidate> = None;
    for _ in 0..trials {
        let outcomes = rng.gen_range(2..=dim.min(4));
        let pvm = sample::random_pvm(dim, outcomes, &mut rng);
        let b = sample::random_observable(dim, &mut rng);

        // eta(B)^2 = Tr(T rho) with T >= 0, so candidates must live in the
        // kernel of T.
        let b_hat = pinch(b.matrix(), &pvm);
        let diff = b.matrix().sub(&b_hat);
        let t = diff.mul(&diff).add(&off_block_gram(&b, &pvm));
        let eig = t.hermitian_eigen();
        let kernel: Vec<usize> = (0..dim).filter(|&i| eig.values[i].abs() <= 1e-10).collect();
        if kernel.is_empty() {
            continue;
        }
        let mut mat = ComplexMatrix::zeros(dim);
        let mut total = 0.0;
        let mut weights = Vec::new();
        for _ in &kernel {
            let w: f64 = rng.gen_range(0.1..1.0);
            total += w;
            weights.push(w);
        }
        for (&k, w) in kernel.iter().zip(&weights) {
            mat = mat.add(&eig.projector(k).scale(w / total));
        }
        let Ok(rho) = DensityMatrix::new(mat) else {
            continue;
        };
        let Ok(eta) = disturbance_eta(&b, &pvm, &rho) else {
            continue;
        };
        if eta > 1e-8 {
            continue;
        }
        let Ok(b_pvm) = crate::state::pvm_from_observable(&b, DEFAULT_DEGENERACY_TOL) else {
            continue;
        };
        let Ok(before) = collapse_pvm(&rho, &b_pvm) else {
            continue;
        };
        let Ok(collapsed) = collapse_pvm(&rho, &pvm) else {
            continue;
        };
        let Ok(after) = collapse_pvm(&collapsed.post_state, &b_pvm) else {
            continue;
        };
        let shift: f64 = before
            .outcome_probs
            .iter()
            .zip(&after.outcome_probs)
            .map(|(&(_, p), &(_, q))| 0.5 * (p - q).abs())
            .sum();
        if best.as_ref().is_none_or(|c| shift > c.distribution_shift) {
            best = Some(ZeroDisturbanceCandidate {
                eta,
                distribution_shift: shift,
            });
        }
    }
    best
}
