//! Generalized (POVM) measurements: Kraus collapse, the weak-measurement
//! family interpolating between a projective measurement and no measurement,
//! the intrinsic noise and disturbance functionals, the auxiliary-system
//! dilation cross-check, and the uncertainty-relation evaluators built from
//! them.

use std::f64::consts::{FRAC_PI_4, SQRT_2};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::measure::{disturbance_eta_sq, pinch, MeasurementOutcome};
use crate::spin::{jx, BlochState, SpinObservable};
use crate::state::{real_expectation, variance, DensityMatrix, Observable, Pvm};

/// One POVM element: the effect `F` and the Kraus operator `L` with
/// `F = L^H L`. The choice of `L` is part of the measurement prescription.
#[derive(Clone, Debug)]
pub struct PovmElement {
    pub effect: ComplexMatrix,
    pub kraus: ComplexMatrix,
}

/// A finite POVM with real outcome labels.
#[derive(Clone, Debug)]
pub struct DiscretePovm {
    elements: Vec<PovmElement>,
    labels: Vec<f64>,
}

impl DiscretePovm {
    pub fn new(elements: Vec<PovmElement>, labels: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(elements, labels, 1e-10)
    }

    pub fn with_tolerance(
        elements: Vec<PovmElement>,
        labels: Vec<f64>,
        tol: f64,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm {
                reason: "no elements".into(),
            });
        }
        if elements.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                left: elements.len(),
                right: labels.len(),
            });
        }
        let dim = elements[0].effect.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for (i, el) in elements.iter().enumerate() {
            if el.effect.dim() != dim || el.kraus.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: el.effect.dim(),
                    right: dim,
                });
            }
            let herm = el.effect.hermitian_defect();
            if herm > tol {
                return Err(Error::InvalidPovm {
                    reason: format!("effect {i} not hermitian (defect {herm:.3e})"),
                });
            }
            let eigs = el.effect.hermitian_eigen().values;
            let lo = eigs.first().copied().unwrap_or(0.0);
            let hi = eigs.last().copied().unwrap_or(0.0);
            if lo < -tol.max(1e-8) || hi > 1.0 + tol.max(1e-8) {
                return Err(Error::InvalidPovm {
                    reason: format!("effect {i} spectrum [{lo:.3e}, {hi:.3e}] escapes [0, 1]"),
                });
            }
            let decomp = el.kraus.adjoint().mul(&el.kraus).sub(&el.effect).max_norm();
            if decomp > tol {
                return Err(Error::InvalidPovm {
                    reason: format!("effect {i} is not L^H L (defect {decomp:.3e})"),
                });
            }
            sum = sum.add(&el.effect);
        }
        let complete = sum.sub(&ComplexMatrix::identity(dim)).max_norm();
        if complete > tol {
            return Err(Error::InvalidPovm {
                reason: format!("effects do not sum to identity (defect {complete:.3e})"),
            });
        }
        Ok(Self { elements, labels })
    }

    /// A PVM reinterpreted as a POVM with `L_i = F_i = P_i`.
    pub fn from_pvm(pvm: &Pvm) -> Self {
        let elements = pvm
            .projectors()
            .iter()
            .map(|p| PovmElement {
                effect: p.clone(),
                kraus: p.clone(),
            })
            .collect();
        Self {
            elements,
            labels: pvm.eigenvalues().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].effect.dim()
    }

    pub fn element(&self, i: usize) -> &PovmElement {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }
}

/// Kraus collapse `rho -> sum_i L_i rho L_i^H`, with outcome probabilities
/// `Tr(F_i rho)`.
pub fn collapse_povm(rho: &DensityMatrix, povm: &DiscretePovm) -> Result<MeasurementOutcome> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: povm.dim(),
        });
    }
    let mut post = ComplexMatrix::zeros(rho.dim());
    let mut probs = Vec::with_capacity(povm.len());
    for (el, &label) in povm.elements.iter().zip(&povm.labels) {
        post = post.add(&el.kraus.mul(rho.matrix()).mul(&el.kraus.adjoint()));
        let p = real_expectation(el.effect.trace_product(rho.matrix()), povm.dim() as f64)?;
        probs.push((label, p));
    }
    let post_state = DensityMatrix::new(post)?;
    let mut total = 0.0;
    for &(_, p) in &probs {
        total += p;
    }
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::NumericalContract {
            what: "POVM outcome probabilities must sum to one",
            defect: (total - 1.0).abs(),
            tol: 1e-10,
        });
    }
    Ok(MeasurementOutcome {
        post_state,
        outcome_probs: probs,
    })
}

/// Strength profile of a weak-measurement family: a monotone map from the
/// strength parameter to `f`, with `f = 1` the full projective measurement
/// and `f = 0` no measurement at all.
#[derive(Clone)]
enum StrengthProfile {
    /// `f(theta) = (2/N)(1 - cos(2(theta_max - theta)))`, defined for
    /// `N <= 4`; at `N = 2` this is `1 - sin(2 theta)`.
    Prescribed { n: usize },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// One-parameter family of POVMs that weakens a projective measurement down
/// to the uniform outcome distribution.
#[derive(Clone)]
pub struct WeakFamily {
    base: Pvm,
    profile: StrengthProfile,
    theta_max: f64,
}

impl fmt::Debug for WeakFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeakFamily")
            .field("outcomes", &self.base.len())
            .field("theta_max", &self.theta_max)
            .field(
                "profile",
                &match self.profile {
                    StrengthProfile::Prescribed { n } => format!("prescribed(N={n})"),
                    StrengthProfile::Custom(_) => "custom".to_string(),
                },
            )
            .finish()
    }
}

impl WeakFamily {
    /// The built-in profile `f(theta) = (2/N)(1 - cos 2(theta_max - theta))`
    /// with `theta_max = 2^(N-3) pi / N`. Only `N <= 4` reaches `f(0) = 1`.
    pub fn prescribed(base: Pvm) -> Result<Self> {
        let n = base.len();
        if !(2..=4).contains(&n) {
            return Err(Error::InvalidWeakProfile {
                reason: format!("prescribed profile reaches f(0) = 1 only for 2 <= N <= 4, got {n}"),
            });
        }
        let theta_max = 2f64.powi(n as i32 - 3) * std::f64::consts::PI / n as f64;
        let family = Self {
            base,
            profile: StrengthProfile::Prescribed { n },
            theta_max,
        };
        family.validate_profile()?;
        Ok(family)
    }

    /// A caller-supplied monotone profile with `f(0) = 1`, `f(theta_max) = 0`.
    pub fn with_profile(
        base: Pvm,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        theta_max: f64,
    ) -> Result<Self> {
        if theta_max.is_nan() || theta_max <= 0.0 {
            return Err(Error::OutOfRange {
                name: "theta_max",
                value: theta_max,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        if base.len() < 2 {
            return Err(Error::InvalidWeakProfile {
                reason: "weak family needs at least two outcomes".into(),
            });
        }
        let family = Self {
            base,
            profile: StrengthProfile::Custom(Arc::new(f)),
            theta_max,
        };
        family.validate_profile()?;
        Ok(family)
    }

    fn validate_profile(&self) -> Result<()> {
        let head = self.strength(0.0);
        if (head - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeakProfile {
                reason: format!("f(0) = {head}, expected 1"),
            });
        }
        let tail = self.strength(self.theta_max);
        if tail.abs() > 1e-12 {
            return Err(Error::InvalidWeakProfile {
                reason: format!("f(theta_max) = {tail}, expected 0"),
            });
        }
        let samples = 129;
        let mut prev = head;
        for k in 1..=samples {
            let theta = self.theta_max * k as f64 / samples as f64;
            let value = self.strength(theta);
            if !(0.0..=1.0 + 1e-12).contains(&value) {
                return Err(Error::InvalidWeakProfile {
                    reason: format!("f({theta}) = {value} escapes [0, 1]"),
                });
            }
            if value > prev + 1e-12 {
                return Err(Error::InvalidWeakProfile {
                    reason: format!("f not monotone decreasing near theta = {theta}"),
                });
            }
            prev = value;
        }
        Ok(())
    }

    pub fn base(&self) -> &Pvm {
        &self.base
    }

    pub fn outcomes(&self) -> usize {
        self.base.len()
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// The profile value `f(theta)`.
    pub fn strength(&self, theta: f64) -> f64 {
        match &self.profile {
            StrengthProfile::Prescribed { n } => {
                let beta = 2.0 * (self.theta_max - theta);
                (2.0 / *n as f64) * (1.0 - beta.cos())
            }
            StrengthProfile::Custom(f) => f(theta),
        }
    }

    fn check_theta(&self, theta: f64) -> Result<f64> {
        if !(0.0..=self.theta_max + 1e-15).contains(&theta) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: theta,
                min: 0.0,
                max: self.theta_max,
            });
        }
        Ok(self.strength(theta).clamp(0.0, 1.0))
    }
}

/// Effect mixing weight `g` from the profile value `f`:
/// `g = (1 - 2/N) f + (2/N) sqrt(N - (N-1) f) sqrt(f)`.
pub fn effect_weight(f: f64, n: usize) -> f64 {
    let nf = n as f64;
    (1.0 - 2.0 / nf) * f + (2.0 / nf) * ((nf - (nf - 1.0) * f).sqrt() * f.sqrt())
}

/// Builds the POVM of the family at strength parameter `theta`:
/// `L_i = (1/N)(sqrt(N - (N-1) f) - sqrt(f)) 1 + sqrt(f) P_i`.
pub fn weak_povm(family: &WeakFamily, theta: f64) -> Result<DiscretePovm> {
    let f = family.check_theta(theta)?;
    let n = family.outcomes();
    let nf = n as f64;
    let dim = family.base.dim();
    let g = effect_weight(f, n);
    let scalar = ((nf - (nf - 1.0) * f).sqrt() - f.sqrt()) / nf;
    let sqrt_f = f.sqrt();
    let one = ComplexMatrix::identity(dim);
    let mut elements = Vec::with_capacity(n);
    for p in family.base.projectors() {
        let kraus = one.scale(scalar).add(&p.scale(sqrt_f));
        let effect = one.scale((1.0 - g) / nf).add(&p.scale(g));
        elements.push(PovmElement { effect, kraus });
    }
    DiscretePovm::with_tolerance(elements, family.base.eigenvalues().to_vec(), 1e-10)
}

/// Relabeled outcome values `lambda_i(theta) = (lambda_i - (1-g) mean) / g`
/// that make the weak POVM reproduce the expectation of the base observable.
/// Undefined at the uniform limit where `g` vanishes.
pub fn contextual_values(family: &WeakFamily, theta: f64) -> Result<Vec<f64>> {
    let f = family.check_theta(theta)?;
    let g = effect_weight(f, family.outcomes());
    if g <= 1e-12 {
        return Err(Error::UniformLimit { g });
    }
    let lambdas = family.base.eigenvalues();
    let mean: f64 = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
    Ok(lambdas
        .iter()
        .map(|&l| (l - (1.0 - g) * mean) / g)
        .collect())
}

/// Intrinsic measurement noise
/// `eps(A)^2 = sum_ij (lambda_i - lambda_j)^2 Tr(F_i P_j rho)`:
/// the mean-squared deviation of the recorded label from the underlying value.
/// The POVM must carry the eigenvalue labels of `pvm`.
pub fn epsilon_noise(povm: &DiscretePovm, pvm: &Pvm, rho: &DensityMatrix) -> Result<f64> {
    if povm.dim() != pvm.dim() || povm.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: povm.dim(),
            right: if povm.dim() != pvm.dim() {
                pvm.dim()
            } else {
                rho.dim()
            },
        });
    }
    if povm.len() != pvm.len() {
        return Err(Error::LabelMismatch);
    }
    for (l, e) in povm.labels().iter().zip(pvm.eigenvalues()) {
        if (l - e).abs() > 1e-12 {
            return Err(Error::LabelMismatch);
        }
    }
    let mut total = C64::new(0.0, 0.0);
    for (i, el) in povm.elements().iter().enumerate() {
        for (j, p) in pvm.projectors().iter().enumerate() {
            let gap = povm.labels()[i] - pvm.eigenvalue(j);
            if gap == 0.0 {
                continue;
            }
            let t = el.effect.mul(p).trace_product(rho.matrix());
            total += t * gap * gap;
        }
    }
    let scale = povm
        .labels()
        .iter()
        .fold(1.0f64, |m, l| m.max(l.abs()))
        .powi(2)
        * povm.len() as f64;
    let eps_sq = real_expectation(total, scale)?;
    Ok(eps_sq.max(0.0).sqrt())
}

/// Tilde map `O -> sum_i L_i O L_i^H` for an observable.
fn tilde(o: &ComplexMatrix, povm: &DiscretePovm) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(o.dim());
    for el in povm.elements() {
        out = out.add(&el.kraus.mul(o).mul(&el.kraus.adjoint()));
    }
    out
}

/// Disturbance of `B` under the weak measurement at strength `theta`:
///
/// `eta_theta(B)^2 = Tr[((B - B~)^2 + (B^2)~ - B~^2) rho]`,
///
/// verified on every call against its closed form `f(theta) eta(B)^2`.
/// Returns `eta_theta(B)`.
pub fn eta_weak(
    b: &Observable,
    family: &WeakFamily,
    theta: f64,
    rho: &DensityMatrix,
) -> Result<f64> {
    let f = family.check_theta(theta)?;
    if b.dim() != family.base.dim() || b.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: b.dim(),
            right: family.base.dim(),
        });
    }
    let povm = weak_povm(family, theta)?;
    let b_tilde = tilde(b.matrix(), &povm);
    let b_sq_tilde = tilde(&b.matrix().mul(b.matrix()), &povm);
    let diff = b.matrix().sub(&b_tilde);
    let total = diff
        .mul(&diff)
        .add(&b_sq_tilde)
        .sub(&b_tilde.mul(&b_tilde));
    let scale = b.matrix().max_norm().powi(2).max(1.0);
    let eta_sq = real_expectation(total.trace_product(rho.matrix()), scale)?.max(0.0);

    let closed = f * disturbance_eta_sq(b, &family.base, rho)?;
    let tol = 1e-10 * scale;
    if (eta_sq - closed).abs() > tol {
        return Err(Error::NumericalContract {
            what: "eta_theta^2 must equal f(theta) * eta^2",
            defect: (eta_sq - closed).abs(),
            tol,
        });
    }
    Ok(eta_sq.sqrt())
}

/// Auxiliary system, initial state and coupling unitary realizing the
/// projective collapse as a partial trace. Exists for 2, 3 or 4 outcomes.
#[derive(Clone, Debug)]
pub struct DilationTriple {
    /// Auxiliary state `chi = sum_i P_i / (n_i N)` on a copy of the system.
    pub aux_state: DensityMatrix,
    /// `U = exp(i beta sum_i P_i (x) P_i)` on the doubled space.
    pub unitary: ComplexMatrix,
    /// Coupling angle with `2(1 - cos beta) = N`.
    pub beta: f64,
}

impl DilationTriple {
    /// The uniform prescription for a given projective measure.
    pub fn uniform(pvm: &Pvm) -> Result<Self> {
        let n = pvm.len();
        if !(2..=4).contains(&n) {
            return Err(Error::DilationUnavailable { n });
        }
        let nf = n as f64;
        let dim = pvm.dim();
        let beta = (1.0 - nf / 2.0).acos();
        debug_assert!((2.0 * (1.0 - beta.cos()) - nf).abs() < 1e-12);

        let mut chi = ComplexMatrix::zeros(dim);
        for (i, p) in pvm.projectors().iter().enumerate() {
            let mult = pvm.multiplicity(i) as f64;
            chi = chi.add(&p.scale(1.0 / (mult * nf)));
        }
        let aux_state = DensityMatrix::new(chi)?;

        // Q = sum_i P_i (x) P_i is a projector, so the exponential closes:
        // exp(i beta Q) = 1 + (e^{i beta} - 1) Q.
        let mut q = ComplexMatrix::zeros(dim * dim);
        for p in pvm.projectors() {
            q = q.add(&p.kronecker(p));
        }
        let phase = C64::new(0.0, beta).exp() - C64::new(1.0, 0.0);
        let unitary = ComplexMatrix::identity(dim * dim).add(&q.scale_c(phase));
        let unitarity = unitary
            .mul(&unitary.adjoint())
            .sub(&ComplexMatrix::identity(dim * dim))
            .max_norm();
        if unitarity > 1e-10 {
            return Err(Error::NumericalContract {
                what: "dilation unitary must satisfy U U^H = 1",
                defect: unitarity,
                tol: 1e-10,
            });
        }
        Ok(Self {
            aux_state,
            unitary,
            beta,
        })
    }
}

/// Outcome of [`dilation_crosscheck`]: the partial-trace identity residual and
/// the disturbance computed both ways.
#[derive(Clone, Copy, Debug)]
pub struct DilationCheck {
    pub beta: f64,
    /// `max |Tr_aux(U rho(x)chi U^H) - rho_hat|`.
    pub partial_trace_err: f64,
    /// Disturbance squared from the auxiliary-system definition.
    pub eta_sq_dilation: f64,
    /// Disturbance squared from the intrinsic definition.
    pub eta_sq_intrinsic: f64,
}

impl DilationCheck {
    pub fn eta_abs_diff(&self) -> f64 {
        (self.eta_sq_dilation.max(0.0).sqrt() - self.eta_sq_intrinsic.max(0.0).sqrt()).abs()
    }
}

/// Realizes the collapse through the uniform dilation and compares the
/// auxiliary-system disturbance with the intrinsic one.
pub fn dilation_crosscheck(
    pvm: &Pvm,
    rho: &DensityMatrix,
    b: &Observable,
) -> Result<DilationCheck> {
    if pvm.dim() != rho.dim() || pvm.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: pvm.dim(),
            right: if pvm.dim() != rho.dim() {
                rho.dim()
            } else {
                b.dim()
            },
        });
    }
    let triple = DilationTriple::uniform(pvm)?;
    let dim = pvm.dim();
    let joint = rho.matrix().kronecker(triple.aux_state.matrix());
    let evolved = triple.unitary.mul(&joint).mul(&triple.unitary.adjoint());
    let reduced = evolved.partial_trace_right(dim, dim)?;
    let rho_hat = pinch(rho.matrix(), pvm);
    let partial_trace_err = reduced.sub(&rho_hat).max_norm();

    let b_big = b.matrix().kronecker(&ComplexMatrix::identity(dim));
    let moved = triple
        .unitary
        .adjoint()
        .mul(&b_big)
        .mul(&triple.unitary)
        .sub(&b_big);
    let scale = b.matrix().max_norm().powi(2).max(1.0) * dim as f64;
    let eta_sq_dilation =
        real_expectation(moved.mul(&moved).trace_product(&joint), scale)?.max(0.0);
    let eta_sq_intrinsic = disturbance_eta_sq(b, pvm, rho)?;

    Ok(DilationCheck {
        beta: triple.beta,
        partial_trace_err,
        eta_sq_dilation,
        eta_sq_intrinsic,
    })
}

/// One evaluation of the noise-disturbance uncertainty relation
/// `eps (eta + Delta B) + Delta A * eta >= |Tr([A,B] rho)| / 2`.
#[derive(Clone, Copy, Debug)]
pub struct OzawaCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl OzawaCheck {
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Evaluates both sides for given noise and disturbance values; no saturation
/// is asserted (the relation never gets close to equality).
pub fn ozawa_inequality(
    a: &Observable,
    b: &Observable,
    rho: &DensityMatrix,
    eps: f64,
    eta: f64,
) -> Result<OzawaCheck> {
    if a.dim() != b.dim() || a.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: if a.dim() != b.dim() { b.dim() } else { rho.dim() },
        });
    }
    if eps < 0.0 || eta < 0.0 {
        return Err(Error::OutOfRange {
            name: "noise/disturbance",
            value: eps.min(eta),
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let da = variance(a, rho)?.sqrt();
    let db = variance(b, rho)?.sqrt();
    let comm = a.matrix().commutator(b.matrix());
    let rhs = 0.5 * comm.trace_product(rho.matrix()).norm();
    Ok(OzawaCheck {
        lhs: eps * (eta + db) + da * eta,
        rhs,
    })
}

/// The weak-measurement uncertainty relation on the two-state system, scaled
/// by `2 sqrt(2)`: term by term, `2 sqrt2 eps eta_theta + 2 sqrt2 eps Delta B
/// + 2 sqrt2 Delta A eta >= |b_y a_z - b_z a_y| / sqrt 2`.
#[derive(Clone, Copy, Debug)]
pub struct OlwCheck {
    /// `2 sin(theta)(cos(theta) - sin(theta)) sqrt(b_y^2 + b_z^2)`.
    pub noise_disturbance_term: f64,
    /// `sqrt2 sin(theta) sqrt(b^2 - (a.b)^2)`.
    pub noise_spread_term: f64,
    /// `sqrt(1 - a_x^2) sqrt(b_y^2 + b_z^2)`.
    pub projective_term: f64,
    pub rhs: f64,
    /// Largest deviation between the squared closed-form terms and the
    /// matrix-engine evaluation of the same products.
    pub crosscheck_err: f64,
}

impl OlwCheck {
    pub fn lhs(&self) -> f64 {
        self.noise_disturbance_term + self.noise_spread_term + self.projective_term
    }

    pub fn gap(&self) -> f64 {
        self.lhs() - self.rhs
    }
}

/// Evaluates the two-state weak-measurement relation at strength `theta` in
/// `[0, pi/4]` (profile `f = 1 - sin 2 theta`), cross-checking every term
/// against the matrix engine.
pub fn olw_inequality(
    theta: f64,
    state: &BlochState,
    obs: &SpinObservable,
) -> Result<OlwCheck> {
    if !(0.0..=FRAC_PI_4 + 1e-15).contains(&theta) {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            min: 0.0,
            max: FRAC_PI_4,
        });
    }
    let a = state.vector();
    let b = obs.vector();
    let b_sq = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    let adotb = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let byz = (b[1] * b[1] + b[2] * b[2]).sqrt();
    let spread = (b_sq - adotb * adotb).max(0.0).sqrt();
    let (sin_t, cos_t) = theta.sin_cos();

    let noise_disturbance_term = 2.0 * sin_t * (cos_t - sin_t) * byz;
    let noise_spread_term = SQRT_2 * sin_t * spread;
    let projective_term = (1.0 - a[0] * a[0]).max(0.0).sqrt() * byz;
    let rhs = (b[1] * a[2] - b[2] * a[1]).abs() / SQRT_2;

    // Matrix-engine evaluation of the same pieces.
    let rho = state.to_density();
    let b_obs = obs.observable();
    let a_obs = Observable::new(jx()).expect("J_x is hermitian");
    let pvm = crate::state::pvm_from_observable(&a_obs, 1e-10)?;
    let family = WeakFamily::prescribed(pvm.clone())?;
    let povm = weak_povm(&family, theta)?;
    let eps = epsilon_noise(&povm, &pvm, &rho)?;
    let eta_theta = eta_weak(&b_obs, &family, theta, &rho)?;
    let eta_sq = disturbance_eta_sq(&b_obs, &pvm, &rho)?;
    let var_a = variance(&a_obs, &rho)?;
    let var_b = variance(&b_obs, &rho)?;
    // Compare squared products: the squares are the directly-computed
    // quantities, free of the sqrt blow-up of round-off near zero.
    let crosscheck_err = [
        (noise_disturbance_term.powi(2) - 8.0 * eps * eps * eta_theta * eta_theta).abs(),
        (noise_spread_term.powi(2) - 8.0 * eps * eps * var_b).abs(),
        (projective_term.powi(2) - 8.0 * var_a * eta_sq).abs(),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    let tol = 1e-10 * (1.0 + b_sq).powi(2);
    if crosscheck_err > tol {
        return Err(Error::NumericalContract {
            what: "closed-form terms must match the matrix engine",
            defect: crosscheck_err,
            tol,
        });
    }

    let check = OlwCheck {
        noise_disturbance_term,
        noise_spread_term,
        projective_term,
        rhs,
        crosscheck_err,
    };
    if check.gap() < -1e-12 * (1.0 + b_sq) {
        return Err(Error::NumericalContract {
            what: "weak-measurement relation must hold on the Bloch ball",
            defect: -check.gap(),
            tol: 1e-12 * (1.0 + b_sq),
        });
    }
    Ok(check)
}
