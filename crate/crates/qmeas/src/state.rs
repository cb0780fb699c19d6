//! Density matrices, observables, projection-valued measures, and the
//! moment/variance/covariance calculus on them.
//!
//! All types validate their defining invariants at construction and are
//! immutable afterwards; every operation is a pure function.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Validation tolerances. The underlying theory assumes exact arithmetic; these
/// absorb floating-point round-off.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-norm bound on `M - M^H`.
    pub hermitian: f64,
    /// Bound on `|tr - 1|`.
    pub trace: f64,
    /// How far below zero the smallest eigenvalue may sit.
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            trace: 1e-10,
            psd: 1e-8,
        }
    }
}

/// Default eigenvalue-clustering width for [`pvm_from_observable`] callers
/// that have no better-informed choice.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;

/// A mixed state: hermitian, unit-trace, positive semi-definite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(mat, &Tolerances::default())
    }

    pub fn with_tolerances(mat: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let defect = mat.hermitian_defect();
        if defect > tol.hermitian {
            return Err(Error::NotHermitian {
                defect,
                tol: tol.hermitian,
            });
        }
        let trace_defect = (mat.trace() - C64::new(1.0, 0.0)).norm();
        if trace_defect > tol.trace {
            return Err(Error::NotUnitTrace {
                defect: trace_defect,
                tol: tol.trace,
            });
        }
        let min_eig = mat.min_eigenvalue();
        if min_eig < -tol.psd {
            return Err(Error::NotPositiveSemidefinite {
                min_eig,
                tol: tol.psd,
            });
        }
        Ok(Self { mat })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// `Tr(rho^2)`, one for pure states.
    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// Maximally mixed state `1/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Pure state `|psi><psi| / <psi|psi>`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm_sq: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(Error::OutOfRange {
                name: "state norm",
                value: norm_sq,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            });
        }
        let dim = psi.len();
        let mat = ComplexMatrix::from_fn(dim, |i, j| psi[i] * psi[j].conj() / norm_sq);
        Self::new(mat)
    }
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = Error;
    fn try_from(mat: ComplexMatrix) -> Result<Self> {
        Self::new(mat)
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(rho: DensityMatrix) -> Self {
        rho.mat
    }
}

/// A self-adjoint operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct Observable {
    mat: ComplexMatrix,
}

impl Observable {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(mat, Tolerances::default().hermitian)
    }

    pub fn with_tolerance(mat: ComplexMatrix, tol: f64) -> Result<Self> {
        let defect = mat.hermitian_defect();
        if defect > tol {
            return Err(Error::NotHermitian { defect, tol });
        }
        Ok(Self { mat })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }
}

impl TryFrom<ComplexMatrix> for Observable {
    type Error = Error;
    fn try_from(mat: ComplexMatrix) -> Result<Self> {
        Self::new(mat)
    }
}

impl From<Observable> for ComplexMatrix {
    fn from(o: Observable) -> Self {
        o.mat
    }
}

/// Projection-valued measure with a finite outcome set: orthogonal projectors
/// summing to the identity, one distinct eigenvalue per projector.
#[derive(Clone, Debug)]
pub struct Pvm {
    projectors: Vec<ComplexMatrix>,
    eigenvalues: Vec<f64>,
}

impl Pvm {
    pub fn new(projectors: Vec<ComplexMatrix>, eigenvalues: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(projectors, eigenvalues, 1e-10)
    }

    pub fn with_tolerance(
        projectors: Vec<ComplexMatrix>,
        eigenvalues: Vec<f64>,
        tol: f64,
    ) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::InvalidPvm {
                reason: "no projectors".into(),
            });
        }
        if projectors.len() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                left: projectors.len(),
                right: eigenvalues.len(),
            });
        }
        let dim = projectors[0].dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for (i, p) in projectors.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: p.dim(),
                    right: dim,
                });
            }
            let herm = p.hermitian_defect();
            if herm > tol {
                return Err(Error::InvalidPvm {
                    reason: format!("projector {i} not hermitian (defect {herm:.3e})"),
                });
            }
            let idem = p.mul(p).sub(p).max_norm();
            if idem > tol {
                return Err(Error::InvalidPvm {
                    reason: format!("projector {i} not idempotent (defect {idem:.3e})"),
                });
            }
            sum = sum.add(p);
        }
        for i in 0..projectors.len() {
            for j in (i + 1)..projectors.len() {
                let cross = projectors[i].mul(&projectors[j]).max_norm();
                if cross > tol {
                    return Err(Error::InvalidPvm {
                        reason: format!("projectors {i}, {j} not orthogonal (defect {cross:.3e})"),
                    });
                }
            }
        }
        let complete = sum.sub(&ComplexMatrix::identity(dim)).max_norm();
        if complete > tol {
            return Err(Error::InvalidPvm {
                reason: format!("projectors do not sum to identity (defect {complete:.3e})"),
            });
        }
        let scale = eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..eigenvalues.len() {
            for j in (i + 1)..eigenvalues.len() {
                if (eigenvalues[i] - eigenvalues[j]).abs() <= f64::EPSILON * scale {
                    return Err(Error::InvalidPvm {
                        reason: format!(
                            "eigenvalues {} and {} coincide ({})",
                            i, j, eigenvalues[i]
                        ),
                    });
                }
            }
        }
        Ok(Self {
            projectors,
            eigenvalues,
        })
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn projector(&self, i: usize) -> &ComplexMatrix {
        &self.projectors[i]
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Rank of the `i`-th eigenspace.
    pub fn multiplicity(&self, i: usize) -> usize {
        self.projectors[i].trace().re.round() as usize
    }

    /// Reassembles the observable `sum_i lambda_i P_i`.
    pub fn observable(&self) -> Observable {
        let mut mat = ComplexMatrix::zeros(self.dim());
        for (p, &lambda) in self.projectors.iter().zip(&self.eigenvalues) {
            mat = mat.add(&p.scale(lambda));
        }
        Observable { mat }
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// Real part of an expectation that is real in exact arithmetic; errors if the
/// imaginary residue exceeds a scale-aware round-off allowance.
pub(crate) fn real_expectation(value: C64, scale: f64) -> Result<f64> {
    let tol = 1e-10 * scale.max(1.0);
    if value.im.abs() > tol {
        return Err(Error::ImaginaryResidue {
            residue: value.im.abs(),
            tol,
        });
    }
    Ok(value.re)
}

/// Spectral decomposition of an observable, with eigenvalues closer than
/// `degeneracy_tol` merged into a single eigenspace (single linkage on the
/// sorted spectrum; the merged eigenvalue is the cluster mean).
pub fn pvm_from_observable(a: &Observable, degeneracy_tol: f64) -> Result<Pvm> {
    let eig = a.matrix().hermitian_eigen();
    let n = a.dim();
    let mut projectors = Vec::new();
    let mut eigenvalues = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        let gap_break = i == n || eig.values[i] - eig.values[i - 1] > degeneracy_tol;
        if gap_break {
            let cluster = &eig.values[start..i];
            let mean = cluster.iter().sum::<f64>() / cluster.len() as f64;
            let mut proj = ComplexMatrix::zeros(n);
            for k in start..i {
                proj = proj.add(&eig.projector(k));
            }
            projectors.push(proj);
            eigenvalues.push(mean);
            start = i;
        }
    }
    Pvm::new(projectors, eigenvalues)
}

/// `n`-th moment `Tr(O^n rho)` of the outcome distribution of `O` in `rho`.
pub fn moment(o: &Observable, n: u32, rho: &DensityMatrix) -> Result<f64> {
    check_dims(o.dim(), rho.dim())?;
    let on = o.matrix().pow(n);
    let scale = on.max_norm() * rho.matrix().max_norm() * rho.dim() as f64;
    real_expectation(on.trace_product(rho.matrix()), scale)
}

/// Variance `Tr(O^2 rho) - Tr(O rho)^2`; tiny negative round-off is clamped.
pub fn variance(o: &Observable, rho: &DensityMatrix) -> Result<f64> {
    check_dims(o.dim(), rho.dim())?;
    let m1 = moment(o, 1, rho)?;
    let m2 = moment(o, 2, rho)?;
    let v = m2 - m1 * m1;
    let scale = o.matrix().max_norm();
    let tol = 1e-10 * (scale * scale).max(1.0);
    if v < -tol {
        return Err(Error::NumericalContract {
            what: "variance must be non-negative",
            defect: -v,
            tol,
        });
    }
    Ok(v.max(0.0))
}

/// Symmetrized covariance `<{A,B}/2> - <A><B>` in the state `rho`.
pub fn covariance(a: &Observable, b: &Observable, rho: &DensityMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    check_dims(a.dim(), rho.dim())?;
    let anti = a.matrix().anticommutator(b.matrix()).scale(0.5);
    let scale = a.matrix().max_norm() * b.matrix().max_norm() * rho.dim() as f64;
    let sym = real_expectation(anti.trace_product(rho.matrix()), scale)?;
    let ma = moment(a, 1, rho)?;
    let mb = moment(b, 1, rho)?;
    Ok(sym - ma * mb)
}

/// Both sides of the uncertainty relation for a pair of observables, with the
/// commutator and covariance lower bounds reported separately.
#[derive(Clone, Copy, Debug)]
pub struct RobertsonBound {
    /// `(Delta A)^2 (Delta B)^2` in the given state.
    pub product: f64,
    /// `|Tr(i[A,B] rho)|^2 / 4`.
    pub commutator_bound: f64,
    /// `Cov(A,B)^2`.
    pub covariance_bound: f64,
}

impl RobertsonBound {
    /// The stronger of the two lower bounds.
    pub fn rhs(&self) -> f64 {
        self.commutator_bound.max(self.covariance_bound)
    }

    /// `lhs - rhs`; non-negative up to round-off.
    pub fn margin(&self) -> f64 {
        self.product - self.rhs()
    }
}

/// Evaluates the uncertainty product and its two lower bounds in `rho`.
pub fn robertson_bound(
    a: &Observable,
    b: &Observable,
    rho: &DensityMatrix,
) -> Result<RobertsonBound> {
    check_dims(a.dim(), b.dim())?;
    check_dims(a.dim(), rho.dim())?;
    let product = variance(a, rho)? * variance(b, rho)?;
    let comm = a.matrix().commutator(b.matrix());
    // Tr([A,B] rho) is purely imaginary for hermitian inputs.
    let t = comm.trace_product(rho.matrix());
    let commutator_bound = 0.25 * t.norm_sqr();
    let covariance_bound = covariance(a, b, rho)?.powi(2);
    Ok(RobertsonBound {
        product,
        commutator_bound,
        covariance_bound,
    })
}
