//! Closed-form two-state (Bloch-ball) formulas.
//!
//! A two-level density matrix is `rho = (1 + a.sigma)/2` with `a` in the unit
//! ball, and spin observables are `B = b.J` with `J = sigma/2`. Everything a
//! projective `J_x` measurement does to such a state has a short closed form;
//! this module evaluates those forms so the matrix engine can be checked
//! against them (and vice versa).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::state::{DensityMatrix, Observable};

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(
        2,
        &[
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
    .expect("static 2x2")
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(
        2,
        &[
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
        ],
    )
    .expect("static 2x2")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(
        2,
        &[
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
        ],
    )
    .expect("static 2x2")
}

/// Spin-1/2 component `J_x = sigma_x / 2`.
pub fn jx() -> ComplexMatrix {
    pauli_x().scale(0.5)
}

/// Spin-1/2 component `J_y = sigma_y / 2`.
pub fn jy() -> ComplexMatrix {
    pauli_y().scale(0.5)
}

/// Spin-1/2 component `J_z = sigma_z / 2`.
pub fn jz() -> ComplexMatrix {
    pauli_z().scale(0.5)
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Two-level state parametrized by its Bloch vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    a: [f64; 3],
}

impl BlochState {
    /// Requires `|a| <= 1` (up to round-off); the boundary is the pure states.
    pub fn new(a: [f64; 3]) -> Result<Self> {
        let norm_sq = dot(&a, &a);
        if norm_sq > 1.0 + 1e-10 {
            return Err(Error::OutOfRange {
                name: "bloch vector norm",
                value: norm_sq.sqrt(),
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(Self { a })
    }

    pub fn vector(&self) -> [f64; 3] {
        self.a
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (dot(&self.a, &self.a) - 1.0).abs() <= tol
    }

    /// The 2x2 density matrix `(1 + a.sigma)/2`.
    pub fn to_density(&self) -> DensityMatrix {
        let [ax, ay, az] = self.a;
        let mat = ComplexMatrix::from_row_slice(
            2,
            &[
                C64::new(0.5 * (1.0 + az), 0.0),
                C64::new(0.5 * ax, -0.5 * ay),
                C64::new(0.5 * ax, 0.5 * ay),
                C64::new(0.5 * (1.0 - az), 0.0),
            ],
        )
        .expect("static 2x2");
        // The ball constraint guarantees the invariants; validate anyway with a
        // PSD allowance for boundary states that sit at |a| = 1 + round-off.
        DensityMatrix::new(mat).expect("bloch ball maps into valid states")
    }
}

/// Spin observable `b.J`; the length of `b` is not constrained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinObservable {
    b: [f64; 3],
}

impl SpinObservable {
    pub fn new(b: [f64; 3]) -> Self {
        Self { b }
    }

    pub fn vector(&self) -> [f64; 3] {
        self.b
    }

    /// The 2x2 matrix `b_x J_x + b_y J_y + b_z J_z`.
    pub fn observable(&self) -> Observable {
        let [bx, by, bz] = self.b;
        let mat = jx()
            .scale(bx)
            .add(&jy().scale(by))
            .add(&jz().scale(bz));
        Observable::new(mat).expect("b.J is hermitian")
    }
}

/// Closed-form statistics of measuring `J_x` projectively on a Bloch state and
/// then looking at `B = b.J`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TwoStateAnalysis {
    /// `(Delta B)^2` in the initial state: `[b^2 - (a.b)^2]/4`.
    pub var_b_initial: f64,
    /// `(Delta B)^2` after the `J_x` collapse: `[b^2 - a_x^2 b_x^2]/4`.
    pub var_b_post: f64,
    /// Signed change of the variance; can be negative.
    pub delta_var: f64,
    /// Squared disturbance `(b_y^2 + b_z^2)/2`; independent of the state.
    pub eta_sq: f64,
    /// `Cov(J_x, B)` in the initial state: `(b_x - a_x a.b)/4`.
    pub cov_initial: f64,
    /// `Cov(J_x, B)` in the collapsed state: `(1 - a_x^2) b_x / 4`.
    pub cov_post: f64,
    /// Commutator lower bound `|b_y a_z - b_z a_y|/4`.
    pub commutator_rhs: f64,
}

/// Evaluates every closed form for the pair `(state, b.J)`.
pub fn analytic_suite(state: &BlochState, obs: &SpinObservable) -> TwoStateAnalysis {
    let a = state.a;
    let b = obs.b;
    let b_sq = dot(&b, &b);
    let adotb = dot(&a, &b);
    let ax = a[0];
    let bx = b[0];
    TwoStateAnalysis {
        var_b_initial: 0.25 * (b_sq - adotb * adotb),
        var_b_post: 0.25 * (b_sq - ax * ax * bx * bx),
        delta_var: 0.25 * (adotb * adotb - ax * ax * bx * bx),
        eta_sq: 0.5 * (b[1] * b[1] + b[2] * b[2]),
        cov_initial: 0.25 * (bx - ax * adotb),
        cov_post: 0.25 * (1.0 - ax * ax) * bx,
        commutator_rhs: 0.25 * (b[1] * a[2] - b[2] * a[1]).abs(),
    }
}

/// The two-state disturbance bound in its weakened and sharp forms.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TwoStateBound {
    /// `sqrt(1 - a_x^2) sqrt(b_y^2 + b_z^2)`.
    pub lhs: f64,
    /// `|b_y a_z - b_z a_y| / sqrt(2)`, the weakened form.
    pub ozawa_rhs: f64,
    /// `|b_y a_z - b_z a_y|`, the sharp form.
    pub sharp_rhs: f64,
}

/// Evaluates both lower bounds; the sharp one always dominates, and the left
/// side always dominates the sharp one on the Bloch ball.
pub fn sharp_two_state_bound(state: &BlochState, obs: &SpinObservable) -> Result<TwoStateBound> {
    let a = state.a;
    let b = obs.b;
    let lhs = (1.0 - a[0] * a[0]).max(0.0).sqrt() * (b[1] * b[1] + b[2] * b[2]).sqrt();
    let cross = (b[1] * a[2] - b[2] * a[1]).abs();
    let bound = TwoStateBound {
        lhs,
        ozawa_rhs: cross / std::f64::consts::SQRT_2,
        sharp_rhs: cross,
    };
    let tol = 1e-12 * (1.0 + cross);
    if bound.lhs < bound.sharp_rhs - tol || bound.sharp_rhs < bound.ozawa_rhs - tol {
        return Err(Error::NumericalContract {
            what: "two-state bound chain lhs >= sharp >= weakened",
            defect: (bound.sharp_rhs - bound.lhs).max(bound.ozawa_rhs - bound.sharp_rhs),
            tol,
        });
    }
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_bloch, random_unit_direction, seeded_rng};
    use approx::assert_abs_diff_eq;

    const INV_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn to_density_examples() {
        // Maximally mixed.
        let mixed = BlochState::new([0.0, 0.0, 0.0]).unwrap().to_density();
        assert!(mixed
            .matrix()
            .sub(&ComplexMatrix::identity(2).scale(0.5))
            .max_norm()
            .abs()
            < 1e-15);

        // a = (1,1,0)/sqrt(2): off-diagonal phase exp(-i pi/4).
        let s = BlochState::new([INV_SQRT_2, INV_SQRT_2, 0.0]).unwrap();
        let rho = s.to_density();
        let phase = C64::new(0.0, -std::f64::consts::FRAC_PI_4).exp() * 0.5;
        assert!((rho.matrix().get(0, 1) - phase).norm() < 1e-15);
        assert!(s.is_pure(1e-12));
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-14);

        // Jz-up pole.
        let up = BlochState::new([0.0, 0.0, 1.0]).unwrap().to_density();
        assert!((up.matrix().get(0, 0) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(up.matrix().get(1, 1).norm() < 1e-15);
    }

    #[test]
    fn bloch_vector_outside_ball_is_rejected() {
        assert!(BlochState::new([1.0, 0.5, 0.0]).is_err());
    }

    #[test]
    fn coffin_instance_minimizes_the_variance_change() {
        let s = BlochState::new([INV_SQRT_2, INV_SQRT_2, 0.0]).unwrap();
        let b = SpinObservable::new([INV_SQRT_2, -INV_SQRT_2, 0.0]);
        let suite = analytic_suite(&s, &b);
        assert_abs_diff_eq!(suite.delta_var, -1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(suite.eta_sq, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn disturbance_vanishes_when_b_is_along_x() {
        let mut rng = seeded_rng(9);
        let s = random_bloch(&mut rng);
        let b = SpinObservable::new([1.0, 0.0, 0.0]);
        let suite = analytic_suite(&s, &b);
        assert_abs_diff_eq!(suite.eta_sq, 0.0, epsilon = 1e-15);
        let a = s.vector();
        assert_abs_diff_eq!(
            suite.delta_var,
            0.25 * ((a[0] * 1.0) * (a[0] * 1.0) - a[0] * a[0]),
            epsilon = 1e-15
        );
    }

    #[test]
    fn eta_sq_has_zero_spread_across_states() {
        let mut rng = seeded_rng(21);
        let b = SpinObservable::new(random_unit_direction(&mut rng));
        let reference = analytic_suite(&random_bloch(&mut rng), &b).eta_sq;
        for _ in 0..100 {
            let s = random_bloch(&mut rng);
            assert_eq!(analytic_suite(&s, &b).eta_sq, reference);
        }
    }

    #[test]
    fn sharp_bound_saturates_at_equator_pair() {
        let s = BlochState::new([0.0, 0.0, 1.0]).unwrap();
        let b = SpinObservable::new([0.0, 1.0, 0.0]);
        let bound = sharp_two_state_bound(&s, &b).unwrap();
        assert_abs_diff_eq!(bound.lhs, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bound.sharp_rhs, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn pure_jx_eigenstate_forces_both_sides_to_zero() {
        let s = BlochState::new([1.0, 0.0, 0.0]).unwrap();
        let b = SpinObservable::new([0.2, 0.5, -0.7]);
        let bound = sharp_two_state_bound(&s, &b).unwrap();
        assert_abs_diff_eq!(bound.lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bound.sharp_rhs, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sharp_bound_dominates_on_random_draws() {
        let mut rng = seeded_rng(77);
        for _ in 0..2000 {
            let s = random_bloch(&mut rng);
            let b = SpinObservable::new(random_unit_direction(&mut rng));
            let bound = sharp_two_state_bound(&s, &b).unwrap();
            assert!(bound.lhs - bound.sharp_rhs >= -1e-12);
            assert_abs_diff_eq!(
                bound.sharp_rhs,
                std::f64::consts::SQRT_2 * bound.ozawa_rhs,
                epsilon = 1e-15
            );
        }
    }
}
