//! Numerical toolkit for quantum measurement statistics.
//!
//! The crate covers the full path from "prepare a state" to "what did the
//! detector record, and what state is left over" for several measurement
//! models:
//!
//! - projective measurement of observables with a finite spectrum, the
//!   pinching map it induces, and the disturbance it causes in other
//!   observables ([`measure`]);
//! - generalized (POVM) measurements with explicit Kraus collapse, including
//!   a one-parameter weak-measurement family, its intrinsic noise, and an
//!   auxiliary-system dilation cross-check ([`povm`]);
//! - finite-resolution position and momentum detectors acting on states
//!   represented by grid-sampled integral kernels, successive and joint
//!   measurement protocols, and their lower bounds ([`cv`]);
//! - closed-form two-state (Bloch-ball) results used as an independent oracle
//!   for the matrix engine ([`spin`]).
//!
//! All values are immutable after construction and all operations are pure
//! functions, so everything can be shared freely across threads.
//!
//! ```
//! use qmeas::spin::{BlochState, SpinObservable, analytic_suite};
//!
//! let s = BlochState::new([0.6, 0.0, 0.8]).unwrap();
//! let b = SpinObservable::new([0.0, 1.0, 0.0]);
//! // Measuring J_x on this state disturbs b.J by a state-independent amount.
//! assert_eq!(analytic_suite(&s, &b).eta_sq, 0.5);
//! ```

pub mod cv;
pub mod error;
pub mod matrix;
pub mod measure;
pub mod povm;
pub mod sample;
pub mod spin;
pub mod state;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use state::{DensityMatrix, Observable, Pvm, Tolerances};
