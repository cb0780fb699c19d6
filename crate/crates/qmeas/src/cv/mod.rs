//! Continuous-variable engine: states on the line as grid-sampled integral
//! kernels, finite-resolution position/momentum detectors, and the
//! successive/joint measurement protocols with their uncertainty bounds.
//!
//! Conventions: `hbar = 1`, Fourier kernel `exp(ik(x - y))` with momentum
//! measure `dk/2pi`. Integrals are trapezoid sums on a uniform grid, which is
//! spectrally accurate for the smooth, rapidly decaying kernels these
//! operations produce; momentum moments come from 8th-order stencils on the
//! translation autocorrelation.

mod grid;
mod kernel;
mod ops;
mod profile;
mod protocols;

pub use grid::{Grid, GridSpec};
pub use kernel::{KernelState, TOL_GRID};
pub use ops::{
    epsilon_x_squared, gaussian_state, measure_p, measure_x, pvm_probability_x, PMeasurement,
    XMeasurement,
};
pub use profile::{AcceptanceProfile, TabulatedProfile};
pub use protocols::{
    joint_ak, joint_vs_successive, matched_pointer_widths, saturating_var_x,
    saturating_width_search, successive_xp, JointAk, JointVsSuccessive, SuccessiveXp,
};
