//! The book chapters under `book/src`, mounted as documentation so every
//! code block in the guide runs under `cargo test --doc -p qmeas-guide`.
//! mdBook renders the same files; this crate keeps them honest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/states-and-observables.md")]
pub mod states_and_observables {}

#[doc = include_str!("../../../book/src/projective-measurement.md")]
pub mod projective_measurement {}

#[doc = include_str!("../../../book/src/two-state.md")]
pub mod two_state {}

#[doc = include_str!("../../../book/src/weak-measurements.md")]
pub mod weak_measurements {}

#[doc = include_str!("../../../book/src/detectors.md")]
pub mod detectors {}

#[doc = include_str!("../../../book/src/successive-and-joint.md")]
pub mod successive_and_joint {}

#[doc = include_str!("../../../book/src/relation-gap.md")]
pub mod relation_gap {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
