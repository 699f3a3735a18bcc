//! Bounds on linear correlation functionals in prepare-and-measure scenarios
//! where each prepared state is only trusted up to a fidelity floor
//! `<psi_x|rho_x|psi_x> >= 1 - eps_x` against a known target state.
//!
//! The crate is `no_std` (with `alloc`). It provides:
//!
//! - [`quantum`] and [`scenario`]: pure states, measurements, Born-rule tables,
//!   scenarios and witnesses;
//! - [`sdp`]: a dense primal-dual interior-point SDP solver;
//! - [`seesaw`]: alternating state/measurement optimisation (lower bounds);
//! - [`hierarchy`]: sampled moment-matrix relaxations (upper bounds);
//! - [`classical`]: bounds for models whose measurements are a single basis
//!   measurement followed by classical post-processing;
//! - [`analytic`]: closed forms for two-state discrimination, detection
//!   efficiency certification and the named scenario presets;
//! - [`randomness`]: guessing-probability relaxations and min-entropy.
//!
//! Enable the `parallel` feature to fan restarts, rank profiles and
//! strategies out over a rayon pool.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod analytic;
pub mod classical;
pub mod error;
pub mod hierarchy;
pub mod linalg;
pub mod quantum;
pub mod randomness;
pub mod scenario;
pub mod sdp;
pub mod seesaw;

mod par;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, C64};
pub use quantum::{Measurement, MeasurementKind, PureState};
pub use scenario::{CorrelationTable, Functional, Realization, Scenario};
