//! Exact and numeric analysis of the maximum queue length at a periodic
//! red/green traffic signal with Bernoulli arrivals.
//!
//! - [`walk`]: dynamic program for the joint law of queue length and running
//!   maximum, in exact rational or floating-point arithmetic.
//! - [`series`]: truncated power series for the one-step cycle.
//! - [`ell2`]: closed forms and a boundary-equation cascade for the two-step cycle.
//! - [`stationary`]: limiting queue-length law for `p < q`.
//! - [`asymptotics`]: limit constants of the scaled maximum at `p = 1/2`.
//! - [`montecarlo`]: reproducible path simulation.

pub mod asymptotics;
pub mod ell2;
pub mod linalg;
pub mod montecarlo;
pub mod params;
pub mod series;
pub mod stationary;
pub mod walk;

pub use num_rational::BigRational;
pub use params::{
    parse_probability, phase_of, validate_params, Mode, ParamError, Params, PhaseKind,
};
pub use walk::{joint_dist, max_dist, moment, s_marginal, DistVector, JointTable, Weight};
