//! Two-qubit steering toolkit: states, measurements, steering criteria and
//! their closed-form measures, hidden-state feasibility and steering
//! robustness, and Monte Carlo volumes of violation.

pub mod criteria;
pub mod error;
pub mod linalg;
pub mod measurements;
pub mod measures;
pub mod qstate;
pub mod robustness;
pub mod sdp;
pub mod volume;

pub use error::{Error, Result};
