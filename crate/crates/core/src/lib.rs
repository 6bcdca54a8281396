//! Curation and physics-constrained retargeting of human motion onto
//! humanoid robots.
//!
//! The pipeline runs in two stages. [`curation`] cleans source clips:
//! zero-phase smoothing, ground-plane voting, contact scoring and
//! threshold-based rejection of implausible clips. [`retarget`] then fits
//! robot joint trajectories to each clip by minimizing a fidelity objective
//! augmented with joint-limit, grounding and anti-skating penalties.
//! [`metrics`] scores the result.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive
// values; index loops mirror the difference stencils they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod curation;
pub mod diff;
mod error;
pub mod io;
pub mod kinematics;
pub mod metrics;
pub mod motion;
pub mod pipeline;
pub mod retarget;
pub mod robot;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use motion::{ContactSchedule, FootRegion, GroundPlane, RetargetedMotion, SourceMotion};
pub use robot::RobotModel;
