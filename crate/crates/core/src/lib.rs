//! Numerical certification that causally hidden metric perturbations are
//! invisible to boundary wave data.
//!
//! The crate builds explicit spacetime cylinders with timelike boundary,
//! certifies by geodesic shooting that distinguished interior regions cannot
//! signal the boundary, blends in a local constant-curvature patch through a
//! smooth cutoff, and demonstrates by finite-difference wave simulation that
//! boundary measurements (Dirichlet-to-Neumann traces, exterior
//! source-to-solution samples) cannot tell the blended metric from the
//! original while scalar curvature can.

pub mod causality;
pub mod error;
pub mod geometry;
pub mod report;
pub mod scenario;
pub mod spacetimes;
pub mod waves;
pub mod witness;

pub use error::{Error, Result};
