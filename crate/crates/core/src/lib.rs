//! Safety-aware scheduling of multi-UAV aerial 3D-printing missions.
//!
//! A mission is a set of printing tasks (one per chunk of the structure), a
//! dependency graph between them, and a fleet of UAVs with material and
//! battery budgets. The crate builds the mixed-integer formulation of the
//! scheduling problem, solves it exactly with a specialized branch-and-bound,
//! and re-validates every schedule arithmetically and by simulation.

pub mod error;
pub mod geometry;
pub mod instance;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod validate;

pub use error::{Error, Result};
