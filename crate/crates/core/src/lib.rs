//! Hub network design under inter-hub link failures.
//!
//! The crate builds mixed-binary models for three design variants (no
//! protection, one reserved backup arc per commodity, λ-connected backbone),
//! solves them with an embedded branch-and-cut solver, and evaluates designs
//! by Monte-Carlo failure simulation. Small instances can be checked against
//! brute-force oracles.

pub mod analysis;
pub mod error;
pub mod failure_sim;
pub mod formulations;
pub mod instance;
pub mod milp;
pub mod network;
pub mod oracle;
pub mod separation;

pub use error::{HubError, Result};
