//! Deterministic testbed for an adaptive cruise control loop under covert
//! attacks, with neural-identifier intrusion detection and a fallback
//! compensator.
//!
//! Module map:
//! - [`dynamics`]: vehicle plant (exact ZOH) and car-following driver models
//! - [`controller`]: safe distance, mode rule, MPC core, compensator
//! - [`qp`]: box-constrained QP solver behind the MPC
//! - [`attack`]: actuation spike and reference-bias attacks
//! - [`ids`]: identifier, thresholds, alarm latch
//! - [`sim`]: closed-loop harness, traces and metrics
//! - [`scenario`]: scenario files and presets

pub mod attack;
pub mod controller;
pub mod dynamics;
pub mod error;
pub mod ids;
pub mod qp;
pub mod scenario;
pub mod sim;

pub use error::{AccError, AccResult};
