//! Leak localization for water distribution networks.
//!
//! The crate covers the full pipeline: a steady-state Hazen-Williams
//! hydraulic solver for scenario generation, graph-based interpolation of
//! hydraulic heads and pressure residuals (length-based and analytical
//! weights), sparse-coding dictionary learning for leak classification,
//! data-driven sensor placement, and an evaluation harness tying them
//! together.

pub mod error;
pub mod fixtures;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
