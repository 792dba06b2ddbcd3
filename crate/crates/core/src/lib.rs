//! Closed-loop simulation of price-responsive households on a micro-grid,
//! with load and price attack injection and the detectors used to find them.
//!
//! The pipeline runs: template ingest ([`ingest`]) and day-block bootstrap
//! ([`loadgen`]), the pricing feedback loop ([`feedback`]), seasonal
//! forecasting ([`forecast`]), attack waveforms ([`attack`]), sequential and
//! supervised detectors ([`detect`]) and scoring ([`eval`]). [`experiment`]
//! wires them into the full scenario grid.

pub mod attack;
pub mod detect;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod feedback;
pub mod forecast;
pub mod ingest;
pub mod loadgen;
pub mod stats;

pub use error::{Error, Result};
