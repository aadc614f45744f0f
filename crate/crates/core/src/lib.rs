//! Benchmarking toolkit for grant-funded publication portfolios.
//!
//! The pipeline runs in four stages:
//!
//! * [`corpus`] parses exported publication records, normalizes award codes,
//!   applies the eligibility rules and aggregates per-award summaries.
//! * [`histogram`] bins FWCI values (and their logarithms) into fixed-width
//!   half-open histograms.
//! * [`lognormal`] evaluates the lognormal model, fits the scaled model to
//!   histograms by damped least squares and summarizes a random-bin ensemble
//!   of fits with percentile confidence intervals.
//! * [`simulate`] computes the Monte Carlo median of award-level mean FWCI
//!   under a unit-mean lognormal baseline and benchmarks awards against it.
//!
//! [`commands`] wires the stages into reproducible runs that write
//! line-oriented reports and plot-ready series.

pub mod commands;
pub mod corpus;
mod error;
pub mod histogram;
mod lm;
pub mod lognormal;
pub mod simulate;
pub mod stats;
mod streams;

pub use error::{Error, Result};
