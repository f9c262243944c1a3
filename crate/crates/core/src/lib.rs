//! Term-structure analytics for long-dated discounting.
//!
//! The crate covers four quotation systems for discount factors (exponential,
//! Libor, tail-Pareto and zero-coupon), discount functions obtained by
//! aggregating exponential discounters, rational pricing-kernel models and
//! their long rates, seeded Monte Carlo of the kernels, and numerical audits of
//! how long rates behave as maturity grows.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod asymptotics;
pub mod error;
pub mod greenbook;
pub mod kernel_models;
pub mod montecarlo;
pub mod numeric;
pub mod report;
pub mod termstructure;
pub mod zoo;

pub use error::{Error, Result};
