//! Transient and first-return analysis of stochastic fluid-fluid models.
//!
//! A fluid-fluid model is a continuous-time Markov chain on a finite set of
//! phases driving two fluid levels: `X`, reflected at zero, moving at rate
//! `c_i`, and `Y` moving at rate `r_i`. This crate computes
//!
//! * the joint law of `(X, phase)` at the moment the accumulated level
//!   `Ŷ = ∫|r|` reaches a threshold ([`transient`]),
//! * the joint law of `(X, phase)` when `Y` first returns to its starting
//!   level ([`first_return`]),
//! * Monte Carlo estimates of both ([`simulate`]).
//!
//! All matrices use natural phase order. Sign partitions are recorded in
//! [`PhasePartition`](model::PhasePartition).
//!
//! The crate is `no_std` and needs only `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod catalog;
pub mod error;
pub mod first_return;
pub mod matops;
pub mod model;
pub mod return_ops;
pub mod simulate;
pub mod transient;

pub use error::Error;
pub use matops::{Matrix, RowVector};
pub use model::{InitialDistribution, PhasePartition, SffmModel, TandemParams};

pub type Result<T> = core::result::Result<T, Error>;
