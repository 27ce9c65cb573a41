//! Scenario reduction for distributionally robust optimization (DRO).
//!
//! A DRO problem minimizes the worst-case expected objective over an
//! ambiguity set of probability distributions supported on finitely many
//! scenarios. This crate reduces the scenario set to `K` representatives
//! while certifying a multiplicative approximation guarantee: clustering a
//! scenario set so that every scenario `s` in cluster `j` satisfies
//! `s <= alpha * rep_j` and `rep_j <= beta * s` componentwise makes the
//! reduced problem's optimizer an `alpha * beta`-approximation of the
//! original problem.
//!
//! Module map:
//!
//! * [`linalg`] — dense matrices, symmetric eigendecomposition, Cholesky.
//! * [`stats`] — error function and standard normal quantile.
//! * [`lp`] — bounded-variable simplex and a small binary branch-and-bound.
//! * [`scenarios`] — vector/matrix scenario sets, generation, file I/O.
//! * [`clustering`] — vector clustering with certified guarantees.
//! * [`matrix_clustering`] — PSD matrix clustering via eigenvalue bounds.
//! * [`ambiguity`] — ambiguity sets, projection, worst-case oracles.
//! * [`dro`] — DRO solvers, solution evaluation, reduction metrics.
//! * [`cli`] — command-line front end.

pub mod ambiguity;
pub mod cli;
pub mod clustering;
pub mod dro;
pub mod linalg;
pub mod lp;
pub mod matrix_clustering;
pub mod scenarios;
pub mod stats;
