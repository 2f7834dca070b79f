//! Experiment driver for sparse Gauss-Hermite collocation.
//!
//! The library half of the `collocate` binary: configuration resolution,
//! reproducible Gaussian sampling, convergence experiments with Monte Carlo
//! error estimation, and CSV reporting. The binary adds argument parsing
//! and exit-code policy on top.

pub mod commands;
pub mod config;
pub mod experiment;
pub mod report;
pub mod sampling;
pub mod tables;
