//! Numerical toolkit for self-testing of nonlocal-game strategies: strategies and games,
//! Schmidt restriction, approximate-projectivity metrics, Naimark dilations, local dilation
//! residuals and a reproduction lab.

pub mod cli;
pub mod dilation;
pub mod error;
pub mod io;
pub mod lab;
pub mod metrics;
pub mod naimark;
pub mod random;
pub mod schmidt;
pub mod strategy;
pub mod tensor;

pub use error::{Error, Result};
