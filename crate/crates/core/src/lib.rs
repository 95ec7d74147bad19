//! Numerical toolkit for a two-level detector coupled to a single bosonic
//! mode through a time-translated, exponentially chirped spin frequency.
//!
//! Units throughout: ħ = 1, angular frequencies in rad/s, times in seconds.

pub mod analytic;
pub mod error;
pub mod evolution;
pub mod hamiltonians;
pub mod noise;
pub mod oracle;
pub mod params;
pub mod quadrature;
pub mod quantum;
pub mod special;

pub use error::{Error, Result};
