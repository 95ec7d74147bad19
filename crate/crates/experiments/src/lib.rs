//! Configuration, parameter checks, sweeps and figure recipes on top of
//! `unruh-core`.

pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod simulate;
pub mod sweep;
pub mod validate;

pub use config::RunConfig;
pub use error::{LabError, LabResult};
