//! Classical-shadow protocols built from group representations.

pub mod bases;
pub mod channel;
pub mod cli;
pub mod ensembles;
pub mod error;
pub mod io;
pub mod linalg;
pub mod protocol;
pub mod rep;
pub mod shadows;
pub mod stats;
pub mod suites;
pub mod sweep;
pub mod variance;

pub use error::{Error, Result};
