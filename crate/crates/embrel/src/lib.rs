//! File formats, parallel evaluation and the `embrel` command-line tool.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod report;

pub use error::{Error, Result};
