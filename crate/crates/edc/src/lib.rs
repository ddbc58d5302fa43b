//! File formats, batch processing and the `edc` command line on top of
//! [`edc_core`].

pub mod audio;
pub mod batch;
pub mod cli;
mod error;
pub mod manifest;
pub mod meta;
pub mod plot;
pub mod tensor;

pub use edc_core;
pub use error::{Error, Result};
