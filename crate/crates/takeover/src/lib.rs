//! File formats and the command-line front end for `takeover-core`: CSV
//! tables, model JSON, plot-data writers and run manifests.

pub mod cli;
mod error;
pub mod manifest;
pub mod model;
pub mod report;
pub mod seeds;
pub mod table;

pub use error::FormatError;
