//! Executable constructions for p-local compact groups at desk scale.

pub mod adams;
pub mod catalog;
pub mod cli;
pub mod cohomology;
pub mod compact;
pub mod error;
pub mod finfusion;
pub mod group;
pub mod linalg;
pub mod localops;
pub mod ptoral;
pub mod spec;
pub mod transporter;

pub use error::{Error, Result};
