//! IO, file formats, plotting and command-line front end for the knitted
//! force-sensor toolkit. The numerics live in `twillsense-core`.

// negated float comparisons like `!(x > 0.0)` are deliberate NaN guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod svg;

pub use twillsense_core as core;
