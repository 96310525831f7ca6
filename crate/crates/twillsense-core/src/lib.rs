//! Core library for modeling and characterizing weft-knitted resistive
//! force sensors.
//!
//! The crate covers the full path from stitch program to metric table:
//!
//! * [`knit`] — stitch programs for Twill-based sensor patches and the
//!   catalog of manufactured variants,
//! * [`network`] — compilation of a stitch program into a resistor graph
//!   (contact resistance at loop intermeshing points) and its effective
//!   resistance,
//! * [`series`] — tensile-test timelines, cycle segmentation and series
//!   utilities,
//! * [`fit`] — bounded nonlinear least-squares fitting of the
//!   exponential-plus-linear response model,
//! * [`catalog`] — bundled response-curve parameters for the sensor
//!   variants,
//! * [`metrics`] — hysteresis, dynamic range, offset/relaxation/drift,
//!   settling times and the other characterization metrics,
//! * [`synth`] — synthetic test-run generation for pipeline verification.
//!
//! The crate is `no_std`-compatible (requires `alloc`). Enable the `libm`
//! feature instead of `std` for freestanding builds.
//!
//! ```
//! use twillsense_core::knit::VariantName;
//! use twillsense_core::metrics::{analyze_timeline, AnalysisConfig};
//! use twillsense_core::series::Direction;
//! use twillsense_core::synth::{generate, Protocol, ResponseModel};
//!
//! // five noiseless equal-force cycles of the high-tension tubular variant
//! let model = ResponseModel::from_variant(VariantName::PTh, Direction::Wale).unwrap();
//! let run = generate(&Protocol::equal_force(), &model, 42).unwrap();
//!
//! let analysis = analyze_timeline(&run, &AnalysisConfig::default()).unwrap();
//! let h = analysis.report.hysteresis.unwrap();
//! assert!((h.h_pct - 10.7).abs() < 0.5);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
// negated float comparisons like `!(x > 0.0)` are deliberate: they reject
// NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("twillsense-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod catalog;
pub mod fit;
pub mod knit;
mod linalg;
mod math;
pub mod metrics;
pub mod network;
pub mod series;
pub mod synth;
