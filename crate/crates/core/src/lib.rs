//! Inferential network analysis toolkit.
//!
//! Builds yearly country-level collaboration networks from publication
//! records, computes whole-network descriptives, extracts disparity-filter
//! backbones, and estimates binary, temporal, and valued exponential-family
//! network models with goodness-of-fit and multicollinearity diagnostics.

#![forbid(unsafe_code)]

pub mod backbone;
pub mod descriptives;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod graph;
pub mod io;
pub mod pipeline;
pub mod sampler;
pub mod terms;

pub use error::{Error, Result};
