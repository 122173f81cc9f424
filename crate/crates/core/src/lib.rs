//! Extreme Learning Machine pipeline for classifying network flows as benign
//! or attack traffic.
//!
//! Stages, in order: [`data_io`] reads labeled flow CSVs, [`preprocess`]
//! cleans, selects features by label correlation, splits and z-scores,
//! [`elm`] trains the classifier in closed form on top of [`numerics`],
//! [`model_select`] grid-searches hyperparameters by cross-validation and
//! [`metrics`] reports the results. [`pipeline`] wires the stages together.

pub mod data_io;
pub mod elm;
pub mod error;
pub mod metrics;
pub mod model_select;
pub mod numerics;
pub mod pipeline;
pub mod preprocess;
pub mod rng;

pub use error::{Error, ErrorKind, Result};
