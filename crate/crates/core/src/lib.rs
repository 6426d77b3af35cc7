//! Core algorithms for gesture-driven drone light painting.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canvas;
pub mod command;
pub mod error;
pub mod field;
pub mod gesture;
pub mod metrics;
pub mod scenario;
pub mod sim;
pub mod trajectory;

pub use error::{Error, Result};
