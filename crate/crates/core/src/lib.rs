#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annulus;
pub mod battery;
pub mod config;
pub mod corpus;
pub mod error;
pub mod numeric;
pub mod pipeline;
pub mod flow;
pub mod genfun;
pub mod measure;
pub mod profile;
pub mod systole;
pub mod topology;

pub use error::{Error, Result};
