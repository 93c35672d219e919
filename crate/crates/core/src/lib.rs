#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod linalg;
pub mod optimizers;
pub mod params;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use error::{CknError, Result};
