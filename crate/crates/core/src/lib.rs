// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bezier;
pub mod dataset;
pub mod ergodic;
pub mod error;
pub mod fourier;
pub mod gaussians;
pub mod gmr;
pub mod io;
pub mod linalg;
pub mod lwr;
pub mod plot;
pub mod promp;
pub mod trajectory;

pub use error::{Error, Result};
