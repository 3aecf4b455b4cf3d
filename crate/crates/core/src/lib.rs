//! Physics core of the superfluid helium gyrometer model.
//!
//! `no_std` with `alloc`. File formats, the command line and parallel
//! execution live in the `gyro` crate.
#![no_std]
// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod circuit;
pub mod dynamics;
pub mod error;
pub mod noise;
pub mod physconst;
pub mod relativity;
pub mod units;

pub use error::{Error, Result};
