#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dist;
mod error;
pub mod null;
pub mod optimize;
pub mod procedures;
pub mod pvalue;
mod sample;
pub mod sim;

pub use error::{Error, Result};
pub use sample::StatSample;
