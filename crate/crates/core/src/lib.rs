//! Exact simulation of max-infinitely-divisible processes, random vectors
//! and exchangeable Marshall–Olkin sequences from their exponent measures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod exchangeable_mo;
pub mod exponent_measure;
pub mod process_sim;
pub mod quadrature;
pub mod samplers;
pub mod validation;
pub mod vector_sim;

pub use error::{Error, Result};
