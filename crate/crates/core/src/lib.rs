//! Core algorithms for adversarial perturbation paths.
//!
//! This crate is `no_std`-compatible (it only needs `alloc`); all IO, file
//! formats, and the command-line driver live in the companion `advpath-cli`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adam;
pub mod bezier;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod gradcheck;
pub mod ledger;
pub mod model;
pub mod pgd;
pub mod rng;
pub mod vector;

pub use error::CoreError;
pub use geometry::{Budget, Norm};
pub use vector::Vector;
