//! IO, configuration, experiment harness, and CLI plumbing on top of
//! `advpath-core`.

pub mod commands;
pub mod config;
pub mod harness;
pub mod io;
pub mod parallel;
pub mod reports;
pub mod selftest;
