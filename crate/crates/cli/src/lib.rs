//! Library side of the `ratchet` binary: configuration layers, CSV runs and
//! the verification report.

pub mod commands;
pub mod config;
pub mod verify;
