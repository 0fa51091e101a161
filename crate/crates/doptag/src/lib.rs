//! Std companion to `doptag-core`: scene files, WAV IO, session running,
//! metrics, table reproduction, and experiment sweeps.

pub mod experiment;
pub mod metrics;
pub mod scene_file;
pub mod session;
pub mod tables;
pub mod wav;

pub use doptag_core as core;
