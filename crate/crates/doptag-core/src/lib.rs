//! Doppler-effect acoustic photo tagging.
//!
//! A sender phone sweeps its speaker while emitting a 20 kHz tone; stationary
//! receiver phones measure the Doppler shift and report back. From the shifts
//! the sender decides who is inside the camera's field of view and in which
//! order (and row) each person appears.
//!
//! This crate is `no_std` (alloc required) and holds everything that does not
//! touch files or sockets: closed-form geometry, the synthetic acoustic
//! channel, the receiver DSP pipeline, depth clustering, and the tag engine.

#![no_std]

extern crate alloc;

pub mod cluster;
pub mod dsp;
pub mod fft;
pub mod geometry;
pub mod scene;
pub mod tag;

mod math;
