//! Offline co-simulation of a BASIC-programmed SID chip feeding a virtual
//! modular synthesizer.
//!
//! [`basic`] runs programs one statement at a time on a simulated clock and
//! writes chip registers through a memory bus. [`sid`] turns those registers
//! into line-level audio. [`modular`] parses and evaluates patches that turn
//! that audio into control voltages. [`render`] interleaves all three and
//! writes WAV and CSV artifacts.

pub mod basic;
pub mod dsp;
pub mod modular;
pub mod reference;
pub mod render;
pub mod sid;

pub use basic::{parse_program, HaltReason, Program, RuntimeError};
pub use modular::{parse_patch, validate, Diagnostic, PatchEngine, PatchGraph};
pub use render::{cosimulate, run_job, RenderError, RenderJob, RenderReport, RenderSettings, Rendered};
pub use sid::{Sid, SidConfig, SidError};
