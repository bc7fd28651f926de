//! Virtual modular synthesizer: patch language, graph checks and sample-rate DSP.
//!
//! Audio and CV share a single sample rate. Conventions are ±5 V for audio and 0..5 V for
//! unipolar CV; every module output is clamped to ±20 V.

mod engine;
pub mod modules;
mod patch;
mod schedule;
mod validate;

pub use engine::{BlockOutput, EngineError, PatchEngine};
pub use patch::{
    format_patch, parse_patch, Edge, ModuleKind, ModuleParams, OutputBindings, PatchError,
    PatchErrorKind, PatchGraph, PortRef, Probe, SID_NODE, SID_PORT,
};
pub use schedule::{schedule, ScheduleError};
pub use validate::{has_errors, validate, Diagnostic, Severity};
