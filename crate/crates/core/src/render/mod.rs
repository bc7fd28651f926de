//! Co-simulation of the interpreter, the chip and an optional patch, plus WAV and CSV output.
//!
//! The interpreter runs one statement at a time. After each statement the chip renders the
//! samples that fall inside the simulated time the statement took, so register writes land on
//! the sample grid with exact integer bookkeeping.

mod trace;
mod wav;

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::basic::{parse_program, C64Bus, HaltReason, ParseError, Program, RuntimeError, Vm, VmConfig};
use crate::modular::{
    parse_patch, validate, BlockOutput, Diagnostic, EngineError, PatchEngine, PatchError, PatchGraph,
};
use crate::sid::{Sid, SidConfig, SidError, PAL_CLOCK_HZ};

pub use trace::{encode_trace_csv, format_sig6, trace_csv_string, write_trace_csv};
pub use wav::{encode_wav, quantize, wav_bytes, write_wav, WAV_FULL_SCALE_VOLTS};

pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;
pub const MIN_SAMPLE_RATE: u32 = 8000;
/// Trace label used when no patch is given.
pub const SID_TRACE_LABEL: &str = "sid_audio";

/// Numeric settings of a render, independent of where inputs come from.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderSettings {
    pub duration_s: f64,
    pub sample_rate: u32,
    pub seed: u64,
    pub statement_cost_us: u64,
    pub clock_hz: f64,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            duration_s: 1.0,
            sample_rate: DEFAULT_SAMPLE_RATE,
            seed: 0,
            statement_cost_us: crate::basic::DEFAULT_STATEMENT_COST_US,
            clock_hz: PAL_CLOCK_HZ,
        }
    }
}

impl RenderSettings {
    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(RenderError::InvalidJob("duration must be positive".into()));
        }
        if self.sample_rate < MIN_SAMPLE_RATE {
            return Err(RenderError::InvalidJob(format!("sample rate must be at least {MIN_SAMPLE_RATE} Hz")));
        }
        if self.statement_cost_us < 1 {
            return Err(RenderError::InvalidJob("statement cost must be at least 1 us".into()));
        }
        if !(self.clock_hz.is_finite() && self.clock_hz > 0.0) {
            return Err(RenderError::InvalidJob("clock must be positive".into()));
        }
        Ok(())
    }

    /// `round(duration * sample_rate)`
    pub fn total_samples(&self) -> u64 {
        (self.duration_s * f64::from(self.sample_rate)).round() as u64
    }

    /// Index of the first sample at or after simulated time `t_us`.
    pub fn sample_at(&self, t_us: u64) -> u64 {
        let n = u128::from(t_us) * u128::from(self.sample_rate);
        n.div_ceil(1_000_000).min(u128::from(u64::MAX)) as u64
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("{0}")]
    InvalidJob(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    BasicParse(#[from] ParseError),
    #[error("{0}")]
    PatchParse(#[from] PatchError),
    #[error("{0}")]
    PatchInvalid(#[from] EngineError),
    #[error("{0}")]
    Runtime(#[from] RuntimeError),
    #[error("{0}")]
    Chip(#[from] SidError),
}

impl RenderError {
    /// Process exit status: 1 usage or I/O, 2 BASIC parse, 3 patch, 4 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            RenderError::InvalidJob(_) | RenderError::Io { .. } | RenderError::Chip(_) => 1,
            RenderError::BasicParse(_) => 2,
            RenderError::PatchParse(_) | RenderError::PatchInvalid(_) => 3,
            RenderError::Runtime(_) => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderReport {
    /// Why the interpreter stopped; `TimeLimit` when it was still running at the end.
    pub halt_reason: HaltReason,
    pub statements_executed: u64,
    pub sim_time_us: u64,
    pub samples: u64,
    pub channels: usize,
    /// Largest `|sample|` across output channels, before quantization.
    pub peak_volts: f64,
    /// Output samples beyond the WAV full scale.
    pub clipped_samples: u64,
    /// Text the program printed.
    pub print_output: String,
    /// Non-fatal patch diagnostics, such as unconnected inputs.
    pub warnings: Vec<Diagnostic>,
}

impl fmt::Display for RenderReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "halt_reason: {}", self.halt_reason)?;
        writeln!(f, "statements: {}", self.statements_executed)?;
        writeln!(f, "sim_time_us: {}", self.sim_time_us)?;
        writeln!(f, "samples: {}", self.samples)?;
        writeln!(f, "channels: {}", self.channels)?;
        writeln!(f, "peak_volts: {}", format_sig6(self.peak_volts))?;
        write!(f, "clipped_samples: {}", self.clipped_samples)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    /// One buffer per output channel (mono or stereo).
    pub channels: Vec<Vec<f64>>,
    pub traces: Vec<(String, Vec<f64>)>,
    pub report: RenderReport,
}

impl Rendered {
    pub fn wav_bytes(&self, sample_rate: u32) -> Vec<u8> {
        wav_bytes(&self.channels, sample_rate).0
    }

    pub fn trace(&self, label: &str) -> Option<&[f64]> {
        self.traces.iter().find(|(l, _)| l == label).map(|(_, t)| t.as_slice())
    }
}

/// Destination of chip samples: straight through, or through a patch.
enum Sink {
    Direct(BlockOutput),
    Patch(PatchEngine, BlockOutput),
}

impl Sink {
    fn push(&mut self, chunk: &[f64]) {
        match self {
            Sink::Direct(out) => {
                out.left.extend_from_slice(chunk);
                out.traces[0].1.extend_from_slice(chunk);
            }
            Sink::Patch(engine, out) => engine.process_into(chunk, out),
        }
    }

    fn finish(self) -> BlockOutput {
        match self {
            Sink::Direct(out) | Sink::Patch(_, out) => out,
        }
    }
}

/// Runs the program against the chip for `settings.duration_s` of audio.
///
/// A runtime error aborts the whole render.
pub fn cosimulate(
    program: &Program,
    patch: Option<&PatchGraph>,
    settings: &RenderSettings,
) -> Result<Rendered, RenderError> {
    settings.validate()?;
    let sr = f64::from(settings.sample_rate);
    let sid = Sid::new(SidConfig { clock_hz: settings.clock_hz, noise_seed: settings.seed, ..SidConfig::new(sr) })?;
    let mut bus = C64Bus::new(sid);
    let mut vm = Vm::new(
        program.clone(),
        VmConfig { statement_cost_us: settings.statement_cost_us, seed: settings.seed },
    );
    let mut sink = match patch {
        Some(g) => {
            let engine = PatchEngine::new(g, sr)?;
            let out = engine.empty_output();
            Sink::Patch(engine, out)
        }
        None => Sink::Direct(BlockOutput {
            traces: vec![(SID_TRACE_LABEL.to_string(), Vec::new())],
            ..Default::default()
        }),
    };

    let total = settings.total_samples();
    let mut chunk = Vec::new();
    let mut advance = |upto: u64, sid: &mut Sid, sink: &mut Sink| {
        while sid.samples_rendered() < upto {
            let n = (upto - sid.samples_rendered()).min(4096) as usize;
            chunk.clear();
            sid.render_into(n, &mut chunk);
            sink.push(&chunk);
        }
    };

    while bus.sid.samples_rendered() < total && !vm.is_halted() {
        vm.step(&mut bus)?;
        let upto = settings.sample_at(vm.state().sim_clock_us).min(total);
        advance(upto, &mut bus.sid, &mut sink);
    }
    // Registers stay frozen once the program has stopped.
    advance(total, &mut bus.sid, &mut sink);

    let out = sink.finish();
    let mut channels = vec![out.left];
    if let Some(right) = out.right {
        channels.push(right);
    }
    let peak_volts = channels.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let clipped_samples = channels.iter().flatten().filter(|&&v| quantize(v).1).count() as u64;
    let state = vm.state();
    Ok(Rendered {
        report: RenderReport {
            halt_reason: state.halted.unwrap_or(HaltReason::TimeLimit),
            statements_executed: state.statements_executed,
            sim_time_us: state.sim_clock_us,
            samples: total,
            channels: channels.len(),
            peak_volts,
            clipped_samples,
            print_output: state.output.clone(),
            warnings: patch.map(validate).unwrap_or_default(),
        },
        channels,
        traces: out.traces,
    })
}

/// Everything one file-based render needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderJob {
    pub program_path: PathBuf,
    pub patch_path: Option<PathBuf>,
    pub settings: RenderSettings,
    pub out_wav_path: PathBuf,
    pub trace_csv_path: Option<PathBuf>,
    pub trace_decimate: usize,
}

fn read(path: &Path) -> Result<String, RenderError> {
    fs::read_to_string(path).map_err(|source| RenderError::Io { path: path.to_path_buf(), source })
}

/// Loads the job's inputs, renders, and writes the WAV (and CSV if requested).
///
/// Nothing is left on disk when any step fails.
pub fn run_job(job: &RenderJob) -> Result<RenderReport, RenderError> {
    if job.trace_decimate == 0 {
        return Err(RenderError::InvalidJob("trace decimation must be positive".into()));
    }
    job.settings.validate()?;
    let program = parse_program(&read(&job.program_path)?)?;
    let patch = match &job.patch_path {
        Some(p) => Some(parse_patch(&read(p)?)?),
        None => None,
    };
    let rendered = cosimulate(&program, patch.as_ref(), &job.settings)?;

    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RenderError::Io { path, source }
    };
    let result = write_wav(&rendered.channels, job.settings.sample_rate, &job.out_wav_path)
        .map_err(io_err(&job.out_wav_path))
        .and_then(|_| match &job.trace_csv_path {
            Some(csv) => write_trace_csv(&rendered.traces, job.settings.sample_rate, job.trace_decimate, csv)
                .map_err(io_err(csv)),
            None => Ok(()),
        });
    if let Err(e) = result {
        let _ = fs::remove_file(&job.out_wav_path);
        if let Some(csv) = &job.trace_csv_path {
            let _ = fs::remove_file(csv);
        }
        return Err(e);
    }
    Ok(rendered.report)
}
