use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sidmod_core::basic::parse_program;
use sidmod_core::modular::{has_errors, parse_patch, validate, ModuleKind, ModuleParams};
use sidmod_core::render::{run_job, RenderJob, RenderSettings, DEFAULT_SAMPLE_RATE, MIN_SAMPLE_RATE};
use sidmod_core::sid::PAL_CLOCK_HZ;

const EXIT_USAGE: u8 = 1;
const EXIT_BASIC: u8 = 2;
const EXIT_PATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "sidmod", version, about = "Render BASIC-driven SID audio through a virtual modular patch")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program against the chip and write a WAV (and optional CSV trace).
    Render(RenderArgs),
    /// Parse and validate without rendering.
    Check(CheckArgs),
    /// List patch module kinds, ports and parameters.
    Modules,
}

#[derive(Args)]
struct RenderArgs {
    /// BASIC source file.
    #[arg(long)]
    program: PathBuf,
    /// Patch file; without one the chip output goes straight to the left channel.
    #[arg(long)]
    patch: Option<PathBuf>,
    /// Length of the render, e.g. `2s`, `500ms` or `1.5`.
    #[arg(long, value_parser = parse_duration)]
    duration: f64,
    /// 16-bit WAV to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE, value_parser = clap::value_parser!(u32).range(i64::from(MIN_SAMPLE_RATE)..))]
    sample_rate: u32,
    /// Seeds RND and the noise generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulated microseconds per BASIC statement.
    #[arg(long, default_value_t = sidmod_core::basic::DEFAULT_STATEMENT_COST_US, value_parser = clap::value_parser!(u64).range(1..))]
    statement_cost: u64,
    /// Chip clock in Hz.
    #[arg(long, default_value_t = PAL_CLOCK_HZ, value_parser = parse_positive)]
    clock: f64,
    /// CSV file for probe traces.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Keep every Nth sample in the trace.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    trace_decimate: u64,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("inputs").required(true).multiple(true))]
struct CheckArgs {
    #[arg(long, group = "inputs")]
    program: Option<PathBuf>,
    #[arg(long, group = "inputs")]
    patch: Option<PathBuf>,
}

fn parse_duration(s: &str) -> Result<f64, String> {
    let (num, scale) = if let Some(ms) = s.strip_suffix("ms") {
        (ms, 1e-3)
    } else if let Some(sec) = s.strip_suffix('s') {
        (sec, 1.0)
    } else {
        (s, 1.0)
    };
    let v: f64 = num.trim().parse().map_err(|_| format!("expected a duration like 2s or 500ms, got '{s}'"))?;
    let v = v * scale;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("duration must be positive".into())
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

fn read(path: &Path) -> Result<String, ExitCode> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_USAGE)
    })
}

fn render(args: RenderArgs) -> ExitCode {
    let job = RenderJob {
        program_path: args.program,
        patch_path: args.patch,
        settings: RenderSettings {
            duration_s: args.duration,
            sample_rate: args.sample_rate,
            seed: args.seed,
            statement_cost_us: args.statement_cost,
            clock_hz: args.clock,
        },
        out_wav_path: args.out,
        trace_csv_path: args.trace,
        trace_decimate: args.trace_decimate as usize,
    };
    match run_job(&job) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("{w}");
            }
            let mut stdout = std::io::stdout().lock();
            if !report.print_output.is_empty() {
                let _ = write!(stdout, "{}", report.print_output);
                if !report.print_output.ends_with('\n') {
                    let _ = writeln!(stdout);
                }
            }
            let _ = writeln!(stdout, "{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn check(args: CheckArgs) -> ExitCode {
    let mut code = 0;
    if let Some(path) = &args.program {
        let text = match read(path) {
            Ok(t) => t,
            Err(c) => return c,
        };
        match parse_program(&text) {
            Ok(p) => println!("{}: ok ({} lines, {} statements)", path.display(), p.lines.len(), p.statement_count()),
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                code = EXIT_BASIC;
            }
        }
    }
    if let Some(path) = &args.patch {
        let text = match read(path) {
            Ok(t) => t,
            Err(c) => return c,
        };
        match parse_patch(&text) {
            Ok(g) => {
                let diagnostics = validate(&g);
                for d in &diagnostics {
                    eprintln!("{}: {d}", path.display());
                }
                if !has_errors(&diagnostics) {
                    println!("{}: ok ({} modules, {} connections)", path.display(), g.nodes.len() - 1, g.edges.len());
                } else if code == 0 {
                    code = EXIT_PATCH;
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                if code == 0 {
                    code = EXIT_PATCH;
                }
            }
        }
    }
    ExitCode::from(code)
}

fn modules() -> ExitCode {
    let mut out = String::from("Predeclared: sid.audio (chip output, line level)\n");
    for kind in ModuleKind::DECLARABLE {
        let params = ModuleParams::default_for(kind);
        let inputs: Vec<String> = match kind {
            ModuleKind::Mixer => vec!["in1..inN (one per gain)".into()],
            _ => params
                .input_ports()
                .into_iter()
                .map(|p| if params.input_required(&p) { p } else { format!("{p} (optional)") })
                .collect(),
        };
        out.push_str(&format!("\n{kind}\n"));
        out.push_str(&format!("  inputs:  {}\n", if inputs.is_empty() { "-".into() } else { inputs.join(", ") }));
        out.push_str(&format!("  outputs: {}\n", kind.output_ports().join(", ")));
        for (key, help) in kind.param_help() {
            out.push_str(&format!("  {key}: {help}\n"));
        }
    }
    out.push_str("\nUnits: bare numbers are volts, ratios, seconds or Hz as listed; suffixes ms, s, hz, khz.\n");
    print!("{out}");
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Render(args) => render(args),
        Command::Check(args) => check(args),
        Command::Modules => modules(),
    }
}
