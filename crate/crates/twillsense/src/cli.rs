//! Command-line interface definitions and dispatch.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands;

/// Knitted force-sensor modeling and characterization toolkit.
///
/// Set `TWILLSENSE_LOG=debug` for verbose diagnostics.
#[derive(Debug, Parser)]
#[command(name = "twillsense", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a stitch program into a resistor network and sweep a force
    /// range.
    Simulate(SimulateArgs),
    /// Generate a synthetic tensile-test recording.
    Synth(SynthArgs),
    /// Analyze recordings: segmentation, fits and the full metric table.
    Analyze(AnalyzeArgs),
    /// Fit the response model to the pull/release branches of recordings.
    Fit(FitArgs),
    /// Merge per-run metric tables into a combined table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HystNormArg {
    Mean,
    Pull,
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Wale,
    Course,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    /// Five triangles to the target force.
    EqualForce,
    /// Triangles with a hold at each end.
    Dwell,
    /// Equal-force cycling at a scaled jog rate (see --speed-factor).
    VaryingSpeed,
    /// Peaks stepping 5 N per cycle up to 40 N.
    IncreasingForce,
    /// One cycle with 15-minute holds.
    LongTerm,
    /// Equal-force cycling mounted along the course direction.
    CourseDirectional,
    /// 2200 strain-target cycles with 3 s holds.
    LongTermRepetition,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Sensor variant to knit (e.g. P_Th, PL2_m+).
    #[arg(long, required_unless_present = "grid")]
    pub variant: Option<String>,
    /// Use a full-knit calibration grid instead of the variant pattern.
    #[arg(long)]
    pub grid: bool,
    /// Sensor width in wales.
    #[arg(long, default_value_t = 16)]
    pub wales: u32,
    /// Sensor height in courses.
    #[arg(long, default_value_t = 16)]
    pub courses: u32,
    /// Force list: `lo:hi:count` or comma-separated values, N.
    #[arg(long, default_value = "1:20:20")]
    pub forces: String,
    /// Contact material resistivity, Ohm*m (free parameter; the default
    /// puts contact resistance well above the yarn segments, as in the
    /// sensing regime).
    #[arg(long, default_value_t = 2e3)]
    pub rho: f64,
    /// Contact material hardness, Pa.
    #[arg(long, default_value_t = 1e8)]
    pub hardness: f64,
    /// Conducting spots per contact.
    #[arg(long, default_value_t = 4)]
    pub spots: u32,
    /// Pressure at or below which contacts open, Pa.
    #[arg(long, default_value_t = 0.0)]
    pub open_threshold: f64,
    /// Effective contact area for force-to-pressure conversion, m^2.
    #[arg(long, default_value_t = 1e-7)]
    pub area: f64,
    /// Fixed per-contact pressure, Pa (overrides --area force scaling).
    #[arg(long)]
    pub pressure: Option<f64>,
    /// Yarn length per course segment, m.
    #[arg(long, default_value_t = 0.005)]
    pub seg_len: f64,
    /// Connector courses below this per-segment resistance collapse into
    /// ideal bus nodes, Ohm.
    #[arg(long, default_value_t = 10.0)]
    pub bus_threshold: f64,
    /// Keep finite connector resistance edges (no ideal buses).
    #[arg(long)]
    pub keep_connectors: bool,
    /// Also write the resistor graph edge list at the highest force.
    #[arg(long)]
    pub dump_graph: bool,
    /// Also write the stitch program as a text grid.
    #[arg(long)]
    pub dump_program: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Sensor variant producing the response curves [default: P_Th].
    #[arg(long)]
    pub variant: Option<String>,
    /// Actuation direction (selects the matching response curves)
    /// [default: wale].
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// [default: equal-force]
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    /// Jog-rate factor for the varying-speed protocol [default: 1].
    #[arg(long)]
    pub speed_factor: Option<f64>,
    #[arg(long)]
    pub cycles: Option<u32>,
    /// Peak force per cycle, N.
    #[arg(long)]
    pub target: Option<f64>,
    /// Actuator speed, mm/s.
    #[arg(long)]
    pub jog: Option<f64>,
    /// Hold time at each end, s.
    #[arg(long)]
    pub dwell_time: Option<f64>,
    /// Pull to this strain instead of a force target.
    #[arg(long)]
    pub strain: Option<f64>,
    /// Response noise SD (percent of R0).
    #[arg(long)]
    pub noise: Option<f64>,
    /// Relaxation during strained dwells as `amp:tau` (fraction, s).
    #[arg(long)]
    pub relax: Option<String>,
    /// Drift during rest dwells as `amp:tau` (fraction, s).
    #[arg(long)]
    pub drift: Option<String>,
    /// Permanent elongation per cycle, mm.
    #[arg(long)]
    pub wearout: Option<f64>,
    /// Displacement per force, mm/N.
    #[arg(long)]
    pub compliance: Option<f64>,
    /// Resistance at a response value of 100, Ohm.
    #[arg(long)]
    pub base_r: Option<f64>,
    /// Peak overshoot fraction (rig lag stand-in).
    #[arg(long)]
    pub overshoot: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Protocol/model config file (key=value), overridden by flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long, default_value = "synth_run.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input recordings (repeatable).
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Hysteresis normalization convention.
    #[arg(long, value_enum, default_value_t = HystNormArg::Mean)]
    pub hyst_norm: HystNormArg,
    /// Reference resistance policy: `first-sample` or `explicit:<ohm>`.
    #[arg(long, default_value = "first-sample")]
    pub r0: String,
    /// Force range for fitting and curve metrics, `lo:hi` in N.
    #[arg(long, default_value = "0:20")]
    pub range: String,
    /// Motion detection threshold, mm/s.
    #[arg(long, default_value_t = 0.05)]
    pub motion_eps: f64,
    /// Force trend threshold, N.
    #[arg(long, default_value_t = 0.1)]
    pub force_eps: f64,
    /// Half-speed companion run (fills the jog x0.5 conformity column;
    /// single --input only).
    #[arg(long)]
    pub jog_half: Option<PathBuf>,
    /// Double-speed companion run (fills the jog x2.0 conformity column).
    #[arg(long)]
    pub jog_double: Option<PathBuf>,
    /// Skip SVG plot emission.
    #[arg(long)]
    pub no_plots: bool,
    /// Convention config file (key=value), overridden by flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input recordings (repeatable).
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Restrict fitting to this force range, `lo:hi` in N.
    #[arg(long, default_value = "0:20")]
    pub range: String,
    /// Reference resistance policy: `first-sample` or `explicit:<ohm>`.
    #[arg(long, default_value = "first-sample")]
    pub r0: String,
    #[arg(long, default_value_t = 0.05)]
    pub motion_eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub force_eps: f64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Per-run metric tables produced by `analyze` (repeatable).
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Synth(args) => commands::synth(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Fit(args) => commands::fit(args),
        Command::Report(args) => commands::report(args),
    }
}
