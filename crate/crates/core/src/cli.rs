//! Command-line surface. Thin by design: every subcommand is flag/config
//! plumbing around one library call, all numeric output is written with 12
//! significant digits, and repeated runs produce byte-identical files.
//!
//! Exit codes: 0 success, 2 usage, 3 config, 4 validation, 5 computation,
//! 6 io.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::{
    load_config, GridConfig, OutputFormat, PulseConfig, PulseShape, RunConfig, SolverConfig,
    StorageConfig,
};
use crate::dynamics::{integrate_branch, residual_from};
use crate::error::{Error, Result};
use crate::model::{matching_delta, matching_g};
use crate::protocol::{gate_truth_table, run_gate, GateResult};
use crate::sweep::{
    emit_csv, emit_json, round_sig, run_sweep, Metric, Spacing, SweepSpec, SweepTarget,
};
use crate::transfer::{response_on_grid, Branch};

#[derive(Parser)]
#[command(
    name = "cavity-cz",
    version,
    about = "Reflection spectra, pulse dynamics, and a photonic controlled-Z gate \
             for a cavity-coupled three-level atom"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[command(allow_negative_numbers = true)]
enum Command {
    /// Tabulate the reflection coefficient over the frequency grid
    #[command(allow_negative_numbers = true)]
    Transfer(TransferArgs),
    /// Integrate the cavity/atom equations of motion against the pulse
    #[command(allow_negative_numbers = true)]
    Dynamics(DynamicsArgs),
    /// Run the full gate protocol and report the two-qubit matrix
    #[command(allow_negative_numbers = true)]
    Gate(GateArgs),
    /// Solve the matching condition for g or for delta
    #[command(allow_negative_numbers = true)]
    Match(MatchArgs),
    /// Scan one parameter and tabulate gate metrics
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct PhysicsArgs {
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Atom-cavity coupling rate
    #[arg(long)]
    g: Option<f64>,
    /// Derive g from the matching condition sqrt(kappa delta / 2)
    #[arg(long, conflicts_with = "g")]
    matched_g: bool,
    /// Cavity decay rate (default 1)
    #[arg(long)]
    kappa: Option<f64>,
    /// Ground-state splitting
    #[arg(long)]
    delta: Option<f64>,
    /// Atomic coherence decay rate (default 0)
    #[arg(long)]
    gamma: Option<f64>,
    /// Cavity reference frequency (bookkeeping only)
    #[arg(long)]
    omega0: Option<f64>,
    /// Pulse shape (default gaussian)
    #[arg(long, value_enum)]
    pulse_shape: Option<ShapeArg>,
    /// Pulse center frequency (default 0)
    #[arg(long)]
    pulse_center: Option<f64>,
    /// Gaussian amplitude width (default kappa/100)
    #[arg(long)]
    pulse_width: Option<f64>,
    /// Rising-exponential duration parameter
    #[arg(long)]
    pulse_duration: Option<f64>,
    /// Storage/retrieval efficiency in [0, 1] (default 1)
    #[arg(long)]
    efficiency: Option<f64>,
    /// Phase imprinted by storage (default 0)
    #[arg(long)]
    phase_store: Option<f64>,
    /// Phase imprinted by retrieval (default 0)
    #[arg(long)]
    phase_retrieve: Option<f64>,
    /// Grid lower edge (default -20 kappa)
    #[arg(long)]
    nu_min: Option<f64>,
    /// Grid upper edge (default 20 kappa)
    #[arg(long)]
    nu_max: Option<f64>,
    /// Grid size, a power of two (default 4096)
    #[arg(long)]
    n_points: Option<usize>,
    /// Integrator absolute tolerance (default 1e-10)
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Integrator relative tolerance (default 1e-10)
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Integrator step budget (default 1000000)
    #[arg(long)]
    max_steps: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Gaussian,
    RisingExponential,
}

impl From<ShapeArg> for PulseShape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Gaussian => PulseShape::Gaussian,
            ShapeArg::RisingExponential => PulseShape::RisingExponential,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    G,
    Kappa,
    Delta,
    Gamma,
    PulseWidth,
    StorageEfficiency,
}

impl From<TargetArg> for SweepTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::G => SweepTarget::G,
            TargetArg::Kappa => SweepTarget::Kappa,
            TargetArg::Delta => SweepTarget::Delta,
            TargetArg::Gamma => SweepTarget::Gamma,
            TargetArg::PulseWidth => SweepTarget::PulseWidth,
            TargetArg::StorageEfficiency => SweepTarget::StorageEfficiency,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Linear,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    ControlledPhase,
    FidelityRaw,
    FidelityOpt,
    Leakage1,
    Leakage2,
    PhaseError,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::ControlledPhase => Metric::ControlledPhase,
            MetricArg::FidelityRaw => Metric::FidelityRaw,
            MetricArg::FidelityOpt => Metric::FidelityOpt,
            MetricArg::Leakage1 => Metric::Leakage1,
            MetricArg::Leakage2 => Metric::Leakage2,
            MetricArg::PhaseError => Metric::PhaseError,
        }
    }
}

#[derive(Args)]
struct TransferArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Which atomic ground state the branch sees
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    branch: u8,
    /// CSV destination (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DynamicsArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    branch: u8,
    /// Trajectory CSV destination (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Summary JSON destination (stderr when omitted)
    #[arg(long, value_name = "FILE")]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct GateArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    /// Control amplitude on |0> (no photon)
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    alpha: f64,
    /// Control amplitude on |1> (photon present)
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    beta: f64,
    /// JSON destination (stdout when omitted); the table goes to stderr
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MatchArgs {
    /// Coupling rate; solves for delta
    #[arg(long)]
    g: Option<f64>,
    /// Ground-state splitting; solves for g
    #[arg(long)]
    delta: Option<f64>,
    /// Cavity decay rate (default 1)
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    /// JSON sweep spec file; baseline flags still override its baseline
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Parameter to sweep (inline alternative to --spec)
    #[arg(long, value_enum)]
    target: Option<TargetArg>,
    #[arg(long)]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    /// Number of sweep points (endpoint-inclusive)
    #[arg(long)]
    sweep_points: Option<usize>,
    #[arg(long, value_enum)]
    spacing: Option<SpacingArg>,
    /// Comma-separated metric list (default: all)
    #[arg(long, value_enum, value_delimiter = ',')]
    metrics: Vec<MetricArg>,
    /// Obtain overlaps from the time-domain route instead of the spectra
    #[arg(long)]
    time_domain: bool,
    /// Size of the worker pool (default: rayon's choice)
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Table destination (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

/// Parses the given argv and runs the chosen subcommand, returning the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code().clamp(0, u8::MAX as i32) as u8;
        }
    };
    let outcome = match cli.command {
        Command::Transfer(args) => cmd_transfer(args),
        Command::Dynamics(args) => cmd_dynamics(args),
        Command::Gate(args) => cmd_gate(args),
        Command::Match(args) => cmd_match(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary.
pub fn run() -> u8 {
    dispatch(std::env::args_os())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 3,
        Error::InvalidParams(_)
        | Error::GridMismatch
        | Error::GridTooNarrow(_)
        | Error::UnnormalizedState { .. }
        | Error::InvalidSweep(_) => 4,
        Error::SingularParams { .. }
        | Error::SolverFailure { .. }
        | Error::TransientNotDecayed { .. } => 5,
        Error::Io(_) => 6,
    }
}

fn branch_of(n: u8) -> Branch {
    if n == 1 {
        Branch::Atom1
    } else {
        Branch::Atom2
    }
}

/// Loads the config file if given and lays the explicit flags over it.
fn effective_config(p: &PhysicsArgs) -> Result<RunConfig> {
    let mut cfg = match &p.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    merge_flags(&mut cfg, p)?;
    Ok(cfg)
}

fn merge_flags(cfg: &mut RunConfig, p: &PhysicsArgs) -> Result<()> {
    if p.g.is_some() {
        cfg.g = p.g;
    }
    if p.kappa.is_some() {
        cfg.kappa = p.kappa;
    }
    if p.delta.is_some() {
        cfg.delta = p.delta;
    }
    if p.gamma.is_some() {
        cfg.gamma = p.gamma;
    }
    if p.omega0.is_some() {
        cfg.omega0 = p.omega0;
    }
    if p.matched_g {
        if cfg.g.is_some() {
            return Err(Error::Config(
                "--matched-g conflicts with an explicit g".into(),
            ));
        }
        let kappa = cfg.kappa.unwrap_or(1.0);
        let delta = cfg
            .delta
            .ok_or_else(|| Error::Config("--matched-g needs delta".into()))?;
        cfg.g = Some(matching_g(kappa, delta)?);
    }

    if p.pulse_shape.is_some()
        || p.pulse_center.is_some()
        || p.pulse_width.is_some()
        || p.pulse_duration.is_some()
    {
        let pc = cfg.pulse.get_or_insert_with(PulseConfig::default);
        if let Some(s) = p.pulse_shape {
            pc.shape = Some(s.into());
        }
        if p.pulse_center.is_some() {
            pc.center = p.pulse_center;
        }
        if p.pulse_width.is_some() {
            pc.width = p.pulse_width;
        }
        if p.pulse_duration.is_some() {
            pc.duration = p.pulse_duration;
        }
    }

    if p.efficiency.is_some() || p.phase_store.is_some() || p.phase_retrieve.is_some() {
        let sc = cfg.storage.get_or_insert_with(StorageConfig::default);
        if p.efficiency.is_some() {
            sc.efficiency = p.efficiency;
        }
        if p.phase_store.is_some() {
            sc.phase_store = p.phase_store;
        }
        if p.phase_retrieve.is_some() {
            sc.phase_retrieve = p.phase_retrieve;
        }
    }

    if p.nu_min.is_some() || p.nu_max.is_some() || p.n_points.is_some() {
        let gc = cfg.grid.get_or_insert_with(GridConfig::default);
        if p.nu_min.is_some() {
            gc.nu_min = p.nu_min;
        }
        if p.nu_max.is_some() {
            gc.nu_max = p.nu_max;
        }
        if p.n_points.is_some() {
            gc.n_points = p.n_points;
        }
    }

    if p.abs_tol.is_some() || p.rel_tol.is_some() || p.max_steps.is_some() {
        let sc = cfg.solver.get_or_insert_with(SolverConfig::default);
        if p.abs_tol.is_some() {
            sc.abs_tol = p.abs_tol;
        }
        if p.rel_tol.is_some() {
            sc.rel_tol = p.rel_tol;
        }
        if p.max_steps.is_some() {
            sc.max_steps = p.max_steps;
        }
    }
    Ok(())
}

/// Writes to the path when given (tagging io errors with it), else stdout.
fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn cmd_transfer(args: TransferArgs) -> Result<()> {
    let cfg = effective_config(&args.physics)?;
    let resolved = cfg.resolve()?;
    let response = response_on_grid(&resolved.params, branch_of(args.branch), resolved.grid)?;
    let mut csv = String::from("nu,re_r,im_r,abs_r,arg_r\n");
    for (k, r) in response.r.iter().enumerate() {
        csv.push_str(&format!(
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
            response.grid.nu(k),
            r.re,
            r.im,
            r.norm(),
            r.arg()
        ));
    }
    let path = args.output.or_else(|| resolved.path.clone().map(Into::into));
    write_output(path.as_deref(), &csv)
}

fn cmd_dynamics(args: DynamicsArgs) -> Result<()> {
    let cfg = effective_config(&args.physics)?;
    let resolved = cfg.resolve()?;
    let branch = branch_of(args.branch);
    let packet = resolved.pulse.build(resolved.grid)?;
    let traj = integrate_branch(&resolved.params, branch, &packet, &resolved.solver)?;

    let mut csv = String::from("t,re_chi,im_chi,re_xi,im_xi,re_fout,im_fout\n");
    for j in 0..traj.times.len() {
        csv.push_str(&format!(
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
            traj.times[j],
            traj.chi[j].re,
            traj.chi[j].im,
            traj.xi[j].re,
            traj.xi[j].im,
            traj.f_out[j].re,
            traj.f_out[j].im
        ));
    }
    let path = args.output.or_else(|| resolved.path.clone().map(Into::into));
    write_output(path.as_deref(), &csv)?;

    let residual = residual_from(&traj, &resolved.params, branch, &packet)?;
    let input_norm = traj.input_energy().sqrt();
    let output_norm = traj.output_energy().sqrt();
    let summary = serde_json::json!({
        "input_norm": round_sig(input_norm, 12),
        "output_norm": round_sig(output_norm, 12),
        "norm_ratio": round_sig(output_norm / input_norm, 12),
        "residual": round_sig(residual, 12),
    });
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    match &args.summary {
        Some(p) => write_output(Some(p), &text),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn rounded_gate(r: &GateResult) -> GateResult {
    let rc = |c: Complex64| Complex64::new(round_sig(c.re, 12), round_sig(c.im, 12));
    GateResult {
        u00: rc(r.u00),
        u01: rc(r.u01),
        u10: rc(r.u10),
        u11: rc(r.u11),
        controlled_phase: round_sig(r.controlled_phase, 12),
        fidelity_raw: round_sig(r.fidelity_raw, 12),
        fidelity_opt: round_sig(r.fidelity_opt, 12),
        leakage_1: round_sig(r.leakage_1, 12),
        leakage_2: round_sig(r.leakage_2, 12),
    }
}

fn cmd_gate(args: GateArgs) -> Result<()> {
    let cfg = effective_config(&args.physics)?;
    let resolved = cfg.resolve()?;
    let packet = resolved.pulse.build(resolved.grid)?;
    let control = (
        Complex64::new(args.alpha, 0.0),
        Complex64::new(args.beta, 0.0),
    );
    let result = run_gate(&resolved.params, &packet, &resolved.storage, control)?;

    eprint!("{}", gate_truth_table(&result));
    let mut text = serde_json::to_string_pretty(&rounded_gate(&result))
        .map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    let path = args.output.or_else(|| resolved.path.clone().map(Into::into));
    write_output(path.as_deref(), &text)
}

fn cmd_match(args: MatchArgs) -> Result<()> {
    if !(args.kappa.is_finite() && args.kappa > 0.0) {
        return Err(Error::InvalidParams("kappa must be positive".into()));
    }
    match (args.g, args.delta) {
        (Some(_), Some(_)) | (None, None) => Err(Error::Config(
            "give exactly one of --g or --delta".into(),
        )),
        (None, Some(delta)) => {
            let g = matching_g(args.kappa, delta)?;
            println!("g = {g:.12}");
            Ok(())
        }
        (Some(g), None) => {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::InvalidParams("g must be positive".into()));
            }
            let delta = matching_delta(g, args.kappa);
            println!("delta = {delta:.12}");
            Ok(())
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(path) => {
            if args.physics.config.is_some() {
                return Err(Error::Config(
                    "--config conflicts with --spec; put the baseline in the spec file".into(),
                ));
            }
            if args.target.is_some() {
                return Err(Error::Config(
                    "--target conflicts with --spec; choose one way to define the sweep".into(),
                ));
            }
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
            })?;
            serde_json::from_str::<SweepSpec>(&text).map_err(|e| Error::Config(e.to_string()))?
        }
        None => {
            let target = args
                .target
                .ok_or_else(|| Error::Config("--target is required without --spec".into()))?;
            let start = args
                .start
                .ok_or_else(|| Error::Config("--start is required without --spec".into()))?;
            let stop = args
                .stop
                .ok_or_else(|| Error::Config("--stop is required without --spec".into()))?;
            let n_points = args
                .sweep_points
                .ok_or_else(|| Error::Config("--sweep-points is required without --spec".into()))?;
            SweepSpec {
                target: target.into(),
                start,
                stop,
                n_points,
                spacing: Spacing::Linear,
                baseline: effective_config(&args.physics)?,
                metrics: Metric::all(),
                time_domain: false,
            }
        }
    };
    if args.spec.is_some() {
        merge_flags(&mut spec.baseline, &args.physics)?;
    }
    if let Some(s) = args.spacing {
        spec.spacing = match s {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Log => Spacing::Log,
        };
    }
    if !args.metrics.is_empty() {
        spec.metrics = args.metrics.iter().map(|m| (*m).into()).collect();
    }
    if args.time_domain {
        spec.time_domain = true;
    }

    let table = match args.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(|| run_sweep(&spec)),
        None => run_sweep(&spec),
    }?;

    let format = args
        .format
        .map(Into::into)
        .or_else(|| spec.baseline.output.as_ref().and_then(|o| o.format))
        .unwrap_or(OutputFormat::Csv);
    let text = match format {
        OutputFormat::Csv => emit_csv(&table)?,
        OutputFormat::Json => emit_json(&table)?,
    };
    let path = args.output.or_else(|| {
        spec.baseline
            .output
            .as_ref()
            .and_then(|o| o.path.clone())
            .map(Into::into)
    });
    write_output(path.as_deref(), &text)
}
