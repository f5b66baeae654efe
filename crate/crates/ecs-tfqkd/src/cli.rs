//! Command-line front end: argument parsing, config-file handling, and the
//! `rate`, `sweep`, `finite`, and `validate` subcommands.
//!
//! Settings merge with precedence defaults < config file < flags. The config
//! file is flat `key=value` text with `#` comments; unknown keys are
//! rejected. All numeric output uses ten-significant-digit scientific
//! notation so repeated runs diff cleanly.
//!
//! Exit codes: 0 success, 1 validation failure (deviations above tolerance
//! in `validate`), 2 invalid input, 3 I/O failure.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::model::{self, SystemParams};
use crate::optimizer::{self, Objective, OptimizeSpec};
use crate::oracle::{self, ValidationRow};
use crate::security::{self, RatePoint};
use crate::Error;

/// Absolute deviation tolerance for the `validate` subcommand.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Header of rate-point CSV output (`rate`, `finite`, and `sweep`).
pub const CSV_HEADER: &str = "L_km,mu_opt,p_x_opt,Q_Z,E_Z,E_X,E_ph,Delta,R,R_plob";

/// Which key-rate model a run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Perfect-source asymptotic rate.
    Ideal,
    /// Imperfect-source asymptotic rate (quantum-coin phase-error bound).
    Imperfect,
    /// Finite-size rate with statistical corrections.
    Finite,
}

impl Mode {
    fn objective(self) -> Objective {
        match self {
            Mode::Ideal => Objective::AsymptoticIdeal,
            Mode::Imperfect => Objective::AsymptoticImperfect,
            Mode::Finite => Objective::FiniteKey,
        }
    }

    fn from_config_value(key: &str, value: &str) -> Result<Self, Error> {
        match value {
            "ideal" => Ok(Mode::Ideal),
            "imperfect" => Ok(Mode::Imperfect),
            "finite" => Ok(Mode::Finite),
            _ => Err(Error::Config(format!(
                "key {key:?}: expected ideal, imperfect, or finite, got {value:?}"
            ))),
        }
    }
}

/// Merged run settings. `None` fields fall back to [`SystemParams::default`];
/// a missing `mu` (and, for finite-key runs, a missing `px`) is optimized
/// instead of evaluated at the default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub mu: Option<f64>,
    pub l_km: Option<f64>,
    pub p_d: Option<f64>,
    pub eta_d: Option<f64>,
    pub beta_db_per_km: Option<f64>,
    pub f_ec: Option<f64>,
    pub e_d: Option<f64>,
    pub f2: Option<f64>,
    pub epsilon: Option<f64>,
    pub p_x: Option<f64>,
    pub n_pulses: Option<f64>,
    pub eps_sec: Option<f64>,
    pub eps_cor: Option<f64>,
    pub l_start: Option<f64>,
    pub l_stop: Option<f64>,
    pub l_step: Option<f64>,
    pub mode: Option<Mode>,
    pub paper_literal: Option<bool>,
    pub plob_with_detector: Option<bool>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Parses flat `key=value` config text. `#` starts a comment (full-line
    /// or trailing), blank lines are skipped, unknown keys are errors.
    pub fn from_config_text(text: &str) -> Result<Self, Error> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got {:?}", idx + 1, raw))
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("line {}: {msg}", idx + 1)),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        match key {
            "mu" => self.mu = Some(parse_number(key, value)?),
            "L" => self.l_km = Some(parse_number(key, value)?),
            "pd" => self.p_d = Some(parse_number(key, value)?),
            "eta_d" => self.eta_d = Some(parse_number(key, value)?),
            "beta" => self.beta_db_per_km = Some(parse_number(key, value)?),
            "f" => self.f_ec = Some(parse_number(key, value)?),
            "ed" => self.e_d = Some(parse_number(key, value)?),
            "F2" => self.f2 = Some(parse_number(key, value)?),
            "epsilon" => self.epsilon = Some(parse_number(key, value)?),
            "px" => self.p_x = Some(parse_number(key, value)?),
            "N" => self.n_pulses = Some(parse_number(key, value)?),
            "eps_sec" => self.eps_sec = Some(parse_number(key, value)?),
            "eps_cor" => self.eps_cor = Some(parse_number(key, value)?),
            "L_start" => self.l_start = Some(parse_number(key, value)?),
            "L_stop" => self.l_stop = Some(parse_number(key, value)?),
            "L_step" => self.l_step = Some(parse_number(key, value)?),
            "mode" => self.mode = Some(Mode::from_config_value(key, value)?),
            "paper_literal" => self.paper_literal = Some(parse_flag(key, value)?),
            "plob_with_detector" => self.plob_with_detector = Some(parse_flag(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    fn apply_flags(&mut self, args: &CommonArgs) {
        merge(&mut self.mu, args.mu);
        merge(&mut self.l_km, args.l);
        merge(&mut self.p_d, args.pd);
        merge(&mut self.eta_d, args.eta_d);
        merge(&mut self.beta_db_per_km, args.beta);
        merge(&mut self.f_ec, args.f);
        merge(&mut self.e_d, args.ed);
        merge(&mut self.f2, args.f2);
        merge(&mut self.epsilon, args.epsilon);
        merge(&mut self.p_x, args.px);
        merge(&mut self.n_pulses, args.n);
        merge(&mut self.eps_sec, args.eps_sec);
        merge(&mut self.eps_cor, args.eps_cor);
        merge(&mut self.l_start, args.l_start);
        merge(&mut self.l_stop, args.l_stop);
        merge(&mut self.l_step, args.l_step);
        merge(&mut self.mode, args.mode);
        if args.paper_literal {
            self.paper_literal = Some(true);
        }
        if args.plob_with_detector {
            self.plob_with_detector = Some(true);
        }
        if args.out.is_some() {
            self.out = args.out.clone();
        }
    }

    /// Materializes validated system parameters, with `None` fields left at
    /// their defaults.
    pub fn to_params(&self) -> Result<SystemParams, Error> {
        let mut p = SystemParams::default();
        if let Some(v) = self.mu {
            p.mu = v;
        }
        if let Some(v) = self.l_km {
            p.l_km = v;
        }
        if let Some(v) = self.p_d {
            p.p_d = v;
        }
        if let Some(v) = self.eta_d {
            p.eta_d = v;
        }
        if let Some(v) = self.beta_db_per_km {
            p.beta_db_per_km = v;
        }
        if let Some(v) = self.f_ec {
            p.f_ec = v;
        }
        if let Some(v) = self.e_d {
            p.e_d = v;
        }
        if let Some(v) = self.f2 {
            p.f2 = v;
        }
        if let Some(v) = self.epsilon {
            p.epsilon = v;
        }
        if let Some(v) = self.p_x {
            p.p_x = v;
        }
        if let Some(v) = self.n_pulses {
            p.n_pulses = v;
        }
        if let Some(v) = self.eps_sec {
            p.eps_sec = v;
        }
        if let Some(v) = self.eps_cor {
            p.eps_cor = v;
        }
        p.validate()?;
        Ok(p)
    }

    fn paper_literal(&self) -> bool {
        self.paper_literal.unwrap_or(false)
    }
}

fn merge<T: Copy>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn parse_number(key: &str, value: &str) -> Result<f64, Error> {
    let v: f64 = value
        .parse()
        .map_err(|_| Error::Config(format!("key {key:?}: cannot parse {value:?} as a number")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("key {key:?}: value must be finite, got {value:?}")));
    }
    Ok(v)
}

fn parse_flag(key: &str, value: &str) -> Result<bool, Error> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "key {key:?}: expected true or false, got {value:?}"
        ))),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ecs-tfqkd",
    version,
    about = "Key rates for twin-field QKD with an entangled-coherent-state source"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Key rate at a single distance (asymptotic by default)
    Rate(CommonArgs),
    /// Optimized rate-versus-distance CSV sweep
    Sweep(CommonArgs),
    /// Finite-size key rate at a single distance
    Finite(CommonArgs),
    /// Compare analytic gains against the Fock-space enumeration
    Validate(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat key=value config file, applied before any flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coherent-state intensity mu = |alpha|^2 (omit to optimize)
    #[arg(long)]
    mu: Option<f64>,
    /// Total Alice-Bob separation in km
    #[arg(long = "L")]
    l: Option<f64>,
    /// Dark-count probability per detector per gate
    #[arg(long)]
    pd: Option<f64>,
    /// Detector efficiency
    #[arg(long)]
    eta_d: Option<f64>,
    /// Fiber loss in dB/km
    #[arg(long)]
    beta: Option<f64>,
    /// Error-correction inefficiency factor
    #[arg(long = "f")]
    f: Option<f64>,
    /// Z-basis misalignment error probability
    #[arg(long)]
    ed: Option<f64>,
    /// Source fidelity to the target entangled state
    #[arg(long = "F2")]
    f2: Option<f64>,
    /// Phase mismatch of the X-basis cat states
    #[arg(long)]
    epsilon: Option<f64>,
    /// X-basis selection probability (finite mode; omit to optimize)
    #[arg(long)]
    px: Option<f64>,
    /// Number of transmitted pulse pairs
    #[arg(long = "N")]
    n: Option<f64>,
    /// Secrecy failure probability
    #[arg(long)]
    eps_sec: Option<f64>,
    /// Correctness failure probability
    #[arg(long)]
    eps_cor: Option<f64>,
    /// Rate model for rate and sweep runs
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Sweep start distance in km
    #[arg(long)]
    l_start: Option<f64>,
    /// Sweep stop distance in km (inclusive)
    #[arg(long)]
    l_stop: Option<f64>,
    /// Sweep step in km
    #[arg(long)]
    l_step: Option<f64>,
    /// Reproduce the originally published formula set
    #[arg(long)]
    paper_literal: bool,
    /// Include detector efficiency in the repeaterless-bound reference
    #[arg(long)]
    plob_with_detector: bool,
    /// Write CSV output to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn effective_config(args: &CommonArgs) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| io_with_path(path, e))?;
            RunConfig::from_config_text(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.apply_flags(args);
    Ok(cfg)
}

/// Parses `std::env::args`, runs the requested subcommand, and returns the
/// process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Rate(args) => effective_config(args).and_then(|cfg| cmd_rate(&cfg)),
        Command::Sweep(args) => effective_config(args).and_then(|cfg| cmd_sweep(&cfg)),
        Command::Finite(args) => effective_config(args).and_then(|cfg| cmd_finite(&cfg)),
        Command::Validate(args) => effective_config(args).and_then(|cfg| cmd_validate(&cfg)),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io(_) => 3,
                _ => 2,
            }
        }
    }
}

fn point_fields(pt: &RatePoint) -> [(&'static str, f64); 10] {
    [
        ("L_km", pt.l_km),
        ("mu_opt", pt.mu.unwrap_or(0.0)),
        ("p_x_opt", pt.p_x.unwrap_or(0.0)),
        ("Q_Z", pt.q_z),
        ("E_Z", pt.e_z),
        ("E_X", pt.e_x),
        ("E_ph", pt.e_ph),
        ("Delta", pt.delta),
        ("R", pt.rate),
        ("R_plob", pt.r_plob),
    ]
}

/// One CSV data row matching [`CSV_HEADER`]; optimized-but-absent parameters
/// print as zero.
pub fn csv_row(pt: &RatePoint) -> String {
    let fields = point_fields(pt);
    let mut row = String::with_capacity(fields.len() * 18);
    for (i, (_, value)) in fields.iter().enumerate() {
        if i > 0 {
            row.push(',');
        }
        let _ = write!(row, "{value:.9e}");
    }
    row
}

fn text_block(pt: &RatePoint) -> String {
    let mut block = String::new();
    for (key, value) in point_fields(pt) {
        let _ = writeln!(block, "{key:<7} : {value:.9e}");
    }
    block
}

fn write_csv(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| io_with_path(path, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn io_with_path(path: &std::path::Path, err: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(err.kind(), format!("{}: {err}", path.display())))
}

/// Evaluates one distance, optimizing any parameter the config leaves free:
/// `mu` in every mode, `px` additionally in finite mode.
fn solve_point(params: &SystemParams, mode: Mode, cfg: &RunConfig) -> Result<RatePoint, Error> {
    let literal = cfg.paper_literal();
    let spec = OptimizeSpec {
        objective: mode.objective(),
        paper_literal: literal,
        ..OptimizeSpec::default()
    };
    let mut pt = match mode {
        Mode::Ideal | Mode::Imperfect => {
            if cfg.mu.is_some() {
                match mode {
                    Mode::Ideal => security::ideal_rate_point(params)?,
                    _ => security::imperfect_rate_point(params, literal)?,
                }
            } else {
                optimizer::optimize_mu(params, &spec)?.1
            }
        }
        Mode::Finite => match (cfg.mu.is_some(), cfg.p_x.is_some()) {
            (true, true) => security::finite_rate_point(params, literal)?,
            (true, false) => optimizer::optimize_px(params, &spec)?.1,
            (false, true) => optimizer::optimize_mu(params, &spec)?.1,
            (false, false) => optimizer::optimize_finite(params, &spec)?.2,
        },
    };
    if cfg.plob_with_detector.unwrap_or(false) {
        pt.r_plob = model::plob_reference(params, true);
    }
    Ok(pt)
}

fn report_point(cfg: &RunConfig, mode: Mode) -> Result<i32, Error> {
    let params = cfg.to_params()?;
    let pt = solve_point(&params, mode, cfg)?;
    print!("{}", text_block(&pt));
    if cfg.out.is_some() {
        write_csv(&cfg.out, &format!("{CSV_HEADER}\n{}\n", csv_row(&pt)))?;
    }
    Ok(0)
}

fn cmd_rate(cfg: &RunConfig) -> Result<i32, Error> {
    report_point(cfg, cfg.mode.unwrap_or(Mode::Imperfect))
}

fn cmd_finite(cfg: &RunConfig) -> Result<i32, Error> {
    report_point(cfg, Mode::Finite)
}

fn distance_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::InvalidParam("sweep bounds must be finite".into()));
    }
    if start < 0.0 {
        return Err(Error::InvalidParam(format!("L_start must be >= 0, got {start}")));
    }
    if step <= 0.0 {
        return Err(Error::InvalidParam(format!("L_step must be positive, got {step}")));
    }
    if stop < start {
        return Err(Error::InvalidParam(format!(
            "empty distance grid: L_start {start} exceeds L_stop {stop}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if n > 100_000 {
        return Err(Error::InvalidParam(format!("distance grid has {n} points (max 100000)")));
    }
    Ok((0..n).map(|i| start + step * i as f64).collect())
}

fn cmd_sweep(cfg: &RunConfig) -> Result<i32, Error> {
    let base = cfg.to_params()?;
    let grid = distance_grid(
        cfg.l_start.unwrap_or(0.0),
        cfg.l_stop.unwrap_or(1100.0),
        cfg.l_step.unwrap_or(25.0),
    )?;
    let mode = cfg.mode.unwrap_or(Mode::Imperfect);
    let mut csv = String::with_capacity(64 + grid.len() * 180);
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for &l_km in &grid {
        let params = SystemParams { l_km, ..base };
        let pt = solve_point(&params, mode, cfg)?;
        csv.push_str(&csv_row(&pt));
        csv.push('\n');
    }
    write_csv(&cfg.out, &csv)?;
    Ok(0)
}

fn cmd_validate(cfg: &RunConfig) -> Result<i32, Error> {
    let rows = oracle::run_validation_grid()?;
    let mut csv = String::with_capacity(64 + rows.len() * 180);
    csv.push_str(ValidationRow::CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv_line());
        csv.push('\n');
    }
    write_csv(&cfg.out, &csv)?;
    let worst = rows
        .iter()
        .map(|r| r.deviation)
        .fold(0.0_f64, f64::max);
    if worst <= VALIDATION_TOL {
        eprintln!(
            "validation: {} grid points, max deviation {worst:.3e} <= {VALIDATION_TOL:.1e}: PASS",
            rows.len()
        );
        Ok(0)
    } else {
        let mut offenders: Vec<&ValidationRow> =
            rows.iter().filter(|r| r.deviation > VALIDATION_TOL).collect();
        offenders.sort_by(|a, b| b.deviation.total_cmp(&a.deviation));
        eprintln!(
            "validation: FAIL, max deviation {worst:.3e} > {VALIDATION_TOL:.1e} at {} of {} points; worst offenders:",
            offenders.len(),
            rows.len()
        );
        for row in offenders.iter().take(10) {
            eprintln!(
                "  {} {} mu={} eta={} pd={}: deviation {:.3e}",
                row.variant, row.basis, row.mu, row.eta, row.p_d, row.deviation
            );
        }
        Ok(1)
    }
}
