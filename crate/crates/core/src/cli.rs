//! Command-line front end: argument parsing, output formatting and exit codes.
//!
//! Every command writes either a CSV table (`#key=value` header lines, one
//! column-header line, then rows) or a JSON document with sorted keys.
//! Errors go to stderr as a single JSON object.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{
    validate, Cartesian, Polar, PresetKind, QuasiBellState, StateDescriptor, StateParams,
};
use crate::oracle::{
    fock_chi_oracle, quadrature_normalization, quadrature_one_mode, quadrature_phase_dist,
    FockCutoff, QuadratureSpec,
};
use crate::phasedist::{
    build_spectrum, eval_one_mode_dist, eval_phase_dist, one_mode_coefficients, phase_mean_var,
    trig_moments, Branch, Mode, PhaseWindow, TruncationPolicy,
};
use crate::quasiprob::{chi, DisplacementPoint, QuasiProbKernel};

/// Exit status for configuration and parse errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for domain errors (invalid states, parameters out of range, overflow).
pub const EXIT_DOMAIN: i32 = 3;
/// Exit status for convergence failures.
pub const EXIT_CONVERGENCE: i32 = 4;
/// Exit status for output I/O failures.
pub const EXIT_IO: i32 = 1;

/// Ordering values of the curve panels.
pub const FIGURE_S_VALUES: [f64; 3] = [-1.0, 0.0, 0.4];
/// Smallest `|alpha|^2` sampled on surface panels.
pub const SURFACE_ALPHA_SQ_FLOOR: f64 = 1e-6;
const SURFACE_ALPHA_SQ_MAX: f64 = 3.0;

#[derive(Debug, Parser)]
#[command(
    name = "catphase",
    version,
    about = "Phase distributions of entangled two-mode coherent states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a state and run invariant spot checks.
    Validate {
        #[command(flatten)]
        config: RunConfig,
    },
    /// Fourier coefficients of a phase-sum/difference or one-mode series.
    Coeffs {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long, value_enum, conflicts_with = "mode")]
        branch: Option<BranchArg>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Phase-sum or phase-difference density over the phase grid.
    PhaseDist {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long, value_enum, default_value = "minus")]
        branch: BranchArg,
    },
    /// One-mode phase density over the phase grid.
    OneMode {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long, value_enum, default_value = "1")]
        mode: ModeArg,
    },
    /// Data behind one figure panel.
    Figure {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long, value_enum)]
        id: PanelId,
    },
    /// Trigonometric and phase moments.
    Moments {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long, value_enum, default_value = "minus")]
        branch: BranchArg,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Window center; defaults to the reference phase.
        #[arg(long, allow_hyphen_values = true)]
        phi0: Option<f64>,
    },
    /// Quasi-probability distribution on a 2D slice of (gamma, delta).
    WignerSlice {
        #[command(flatten)]
        config: RunConfig,
        #[command(flatten)]
        slice: SliceArgs,
    },
    /// Analytic series against quadrature, closed-form chi against the Fock trace.
    OracleCompare {
        #[command(flatten)]
        config: RunConfig,
        /// Amplitudes |alpha| = |beta| of the suite.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0])]
        amplitudes: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Sum,
            BranchArg::Minus => Branch::Difference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::One => Mode::One,
            ModeArg::Two => Mode::Two,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PanelId {
    #[value(name = "1a")]
    P1a,
    #[value(name = "1b")]
    P1b,
    #[value(name = "1c")]
    P1c,
    #[value(name = "1d")]
    P1d,
    #[value(name = "2a")]
    P2a,
    #[value(name = "2b")]
    P2b,
    #[value(name = "2c")]
    P2c,
    #[value(name = "2d")]
    P2d,
}

impl PanelId {
    pub const ALL: [PanelId; 8] = [
        PanelId::P1a,
        PanelId::P1b,
        PanelId::P1c,
        PanelId::P1d,
        PanelId::P2a,
        PanelId::P2b,
        PanelId::P2c,
        PanelId::P2d,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            PanelId::P1a => "1a",
            PanelId::P1b => "1b",
            PanelId::P1c => "1c",
            PanelId::P1d => "1d",
            PanelId::P2a => "2a",
            PanelId::P2b => "2b",
            PanelId::P2c => "2c",
            PanelId::P2d => "2d",
        }
    }

    /// Panels `1x` show phase differences, panels `2x` phase sums.
    pub fn branch(self) -> Branch {
        match self {
            PanelId::P1a | PanelId::P1b | PanelId::P1c | PanelId::P1d => Branch::Difference,
            _ => Branch::Sum,
        }
    }

    /// Upper panels use the even cat, lower panels the odd cat.
    pub fn preset(self) -> PresetKind {
        match self {
            PanelId::P1a | PanelId::P1b | PanelId::P2a | PanelId::P2b => PresetKind::EvenCat,
            _ => PresetKind::OddCat,
        }
    }

    /// Left panels are surfaces over `|alpha|^2`, right panels curves in `s`.
    pub fn is_surface(self) -> bool {
        matches!(
            self,
            PanelId::P1a | PanelId::P1c | PanelId::P2a | PanelId::P2c
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SliceAxis {
    GammaRe,
    GammaIm,
    DeltaRe,
    DeltaIm,
}

impl SliceAxis {
    fn tag(self) -> &'static str {
        match self {
            SliceAxis::GammaRe => "gamma_re",
            SliceAxis::GammaIm => "gamma_im",
            SliceAxis::DeltaRe => "delta_re",
            SliceAxis::DeltaIm => "delta_im",
        }
    }

    fn set(self, gamma: &mut Complex64, delta: &mut Complex64, v: f64) {
        match self {
            SliceAxis::GammaRe => gamma.re = v,
            SliceAxis::GammaIm => gamma.im = v,
            SliceAxis::DeltaRe => delta.re = v,
            SliceAxis::DeltaIm => delta.im = v,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SliceArgs {
    #[arg(long, value_enum, default_value = "gamma-re")]
    pub x_axis: SliceAxis,
    #[arg(long, value_enum, default_value = "gamma-im")]
    pub y_axis: SliceAxis,
    #[arg(long, allow_hyphen_values = true, default_value_t = -3.0)]
    pub x_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
    pub x_max: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -3.0)]
    pub y_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
    pub y_max: f64,
    #[arg(long, default_value_t = 41)]
    pub nx: usize,
    #[arg(long, default_value_t = 41)]
    pub ny: usize,
    /// Base point for the coordinates not swept, as `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_cartesian)]
    pub gamma: Option<Cartesian>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_cartesian)]
    pub delta: Option<Cartesian>,
}

/// Settings shared by all commands. The same fields are accepted as inline
/// flags or as keys of a JSON file given with `--config`; flags win.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// JSON file with any of these settings.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output file (default stdout).
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(default)]
    pub format: Option<Format>,

    /// even_cat, odd_cat, yurke_stoler_plus or yurke_stoler_minus.
    #[arg(long)]
    #[serde(default)]
    pub preset: Option<PresetKind>,
    /// Weight of |alpha, beta> as `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_cartesian)]
    #[serde(default)]
    pub mu: Option<Cartesian>,
    /// Weight of |-alpha, -beta> as `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_cartesian)]
    #[serde(default)]
    pub nu: Option<Cartesian>,
    /// |alpha| (default 1).
    #[arg(long)]
    #[serde(default)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub alpha_arg: Option<f64>,
    /// |beta| (default 1).
    #[arg(long)]
    #[serde(default)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub beta_arg: Option<f64>,
    /// Rescale (mu, nu) to unit weight.
    #[arg(long)]
    #[serde(default)]
    pub renormalize: bool,

    /// Ordering parameter (default 0).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub s: Option<f64>,
    /// Points of the phase grid over [-π, π] (default 361).
    #[arg(long)]
    #[serde(default)]
    pub n_phi: Option<usize>,
    /// Samples of |alpha|^2 on surface panels (default 61).
    #[arg(long)]
    #[serde(default)]
    pub n_surface: Option<usize>,

    #[arg(long)]
    #[serde(default)]
    pub eps_tail: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub n_min: Option<u32>,
    #[arg(long)]
    #[serde(default)]
    pub n_max: Option<u32>,

    #[arg(long)]
    #[serde(default)]
    pub n_radial: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub n_angular: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub radial_cutoff_sigma: Option<f64>,
}

fn parse_cartesian(s: &str) -> std::result::Result<Cartesian, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `re,im`, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok(Cartesian {
        re: parse(re)?,
        im: parse(im)?,
    })
}

impl RunConfig {
    /// Fill unset fields from `other`.
    fn or(self, other: RunConfig) -> RunConfig {
        RunConfig {
            config: self.config,
            out: self.out.or(other.out),
            format: self.format.or(other.format),
            preset: self.preset.or(other.preset),
            mu: self.mu.or(other.mu),
            nu: self.nu.or(other.nu),
            alpha: self.alpha.or(other.alpha),
            alpha_arg: self.alpha_arg.or(other.alpha_arg),
            beta: self.beta.or(other.beta),
            beta_arg: self.beta_arg.or(other.beta_arg),
            renormalize: self.renormalize || other.renormalize,
            s: self.s.or(other.s),
            n_phi: self.n_phi.or(other.n_phi),
            n_surface: self.n_surface.or(other.n_surface),
            eps_tail: self.eps_tail.or(other.eps_tail),
            n_min: self.n_min.or(other.n_min),
            n_max: self.n_max.or(other.n_max),
            n_radial: self.n_radial.or(other.n_radial),
            n_angular: self.n_angular.or(other.n_angular),
            radial_cutoff_sigma: self.radial_cutoff_sigma.or(other.radial_cutoff_sigma),
        }
    }

    /// Merge with the `--config` file, if any, and apply defaults.
    pub fn resolve(self) -> Result<Resolved> {
        let merged = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let file: RunConfig = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                self.or(file)
            }
            None => self,
        };
        // A preset given on one layer and weights on the other: flags decide.
        let (preset, mu, nu) = match (merged.preset, merged.mu, merged.nu) {
            (None, None, None) => (Some(PresetKind::EvenCat), None, None),
            other => other,
        };
        let descriptor = StateDescriptor {
            preset,
            mu,
            nu,
            alpha: Polar {
                abs: merged.alpha.unwrap_or(1.0),
                arg: merged.alpha_arg.unwrap_or(0.0),
            },
            beta: Polar {
                abs: merged.beta.unwrap_or(1.0),
                arg: merged.beta_arg.unwrap_or(0.0),
            },
            renormalize: merged.renormalize,
        };
        let defaults = TruncationPolicy::default();
        let policy = TruncationPolicy {
            eps_tail: merged.eps_tail.unwrap_or(defaults.eps_tail),
            n_min: merged.n_min.unwrap_or(defaults.n_min),
            n_max: merged.n_max.unwrap_or(defaults.n_max),
        };
        policy.validate()?;
        let qd = QuadratureSpec::default();
        let quadrature = QuadratureSpec {
            n_radial: merged.n_radial.unwrap_or(qd.n_radial),
            n_angular: merged.n_angular.unwrap_or(qd.n_angular),
            radial_cutoff_sigma: merged.radial_cutoff_sigma.unwrap_or(qd.radial_cutoff_sigma),
        };
        quadrature.validate()?;
        let n_phi = merged.n_phi.unwrap_or(361);
        let n_surface = merged.n_surface.unwrap_or(61);
        if n_phi < 2 || n_surface < 2 {
            return Err(Error::Config(format!(
                "grid sizes must be >= 2 (n_phi = {n_phi}, n_surface = {n_surface})"
            )));
        }
        let s = merged.s.unwrap_or(0.0);
        if !s.is_finite() {
            return Err(Error::Config(format!("s = {s} must be finite")));
        }
        Ok(Resolved {
            descriptor,
            s,
            n_phi,
            n_surface,
            policy,
            quadrature,
            format: merged.format,
            out: merged.out,
        })
    }
}

/// A fully merged configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub descriptor: StateDescriptor,
    pub s: f64,
    pub n_phi: usize,
    pub n_surface: usize,
    pub policy: TruncationPolicy,
    pub quadrature: QuadratureSpec,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl Resolved {
    fn state(&self) -> Result<QuasiBellState> {
        self.descriptor.build()
    }

    /// Offsets `-π ..= π` of the phase grid.
    fn phi_grid(&self) -> Vec<f64> {
        let n = self.n_phi;
        (0..n)
            .map(|i| -PI + TAU * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn state_header(&self, h: &mut Header) {
        let d = &self.descriptor;
        match (d.preset, d.mu, d.nu) {
            (Some(p), _, _) => h.push("preset", p.tag()),
            (_, Some(mu), Some(nu)) => {
                h.push("mu", format!("{:?},{:?}", mu.re, mu.im));
                h.push("nu", format!("{:?},{:?}", nu.re, nu.im));
            }
            _ => {}
        }
        h.num("alpha_abs", d.alpha.abs);
        h.num("alpha_arg", d.alpha.arg);
        h.num("beta_abs", d.beta.abs);
        h.num("beta_arg", d.beta.arg);
        if d.renormalize {
            h.push("renormalize", "true");
        }
    }

    fn policy_header(&self, h: &mut Header) {
        h.num("eps_tail", self.policy.eps_tail);
        h.push("n_min", self.policy.n_min);
        h.push("n_max", self.policy.n_max);
    }
}

/// Ordered `key=value` header lines.
#[derive(Debug, Clone, Default)]
struct Header(Vec<(String, String)>);

impl Header {
    fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }
    fn num(&mut self, key: &str, value: f64) {
        self.push(key, fmt_f64(value));
    }
}

/// Shortest round-trip representation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// A titled table rendered as CSV or JSON.
#[derive(Debug, Clone)]
struct Table {
    header: Header,
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(header: Header, columns: Vec<&'static str>) -> Self {
        Self {
            header,
            columns,
            rows: Vec::new(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header.0 {
            let _ = writeln!(out, "#{k}={v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn to_json(&self) -> Value {
        let header: BTreeMap<_, _> = self.header.0.iter().cloned().collect();
        json!({ "header": header, "columns": self.columns, "rows": self.rows })
    }
}

enum Artifact {
    Table(Table),
    Report(Value),
}

impl Artifact {
    fn render(&self, format: Format) -> String {
        match (self, format) {
            (Artifact::Table(t), Format::Csv) => t.to_csv(),
            (Artifact::Table(t), Format::Json) => pretty(&t.to_json()),
            (Artifact::Report(v), Format::Json) => pretty(v),
            (Artifact::Report(v), Format::Csv) => {
                let mut rows = Vec::new();
                flatten("", v, &mut rows);
                let mut out = String::from("key,value\n");
                for (k, v) in rows {
                    let _ = writeln!(out, "{k},{v}");
                }
                out
            }
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Artifact::Table(_) => Format::Csv,
            Artifact::Report(_) => Format::Json,
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Non-finite floats become `null`.
fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// Exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::NoConvergence { .. } | Error::CutoffTooSmall { .. } => EXIT_CONVERGENCE,
        _ => EXIT_DOMAIN,
    }
}

fn error_json(kind: &str, message: &str) -> String {
    let mut s = serde_json::to_string(&json!({ "error": { "kind": kind, "message": message } }))
        .expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Parse `args` (including the program name), run the command, and write
/// output to `stdout` (or `--out`) and errors to `stderr`. Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = stderr.write_all(error_json("config", e.to_string().trim()).as_bytes());
            return EXIT_CONFIG;
        }
    };
    let (config, result) = execute(cli.command);
    let (format, out) = match &config {
        Ok(c) => (c.format, c.out.clone()),
        Err(_) => (None, None),
    };
    let artifact = match config.and(result) {
        Ok(a) => a,
        Err(e) => {
            let _ = stderr.write_all(error_json(e.kind(), &e.to_string()).as_bytes());
            return exit_code(&e);
        }
    };
    let text = artifact.render(format.unwrap_or_else(|| artifact.default_format()));
    let written = match out {
        Some(path) => std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => 0,
        Err(msg) => {
            let _ = stderr.write_all(error_json("io", &msg).as_bytes());
            EXIT_IO
        }
    }
}

type Job = Box<dyn FnOnce(&Resolved) -> Result<Artifact>>;

fn execute(command: Command) -> (Result<Resolved>, Result<Artifact>) {
    let (config, job): (RunConfig, Job) = match command {
        Command::Validate { config } => (config, Box::new(cmd_validate)),
        Command::Coeffs {
            config,
            branch,
            mode,
        } => (
            config,
            Box::new(move |r| match mode {
                Some(m) => cmd_one_mode_coeffs(r, m.into()),
                None => cmd_coeffs(r, branch.unwrap_or(BranchArg::Minus).into()),
            }),
        ),
        Command::PhaseDist { config, branch } => {
            (config, Box::new(move |r| cmd_phase_dist(r, branch.into())))
        }
        Command::OneMode { config, mode } => {
            (config, Box::new(move |r| cmd_one_mode(r, mode.into())))
        }
        Command::Figure { config, id } => (
            config,
            Box::new(move |r| figure_table(r, id).map(Artifact::Table)),
        ),
        Command::Moments {
            config,
            branch,
            n,
            phi0,
        } => (
            config,
            Box::new(move |r| cmd_moments(r, branch.into(), n, phi0)),
        ),
        Command::WignerSlice { config, slice } => {
            (config, Box::new(move |r| cmd_wigner_slice(r, &slice)))
        }
        Command::OracleCompare { config, amplitudes } => (
            config,
            Box::new(move |r| cmd_oracle_compare(r, &amplitudes)),
        ),
    };
    match config.resolve() {
        Ok(r) => {
            let result = job(&r);
            (Ok(r), result)
        }
        Err(e) => (Err(e.clone()), Err(e)),
    }
}

fn base_header(command: &str, r: &Resolved) -> Header {
    let mut h = Header::default();
    h.push("command", command);
    h.push("catphase_version", env!("CARGO_PKG_VERSION"));
    r.state_header(&mut h);
    h
}

/// Raw parameters of a descriptor, without validation.
fn descriptor_params(d: &StateDescriptor) -> StateParams {
    let (mu, nu) = match (d.preset, d.mu, d.nu) {
        (Some(p), _, _) => p.weights(),
        (None, Some(mu), Some(nu)) => (mu.into(), nu.into()),
        _ => (Complex64::new(f64::NAN, 0.0), Complex64::new(f64::NAN, 0.0)),
    };
    let (mu, nu) = if d.renormalize {
        let w = (mu.norm_sqr() + nu.norm_sqr()).sqrt();
        (mu / w, nu / w)
    } else {
        (mu, nu)
    };
    StateParams {
        alpha: d.alpha.into(),
        beta: d.beta.into(),
        mu,
        nu,
    }
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

fn cmd_validate(r: &Resolved) -> Result<Artifact> {
    let params = descriptor_params(&r.descriptor);
    let diagnostics = validate(&params);
    let mut report = json!({
        "params": {
            "alpha": complex_json(params.alpha),
            "beta": complex_json(params.beta),
            "mu": complex_json(params.mu),
            "nu": complex_json(params.nu),
        },
        "s": num(r.s),
        "diagnostics": serde_json::to_value(&diagnostics).expect("diagnostics serialize"),
        "valid": diagnostics.is_empty(),
    });
    if !diagnostics.is_empty() {
        return Ok(Artifact::Report(report));
    }
    let state = r.state()?;
    let mut checks = json!({
        "normalization_constant": num(state.normalization_constant()),
    });
    if r.s < 1.0 - crate::model::S_GUARD {
        let norm = quadrature_normalization(&state, r.s, &r.quadrature)?;
        checks["quadrature_normalization"] = num(norm);
        for branch in [Branch::Difference, Branch::Sum] {
            let sp = build_spectrum(&state, r.s, branch, &r.policy)?;
            let grid = r.phi_grid();
            let symmetry = grid
                .iter()
                .map(|d| {
                    (eval_phase_dist(&sp, sp.phi_prime() + d)
                        - eval_phase_dist(&sp, sp.phi_prime() - d))
                    .abs()
                })
                .fold(0.0, f64::max);
            let min = grid
                .iter()
                .map(|d| eval_phase_dist(&sp, sp.phi_prime() + d))
                .fold(f64::INFINITY, f64::min);
            let max_abs_c = sp.coeffs().iter().map(|c| c.abs()).fold(0.0, f64::max);
            checks[branch.tag()] = json!({
                "n_used": sp.n_used(),
                "tail_bound": num(sp.tail_bound()),
                "max_abs_coefficient": num(max_abs_c),
                "min_density": num(min),
                "symmetry_residual": num(symmetry),
            });
        }
    }
    report["checks"] = checks;
    Ok(Artifact::Report(report))
}

fn cmd_coeffs(r: &Resolved, branch: Branch) -> Result<Artifact> {
    let state = r.state()?;
    let sp = build_spectrum(&state, r.s, branch, &r.policy)?;
    let mut h = base_header("coeffs", r);
    h.num("s", r.s);
    h.push("branch", branch.tag());
    h.num("phi_prime", sp.phi_prime());
    h.push("n_used", sp.n_used());
    h.num("tail_bound", sp.tail_bound());
    r.policy_header(&mut h);
    let mut t = Table::new(h, vec!["n", "c_n"]);
    for (i, c) in sp.coeffs().iter().enumerate() {
        t.rows.push(vec![(i + 1) as f64, *c]);
    }
    Ok(Artifact::Table(t))
}

fn cmd_one_mode_coeffs(r: &Resolved, mode: Mode) -> Result<Artifact> {
    let state = r.state()?;
    let sp = one_mode_coefficients(&state, r.s, mode, &r.policy)?;
    let mut h = base_header("coeffs", r);
    h.num("s", r.s);
    h.push("mode", mode.index());
    h.num("phi_ref", sp.phi_ref());
    h.push("n_used", sp.n_used());
    r.policy_header(&mut h);
    let mut t = Table::new(h, vec!["k", "c_even", "c_odd", "d_odd"]);
    let (ce, co, d) = (sp.c_even(), sp.c_odd(), sp.d_odd());
    for k in 0..co.len() {
        let even = ce.get(k).copied().unwrap_or(0.0);
        t.rows.push(vec![(k + 1) as f64, even, co[k], d[k]]);
    }
    Ok(Artifact::Table(t))
}

fn cmd_phase_dist(r: &Resolved, branch: Branch) -> Result<Artifact> {
    let state = r.state()?;
    let sp = build_spectrum(&state, r.s, branch, &r.policy)?;
    let mut h = base_header("phase-dist", r);
    h.num("s", r.s);
    h.push("branch", branch.tag());
    h.num("phi_prime", sp.phi_prime());
    h.push("n_used", sp.n_used());
    h.num("tail_bound", sp.tail_bound());
    h.push("n_phi", r.n_phi);
    r.policy_header(&mut h);
    let mut t = Table::new(h, vec!["phi_offset", "density"]);
    for d in r.phi_grid() {
        t.rows
            .push(vec![d, eval_phase_dist(&sp, sp.phi_prime() + d)]);
    }
    Ok(Artifact::Table(t))
}

fn cmd_one_mode(r: &Resolved, mode: Mode) -> Result<Artifact> {
    let state = r.state()?;
    let sp = one_mode_coefficients(&state, r.s, mode, &r.policy)?;
    let mut h = base_header("one-mode", r);
    h.num("s", r.s);
    h.push("mode", mode.index());
    h.num("phi_ref", sp.phi_ref());
    h.push("n_used", sp.n_used());
    h.push("n_phi", r.n_phi);
    r.policy_header(&mut h);
    let mut t = Table::new(h, vec!["phi_offset", "density"]);
    for d in r.phi_grid() {
        t.rows
            .push(vec![d, eval_one_mode_dist(&sp, sp.phi_ref() + d)]);
    }
    Ok(Artifact::Table(t))
}

/// Panel data. Curve panels have columns `s, phi_offset, density` (three
/// series at |alpha| = |beta| = 1); surface panels have
/// `alpha_sq, phi_offset, density` at s = 0 with |alpha| = |beta|.
/// The state phases come from the configuration; preset and amplitudes do not.
fn figure_table(r: &Resolved, id: PanelId) -> Result<Table> {
    let branch = id.branch();
    let kind = id.preset();
    let (pa, pb) = (r.descriptor.alpha.arg, r.descriptor.beta.arg);
    let mut h = Header::default();
    h.push("command", "figure");
    h.push("catphase_version", env!("CARGO_PKG_VERSION"));
    h.push("panel", id.tag());
    h.push("preset", kind.tag());
    h.push("branch", branch.tag());
    h.num("alpha_arg", pa);
    h.num("beta_arg", pb);
    h.push("n_phi", r.n_phi);
    r.policy_header(&mut h);
    let grid = r.phi_grid();
    if id.is_surface() {
        let s = 0.0;
        h.num("s", s);
        h.push("n_surface", r.n_surface);
        h.num("alpha_sq_max", SURFACE_ALPHA_SQ_MAX);
        h.num("alpha_sq_floor", SURFACE_ALPHA_SQ_FLOOR);
        let mut t = Table::new(h, vec!["alpha_sq", "phi_offset", "density"]);
        for i in 0..r.n_surface {
            let a2 = (SURFACE_ALPHA_SQ_MAX * i as f64 / (r.n_surface - 1) as f64)
                .max(SURFACE_ALPHA_SQ_FLOOR);
            let a = a2.sqrt();
            let st = QuasiBellState::preset(
                kind,
                Complex64::from_polar(a, pa),
                Complex64::from_polar(a, pb),
            )?;
            let sp = build_spectrum(&st, s, branch, &r.policy)?;
            for &d in &grid {
                t.rows
                    .push(vec![a2, d, eval_phase_dist(&sp, sp.phi_prime() + d)]);
            }
        }
        Ok(t)
    } else {
        h.num("alpha_abs", 1.0);
        h.num("beta_abs", 1.0);
        let s_list: Vec<String> = FIGURE_S_VALUES.iter().map(|s| fmt_f64(*s)).collect();
        h.push("s_values", s_list.join(";"));
        let st = QuasiBellState::preset(
            kind,
            Complex64::from_polar(1.0, pa),
            Complex64::from_polar(1.0, pb),
        )?;
        let mut t = Table::new(h, vec!["s", "phi_offset", "density"]);
        for s in FIGURE_S_VALUES {
            let sp = build_spectrum(&st, s, branch, &r.policy)?;
            for &d in &grid {
                t.rows
                    .push(vec![s, d, eval_phase_dist(&sp, sp.phi_prime() + d)]);
            }
        }
        Ok(t)
    }
}

/// CSV text of one figure panel with default settings.
pub fn figure_csv(id: PanelId) -> Result<String> {
    let r = RunConfig::default().resolve()?;
    Ok(figure_table(&r, id)?.to_csv())
}

fn cmd_moments(r: &Resolved, branch: Branch, n: u32, phi0: Option<f64>) -> Result<Artifact> {
    let state = r.state()?;
    let sp = build_spectrum(&state, r.s, branch, &r.policy)?;
    let trig = trig_moments(&sp, n)?;
    let phi0 = phi0.unwrap_or(sp.phi_prime());
    if !phi0.is_finite() {
        return Err(Error::Config(format!("phi0 = {phi0} must be finite")));
    }
    let pm = phase_mean_var(&sp, PhaseWindow { phi0 });
    Ok(Artifact::Report(json!({
        "branch": branch.tag(),
        "n": n,
        "s": num(r.s),
        "phi_prime": num(sp.phi_prime()),
        "phi0": num(phi0),
        "n_used": sp.n_used(),
        "tail_bound": num(sp.tail_bound()),
        "trig": {
            "mean_cos": num(trig.mean_cos),
            "mean_sin": num(trig.mean_sin),
            "var_cos": num(trig.var_cos),
            "var_sin": num(trig.var_sin),
        },
        "phase": { "mean": num(pm.mean), "variance": num(pm.variance) },
        "state": serde_json::to_value(&r.descriptor).expect("descriptor serializes"),
    })))
}

fn cmd_wigner_slice(r: &Resolved, a: &SliceArgs) -> Result<Artifact> {
    if a.x_axis == a.y_axis {
        return Err(Error::Config("x-axis and y-axis must differ".into()));
    }
    if a.nx < 2 || a.ny < 2 {
        return Err(Error::Config("nx and ny must be >= 2".into()));
    }
    let bounds = [a.x_min, a.x_max, a.y_min, a.y_max];
    if bounds.iter().any(|v| !v.is_finite()) || a.x_min >= a.x_max || a.y_min >= a.y_max {
        return Err(Error::Config(
            "slice ranges must be finite with min < max".into(),
        ));
    }
    let state = r.state()?;
    let kernel = QuasiProbKernel::new(&state, r.s)?;
    let g0: Complex64 = a.gamma.map(Into::into).unwrap_or_default();
    let d0: Complex64 = a.delta.map(Into::into).unwrap_or_default();
    let mut h = base_header("wigner-slice", r);
    h.num("s", r.s);
    h.push("x_axis", a.x_axis.tag());
    h.push("y_axis", a.y_axis.tag());
    h.push("gamma", format!("{:?},{:?}", g0.re, g0.im));
    h.push("delta", format!("{:?},{:?}", d0.re, d0.im));
    h.push("nx", a.nx);
    h.push("ny", a.ny);
    let mut t = Table::new(h, vec!["x", "y", "w"]);
    let lerp = |lo: f64, hi: f64, i: usize, n: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    for j in 0..a.ny {
        let y = lerp(a.y_min, a.y_max, j, a.ny);
        for i in 0..a.nx {
            let x = lerp(a.x_min, a.x_max, i, a.nx);
            let (mut g, mut d) = (g0, d0);
            a.x_axis.set(&mut g, &mut d, x);
            a.y_axis.set(&mut g, &mut d, y);
            t.rows.push(vec![x, y, kernel.eval(g, d)?]);
        }
    }
    Ok(Artifact::Table(t))
}

/// Deviation tolerance of the oracle comparison.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

fn cmd_oracle_compare(r: &Resolved, amplitudes: &[f64]) -> Result<Artifact> {
    if amplitudes.is_empty() || amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::Config("amplitudes must be finite and >= 0".into()));
    }
    let (pa, pb) = (r.descriptor.alpha.arg, r.descriptor.beta.arg);
    let (mut dev_phase, mut dev_one, mut dev_chi, mut dev_norm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0usize;
    let offsets: Vec<f64> = (0..16).map(|k| -PI + TAU * k as f64 / 16.0).collect();
    let chi_points: Vec<DisplacementPoint> = (0..10)
        .map(|k| {
            let t = k as f64;
            DisplacementPoint::new(
                Complex64::from_polar(0.2 * t, 0.7 * t),
                Complex64::from_polar(1.8 - 0.15 * t, -1.3 * t),
            )
        })
        .collect();
    for &a in amplitudes {
        for kind in PresetKind::ALL {
            let st = QuasiBellState::preset(
                kind,
                Complex64::from_polar(a, pa),
                Complex64::from_polar(a, pb),
            )?;
            for s in FIGURE_S_VALUES {
                cases += 1;
                let norm = quadrature_normalization(&st, s, &r.quadrature)?;
                dev_norm = dev_norm.max((norm - 1.0).abs());
                for branch in [Branch::Difference, Branch::Sum] {
                    let sp = build_spectrum(&st, s, branch, &r.policy)?;
                    for &d in &offsets {
                        let phi = sp.phi_prime() + d;
                        let q = quadrature_phase_dist(&st, s, branch, phi, &r.quadrature)?;
                        dev_phase = dev_phase.max((q - eval_phase_dist(&sp, phi)).abs());
                    }
                }
                for mode in [Mode::One, Mode::Two] {
                    let sp = one_mode_coefficients(&st, s, mode, &r.policy)?;
                    for &d in &offsets {
                        let phi = sp.phi_ref() + d;
                        let q = quadrature_one_mode(&st, s, mode, phi, &r.quadrature)?;
                        dev_one = dev_one.max((q - eval_one_mode_dist(&sp, phi)).abs());
                    }
                }
                let cutoff = FockCutoff::new(FockCutoff::recommended(&st).n_cut().max(40))?;
                for &p in &chi_points {
                    let f = fock_chi_oracle(&st, p, s, cutoff)?;
                    dev_chi = dev_chi.max((f.value - chi(&st, p, s)?).norm());
                }
            }
        }
    }
    let max_dev = dev_phase.max(dev_one).max(dev_chi).max(dev_norm);
    Ok(Artifact::Report(json!({
        "amplitudes": amplitudes.iter().map(|a| num(*a)).collect::<Vec<_>>(),
        "s_values": FIGURE_S_VALUES.iter().map(|s| num(*s)).collect::<Vec<_>>(),
        "cases": cases,
        "max_abs_dev": {
            "phase_dist": num(dev_phase),
            "one_mode": num(dev_one),
            "chi_fock": num(dev_chi),
            "normalization": num(dev_norm),
        },
        "max_abs_dev_overall": num(max_dev),
        "tolerance": num(ORACLE_TOLERANCE),
        "pass": max_dev < ORACLE_TOLERANCE,
        "quadrature": serde_json::to_value(r.quadrature).expect("spec serializes"),
    })))
}
