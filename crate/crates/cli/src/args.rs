use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcond::dilation::{derived_povm, DilationConfig};
use qcond::{BlochVector, NoisyJointPovm, Outcome};
use serde::{Serialize, Serializer};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "qcond", version, about = "Conditional states and nonclassicality of noisy joint qubit measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; `sweep` defaults to csv, everything else to json.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// The resolved configuration embedded in every result.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a> {
    #[serde(flatten)]
    pub command: &'a Command,
    pub format: Format,
    pub out: Option<&'a Path>,
}

impl Cli {
    pub fn run_config(&self) -> RunConfig<'_> {
        RunConfig {
            command: &self.command,
            format: self.format.unwrap_or_else(|| self.command.default_format()),
            out: self.out.as_deref(),
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Full analysis of one POVM and state.
    Analyze(AnalyzeArgs),
    /// Randomized or grid audit of one theorem.
    Audit(AuditArgs),
    /// Existence and negativity over a parameter grid.
    Sweep(SweepArgs),
    /// Deconvolved double-homodyne statistics for one conditioning value.
    Homodyne(HomodyneArgs),
    /// Monte Carlo measurement record fed through the analysis.
    Sample(SampleArgs),
}

impl Command {
    pub fn default_format(&self) -> Format {
        match self {
            Command::Sweep(_) => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// A POVM given either by its accuracy factors or by dilation angles.
#[derive(Debug, Args, Serialize)]
pub struct PovmArgs {
    /// Accuracy factors `γ_X,γ_Y,γ_XY`.
    #[arg(long, value_name = "GX,GY,GXY", allow_hyphen_values = true,
          conflicts_with_all = ["theta", "phi"], required_unless_present = "theta")]
    pub gamma: Option<Triple>,

    /// Dilation interaction angle; requires `--phi`.
    #[arg(long, allow_hyphen_values = true, requires = "phi")]
    pub theta: Option<f64>,

    /// Dilation polarizer angle; requires `--theta`.
    #[arg(long, allow_hyphen_values = true, requires = "theta")]
    pub phi: Option<f64>,
}

impl PovmArgs {
    pub fn resolve(&self) -> Result<NoisyJointPovm, CliError> {
        match (self.gamma, self.theta, self.phi) {
            (Some(Triple([gx, gy, gxy])), None, None) => Ok(NoisyJointPovm::new(gx, gy, gxy)?),
            (None, Some(theta), Some(phi)) => {
                let within = |a: f64| (0.0..=std::f64::consts::FRAC_PI_2).contains(&a);
                if !within(theta) || !within(phi) {
                    return Err(CliError::Invalid(format!(
                        "angles must lie in [0, π/2], got theta = {theta}, phi = {phi}"
                    )));
                }
                Ok(derived_povm(&DilationConfig::new(theta, phi))?)
            }
            _ => Err(CliError::Invalid("give either --gamma or both --theta and --phi".into())),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub povm: PovmArgs,

    /// Bloch vector `s_X,s_Y,s_Z`, or `witness` for the nonexistence witness.
    #[arg(long, value_name = "SX,SY,SZ|witness", allow_hyphen_values = true)]
    pub state: StateArg,
}

#[derive(Debug, Args, Serialize)]
pub struct AuditArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
    pub theorem: u8,

    /// Random draws; ignored when `--grid` is given.
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Grid side for the theorem 2 audit on the accuracy sphere.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Axis as `value` or `start:end:count`.
    #[arg(long, default_value = "0.6", allow_hyphen_values = true)]
    pub gamma_x: Axis,
    #[arg(long, default_value = "0.48", allow_hyphen_values = true)]
    pub gamma_y: Axis,
    #[arg(long, default_value = "0.64", allow_hyphen_values = true)]
    pub gamma_xy: Axis,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub s_x: Axis,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub s_y: Axis,
    #[arg(long, default_value = "-1:1:201", allow_hyphen_values = true)]
    pub s_z: Axis,
    /// Conditioning outcome.
    #[arg(long, value_enum, default_value = "both", allow_hyphen_values = true)]
    pub y: YChoice,
}

#[derive(Debug, Args, Serialize)]
pub struct HomodyneArgs {
    /// Conditioning quadrature value.
    #[arg(long, allow_hyphen_values = true)]
    pub y: f64,
    #[arg(long, default_value_t = 8.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 0.005)]
    pub step: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub povm: PovmArgs,

    #[arg(long, value_name = "SX,SY,SZ|witness", allow_hyphen_values = true)]
    pub state: StateArg,

    #[arg(long, default_value_t = 1_000_000)]
    pub draws: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum YChoice {
    #[value(name = "1", alias = "+1")]
    #[serde(rename = "1")]
    Plus,
    #[value(name = "-1")]
    #[serde(rename = "-1")]
    Minus,
    #[value(name = "both")]
    #[serde(rename = "both")]
    Both,
}

/// Three comma-separated reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple(pub [f64; 3]);

impl FromStr for Triple {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected three comma-separated numbers, got `{s}`"));
        }
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(parts) {
            *slot = p.parse::<f64>().map_err(|_| format!("`{p}` is not a number"))?;
            if !slot.is_finite() {
                return Err(format!("`{p}` is not finite"));
            }
        }
        Ok(Triple(v))
    }
}

impl Serialize for Triple {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateArg {
    Vector(Triple),
    Witness,
}

impl FromStr for StateArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("witness") {
            Ok(StateArg::Witness)
        } else {
            s.parse().map(StateArg::Vector)
        }
    }
}

impl Serialize for StateArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            StateArg::Vector(t) => t.serialize(s),
            StateArg::Witness => s.serialize_str("witness"),
        }
    }
}

impl StateArg {
    /// The state, plus the conditioning outcome when it is the witness.
    pub fn resolve(&self, povm: &NoisyJointPovm) -> Result<(BlochVector, Option<Outcome>), CliError> {
        match self {
            StateArg::Vector(Triple([x, y, z])) => Ok((BlochVector::state(*x, *y, *z)?, None)),
            StateArg::Witness => {
                let (s, y) = qcond::conditional::theorem2_witness(povm)?;
                Ok((s, Some(y)))
            }
        }
    }
}

/// Sweep axis: a single value or `count` evenly spaced values on `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.start
        } else {
            self.start + (self.end - self.start) * i as f64 / (self.count - 1) as f64
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |p: &str| -> Result<f64, String> {
            let v: f64 = p.trim().parse().map_err(|_| format!("`{p}` is not a number"))?;
            if v.is_finite() { Ok(v) } else { Err(format!("`{p}` is not finite")) }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Ok(Axis { start: v, end: v, count: 1 })
            }
            [a, b, n] => Ok(Axis {
                start: num(a)?,
                end: num(b)?,
                count: n.trim().parse().map_err(|_| format!("`{n}` is not a count"))?,
            }),
            _ => Err(format!("expected `value` or `start:end:count`, got `{s}`")),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.count)
    }
}
