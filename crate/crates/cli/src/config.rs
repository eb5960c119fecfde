//! Command-line grammar and run configuration.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use wallcross_core::model::ModelSpec;
use wallcross_core::mu::BroadMode;

use crate::CliError;

/// Largest accepted t-degree.
pub const MAX_T_DEGREE: u32 = 12;
/// Largest number of light markings for partition and subset enumeration.
pub const MAX_LIGHT: usize = 10;
/// Environment variable bounding the worker threads of `verify-all`.
pub const THREADS_ENV: &str = "WALLCROSS_THREADS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum MuPart {
    #[default]
    Full,
    Plus,
    Minus,
}

/// The full set of inputs of one invocation.
#[derive(Clone, Debug, Parser)]
#[command(name = "wallcross", version, about = "Exact wall-crossing computations for Fermat FJRW theory")]
pub struct RunConfig {
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Seed for the randomized property suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct ModelArg {
    /// Model file (JSON or TOML) with fields `r` and `weights`.
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct MuArgs {
    /// Light variables, e.g. `t2,t3` or `2,3`; all states by default.
    #[arg(long)]
    pub vars: Option<String>,
    #[arg(long)]
    pub twisted: bool,
    #[arg(long, default_value = "as-written", value_parser = parse_broad_mode)]
    pub broad_mode: BroadMode,
}

fn parse_broad_mode(s: &str) -> Result<BroadMode, String> {
    s.parse().map_err(|e: wallcross_core::Error| e.to_string())
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// The mu-series, or its `z >= 0` / `z < 0` part.
    Mu {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        mu: MuArgs,
        #[arg(long)]
        max_deg: u32,
        #[arg(long, value_enum, default_value_t = MuPart::Full)]
        part: MuPart,
    },
    /// `I_0` and `I_1` of a Calabi-Yau model.
    Ifunc {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        max_deg: u32,
    },
    /// Virtual dimension, ordinary and master.
    Vdim {
        #[command(flatten)]
        model: ModelArg,
        /// `g=G;a1,a2|b1,b2`.
        #[arg(long)]
        gamma: String,
    },
    Selection {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        gamma: String,
    },
    Epsilon {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        gamma: String,
    },
    /// Narrow/broad type of every state.
    Classify {
        #[command(flatten)]
        model: ModelArg,
    },
    NodeData {
        #[command(flatten)]
        model: ModelArg,
        /// Light states on `J`, e.g. `2,2,2`.
        #[arg(long = "J")]
        j: String,
    },
    FixedPoints {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        genus0: bool,
    },
    /// Both forms of the genus-0 J-function and their comparison.
    Jfunc {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        vars: Option<String>,
        #[arg(long)]
        t_deg: u32,
        #[arg(long, default_value_t = 0)]
        u_deg: u32,
        #[arg(long, default_value_t = 2)]
        psi_deg: u32,
    },
    #[command(subcommand)]
    Check(CheckCommand),
    /// Runs every acceptance suite with the documented default bounds.
    VerifyAll {
        /// Reduced bounds for a fast smoke run.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Debug, Subcommand)]
pub enum CheckCommand {
    Wallcross {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        mu: MuArgs,
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        t_deg: u32,
        #[arg(long)]
        u_deg: u32,
        #[arg(long, default_value_t = 3)]
        psi_deg: u32,
        /// Ignore genus-0 coefficients of u-degree <= 1.
        #[arg(long)]
        g0_mask: bool,
        #[arg(long)]
        narrow_only: bool,
        /// Negative control: perturb one mu^+ coefficient.
        #[arg(long)]
        perturb: bool,
    },
    Dilaton {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        t_deg: u32,
        #[arg(long)]
        perturb: bool,
    },
    Genus0 {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        vars: Option<String>,
        #[arg(long)]
        t_deg: u32,
        #[arg(long, default_value_t = 2)]
        psi_deg: u32,
        #[arg(long)]
        perturb: bool,
    },
    Residue {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        gamma: String,
        /// Psi powers at the light markings; zeros by default.
        #[arg(long)]
        d: Option<String>,
        #[arg(long)]
        genus0: bool,
        #[arg(long, default_value_t = 0)]
        heavy_psi: u32,
        #[arg(long)]
        twisted: bool,
    },
    MuAggregation {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        mu: MuArgs,
        #[arg(long)]
        max_deg: u32,
    },
}

impl RunConfig {
    /// Rejects bounds beyond the documented safety limits.
    pub fn validate(&self) -> Result<(), CliError> {
        let t = match &self.command {
            Command::Mu { max_deg, .. } | Command::Ifunc { max_deg, .. } => Some(*max_deg),
            Command::Jfunc { t_deg, .. } => Some(*t_deg),
            Command::Check(c) => match c {
                CheckCommand::Wallcross { t_deg, .. }
                | CheckCommand::Dilaton { t_deg, .. }
                | CheckCommand::Genus0 { t_deg, .. } => Some(*t_deg),
                CheckCommand::MuAggregation { max_deg, .. } => Some(*max_deg),
                CheckCommand::Residue { .. } => None,
            },
            _ => None,
        };
        match t {
            Some(t) if t > MAX_T_DEGREE => Err(CliError::Bounds(format!("t-degree {t} exceeds {MAX_T_DEGREE}"))),
            _ => Ok(()),
        }
    }
}

/// Reads a model from JSON, or TOML when the extension says so.
pub fn load_model(path: &Path) -> Result<ModelSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let is_toml = path.extension().is_some_and(|e| e == "toml");
    if is_toml {
        toml::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

/// Parses `t2,t3` or `2,3` into states in `1..=r`.
pub fn parse_vars(spec: Option<&str>, r: u32) -> Result<Vec<u32>, CliError> {
    let Some(spec) = spec else { return Ok((1..=r).collect()) };
    let vars = parse_list(spec.split(',').map(|x| x.trim().trim_start_matches('t')).collect::<Vec<_>>().join(",").as_str())?;
    if let Some(b) = vars.iter().find(|&&b| b == 0 || b > r) {
        return Err(CliError::Parse(format!("state {b} is outside 1..={r}")));
    }
    Ok(vars)
}

/// Parses a comma-separated list of non-negative integers.
pub fn parse_list(spec: &str) -> Result<Vec<u32>, CliError> {
    spec.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<u32>().map_err(|_| CliError::Parse(format!("`{x}` is not a non-negative integer"))))
        .collect()
}
