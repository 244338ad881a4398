use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ere_core::crossing::CrossingWindow;
use ere_core::eigensolve::{SolverConfig, DEFAULT_TOLERANCE};
use ere_core::entangle::Partition;
use ere_core::model::{Family, ModelSpec};
use ere_core::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "ere", version, about = "Locate quantum critical points from crossings of entanglement Rényi entropies")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat key=value file of defaults; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rényi entropy curve of one ground state.
    Entropy(EntropyArgs),
    /// Whether the curves of two ground states cross.
    Cross(CrossArgs),
    /// Crossing matrix and critical bracket over a parameter range.
    Sweep(SweepArgs),
    /// Finite-size extrapolation of the critical bracket midpoint.
    Fss(FssArgs),
    /// Ground versus first excited state crossings along a parameter range.
    Excited(RangeArgs),
    /// Majorization and Rényi dominance between two spectra.
    Locc(LoccArgs),
    /// Entropies and their parameter derivatives along a range.
    Derivative(DerivativeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Entropy(_) => "entropy",
            Command::Cross(_) => "cross",
            Command::Sweep(_) => "sweep",
            Command::Fss(_) => "fss",
            Command::Excited(_) => "excited",
            Command::Locc(_) => "locc",
            Command::Derivative(_) => "derivative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Ising,
    Xy,
    Xxz,
}

impl ModelName {
    fn as_str(self) -> &'static str {
        match self {
            ModelName::Ising => "ising",
            ModelName::Xy => "xy",
            ModelName::Xxz => "xxz",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,
    /// Transverse field (ising).
    #[arg(long)]
    pub g: Option<f64>,
    /// Anisotropy (xy).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Field (xy).
    #[arg(long)]
    pub h: Option<f64>,
    /// Anisotropy (xxz).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of sites.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Sites in block A (default: half the chain).
    #[arg(long)]
    pub block: Option<usize>,
    /// Eigensolver residual tolerance.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
}

impl ModelArgs {
    fn given(&self) -> BTreeMap<String, f64> {
        [("g", self.g), ("gamma", self.gamma), ("h", self.h), ("delta", self.delta)]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect()
    }

    /// The model with `overrides` applied; `free` names a swept parameter
    /// that may be left unset.
    pub fn spec(&self, overrides: &[(String, f64)], free: Option<&str>) -> Result<ModelSpec> {
        let name = self.model.as_str();
        let mut params = self.given();
        for (k, v) in overrides {
            params.insert(k.clone(), *v);
        }
        if let Some(p) = free {
            if !Family::parameter_names(name)?.contains(&p) {
                return Err(Error::Config(format!("model '{name}' has no parameter '{p}'")));
            }
            params.entry(p.to_string()).or_insert(0.0);
        }
        ModelSpec::new(Family::from_params(name, &params)?, self.n)
    }

    pub fn partition(&self) -> Result<Partition> {
        match self.block {
            Some(b) => Partition::new(self.n, b),
            None => Partition::equal(self.n),
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig::default().with_tol(self.tol)
    }
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    #[arg(long, default_value_t = CrossingWindow::default().alpha_min)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = CrossingWindow::default().alpha_max)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = CrossingWindow::default().grid_step)]
    pub alpha_step: f64,
    /// Bisection width for crossing orders.
    #[arg(long, default_value_t = CrossingWindow::default().refine_tol)]
    pub refine_tol: f64,
}

impl WindowArgs {
    pub fn window(&self) -> Result<CrossingWindow> {
        CrossingWindow::new(self.alpha_min, self.alpha_max, self.alpha_step, self.refine_tol)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Directory for all output files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Comma-separated `key=value` parameter overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignments(pub Vec<(String, f64)>);

fn parse_assignments(s: &str) -> std::result::Result<Assignments, String> {
    s.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got '{kv}'"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect::<std::result::Result<_, String>>()
        .map(Assignments)
}

#[derive(Debug, Args)]
pub struct CrossArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Parameter overrides for the first state, e.g. `g=0.94`.
    #[arg(long, value_parser = parse_assignments)]
    pub a: Assignments,
    /// Parameter overrides for the second state.
    #[arg(long, value_parser = parse_assignments)]
    pub b: Assignments,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Swept parameter (default: the family's only or field parameter).
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long = "from")]
    pub start: f64,
    #[arg(long = "to")]
    pub stop: f64,
    #[arg(long)]
    pub step: f64,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

impl RangeArgs {
    pub fn param(&self) -> String {
        self.param.clone().unwrap_or_else(|| default_param(self.model.model).to_string())
    }
}

pub fn default_param(model: ModelName) -> &'static str {
    match model {
        ModelName::Ising => "g",
        ModelName::Xy => "h",
        ModelName::Xxz => "delta",
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub range: RangeArgs,
    /// Refinement levels; each divides the step by ten.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
}

#[derive(Debug, Args)]
pub struct FssArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub param: Option<String>,
    /// Chain lengths, even and ascending.
    #[arg(long, value_delimiter = ',', default_values_t = ere_core::scan::DEFAULT_FSS_SIZES)]
    pub sizes: Vec<usize>,
    #[arg(long = "from", default_value_t = 0.5)]
    pub start: f64,
    #[arg(long = "to", default_value_t = 1.5)]
    pub stop: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long, default_value_t = ere_core::scan::DEFAULT_FSS_DEPTH)]
    pub refine: usize,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct LoccArgs {
    /// CSV spectrum of the source state.
    #[arg(long)]
    pub spec_a: PathBuf,
    /// CSV spectrum of the target state.
    #[arg(long)]
    pub spec_b: PathBuf,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct DerivativeArgs {
    #[command(flatten)]
    pub range: RangeArgs,
    /// Rényi orders to differentiate.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    pub alphas: Vec<f64>,
}
