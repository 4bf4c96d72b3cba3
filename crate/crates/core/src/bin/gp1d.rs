//! Command-line harness for the lattice Gross-Pitaevskii toolkit.
//!
//! Every run is reproducible: all parameters and seeds live in an
//! `ExperimentConfig` that can also be loaded from a TOML file with
//! `--config`; explicit flags override file values. Data goes to stdout or
//! `--output`; progress goes to stderr.

use clap::{Args, Parser, Subcommand, ValueEnum};
use gp1d_core::cli::{self, CliError, Command, ExperimentConfig, GeometricRange, OutputFormat};
use gp1d_core::solver::InitialState;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "gp1d", version, about = "Ground states of the 1D lattice Gross-Pitaevskii functional in Bernoulli disorder")]
struct Cli {
    /// TOML config file; flags given here override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: GP1D_THREADS env var, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path (default: stdout).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Base seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<CommandArgs>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Jsonl => OutputFormat::Jsonl,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    Auto,
    Uniform,
    Linear,
}

impl From<InitArg> for InitialState {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Auto => InitialState::Auto,
            InitArg::Uniform => InitialState::Uniform,
            InitArg::Linear => InitialState::LinearGroundState,
        }
    }
}

#[derive(Debug, Args)]
struct DisorderArgs {
    /// Probability of a zero-potential site, in (0, 1).
    #[arg(long)]
    p: Option<f64>,
    /// Barrier height b > 0.
    #[arg(long)]
    b: Option<f64>,
    /// Lattice length (fixed-length model).
    #[arg(short = 'L', long)]
    length: Option<usize>,
    /// Number of lake/barrier pairs (fixed-interval-count model).
    #[arg(short = 'n', long)]
    intervals: Option<usize>,
}

#[derive(Debug, Args)]
struct CouplingArgs {
    /// The product g*rho.
    #[arg(long = "g-rho")]
    g_rho: Option<f64>,
    /// Coupling g (requires --rho).
    #[arg(long)]
    g: Option<f64>,
    /// Density rho (requires --g).
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Tangential gradient norm threshold.
    #[arg(long)]
    tol_gradient: Option<f64>,
    /// Per-step energy decrease threshold.
    #[arg(long)]
    tol_energy: Option<f64>,
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Starting state.
    #[arg(long, value_enum)]
    init: Option<InitArg>,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Solve one realization for its ground state.
    Solve {
        #[command(flatten)]
        disorder: DisorderArgs,
        #[command(flatten)]
        coupling: CouplingArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Occupation-set thresholds epsilon (comma separated).
        #[arg(long, value_delimiter = ',')]
        epsilon: Option<Vec<f64>>,
        /// Include the state vector in the JSON output.
        #[arg(long)]
        emit_state: bool,
        /// Also write the state as a raw little-endian f64 array.
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
    /// Variational bounds and water-filling on one realization.
    Bounds {
        #[command(flatten)]
        disorder: DisorderArgs,
        #[command(flatten)]
        coupling: CouplingArgs,
        /// Mass target for the lower bound / water filling.
        #[arg(long)]
        norm_target: Option<f64>,
    },
    /// Sweep the coupling over seeded realizations.
    Sweep {
        #[command(flatten)]
        disorder: DisorderArgs,
        /// Explicit coupling list, e.g. 2e-4,2e-5,2e-6.
        #[arg(long = "g-rho", value_delimiter = ',')]
        g_rho: Option<Vec<f64>>,
        /// Geometric coupling range start:stop:factor.
        #[arg(long, value_parser = parse_range)]
        g_rho_range: Option<GeometricRange>,
        /// Seeds per coupling value.
        #[arg(long)]
        seeds: Option<u32>,
        #[arg(long)]
        norm_target: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Ground-energy statistics across lattice sizes.
    Converge {
        #[command(flatten)]
        disorder: DisorderArgs,
        #[command(flatten)]
        coupling: CouplingArgs,
        /// Lattice sizes, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        seeds: Option<u32>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Subadditivity checks of the unnormalized minima.
    Subadd {
        #[command(flatten)]
        disorder: DisorderArgs,
        #[command(flatten)]
        coupling: CouplingArgs,
        /// Number of random (realization, split) pairs.
        #[arg(long)]
        splits: Option<u32>,
        /// Fixed split site (random otherwise).
        #[arg(long)]
        split: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Sample a realization and report its lake/barrier geometry.
    Lakes {
        #[command(flatten)]
        disorder: DisorderArgs,
    },
}

fn parse_range(s: &str) -> Result<GeometricRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected start:stop:factor".into());
    }
    let parse = |t: &str| t.parse::<f64>().map_err(|e| e.to_string());
    Ok(GeometricRange {
        start: parse(parts[0])?,
        stop: parse(parts[1])?,
        factor: parse(parts[2])?,
    })
}

fn apply_disorder(config: &mut ExperimentConfig, d: DisorderArgs) {
    if let Some(p) = d.p {
        config.p = p;
    }
    if let Some(b) = d.b {
        config.b = b;
    }
    if d.length.is_some() {
        config.length = d.length;
        config.intervals = None;
    }
    if d.intervals.is_some() {
        config.intervals = d.intervals;
        if d.length.is_none() {
            config.length = None;
        }
    }
}

fn apply_coupling(config: &mut ExperimentConfig, c: CouplingArgs) {
    if c.g_rho.is_some() {
        config.g_rho = c.g_rho;
        config.g = None;
        config.rho = None;
    }
    if c.g.is_some() {
        config.g = c.g;
        config.g_rho = None;
    }
    if c.rho.is_some() {
        config.rho = c.rho;
        config.g_rho = None;
    }
}

fn apply_solver(config: &mut ExperimentConfig, s: SolverArgs) {
    if let Some(v) = s.tol_gradient {
        config.tol_gradient = v;
    }
    if let Some(v) = s.tol_energy {
        config.tol_energy = v;
    }
    if let Some(v) = s.max_iterations {
        config.max_iterations = v;
    }
    if let Some(i) = s.init {
        config.init = i.into();
    }
}

fn build_config(cli: Cli) -> Result<ExperimentConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(t) = cli.threads {
        config.threads = Some(t);
    }
    if cli.output.is_some() {
        config.output = cli.output;
    }
    if let Some(f) = cli.format {
        config.format = Some(f.into());
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }

    match cli.command {
        None => {
            if cli.config.is_none() {
                return Err(CliError::ConfigFile(
                    "no subcommand given and no --config file".into(),
                ));
            }
        }
        Some(CommandArgs::Solve {
            disorder,
            coupling,
            solver,
            epsilon,
            emit_state,
            state_out,
        }) => {
            config.command = Command::Solve;
            apply_disorder(&mut config, disorder);
            apply_coupling(&mut config, coupling);
            apply_solver(&mut config, solver);
            if let Some(eps) = epsilon {
                config.epsilon = eps;
            }
            if emit_state {
                config.emit_state = true;
            }
            if state_out.is_some() {
                config.state_out = state_out;
            }
        }
        Some(CommandArgs::Bounds {
            disorder,
            coupling,
            norm_target,
        }) => {
            config.command = Command::Bounds;
            apply_disorder(&mut config, disorder);
            apply_coupling(&mut config, coupling);
            if norm_target.is_some() {
                config.norm_target = norm_target;
            }
        }
        Some(CommandArgs::Sweep {
            disorder,
            g_rho,
            g_rho_range,
            seeds,
            norm_target,
            solver,
        }) => {
            config.command = Command::Sweep;
            apply_disorder(&mut config, disorder);
            apply_solver(&mut config, solver);
            if let Some(list) = g_rho {
                config.g_rho_list = list;
            }
            if g_rho_range.is_some() {
                config.g_rho_range = g_rho_range;
            }
            if let Some(s) = seeds {
                config.seeds = s;
            }
            if norm_target.is_some() {
                config.norm_target = norm_target;
            }
        }
        Some(CommandArgs::Converge {
            disorder,
            coupling,
            sizes,
            seeds,
            solver,
        }) => {
            config.command = Command::Converge;
            apply_disorder(&mut config, disorder);
            apply_coupling(&mut config, coupling);
            apply_solver(&mut config, solver);
            if let Some(s) = sizes {
                config.sizes = s;
            }
            if let Some(s) = seeds {
                config.seeds = s;
            }
        }
        Some(CommandArgs::Subadd {
            disorder,
            coupling,
            splits,
            split,
            solver,
        }) => {
            config.command = Command::Subadd;
            apply_disorder(&mut config, disorder);
            apply_coupling(&mut config, coupling);
            apply_solver(&mut config, solver);
            if let Some(s) = splits {
                config.splits = s;
            }
            if split.is_some() {
                config.split = split;
            }
        }
        Some(CommandArgs::Lakes { disorder }) => {
            config.command = Command::Lakes;
            apply_disorder(&mut config, disorder);
        }
    }
    Ok(config)
}

fn main() {
    let cli = Cli::parse();
    let config = match build_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("gp1d: {e}");
            std::process::exit(2);
        }
    };
    if let Err(e) = cli::run(&config) {
        eprintln!("gp1d: {e}");
        let code = match e {
            CliError::Config { .. } | CliError::ConfigFile(_) => 2,
            _ => 1,
        };
        std::process::exit(code);
    }
}
