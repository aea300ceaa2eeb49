//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use smb_core::BinaryWord;

use crate::{CliError, CoderKind, Command, ExperimentConfig, Format, GridSpec, InputFormat, InputSpec};

#[derive(Debug, Parser)]
#[command(
    name = "smb-lab",
    version,
    about = "Seeded convergence experiments for stationary binary measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Model file (JSON).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Sequence length, block length or horizon, depending on the command.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub replicas: u64,
    /// Geometric n-grid as start:factor:count; points above --n are dropped and --n is appended.
    #[arg(long, global = true, default_value = "256:2:10")]
    pub grid: GridSpec,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Sequence file (ASCII 0/1 lines or packed frames); sampled from --model when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub input_format: InputFormat,
}

impl InputArgs {
    fn spec(&self) -> Option<InputSpec> {
        self.input.clone().map(|path| InputSpec {
            path,
            format: self.input_format,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Draw seeded sample paths.
    Sample {
        /// Packed binary frames instead of ASCII lines.
        #[arg(long)]
        packed: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Exact block entropies H_0..H_n.
    Entropy {
        #[command(flatten)]
        common: Common,
    },
    /// Per-replica -log2 μ[x↾n]/n against the entropy rate.
    SmbReport {
        #[command(flatten)]
        common: Common,
    },
    /// Conditional information f_0..f_K along sampled paths.
    Fk {
        #[arg(long, default_value_t = 64)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Running code-length rates and their tail min/max.
    Dimension {
        #[arg(long, value_enum, default_value_t = CoderKind::Lz78)]
        coder: CoderKind,
        /// Fraction of the grid used for the tail estimates.
        #[arg(long, default_value_t = 0.5)]
        tail: f64,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Ideal minus LZ78 code length along the grid.
    Deficiency {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Kolmogorov consistency check over all words up to --depth.
    Invariance {
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Cesàro averages of μ([u] ∩ T^-j[v]).
    Correlation {
        #[arg(long)]
        u: BinaryWord,
        #[arg(long)]
        v: BinaryWord,
        /// Monte Carlo sample count; exact when absent.
        #[arg(long)]
        mc_samples: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Aggregate report CSVs into per-n mean, standard error and pass fraction.
    Summarize {
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        #[arg(long, default_value_t = 0.95)]
        min_pass_fraction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config(common: &Common, command: Command, default_n: usize) -> Result<ExperimentConfig, CliError> {
    if common.replicas == 0 {
        return Err(CliError::InvalidArgument("--replicas must be at least 1".into()));
    }
    Ok(ExperimentConfig {
        model_file: common.model.clone(),
        command,
        n: common.n.unwrap_or(default_n),
        seed: common.seed,
        replicas: common.replicas,
        grid: common.grid,
        output: common.out.clone(),
        format: common.format,
    })
}

impl CommandArgs {
    /// The experiment this invocation describes; `None` for `summarize`.
    pub fn experiment(&self) -> Result<Option<ExperimentConfig>, CliError> {
        let cfg = match self {
            CommandArgs::Sample { packed, common } => config(common, Command::Sample { packed: *packed }, 1024)?,
            CommandArgs::Entropy { common } => config(common, Command::Entropy, 16)?,
            CommandArgs::SmbReport { common } => config(common, Command::SmbReport, 65_536)?,
            CommandArgs::Fk { k, common } => config(common, Command::Fk { k: *k }, 0)?,
            CommandArgs::Dimension {
                coder,
                tail,
                input,
                common,
            } => {
                if !(*tail > 0.0 && *tail <= 1.0) {
                    return Err(CliError::InvalidArgument(format!("--tail {tail} is outside (0, 1]")));
                }
                let default_n = if input.input.is_some() { 0 } else { 65_536 };
                let command = Command::Dimension {
                    coder: *coder,
                    tail: *tail,
                    input: input.spec(),
                };
                config(common, command, default_n)?
            }
            CommandArgs::Deficiency { input, common } => {
                let default_n = if input.input.is_some() { 0 } else { 4096 };
                config(common, Command::Deficiency { input: input.spec() }, default_n)?
            }
            CommandArgs::Invariance { depth, tol, common } => config(
                common,
                Command::Invariance {
                    depth: *depth,
                    tol: *tol,
                },
                0,
            )?,
            CommandArgs::Correlation {
                u,
                v,
                mc_samples,
                common,
            } => config(
                common,
                Command::Correlation {
                    u: u.clone(),
                    v: v.clone(),
                    mc_samples: *mc_samples,
                },
                64,
            )?,
            CommandArgs::Summarize { .. } => return Ok(None),
        };
        Ok(Some(cfg))
    }
}
