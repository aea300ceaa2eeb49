//! Reproducible experiments over the `smb-core` estimators.
//!
//! Every subcommand writes plot-ready CSV (or JSON) to a single output file or
//! stdout. All randomness flows from `--seed` and `--replicas`, so identical
//! invocations produce byte-identical output.

mod args;
mod io;
mod summarize;

pub use args::{Cli, CommandArgs};
pub use io::{read_sequences, write_packed, InputFormat};
pub use summarize::{summarize, Summary, SummaryRow};

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use smb_core::complexity::{deficiency_trace, dim_estimates, Coder, DEFICIENCY_CSV_HEADER};
use smb_core::entropy::entropy_rate_table;
use smb_core::measures::{
    check_shift_invariance, correlation_cesaro, correlation_cesaro_mc, ergodicity_verdict, parse_model_file,
};
use smb_core::report::{geometric_grid, REPORT_CSV_HEADER};
use smb_core::smb::{fk_profile, log_prob_rate_ensemble};
use smb_core::{BinaryWord, MeasureModel, SampleRun};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    InvalidModelFile(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("{0}")]
    BudgetExceeded(String),
    #[error("{0}")]
    SchemaMismatch(String),
    #[error("{path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(smb_core::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::InvalidModelFile(_) => "InvalidModelFile",
            CliError::InvalidArgument(_) => "InvalidArgument",
            CliError::BudgetExceeded(_) => "BudgetExceeded",
            CliError::SchemaMismatch(_) => "SchemaMismatch",
            CliError::IoFailure { .. } => "IoFailure",
            CliError::Core(_) => "ComputationError",
        }
    }

    /// 2 for validation failures, 3 for exceeded budgets, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidModelFile(_) | CliError::InvalidArgument(_) | CliError::SchemaMismatch(_) => 2,
            CliError::BudgetExceeded(_) => 3,
            CliError::IoFailure { .. } | CliError::Core(_) => 1,
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }

    fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::IoFailure {
            path: path.into(),
            source,
        }
    }
}

impl From<smb_core::Error> for CliError {
    fn from(e: smb_core::Error) -> Self {
        match e {
            smb_core::Error::BudgetExceeded { .. } => CliError::BudgetExceeded(e.to_string()),
            smb_core::Error::InvalidModel(m) => CliError::InvalidModelFile(m),
            smb_core::Error::InvalidArgument(m) => CliError::InvalidArgument(m),
            other => CliError::Core(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `start:factor:count`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub start: usize,
    pub factor: f64,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            start: 256,
            factor: 2.0,
            count: 10,
        }
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, factor, count] = parts[..] else {
            return Err(format!("grid {s:?} is not start:factor:count"));
        };
        let start: usize = start.parse().map_err(|_| format!("bad grid start {start:?}"))?;
        let factor: f64 = factor.parse().map_err(|_| format!("bad grid factor {factor:?}"))?;
        let count: usize = count.parse().map_err(|_| format!("bad grid count {count:?}"))?;
        if start == 0 || factor <= 1.0 || count == 0 {
            return Err(format!("grid {s:?} needs start ≥ 1, factor > 1, count ≥ 1"));
        }
        Ok(GridSpec { start, factor, count })
    }
}

impl GridSpec {
    /// Grid points not exceeding `n`, with `n` itself appended.
    pub fn points_to(&self, n: usize) -> Vec<usize> {
        let mut pts: Vec<usize> = geometric_grid(self.start, self.factor, self.count)
            .into_iter()
            .filter(|&p| p < n)
            .collect();
        if n > 0 {
            pts.push(n);
        }
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoderKind {
    Lz78,
    Ideal,
}

/// Command-specific settings.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Sample {
        packed: bool,
    },
    Entropy,
    SmbReport,
    Fk {
        k: usize,
    },
    Dimension {
        coder: CoderKind,
        tail: f64,
        input: Option<InputSpec>,
    },
    Deficiency {
        input: Option<InputSpec>,
    },
    Invariance {
        depth: usize,
        tol: f64,
    },
    Correlation {
        u: BinaryWord,
        v: BinaryWord,
        mc_samples: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub path: PathBuf,
    pub format: InputFormat,
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model_file: Option<PathBuf>,
    pub command: Command,
    pub n: usize,
    pub seed: u64,
    pub replicas: u64,
    pub grid: GridSpec,
    pub output: Option<PathBuf>,
    pub format: Format,
}

fn load_model(config: &ExperimentConfig) -> Result<MeasureModel, CliError> {
    let path = config
        .model_file
        .as_ref()
        .ok_or_else(|| CliError::InvalidArgument("--model is required for this command".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    parse_model_file(&text).map_err(|e| match e {
        smb_core::Error::InvalidModel(m) => CliError::InvalidModelFile(format!("{}: {m}", path.display())),
        other => other.into(),
    })
}

fn sequences(
    config: &ExperimentConfig,
    model: Option<&MeasureModel>,
    input: &Option<InputSpec>,
) -> Result<Vec<BinaryWord>, CliError> {
    if let Some(spec) = input {
        let bytes = std::fs::read(&spec.path).map_err(|e| CliError::io(spec.path.display().to_string(), e))?;
        let seqs = read_sequences(&bytes, spec.format)?;
        if seqs.is_empty() {
            return Err(CliError::InvalidArgument(format!(
                "{} holds no sequences",
                spec.path.display()
            )));
        }
        return Ok(seqs);
    }
    let model = model.ok_or_else(|| CliError::InvalidArgument("need --model or --input".into()))?;
    sample_all(model, config)
}

fn sample_all(model: &MeasureModel, config: &ExperimentConfig) -> Result<Vec<BinaryWord>, CliError> {
    smb_core::montecarlo::try_fan_out(config.replicas, |r| {
        SampleRun::new(model, config.n, config.seed, r).sample()
    })
    .map_err(CliError::from)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Runs one experiment and returns the bytes it writes.
pub fn render(config: &ExperimentConfig) -> Result<Vec<u8>, CliError> {
    let json = config.format == Format::Json;
    let text = match &config.command {
        Command::Sample { packed } => {
            let model = load_model(config)?;
            let seqs = sample_all(&model, config)?;
            if *packed {
                let mut out = Vec::new();
                for s in &seqs {
                    write_packed(&mut out, s);
                }
                return Ok(out);
            }
            if json {
                let rows: Vec<_> = seqs
                    .iter()
                    .enumerate()
                    .map(|(r, s)| serde_json::json!({"replica": r, "bits": String::from(s.clone())}))
                    .collect();
                to_json(&rows)
            } else {
                seqs.iter().map(|s| format!("{}\n", String::from(s.clone()))).collect()
            }
        }
        Command::Entropy => {
            let model = load_model(config)?;
            let table = entropy_rate_table(&model, config.n)?;
            if json {
                to_json(&table)
            } else {
                table.to_csv()
            }
        }
        Command::SmbReport => {
            let model = load_model(config)?;
            let grid = config.grid.points_to(config.n);
            let mut reports = log_prob_rate_ensemble(&model, &grid, config.replicas, config.seed)?;
            for r in &mut reports {
                r.meta.replicas = Some(config.replicas as usize);
            }
            if json {
                to_json(&reports)
            } else {
                let mut out = format!("{REPORT_CSV_HEADER}\n");
                reports.iter().for_each(|r| out.push_str(&r.csv_rows()));
                out
            }
        }
        Command::Fk { k } => {
            let model = load_model(config)?;
            let n = config.n.max(k + 1);
            let seqs = smb_core::montecarlo::try_fan_out(config.replicas, |r| {
                SampleRun::new(&model, n, config.seed, r).sample()
            })?;
            let profiles = seqs
                .iter()
                .map(|x| fk_profile(&model, x, *k))
                .collect::<Result<Vec<_>, _>>()?;
            if json {
                to_json(&profiles)
            } else {
                let mut out = String::from("k,f_k\n");
                for p in &profiles {
                    for (i, v) in p.values.iter().enumerate() {
                        let _ = writeln!(out, "{i},{v}");
                    }
                }
                out
            }
        }
        Command::Dimension { coder, tail, input } => {
            let needs_model = *coder == CoderKind::Ideal || input.is_none();
            let model = if needs_model { Some(load_model(config)?) } else { None };
            let seqs = sequences(config, model.as_ref(), input)?;
            let estimates = seqs
                .iter()
                .map(|x| {
                    let c = match coder {
                        CoderKind::Lz78 => Coder::Lz78,
                        CoderKind::Ideal => Coder::Ideal(model.as_ref().expect("ideal coder loads a model")),
                    };
                    dim_estimates(x, c, &config.grid.points_to(config.n_or(x.len())), *tail)
                })
                .collect::<Result<Vec<_>, _>>()?;
            if json {
                to_json(&estimates)
            } else {
                let mut out = String::from("n,rate\n");
                for e in &estimates {
                    out.push_str(e.to_csv().split_once('\n').map_or("", |(_, rows)| rows));
                }
                out
            }
        }
        Command::Deficiency { input } => {
            let model = load_model(config)?;
            let seqs = sequences(config, Some(&model), input)?;
            let traces = seqs
                .iter()
                .map(|x| deficiency_trace(&model, x, &config.grid.points_to(config.n_or(x.len()))))
                .collect::<Result<Vec<_>, _>>()?;
            if json {
                to_json(&traces)
            } else {
                let mut out = format!("{DEFICIENCY_CSV_HEADER}\n");
                for t in &traces {
                    out.push_str(t.to_csv().split_once('\n').map_or("", |(_, rows)| rows));
                }
                out
            }
        }
        Command::Invariance { depth, tol } => {
            let model = load_model(config)?;
            let report = check_shift_invariance(&model, *depth, *tol)?;
            if json {
                to_json(&report)
            } else {
                let word = |w: &Option<BinaryWord>| w.as_ref().map_or("none".to_string(), |w| w.to_string());
                format!(
                    "check,passed,items_checked,worst_violation,worst_word,first_failure,warnings\n{},{},{},{},{},{},{}\n",
                    report.check,
                    report.passed,
                    report.items_checked,
                    report.worst_violation,
                    word(&report.worst_word),
                    word(&report.first_failure),
                    report.warnings.join("; ")
                )
            }
        }
        Command::Correlation { u, v, mc_samples } => {
            let model = load_model(config)?;
            let report = match mc_samples {
                Some(s) => correlation_cesaro_mc(&model, u, v, config.n, *s, config.seed)?,
                None => correlation_cesaro(&model, u, v, config.n),
            };
            if json {
                to_json(&serde_json::json!({
                    "report": report,
                    "verdict": ergodicity_verdict(&report, 0.01),
                }))
            } else {
                report.to_csv()
            }
        }
    };
    Ok(text.into_bytes())
}

impl ExperimentConfig {
    /// Prefix length to analyse in a sequence of length `len`; `n == 0` means all of it.
    fn n_or(&self, len: usize) -> usize {
        if self.n == 0 {
            len
        } else {
            self.n.min(len)
        }
    }
}

/// Runs the experiment and writes its output to `--out` or stdout.
pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    let bytes = render(config)?;
    match &config.output {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| CliError::io(path.display().to_string(), e)),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}
