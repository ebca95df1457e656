use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use maxstable::likelihood::log_likelihood;
use maxstable::mle::{default_init, fisher_information, fit_params, FisherMethod, FitOptions};
use maxstable::models::Model;
use maxstable::regularity::{check_structure, fit_then_verify, EnvelopeKind};
use maxstable::simulate::{simulate_streams, SimulationMethod};
use maxstable::study::{run_study, summarize, ReportFormat, StudyConfig};
use maxstable::{validate_params, Dataset, Error, ModelId, ParamVector, Parameterization, RawParams};
use serde::Serialize;

use crate::io::{dataset_csv, emit, fmt_f64, read_dataset, read_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Per-row log-densities of a CSV dataset.
    Density,
    /// Total log-likelihood of a CSV dataset.
    Loglik,
    /// Maximum likelihood fit, emitted as JSON.
    Fit,
    /// Exact draws, emitted as CSV.
    Simulate,
    /// Fisher information, by simulation or from a dataset.
    Fisher,
    /// Monte Carlo study from a JSON configuration.
    Study,
    /// Structural and envelope audit.
    Check,
}

#[derive(Debug, Parser)]
#[command(name = "maxstab", version, about = "Full-likelihood tools for multivariate max-stable models")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// logistic, dirichlet, huesler_reiss or extremal_t.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelId>,
    /// Parameter JSON (study: the study configuration).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Headered CSV, one observation per row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of draws (simulate, fisher).
    #[arg(long)]
    pub n: Option<usize>,
    /// Master seed (simulate, fisher, fit restarts; study overrides its config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Confidence level for Wald intervals.
    #[arg(long)]
    pub level: Option<f64>,
    /// Per-replication CSV table (study).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_model(s: &str) -> Result<ModelId, String> {
    s.parse::<ModelId>().map_err(|e| e.to_string())
}

#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    usage: bool,
}

impl CliError {
    pub fn usage(kind: &str, message: impl Into<String>) -> Self {
        Self { kind: kind.into(), message: message.into(), usage: true }
    }

    pub fn exit_code(&self) -> u8 {
        if self.usage {
            2
        } else {
            1
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self { kind: e.kind().into(), message: e.to_string(), usage: false }
    }
}

fn required<'a, T>(v: &'a Option<T>, flag: &str, cmd: Command) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| {
        CliError::usage("UsageError", format!("{} requires --{flag}", cmd_name(cmd)))
    })
}

fn cmd_name(cmd: Command) -> String {
    cmd.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::from(Error::Io(e.to_string())))?;
    s.push('\n');
    Ok(s)
}

/// Parameters from `--params`, checked against `--model`; without a file,
/// the model's default starting values for dimension `dim`.
fn load_params(cli: &Cli, dim: Option<usize>) -> Result<ParamVector, CliError> {
    if let Some(path) = &cli.params {
        let raw: RawParams = read_json(path)?;
        let p = validate_params(raw)?;
        if let Some(m) = cli.model {
            if m != p.model_id() {
                return Err(CliError::usage(
                    "UsageError",
                    format!("--model {m} disagrees with the parameter file ({})", p.model_id()),
                ));
            }
        }
        return Ok(p);
    }
    match (cli.model, dim) {
        (Some(m), Some(k)) => Ok(default_init(m, k)?),
        _ => Err(CliError::usage("UsageError", format!("{} requires --params", cmd_name(cli.command)))),
    }
}

fn out(cli: &Cli) -> Option<&Path> {
    cli.out.as_deref()
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::usage("UsageError", "--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::usage("UsageError", e.to_string()))?;
    }
    if let Some(l) = cli.level {
        if !(l > 0.0 && l < 1.0) {
            return Err(CliError::usage("UsageError", format!("--level {l} outside (0, 1)")));
        }
    }
    match cli.command {
        Command::Density => density(cli),
        Command::Loglik => loglik(cli),
        Command::Fit => fit(cli),
        Command::Simulate => simulate(cli),
        Command::Fisher => fisher(cli),
        Command::Study => study(cli),
        Command::Check => check(cli),
    }
}

fn density(cli: &Cli) -> Result<(), CliError> {
    let data = read_dataset(required(&cli.data, "data", cli.command)?)?;
    let p = load_params(cli, Some(data.dim()))?;
    let vals = Model::new(&p)?.log_densities(&data)?;
    let mut text = String::from("row,log_density\n");
    for (i, v) in vals.iter().enumerate() {
        text.push_str(&format!("{},{}\n", i + 1, fmt_f64(*v)));
    }
    emit(out(cli), &text)
}

#[derive(Serialize)]
struct LoglikReport {
    model: ModelId,
    params: ParamVector,
    n: usize,
    loglik: f64,
}

fn loglik(cli: &Cli) -> Result<(), CliError> {
    let data = read_dataset(required(&cli.data, "data", cli.command)?)?;
    let p = load_params(cli, Some(data.dim()))?;
    let ll = log_likelihood(&p, &data)?;
    emit(out(cli), &json(&LoglikReport { model: p.model_id(), params: p, n: data.len(), loglik: ll })?)
}

fn fit(cli: &Cli) -> Result<(), CliError> {
    let data = read_dataset(required(&cli.data, "data", cli.command)?)?;
    let init = load_params(cli, Some(data.dim()))?;
    let opts = FitOptions {
        level: cli.level.unwrap_or(0.95),
        seed: cli.seed.unwrap_or(0),
        ..FitOptions::default()
    };
    let res = fit_params(&init, &data, &opts)?;
    emit(out(cli), &json(&res)?)
}

fn simulate(cli: &Cli) -> Result<(), CliError> {
    let p = load_params(cli, None)?;
    let n = *required(&cli.n, "n", cli.command)?;
    let seed = *required(&cli.seed, "seed", cli.command)?;
    let data = simulate_streams(&Model::new(&p)?, n, seed, 0, SimulationMethod::Auto)?;
    emit(out(cli), &dataset_csv(&data))
}

fn fisher(cli: &Cli) -> Result<(), CliError> {
    let p = load_params(cli, None)?;
    let param = Parameterization::for_params(&p);
    let v = param.encode(&p)?;
    let data: Option<Dataset> = cli.data.as_deref().map(read_dataset).transpose()?;
    let method = match &data {
        Some(d) => FisherMethod::Observed { data: d, step: FitOptions::default().hessian_step },
        None => FisherMethod::OpgMonteCarlo { draws: cli.n.unwrap_or(10_000), seed: cli.seed.unwrap_or(0) },
    };
    let info = fisher_information(&param, &v, method)?;
    emit(out(cli), &json(&info)?)
}

fn study(cli: &Cli) -> Result<(), CliError> {
    let mut cfg: StudyConfig = read_json(required(&cli.params, "params", cli.command)?)?;
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(l) = cli.level {
        cfg.ci_level = l;
    }
    let res = run_study(&cfg)?;
    if let Some(path) = &cli.csv {
        emit(Some(path), &summarize(&res, ReportFormat::Csv)?)?;
    }
    let mut text = summarize(&res, ReportFormat::Json)?;
    text.push('\n');
    emit(out(cli), &text)
}

#[derive(Serialize)]
struct CheckOutput {
    structure: maxstable::regularity::RegularityReport,
    envelope: maxstable::regularity::RegularityReport,
}

fn check(cli: &Cli) -> Result<(), CliError> {
    let p = load_params(cli, None)?;
    let structure = check_structure(&p)?;
    let k = p.dim();
    let per_axis = match k {
        0..=2 => 200,
        3 => 30,
        _ => 8,
    };
    let envelope = match p.model_id() {
        ModelId::Logistic => fit_then_verify(&p, EnvelopeKind::A3, 0.25, per_axis)?,
        ModelId::HueslerReiss => fit_then_verify(&p, EnvelopeKind::A3, 0.0, per_axis)?,
        ModelId::Dirichlet | ModelId::ExtremalT => fit_then_verify(&p, EnvelopeKind::B3, 0.0, per_axis)?,
    };
    emit(out(cli), &json(&CheckOutput { structure, envelope })?)
}
