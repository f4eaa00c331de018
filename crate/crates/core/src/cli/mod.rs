//! Command-line front end: argument parsing, JSON config merging, dispatch and
//! atomic output. [`run_cli`] returns the process exit status.

mod commands;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::Error;
pub use output::{write_atomic, Rendered};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "qlowdeg", version, about = "Low-degree indistinguishability experiments")]
pub struct Cli {
    /// JSON file with default values for the subcommand's fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (required, either here or in the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format [default: json].
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads. Changes speed only.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degree-k advantage of a measurement plan on an ensemble.
    Advantage(AdvantageArgs),
    /// Approximate state-design certificate.
    DesignCheck(DesignArgs),
    /// Detector power over a grid of planted-biclique instances.
    BicliquePower(PowerArgs),
    /// Fourier mass by degree against the low-degree budget.
    BicliqueMass(MassArgs),
    /// Noisy-circuit purity, reduced-state and hypothesis-test audits.
    Mitigation(MitigationArgs),
    /// Self-tests of the Haar moment engine.
    HaarVerify(HaarArgs),
    /// Registered ensembles, plans and detectors.
    List(ListArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Advantage(_) => "advantage",
            Command::DesignCheck(_) => "design-check",
            Command::BicliquePower(_) => "biclique-power",
            Command::BicliqueMass(_) => "biclique-mass",
            Command::Mitigation(_) => "mitigation",
            Command::HaarVerify(_) => "haar-verify",
            Command::List(_) => "list",
        }
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvantageArgs {
    /// Ensemble descriptor, e.g. `haar:n=1,d=2`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<String>,
    /// Plan descriptor [default: comp-basis,m=1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<String>,
    /// Degree [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Per-copy degree cap; switches to the copy-wise advantage.
    #[arg(long = "d-per-copy")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_per_copy: Option<usize>,
    /// exact | enumeration | moment | mc [default: exact].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Monte Carlo samples [default: 10000].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Bound to audit: local or copy-wise.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<String>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignArgs {
    /// Ensemble descriptor, e.g. `stabilizer:n=1`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<String>,
    /// Moment order [default: 2].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// exact | mc [default: exact].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Monte Carlo samples [default: 10000].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerArgs {
    /// Qudit counts [default: 64].
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    /// Local dimensions [default: 2].
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<usize>>,
    /// Expected planted sizes λ [default: 4,8,16,32].
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    /// Copies per instance [default: equal to n].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// edge-count | swap | scan [default: edge-count].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector: Option<String>,
    /// Trials per cell [default: 200].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Scan rows [default: 8].
    #[arg(long = "scan-t")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_t: Option<usize>,
    /// Scan columns [default: 8].
    #[arg(long = "scan-t-prime")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_t_prime: Option<usize>,
    /// Scan threshold constant [default: 0.47].
    #[arg(long = "scan-constant")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_constant: Option<f64>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassArgs {
    /// Qudits [default: 2].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Local dimension [default: 2].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Expected planted size λ [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Copies [default: n].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Largest |W| [default: 2].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// computational | random [default: computational].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<String>,
    /// Constant C in the budget [default: 8].
    #[arg(long = "budget-constant")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_constant: Option<f64>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationArgs {
    /// purity | reduced | hypothesis | all [default: all].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    /// Qubits [default: 4].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Noisy Haar blocks [default: 2].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    /// Depolarizing strength [default: 0.3].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Circuits sampled [default: 500].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Reduced-state sites [default: 0].
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<Vec<usize>>,
    /// Hypothesis-test degree [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Hypothesis-test copies [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Design error of the blocks [default: 0].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Anti-concentration slack [default: 0].
    #[arg(long = "eps-star")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_star: Option<f64>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarArgs {
    /// Local dimensions [default: 2,3].
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<usize>>,
    /// Largest centered order [default: 4].
    #[arg(long = "t-max")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<usize>,
    /// Largest derangement size [default: 4].
    #[arg(long = "w-max")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_max: Option<usize>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListArgs {
    /// Substring filter on names.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
}

/// Settings shared by every subcommand after config merging.
#[derive(Clone, Debug)]
pub struct Globals {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Failure modes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Parse(String),
    Resource(String),
    Audit(String),
    Other(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Parse(_) | Failure::Other(_) => EXIT_PARSE,
            Failure::Resource(_) => EXIT_RESOURCE,
            Failure::Audit(_) => EXIT_AUDIT,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Resource(m) | Failure::Audit(m) | Failure::Other(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceCap(_) => Failure::Resource(e.to_string()),
            Error::Parse(_) | Error::InvalidArgument(_) => Failure::Parse(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

const GLOBAL_KEYS: [&str; 5] = ["seed", "out", "format", "threads", "command"];

fn load_config(path: &std::path::Path) -> Result<Map<String, Value>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        Failure::Parse(format!("config {}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(Failure::Parse(format!("config {}: top level must be an object", path.display()))),
    }
}

/// Overlay the command-line fields on the config fields and re-validate.
fn merge<T: Serialize + DeserializeOwned>(cli: &T, config: &Map<String, Value>) -> Result<T, Failure> {
    let mut merged: Map<String, Value> =
        config.iter().filter(|(k, _)| !GLOBAL_KEYS.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
    // Config keys may use hyphens like the flags.
    merged = merged.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect();
    if let Value::Object(over) = serde_json::to_value(cli).map_err(|e| Failure::Other(e.to_string()))? {
        merged.extend(over);
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Failure::Parse(format!("config field error: {e}")))
}

fn resolve_globals(cli: &Cli, config: &Map<String, Value>) -> Result<Globals, Failure> {
    if let Some(cmd) = config.get("command") {
        if cmd.as_str() != Some(cli.command.name()) {
            return Err(Failure::Parse(format!("config field 'command' is {cmd}, but '{}' was invoked", cli.command.name())));
        }
    }
    let field = |key: &str| config.get(key).filter(|v| !v.is_null());
    let seed = match (cli.seed, field("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v.as_u64().ok_or_else(|| Failure::Parse(format!("config field 'seed' must be a u64, got {v}")))?,
        (None, None) if matches!(cli.command, Command::List(_)) => 0,
        (None, None) => return Err(Failure::Parse("missing required field 'seed' (pass --seed or set it in the config)".into())),
    };
    let out = match (&cli.out, field("out")) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(v)) => Some(PathBuf::from(
            v.as_str().ok_or_else(|| Failure::Parse(format!("config field 'out' must be a string, got {v}")))?,
        )),
        (None, None) => None,
    };
    let format = match (cli.format, field("format")) {
        (Some(f), _) => f,
        (None, Some(v)) => serde_json::from_value(v.clone())
            .map_err(|_| Failure::Parse(format!("config field 'format' must be \"csv\" or \"json\", got {v}")))?,
        (None, None) => Format::Json,
    };
    Ok(Globals { seed, out, format })
}

fn threads(cli: &Cli, config: &Map<String, Value>) -> Result<Option<usize>, Failure> {
    match (cli.threads, config.get("threads").filter(|v| !v.is_null())) {
        (Some(t), _) => Ok(Some(t)),
        (None, Some(v)) => v
            .as_u64()
            .map(|t| Some(t as usize))
            .ok_or_else(|| Failure::Parse(format!("config field 'threads' must be a positive integer, got {v}"))),
        (None, None) => Ok(None),
    }
}

fn execute(cli: &Cli, config: &Map<String, Value>) -> Result<(), Failure> {
    let globals = resolve_globals(cli, config)?;
    let rendered = match &cli.command {
        Command::Advantage(a) => commands::advantage(&merge(a, config)?, &globals),
        Command::DesignCheck(a) => commands::design_check(&merge(a, config)?, &globals),
        Command::BicliquePower(a) => commands::biclique_power(&merge(a, config)?, &globals),
        Command::BicliqueMass(a) => commands::biclique_mass(&merge(a, config)?, &globals),
        Command::Mitigation(a) => commands::mitigation(&merge(a, config)?, &globals),
        Command::HaarVerify(a) => commands::haar_verify(&merge(a, config)?, &globals),
        Command::List(a) => commands::list(&merge(a, config)?, &globals),
    }?;
    output::emit(&rendered, &globals)?;
    match rendered.audit_failure {
        Some(msg) => Err(Failure::Audit(msg)),
        None => Ok(()),
    }
}

fn run_parsed(cli: &Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(p) => load_config(p)?,
        None => Map::new(),
    };
    match threads(cli, &config)? {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Failure::Other(e.to_string()))?
            .install(|| execute(cli, &config)),
        None => execute(cli, &config),
    }
}

/// Parse `args` (including the program name) and run; returns the exit status.
pub fn run_cli<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = run_parsed(&cli);
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_prefers_command_line() {
        let mut config = Map::new();
        config.insert("k".into(), Value::from(3));
        config.insert("ensemble".into(), Value::from("haar"));
        config.insert("seed".into(), Value::from(5));
        let cli = DesignArgs { k: Some(2), ..Default::default() };
        let m = merge(&cli, &config).unwrap();
        assert_eq!(m.k, Some(2));
        assert_eq!(m.ensemble.as_deref(), Some("haar"));
    }

    #[test]
    fn unknown_config_field_names_it() {
        let mut config = Map::new();
        config.insert("kk".into(), Value::from(3));
        let err = merge(&DesignArgs::default(), &config).unwrap_err();
        assert!(err.message().contains("kk"), "{}", err.message());
        assert_eq!(err.code(), EXIT_PARSE);
    }

    #[test]
    fn seed_is_required() {
        let cli = Cli::try_parse_from(["qlowdeg", "design-check"]).unwrap();
        assert!(matches!(resolve_globals(&cli, &Map::new()), Err(Failure::Parse(_))));
        let cli = Cli::try_parse_from(["qlowdeg", "design-check", "--seed", "3"]).unwrap();
        assert_eq!(resolve_globals(&cli, &Map::new()).unwrap().seed, 3);
    }

    #[test]
    fn bad_flag_exits_one() {
        assert_eq!(run_cli(["qlowdeg", "advantage", "--no-such-flag"]), EXIT_PARSE);
    }
}
