//! Command-line front end.
//!
//! Subcommands: `worst-case`, `ratios`, `simulate`, `brute-force`,
//! `lower-bound`, plus `replay` for re-running a saved manifest.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse error, 3 invariant
//! violation, 4 resource cap.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::analysis::{self, VarianceCertificate};
use crate::error::Error;
use crate::estimators::{EstimatorSpec, Nonsequential};
use crate::format;
use crate::function_model::MonotoneFunction;
use crate::oracle::{self, ExperimentConfig, Report, SearchOptions, SearchResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_CAP: i32 = 4;

/// Agreement required between a certificate and the oracle's exact variance.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn parse(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget { .. } => EXIT_CAP,
            _ => EXIT_INVARIANT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "monoquad", version, about = "Monte Carlo integration of bounded monotone functions")]
pub struct Cli {
    /// Worker threads for replicated runs; results do not depend on it.
    #[arg(long, global = true, env = "MONOQUAD_JOBS")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct OutputArgs {
    /// Write the primary output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the run manifest (defaults to `<out>.manifest.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form worst-case variance, witness, and oracle confirmation.
    WorstCase {
        /// Estimator spec as inline JSON or `@path`.
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bound comparison table as CSV.
    Ratios {
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Replicated run of one estimator on one function.
    Simulate {
        /// Experiment config JSON file; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Estimator spec as inline JSON or `@path`.
        #[arg(long)]
        estimator: Option<String>,
        /// Function spec as inline JSON or `@path`.
        #[arg(long)]
        function: Option<String>,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exhaustive maximum of the exact variance over a discretized staircase class.
    BruteForce {
        #[arg(long)]
        spec: String,
        /// Number of staircase pieces.
        #[arg(long)]
        m: usize,
        /// Level grid resolution (levels k/g).
        #[arg(long)]
        g: usize,
        #[arg(long, default_value_t = oracle::DEFAULT_CANDIDATE_CAP)]
        cap: u64,
        /// Use coordinate ascent when the enumeration exceeds the cap.
        #[arg(long)]
        heuristic: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Empirical demonstration of the nonsequential lower bound.
    LowerBound {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 100_000)]
        replications: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Re-run a saved manifest.
    Replay {
        manifest: PathBuf,
        /// Override the recorded output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

/// A fully resolved command, as recorded in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Invocation {
    WorstCase {
        spec: EstimatorSpec,
    },
    Ratios {
        n_max: usize,
    },
    Simulate {
        config: ExperimentConfig,
        format: ReportFormat,
    },
    BruteForce {
        spec: EstimatorSpec,
        m: usize,
        g: usize,
        cap: u64,
        heuristic: bool,
    },
    LowerBound {
        spec: EstimatorSpec,
        p: f64,
        replications: usize,
        seed: u64,
    },
}

impl Invocation {
    fn seed(&self) -> Option<u64> {
        match self {
            Invocation::Simulate { config, .. } => Some(config.seed),
            Invocation::LowerBound { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Record of one run; replaying it regenerates the outputs byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub invocation: Invocation,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<PathBuf>,
    pub wall_time_secs: f64,
}

// ---------------------------------------------------------------------------
// Command bodies, callable from library code

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseOutput {
    pub certificate: VarianceCertificate,
    /// Exact variance of the rule at the witness, from the oracle.
    pub oracle_variance: f64,
    pub confirmed: bool,
}

pub fn cmd_worst_case(spec: &EstimatorSpec) -> crate::Result<WorstCaseOutput> {
    let certificate = analysis::worst_case_certificate(spec)?;
    let oracle_variance = oracle::certify(&certificate)?;
    let confirmed = (oracle_variance - certificate.worst_case_variance).abs() <= CERTIFICATE_TOLERANCE;
    Ok(WorstCaseOutput {
        certificate,
        oracle_variance,
        confirmed,
    })
}

pub fn cmd_ratios(n_max: usize) -> crate::Result<String> {
    analysis::ratio_table_csv(n_max)
}

pub fn cmd_simulate(config: &ExperimentConfig, jobs: Option<usize>) -> crate::Result<Report> {
    match jobs {
        Some(j) => oracle::run_experiment_with_jobs(config, j),
        None => oracle::run_experiment(config),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceOutput {
    #[serde(flatten)]
    pub search: SearchResult,
    /// Exact variance recomputed at the witness.
    pub witness_variance: f64,
    /// Closed-form worst case over the whole class, for comparison.
    pub closed_form: f64,
}

pub fn cmd_brute_force(spec: &EstimatorSpec, m: usize, g: usize, opts: &SearchOptions) -> crate::Result<BruteForceOutput> {
    let search = oracle::brute_force_max_variance(spec, m, g, opts)?;
    let witness_variance = oracle::exact_estimator_variance(spec, &search.witness)?;
    let closed_form = analysis::worst_case_certificate(spec)?.worst_case_variance;
    Ok(BruteForceOutput {
        search,
        witness_variance,
        closed_form,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundOutput {
    pub estimator: String,
    pub n: usize,
    pub p: f64,
    pub replications: usize,
    pub seed: u64,
    pub cell: usize,
    pub interval: (f64, f64),
    pub miss_probability: f64,
    /// `S(f1) − S(f2)`.
    pub integral_gap: f64,
    pub lp_error_f1: f64,
    pub lp_error_f2: f64,
    pub max_lp_error: f64,
    pub standard_error: f64,
    /// `(1/2)^{2+1/p} / n`.
    pub bound: f64,
    /// `max_lp_error ≥ bound − 4·SE`.
    pub pass: bool,
}

pub fn cmd_lower_bound(spec: &EstimatorSpec, p: f64, replications: usize, seed: u64) -> crate::Result<LowerBoundOutput> {
    spec.validate()?;
    let n = spec.budget();
    let bound = analysis::lower_bound_lp(n, p)?;
    let pair = analysis::adversarial_pair(n, |rng| spec.sample_points(rng), replications, seed)?;
    let e1 = oracle::empirical_lp_error(spec, &pair.f1, p, replications, seed)?;
    let e2 = oracle::empirical_lp_error(spec, &pair.f2, p, replications, seed)?;
    let worst = if e1.value >= e2.value { e1 } else { e2 };
    Ok(LowerBoundOutput {
        estimator: spec.name().to_string(),
        n,
        p,
        replications,
        seed,
        cell: pair.cell,
        interval: pair.interval,
        miss_probability: pair.miss_probability,
        integral_gap: pair.integral_gap(),
        lp_error_f1: e1.value,
        lp_error_f2: e2.value,
        max_lp_error: worst.value,
        standard_error: worst.standard_error,
        bound,
        pass: worst.value >= bound - oracle::Z_BAND * worst.standard_error,
    })
}

// ---------------------------------------------------------------------------
// Dispatch

/// Result of executing an invocation: the primary output and a human summary.
pub struct Execution {
    pub output: String,
    pub summary: Option<String>,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn worst_case_table(out: &WorstCaseOutput) -> String {
    let c = &out.certificate;
    let witness = match c.witness {
        MonotoneFunction::UnitStep { x0 } => format!("unit step at {}", format::float(x0)),
        ref other => format!("{other:?}"),
    };
    format!(
        "estimator        {}\nworst case       {}\nwitness          {}\noracle variance  {}\nconfirmed        {}\n",
        c.spec.name(),
        format::float(c.worst_case_variance),
        witness,
        format::float(out.oracle_variance),
        out.confirmed
    )
}

pub fn execute(invocation: &Invocation, jobs: Option<usize>) -> CliResult<Execution> {
    match invocation {
        Invocation::WorstCase { spec } => {
            let out = cmd_worst_case(spec)?;
            if !out.confirmed {
                return Err(CliError {
                    code: EXIT_INVARIANT,
                    message: format!(
                        "oracle variance {} disagrees with certificate {}",
                        out.oracle_variance, out.certificate.worst_case_variance
                    ),
                });
            }
            Ok(Execution {
                output: to_json(&out),
                summary: Some(worst_case_table(&out)),
            })
        }
        Invocation::Ratios { n_max } => Ok(Execution {
            output: cmd_ratios(*n_max)?,
            summary: None,
        }),
        Invocation::Simulate { config, format } => {
            let report = cmd_simulate(config, jobs)?;
            let output = match format {
                ReportFormat::Json => to_json(&report),
                ReportFormat::Csv => Report::csv_header() + &report.csv_row(),
            };
            Ok(Execution { output, summary: None })
        }
        Invocation::BruteForce {
            spec,
            m,
            g,
            cap,
            heuristic,
        } => {
            let opts = SearchOptions {
                cap: *cap,
                allow_heuristic: *heuristic,
            };
            let out = cmd_brute_force(spec, *m, *g, &opts)?;
            Ok(Execution {
                output: to_json(&out),
                summary: None,
            })
        }
        Invocation::LowerBound {
            spec,
            p,
            replications,
            seed,
        } => {
            let out = cmd_lower_bound(spec, *p, *replications, *seed)?;
            Ok(Execution {
                output: to_json(&out),
                summary: None,
            })
        }
    }
}

fn read_json_arg<T: DeserializeOwned>(what: &str, arg: &str) -> CliResult<T> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::io(Path::new(path), e))?,
        None => arg.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("invalid {what} JSON: {e}")))
}

fn resolve_simulate(
    config: Option<&Path>,
    estimator: Option<&str>,
    function: Option<&str>,
    replications: Option<usize>,
    seed: Option<u64>,
    p: Option<f64>,
) -> CliResult<ExperimentConfig> {
    let mut doc = match config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str::<serde_json::Value>(&text)
                .map_err(|e| CliError::parse(format!("invalid config JSON: {e}")))?
        }
        None => serde_json::json!({}),
    };
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| CliError::parse("config must be a JSON object"))?;
    if let Some(e) = estimator {
        obj.insert("estimator".into(), read_json_arg::<serde_json::Value>("estimator", e)?);
    }
    if let Some(f) = function {
        obj.insert("function".into(), read_json_arg::<serde_json::Value>("function", f)?);
    }
    if let Some(r) = replications {
        obj.insert("replications".into(), r.into());
    }
    if let Some(s) = seed {
        obj.insert("seed".into(), s.into());
    }
    if let Some(p) = p {
        obj.insert("p".into(), p.into());
    }
    serde_json::from_value(doc).map_err(|e| CliError::parse(format!("invalid experiment config: {e}")))
}

/// Turns parsed arguments into an invocation plus its output settings.
fn resolve(command: Command) -> CliResult<(Invocation, OutputArgs)> {
    Ok(match command {
        Command::WorstCase { spec, output } => (
            Invocation::WorstCase {
                spec: read_json_arg("estimator", &spec)?,
            },
            output,
        ),
        Command::Ratios { n_max, output } => (Invocation::Ratios { n_max }, output),
        Command::Simulate {
            config,
            estimator,
            function,
            replications,
            seed,
            p,
            format,
            output,
        } => (
            Invocation::Simulate {
                config: resolve_simulate(
                    config.as_deref(),
                    estimator.as_deref(),
                    function.as_deref(),
                    replications,
                    seed,
                    p,
                )?,
                format,
            },
            output,
        ),
        Command::BruteForce {
            spec,
            m,
            g,
            cap,
            heuristic,
            output,
        } => (
            Invocation::BruteForce {
                spec: read_json_arg("estimator", &spec)?,
                m,
                g,
                cap,
                heuristic,
            },
            output,
        ),
        Command::LowerBound {
            spec,
            p,
            replications,
            seed,
            output,
        } => (
            Invocation::LowerBound {
                spec: read_json_arg("estimator", &spec)?,
                p,
                replications,
                seed,
            },
            output,
        ),
        Command::Replay { .. } => unreachable!("replay is resolved from its manifest"),
    })
}

fn manifest_path(output: &OutputArgs) -> Option<PathBuf> {
    output.manifest.clone().or_else(|| {
        output.out.as_ref().map(|o| {
            let mut s = o.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Executes and writes outputs; returns the text destined for stdout, if any.
fn run_invocation(invocation: Invocation, output: &OutputArgs, jobs: Option<usize>) -> CliResult<(String, Option<String>)> {
    let start = Instant::now();
    let exec = execute(&invocation, jobs)?;
    let mut stdout = String::new();
    let mut outputs = Vec::new();
    match &output.out {
        Some(path) => {
            write_file(path, &exec.output)?;
            outputs.push(path.clone());
        }
        None => stdout.push_str(&exec.output),
    }
    if let Some(path) = manifest_path(output) {
        let manifest = RunManifest {
            seed: invocation.seed(),
            invocation,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs,
            wall_time_secs: start.elapsed().as_secs_f64(),
        };
        write_file(&path, &to_json(&manifest))?;
    }
    Ok((stdout, exec.summary))
}

fn run_command(cli: Cli) -> CliResult<(String, Option<String>)> {
    match cli.command {
        Command::Replay { manifest, out } => {
            let text = fs::read_to_string(&manifest).map_err(|e| CliError::io(&manifest, e))?;
            let recorded: RunManifest =
                serde_json::from_str(&text).map_err(|e| CliError::parse(format!("invalid manifest: {e}")))?;
            let output = OutputArgs {
                out: out.or_else(|| recorded.outputs.first().cloned()),
                manifest: None,
            };
            run_invocation(recorded.invocation, &output, cli.jobs)
        }
        command => {
            let (invocation, output) = resolve(command)?;
            run_invocation(invocation, &output, cli.jobs)
        }
    }
}

/// Parses `args` and runs the command, writing to stdout/stderr.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_command(cli) {
        Ok((stdout, summary)) => {
            if let Some(s) = summary {
                eprint!("{s}");
            }
            print!("{stdout}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_case_examples() {
        let lhs = EstimatorSpec::Stratified(analysis::optimal_strata(4).unwrap());
        assert_eq!(cmd_worst_case(&lhs).unwrap().certificate.worst_case_variance, 0.015625);
        let mc = cmd_worst_case(&EstimatorSpec::SimpleMc { n: 1 }).unwrap();
        assert_eq!(mc.certificate.worst_case_variance, 0.25);
        assert!(mc.confirmed);
        let cv = cmd_worst_case(&EstimatorSpec::ControlVariate { n: 2 }).unwrap();
        assert!((cv.certificate.worst_case_variance - 0.041_666_666_666_666_664).abs() < 1e-18);
        assert!(cmd_worst_case(&EstimatorSpec::Trapezoid { n: 2 }).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::Budget { candidates: 5, cap: 1 }).code, EXIT_CAP);
        assert_eq!(CliError::from(Error::InvalidConfig("x".into())).code, EXIT_INVARIANT);
        let e = read_json_arg::<EstimatorSpec>("estimator", r#"{"kind":"nope","n":1}"#).unwrap_err();
        assert_eq!(e.code, EXIT_PARSE);
    }

    #[test]
    fn flags_override_config_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(
            &path,
            r#"{"estimator":{"kind":"simple_mc","n":3},"function":{"kind":"unit_step","x0":0.5},"replications":10,"seed":4}"#,
        )
        .unwrap();
        let cfg = resolve_simulate(Some(&path), Some(r#"{"kind":"control_variate","n":5}"#), None, Some(20), None, None)
            .unwrap();
        assert_eq!(cfg.estimator, EstimatorSpec::ControlVariate { n: 5 });
        assert_eq!(cfg.replications, 20);
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.p, 2.0);
    }

    #[test]
    fn lower_bound_single_point_l1() {
        let out = cmd_lower_bound(&EstimatorSpec::SimpleMc { n: 1 }, 1.0, 10_000, 0).unwrap();
        assert_eq!(out.bound, 0.125);
        assert!(out.pass);
        assert!((out.integral_gap - 0.5).abs() < 1e-15);
    }

    #[test]
    fn manifest_path_defaults_next_to_output() {
        let o = OutputArgs {
            out: Some(PathBuf::from("/tmp/r.csv")),
            manifest: None,
        };
        assert_eq!(manifest_path(&o), Some(PathBuf::from("/tmp/r.csv.manifest.json")));
        assert_eq!(manifest_path(&OutputArgs::default()), None);
    }
}
