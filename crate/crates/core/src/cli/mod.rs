//! Command-line front end: every command reads one TOML configuration,
//! writes its outputs plus a `manifest.json` into `--out`, and can be
//! re-run bit-exactly from that manifest with `replay`.

mod commands;
pub mod config;
pub mod manifest;
pub mod svg;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::PipelineConfig;
pub use manifest::{derive_seed, RunManifest, MANIFEST_FILE};

use crate::domain::DomainError;
use crate::metamodel::MetaError;
use crate::mlp::MlpError;
use crate::oracle::OracleError;
use crate::polyfit::PolyfitError;
use crate::prbm::PrbmError;
use crate::shapematch::ShapeError;
use manifest::{digest_file, digest_outputs, Seeds, StageTiming, MANIFEST_FORMAT_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    /// Prefixes the message with `what` (typically a file name).
    pub fn context(self, what: impl std::fmt::Display) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{what}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{what}: {m}")),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::NoRootInBracket { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PolyfitError> for CliError {
    fn from(e: PolyfitError) -> Self {
        match e {
            PolyfitError::IllConditioned { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MlpError> for CliError {
    fn from(e: MlpError) -> Self {
        match e {
            MlpError::NonFiniteLoss { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MetaError> for CliError {
    fn from(e: MetaError) -> Self {
        match e {
            MetaError::Mlp(e) => e.into(),
            MetaError::Polyfit(e) => e.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PrbmError> for CliError {
    fn from(e: PrbmError) -> Self {
        match e {
            PrbmError::NonConvergence { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ShapeError> for CliError {
    fn from(e: ShapeError) -> Self {
        match e {
            ShapeError::AllCandidatesFailed => CliError::Numerical(e.to_string()),
            ShapeError::Simulation(e) => e.into(),
            ShapeError::Meta(e) => e.into(),
            ShapeError::Polyfit(e) => e.into(),
            ShapeError::Mlp(e) => e.into(),
            ShapeError::Oracle(e) => e.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration; every table is optional.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Root seed, overriding the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Tabular output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Input files; directories expand to the files they contain.
    #[arg(long = "input", short = 'i')]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characterize synthetic ground truths into canonical sample CSVs.
    Generate(CommonArgs),
    /// Validate external sample CSVs and re-export them canonically.
    Ingest(CommonArgs),
    /// Fit polynomial surrogates to sample CSVs.
    FitPoly(CommonArgs),
    /// Train network surrogates on sample CSVs.
    FitNn(CommonArgs),
    /// Train a meta-model on a generated family directory.
    FitMeta(CommonArgs),
    /// Simulate a chain under a sweep of tip loads.
    Simulate(CommonArgs),
    /// Optimize a segmented actuator to match a target curve.
    Shapematch(CommonArgs),
    /// Render SVG figures from command outputs.
    Report(CommonArgs),
    /// Re-run a command from its manifest and compare outputs.
    Replay {
        manifest: PathBuf,
        /// Where to write the re-run; `<manifest dir>/replay` by default.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Ingest(_) => "ingest",
            Command::FitPoly(_) => "fit-poly",
            Command::FitNn(_) => "fit-nn",
            Command::FitMeta(_) => "fit-meta",
            Command::Simulate(_) => "simulate",
            Command::Shapematch(_) => "shapematch",
            Command::Report(_) => "report",
            Command::Replay { .. } => "replay",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "prbm-surrogate", version, about = "Surrogate joint laws, chain simulation and shape matching for modular soft actuators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// State shared by a running command: resolved inputs, derived seeds,
/// stage timings and the files written so far.
pub struct RunContext {
    pub command: String,
    pub config: PipelineConfig,
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
    seeds: BTreeMap<String, u64>,
    timings: Vec<StageTiming>,
    outputs: Vec<String>,
}

impl RunContext {
    fn new(command: &str, config: PipelineConfig, inputs: Vec<PathBuf>, out: PathBuf) -> Self {
        Self { command: command.into(), config, inputs, out, seeds: BTreeMap::new(), timings: Vec::new(), outputs: Vec::new() }
    }

    /// Seed for `label`, derived from the root seed and recorded.
    pub fn seed(&mut self, label: &str) -> u64 {
        let s = derive_seed(self.config.seed, label);
        self.seeds.insert(label.to_string(), s);
        s
    }

    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        self.timings.push(StageTiming { stage: stage.into(), seconds: t.elapsed().as_secs_f64() });
        v
    }

    /// Writes `name` below the output directory and records it.
    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.out.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        self.record(name);
        Ok(())
    }

    /// Records a file some library routine already wrote.
    pub fn record(&mut self, name: &str) {
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
    }

    fn finish(self, jobs: usize) -> Result<RunManifest, CliError> {
        let inputs = self.inputs.iter().map(|p| digest_file(p)).collect::<Result<Vec<_>, _>>()?;
        let outputs = digest_outputs(&self.out, &self.outputs)?;
        let m = RunManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            command: self.command,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: self.config,
            inputs,
            outputs,
            seeds: Seeds { root: 0, stages: self.seeds },
            jobs,
            format: "csv".into(),
            timings: self.timings,
        };
        Ok(m)
    }
}

/// Files named by `inputs`, with directories expanded to their sorted
/// regular files (manifests excluded).
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.file_name().is_some_and(|n| n != MANIFEST_FILE))
                .collect();
            files.sort();
            out.extend(files);
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            return Err(CliError::Validation(format!("{}: no such input", p.display())));
        }
    }
    out.iter()
        .map(|p| fs::canonicalize(p).map_err(|e| CliError::Validation(format!("{}: {e}", p.display()))))
        .collect()
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
            PipelineConfig::from_toml(&text).map_err(|e| e.context(p.display()))
        }
    }
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs `command` with a resolved configuration and input list, writing
/// outputs and the manifest into `out`.
pub fn execute(
    command: &str,
    config: PipelineConfig,
    inputs: Vec<PathBuf>,
    out: &Path,
    jobs: usize,
) -> Result<RunManifest, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Validation(format!("{}: {e}", out.display())))?;
    let mut ctx = RunContext::new(command, config, inputs, out.to_path_buf());
    with_pool(jobs, || commands::dispatch(&mut ctx))??;
    let root = ctx.config.seed;
    let mut m = ctx.finish(jobs)?;
    m.seeds.root = root;
    m.write(out)?;
    Ok(m)
}

/// Outcome of comparing a replay with its original manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub manifest: RunManifest,
    pub mismatched: Vec<String>,
}

/// Re-runs the command recorded in `manifest_path` into `out` and lists
/// outputs whose checksum differs from the recorded one.
pub fn replay(manifest_path: &Path, out: &Path, jobs: usize) -> Result<ReplayReport, CliError> {
    let original = RunManifest::read(manifest_path)?;
    let mut inputs = Vec::with_capacity(original.inputs.len());
    for d in &original.inputs {
        let p = PathBuf::from(&d.path);
        let now = digest_file(&p)?;
        if now.sha256 != d.sha256 {
            return Err(CliError::Validation(format!("{}: checksum differs from the manifest", d.path)));
        }
        inputs.push(p);
    }
    let m = execute(&original.command, original.config.clone(), inputs, out, jobs)?;
    let mut mismatched: Vec<String> = original
        .outputs
        .iter()
        .filter(|o| !m.outputs.contains(o))
        .map(|o| o.path.clone())
        .collect();
    mismatched.extend(m.outputs.iter().filter(|o| !original.outputs.iter().any(|x| x.path == o.path)).map(|o| o.path.clone()));
    Ok(ReplayReport { manifest: m, mismatched })
}

fn run_cli(cli: Cli) -> Result<String, CliError> {
    let name = cli.command.name();
    match cli.command {
        Command::Replay { manifest, out, jobs } => {
            let out = out.unwrap_or_else(|| manifest.parent().unwrap_or(Path::new(".")).join("replay"));
            let r = replay(&manifest, &out, jobs)?;
            if r.mismatched.is_empty() {
                Ok(format!("replay: {} outputs identical", r.manifest.outputs.len()))
            } else {
                Err(CliError::Numerical(format!("replay differs in {}", r.mismatched.join(", "))))
            }
        }
        Command::Generate(a)
        | Command::Ingest(a)
        | Command::FitPoly(a)
        | Command::FitNn(a)
        | Command::FitMeta(a)
        | Command::Simulate(a)
        | Command::Shapematch(a)
        | Command::Report(a) => {
            let mut config = load_config(a.config.as_deref())?;
            if let Some(s) = a.seed {
                config.seed = s;
            }
            let inputs = expand_inputs(&a.inputs)?;
            let m = execute(name, config, inputs, &a.out, a.jobs)?;
            Ok(format!("{name}: wrote {} files and {}", m.outputs.len(), a.out.join(MANIFEST_FILE).display()))
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match run_cli(cli) {
        Ok(msg) => {
            println!("{msg}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
