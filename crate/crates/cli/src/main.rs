//! `covgen` — coverage-guided test-case generation for C programs.
//!
//! Subcommands: `metrics` (static source features), `optimize` (equivalence-
//! verified minification), `prompts dump` (render the template library),
//! `generate` (the full two-stage pipeline against a real or synthetic
//! coverage backend), and `simulate` (fully offline run: synthetic coverage
//! plus scripted LLM).
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime failure.

mod config;

use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::Stdio;

use clap::{Parser, Subcommand, ValueEnum};
use covgen_core::coverage::gcov::{GcovHarness, ToolchainConfig};
use covgen_core::coverage::synthetic::{SyntheticHarness, SyntheticProgram};
use covgen_core::coverage::CoverageBackend;
use covgen_core::engine::{self, EngineError, RunConfig, RunContext};
use covgen_core::llm::http::HttpBackend;
use covgen_core::llm::mock::{MockBackend, MockScript};
use covgen_core::llm::LlmClient;
use covgen_core::mdp::Language;
use covgen_core::metrics::analyze;
use covgen_core::ppo::TrainerConfig;
use covgen_core::prompts::{build_prompt, reference_request, templates};
use covgen_core::stage1::{self, StageOneOptions};

use config::{AppConfig, FlagOverrides};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, missing files, malformed config — nothing ran. Exit 1.
    Validation(String),
    /// The pipeline itself failed: compile error, backend fault, transport
    /// failure, artifact write. Exit 2.
    Runtime(String),
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> CliError {
        match e {
            EngineError::Config(msg) => CliError::Validation(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "covgen",
    version,
    about = "Coverage-guided test-case generation for C programs",
    propagate_version = true
)]
struct Cli {
    /// Config file (TOML, or JSON with a .json extension); flags and COVGEN_*
    /// environment variables override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Validate the configuration and all inputs, then exit without running
    /// anything or writing any file.
    #[arg(long, global = true)]
    dry_run: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print static source metrics (loc, functions, branches, loops,
    /// cyclomatic) as a JSON object.
    Metrics {
        /// C source file.
        file: PathBuf,
    },
    /// Minify a C program function-by-function, keeping only
    /// equivalence-verified rewrites, and report per-fragment outcomes.
    Optimize {
        /// C source file.
        file: PathBuf,
        /// Where the minified program is written.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Scripted LLM replies (JSON) instead of a live endpoint.
        #[arg(long, value_name = "FILE")]
        mock: Option<PathBuf>,
    },
    /// Prompt-template utilities.
    Prompts {
        #[command(subcommand)]
        action: PromptsAction,
    },
    /// Run the two-stage pipeline: optional minification, then PPO-guided
    /// test generation against the program's coverage.
    Generate {
        /// C source file under test.
        file: PathBuf,
        /// Episode budget.
        #[arg(long, value_name = "N")]
        episodes: Option<usize>,
        /// Tests requested per episode.
        #[arg(long, value_name = "N")]
        batch_size: Option<usize>,
        /// Seed for policy init, action sampling, and Stage-I inputs.
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        /// Skip the minification pass.
        #[arg(long)]
        no_optimize: bool,
        /// Scripted LLM replies (JSON) instead of a live endpoint.
        #[arg(long, value_name = "FILE")]
        mock: Option<PathBuf>,
        /// Synthetic coverage oracle (JSON) instead of compiling and running
        /// the program.
        #[arg(long, value_name = "FILE")]
        synthetic: Option<PathBuf>,
        /// Artifact directory (tests.json, episodes.jsonl, summary.json, ...).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run the pipeline fully offline: synthetic coverage oracle plus
    /// scripted LLM. No compiler, no network.
    Simulate {
        /// Synthetic program description (JSON).
        #[arg(long, value_name = "FILE")]
        synthetic: PathBuf,
        /// Scripted LLM replies (JSON).
        #[arg(long, value_name = "FILE")]
        mock: PathBuf,
        /// Episode budget.
        #[arg(long, value_name = "N")]
        episodes: Option<usize>,
        /// Tests requested per episode.
        #[arg(long, value_name = "N")]
        batch_size: Option<usize>,
        /// Seed for policy init and action sampling.
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        /// Language flag fed to the state encoding.
        #[arg(long, value_enum, default_value_t = LanguageArg::C)]
        language: LanguageArg,
        /// Artifact directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PromptsAction {
    /// Render all eight templates for the reference request: to stdout as a
    /// JSON object, or as one .txt per template under --out.
    Dump {
        /// Directory for the rendered .txt files.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LanguageArg {
    C,
    Python,
    Cpp,
}

impl From<LanguageArg> for Language {
    fn from(lang: LanguageArg) -> Language {
        match lang {
            LanguageArg::C => Language::C,
            LanguageArg::Python => Language::Python,
            LanguageArg::Cpp => Language::Cpp,
        }
    }
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version surface as parse "errors" but are success.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let dry_run = cli.dry_run;
    match cli.command {
        Command::Metrics { file } => cmd_metrics(&file, dry_run),
        Command::Optimize { file, out, mock } => {
            cmd_optimize(cli.config.as_deref(), &file, &out, mock.as_deref(), dry_run)
        }
        Command::Prompts { action: PromptsAction::Dump { out } } => {
            cmd_prompts_dump(out.as_deref(), dry_run)
        }
        Command::Generate {
            file,
            episodes,
            batch_size,
            seed,
            no_optimize,
            mock,
            synthetic,
            out,
        } => cmd_generate(GenerateArgs {
            config_path: cli.config,
            file,
            flags: FlagOverrides { episodes, batch_size, seed },
            no_optimize,
            mock,
            synthetic,
            out,
            dry_run,
        }),
        Command::Simulate { synthetic, mock, episodes, batch_size, seed, language, out } => {
            cmd_simulate(SimulateArgs {
                config_path: cli.config,
                synthetic,
                mock,
                flags: FlagOverrides { episodes, batch_size, seed },
                language: language.into(),
                out,
                dry_run,
            })
        }
    }
}

/// Reads a source file as UTF-8, falling back to Latin-1 (every byte maps to
/// the code point of the same value) so legacy-encoded C files still scan.
fn read_source(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => {
            CliError::Validation(format!("file not found: {}", path.display()))
        }
        _ => CliError::Validation(format!("cannot read {}: {e}", path.display())),
    })?;
    Ok(match String::from_utf8(bytes) {
        Ok(text) => text,
        Err(e) => e.into_bytes().iter().map(|&b| b as char).collect(),
    })
}

fn load_mock(path: &Path) -> Result<MockScript, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read mock script {}: {e}", path.display()))
    })?;
    MockScript::from_json(&text)
        .map_err(|e| CliError::Validation(format!("mock script {}: {e}", path.display())))
}

fn load_synthetic(path: &Path) -> Result<SyntheticProgram, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read synthetic program {}: {e}", path.display()))
    })?;
    SyntheticProgram::from_json(&text)
        .map_err(|e| CliError::Validation(format!("synthetic program {}: {e}", path.display())))
}

/// Builds the LLM client: the scripted mock when given, otherwise the HTTP
/// backend (which must then have an endpoint configured).
fn build_llm(config: &AppConfig, mock: Option<MockScript>) -> Result<LlmClient, CliError> {
    match mock {
        Some(script) => Ok(LlmClient::Mock(MockBackend::new(script))),
        None => {
            config.require_llm_endpoint()?;
            Ok(LlmClient::Http(HttpBackend::new(config.llm.clone())))
        }
    }
}

/// Probes whether the configured compiler runs at all; Stage-I verification
/// downgrades to the advisory self-check when it does not.
fn toolchain_if_available(toolchain: &ToolchainConfig) -> Option<ToolchainConfig> {
    let found = std::process::Command::new(&toolchain.compiler)
        .arg("--version")
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .map(|status| status.success())
        .unwrap_or(false);
    found.then(|| toolchain.clone())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serialize output: {e}")))?;
    let mut stdout = io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.write_all(b"\n"))
        .map_err(|e| CliError::Runtime(format!("write stdout: {e}")))
}

fn print_dry_run(command: &str) -> Result<(), CliError> {
    print_json(&serde_json::json!({ "dry_run": true, "command": command, "valid": true }))
}

fn cmd_metrics(file: &Path, dry_run: bool) -> Result<(), CliError> {
    let source = read_source(file)?;
    if dry_run {
        return print_dry_run("metrics");
    }
    print_json(&analyze(&source))
}

fn cmd_optimize(
    config_path: Option<&Path>,
    file: &Path,
    out: &Path,
    mock: Option<&Path>,
    dry_run: bool,
) -> Result<(), CliError> {
    let config = AppConfig::resolve(config_path, FlagOverrides::default())?;
    let source = read_source(file)?;
    let script = mock.map(load_mock).transpose()?;
    let mut llm = build_llm(&config, script)?;
    if dry_run {
        return print_dry_run("optimize");
    }

    let scratch = tempfile::TempDir::with_prefix("covgen-stage1-")
        .map_err(|e| CliError::Runtime(format!("create scratch dir: {e}")))?;
    let options = StageOneOptions {
        toolchain: toolchain_if_available(&config.toolchain),
        seed: config.seed,
        workdir: scratch.path().to_path_buf(),
    };
    let (assembled, report) = stage1::optimize_program(&source, &mut llm, &options)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    fs::write(out, &assembled)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", out.display())))?;
    print_json(&report)
}

fn cmd_prompts_dump(out: Option<&Path>, dry_run: bool) -> Result<(), CliError> {
    if dry_run {
        return print_dry_run("prompts dump");
    }
    let rendered: Vec<(&str, String)> = templates()
        .iter()
        .map(|t| (t.name, build_prompt(&reference_request(t))))
        .collect();
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Runtime(format!("create {}: {e}", dir.display())))?;
            for (name, text) in &rendered {
                let path = dir.join(format!("{}.txt", name.to_lowercase()));
                fs::write(&path, text)
                    .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))?;
            }
            Ok(())
        }
        None => {
            let object: serde_json::Map<String, serde_json::Value> = rendered
                .into_iter()
                .map(|(name, text)| (name.to_string(), serde_json::Value::String(text)))
                .collect();
            print_json(&object)
        }
    }
}

struct GenerateArgs {
    config_path: Option<PathBuf>,
    file: PathBuf,
    flags: FlagOverrides,
    no_optimize: bool,
    mock: Option<PathBuf>,
    synthetic: Option<PathBuf>,
    out: Option<PathBuf>,
    dry_run: bool,
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let config = AppConfig::resolve(args.config_path.as_deref(), args.flags)?;
    let source = read_source(&args.file)?;
    let script = args.mock.as_deref().map(load_mock).transpose()?;
    let synthetic = args.synthetic.as_deref().map(load_synthetic).transpose()?;
    let mut llm = build_llm(&config, script)?;
    if args.dry_run {
        return print_dry_run("generate");
    }

    let run_config = RunConfig {
        horizon: config.episodes,
        batch_size: config.batch_size,
        seed: config.seed,
        stage1_enabled: !args.no_optimize,
        language: Language::C,
        trainer: TrainerConfig::default(),
        output_dir: args.out.clone(),
    };

    // Coverage is always measured on the user's program as written; Stage I
    // output only feeds the prompts (its equivalence guarantee keeps the
    // suite valid for the original).
    let scratch = tempfile::TempDir::with_prefix("covgen-gcov-")
        .map_err(|e| CliError::Runtime(format!("create scratch dir: {e}")))?;
    let mut backend: Box<dyn CoverageBackend> = match synthetic {
        Some(program) => Box::new(
            SyntheticHarness::new(program).map_err(|e| CliError::Validation(e.to_string()))?,
        ),
        None => Box::new(
            GcovHarness::build_from_source(&source, scratch.path(), config.toolchain.clone())
                .map_err(|e| CliError::Runtime(e.to_string()))?,
        ),
    };

    let report = engine::run(
        &run_config,
        RunContext {
            source: Some(&source),
            metrics: analyze(&source),
            llm: &mut llm,
            backend: backend.as_mut(),
            stage1_toolchain: toolchain_if_available(&config.toolchain),
        },
    )?;
    print_json(&report.summary)
}

struct SimulateArgs {
    config_path: Option<PathBuf>,
    synthetic: PathBuf,
    mock: PathBuf,
    flags: FlagOverrides,
    language: Language,
    out: Option<PathBuf>,
    dry_run: bool,
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let config = AppConfig::resolve(args.config_path.as_deref(), args.flags)?;
    let program = load_synthetic(&args.synthetic)?;
    let script = load_mock(&args.mock)?;
    if args.dry_run {
        return print_dry_run("simulate");
    }

    let run_config = RunConfig {
        horizon: config.episodes,
        batch_size: config.batch_size,
        seed: config.seed,
        stage1_enabled: false,
        language: args.language,
        trainer: TrainerConfig::default(),
        output_dir: args.out.clone(),
    };
    let metrics = program.metrics_or_derived();
    let mut backend =
        SyntheticHarness::new(program).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut llm = LlmClient::Mock(MockBackend::new(script));

    let report = engine::run(
        &run_config,
        RunContext {
            source: None,
            metrics,
            llm: &mut llm,
            backend: &mut backend,
            stage1_toolchain: None,
        },
    )?;
    print_json(&report.summary)
}
