//! Layered run configuration: command-line flags override `COVGEN_*`
//! environment variables, which override the config file, which overrides
//! built-in defaults. Every numeric setting is validated after merging, before
//! any work starts.

use std::path::Path;
use std::time::Duration;

use covgen_core::coverage::gcov::ToolchainConfig;
use covgen_core::llm::http::HttpLlmConfig;
use serde::Deserialize;

use crate::CliError;

/// Fully merged settings for one invocation.
#[derive(Debug, Clone)]
pub struct AppConfig {
    pub episodes: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub llm: HttpLlmConfig,
    pub toolchain: ToolchainConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            episodes: 30,
            batch_size: 10,
            seed: 0,
            llm: HttpLlmConfig::default(),
            toolchain: ToolchainConfig::default(),
        }
    }
}

/// The config file's schema. Everything is optional; unknown fields are
/// rejected so typos fail loudly instead of silently using a default.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub run: RunSection,
    pub llm: LlmSection,
    pub toolchain: ToolchainSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub episodes: Option<usize>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSection {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub timeout_secs: Option<u64>,
    pub max_retries: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolchainSection {
    pub compiler: Option<String>,
    pub gcov_tool: Option<String>,
    pub extra_flags: Option<Vec<String>>,
    pub timeout_per_test_secs: Option<u64>,
}

/// Settings a subcommand's own flags may override (highest precedence).
#[derive(Debug, Default, Clone, Copy)]
pub struct FlagOverrides {
    pub episodes: Option<usize>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
}

impl FileConfig {
    /// Parses a config file as JSON when the extension is `.json`, TOML
    /// otherwise.
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let is_json = path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| {
                CliError::Validation(format!("config {}: {e}", path.display()))
            })
        } else {
            toml::from_str(&text).map_err(|e| {
                CliError::Validation(format!(
                    "config {}: {}",
                    path.display(),
                    flatten_toml_error(&e.to_string())
                ))
            })
        }
    }
}

/// Collapses toml's multi-line rendering ("TOML parse error at …" followed by
/// a source snippet and the actual message) into "location: message" so the
/// diagnostic stays on one line.
fn flatten_toml_error(text: &str) -> String {
    let mut meaningful = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('|') && !l.contains(" | "));
    let location = meaningful.next().unwrap_or("TOML parse error");
    match meaningful.next_back() {
        Some(message) if message != location => format!("{location}: {message}"),
        _ => location.to_string(),
    }
}

impl AppConfig {
    /// Merges defaults ← file ← environment ← flags and validates the result.
    pub fn resolve(
        config_path: Option<&Path>,
        flags: FlagOverrides,
    ) -> Result<AppConfig, CliError> {
        let mut merged = AppConfig::default();

        if let Some(path) = config_path {
            merged.apply_file(FileConfig::load(path)?);
        }
        merged.apply_env()?;
        merged.apply_flags(flags);
        merged.validate()?;
        Ok(merged)
    }

    fn apply_file(&mut self, file: FileConfig) {
        let FileConfig { run, llm, toolchain } = file;
        set(&mut self.episodes, run.episodes);
        set(&mut self.batch_size, run.batch_size);
        set(&mut self.seed, run.seed);
        set(&mut self.llm.endpoint, llm.endpoint);
        set(&mut self.llm.model, llm.model);
        set(&mut self.llm.temperature, llm.temperature);
        set(&mut self.llm.timeout_secs, llm.timeout_secs);
        set(&mut self.llm.max_retries, llm.max_retries);
        set(&mut self.toolchain.compiler, toolchain.compiler);
        set(&mut self.toolchain.gcov_tool, toolchain.gcov_tool);
        set(&mut self.toolchain.extra_flags, toolchain.extra_flags);
        if let Some(secs) = toolchain.timeout_per_test_secs {
            self.toolchain.timeout_per_test = Duration::from_secs(secs);
        }
    }

    fn apply_env(&mut self) -> Result<(), CliError> {
        set(&mut self.episodes, env_parsed("COVGEN_EPISODES")?);
        set(&mut self.batch_size, env_parsed("COVGEN_BATCH_SIZE")?);
        set(&mut self.seed, env_parsed("COVGEN_SEED")?);
        set(&mut self.llm.endpoint, env_string("COVGEN_LLM_ENDPOINT"));
        set(&mut self.llm.model, env_string("COVGEN_LLM_MODEL"));
        set(&mut self.llm.temperature, env_parsed("COVGEN_LLM_TEMPERATURE")?);
        set(&mut self.llm.timeout_secs, env_parsed("COVGEN_LLM_TIMEOUT_SECS")?);
        set(&mut self.llm.max_retries, env_parsed("COVGEN_LLM_MAX_RETRIES")?);
        // The API key is environment-only so it never sits in a config file
        // that might get committed.
        if let Some(key) = env_string("COVGEN_API_KEY") {
            self.llm.api_key = Some(key);
        }
        set(&mut self.toolchain.compiler, env_string("COVGEN_COMPILER"));
        set(&mut self.toolchain.gcov_tool, env_string("COVGEN_GCOV"));
        if let Some(flags) = env_string("COVGEN_CFLAGS") {
            self.toolchain.extra_flags =
                flags.split_whitespace().map(str::to_string).collect();
        }
        if let Some(secs) = env_parsed::<u64>("COVGEN_TEST_TIMEOUT_SECS")? {
            self.toolchain.timeout_per_test = Duration::from_secs(secs);
        }
        Ok(())
    }

    fn apply_flags(&mut self, flags: FlagOverrides) {
        set(&mut self.episodes, flags.episodes);
        set(&mut self.batch_size, flags.batch_size);
        set(&mut self.seed, flags.seed);
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.episodes < 1 {
            return Err(CliError::Validation("episodes must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(CliError::Validation("batch size must be at least 1".into()));
        }
        if !self.llm.temperature.is_finite() || self.llm.temperature < 0.0 {
            return Err(CliError::Validation(format!(
                "llm temperature must be a finite non-negative number, got {}",
                self.llm.temperature
            )));
        }
        if self.llm.timeout_secs < 1 {
            return Err(CliError::Validation("llm timeout must be at least 1 second".into()));
        }
        if self.toolchain.timeout_per_test < Duration::from_secs(1) {
            return Err(CliError::Validation(
                "per-test timeout must be at least 1 second".into(),
            ));
        }
        if self.toolchain.compiler.is_empty() || self.toolchain.gcov_tool.is_empty() {
            return Err(CliError::Validation("toolchain tool names must be non-empty".into()));
        }
        Ok(())
    }

    /// Validates that a live LLM endpoint is actually configured; called only
    /// when no `--mock` script replaces it.
    pub fn require_llm_endpoint(&self) -> Result<(), CliError> {
        if self.llm.endpoint.is_empty() {
            return Err(CliError::Validation(
                "no LLM endpoint configured; set [llm].endpoint, COVGEN_LLM_ENDPOINT, \
                 or pass --mock <script.json>"
                    .into(),
            ));
        }
        if self.llm.model.is_empty() {
            return Err(CliError::Validation(
                "no LLM model configured; set [llm].model or COVGEN_LLM_MODEL".into(),
            ));
        }
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn env_string(name: &str) -> Option<String> {
    std::env::var(name).ok().filter(|v| !v.is_empty())
}

fn env_parsed<T: std::str::FromStr>(name: &str) -> Result<Option<T>, CliError> {
    match std::env::var(name) {
        Ok(raw) if raw.is_empty() => Ok(None),
        Ok(raw) => raw.parse::<T>().map(Some).map_err(|_| {
            CliError::Validation(format!(
                "{name} is not a valid {}: {raw:?}",
                std::any::type_name::<T>()
            ))
        }),
        Err(_) => Ok(None),
    }
}
