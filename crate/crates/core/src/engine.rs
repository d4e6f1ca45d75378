//! The episode loop tying everything together.
//!
//! Per episode: encode the state from static code features plus cumulative
//! coverage, sample a prompt template from the policy, build the prompt, ask
//! the LLM for a batch of tests, admit the valid-and-unseen ones, run them,
//! convert the coverage delta into a reward, store the transition, and run a
//! PPO update. The admitted tests accumulate into the final suite. When
//! enabled, the source minification pass runs once up front and its LOC
//! reduction feeds the reward as a per-run constant.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coverage::gcov::ToolchainConfig;
use crate::coverage::{CoverageBackend, CoverageSnapshot, HarnessError, TestExecution};
use crate::llm::{LlmClient, TestCase};
use crate::mdp::{compute_reward, encode_state, Language, RewardBreakdown, StateVector};
use crate::metrics::CodeMetrics;
use crate::policy::{forward, sample_action, NetworkParams};
use crate::ppo::{ppo_update, Transition, TransitionBuffer, TrainerConfig, UpdateStats};
use crate::prompts::{build_prompt, template_for, validate_test_input, InputVerdict, PromptRequest};
use crate::stage1::{self, StageOneOptions, StageOneReport};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("source minification failed: {0}")]
    Stage1(#[from] stage1::StageOneError),
    #[error("coverage harness failed: {0}")]
    Harness(#[from] HarnessError),
    #[error("artifact write failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Scalar knobs of one generation run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Episode budget T.
    pub horizon: usize,
    /// Tests requested per episode B.
    pub batch_size: usize,
    pub seed: u64,
    /// Run the minification pass before generation (needs source text).
    pub stage1_enabled: bool,
    /// Language flag encoded into the state; real runs are always C.
    pub language: Language,
    pub trainer: TrainerConfig,
    /// Where artifacts land; `None` keeps the run in memory.
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            horizon: 30,
            batch_size: 10,
            seed: 0,
            stage1_enabled: true,
            language: Language::C,
            trainer: TrainerConfig::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.horizon < 1 {
            return Err(EngineError::Config("horizon must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(EngineError::Config("batch size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything the run borrows from the caller: the program (or its stand-in),
/// the LLM, and the coverage backend.
pub struct RunContext<'a> {
    /// C source text; `None` for purely synthetic runs.
    pub source: Option<&'a str>,
    /// Static features for state encoding.
    pub metrics: CodeMetrics,
    pub llm: &'a mut LlmClient,
    pub backend: &'a mut dyn CoverageBackend,
    /// Toolchain for Stage-I differential verification; `None` downgrades
    /// verification to the advisory LLM self-check.
    pub stage1_toolchain: Option<ToolchainConfig>,
}

/// Exact input strings admitted so far; duplicates earn no reward.
#[derive(Debug, Default)]
pub struct UniquenessCache {
    seen: BTreeSet<String>,
}

impl UniquenessCache {
    pub fn new() -> UniquenessCache {
        UniquenessCache::default()
    }

    pub fn contains(&self, input: &str) -> bool {
        self.seen.contains(input)
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    /// Admits each test whose input passes byte validation and has not been
    /// seen before — including earlier in the same batch (first occurrence
    /// wins). Admitted inputs enter the cache.
    pub fn filter_unique(&mut self, batch: &[TestCase]) -> Vec<TestCase> {
        let mut admitted = Vec::new();
        for test in batch {
            if validate_test_input(&test.input) != InputVerdict::Accepted {
                continue;
            }
            if self.seen.insert(test.input.clone()) {
                admitted.push(test.clone());
            }
        }
        admitted
    }
}

/// One line of `episodes.jsonl`.
#[derive(Debug, Clone, Serialize)]
pub struct EpisodeRecord {
    /// 1-based episode number t; its state was encoded with (t−1)/T.
    pub episode: usize,
    pub state: StateVector,
    pub action: usize,
    pub template: &'static str,
    pub log_prob: f64,
    /// Tests the LLM returned (before uniqueness/validity filtering).
    pub generated: usize,
    /// Tests admitted to the suite this episode (N_uniq in the reward).
    pub admitted: usize,
    pub reward: RewardBreakdown,
    /// Cumulative coverage after this episode's batch.
    pub snapshot: CoverageSnapshot,
    pub update: UpdateStats,
    /// Present when the LLM call failed; the episode still counts, with an
    /// empty batch.
    pub llm_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub episodes: usize,
    pub suite_size: usize,
    pub final_line_pct: f64,
    pub final_branch_pct: f64,
    pub final_snapshot: CoverageSnapshot,
    /// Template name → times selected.
    pub template_histogram: BTreeMap<String, usize>,
    /// Stage-I LOC reduction fed into the reward (0 when Stage I is off).
    pub loc_reduction_pct: f64,
    /// Replaying the final suite from a reset backend reproduced the final
    /// snapshot exactly.
    pub replay_ok: bool,
    /// Share of executed tests whose stdout matched the LLM's expectation.
    /// Purely informational — admission never depends on it. `None` when the
    /// backend does not execute tests.
    pub oracle_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage1: Option<StageOneReport>,
}

/// Full result of a run; the artifact files are serializations of its parts.
#[derive(Debug)]
pub struct RunReport {
    pub summary: RunSummary,
    pub episodes: Vec<EpisodeRecord>,
    pub suite: Vec<TestCase>,
    pub executions: Vec<TestExecution>,
    /// Minified source, when Stage I ran.
    pub optimized_source: Option<String>,
}

/// Placeholder fed to prompt construction when the run has no real source
/// (synthetic oracle); the scripted mock keys on the template header, not the
/// program body.
const SYNTHETIC_SOURCE: &str = "/* synthetic program under test */\n";

/// Runs Stage I (optionally) and the full episode loop.
pub fn run(config: &RunConfig, ctx: RunContext<'_>) -> Result<RunReport, EngineError> {
    config.validate()?;
    let RunContext { source, metrics, llm, backend, stage1_toolchain } = ctx;

    // Stage I: minify once; its reduction is a per-episode constant.
    let mut optimized_source: Option<String> = None;
    let mut stage1_report: Option<StageOneReport> = None;
    if config.stage1_enabled {
        if let Some(original) = source {
            // In-memory runs compile in a self-cleaning scratch directory;
            // runs with an output directory keep the Stage-I workspace next
            // to the other artifacts for inspection.
            let mut scratch: Option<tempfile::TempDir> = None;
            let workdir = match &config.output_dir {
                Some(dir) => dir.join("stage1"),
                None => {
                    let dir = tempfile::TempDir::with_prefix("covgen-stage1-")?;
                    let path = dir.path().to_path_buf();
                    scratch = Some(dir);
                    path
                }
            };
            let options = StageOneOptions {
                toolchain: stage1_toolchain.clone(),
                seed: config.seed,
                workdir,
            };
            let (assembled, report) = stage1::optimize_program(original, llm, &options)?;
            drop(scratch);
            optimized_source = Some(assembled);
            stage1_report = Some(report);
        }
    }
    let loc_reduction_pct = stage1_report.as_ref().map_or(0.0, |r| r.loc_reduction_pct);
    let stage2_source: &str =
        optimized_source.as_deref().or(source).unwrap_or(SYNTHETIC_SOURCE);

    // Stage II: the PPO-guided generation loop.
    let mut params = NetworkParams::xavier_init(config.seed);
    let mut action_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5EED));
    let mut buffer = TransitionBuffer::new(config.trainer.buffer_capacity);
    let mut cache = UniquenessCache::new();
    let mut suite: Vec<TestCase> = Vec::new();
    let mut suite_inputs: Vec<String> = Vec::new();
    let mut executions: Vec<TestExecution> = Vec::new();
    let mut episodes: Vec<EpisodeRecord> = Vec::new();
    let mut histogram: BTreeMap<String, usize> = BTreeMap::new();

    let horizon = config.horizon;
    for i in 0..horizon {
        let prev = backend.snapshot();
        let state = encode_state(
            &metrics,
            prev.line_pct(),
            prev.branch_pct(),
            config.language,
            i,
            horizon,
        );
        let output = forward(&params, &state);
        let (action, log_prob) = sample_action(&output, &mut action_rng);
        let template = template_for(action);

        let prompt = build_prompt(&PromptRequest {
            template,
            source_code: stage2_source,
            line_pct: prev.line_pct(),
            branch_pct: prev.branch_pct(),
            batch_size: config.batch_size,
            existing_inputs: &suite_inputs,
        });
        let (batch, llm_error) = match llm.generate(&prompt, config.batch_size) {
            Ok(response) => (response.tests, None),
            // A failed call is an empty batch; the reward reflects it.
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        let generated = batch.len();

        let admitted_tests = cache.filter_unique(&batch);
        let admitted = admitted_tests.len();
        let (snapshot, execs) = backend.run_batch(&admitted_tests)?;
        executions.extend(execs);

        let reward = compute_reward(&prev, &snapshot, admitted, config.batch_size, loc_reduction_pct);
        let terminal = i + 1 == horizon;
        let next_state = encode_state(
            &metrics,
            snapshot.line_pct(),
            snapshot.branch_pct(),
            config.language,
            i + 1,
            horizon,
        );
        buffer.push(Transition {
            state,
            action,
            log_prob_old: log_prob,
            value_old: output.value,
            reward: reward.total,
            next_state,
            terminal,
        });
        let (updated, stats) = ppo_update(&params, buffer.as_slice(), &config.trainer);
        params = updated;

        for test in &admitted_tests {
            suite_inputs.push(test.input.clone());
        }
        suite.extend(admitted_tests);
        *histogram.entry(template.name.to_string()).or_insert(0) += 1;
        episodes.push(EpisodeRecord {
            episode: i + 1,
            state,
            action: action.index(),
            template: template.name,
            log_prob,
            generated,
            admitted,
            reward,
            snapshot,
            update: stats,
            llm_error,
        });
    }

    let final_snapshot = backend.snapshot();

    // Replay check: a reset backend fed the whole suite must land on the
    // same snapshot.
    backend.reset()?;
    let (replayed, _) = backend.run_batch(&suite)?;
    let replay_ok = replayed == final_snapshot;

    let judged = executions.iter().filter(|e| e.output_match.is_some()).count();
    let oracle_accuracy = if judged == 0 {
        None
    } else {
        let matched =
            executions.iter().filter(|e| e.output_match == Some(true)).count();
        Some(matched as f64 / judged as f64)
    };

    let summary = RunSummary {
        episodes: horizon,
        suite_size: suite.len(),
        final_line_pct: final_snapshot.line_pct(),
        final_branch_pct: final_snapshot.branch_pct(),
        final_snapshot,
        template_histogram: histogram,
        loc_reduction_pct,
        replay_ok,
        oracle_accuracy,
        stage1: stage1_report,
    };
    let report = RunReport {
        summary,
        episodes,
        suite,
        executions,
        optimized_source,
    };
    if let Some(dir) = &config.output_dir {
        write_artifacts(dir, &report)?;
    }
    Ok(report)
}

/// Serializes the report into the output directory: `tests.json`,
/// `episodes.jsonl`, `summary.json`, `executions.jsonl`, and `optimized.c`
/// when Stage I produced one.
fn write_artifacts(dir: &std::path::Path, report: &RunReport) -> Result<(), EngineError> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("tests.json"),
        serde_json::to_string_pretty(&report.suite).expect("suite serializes") + "\n",
    )?;
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&report.summary).expect("summary serializes") + "\n",
    )?;
    let mut lines = String::new();
    for record in &report.episodes {
        lines.push_str(&serde_json::to_string(record).expect("episode serializes"));
        lines.push('\n');
    }
    fs::write(dir.join("episodes.jsonl"), lines)?;
    let mut exec_lines = String::new();
    for execution in &report.executions {
        exec_lines.push_str(&serde_json::to_string(execution).expect("execution serializes"));
        exec_lines.push('\n');
    }
    fs::write(dir.join("executions.jsonl"), exec_lines)?;
    if let Some(optimized) = &report.optimized_source {
        fs::write(dir.join("optimized.c"), optimized)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(input: &str) -> TestCase {
        TestCase { input: input.into(), expected_output: String::new() }
    }

    #[test]
    fn unit_filter_unique_set_semantics() {
        let mut cache = UniquenessCache::new();
        cache.filter_unique(&[case("a")]);
        let admitted = cache.filter_unique(&[case("a"), case("b"), case("b")]);
        let inputs: Vec<&str> = admitted.iter().map(|t| t.input.as_str()).collect();
        assert_eq!(inputs, vec!["b"]);
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn unit_filter_unique_empty_batch() {
        let mut cache = UniquenessCache::new();
        assert!(cache.filter_unique(&[]).is_empty());
        assert!(cache.is_empty());
    }

    #[test]
    fn unit_filter_unique_rejects_binary_input() {
        let mut cache = UniquenessCache::new();
        let admitted = cache.filter_unique(&[case("ok\n"), case("bad\u{0}byte")]);
        assert_eq!(admitted.len(), 1);
        assert_eq!(admitted[0].input, "ok\n");
        assert!(!cache.contains("bad\u{0}byte"));
    }

    #[test]
    fn unit_filter_unique_first_occurrence_wins() {
        let mut cache = UniquenessCache::new();
        let admitted = cache.filter_unique(&[
            TestCase { input: "x\n".into(), expected_output: "first".into() },
            TestCase { input: "x\n".into(), expected_output: "second".into() },
        ]);
        assert_eq!(admitted.len(), 1);
        assert_eq!(admitted[0].expected_output, "first");
    }

    #[test]
    fn unit_run_config_validation() {
        let mut config = RunConfig::default();
        assert!(config.validate().is_ok());
        config.horizon = 0;
        assert!(config.validate().is_err());
        config.horizon = 1;
        config.batch_size = 0;
        assert!(config.validate().is_err());
    }
}
