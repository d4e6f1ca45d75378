//! Real coverage measurement through gcc's `--coverage` instrumentation.
//!
//! The program is compiled into a scratch directory in two steps (compile,
//! then link) so the notes file sits next to the source where `gcov` expects
//! it. Each batch pipes inputs into the binary sequentially; execution
//! counters accumulate in the `.gcda` file across runs, and `gcov
//! --json-format` turns them into line/branch totals. Resetting deletes the
//! counter file, which restores the freshly-built state.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::Deserialize;

use super::{CoverageBackend, CoverageSnapshot, HarnessError, TestExecution};
use crate::llm::TestCase;

/// Name the source is copied to inside the scratch directory; all derived
/// artifacts (`.o`, `.gcno`, `.gcda`, the binary) hang off this stem.
const SOURCE_NAME: &str = "program.c";
const BINARY_NAME: &str = "program";

#[derive(Debug, Clone)]
pub struct ToolchainConfig {
    pub compiler: String,
    pub gcov_tool: String,
    /// Extra flags passed to both compile and link steps.
    pub extra_flags: Vec<String>,
    pub timeout_per_test: Duration,
}

impl Default for ToolchainConfig {
    fn default() -> Self {
        ToolchainConfig {
            compiler: "gcc".into(),
            gcov_tool: "gcov".into(),
            extra_flags: vec!["-O0".into()],
            timeout_per_test: Duration::from_secs(5),
        }
    }
}

/// Coverage backend driving an instrumented native build.
#[derive(Debug)]
pub struct GcovHarness {
    workdir: PathBuf,
    binary: PathBuf,
    config: ToolchainConfig,
    /// Snapshot right after build (all counts zero); `reset` restores it.
    initial: CoverageSnapshot,
    current: CoverageSnapshot,
}

impl GcovHarness {
    /// Copies `source` into `workdir`, builds it with instrumentation, and
    /// reads the zero-count baseline report. Compiler diagnostics are
    /// returned verbatim when the build fails.
    pub fn build(
        source: &Path,
        workdir: &Path,
        config: ToolchainConfig,
    ) -> Result<GcovHarness, HarnessError> {
        fs::create_dir_all(workdir)?;
        let code = fs::read_to_string(source)?;
        GcovHarness::build_from_source(&code, workdir, config)
    }

    /// Same as [`GcovHarness::build`] but takes source text directly.
    pub fn build_from_source(
        code: &str,
        workdir: &Path,
        config: ToolchainConfig,
    ) -> Result<GcovHarness, HarnessError> {
        fs::create_dir_all(workdir)?;
        let source_path = workdir.join(SOURCE_NAME);
        fs::write(&source_path, code)?;
        remove_counter_files(workdir)?;

        let object = workdir.join("program.o");
        let binary = workdir.join(BINARY_NAME);
        // Compile and link separately: a combined `gcc --coverage -o bin src.c`
        // names the notes file `bin-src.gcno`, which gcov will not find under
        // the source's own stem.
        run_compiler(
            &config,
            workdir,
            &["--coverage", "-c", SOURCE_NAME, "-o", "program.o"],
        )?;
        run_compiler(
            &config,
            workdir,
            &["--coverage", object.to_str().unwrap_or("program.o"), "-o", BINARY_NAME],
        )?;

        let initial = read_report(&config, workdir)?;
        Ok(GcovHarness {
            workdir: workdir.to_path_buf(),
            binary,
            config,
            initial,
            current: initial,
        })
    }

    pub fn workdir(&self) -> &Path {
        &self.workdir
    }

    fn run_one(&self, test: &TestCase) -> Result<TestExecution, HarnessError> {
        let run = pipe_through(
            &self.binary,
            &self.workdir,
            test.input.as_bytes(),
            self.config.timeout_per_test,
        )?;
        let actual_stdout = String::from_utf8_lossy(&run.stdout).into_owned();
        let output_match =
            if run.timed_out { None } else { Some(actual_stdout == test.expected_output) };
        Ok(TestExecution {
            input: test.input.clone(),
            exit_code: run.exit_code,
            timed_out: run.timed_out,
            actual_stdout,
            expected_stdout: test.expected_output.clone(),
            output_match,
        })
    }
}

/// One subprocess execution with stdin piped in and stdout captured.
#[derive(Debug)]
pub(crate) struct ProcessRun {
    /// `None` when killed by a signal or by the timeout.
    pub exit_code: Option<i32>,
    pub timed_out: bool,
    pub stdout: Vec<u8>,
}

/// Runs `binary`, feeds it `input`, and waits up to `timeout`. Stdout is
/// drained on a helper thread so a chatty program can't fill the pipe and
/// wedge the wait; on timeout the child is killed and whatever it wrote is
/// kept.
pub(crate) fn pipe_through(
    binary: &Path,
    workdir: &Path,
    input: &[u8],
    timeout: Duration,
) -> std::io::Result<ProcessRun> {
    let mut child = Command::new(binary)
        .current_dir(workdir)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()?;

    if let Some(mut stdin) = child.stdin.take() {
        let _ = stdin.write_all(input);
    }
    let mut stdout = child.stdout.take().expect("stdout was piped");
    let reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout.read_to_end(&mut buf);
        buf
    });

    let deadline = Instant::now() + timeout;
    let mut timed_out = false;
    let status = loop {
        match child.try_wait()? {
            Some(status) => break Some(status),
            None if Instant::now() >= deadline => {
                timed_out = true;
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            None => std::thread::sleep(Duration::from_millis(5)),
        }
    };

    let stdout_bytes = reader.join().unwrap_or_default();
    Ok(ProcessRun {
        exit_code: status.and_then(|s| s.code()),
        timed_out,
        stdout: stdout_bytes,
    })
}

impl CoverageBackend for GcovHarness {
    fn run_batch(
        &mut self,
        tests: &[TestCase],
    ) -> Result<(CoverageSnapshot, Vec<TestExecution>), HarnessError> {
        if tests.is_empty() {
            return Ok((self.current, Vec::new()));
        }
        let mut executions = Vec::with_capacity(tests.len());
        for test in tests {
            // A crash or timeout is a legitimate run; keep going.
            executions.push(self.run_one(test)?);
        }
        self.current = read_report(&self.config, &self.workdir)?;
        Ok((self.current, executions))
    }

    fn snapshot(&self) -> CoverageSnapshot {
        self.current
    }

    fn reset(&mut self) -> Result<(), HarnessError> {
        remove_counter_files(&self.workdir)?;
        self.current = self.initial;
        Ok(())
    }
}

fn remove_counter_files(workdir: &Path) -> Result<(), HarnessError> {
    for entry in fs::read_dir(workdir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|ext| ext == "gcda") {
            fs::remove_file(path)?;
        }
    }
    Ok(())
}

pub(crate) fn run_compiler(
    config: &ToolchainConfig,
    workdir: &Path,
    args: &[&str],
) -> Result<(), HarnessError> {
    let output = Command::new(&config.compiler)
        .current_dir(workdir)
        .args(&config.extra_flags)
        .args(args)
        .output()?;
    if output.status.success() {
        Ok(())
    } else {
        Err(HarnessError::CompileFailed {
            diagnostics: String::from_utf8_lossy(&output.stderr).into_owned(),
        })
    }
}

/// Runs gcov over the instrumented source and folds its JSON report into a
/// snapshot. Works before any execution too: gcov warns about the missing
/// data file on stderr but still emits a zero-count report.
fn read_report(config: &ToolchainConfig, workdir: &Path) -> Result<CoverageSnapshot, HarnessError> {
    let output = Command::new(&config.gcov_tool)
        .current_dir(workdir)
        .args(["--json-format", "--stdout", "--branch-probabilities", SOURCE_NAME])
        .output()?;
    if !output.status.success() {
        return Err(HarnessError::ReportParse(format!(
            "gcov exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr)
        )));
    }
    parse_report(&output.stdout)
}

fn parse_report(raw: &[u8]) -> Result<CoverageSnapshot, HarnessError> {
    let report: GcovReport = serde_json::from_slice(raw)
        .map_err(|e| HarnessError::ReportParse(format!("gcov json: {e}")))?;
    if report.files.is_empty() {
        return Err(HarnessError::ReportParse("gcov report lists no files".into()));
    }
    let mut snap = CoverageSnapshot::default();
    for file in &report.files {
        for line in &file.lines {
            snap.lines_total += 1;
            if line.count > 0 {
                snap.lines_covered += 1;
            }
            for branch in &line.branches {
                snap.branches_total += 1;
                if branch.count > 0 {
                    snap.branches_covered += 1;
                }
            }
        }
    }
    Ok(snap)
}

#[derive(Debug, Deserialize)]
struct GcovReport {
    #[serde(default)]
    files: Vec<GcovFile>,
}

#[derive(Debug, Deserialize)]
struct GcovFile {
    #[serde(default)]
    lines: Vec<GcovLine>,
}

#[derive(Debug, Deserialize)]
struct GcovLine {
    count: u64,
    #[serde(default)]
    branches: Vec<GcovBranch>,
}

#[derive(Debug, Deserialize)]
struct GcovBranch {
    count: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    // Shape captured from `gcov --json-format --stdout --branch-probabilities`
    // (gcc 12) on a two-branch program after one run.
    const SAMPLE_REPORT: &str = r#"{
        "format_version": "1",
        "gcc_version": "12.2.0",
        "files": [{
            "file": "program.c",
            "functions": [{"name": "main", "execution_count": 1}],
            "lines": [
                {"line_number": 3, "count": 1, "branches": []},
                {"line_number": 4, "count": 1, "branches": []},
                {"line_number": 5, "count": 1, "branches": [
                    {"count": 1, "fallthrough": true, "throw": false},
                    {"count": 0, "fallthrough": false, "throw": false}
                ]},
                {"line_number": 6, "count": 1, "branches": []},
                {"line_number": 8, "count": 0, "branches": []},
                {"line_number": 10, "count": 1, "branches": []}
            ]
        }]
    }"#;

    #[test]
    fn unit_parse_report_counts_lines_and_branches() {
        let snap = parse_report(SAMPLE_REPORT.as_bytes()).unwrap();
        assert_eq!(
            snap,
            CoverageSnapshot {
                lines_total: 6,
                lines_covered: 5,
                branches_total: 2,
                branches_covered: 1,
            }
        );
    }

    #[test]
    fn unit_parse_report_rejects_empty_file_list() {
        let err = parse_report(br#"{"files": []}"#).unwrap_err();
        assert!(matches!(err, HarnessError::ReportParse(_)));
    }

    #[test]
    fn unit_parse_report_rejects_garbage() {
        assert!(parse_report(b"not json").is_err());
    }

    #[test]
    fn unit_default_toolchain_config() {
        let config = ToolchainConfig::default();
        assert_eq!(config.compiler, "gcc");
        assert_eq!(config.timeout_per_test, Duration::from_secs(5));
    }
}
