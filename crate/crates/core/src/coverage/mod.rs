//! Coverage measurement behind a common backend interface.
//!
//! Two backends exist: [`gcov::GcovHarness`] drives the real C toolchain, and
//! [`synthetic::SyntheticHarness`] evaluates a rule-based oracle loaded from a
//! JSON fixture, for offline and deterministic tests. Both accumulate coverage
//! across batches and support a from-scratch replay via [`CoverageBackend::reset`].

pub mod gcov;
pub mod synthetic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::TestCase;

/// Cumulative line/branch coverage at one point in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoverageSnapshot {
    pub lines_total: u64,
    pub lines_covered: u64,
    pub branches_total: u64,
    pub branches_covered: u64,
}

impl CoverageSnapshot {
    /// Covered lines as a percentage; 0 when the program has no measurable lines.
    pub fn line_pct(&self) -> f64 {
        if self.lines_total == 0 {
            0.0
        } else {
            100.0 * self.lines_covered as f64 / self.lines_total as f64
        }
    }

    /// Covered branches as a percentage; 0 when the program has no branches.
    pub fn branch_pct(&self) -> f64 {
        if self.branches_total == 0 {
            0.0
        } else {
            100.0 * self.branches_covered as f64 / self.branches_total as f64
        }
    }

    /// True when `self` covers at least as much as `earlier` (same totals,
    /// counts never shrink). Used to assert cumulative monotonicity.
    pub fn advances(&self, earlier: &CoverageSnapshot) -> bool {
        self.lines_total == earlier.lines_total
            && self.branches_total == earlier.branches_total
            && self.lines_covered >= earlier.lines_covered
            && self.branches_covered >= earlier.branches_covered
    }
}

/// Outcome of feeding one test input to the program under test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestExecution {
    pub input: String,
    /// Process exit code; `None` when killed by a signal or timed out, or when
    /// no process ran (synthetic backend).
    pub exit_code: Option<i32>,
    pub timed_out: bool,
    pub actual_stdout: String,
    pub expected_stdout: String,
    /// Whether actual stdout equaled the LLM-predicted stdout. `None` when the
    /// backend does not execute programs; the prediction is then unverifiable.
    pub output_match: Option<bool>,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("compilation failed:\n{diagnostics}")]
    CompileFailed { diagnostics: String },
    #[error("coverage report: {0}")]
    ReportParse(String),
    #[error("synthetic program: {0}")]
    InvalidProgram(String),
    #[error("toolchain io: {0}")]
    Io(#[from] std::io::Error),
}

/// A coverage measurement backend. Coverage accumulates across `run_batch`
/// calls; `reset` discards it so a run can be replayed from scratch.
pub trait CoverageBackend {
    /// Executes (or synthetically evaluates) each test and returns the
    /// cumulative snapshot after the batch plus per-test results. An empty
    /// batch leaves the snapshot unchanged.
    fn run_batch(
        &mut self,
        tests: &[TestCase],
    ) -> Result<(CoverageSnapshot, Vec<TestExecution>), HarnessError>;

    /// Cumulative coverage right now, without running anything.
    fn snapshot(&self) -> CoverageSnapshot;

    /// Drops all accumulated coverage, as if no test had ever run.
    fn reset(&mut self) -> Result<(), HarnessError>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_percentages_zero_when_totals_zero() {
        let s = CoverageSnapshot::default();
        assert_eq!(s.line_pct(), 0.0);
        assert_eq!(s.branch_pct(), 0.0);
    }

    #[test]
    fn unit_percentages_follow_ratio() {
        let s = CoverageSnapshot {
            lines_total: 250,
            lines_covered: 228,
            branches_total: 10,
            branches_covered: 10,
        };
        assert!((s.line_pct() - 91.2).abs() < 1e-12);
        assert!((s.branch_pct() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn unit_advances_checks_totals_and_counts() {
        let a = CoverageSnapshot { lines_total: 10, lines_covered: 3, branches_total: 4, branches_covered: 1 };
        let b = CoverageSnapshot { lines_covered: 5, branches_covered: 1, ..a };
        assert!(b.advances(&a));
        assert!(!a.advances(&b));
        let other_program = CoverageSnapshot { lines_total: 11, ..b };
        assert!(!other_program.advances(&a));
    }
}
