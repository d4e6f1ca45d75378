//! Rule-based coverage oracle for offline runs.
//!
//! A synthetic program declares its line/branch totals, a set of base lines
//! that any execution touches, and per-branch matchers over test inputs. A
//! branch is covered once any input in the run's history matches its rule;
//! covered lines are the base set plus every covered branch's mapped lines.
//! Nothing is executed, so results are exactly reproducible everywhere.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{CoverageBackend, CoverageSnapshot, HarnessError, TestExecution};
use crate::llm::TestCase;
use crate::metrics::CodeMetrics;

/// Predicate over a test input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BranchMatcher {
    /// Input starts with these bytes.
    InputPrefix { value: String },
    /// The first integer parsed from the input falls in [min, max]; missing
    /// bounds are open. Inputs without a parseable integer never match.
    IntRange {
        #[serde(default)]
        min: Option<i64>,
        #[serde(default)]
        max: Option<i64>,
    },
    /// Input contains these bytes anywhere.
    Substring { value: String },
}

impl BranchMatcher {
    pub fn matches(&self, input: &str) -> bool {
        match self {
            BranchMatcher::InputPrefix { value } => input.starts_with(value.as_str()),
            BranchMatcher::IntRange { min, max } => match first_integer(input) {
                Some(v) => min.is_none_or(|m| v >= m) && max.is_none_or(|m| v <= m),
                None => false,
            },
            BranchMatcher::Substring { value } => input.contains(value.as_str()),
        }
    }
}

/// First `[+-]?digits` token in the input, when it fits an i64.
fn first_integer(input: &str) -> Option<i64> {
    let bytes = input.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let signed = (bytes[i] == b'+' || bytes[i] == b'-')
            && i + 1 < bytes.len()
            && bytes[i + 1].is_ascii_digit();
        if bytes[i].is_ascii_digit() || signed {
            let start = i;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            return input[start..i].parse().ok();
        }
        i += 1;
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRule {
    pub branch_id: u32,
    pub matcher: BranchMatcher,
}

/// The oracle's description of a fictional program under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProgram {
    pub lines_total: u64,
    pub branches_total: u64,
    /// Lines touched by every execution, once at least one test has run.
    #[serde(default)]
    pub base_lines: BTreeSet<u64>,
    #[serde(default)]
    pub branch_rules: Vec<BranchRule>,
    /// branch_id → lines that executing that branch touches.
    #[serde(default)]
    pub line_map: BTreeMap<u32, BTreeSet<u64>>,
    /// Static metrics to encode into the state vector when no real source
    /// exists; simulate mode derives coarse values when absent.
    #[serde(default)]
    pub metrics: Option<CodeMetrics>,
}

impl SyntheticProgram {
    pub fn from_json(text: &str) -> Result<SyntheticProgram, HarnessError> {
        let program: SyntheticProgram = serde_json::from_str(text)
            .map_err(|e| HarnessError::InvalidProgram(format!("parse: {e}")))?;
        program.validate()?;
        Ok(program)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut seen = BTreeSet::new();
        for rule in &self.branch_rules {
            if !seen.insert(rule.branch_id) {
                return Err(HarnessError::InvalidProgram(format!(
                    "duplicate branch id {}",
                    rule.branch_id
                )));
            }
        }
        if self.branch_rules.len() as u64 > self.branches_total {
            return Err(HarnessError::InvalidProgram(format!(
                "{} rules exceed branches_total {}",
                self.branch_rules.len(),
                self.branches_total
            )));
        }
        for &line in &self.base_lines {
            if line >= self.lines_total {
                return Err(HarnessError::InvalidProgram(format!(
                    "base line {line} out of range (lines_total {})",
                    self.lines_total
                )));
            }
        }
        for (branch_id, lines) in &self.line_map {
            if !seen.contains(branch_id) {
                return Err(HarnessError::InvalidProgram(format!(
                    "line_map references unknown branch id {branch_id}"
                )));
            }
            for &line in lines {
                if line >= self.lines_total {
                    return Err(HarnessError::InvalidProgram(format!(
                        "mapped line {line} out of range (lines_total {})",
                        self.lines_total
                    )));
                }
            }
        }
        Ok(())
    }

    /// Metrics for state encoding: the declared ones, or a coarse derivation
    /// from the totals.
    pub fn metrics_or_derived(&self) -> CodeMetrics {
        self.metrics.unwrap_or(CodeMetrics {
            loc: self.lines_total as usize,
            functions: 1,
            branches: self.branches_total as usize,
            loops: 0,
            cyclomatic: self.branches_total as usize / 2 + 1,
        })
    }
}

/// Coverage backend evaluating a [`SyntheticProgram`] over the accumulated
/// input history.
#[derive(Debug, Clone)]
pub struct SyntheticHarness {
    program: SyntheticProgram,
    inputs_seen: Vec<String>,
}

impl SyntheticHarness {
    pub fn new(program: SyntheticProgram) -> Result<SyntheticHarness, HarnessError> {
        program.validate()?;
        Ok(SyntheticHarness { program, inputs_seen: Vec::new() })
    }

    pub fn program(&self) -> &SyntheticProgram {
        &self.program
    }

    fn compute_snapshot(&self) -> CoverageSnapshot {
        let mut covered_lines: BTreeSet<u64> = BTreeSet::new();
        let mut covered_branches: BTreeSet<u32> = BTreeSet::new();
        if !self.inputs_seen.is_empty() {
            covered_lines.extend(&self.program.base_lines);
        }
        for rule in &self.program.branch_rules {
            if self.inputs_seen.iter().any(|input| rule.matcher.matches(input)) {
                covered_branches.insert(rule.branch_id);
                if let Some(lines) = self.program.line_map.get(&rule.branch_id) {
                    covered_lines.extend(lines);
                }
            }
        }
        CoverageSnapshot {
            lines_total: self.program.lines_total,
            lines_covered: covered_lines.len() as u64,
            branches_total: self.program.branches_total,
            branches_covered: covered_branches.len() as u64,
        }
    }
}

impl CoverageBackend for SyntheticHarness {
    fn run_batch(
        &mut self,
        tests: &[TestCase],
    ) -> Result<(CoverageSnapshot, Vec<TestExecution>), HarnessError> {
        let executions = tests
            .iter()
            .map(|t| {
                self.inputs_seen.push(t.input.clone());
                TestExecution {
                    input: t.input.clone(),
                    exit_code: None,
                    timed_out: false,
                    actual_stdout: String::new(),
                    expected_stdout: t.expected_output.clone(),
                    output_match: None,
                }
            })
            .collect();
        Ok((self.compute_snapshot(), executions))
    }

    fn snapshot(&self) -> CoverageSnapshot {
        self.compute_snapshot()
    }

    fn reset(&mut self) -> Result<(), HarnessError> {
        self.inputs_seen.clear();
        Ok(())
    }
}
