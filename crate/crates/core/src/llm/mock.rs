//! Scripted LLM replacement for offline runs and deterministic tests.
//!
//! A script is a JSON object keyed `"TEMPLATE:ordinal"`, e.g. `"BVA:0"` is the
//! first BVA call of the run. Values are either an array of test objects
//! (served as if the model had returned that JSON) or a plain string (served
//! as raw completion text, which is what the Stage-I optimizer consumes).
//! Unknown keys yield an empty batch, never an error.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{LlmResponse, TestCase};
use crate::prompts;

/// Canned reply: structured tests or raw text.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScriptEntry {
    Tests(Vec<TestCase>),
    Text(String),
}

/// The parsed script file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(transparent)]
pub struct MockScript {
    entries: BTreeMap<String, ScriptEntry>,
}

impl MockScript {
    pub fn from_json(text: &str) -> Result<MockScript, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Deterministic scripted backend. Tracks one call ordinal per detected
/// template so repeated calls walk through `TEMPLATE:0`, `TEMPLATE:1`, ...
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    script: MockScript,
    ordinals: BTreeMap<&'static str, usize>,
}

impl MockBackend {
    pub fn new(script: MockScript) -> MockBackend {
        MockBackend { script, ordinals: BTreeMap::new() }
    }

    fn next_key(&mut self, prompt: &str) -> String {
        let template = detect_template(prompt);
        let ordinal = self.ordinals.entry(template).or_insert(0);
        let key = format!("{template}:{ordinal}");
        *ordinal += 1;
        key
    }

    /// Scripted counterpart of a generation call. Unknown keys produce an
    /// empty batch; oversized scripted batches are truncated to
    /// `expected_count`; scripted entries with invalid input bytes are dropped
    /// like any other model output would be.
    pub fn generate(&mut self, prompt: &str, expected_count: usize) -> LlmResponse {
        let key = self.next_key(prompt);
        match self.script.entries.get(&key) {
            Some(ScriptEntry::Tests(tests)) => {
                let kept: Vec<TestCase> = tests
                    .iter()
                    .filter(|t| {
                        matches!(
                            prompts::validate_test_input(&t.input),
                            prompts::InputVerdict::Accepted
                        )
                    })
                    .take(expected_count)
                    .cloned()
                    .collect();
                let raw = serde_json::to_string(&kept).expect("tests serialize");
                LlmResponse { tests: kept, raw, usage: None }
            }
            Some(ScriptEntry::Text(text)) => {
                let tests = super::parse_response(text, expected_count);
                LlmResponse { tests, raw: text.clone(), usage: None }
            }
            None => LlmResponse { tests: Vec::new(), raw: String::new(), usage: None },
        }
    }

    /// Scripted counterpart of a raw-text completion. Structured entries are
    /// served as their JSON serialization; unknown keys yield empty text.
    pub fn complete_text(&mut self, prompt: &str) -> String {
        let key = self.next_key(prompt);
        match self.script.entries.get(&key) {
            Some(ScriptEntry::Text(text)) => text.clone(),
            Some(ScriptEntry::Tests(tests)) => {
                serde_json::to_string(tests).expect("tests serialize")
            }
            None => String::new(),
        }
    }
}

/// Names the script-key family for a prompt by its first line: the eight
/// strategy headers, the Stage-I refactoring prompt (`TOT`), or the Stage-I
/// equivalence check (`VERIFY`). Unrecognized prompts map to `UNKNOWN`.
pub fn detect_template(prompt: &str) -> &'static str {
    let first_line = prompt.lines().next().unwrap_or("");
    for template in prompts::templates() {
        let header_first = template.header.lines().next().unwrap_or("");
        if first_line == header_first {
            return template.name;
        }
    }
    if first_line == crate::stage1::TOT_PROMPT_FIRST_LINE {
        return "TOT";
    }
    if first_line == crate::stage1::VERIFY_PROMPT_FIRST_LINE {
        return "VERIFY";
    }
    "UNKNOWN"
}
