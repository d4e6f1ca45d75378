//! LLM access behind one text-in/structured-tests-out interface.
//!
//! Two backends: [`http::HttpBackend`] speaks OpenAI-compatible chat
//! completions; [`mock::MockBackend`] replays a scripted JSON file for
//! deterministic offline runs. The response parser is shared and deliberately
//! tolerant: real models wrap JSON in fences and emit stray prose often enough
//! that strictness would starve the reward signal.

pub mod http;
pub mod mock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompts::{validate_test_input, InputVerdict};

/// One generated test: an stdin payload plus the model's prediction of stdout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub input: String,
    #[serde(rename = "expectedOutput", default)]
    pub expected_output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Parsed reply from one generation call.
#[derive(Debug, Clone, PartialEq)]
pub struct LlmResponse {
    pub tests: Vec<TestCase>,
    pub raw: String,
    pub usage: Option<TokenUsage>,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("llm transport failed after {attempts} attempt(s): {detail}")]
    Transport { attempts: u32, detail: String },
    #[error("llm endpoint returned status {status}: {body}")]
    Http { status: u16, body: String },
    #[error("llm reply malformed: {0}")]
    Malformed(String),
    #[error("llm reply contained no parseable test cases")]
    EmptyResponse,
}

/// One configured LLM client. An enum rather than a trait object so call
/// sites stay simple and the mock's extra scripted-text interface (used by the
/// Stage-I optimizer) does not leak into a shared trait.
pub enum LlmClient {
    Http(http::HttpBackend),
    Mock(mock::MockBackend),
}

impl LlmClient {
    /// Sends `prompt` and returns up to `expected_count` parsed tests.
    ///
    /// The HTTP backend treats a reply with zero parseable tests as
    /// [`LlmError::EmptyResponse`]; the scripted mock returns an empty batch
    /// for unknown script keys, matching its errors-free contract.
    pub fn generate(
        &mut self,
        prompt: &str,
        expected_count: usize,
    ) -> Result<LlmResponse, LlmError> {
        assert!(!prompt.is_empty(), "prompt must be non-empty");
        match self {
            LlmClient::Http(backend) => {
                let completion = backend.complete(prompt)?;
                let tests = parse_response(&completion.text, expected_count);
                if tests.is_empty() {
                    return Err(LlmError::EmptyResponse);
                }
                Ok(LlmResponse { tests, raw: completion.text, usage: completion.usage })
            }
            LlmClient::Mock(backend) => Ok(backend.generate(prompt, expected_count)),
        }
    }

    /// Sends `prompt` and returns the raw completion text. Used by Stage I,
    /// whose replies are code or verdicts rather than test JSON.
    pub fn complete_text(&mut self, prompt: &str) -> Result<String, LlmError> {
        assert!(!prompt.is_empty(), "prompt must be non-empty");
        match self {
            LlmClient::Http(backend) => backend.complete(prompt).map(|c| c.text),
            LlmClient::Mock(backend) => Ok(backend.complete_text(prompt)),
        }
    }
}

/// Extracts test cases from a model reply. Total: every malformed entry is
/// dropped individually and the worst case is an empty list.
///
/// Accepted shapes, after optional markdown fence stripping: a bare JSON array
/// of `{"input": ..., "expectedOutput": ...}` objects, or an object wrapping
/// such an array under `"tests"`. Entries with a non-string input, or an input
/// that fails byte validation, are discarded. At most `expected_count` tests
/// are returned.
pub fn parse_response(raw: &str, expected_count: usize) -> Vec<TestCase> {
    let candidates = fence_candidates(raw);
    for candidate in candidates {
        if let Some(tests) = parse_json_tests(candidate, expected_count) {
            if !tests.is_empty() {
                return tests;
            }
        }
    }
    Vec::new()
}

/// Candidate substrings to attempt JSON parsing on, most specific first:
/// the first fenced block if any, then the whole trimmed reply.
fn fence_candidates(raw: &str) -> Vec<&str> {
    let mut out = Vec::new();
    if let Some(open) = raw.find("```") {
        let after_marker = &raw[open + 3..];
        // Skip a language tag such as ```json on the fence line.
        let body_start = after_marker.find('\n').map(|i| i + 1).unwrap_or(0);
        let body = &after_marker[body_start..];
        let fenced = match body.find("```") {
            Some(close) => &body[..close],
            None => body,
        };
        out.push(fenced.trim());
    }
    out.push(raw.trim());
    out
}

fn parse_json_tests(text: &str, expected_count: usize) -> Option<Vec<TestCase>> {
    let value: serde_json::Value = serde_json::from_str(text).ok()?;
    let entries = match value {
        serde_json::Value::Array(items) => items,
        serde_json::Value::Object(mut map) => match map.remove("tests") {
            Some(serde_json::Value::Array(items)) => items,
            _ => return None,
        },
        _ => return None,
    };

    let mut tests = Vec::new();
    for entry in entries {
        if tests.len() == expected_count {
            break;
        }
        let obj = match entry {
            serde_json::Value::Object(obj) => obj,
            _ => continue,
        };
        let input = match obj.get("input") {
            Some(serde_json::Value::String(s)) => s.clone(),
            _ => continue,
        };
        if !matches!(validate_test_input(&input), InputVerdict::Accepted) {
            continue;
        }
        let expected_output = match obj.get("expectedOutput") {
            Some(serde_json::Value::String(s)) => s.clone(),
            _ => String::new(),
        };
        tests.push(TestCase { input, expected_output });
    }
    Some(tests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_parse_bare_array() {
        let tests = parse_response(r#"[{"input":"5\n","expectedOutput":"pos"}]"#, 10);
        assert_eq!(tests, vec![TestCase { input: "5\n".into(), expected_output: "pos".into() }]);
    }

    #[test]
    fn unit_parse_wrapper_object() {
        let tests =
            parse_response(r#"{"tests":[{"input":"a"},{"input":"b","expectedOutput":"B"}]}"#, 10);
        assert_eq!(tests.len(), 2);
        assert_eq!(tests[0].expected_output, "");
        assert_eq!(tests[1].expected_output, "B");
    }

    #[test]
    fn unit_parse_strips_markdown_fences() {
        let raw = "```json\n[{\"input\":\"1\\n\",\"expectedOutput\":\"x\"}]\n```";
        let tests = parse_response(raw, 10);
        assert_eq!(tests.len(), 1);
        assert_eq!(tests[0].input, "1\n");
    }

    #[test]
    fn unit_parse_recorded_fenced_reply() {
        // Transcript-style reply: prose before the fence, language tag, fenced array.
        let raw = include_str!("../../tests/fixtures/fenced_reply.txt");
        let tests = parse_response(raw, 10);
        assert_eq!(tests.len(), 3);
        assert_eq!(tests[0].input, "0\n");
        assert_eq!(tests[2].expected_output, "overflow\n");
    }

    #[test]
    fn unit_parse_drops_entries_with_invalid_bytes() {
        let raw = "[{\"input\":\"ok\\n\"},{\"input\":\"bad\\u0000byte\"},{\"input\":\"also ok\"}]";
        let tests = parse_response(raw, 10);
        assert_eq!(tests.len(), 2);
        assert!(tests.iter().all(|t| !t.input.contains('\u{0}')));
    }

    #[test]
    fn unit_parse_drops_malformed_entries_individually() {
        let raw = r#"[{"input":"1"}, 42, "nope", {"noinput":true}, {"input":"2"}]"#;
        let tests = parse_response(raw, 10);
        assert_eq!(tests.len(), 2);
    }

    #[test]
    fn unit_parse_truncates_to_expected_count() {
        let raw = r#"[{"input":"1"},{"input":"2"},{"input":"3"}]"#;
        assert_eq!(parse_response(raw, 2).len(), 2);
    }

    #[test]
    fn unit_parse_garbage_yields_empty() {
        assert!(parse_response("total nonsense", 5).is_empty());
        assert!(parse_response("", 5).is_empty());
        assert!(parse_response("{\"data\": []}", 5).is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn prop_parser_never_panics(raw in "\\PC{0,300}", n in 0usize..20) {
            let tests = parse_response(&raw, n);
            prop_assert!(tests.len() <= n);
        }

        #[test]
        fn prop_parsed_inputs_always_pass_validation(raw in "\\PC{0,300}") {
            for t in parse_response(&raw, 16) {
                prop_assert!(matches!(validate_test_input(&t.input), InputVerdict::Accepted));
            }
        }
    }
}
