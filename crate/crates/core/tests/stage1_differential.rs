//! End-to-end minification runs: scripted optimizer replies, real compiles,
//! differential verification. Skipped when no C toolchain is installed.

use std::process::Command;

use covgen_core::coverage::gcov::ToolchainConfig;
use covgen_core::llm::mock::{MockBackend, MockScript};
use covgen_core::llm::LlmClient;
use covgen_core::metrics::analyze;
use covgen_core::stage1::{
    loc_reduction, optimize_program, seed_inputs, verify_equivalence, OutcomeStatus,
    StageOneOptions, Verdict,
};

const DEMO_C: &str = include_str!("fixtures/stage1_demo.c");
const DEMO_SCRIPT: &str = include_str!("fixtures/mock_scripts/stage1_demo.json");

fn toolchain_available() -> bool {
    Command::new(ToolchainConfig::default().compiler)
        .arg("--version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

macro_rules! require_toolchain {
    () => {
        if !toolchain_available() {
            eprintln!("skipping: no C toolchain available");
            return;
        }
    };
}

fn mock(script: &str) -> LlmClient {
    LlmClient::Mock(MockBackend::new(MockScript::from_json(script).unwrap()))
}

fn options(dir: &std::path::Path) -> StageOneOptions {
    StageOneOptions {
        toolchain: Some(ToolchainConfig::default()),
        seed: 42,
        workdir: dir.to_path_buf(),
    }
}

#[test]
fn functional_accepts_verified_and_keeps_original_on_failed_verification() {
    require_toolchain!();
    let dir = tempfile::tempdir().unwrap();
    let mut llm = mock(DEMO_SCRIPT);
    let (assembled, report) = optimize_program(DEMO_C, &mut llm, &options(dir.path())).unwrap();

    // scale: correct three-line refactor accepted.
    assert!(assembled.contains("int scale(int v) {\n    return v * 2;\n}"));
    // sign_of: both candidates flipped the boundary at zero; the byte-original
    // fragment must survive.
    assert!(assembled.contains("int sign_of(int x) {\n    if (x > 0) {"));
    assert!(!assembled.contains("x >= 0"));

    let statuses: Vec<OutcomeStatus> = report.outcomes.iter().map(|o| o.status).collect();
    assert_eq!(
        statuses,
        vec![
            OutcomeStatus::KeptOriginal, // preamble, never submitted
            OutcomeStatus::Optimized,
            OutcomeStatus::FailedVerificationOnceThenKept,
            OutcomeStatus::KeptOriginal, // main: script has no reply left
        ]
    );
    assert_eq!(report.advisory_accept_count, 0);

    // The reported reduction must match the formula applied to the artifact.
    let expected = loc_reduction(analyze(DEMO_C).loc, analyze(&assembled).loc);
    assert!((report.loc_reduction_pct - expected).abs() < 1e-12);
    assert!(report.loc_reduction_pct > 0.0);
}

#[test]
fn functional_rejects_growing_candidate() {
    require_toolchain!();
    let dir = tempfile::tempdir().unwrap();
    // The candidate is equivalent but longer; the no-growth rule rejects it
    // before any compile happens.
    let mut llm = mock(
        r#"{
        "TOT:0": "```c\nint scale(int v) {\n    int doubled;\n    doubled = v;\n    doubled = doubled + v;\n    int result = doubled;\n    int padding = 0;\n    padding = padding;\n    return result + padding;\n}\n```"
    }"#,
    );
    let source = "\
#include <stdio.h>

int scale(int v) {
    return v + v;
}

int main(void) {
    int x = 0;
    scanf(\"%d\", &x);
    printf(\"%d\\n\", scale(x));
    return 0;
}
";
    let (assembled, report) = optimize_program(source, &mut llm, &options(dir.path())).unwrap();
    assert_eq!(assembled, source);
    // Fragment 1 is scale; growth is rejected outright, with no retry.
    assert_eq!(report.outcomes[1].status, OutcomeStatus::KeptOriginal);
    assert_eq!(report.loc_reduction_pct, 0.0);
}

#[test]
fn functional_unparseable_reply_keeps_original() {
    require_toolchain!();
    let dir = tempfile::tempdir().unwrap();
    let mut llm = mock(r#"{"TOT:0": "I would rather not refactor this."}"#);
    let source = "\
#include <stdio.h>

int id(int v) {
    return v;
}

int main(void) {
    int x = 0;
    scanf(\"%d\", &x);
    printf(\"%d\\n\", id(x));
    return 0;
}
";
    let (assembled, report) = optimize_program(source, &mut llm, &options(dir.path())).unwrap();
    // The prose reply parses as a "bare code" candidate but fails to compile,
    // so verification rejects it and the original survives byte-for-byte.
    assert_eq!(assembled, source);
    assert_ne!(report.outcomes[1].status, OutcomeStatus::Optimized);
}

#[test]
fn functional_verify_equivalence_reflexive() {
    require_toolchain!();
    let dir = tempfile::tempdir().unwrap();
    let program = "#include <stdio.h>\nint main(void) {\n    puts(\"hi\");\n    return 0;\n}\n";
    let mut llm = mock("{}");
    let verdict = verify_equivalence(
        program,
        program,
        &seed_inputs(1),
        Some(&ToolchainConfig::default()),
        &mut llm,
        dir.path(),
    )
    .unwrap();
    assert_eq!(verdict, Verdict::Equivalent);
}

#[test]
fn functional_verify_equivalence_catches_flipped_condition() {
    require_toolchain!();
    let dir = tempfile::tempdir().unwrap();
    let original = include_str!("fixtures/sign.c");
    let flipped = original.replace("x > 0", "x < 0");
    assert_ne!(original, flipped);
    let mut llm = mock("{}");
    let verdict = verify_equivalence(
        original,
        &flipped,
        &["5\n".to_string(), "-5\n".to_string()],
        Some(&ToolchainConfig::default()),
        &mut llm,
        dir.path(),
    )
    .unwrap();
    assert!(matches!(verdict, Verdict::NotEquivalent(_)), "got {verdict:?}");
}

#[test]
fn functional_verify_equivalence_times_out_infinite_candidate() {
    require_toolchain!();
    let dir = tempfile::tempdir().unwrap();
    let original = "#include <stdio.h>\nint main(void) {\n    puts(\"x\");\n    return 0;\n}\n";
    let looping = "#include <stdio.h>\nint main(void) {\n    for (;;) {\n    }\n    return 0;\n}\n";
    let toolchain = ToolchainConfig {
        timeout_per_test: std::time::Duration::from_millis(300),
        ..ToolchainConfig::default()
    };
    let mut llm = mock("{}");
    let verdict = verify_equivalence(
        original,
        looping,
        &["\n".to_string()],
        Some(&toolchain),
        &mut llm,
        dir.path(),
    )
    .unwrap();
    match verdict {
        Verdict::NotEquivalent(reason) => assert!(reason.contains("timed out"), "{reason}"),
        other => panic!("expected NotEquivalent, got {other:?}"),
    }
}

#[test]
fn functional_non_compiling_candidate_is_not_equivalent() {
    require_toolchain!();
    let dir = tempfile::tempdir().unwrap();
    let original = "int main(void) {\n    return 0;\n}\n";
    let broken = "int main(void) {\n    return syntax error\n}\n";
    let mut llm = mock("{}");
    let verdict = verify_equivalence(
        original,
        broken,
        &seed_inputs(3),
        Some(&ToolchainConfig::default()),
        &mut llm,
        dir.path(),
    )
    .unwrap();
    assert!(matches!(verdict, Verdict::NotEquivalent(_)));
}

#[test]
fn unit_advisory_mode_flags_accepts_and_counts_them() {
    // No toolchain: the LLM self-check is the only gate and the report says so.
    let dir = tempfile::tempdir().unwrap();
    let mut llm = mock(
        r#"{
        "TOT:0": "```c\nint scale(int v) {\n    return v * 2;\n}\n```",
        "VERIFY:0": "EQUIVALENT"
    }"#,
    );
    let source = "int scale(int v) {\n    int r = v;\n    r = r * 2;\n    return r;\n}\n";
    let options = StageOneOptions { toolchain: None, seed: 0, workdir: dir.path().to_path_buf() };
    let (assembled, report) = optimize_program(source, &mut llm, &options).unwrap();
    assert!(assembled.contains("return v * 2;"));
    assert_eq!(report.outcomes[0].status, OutcomeStatus::Optimized);
    assert!(report.outcomes[0].advisory);
    assert_eq!(report.advisory_accept_count, 1);
}

#[test]
fn unit_advisory_rejection_then_rejection_keeps_original() {
    let dir = tempfile::tempdir().unwrap();
    let mut llm = mock(
        r#"{
        "TOT:0": "```c\nint f(int v) {\n    return v;\n}\n```",
        "TOT:1": "```c\nint f(int v) {\n    return v;\n}\n```",
        "VERIFY:0": "DIFFERENT",
        "VERIFY:1": "DIFFERENT"
    }"#,
    );
    let source = "int f(int v) {\n    int r = v;\n    return r;\n}\n";
    let options = StageOneOptions { toolchain: None, seed: 0, workdir: dir.path().to_path_buf() };
    let (assembled, report) = optimize_program(source, &mut llm, &options).unwrap();
    assert_eq!(assembled, source);
    assert_eq!(
        report.outcomes[0].status,
        OutcomeStatus::FailedVerificationOnceThenKept
    );
    assert_eq!(report.advisory_accept_count, 0);
}
