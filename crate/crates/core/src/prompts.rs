//! The eight-strategy prompt library.
//!
//! Every prompt is: strategy header, the program under test between delimiter
//! lines, then a common tail carrying live coverage numbers, the dedup list,
//! and the batch size. The exact text matters — it steers which paths the
//! model explores, which in turn shapes the reward signal — so the rendered
//! prompts are pinned byte-for-byte by fixture tests and the committed
//! fixtures are the source of truth for the template wording.

use crate::mdp::ActionId;

/// One of the eight prompting strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: ActionId,
    pub name: &'static str,
    /// Strategy instruction; `{X}`/`{Y}` markers are replaced with live
    /// line/branch coverage where a template references them.
    pub header: &'static str,
}

const BVA_HEADER: &str = "You are an expert test engineer using Boundary Value Analysis (BVA).\nSTRATEGY: For every input variable, identify its valid range and generate tests at: Minimum valid value, minimum+1; Maximum valid value, maximum-1; Zero, Negative zero, Empty; Just below minimum (invalid), Just above maximum (invalid); Powers-of-2 boundaries (127, 128, 255, 256, 32767, 32768, 65535, 65536).";

const BCE_HEADER: &str = "You are a Branch Coverage specialist using systematic condition analysis.\nSTRATEGY: Enumerate EVERY branch point (if/else, switch/case, ternary, short-circuit &&/||). For each branch: (1) Create input forcing the TRUE path; (2) Create input forcing the FALSE path; (3) Create input hitting the boundary condition exactly. Focus on branches NOT yet covered (current branch coverage: {Y}%).";

const ECH_HEADER: &str = "You are an Edge Case specialist finding unusual failure modes.\nSTRATEGY: Generate extreme and unusual inputs: Very large numbers (INT_MAX, LONG_MAX, 999999999); Very small/negative (INT_MIN, -999999999); Empty input, single character, very long strings (100+ chars); Special characters: spaces only, tabs, mixed whitespace; Repeated patterns, alternating patterns; Multiple valid inputs on separate lines vs single line.";

const EPE_HEADER: &str = "You are an Error Path testing specialist.\nSTRATEGY: Create inputs that trigger error/failure handling: Invalid format (letters when numbers expected, wrong delimiters); Missing required input fields; Division by zero conditions; Array/buffer boundary violations; Negative counts or sizes; Overflow/underflow triggers; Malformed input that reaches error branches; EOF/premature termination scenarios.";

const LBT_HEADER: &str = "You are a Loop Testing specialist.\nSTRATEGY: For each loop in the code, create inputs that: Skip the loop entirely (0 iterations); Execute exactly 1 iteration; Execute exactly 2 iterations; Execute the typical/expected number of iterations; Execute maximum possible iterations; Trigger early break/continue/return from within the loop; Test loop counter overflow or underflow; Test nested loop combinations.";

const DTS_HEADER: &str = "You are a Data Type Stress testing specialist.\nSTRATEGY: Test type-specific boundaries and conversions: Integer limits: 0, -1, 1, 127, -128, 255, 256, 32767, -32768, 2147483647, -2147483648; Floating point: 0.0, -0.0, very small (0.0001), very large (1e38); String lengths: 0, 1, typical, very long; Leading zeros (007, 0123); Whitespace padding before/after numbers; Scientific notation (1e5, 2E-3).";

const PCM_HEADER: &str = "You are a Path Coverage specialist using Control Flow Analysis.\nSTRATEGY: Enumerate distinct execution paths from entry to exit: (1) Draw the control flow graph mentally; (2) List unique paths through the graph; (3) For each uncovered path, find the simplest input that forces that exact path; (4) Prioritise paths reaching lines NOT yet covered (current line coverage: {X}%); (5) Target deep nesting levels and rarely reached code sections; (6) Consider early returns and exception paths.";

const FUZZ_HEADER: &str = "You are a Fuzz Testing specialist generating creative, diverse inputs.\nSTRATEGY: Generate maximally diverse inputs using multiple strategies: Random valid inputs from different value ranges; Inputs mixing multiple data types (numbers+text); Inputs with unusual but valid formatting; Adversarial patterns that parsers might mishandle; Inputs combining multiple edge cases simultaneously; Inputs inspired by common vulnerability patterns; Permutations and combinations of basic valid inputs; Stress tests with repeated characters or patterns. Maximise DIVERSITY - each test should be as different as possible from all others.";

const COMMON_TAIL: &str = "Current cumulative coverage so far: Line {X}%, Branch {Y}%.\nAlready-generated inputs (avoid duplicates): {EXISTING}\n\nRULES:\n1. Inputs MUST be strictly printable ASCII (codes 32-126) plus newline and tab. NO null bytes or binary.\n2. Act as a C interpreter: TRACE execution and CALCULATE EXACT stdout.\n3. If the program prints nothing, expectedOutput = \"\".\n4. Every test MUST be unique vs existing inputs above.\n\nGenerate EXACTLY {N} test cases. Return ONLY valid JSON (no markdown fences, no prose).";

static TEMPLATES: [PromptTemplate; 8] = [
    PromptTemplate { id: ActionId(0), name: "BVA", header: BVA_HEADER },
    PromptTemplate { id: ActionId(1), name: "BCE", header: BCE_HEADER },
    PromptTemplate { id: ActionId(2), name: "ECH", header: ECH_HEADER },
    PromptTemplate { id: ActionId(3), name: "EPE", header: EPE_HEADER },
    PromptTemplate { id: ActionId(4), name: "LBT", header: LBT_HEADER },
    PromptTemplate { id: ActionId(5), name: "DTS", header: DTS_HEADER },
    PromptTemplate { id: ActionId(6), name: "PCM", header: PCM_HEADER },
    PromptTemplate { id: ActionId(7), name: "FUZZ", header: FUZZ_HEADER },
];

/// All eight templates, in action order.
pub fn templates() -> &'static [PromptTemplate; 8] {
    &TEMPLATES
}

/// The template an action selects.
pub fn template_for(action: ActionId) -> &'static PromptTemplate {
    &TEMPLATES[action.index()]
}

/// Everything needed to render one prompt.
#[derive(Debug, Clone)]
pub struct PromptRequest<'a> {
    pub template: &'static PromptTemplate,
    pub source_code: &'a str,
    /// Cumulative line coverage percentage, in [0,100].
    pub line_pct: f64,
    /// Cumulative branch coverage percentage, in [0,100].
    pub branch_pct: f64,
    pub batch_size: usize,
    /// Prior test inputs, oldest first. Only the most recent 50 are rendered.
    pub existing_inputs: &'a [String],
}

/// How many prior inputs the dedup list may carry; older entries are dropped
/// so prompts cannot grow without bound.
pub const DEDUP_LIST_LIMIT: usize = 50;

/// Renders the full prompt for one generation call. Deterministic; coverage
/// numbers are formatted with one decimal place.
pub fn build_prompt(request: &PromptRequest) -> String {
    assert!(request.batch_size >= 1, "batch_size must be at least 1");

    let x = format!("{:.1}", request.line_pct);
    let y = format!("{:.1}", request.branch_pct);
    let n = request.batch_size.to_string();

    let header = request.template.header.replace("{X}", &x).replace("{Y}", &y);

    let skip = request.existing_inputs.len().saturating_sub(DEDUP_LIST_LIMIT);
    let recent = &request.existing_inputs[skip..];
    let existing_json =
        serde_json::to_string(recent).expect("string list is always serializable");

    // Substitute the scalar markers first, then splice the dedup list in one
    // non-repeating step so marker-shaped bytes inside user inputs are never
    // re-substituted.
    let tail = COMMON_TAIL
        .replace("{X}", &x)
        .replace("{Y}", &y)
        .replace("{N}", &n)
        .replacen("{EXISTING}", &existing_json, 1);

    let mut source = request.source_code.to_string();
    if !source.ends_with('\n') {
        source.push('\n');
    }

    format!("{header}\n\nPROGRAM UNDER TEST:\n{source}END PROGRAM UNDER TEST\n\n{tail}\n")
}

/// The reference request behind the committed prompt fixtures: the two-branch
/// sign program at mid-run coverage, three prior inputs, batch of five. The
/// `prompts dump` CLI renders it so on-disk fixtures can be re-derived and
/// diffed.
pub fn reference_request(template: &'static PromptTemplate) -> PromptRequest<'static> {
    static INPUTS: std::sync::OnceLock<Vec<String>> = std::sync::OnceLock::new();
    let inputs = INPUTS.get_or_init(|| vec!["5\n".into(), "-3\n".into(), "0\n".into()]);
    PromptRequest {
        template,
        source_code: include_str!("../tests/fixtures/sign.c"),
        line_pct: 48.2,
        branch_pct: 16.3,
        batch_size: 5,
        existing_inputs: inputs,
    }
}

/// Why an input was rejected, if it was.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputVerdict {
    Accepted,
    /// First offending byte and its offset.
    Rejected { offset: usize, byte: u8 },
}

/// Checks the printable-ASCII discipline for test inputs: every byte must be
/// tab (9), newline (10), or in 32..=126.
pub fn validate_test_input(input: &str) -> InputVerdict {
    for (offset, byte) in input.bytes().enumerate() {
        let ok = byte == 9 || byte == 10 || (32..=126).contains(&byte);
        if !ok {
            return InputVerdict::Rejected { offset, byte };
        }
    }
    InputVerdict::Accepted
}
