//! Source minification pass that runs before test generation.
//!
//! The program is split into byte-exact fragments (one per top-level
//! function, everything else grouped into preambles). Each function fragment
//! is sent to the LLM with a tree-of-thought refactoring prompt; the
//! candidate it returns is accepted only if it does not grow the fragment
//! and the reassembled program proves behaviorally equivalent to the
//! original. With a C toolchain available, equivalence means compiling both
//! programs and comparing (exit status, stdout) byte-for-byte over a fixed
//! set of seed inputs; without one, an LLM self-check stands in and the
//! outcome is flagged advisory. A fragment that fails verification gets
//! exactly one more attempt, then keeps its original text.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coverage::gcov::{pipe_through, run_compiler, ToolchainConfig};
use crate::coverage::HarnessError;
use crate::llm::LlmClient;
use crate::metrics::{self, analyze, CharClass, ScanError};

/// First line of the refactoring prompt; the scripted mock keys on it.
pub const TOT_PROMPT_FIRST_LINE: &str = "You are a C code optimization agent.";
/// First line of the self-check verification prompt.
pub const VERIFY_PROMPT_FIRST_LINE: &str = "You are a C program equivalence verifier.";

/// How many seed inputs [`seed_inputs`] produces.
pub const SEED_INPUT_COUNT: usize = 32;

#[derive(Debug, Error)]
pub enum StageOneError {
    #[error("fragmentation failed at line {line}: {detail}")]
    Fragmentation { line: usize, detail: String },
    #[error("source does not scan: {0}")]
    Scan(#[from] ScanError),
    #[error("original program failed to build: {diagnostics}")]
    OriginalBuild { diagnostics: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FragmentKind {
    Function,
    Preamble,
}

/// One byte slice of the original file. Concatenating all fragments in id
/// order reproduces the file exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub id: usize,
    pub kind: FragmentKind,
    pub text: String,
    /// Name of the defined function, for function fragments.
    pub name: Option<String>,
    /// Ids of fragments whose function name this fragment references.
    /// Mutual recursion shows up as a two-cycle between function fragments;
    /// preambles have no name, so nothing can depend on them.
    pub depends_on: BTreeSet<usize>,
}

/// Splits `source` into top-level units on `;` and `}` at brace depth zero,
/// classifying a unit as a function when an identifier-led parenthesis group
/// immediately precedes its opening `{`. Consecutive non-function units merge
/// into preamble fragments. The split is a partition: no byte is dropped or
/// duplicated.
pub fn fragmentize(source: &str) -> Result<Vec<Fragment>, StageOneError> {
    let mut events: Vec<(usize, char, CharClass)> = Vec::new();
    metrics::scan_chars(source, |off, ch, class| events.push((off, ch, class)))?;

    struct Unit {
        start: usize,
        end: usize,
        fn_name: Option<String>,
    }

    let mut units: Vec<Unit> = Vec::new();
    let mut seg_start = 0usize;
    let mut line = 1usize;
    let mut depth = 0usize;
    let mut open_brace_lines: Vec<usize> = Vec::new();
    let mut ident_buf = String::new();
    let mut last_ident: Option<String> = None;
    let mut paren_stack: Vec<Option<String>> = Vec::new();
    let mut pending_fn: Option<String> = None;
    let mut unit_fn: Option<String> = None;
    let mut in_directive = false;
    let mut splice_pending = false;

    let mut i = 0usize;
    while i < events.len() {
        let (off, ch, class) = events[i];

        if in_directive {
            // A directive runs to the end of its line, honoring backslash
            // splices and comments: a newline inside a block comment does not
            // terminate it, and neither does one preceded immediately by `\`.
            if ch == '\n' {
                line += 1;
            }
            i += 1;
            if ch == '\n' && class != CharClass::Comment {
                if splice_pending {
                    splice_pending = false;
                    continue;
                }
                in_directive = false;
                if depth == 0 && paren_stack.is_empty() {
                    units.push(Unit { start: seg_start, end: off + 1, fn_name: None });
                    seg_start = off + 1;
                    ident_buf.clear();
                    last_ident = None;
                    pending_fn = None;
                }
                continue;
            }
            splice_pending = class == CharClass::Code && ch == '\\';
            continue;
        }

        if class != CharClass::Code {
            // Comments and literal interiors are invisible to structure; they
            // neither break an `ident (args) {` sequence nor nest braces.
            if ch == '\n' {
                line += 1;
            }
            i += 1;
            continue;
        }

        if ch == '_' || ch.is_alphanumeric() {
            if ident_buf.is_empty() && ch.is_ascii_digit() {
                // A number token, not an identifier.
                last_ident = None;
                pending_fn = None;
            } else {
                ident_buf.push(ch);
            }
            i += 1;
            continue;
        }
        if !ident_buf.is_empty() {
            last_ident = Some(std::mem::take(&mut ident_buf));
        }

        let mut unit_ends = false;
        if ch.is_whitespace() {
            // Whitespace separates tokens but keeps the pending state alive.
        } else {
            match ch {
                '(' => {
                    paren_stack.push(last_ident.take());
                    pending_fn = None;
                }
                ')' => {
                    let opener = paren_stack.pop().flatten();
                    if depth == 0 && paren_stack.is_empty() {
                        pending_fn = opener;
                    }
                    last_ident = None;
                }
                '{' => {
                    if depth == 0 && paren_stack.is_empty() {
                        if let Some(name) = pending_fn.take() {
                            unit_fn = Some(name);
                        }
                    }
                    depth += 1;
                    open_brace_lines.push(line);
                    last_ident = None;
                    pending_fn = None;
                }
                '}' => {
                    if depth == 0 {
                        return Err(StageOneError::Fragmentation {
                            line,
                            detail: "unmatched '}'".into(),
                        });
                    }
                    depth -= 1;
                    open_brace_lines.pop();
                    last_ident = None;
                    pending_fn = None;
                    if depth == 0 && paren_stack.is_empty() {
                        unit_ends = true;
                    }
                }
                ';' => {
                    last_ident = None;
                    pending_fn = None;
                    if depth == 0 && paren_stack.is_empty() {
                        unit_ends = true;
                    }
                }
                '#' => {
                    // Preprocessor directives are structurally invisible:
                    // braces or parens inside a macro body must not unbalance
                    // the scanner. At top level each directive line also
                    // closes the current unit, so includes and defines land
                    // in preamble fragments instead of gluing onto the
                    // function that follows them.
                    in_directive = true;
                    splice_pending = false;
                    last_ident = None;
                    pending_fn = None;
                }
                _ => {
                    last_ident = None;
                    pending_fn = None;
                }
            }
        }

        if ch == '\n' {
            line += 1;
        }
        i += 1;

        if unit_ends {
            let mut end = off + ch.len_utf8();
            // Pull a trailing comment/whitespace line tail into this unit,
            // but never a newline that sits inside a block comment (the next
            // unit must start at a clean scanner state).
            let mut j = i;
            while j < events.len() {
                let (off2, c2, cl2) = events[j];
                if c2 == '\n' {
                    if cl2 == CharClass::Comment {
                        break;
                    }
                    end = off2 + 1;
                    break;
                }
                match cl2 {
                    CharClass::Comment => j += 1,
                    CharClass::Code if c2.is_whitespace() => j += 1,
                    _ => break,
                }
            }
            while i < events.len() && events[i].0 < end {
                if events[i].1 == '\n' {
                    line += 1;
                }
                i += 1;
            }
            units.push(Unit { start: seg_start, end, fn_name: unit_fn.take() });
            seg_start = end;
            ident_buf.clear();
            last_ident = None;
            paren_stack.clear();
            pending_fn = None;
        }
    }

    if depth != 0 {
        return Err(StageOneError::Fragmentation {
            line: open_brace_lines.last().copied().unwrap_or(line),
            detail: "unclosed '{'".into(),
        });
    }
    if seg_start < source.len() {
        units.push(Unit { start: seg_start, end: source.len(), fn_name: None });
    }

    // Merge runs of non-function units; functions stand alone.
    let mut fragments: Vec<Fragment> = Vec::new();
    for unit in units {
        let text = &source[unit.start..unit.end];
        match (&unit.fn_name, fragments.last_mut()) {
            (None, Some(prev)) if prev.kind == FragmentKind::Preamble => {
                prev.text.push_str(text);
            }
            _ => {
                let kind = if unit.fn_name.is_some() {
                    FragmentKind::Function
                } else {
                    FragmentKind::Preamble
                };
                fragments.push(Fragment {
                    id: fragments.len(),
                    kind,
                    text: text.to_string(),
                    name: unit.fn_name,
                    depends_on: BTreeSet::new(),
                });
            }
        }
    }

    // Dependencies: fragment → every other fragment whose function name it
    // mentions as an identifier.
    let names: Vec<(usize, String)> = fragments
        .iter()
        .filter_map(|f| f.name.clone().map(|n| (f.id, n)))
        .collect();
    for fragment in &mut fragments {
        let idents = identifier_set(&fragment.text);
        fragment.depends_on = names
            .iter()
            .filter(|(id, name)| *id != fragment.id && idents.contains(name.as_str()))
            .map(|(id, _)| *id)
            .collect();
    }
    Ok(fragments)
}

/// All identifier tokens in `text`, with comments and literals ignored.
fn identifier_set(text: &str) -> BTreeSet<String> {
    let mut idents = BTreeSet::new();
    let mut buf = String::new();
    let _ = metrics::scan_chars(text, |_, ch, class| {
        let ident_char = class == CharClass::Code && (ch == '_' || ch.is_alphanumeric());
        if ident_char && !(buf.is_empty() && ch.is_ascii_digit()) {
            buf.push(ch);
        } else if !buf.is_empty() {
            idents.insert(std::mem::take(&mut buf));
        }
    });
    if !buf.is_empty() {
        idents.insert(buf);
    }
    idents
}

/// Builds the tree-of-thought refactoring prompt for one fragment.
pub fn build_tot_prompt(fragment_text: &str) -> String {
    let mut body = fragment_text.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    format!(
        "{TOT_PROMPT_FIRST_LINE}\n\
         Refactor the C fragment below to reduce its line count while preserving its exact behavior.\n\
         \n\
         Think through a tree of candidate refactorings:\n\
         1. List at least 3 distinct candidates. Consider: removing dead code, merging repeated variable assignments, simplifying complex conditional expressions, collapsing loops into single statements.\n\
         2. Rate each candidate on correctness preservation and on line-count reduction.\n\
         3. Keep only the highest-rated candidate.\n\
         \n\
         Reply with ONLY the refactored fragment as C code (one code block, no commentary).\n\
         \n\
         FRAGMENT:\n\
         ```c\n\
         {body}```\n"
    )
}

/// Builds the self-check prompt used when no toolchain is available.
pub fn build_verify_prompt(original: &str, candidate: &str) -> String {
    let mut a = original.to_string();
    if !a.ends_with('\n') {
        a.push('\n');
    }
    let mut b = candidate.to_string();
    if !b.ends_with('\n') {
        b.push('\n');
    }
    format!(
        "{VERIFY_PROMPT_FIRST_LINE}\n\
         Decide whether these two C programs are behaviorally equivalent: same exit status and same stdout for every input.\n\
         Mentally execute representative inputs (zero, positive, negative, extremes, malformed).\n\
         Reply with exactly one word on the first line: EQUIVALENT or DIFFERENT.\n\
         \n\
         PROGRAM A:\n\
         ```c\n\
         {a}```\n\
         \n\
         PROGRAM B:\n\
         ```c\n\
         {b}```\n"
    )
}

/// Pulls the code out of a model reply: the first fenced block when one
/// exists, otherwise the whole trimmed text. `None` when nothing remains.
fn extract_code_block(raw: &str) -> Option<String> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return None;
    }
    let body = match trimmed.find("```") {
        Some(open) => {
            let after = &trimmed[open + 3..];
            // Skip the info string ("c", "json", …) on the fence line.
            let start = after.find('\n').map(|i| i + 1).unwrap_or(0);
            let inner = &after[start..];
            match inner.find("```") {
                Some(close) => &inner[..close],
                None => inner,
            }
        }
        None => trimmed,
    };
    let body = body.trim_matches('\n');
    if body.trim().is_empty() {
        None
    } else {
        Some(format!("{body}\n"))
    }
}

/// Deterministic differential-testing inputs: 16 canonical values covering
/// the usual integer and text edge cases, plus 16 printable-ASCII strings
/// from a seeded generator.
pub fn seed_inputs(seed: u64) -> Vec<String> {
    let mut inputs: Vec<String> = [
        "",
        "\n",
        "0\n",
        "1\n",
        "-1\n",
        "2147483647\n",
        "-2147483648\n",
        "42\n",
        "100 200\n",
        "a\n",
        "hello world\n",
        "The quick brown fox jumps over the lazy dog. 1234567890\n",
        "   \n",
        "\t\t\n",
        "0 1 2 3 4 5 6 7 8 9\n",
        "-999999\n",
    ]
    .into_iter()
    .map(String::from)
    .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..16 {
        let len = rng.random_range(1..=16);
        let mut s: String =
            (0..len).map(|_| rng.random_range(32u8..=126) as char).collect();
        s.push('\n');
        inputs.push(s);
    }
    inputs
}

/// `(LOC_orig − LOC_opt) / LOC_orig × 100`, clamped at zero.
///
/// # Panics
/// When `original_loc` is zero.
pub fn loc_reduction(original_loc: usize, optimized_loc: usize) -> f64 {
    assert!(original_loc > 0, "loc_reduction needs a non-empty original");
    ((original_loc as f64 - optimized_loc as f64) / original_loc as f64 * 100.0).max(0.0)
}

/// Equivalence verdict for one candidate program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Differentially tested: both compiled, all seed runs matched.
    Equivalent,
    /// An LLM self-check said equivalent; nothing was executed.
    AdvisoryEquivalent,
    NotEquivalent(String),
}

/// Compiles the pristine original once and checks candidates against it.
struct DifferentialVerifier {
    toolchain: ToolchainConfig,
    orig_dir: PathBuf,
    cand_dir: PathBuf,
    seeds: Vec<String>,
}

impl DifferentialVerifier {
    fn new(
        original: &str,
        seeds: Vec<String>,
        toolchain: ToolchainConfig,
        workdir: &Path,
    ) -> Result<DifferentialVerifier, StageOneError> {
        let orig_dir = workdir.join("original");
        let cand_dir = workdir.join("candidate");
        fs::create_dir_all(&orig_dir)?;
        fs::create_dir_all(&cand_dir)?;
        fs::write(orig_dir.join("src.c"), original)?;
        compile_plain(&toolchain, &orig_dir)
            .map_err(|diagnostics| StageOneError::OriginalBuild { diagnostics })?;
        Ok(DifferentialVerifier { toolchain, orig_dir, cand_dir, seeds })
    }

    fn verify(&self, candidate: &str) -> Result<Verdict, StageOneError> {
        fs::write(self.cand_dir.join("src.c"), candidate)?;
        if let Err(diagnostics) = compile_plain(&self.toolchain, &self.cand_dir) {
            return Ok(Verdict::NotEquivalent(format!("candidate build: {diagnostics}")));
        }
        let timeout = self.toolchain.timeout_per_test;
        for (idx, seed) in self.seeds.iter().enumerate() {
            let a = pipe_through(&self.orig_dir.join("bin"), &self.orig_dir, seed.as_bytes(), timeout)?;
            let b = pipe_through(&self.cand_dir.join("bin"), &self.cand_dir, seed.as_bytes(), timeout)?;
            if a.timed_out || b.timed_out {
                return Ok(Verdict::NotEquivalent(format!("seed {idx}: run timed out")));
            }
            // Signal deaths surface as exit_code None on both sides; a crash
            // matching a crash counts as agreement.
            if a.exit_code != b.exit_code {
                return Ok(Verdict::NotEquivalent(format!(
                    "seed {idx}: exit {:?} vs {:?}",
                    a.exit_code, b.exit_code
                )));
            }
            if a.stdout != b.stdout {
                return Ok(Verdict::NotEquivalent(format!("seed {idx}: stdout differs")));
            }
        }
        Ok(Verdict::Equivalent)
    }
}

fn compile_plain(toolchain: &ToolchainConfig, dir: &Path) -> Result<(), String> {
    match run_compiler(toolchain, dir, &["src.c", "-o", "bin"]) {
        Ok(()) => Ok(()),
        Err(HarnessError::CompileFailed { diagnostics }) => Err(diagnostics),
        Err(other) => Err(other.to_string()),
    }
}

/// Checks `candidate` against `original` over `seeds`. With a toolchain the
/// check is differential execution; without one the LLM self-check decides
/// and the verdict is advisory.
pub fn verify_equivalence(
    original: &str,
    candidate: &str,
    seeds: &[String],
    toolchain: Option<&ToolchainConfig>,
    llm: &mut LlmClient,
    workdir: &Path,
) -> Result<Verdict, StageOneError> {
    match toolchain {
        Some(tc) => {
            let verifier =
                DifferentialVerifier::new(original, seeds.to_vec(), tc.clone(), workdir)?;
            verifier.verify(candidate)
        }
        None => Ok(advisory_check(llm, original, candidate)),
    }
}

fn advisory_check(llm: &mut LlmClient, original: &str, candidate: &str) -> Verdict {
    let prompt = build_verify_prompt(original, candidate);
    let reply = match llm.complete_text(&prompt) {
        Ok(text) => text,
        Err(e) => return Verdict::NotEquivalent(format!("self-check failed: {e}")),
    };
    let first = reply.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.trim().to_ascii_uppercase().starts_with("EQUIVALENT") {
        Verdict::AdvisoryEquivalent
    } else {
        Verdict::NotEquivalent(format!("self-check verdict: {}", first.trim()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    Optimized,
    KeptOriginal,
    FailedVerificationOnceThenKept,
}

#[derive(Debug, Clone, Serialize)]
pub struct FragmentOutcome {
    pub fragment_id: usize,
    pub kind: FragmentKind,
    pub status: OutcomeStatus,
    pub original_loc: usize,
    pub optimized_loc: usize,
    /// True when the accepting verdict was an LLM self-check.
    pub advisory: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageOneReport {
    pub outcomes: Vec<FragmentOutcome>,
    pub original_loc: usize,
    pub optimized_loc: usize,
    pub loc_reduction_pct: f64,
    /// Fragments accepted on an advisory (non-executed) verdict.
    pub advisory_accept_count: usize,
}

pub struct StageOneOptions {
    /// `None` switches verification to the advisory LLM self-check.
    pub toolchain: Option<ToolchainConfig>,
    /// Seed for the random half of the differential inputs.
    pub seed: u64,
    /// Scratch space for compiles and runs.
    pub workdir: PathBuf,
}

enum Attempt {
    Accepted { text: String, loc: usize, advisory: bool },
    /// No usable candidate came back (empty, unparseable, or grew).
    NoCandidate,
    FailedVerification,
}

/// Runs the full minification pass and returns the optimized program with a
/// per-fragment report. The output is always assembled from verified
/// candidates and byte-original fragments — never from an unverified
/// candidate.
pub fn optimize_program(
    source: &str,
    llm: &mut LlmClient,
    options: &StageOneOptions,
) -> Result<(String, StageOneReport), StageOneError> {
    let fragments = fragmentize(source)?;
    let mut texts: Vec<String> = fragments.iter().map(|f| f.text.clone()).collect();

    let verifier = match &options.toolchain {
        Some(tc) => {
            fs::create_dir_all(&options.workdir)?;
            Some(DifferentialVerifier::new(
                source,
                seed_inputs(options.seed),
                tc.clone(),
                &options.workdir,
            )?)
        }
        None => None,
    };

    let mut outcomes = Vec::with_capacity(fragments.len());
    for fragment in &fragments {
        let original_loc = analyze(&fragment.text).loc;
        if fragment.kind == FragmentKind::Preamble {
            // Includes, globals and typedefs carry no refactorable logic;
            // touching them risks the build for no line-count payoff.
            outcomes.push(FragmentOutcome {
                fragment_id: fragment.id,
                kind: fragment.kind,
                status: OutcomeStatus::KeptOriginal,
                original_loc,
                optimized_loc: original_loc,
                advisory: false,
            });
            continue;
        }

        let first = attempt_fragment(
            llm,
            &fragment.text,
            original_loc,
            fragment.id,
            &texts,
            source,
            verifier.as_ref(),
        )?;
        let (status, accepted) = match first {
            Attempt::Accepted { text, loc, advisory } => {
                (OutcomeStatus::Optimized, Some((text, loc, advisory)))
            }
            Attempt::NoCandidate => (OutcomeStatus::KeptOriginal, None),
            Attempt::FailedVerification => {
                // One resubmission, then the fragment keeps its original form.
                let second = attempt_fragment(
                    llm,
                    &fragment.text,
                    original_loc,
                    fragment.id,
                    &texts,
                    source,
                    verifier.as_ref(),
                )?;
                match second {
                    Attempt::Accepted { text, loc, advisory } => {
                        (OutcomeStatus::Optimized, Some((text, loc, advisory)))
                    }
                    _ => (OutcomeStatus::FailedVerificationOnceThenKept, None),
                }
            }
        };

        let (optimized_loc, advisory) = match accepted {
            Some((text, loc, advisory)) => {
                texts[fragment.id] = text;
                (loc, advisory)
            }
            None => (original_loc, false),
        };
        outcomes.push(FragmentOutcome {
            fragment_id: fragment.id,
            kind: fragment.kind,
            status,
            original_loc,
            optimized_loc,
            advisory,
        });
    }

    let assembled: String = texts.concat();
    let original_loc = analyze(source).loc;
    let optimized_loc = analyze(&assembled).loc;
    let loc_reduction_pct =
        if original_loc == 0 { 0.0 } else { loc_reduction(original_loc, optimized_loc) };
    let advisory_accept_count = outcomes.iter().filter(|o| o.advisory).count();
    let report = StageOneReport {
        outcomes,
        original_loc,
        optimized_loc,
        loc_reduction_pct,
        advisory_accept_count,
    };
    Ok((assembled, report))
}

/// One optimize-and-verify cycle for a fragment. `texts` holds the working
/// program (earlier accepted candidates already folded in); the candidate is
/// verified as part of the whole assembled program against the pristine
/// original, so acceptance always implies end-to-end equivalence.
fn attempt_fragment(
    llm: &mut LlmClient,
    fragment_text: &str,
    fragment_loc: usize,
    fragment_id: usize,
    texts: &[String],
    original_source: &str,
    verifier: Option<&DifferentialVerifier>,
) -> Result<Attempt, StageOneError> {
    let prompt = build_tot_prompt(fragment_text);
    let reply = match llm.complete_text(&prompt) {
        Ok(text) => text,
        Err(_) => return Ok(Attempt::NoCandidate),
    };
    let candidate = match extract_code_block(&reply) {
        Some(text) => text,
        None => return Ok(Attempt::NoCandidate),
    };
    let candidate_loc = analyze(&candidate).loc;
    if candidate_loc == 0 || candidate_loc > fragment_loc {
        // Never accept growth; never silently delete a whole fragment.
        return Ok(Attempt::NoCandidate);
    }

    let assembled: String = texts
        .iter()
        .enumerate()
        .map(|(i, t)| if i == fragment_id { candidate.as_str() } else { t.as_str() })
        .collect();
    let verdict = match verifier {
        Some(v) => v.verify(&assembled)?,
        None => advisory_check(llm, original_source, &assembled),
    };
    match verdict {
        Verdict::Equivalent => {
            Ok(Attempt::Accepted { text: candidate, loc: candidate_loc, advisory: false })
        }
        Verdict::AdvisoryEquivalent => {
            Ok(Attempt::Accepted { text: candidate, loc: candidate_loc, advisory: true })
        }
        Verdict::NotEquivalent(_) => Ok(Attempt::FailedVerification),
    }
}
