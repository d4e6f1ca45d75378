//! Static source features of C programs via a comment/string-stripping token scan.
//!
//! This is deliberately not a C parser. Preprocessor directives are plain
//! lines, macros are never expanded, and function detection is a token-level
//! pattern (identifier, parameter list, `{` at brace depth zero). That is
//! enough for the coarse normalized features the state vector needs and keeps
//! the scanner robust on generated benchmark sources.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Static features of one source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeMetrics {
    /// Non-blank lines after comment stripping.
    pub loc: usize,
    /// Top-level function definitions.
    pub functions: usize,
    /// Static branch count: two per `if`/`?`/`&&`/`||`, one per `case` label.
    pub branches: usize,
    /// `for`, `while`, and `do` keyword occurrences.
    pub loops: usize,
    /// Decision points + loops + 1.
    pub cyclomatic: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScanError {
    #[error("unterminated block comment starting at line {line}")]
    UnterminatedBlockComment { line: usize },
    #[error("unterminated string literal starting at line {line}")]
    UnterminatedString { line: usize },
    #[error("unterminated character literal starting at line {line}")]
    UnterminatedChar { line: usize },
}

/// How the scanner classified one character of the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CharClass {
    /// Plain code, including string/char delimiter quotes.
    Code,
    /// Interior of a comment (the `//`, `/*`, `*/` markers included).
    Comment,
    /// Interior of a string or character literal (delimiters excluded).
    Literal,
}

/// Single pass over `source`, calling `emit(byte_offset, ch, class)` for every
/// character. Always completes; the first structural problem is reported as a
/// returned error (lenient recovery keeps classifying after it so callers that
/// tolerate malformed input still get best-effort classes).
pub(crate) fn scan_chars(
    source: &str,
    mut emit: impl FnMut(usize, char, CharClass),
) -> Result<(), ScanError> {
    #[derive(Clone, Copy)]
    enum State {
        Code,
        LineComment,
        BlockComment { start_line: usize },
        Str { start_line: usize },
        Chr { start_line: usize },
    }

    let mut state = State::Code;
    let mut line = 1usize;
    let mut issue: Option<ScanError> = None;
    let mut iter = source.char_indices().peekable();

    while let Some((off, ch)) = iter.next() {
        match state {
            State::Code => match ch {
                '/' if matches!(iter.peek(), Some((_, '/'))) => {
                    let (off2, c2) = iter.next().unwrap();
                    emit(off, ch, CharClass::Comment);
                    emit(off2, c2, CharClass::Comment);
                    state = State::LineComment;
                }
                '/' if matches!(iter.peek(), Some((_, '*'))) => {
                    let (off2, c2) = iter.next().unwrap();
                    emit(off, ch, CharClass::Comment);
                    emit(off2, c2, CharClass::Comment);
                    state = State::BlockComment { start_line: line };
                }
                '"' => {
                    emit(off, ch, CharClass::Code);
                    state = State::Str { start_line: line };
                }
                '\'' => {
                    emit(off, ch, CharClass::Code);
                    state = State::Chr { start_line: line };
                }
                _ => emit(off, ch, CharClass::Code),
            },
            State::LineComment => {
                if ch == '\n' {
                    emit(off, ch, CharClass::Code);
                    state = State::Code;
                } else {
                    emit(off, ch, CharClass::Comment);
                }
            }
            State::BlockComment { .. } => {
                if ch == '*' && matches!(iter.peek(), Some((_, '/'))) {
                    let (off2, c2) = iter.next().unwrap();
                    emit(off, ch, CharClass::Comment);
                    emit(off2, c2, CharClass::Comment);
                    state = State::Code;
                } else {
                    emit(off, ch, CharClass::Comment);
                }
            }
            State::Str { start_line } | State::Chr { start_line } => {
                let is_str = matches!(state, State::Str { .. });
                let delim = if is_str { '"' } else { '\'' };
                if ch == '\\' {
                    emit(off, ch, CharClass::Literal);
                    if let Some((off2, c2)) = iter.next() {
                        emit(off2, c2, CharClass::Literal);
                        if c2 == '\n' {
                            line += 1;
                        }
                    }
                    continue;
                } else if ch == delim {
                    emit(off, ch, CharClass::Code);
                    state = State::Code;
                } else if ch == '\n' {
                    // Raw newline inside a literal is malformed C. Recover by
                    // closing the literal here so the rest of the file still
                    // scans.
                    if issue.is_none() {
                        issue = Some(if is_str {
                            ScanError::UnterminatedString { line: start_line }
                        } else {
                            ScanError::UnterminatedChar { line: start_line }
                        });
                    }
                    emit(off, ch, CharClass::Code);
                    state = State::Code;
                } else {
                    emit(off, ch, CharClass::Literal);
                }
            }
        }
        if ch == '\n' {
            line += 1;
        }
    }

    if issue.is_none() {
        match state {
            State::BlockComment { start_line } => {
                issue = Some(ScanError::UnterminatedBlockComment { line: start_line });
            }
            State::Str { start_line } => {
                issue = Some(ScanError::UnterminatedString { line: start_line });
            }
            State::Chr { start_line } => {
                issue = Some(ScanError::UnterminatedChar { line: start_line });
            }
            State::Code | State::LineComment => {}
        }
    }

    match issue {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Removes comments and empties string/char literal contents while preserving
/// the line structure: every newline of the input survives, so line numbers in
/// the output match the original.
pub fn strip_comments_and_strings(source: &str) -> Result<String, ScanError> {
    let mut out = String::with_capacity(source.len());
    scan_chars(source, |_, ch, class| match class {
        CharClass::Code => out.push(ch),
        CharClass::Comment | CharClass::Literal => {
            if ch == '\n' {
                out.push('\n');
            }
        }
    })?;
    Ok(out)
}

/// Computes all five metrics for one source file. Total: malformed input is
/// scanned leniently and still produces best-effort counts.
pub fn analyze(source: &str) -> CodeMetrics {
    let mut stripped = String::with_capacity(source.len());
    // Deliberately ignore scan errors here; fragmentize and friends surface
    // them where structure actually matters.
    let _ = scan_chars(source, |_, ch, class| match class {
        CharClass::Code => stripped.push(ch),
        CharClass::Comment | CharClass::Literal => {
            if ch == '\n' {
                stripped.push('\n');
            }
        }
    });

    let loc = stripped
        .lines()
        .filter(|l| l.chars().any(|c| !c.is_whitespace()))
        .count();
    let counts = count_decisions(&stripped);

    let decision_points =
        counts.if_kw + counts.case_kw + counts.ternary + counts.logical;
    let loops = counts.for_kw + counts.while_kw + counts.do_kw;
    CodeMetrics {
        loc,
        functions: counts.functions,
        branches: 2 * (counts.if_kw + counts.ternary + counts.logical) + counts.case_kw,
        loops,
        cyclomatic: decision_points + loops + 1,
    }
}

#[derive(Default)]
struct DecisionCounts {
    if_kw: usize,
    case_kw: usize,
    ternary: usize,
    /// `&&` plus `||`.
    logical: usize,
    for_kw: usize,
    while_kw: usize,
    do_kw: usize,
    functions: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Token walk over already-stripped text. Function definitions are spotted as:
/// a parenthesis group whose opener is preceded by an identifier, closing at
/// paren depth zero and brace depth zero, immediately followed by `{`.
fn count_decisions(stripped: &str) -> DecisionCounts {
    let mut counts = DecisionCounts::default();
    let mut chars = stripped.char_indices().peekable();

    let mut brace_depth = 0usize;
    // One entry per open paren: did an identifier directly precede it while at
    // brace depth zero?
    let mut paren_stack: Vec<bool> = Vec::new();
    let mut prev_was_ident = false;
    // Set right after a top-level parameter-list-shaped group closes; only a
    // `{` as the very next token turns it into a function definition.
    let mut pending_fn_open = false;

    while let Some(&(_, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }

        if is_ident_start(c) {
            let mut ident = String::new();
            while let Some(&(_, c2)) = chars.peek() {
                if is_ident_continue(c2) {
                    ident.push(c2);
                    chars.next();
                } else {
                    break;
                }
            }
            match ident.as_str() {
                "if" => counts.if_kw += 1,
                "case" => counts.case_kw += 1,
                "for" => counts.for_kw += 1,
                "while" => counts.while_kw += 1,
                "do" => counts.do_kw += 1,
                _ => {}
            }
            pending_fn_open = false;
            prev_was_ident = true;
            continue;
        }

        if c.is_ascii_digit() {
            while let Some(&(_, c2)) = chars.peek() {
                if is_ident_continue(c2) || c2 == '.' {
                    chars.next();
                } else {
                    break;
                }
            }
            pending_fn_open = false;
            prev_was_ident = false;
            continue;
        }

        chars.next();
        match c {
            '{' => {
                if brace_depth == 0 && pending_fn_open {
                    counts.functions += 1;
                }
                brace_depth += 1;
                pending_fn_open = false;
            }
            '}' => {
                brace_depth = brace_depth.saturating_sub(1);
                pending_fn_open = false;
            }
            '(' => {
                paren_stack.push(prev_was_ident && brace_depth == 0);
                pending_fn_open = false;
            }
            ')' => {
                let opener_after_ident = paren_stack.pop().unwrap_or(false);
                pending_fn_open =
                    opener_after_ident && paren_stack.is_empty() && brace_depth == 0;
            }
            '?' => {
                counts.ternary += 1;
                pending_fn_open = false;
            }
            '&' => {
                if matches!(chars.peek(), Some(&(_, '&'))) {
                    chars.next();
                    counts.logical += 1;
                }
                pending_fn_open = false;
            }
            '|' => {
                if matches!(chars.peek(), Some(&(_, '|'))) {
                    chars.next();
                    counts.logical += 1;
                }
                pending_fn_open = false;
            }
            _ => pending_fn_open = false,
        }
        prev_was_ident = false;
    }

    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_strip_removes_line_comment() {
        assert_eq!(strip_comments_and_strings("int x; // note").unwrap(), "int x; ");
    }

    #[test]
    fn unit_strip_empties_string_literal() {
        assert_eq!(
            strip_comments_and_strings("char* s = \"if(x)\";").unwrap(),
            "char* s = \"\";"
        );
    }

    #[test]
    fn unit_strip_empties_char_literal_with_escape() {
        assert_eq!(strip_comments_and_strings("char c = '\\'';").unwrap(), "char c = '';");
    }

    #[test]
    fn unit_strip_preserves_line_count_across_block_comment() {
        let src = "int a;\n/* one\ntwo\nthree */\nint b;\n";
        let out = strip_comments_and_strings(src).unwrap();
        assert_eq!(out.lines().count(), src.lines().count());
        assert_eq!(out, "int a;\n\n\n\nint b;\n");
    }

    #[test]
    fn unit_strip_reports_unterminated_block_comment() {
        let err = strip_comments_and_strings("int a;\n/* open\nmore").unwrap_err();
        assert_eq!(err, ScanError::UnterminatedBlockComment { line: 2 });
    }

    #[test]
    fn unit_strip_reports_unterminated_string() {
        let err = strip_comments_and_strings("char* s = \"oops;\n").unwrap_err();
        assert_eq!(err, ScanError::UnterminatedString { line: 1 });
        let err = strip_comments_and_strings("int a;\nchar* s = \"oops").unwrap_err();
        assert_eq!(err, ScanError::UnterminatedString { line: 2 });
    }

    #[test]
    fn unit_analyze_single_line_program() {
        let m = analyze("int main(){int x;scanf(\"%d\",&x);if(x>0){puts(\"p\");}else{puts(\"n\");}return 0;}");
        assert_eq!(m.functions, 1);
        assert_eq!(m.loops, 0);
        assert_eq!(m.branches, 2);
        assert_eq!(m.cyclomatic, 2);
        assert_eq!(m.loc, 1);
    }

    #[test]
    fn unit_analyze_empty_source() {
        let m = analyze("");
        assert_eq!(
            m,
            CodeMetrics { loc: 0, functions: 0, branches: 0, loops: 0, cyclomatic: 1 }
        );
    }

    #[test]
    fn unit_analyze_for_plus_if_gives_cyclomatic_three() {
        let src = "int f(int n){int s=0;for(int i=0;i<n;i++){if(i%2){s+=i;}}return s;}";
        let m = analyze(src);
        assert_eq!(m.loops, 1);
        assert_eq!(m.cyclomatic, 3);
        assert_eq!(m.branches, 2);
    }

    #[test]
    fn unit_analyze_case_labels_add_one_branch_each() {
        let src = "int f(int x){switch(x){case 1:return 1;case 2:return 2;default:return 0;}}";
        let m = analyze(src);
        // Two `case` labels, no two-way decision tokens: 2 branches, odd
        // counts are possible once case labels enter the mix.
        assert_eq!(m.branches, 2);
        assert_eq!(m.cyclomatic, 3);
    }

    #[test]
    fn unit_analyze_counts_logical_operators_and_ternary() {
        let src = "int f(int a,int b){return (a>0 && b>0) ? a : (a||b);}";
        let m = analyze(src);
        // one &&, one ||, one ?
        assert_eq!(m.branches, 6);
        assert_eq!(m.cyclomatic, 4);
        // single & or | must not count
        let m2 = analyze("int g(int a,int b){return a & b | a;}");
        assert_eq!(m2.branches, 0);
    }

    #[test]
    fn unit_analyze_do_while_counts_both_keywords() {
        // Keyword counting is literal: do-while contributes two loop tokens.
        let m = analyze("void f(void){int i=0;do{i++;}while(i<3);}");
        assert_eq!(m.loops, 2);
    }

    #[test]
    fn unit_function_detection_ignores_prototypes_and_initializers() {
        let src = "\
int helper(int x);
int (*fp)(int) = 0;
struct point { int x; int y; };
int table[] = {1, 2, 3};

int helper(int x) {
    return x + 1;
}

int main(void) {
    if (helper(1) > 0) {
        return 0;
    }
    return 1;
}
";
        let m = analyze(src);
        assert_eq!(m.functions, 2);
        assert_eq!(m.branches, 2);
    }

    #[test]
    fn unit_keywords_inside_literals_do_not_count() {
        let m = analyze("char* s = \"if (x && y) for while\"; /* if if if */ // while");
        assert_eq!(m.branches, 0);
        assert_eq!(m.loops, 0);
    }

    #[test]
    fn unit_loc_ignores_comment_only_and_blank_lines() {
        let src = "int a;\n\n// only a comment\n/* block */\nint b;\n";
        assert_eq!(analyze(src).loc, 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn prop_wrapping_in_block_comment_zeroes_counts(body in "[a-z(){};&|?! ]{0,60}") {
            prop_assume!(!body.contains("*/"));
            let wrapped = format!("/* {} */", body);
            let m = analyze(&wrapped);
            prop_assert_eq!(m.functions, 0);
            prop_assert_eq!(m.branches, 0);
            prop_assert_eq!(m.loops, 0);
            prop_assert_eq!(m.cyclomatic, 1);
        }

        #[test]
        fn prop_analyze_fixed_point_after_strip(src in "[a-zA-Z0-9(){};&|?\"'/* \n]{0,120}") {
            if let Ok(stripped) = strip_comments_and_strings(&src) {
                prop_assert_eq!(analyze(&stripped), analyze(&src));
            }
        }

        #[test]
        fn prop_strip_preserves_line_count(src in "[a-zA-Z0-9(){};&|?\"'/* \n]{0,120}") {
            if let Ok(stripped) = strip_comments_and_strings(&src) {
                prop_assert_eq!(
                    stripped.chars().filter(|&c| c == '\n').count(),
                    src.chars().filter(|&c| c == '\n').count()
                );
            }
        }

        #[test]
        fn prop_analyze_never_panics(src in "\\PC{0,200}") {
            let m = analyze(&src);
            prop_assert!(m.cyclomatic >= 1);
        }
    }
}
