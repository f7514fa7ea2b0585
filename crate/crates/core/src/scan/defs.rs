//! Extraction of macro definitions.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{brace_group_at, bracket_group_at, control_word_at, skip_ws, verbatim_spans};

/// Which defining command introduced a macro.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefKind {
    Newcommand,
    Renewcommand,
    Providecommand,
    Def,
    DeclareMathOperator,
}

/// One macro definition as written in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroDef {
    /// Control-sequence name without the backslash. Always `[A-Za-z@]+`.
    pub name: String,
    /// Raw replacement text, braces balanced as captured.
    pub body: String,
    /// Declared argument count; 0 when unspecified.
    pub arity: u32,
    pub def_kind: DefKind,
    /// Offset of the defining command's backslash in the scanned text.
    pub byte_offset: usize,
    /// One past the body's closing brace; the definition occupies
    /// `byte_offset..end_offset`.
    pub end_offset: usize,
}

/// Result of a definition scan: the definitions found plus a tally of
/// constructs that looked like definitions but could not be captured
/// (truncated bodies, delimited `\def` parameters, non-letter names).
#[derive(Debug, Clone, Default)]
pub struct MacroScan {
    pub defs: Vec<MacroDef>,
    pub skipped_defs: u64,
}

/// Scans comment-stripped text for `\newcommand(*)`, `\renewcommand(*)`,
/// `\providecommand(*)`, `\def`, and `\DeclareMathOperator(*)`.
///
/// Malformed or truncated constructs are skipped and tallied, never
/// captured partially. Content of verbatim blocks is not scanned.
pub fn extract_macro_definitions(text: &str) -> MacroScan {
    let bytes = text.as_bytes();
    let verbatim = verbatim_spans(text);
    let mut scan = MacroScan::default();

    let mut v = 0; // next verbatim span to skip
    let mut i = 0;
    while i < bytes.len() {
        if v < verbatim.len() && i >= verbatim[v].start {
            i = verbatim[v].end;
            v += 1;
            continue;
        }
        if bytes[i] != b'\\' {
            i += 1;
            continue;
        }
        let (word, past) = control_word_at(bytes, i);
        let kind = match word {
            b"newcommand" => Some(DefKind::Newcommand),
            b"renewcommand" => Some(DefKind::Renewcommand),
            b"providecommand" => Some(DefKind::Providecommand),
            b"def" => Some(DefKind::Def),
            b"DeclareMathOperator" => Some(DefKind::DeclareMathOperator),
            _ => None,
        };
        let Some(kind) = kind else {
            // Control symbol: skip its argument byte so `\\def` is not
            // misread as a definition.
            i = if word.is_empty() { past + 1 } else { past };
            continue;
        };
        match parse_definition(bytes, text, i, past, kind) {
            Ok(Some(def)) => {
                i = def.end_offset;
                scan.defs.push(def);
            }
            Ok(None) => i = past, // not a definition after all, e.g. `\def` in prose
            Err(()) => {
                scan.skipped_defs += 1;
                i = past;
            }
        }
    }
    scan
}

/// Parses one definition whose command name ends at `past`.
///
/// `Ok(None)` means the construct is not a definition attempt at all
/// (no `\name` follows); `Err(())` means it is one, but malformed.
fn parse_definition(
    bytes: &[u8],
    text: &str,
    start: usize,
    past: usize,
    kind: DefKind,
) -> Result<Option<MacroDef>, ()> {
    let mut i = skip_ws(bytes, past);
    if kind != DefKind::Def && i < bytes.len() && bytes[i] == b'*' {
        i = skip_ws(bytes, i + 1);
    }

    let name_range = match kind {
        DefKind::Def => read_def_name(bytes, i)?,
        _ => read_command_name(bytes, i)?,
    };
    let Some(name_range) = name_range else {
        return Ok(None);
    };
    i = name_range.end;

    let mut arity = 0u32;
    match kind {
        DefKind::Def => {
            // Parameter text: only the undelimited form `#1#2...#n` is
            // captured; anything else between the name and `{` is a
            // delimited parameter list, which has no canonical arity.
            i = skip_ws(bytes, i);
            let mut expected = 1u32;
            while i + 1 < bytes.len() && bytes[i] == b'#' {
                let digit = bytes[i + 1];
                if !digit.is_ascii_digit() || (digit - b'0') as u32 != expected {
                    return Err(());
                }
                expected += 1;
                i += 2;
            }
            arity = expected - 1;
            if i >= bytes.len() || bytes[i] != b'{' {
                return Err(());
            }
        }
        DefKind::DeclareMathOperator => {
            i = skip_ws(bytes, i);
        }
        _ => {
            i = skip_ws(bytes, i);
            if i < bytes.len() && bytes[i] == b'[' {
                let (digits, after) = bracket_group_at(bytes, i).ok_or(())?;
                let parsed: u32 = std::str::from_utf8(&bytes[digits])
                    .ok()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or(())?;
                if parsed > 9 {
                    return Err(());
                }
                arity = parsed;
                i = skip_ws(bytes, after);
                // Optional default value for the first argument.
                if i < bytes.len() && bytes[i] == b'[' {
                    let (_, after_default) = bracket_group_at(bytes, i).ok_or(())?;
                    i = skip_ws(bytes, after_default);
                }
            }
        }
    }

    let (body_range, end) = brace_group_at(bytes, i).ok_or(())?;
    Ok(Some(MacroDef {
        name: text[name_range].to_string(),
        body: text[body_range].to_string(),
        arity,
        def_kind: kind,
        byte_offset: start,
        end_offset: end,
    }))
}

/// Reads the `\name` being defined, either brace-wrapped (`{\name}`) or bare.
/// Returns the name's byte range (without backslash or braces).
fn read_command_name(bytes: &[u8], pos: usize) -> Result<Option<Range<usize>>, ()> {
    if pos >= bytes.len() {
        return Ok(None);
    }
    if bytes[pos] == b'{' {
        let (inner, _) = brace_group_at(bytes, pos).ok_or(())?;
        let j = skip_ws(bytes, inner.start);
        if j >= inner.end || bytes[j] != b'\\' {
            return Err(());
        }
        let (word, end) = control_word_at(bytes, j);
        if word.is_empty() || skip_ws(bytes, end) != inner.end {
            return Err(());
        }
        Ok(Some(j + 1..end))
    } else if bytes[pos] == b'\\' {
        let (word, end) = control_word_at(bytes, pos);
        if word.is_empty() {
            return Err(());
        }
        Ok(Some(pos + 1..end))
    } else {
        Ok(None)
    }
}

/// Reads the name after `\def`. Single-non-letter names (`\def\!...`) are
/// rejected as uncapturable.
fn read_def_name(bytes: &[u8], pos: usize) -> Result<Option<Range<usize>>, ()> {
    if pos >= bytes.len() || bytes[pos] != b'\\' {
        return Ok(None);
    }
    let (word, end) = control_word_at(bytes, pos);
    if word.is_empty() {
        return Err(());
    }
    Ok(Some(pos + 1..end))
}
