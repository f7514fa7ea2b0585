//! Scanner for LaTeX source text: macro definitions, macro usages, and
//! top-level section structure.
//!
//! This is a surface scanner, not a TeX interpreter. It performs no macro
//! expansion and no catcode handling; it recognizes the definition and
//! sectioning commands by their written form, which is all the downstream
//! attribution needs.

mod comments;
mod defs;
mod sections;
mod usages;

pub use comments::{strip_comments, verbatim_spans};
pub use defs::{extract_macro_definitions, DefKind, MacroDef, MacroScan};
pub use sections::{
    canonicalize_section_title, segment_sections, Section, SectionCategory, ALL_CATEGORIES,
};
pub use usages::extract_macro_usages;

/// Reads the control word starting at `pos`, where `bytes[pos] == b'\\'`.
///
/// Returns the name (letters and `@` only, per TeX control-word rules) and
/// the byte position just past it. An empty name means the backslash starts
/// a control symbol (`\%`, `\\`, ...), which spans exactly one more byte.
pub(crate) fn control_word_at(bytes: &[u8], pos: usize) -> (&[u8], usize) {
    debug_assert_eq!(bytes[pos], b'\\');
    let start = pos + 1;
    let mut end = start;
    while end < bytes.len() && (bytes[end].is_ascii_alphabetic() || bytes[end] == b'@') {
        end += 1;
    }
    (&bytes[start..end], end)
}

/// Skips ASCII whitespace starting at `pos`.
pub(crate) fn skip_ws(bytes: &[u8], mut pos: usize) -> usize {
    while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    pos
}

/// Scans a brace-balanced group starting at `pos` (which must point at `{`).
///
/// Returns the byte range of the group's content (exclusive of the braces)
/// and the position just past the closing brace. Escaped braces (`\{`, `\}`)
/// do not affect nesting. `None` if the group never closes.
pub(crate) fn brace_group_at(bytes: &[u8], pos: usize) -> Option<(std::ops::Range<usize>, usize)> {
    if pos >= bytes.len() || bytes[pos] != b'{' {
        return None;
    }
    let mut depth = 1usize;
    let mut i = pos + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'{' => {
                depth += 1;
                i += 1;
            }
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some((pos + 1..i, i + 1));
                }
                i += 1;
            }
            _ => i += 1,
        }
    }
    None
}

/// Scans a bracket group `[...]` starting at `pos` (pointing at `[`).
///
/// Brace groups inside the brackets may contain `]` without closing it.
/// Returns content range and position past the closing bracket.
pub(crate) fn bracket_group_at(bytes: &[u8], pos: usize) -> Option<(std::ops::Range<usize>, usize)> {
    if pos >= bytes.len() || bytes[pos] != b'[' {
        return None;
    }
    let mut brace_depth = 0usize;
    let mut i = pos + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'{' => {
                brace_depth += 1;
                i += 1;
            }
            b'}' => {
                brace_depth = brace_depth.saturating_sub(1);
                i += 1;
            }
            b']' if brace_depth == 0 => return Some((pos + 1..i, i + 1)),
            _ => i += 1,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_word_stops_at_non_letter() {
        let b = b"\\ssm x";
        let (name, end) = control_word_at(b, 0);
        assert_eq!(name, b"ssm");
        assert_eq!(end, 4);
    }

    #[test]
    fn control_word_includes_at_sign() {
        let (name, _) = control_word_at(b"\\ss@m!", 0);
        assert_eq!(name, b"ss@m");
    }

    #[test]
    fn control_symbol_has_empty_name() {
        let (name, end) = control_word_at(b"\\%rest", 0);
        assert!(name.is_empty());
        assert_eq!(end, 1);
    }

    #[test]
    fn brace_group_nests_and_skips_escapes() {
        let b = br"{a{b}\}c}tail";
        let (range, next) = brace_group_at(b, 0).unwrap();
        assert_eq!(&b[range], br"a{b}\}c");
        assert_eq!(&b[next..], b"tail");
    }

    #[test]
    fn brace_group_unclosed_is_none() {
        assert!(brace_group_at(b"{abc", 0).is_none());
    }

    #[test]
    fn bracket_group_ignores_bracket_inside_braces() {
        let b = b"[a{]}b]x";
        let (range, next) = bracket_group_at(b, 0).unwrap();
        assert_eq!(&b[range], b"a{]}b");
        assert_eq!(b[next], b'x');
    }
}
