//! Extraction of macro usage positions.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use super::{control_word_at, extract_macro_definitions, verbatim_spans};

/// Finds every usage of the given macro names in comment-stripped text.
///
/// A usage is `\` followed by the name followed by a non-letter or end of
/// text; the longest name in the set wins at each position. Offsets point at
/// the backslash. Occurrences inside a macro's own definition (its defining
/// command through the end of its body) are not usages, and verbatim blocks
/// are never scanned.
pub fn extract_macro_usages(
    text: &str,
    names: &BTreeSet<String>,
) -> BTreeMap<String, Vec<usize>> {
    let bytes = text.as_bytes();
    let verbatim = verbatim_spans(text);

    // Spans of each name's own definitions, for self-exclusion.
    let mut own_spans: BTreeMap<&str, Vec<Range<usize>>> = BTreeMap::new();
    let scan = extract_macro_definitions(text);
    for def in &scan.defs {
        if names.contains(&def.name) {
            own_spans
                .entry(def.name.as_str())
                .or_default()
                .push(def.byte_offset..def.end_offset);
        }
    }

    let mut usages: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut v = 0;
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
        if word.is_empty() {
            // Control symbol: consume its argument so `\\foo` is not a usage.
            i = past + 1;
            continue;
        }
        if let Some(name) = longest_name_match(word, names) {
            let excluded = own_spans
                .get(name)
                .is_some_and(|spans| spans.iter().any(|s| s.contains(&i)));
            if !excluded {
                usages.entry(name.to_string()).or_default().push(i);
            }
        }
        i = past;
    }
    usages
}

/// Longest prefix of the control word that is in `names` and ends at a valid
/// token boundary. Within a word, `@` is a non-letter, so a name may end
/// right before one.
fn longest_name_match<'a>(word: &[u8], names: &'a BTreeSet<String>) -> Option<&'a str> {
    for len in (1..=word.len()).rev() {
        if len < word.len() && word[len] != b'@' {
            continue;
        }
        let candidate = std::str::from_utf8(&word[..len]).expect("control words are ASCII");
        if let Some(name) = names.get(candidate) {
            return Some(name.as_str());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn name_set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_usage_in_math() {
        let usages = extract_macro_usages("$\\ssm x$", &name_set(&["ssm"]));
        assert_eq!(usages.get("ssm"), Some(&vec![1]));
    }

    #[test]
    fn letter_after_name_blocks_the_match() {
        let usages = extract_macro_usages("\\ssmA", &name_set(&["ssm"]));
        assert!(usages.is_empty());
    }

    #[test]
    fn longest_name_wins() {
        let usages = extract_macro_usages("\\ssm", &name_set(&["ss", "ssm"]));
        assert_eq!(usages.get("ssm"), Some(&vec![0]));
        assert!(!usages.contains_key("ss"));
    }

    #[test]
    fn at_sign_is_a_token_boundary() {
        let usages = extract_macro_usages("\\ss@m", &name_set(&["ss"]));
        assert_eq!(usages.get("ss"), Some(&vec![0]));
    }

    #[test]
    fn own_definition_does_not_count() {
        let text = "\\newcommand{\\ssm}{\\scriptscriptstyle\\rm} then $\\ssm$";
        let usages = extract_macro_usages(text, &name_set(&["ssm"]));
        assert_eq!(usages.get("ssm").map(Vec::len), Some(1));
        let offset = usages["ssm"][0];
        assert_eq!(&text[offset..offset + 4], "\\ssm");
    }

    #[test]
    fn usage_inside_another_macros_body_counts() {
        let text = "\\newcommand{\\wrap}{\\ssm x}";
        let usages = extract_macro_usages(text, &name_set(&["ssm"]));
        assert_eq!(usages.get("ssm").map(Vec::len), Some(1));
    }

    #[test]
    fn double_backslash_prefix_is_not_a_usage() {
        let usages = extract_macro_usages("\\\\ssm", &name_set(&["ssm"]));
        assert!(usages.is_empty());
    }

    #[test]
    fn verbatim_usages_do_not_count() {
        let text = "\\begin{verbatim}\\ssm\\end{verbatim} \\ssm";
        let usages = extract_macro_usages(text, &name_set(&["ssm"]));
        assert_eq!(usages.get("ssm").map(Vec::len), Some(1));
    }

    // Independent character-walk oracle for usage offsets.
    fn walk_oracle(text: &str, name: &str) -> Vec<usize> {
        let bytes = text.as_bytes();
        let target = name.as_bytes();
        let mut found = Vec::new();
        let mut i = 0;
        while i + target.len() < bytes.len() + 1 {
            if bytes[i] == b'\\'
                && bytes[i + 1..].starts_with(target)
                && bytes
                    .get(i + 1 + target.len())
                    .is_none_or(|b| !b.is_ascii_alphabetic())
                && (i == 0 || bytes[i - 1] != b'\\')
            {
                found.push(i);
            }
            i += 1;
        }
        found
    }

    #[test]
    fn offsets_agree_with_character_walk() {
        let text = "\\section{Intro}\nuse \\ab here\n\\section{Methods}\n\\ab and \\ab again\n";
        let usages = extract_macro_usages(text, &name_set(&["ab"]));
        assert_eq!(usages["ab"], walk_oracle(text, "ab"));
        assert_eq!(usages["ab"].len(), 3);
    }
}
