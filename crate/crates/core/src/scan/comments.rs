//! Comment stripping with verbatim awareness.

use std::ops::Range;

const VERBATIM_ENVS: [&str; 4] = ["verbatim", "verbatim*", "lstlisting", "lstlisting*"];

/// Matches `\begin{env}` at `pos` (pointing at the backslash) for one of the
/// verbatim-like environments. Returns (env, position past the token).
fn match_begin_verbatim(bytes: &[u8], pos: usize) -> Option<(&'static str, usize)> {
    let (word, end) = super::control_word_at(bytes, pos);
    if word != b"begin" {
        return None;
    }
    let (env, past) = read_env_name(bytes, end)?;
    VERBATIM_ENVS
        .iter()
        .find(|candidate| candidate.as_bytes() == env)
        .map(|candidate| (*candidate, past))
}

/// Matches `\end{env}` at `pos` for the given environment name.
fn match_end_env(bytes: &[u8], pos: usize, env: &str) -> Option<usize> {
    let (word, end) = super::control_word_at(bytes, pos);
    if word != b"end" {
        return None;
    }
    let (found, past) = read_env_name(bytes, end)?;
    (found == env.as_bytes()).then_some(past)
}

fn read_env_name(bytes: &[u8], pos: usize) -> Option<(&[u8], usize)> {
    let mut i = super::skip_ws(bytes, pos);
    if i >= bytes.len() || bytes[i] != b'{' {
        return None;
    }
    i += 1;
    let start = i;
    while i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'*') {
        i += 1;
    }
    if i == start || i >= bytes.len() || bytes[i] != b'}' {
        return None;
    }
    Some((&bytes[start..i], i + 1))
}

/// Removes LaTeX comments: from each `%` not escaped by a backslash, drops
/// everything up to (but not including) the end of the line.
///
/// The content of `verbatim` and `lstlisting` environments is copied through
/// untouched, including any `%` it contains. Idempotent.
pub fn strip_comments(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    // Environment we are currently inside, if any.
    let mut in_verbatim: Option<&'static str> = None;

    while i < bytes.len() {
        if let Some(env) = in_verbatim {
            if bytes[i] == b'\\' {
                if let Some(past) = match_end_env(bytes, i, env) {
                    out.extend_from_slice(&bytes[i..past]);
                    i = past;
                    in_verbatim = None;
                    continue;
                }
            }
            out.push(bytes[i]);
            i += 1;
            continue;
        }
        match bytes[i] {
            b'\\' => {
                if let Some((env, past)) = match_begin_verbatim(bytes, i) {
                    out.extend_from_slice(&bytes[i..past]);
                    i = past;
                    in_verbatim = Some(env);
                } else {
                    // Escape pair: the next byte is never a comment starter.
                    out.push(bytes[i]);
                    i += 1;
                    if i < bytes.len() {
                        out.push(bytes[i]);
                        i += 1;
                    }
                }
            }
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
    String::from_utf8(out).expect("comment stripping preserves UTF-8 boundaries")
}

/// Byte ranges of verbatim-like environments (delimiters included).
///
/// Later scans skip these ranges entirely. An unclosed environment extends to
/// the end of the text. Intended for comment-stripped input; commented-out
/// `\begin{verbatim}` tokens never survive [`strip_comments`].
pub fn verbatim_spans(text: &str) -> Vec<Range<usize>> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\\' {
            if let Some((env, past)) = match_begin_verbatim(bytes, i) {
                let start = i;
                let mut j = past;
                let mut end = bytes.len();
                while j < bytes.len() {
                    if bytes[j] == b'\\' {
                        if let Some(p) = match_end_env(bytes, j, env) {
                            end = p;
                            break;
                        }
                        j += 2;
                    } else {
                        j += 1;
                    }
                }
                spans.push(start..end);
                i = end;
                continue;
            }
            i += 2;
            continue;
        }
        i += 1;
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_comment_to_end_of_line() {
        assert_eq!(strip_comments("a % b\nc"), "a \nc");
    }

    #[test]
    fn escaped_percent_is_kept() {
        assert_eq!(strip_comments("100\\% sure"), "100\\% sure");
    }

    #[test]
    fn double_backslash_then_percent_is_a_comment() {
        assert_eq!(strip_comments("x\\\\% gone\ny"), "x\\\\\ny");
    }

    #[test]
    fn comment_at_end_without_newline() {
        assert_eq!(strip_comments("a%b"), "a");
    }

    #[test]
    fn verbatim_content_untouched() {
        let text = "a\n\\begin{verbatim}\nkeep % this\n\\end{verbatim}\nb % drop\n";
        let expected = "a\n\\begin{verbatim}\nkeep % this\n\\end{verbatim}\nb \n";
        assert_eq!(strip_comments(text), expected);
    }

    #[test]
    fn commented_out_verbatim_does_not_open_a_block() {
        let text = "% \\begin{verbatim}\nx % y\n";
        assert_eq!(strip_comments(text), "\nx \n");
    }

    // Hand-traced fixture mixing escaped %, comments, and a verbatim block.
    #[test]
    fn mixed_fixture_matches_hand_traced_output() {
        let input = "line one % trailing\n\
                     50\\% of cases % but not this\n\
                     \\begin{verbatim}\n\
                     raw % percent stays\n\
                     \\end{verbatim}\n\
                     after % comment\n\
                     \\\\% escaped-backslash comment\n\
                     pure%\n\
                     % full line\n\
                     end\n";
        let expected = "line one \n\
                        50\\% of cases \n\
                        \\begin{verbatim}\n\
                        raw % percent stays\n\
                        \\end{verbatim}\n\
                        after \n\
                        \\\\\n\
                        pure\n\
                        \n\
                        end\n";
        assert_eq!(strip_comments(input), expected);
    }

    #[test]
    fn stripping_is_idempotent() {
        let input = "a % b\n\\begin{verbatim}\n% raw\n\\end{verbatim}\nc \\% d % e\n";
        let once = strip_comments(input);
        assert_eq!(strip_comments(&once), once);
    }

    #[test]
    fn spans_cover_verbatim_blocks() {
        let text = "pre \\begin{verbatim}x\\end{verbatim} post \\begin{lstlisting}y";
        let spans = verbatim_spans(text);
        assert_eq!(spans.len(), 2);
        assert_eq!(&text[spans[0].clone()], "\\begin{verbatim}x\\end{verbatim}");
        // Unclosed block runs to end of text.
        assert_eq!(spans[1].end, text.len());
    }

    #[test]
    fn starred_verbatim_is_recognized() {
        let text = "\\begin{verbatim*}a%b\\end{verbatim*}";
        assert_eq!(strip_comments(text), text);
        assert_eq!(verbatim_spans(text), vec![0..text.len()]);
    }
}
