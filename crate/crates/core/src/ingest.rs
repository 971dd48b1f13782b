//! Input parsing: plain tag-value lists and SWIFT MT block-4 field text.

/// One raw tag value with provenance. Multi-line values are joined with
/// single spaces at parse time; cleaning happens downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityRecord {
    pub raw_text: String,
    pub source_id: String,
    /// MT field tag (e.g. "50K", "59"); `None` for plain-format input.
    pub tag: Option<String>,
    /// Index of the record's first line within its source.
    pub line_index: usize,
}

/// A `:`-prefixed line that did not match the MT tag pattern. The field it
/// would have started is skipped; the caller decides how loudly to report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedField {
    pub line_index: usize,
    pub line: String,
}

#[derive(Debug, Default)]
pub struct MtParse {
    pub records: Vec<EntityRecord>,
    pub issues: Vec<MalformedField>,
}

/// Parse plain input: one tag value per line, blank lines skipped,
/// original line indices preserved.
pub fn parse_plain<'a, I>(lines: I, source_id: &str) -> Vec<EntityRecord>
where
    I: IntoIterator<Item = &'a str>,
{
    lines
        .into_iter()
        .enumerate()
        .filter_map(|(idx, line)| {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                None
            } else {
                Some(EntityRecord {
                    raw_text: trimmed.to_string(),
                    source_id: source_id.to_string(),
                    tag: None,
                    line_index: idx,
                })
            }
        })
        .collect()
}

/// Does the line start an MT field (`:` + two digits + optional letter + `:`)?
/// Returns the tag when it does.
fn match_tag(line: &str) -> Option<&str> {
    let rest = line.strip_prefix(':')?;
    let bytes = rest.as_bytes();
    if bytes.len() >= 3
        && bytes[0].is_ascii_digit()
        && bytes[1].is_ascii_digit()
        && bytes[2] == b':'
    {
        return Some(&rest[..2]);
    }
    if bytes.len() >= 4
        && bytes[0].is_ascii_digit()
        && bytes[1].is_ascii_digit()
        && bytes[2].is_ascii_uppercase()
        && bytes[3] == b':'
    {
        return Some(&rest[..3]);
    }
    None
}

/// Parse MT block-4 text into one record per occurrence of a wanted tag.
///
/// A field starts at a line matching `:NN:` or `:NNa:` and its value runs
/// until the next `:`-prefixed line or end of input. Value lines are joined
/// with single spaces; the leading account line (starting with `/`) is kept
/// as-is since digits are stripped downstream. A `:`-prefixed line that does
/// not match the tag pattern is reported as a [`MalformedField`] and the
/// field it introduces is skipped entirely.
pub fn parse_mt_block4<S>(text: &str, wanted_tags: &[S], source_id: &str) -> MtParse
where
    S: AsRef<str>,
{
    enum State {
        Idle,
        Wanted { tag: String, start: usize, value: Vec<String> },
        Skipping,
    }

    let mut out = MtParse::default();
    let mut state = State::Idle;

    let mut flush = |state: &mut State, out: &mut MtParse| {
        if let State::Wanted { tag, start, value } = std::mem::replace(state, State::Idle) {
            let raw_text = value.join(" ");
            if !raw_text.trim().is_empty() {
                out.records.push(EntityRecord {
                    raw_text,
                    source_id: source_id.to_string(),
                    tag: Some(tag),
                    line_index: start,
                });
            }
        }
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r');
        if line.starts_with(':') {
            flush(&mut state, &mut out);
            match match_tag(line) {
                Some(tag) if wanted_tags.iter().any(|w| w.as_ref() == tag) => {
                    let first = line[tag.len() + 2..].trim();
                    let mut value = Vec::new();
                    if !first.is_empty() {
                        value.push(first.to_string());
                    }
                    state = State::Wanted { tag: tag.to_string(), start: idx, value };
                }
                Some(_) => state = State::Skipping,
                None => {
                    out.issues.push(MalformedField { line_index: idx, line: line.to_string() });
                    state = State::Skipping;
                }
            }
        } else if let State::Wanted { value, .. } = &mut state {
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                value.push(trimmed.to_string());
            }
        }
    }
    flush(&mut state, &mut out);
    out
}
