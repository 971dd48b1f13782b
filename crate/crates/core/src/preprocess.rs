//! Cleaning, tokenization and the two-level dedup structure the pipeline
//! clusters over: unique lines, then unique alphabetized token sets.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::ingest::EntityRecord;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PreprocessError {
    #[error("entity cleaned to an empty token sequence")]
    EmptyEntity,
    #[error("no records survived cleaning")]
    EmptyCorpus,
}

/// A deduplicated cleaned line. `text` contains only `[A-Z]` and single
/// spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniqueLine {
    pub text: String,
    /// Indices into the input record slice, ascending.
    pub member_record_ids: Vec<usize>,
    pub canonical_index: usize,
}

/// A deduplicated alphabetized token set, plus the original-order tokens of
/// its lexicographically-smallest member line. The ordered tokens feed the
/// clustering merge gate; the sorted text feeds string similarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub sorted_text: String,
    pub ordered_tokens: Vec<String>,
    /// Indices into the unique-line table, ascending.
    pub member_line_indices: Vec<usize>,
}

impl CanonicalForm {
    /// First two original-order tokens; the second is empty for
    /// single-token forms.
    pub fn rep_tokens(&self) -> (&str, &str) {
        let first = self.ordered_tokens.first().map(String::as_str).unwrap_or("");
        let second = self.ordered_tokens.get(1).map(String::as_str).unwrap_or("");
        (first, second)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub unique_lines: Vec<UniqueLine>,
    pub forms: Vec<CanonicalForm>,
    /// Records dropped because they cleaned to nothing.
    pub dropped_records: usize,
}

impl Corpus {
    pub fn n_lines(&self) -> usize {
        self.unique_lines.len()
    }

    pub fn n_forms(&self) -> usize {
        self.forms.len()
    }

    /// Canonical index of each unique line, in line order.
    pub fn line_to_form(&self) -> Vec<usize> {
        self.unique_lines.iter().map(|l| l.canonical_index).collect()
    }
}

/// Uppercase, drop digits, replace everything outside `[A-Z]`/space with a
/// space, collapse space runs, trim. May return an empty string.
pub fn clean(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for ch in raw.chars() {
        if ch.is_ascii_digit() {
            continue;
        }
        let up = ch.to_ascii_uppercase();
        if up.is_ascii_uppercase() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(up);
        } else {
            pending_space = true;
        }
    }
    out
}

/// Whitespace split of a cleaned string.
pub fn tokenize(cleaned: &str) -> Vec<String> {
    cleaned.split_whitespace().map(str::to_string).collect()
}

/// Deduplicate, sort ascending, join with single spaces.
pub fn canonicalize<S: AsRef<str>>(tokens: &[S]) -> Result<String, PreprocessError> {
    if tokens.is_empty() {
        return Err(PreprocessError::EmptyEntity);
    }
    let mut sorted: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(sorted.join(" "))
}

/// Build the unique-line and canonical-form tables from raw records.
/// Records that clean to nothing are counted and dropped. Both tables are
/// ordered by first occurrence; each canonical form's `ordered_tokens` come
/// from its lexicographically-smallest member line.
pub fn build_corpus(records: &[EntityRecord]) -> Result<Corpus, PreprocessError> {
    let cleaned: Vec<String> = records
        .par_iter()
        .map(|record| clean(&record.raw_text))
        .collect();

    let mut line_index: HashMap<&str, usize> = HashMap::new();
    let mut lines: Vec<UniqueLine> = Vec::new();
    let mut dropped = 0usize;
    for (record_id, text) in cleaned.iter().enumerate() {
        if text.is_empty() {
            dropped += 1;
            continue;
        }
        match line_index.get(text.as_str()) {
            Some(&i) => lines[i].member_record_ids.push(record_id),
            None => {
                let i = lines.len();
                line_index.insert(text, i);
                lines.push(UniqueLine {
                    text: text.clone(),
                    member_record_ids: vec![record_id],
                    canonical_index: usize::MAX,
                });
            }
        }
    }
    if lines.is_empty() {
        return Err(PreprocessError::EmptyCorpus);
    }

    let mut form_index: HashMap<String, usize> = HashMap::new();
    let mut forms: Vec<CanonicalForm> = Vec::new();
    // Lexicographically-smallest member line per form, for ordered_tokens.
    let mut rep_line: Vec<usize> = Vec::new();
    let mut line_form: Vec<usize> = Vec::with_capacity(lines.len());
    for (line_id, line) in lines.iter().enumerate() {
        let tokens = tokenize(&line.text);
        let sorted_text = canonicalize(&tokens).expect("unique line is non-empty");
        let form_id = match form_index.get(&sorted_text) {
            Some(&i) => {
                forms[i].member_line_indices.push(line_id);
                if line.text < lines[rep_line[i]].text {
                    rep_line[i] = line_id;
                }
                i
            }
            None => {
                let i = forms.len();
                form_index.insert(sorted_text.clone(), i);
                forms.push(CanonicalForm {
                    sorted_text,
                    ordered_tokens: Vec::new(),
                    member_line_indices: vec![line_id],
                });
                rep_line.push(line_id);
                i
            }
        };
        line_form.push(form_id);
    }

    for (line, form_id) in lines.iter_mut().zip(line_form) {
        line.canonical_index = form_id;
    }
    for (form, &line_id) in forms.iter_mut().zip(rep_line.iter()) {
        form.ordered_tokens = tokenize(&lines[line_id].text);
    }

    Ok(Corpus { unique_lines: lines, forms, dropped_records: dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn records(texts: &[&str]) -> Vec<EntityRecord> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| EntityRecord {
                raw_text: t.to_string(),
                source_id: "t".into(),
                tag: None,
                line_index: i,
            })
            .collect()
    }

    #[test]
    fn clean_strips_account_and_digits() {
        assert_eq!(clean("John Smith /12345678 LONDON"), "JOHN SMITH LONDON");
    }

    #[test]
    fn clean_specials_become_spaces() {
        assert_eq!(clean("ACME-CORP., LTD. 42"), "ACME CORP LTD");
    }

    #[test]
    fn clean_all_digits_is_empty() {
        assert_eq!(clean("12345"), "");
    }

    #[test]
    fn clean_digits_removed_not_spaced() {
        // digits vanish inside a token; other specials split it
        assert_eq!(clean("AB12CD"), "ABCD");
        assert_eq!(clean("AB-CD"), "AB CD");
    }

    #[test]
    fn clean_non_ascii_letters_removed() {
        assert_eq!(clean("CAFÉ NOIR"), "CAF NOIR");
    }

    #[test]
    fn tokenize_basic() {
        assert_eq!(tokenize("JOHN SMITH LONDON"), ["JOHN", "SMITH", "LONDON"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("A  B"), ["A", "B"]);
    }

    #[test]
    fn canonicalize_sorts_and_dedups() {
        assert_eq!(canonicalize(&["SMITH", "JOHN", "LONDON"]).unwrap(), "JOHN LONDON SMITH");
        assert_eq!(canonicalize(&["LTD", "ACME", "LTD"]).unwrap(), "ACME LTD");
        assert_eq!(canonicalize(&["A"]).unwrap(), "A");
        assert_eq!(canonicalize::<&str>(&[]).unwrap_err(), PreprocessError::EmptyEntity);
    }

    #[test]
    fn corpus_two_levels() {
        let corpus =
            build_corpus(&records(&["JOHN SMITH 1", "JOHN SMITH 2", "SMITH JOHN"])).unwrap();
        assert_eq!(corpus.n_lines(), 2); // "JOHN SMITH" and "SMITH JOHN"
        assert_eq!(corpus.n_forms(), 1);
        assert_eq!(corpus.forms[0].sorted_text, "JOHN SMITH");
        assert_eq!(corpus.forms[0].member_line_indices, vec![0, 1]);
        // lexicographically-smallest member is "JOHN SMITH"
        assert_eq!(corpus.forms[0].ordered_tokens, ["JOHN", "SMITH"]);
        assert_eq!(corpus.unique_lines[0].member_record_ids, vec![0, 1]);
    }

    #[test]
    fn corpus_rep_is_lexicographically_smallest_line() {
        let corpus = build_corpus(&records(&["SMITH JOHN", "JOHN SMITH"])).unwrap();
        assert_eq!(corpus.n_forms(), 1);
        assert_eq!(corpus.forms[0].ordered_tokens, ["JOHN", "SMITH"]);
    }

    #[test]
    fn corpus_empty_is_error() {
        assert_eq!(
            build_corpus(&records(&["111", "222"])).unwrap_err(),
            PreprocessError::EmptyCorpus
        );
    }

    #[test]
    fn corpus_drops_empty_records_with_count() {
        let corpus = build_corpus(&records(&["ACME", "999", "BOLT"])).unwrap();
        assert_eq!(corpus.dropped_records, 1);
        assert_eq!(corpus.n_lines(), 2);
    }

    #[test]
    fn corpus_partitions_records_and_lines() {
        let corpus = build_corpus(&records(&[
            "ACME LTD",
            "LTD ACME",
            "ACME LTD",
            "BOLT PLC",
        ]))
        .unwrap();
        // every surviving record id in exactly one line
        let mut seen: Vec<usize> = corpus
            .unique_lines
            .iter()
            .flat_map(|l| l.member_record_ids.iter().copied())
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3]);
        // every line in exactly one form
        let mut line_ids: Vec<usize> = corpus
            .forms
            .iter()
            .flat_map(|f| f.member_line_indices.iter().copied())
            .collect();
        line_ids.sort_unstable();
        assert_eq!(line_ids, (0..corpus.n_lines()).collect::<Vec<_>>());
        assert!(corpus.n_forms() <= corpus.n_lines());
    }

    proptest! {
        #[test]
        fn canonicalize_idempotent(tokens in proptest::collection::vec("[A-Z]{1,8}", 1..12)) {
            let sorted_text = canonicalize(&tokens).unwrap();
            let again = canonicalize(&tokenize(&sorted_text)).unwrap();
            prop_assert_eq!(sorted_text, again);
        }

        #[test]
        fn clean_output_alphabet(raw in "\\PC{0,60}") {
            let cleaned = clean(&raw);
            prop_assert!(cleaned.chars().all(|c| c.is_ascii_uppercase() || c == ' '));
            prop_assert!(!cleaned.contains("  "));
            prop_assert_eq!(cleaned.trim(), &cleaned);
        }

        #[test]
        fn table_sizes_monotone(texts in proptest::collection::vec("[A-Z0-9 ]{0,20}", 1..40)) {
            let recs = records(&texts.iter().map(String::as_str).collect::<Vec<_>>());
            if let Ok(corpus) = build_corpus(&recs) {
                prop_assert!(corpus.n_forms() <= corpus.n_lines());
                prop_assert!(corpus.n_lines() + corpus.dropped_records <= recs.len());
            }
        }
    }
}
