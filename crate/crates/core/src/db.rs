//! Canonical macro identities and per-author usage histories.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::ingest::PaperRecord;
use crate::scan::MacroDef;

const DB_MAGIC: &str = "macrolens-db";
const DB_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum DbError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("db version mismatch: found {found:?}, expected {expected:?}")]
    VersionMismatch { found: String, expected: String },
    #[error("db line {line}: {message}")]
    Corrupt { line: usize, message: String },
}

/// FNV-1a, 64-bit. Stable across platforms and releases, which the on-disk
/// format depends on.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Canonical identity of a macro definition: name plus whitespace-normalized
/// body, joined as `name|body`. Case-sensitive throughout.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MacroKey {
    key: String,
    hash: u64,
}

impl MacroKey {
    pub fn new(name: &str, body: &str) -> Self {
        let normalized = body.split_whitespace().collect::<Vec<_>>().join(" ");
        let key = format!("{name}|{normalized}");
        let hash = fnv1a64(key.as_bytes());
        MacroKey { key, hash }
    }

    /// Reconstructs a key from its canonical string (as persisted).
    pub fn from_canonical(key: &str) -> Self {
        MacroKey {
            key: key.to_string(),
            hash: fnv1a64(key.as_bytes()),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.key
    }

    /// The macro name (everything before the first `|`).
    pub fn name(&self) -> &str {
        self.key.split('|').next().unwrap_or("")
    }

    pub fn hash64(&self) -> u64 {
        self.hash
    }
}

/// Canonical key for a definition.
pub fn canonical_key(def: &MacroDef) -> MacroKey {
    MacroKey::new(&def.name, &def.body)
}

/// Whether a macro first seen on the query date itself counts as known.
///
/// `Strict` requires strictly earlier evidence and is the default; it keeps a
/// paper from vouching for itself when the database was built from a corpus
/// that contains it. `Inclusive` accepts same-day evidence and is meant for
/// attributing papers that were not part of the database build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    #[default]
    Strict,
    Inclusive,
}

impl TiePolicy {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "strict" => Some(TiePolicy::Strict),
            "inclusive" => Some(TiePolicy::Inclusive),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TiePolicy::Strict => "strict",
            TiePolicy::Inclusive => "inclusive",
        }
    }
}

/// A paper's contribution to history building: its identity, date, author
/// list, and the definitions extracted from its source.
#[derive(Debug, Clone)]
pub struct PaperMacros<'a> {
    pub paper_id: &'a str,
    pub date: NaiveDate,
    pub authors: &'a [String],
    pub defs: &'a [MacroDef],
}

impl<'a> PaperMacros<'a> {
    pub fn from_record(record: &'a PaperRecord, defs: &'a [MacroDef]) -> Self {
        PaperMacros {
            paper_id: &record.paper_id,
            date: record.date,
            authors: &record.authors,
            defs,
        }
    }
}

/// Options for history building.
#[derive(Debug, Clone, Default)]
pub struct DbBuildOptions {
    /// When set, keys defined in more than this fraction of all papers are
    /// dropped from every history (ubiquitous boilerplate carries no
    /// author signal). Off by default.
    pub stoplist_df: Option<f64>,
}

/// Per-author chronological history of macro keys with first-use dates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuthorMacroDB {
    entries: BTreeMap<String, BTreeMap<MacroKey, NaiveDate>>,
    built_from: String,
    stoplist_dropped: u64,
}

impl AuthorMacroDB {
    pub fn fingerprint(&self) -> &str {
        &self.built_from
    }

    pub fn author_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entry_count(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn stoplist_dropped(&self) -> u64 {
        self.stoplist_dropped
    }

    pub fn history(&self, author_id: &str) -> Option<&BTreeMap<MacroKey, NaiveDate>> {
        self.entries.get(author_id)
    }

    pub fn first_use(&self, author_id: &str, key: &MacroKey) -> Option<NaiveDate> {
        self.entries.get(author_id).and_then(|h| h.get(key)).copied()
    }

    /// Keys the author knew before `date` under the given tie policy.
    /// Unknown authors yield the empty set.
    pub fn macros_known_before(
        &self,
        author_id: &str,
        date: NaiveDate,
        tie_policy: TiePolicy,
    ) -> BTreeSet<MacroKey> {
        let Some(history) = self.entries.get(author_id) else {
            return BTreeSet::new();
        };
        history
            .iter()
            .filter(|(_, first)| match tie_policy {
                TiePolicy::Strict => **first < date,
                TiePolicy::Inclusive => **first <= date,
            })
            .map(|(key, _)| key.clone())
            .collect()
    }
}

/// Digest of the corpus identity: sorted paper ids and dates.
pub fn corpus_fingerprint(records: &[PaperRecord]) -> String {
    let mut lines: Vec<String> = records
        .iter()
        .map(|r| format!("{}\t{}", r.paper_id, r.date))
        .collect();
    lines.sort();
    let mut joined = String::new();
    for line in &lines {
        joined.push_str(line);
        joined.push('\n');
    }
    format!("{:016x}", fnv1a64(joined.as_bytes()))
}

fn fingerprint_of_papers(papers: &[PaperMacros<'_>]) -> String {
    let mut lines: Vec<String> = papers
        .iter()
        .map(|p| format!("{}\t{}", p.paper_id, p.date))
        .collect();
    lines.sort();
    let mut joined = String::new();
    for line in &lines {
        joined.push_str(line);
        joined.push('\n');
    }
    format!("{:016x}", fnv1a64(joined.as_bytes()))
}

/// Builds every author's history: each definition in each paper is credited
/// to all of the paper's authors at the paper's date, and the first-use date
/// is the per-(author, key) minimum. Input order never matters.
pub fn build_author_histories(
    papers: &[PaperMacros<'_>],
    options: &DbBuildOptions,
) -> AuthorMacroDB {
    let stopped: BTreeSet<MacroKey> = match options.stoplist_df {
        Some(fraction) if !papers.is_empty() => {
            let mut doc_counts: BTreeMap<MacroKey, usize> = BTreeMap::new();
            for paper in papers {
                let keys: BTreeSet<MacroKey> = paper.defs.iter().map(canonical_key).collect();
                for key in keys {
                    *doc_counts.entry(key).or_insert(0) += 1;
                }
            }
            let limit = fraction * papers.len() as f64;
            doc_counts
                .into_iter()
                .filter(|(_, count)| *count as f64 > limit)
                .map(|(key, _)| key)
                .collect()
        }
        _ => BTreeSet::new(),
    };

    let mut entries: BTreeMap<String, BTreeMap<MacroKey, NaiveDate>> = BTreeMap::new();
    let mut dropped = 0u64;
    for paper in papers {
        for def in paper.defs {
            let key = canonical_key(def);
            if stopped.contains(&key) {
                dropped += 1;
                continue;
            }
            for author in paper.authors {
                let history = entries.entry(author.clone()).or_default();
                match history.get_mut(&key) {
                    Some(first) => *first = (*first).min(paper.date),
                    None => {
                        history.insert(key.clone(), paper.date);
                    }
                }
            }
        }
    }
    AuthorMacroDB {
        entries,
        built_from: fingerprint_of_papers(papers),
        stoplist_dropped: dropped,
    }
}

/// Writes the database: a header line, then one tab-separated record per
/// (author, key) sorted by author id and key hash. Byte-deterministic.
pub fn persist_db(db: &AuthorMacroDB, path: &Path) -> Result<(), DbError> {
    let file = fs::File::create(path).map_err(|source| DbError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    let io_err = |source| DbError::Write {
        path: path.to_path_buf(),
        source,
    };
    writeln!(w, "{DB_MAGIC} {DB_VERSION} {}", db.built_from).map_err(io_err)?;
    for (author, history) in &db.entries {
        let mut rows: Vec<(&MacroKey, &NaiveDate)> = history.iter().collect();
        rows.sort_by_key(|(key, _)| key.hash64());
        for (key, date) in rows {
            writeln!(w, "{author}\t{:016x}\t{date}\t{}", key.hash64(), key.as_str())
                .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// Reads a database written by [`persist_db`]. `load(persist(db)) == db` up
/// to the stoplist tally, which is a build-time diagnostic.
pub fn load_db(path: &Path) -> Result<AuthorMacroDB, DbError> {
    let content = fs::read_to_string(path).map_err(|source| DbError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| DbError::Corrupt {
        line: 1,
        message: "missing header".to_string(),
    })?;
    let mut parts = header.split(' ');
    let magic = parts.next().unwrap_or("");
    let version = parts.next().unwrap_or("");
    if magic != DB_MAGIC || version != DB_VERSION {
        return Err(DbError::VersionMismatch {
            found: format!("{magic} {version}").trim().to_string(),
            expected: format!("{DB_MAGIC} {DB_VERSION}"),
        });
    }
    let built_from = parts.next().unwrap_or("").to_string();

    let mut entries: BTreeMap<String, BTreeMap<MacroKey, NaiveDate>> = BTreeMap::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(4, '\t').collect();
        if fields.len() != 4 {
            return Err(DbError::Corrupt {
                line: line_no,
                message: format!("expected 4 tab-separated fields, got {}", fields.len()),
            });
        }
        let date = NaiveDate::parse_from_str(fields[2], "%Y-%m-%d").map_err(|_| {
            DbError::Corrupt {
                line: line_no,
                message: format!("bad date {:?}", fields[2]),
            }
        })?;
        let key = MacroKey::from_canonical(fields[3]);
        let stored_hash = u64::from_str_radix(fields[1], 16).map_err(|_| DbError::Corrupt {
            line: line_no,
            message: format!("bad hash {:?}", fields[1]),
        })?;
        if stored_hash != key.hash64() {
            return Err(DbError::Corrupt {
                line: line_no,
                message: "key hash does not match canonical key".to_string(),
            });
        }
        entries
            .entry(fields[0].to_string())
            .or_default()
            .insert(key, date);
    }
    Ok(AuthorMacroDB {
        entries,
        built_from,
        stoplist_dropped: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::DefKind;

    fn def(name: &str, body: &str) -> MacroDef {
        MacroDef {
            name: name.to_string(),
            body: body.to_string(),
            arity: 0,
            def_kind: DefKind::Newcommand,
            byte_offset: 0,
            end_offset: 0,
        }
    }

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn paper<'a>(
        id: &'a str,
        d: NaiveDate,
        authors: &'a [String],
        defs: &'a [MacroDef],
    ) -> PaperMacros<'a> {
        PaperMacros {
            paper_id: id,
            date: d,
            authors,
            defs,
        }
    }

    #[test]
    fn canonical_key_format() {
        let key = canonical_key(&def("ssm", "\\scriptscriptstyle\\rm"));
        assert_eq!(key.as_str(), "ssm|\\scriptscriptstyle\\rm");
        assert_eq!(key.name(), "ssm");
    }

    #[test]
    fn whitespace_runs_collapse() {
        assert_eq!(MacroKey::new("m", "a  b"), MacroKey::new("m", "a b"));
        assert_eq!(MacroKey::new("m", " a\tb\n"), MacroKey::new("m", "a b"));
    }

    #[test]
    fn keys_are_case_sensitive() {
        assert_ne!(MacroKey::new("m", "a B"), MacroKey::new("m", "a b"));
        assert_ne!(MacroKey::new("M", "x"), MacroKey::new("m", "x"));
    }

    #[test]
    fn first_use_is_the_minimum_date() {
        let authors = vec!["ann".to_string()];
        let defs = vec![def("k", "body")];
        let papers = vec![
            paper("p2", date("2012-01-01"), &authors, &defs),
            paper("p1", date("2010-01-01"), &authors, &defs),
        ];
        let db = build_author_histories(&papers, &DbBuildOptions::default());
        let key = MacroKey::new("k", "body");
        assert_eq!(db.first_use("ann", &key), Some(date("2010-01-01")));
    }

    #[test]
    fn coauthored_definition_credits_both_authors() {
        let authors = vec!["huber".to_string(), "lindner".to_string()];
        let defs = vec![def("ssm", "\\scriptscriptstyle\\rm")];
        let papers = vec![paper("p", date("2012-05-01"), &authors, &defs)];
        let db = build_author_histories(&papers, &DbBuildOptions::default());
        let key = MacroKey::new("ssm", "\\scriptscriptstyle\\rm");
        assert!(db.first_use("huber", &key).is_some());
        assert!(db.first_use("lindner", &key).is_some());
    }

    // Nested-loop oracle over (paper, author, def) for a small synthetic corpus.
    #[test]
    fn build_matches_nested_loop_oracle() {
        let a = vec!["a1".to_string(), "a2".to_string()];
        let b = vec!["a2".to_string(), "a3".to_string()];
        let c = vec!["a1".to_string()];
        let d1 = vec![def("x", "1"), def("y", "2")];
        let d2 = vec![def("y", "2"), def("z", "3")];
        let d3 = vec![def("x", "1")];
        let d4 = vec![def("w", "4")];
        let d5: Vec<MacroDef> = vec![];
        let papers = vec![
            paper("p1", date("2010-01-01"), &a, &d1),
            paper("p2", date("2011-01-01"), &b, &d2),
            paper("p3", date("2009-06-01"), &c, &d3),
            paper("p4", date("2012-01-01"), &a, &d4),
            paper("p5", date("2013-01-01"), &b, &d5),
        ];
        let db = build_author_histories(&papers, &DbBuildOptions::default());

        let mut oracle: BTreeMap<(String, MacroKey), NaiveDate> = BTreeMap::new();
        for p in &papers {
            for author in p.authors {
                for d in p.defs {
                    let k = (author.clone(), canonical_key(d));
                    let entry = oracle.entry(k).or_insert(p.date);
                    *entry = (*entry).min(p.date);
                }
            }
        }
        let mut flattened: BTreeMap<(String, MacroKey), NaiveDate> = BTreeMap::new();
        for (author, history) in &db.entries {
            for (key, first) in history {
                flattened.insert((author.clone(), key.clone()), *first);
            }
        }
        assert_eq!(flattened, oracle);
    }

    #[test]
    fn build_is_order_independent() {
        let a = vec!["a1".to_string()];
        let b = vec!["a1".to_string(), "a2".to_string()];
        let d1 = vec![def("x", "1")];
        let d2 = vec![def("x", "1"), def("y", "2")];
        let p1 = paper("p1", date("2010-01-01"), &a, &d1);
        let p2 = paper("p2", date("2011-01-01"), &b, &d2);
        let forward = build_author_histories(&[p1.clone(), p2.clone()], &DbBuildOptions::default());
        let backward = build_author_histories(&[p2, p1], &DbBuildOptions::default());
        assert_eq!(forward, backward);
    }

    #[test]
    fn strict_excludes_same_day() {
        let authors = vec!["ann".to_string()];
        let defs = vec![def("k", "b")];
        let papers = vec![paper("p", date("2012-03-01"), &authors, &defs)];
        let db = build_author_histories(&papers, &DbBuildOptions::default());
        assert!(db
            .macros_known_before("ann", date("2012-03-01"), TiePolicy::Strict)
            .is_empty());
        assert_eq!(
            db.macros_known_before("ann", date("2013-01-01"), TiePolicy::Strict)
                .len(),
            1
        );
        assert_eq!(
            db.macros_known_before("ann", date("2012-03-01"), TiePolicy::Inclusive)
                .len(),
            1
        );
    }

    // Date-filter oracle over a four-key history.
    #[test]
    fn known_before_matches_date_filter() {
        let authors = vec!["ann".to_string()];
        let all = [
            ("k1", "2008-01-01"),
            ("k2", "2010-06-15"),
            ("k3", "2012-03-01"),
            ("k4", "2015-11-30"),
        ];
        let defs: Vec<Vec<MacroDef>> = all.iter().map(|(n, _)| vec![def(n, "b")]).collect();
        let papers: Vec<PaperMacros> = all
            .iter()
            .zip(&defs)
            .enumerate()
            .map(|(i, ((_, d), defs))| {
                paper(Box::leak(format!("p{i}").into_boxed_str()), date(d), &authors, defs)
            })
            .collect();
        let db = build_author_histories(&papers, &DbBuildOptions::default());
        let query = date("2012-03-01");
        let expected: BTreeSet<MacroKey> = all
            .iter()
            .filter(|(_, d)| date(d) < query)
            .map(|(n, _)| MacroKey::new(n, "b"))
            .collect();
        assert_eq!(
            db.macros_known_before("ann", query, TiePolicy::Strict),
            expected
        );
    }

    #[test]
    fn unknown_author_has_empty_history() {
        let db = AuthorMacroDB::default();
        assert!(db
            .macros_known_before("nobody", date("2012-01-01"), TiePolicy::Strict)
            .is_empty());
    }

    #[test]
    fn strict_subset_of_inclusive() {
        let authors = vec!["ann".to_string()];
        let defs = vec![def("k1", "a"), def("k2", "b")];
        let papers = vec![paper("p", date("2012-03-01"), &authors, &defs)];
        let db = build_author_histories(&papers, &DbBuildOptions::default());
        for query in ["2011-01-01", "2012-03-01", "2013-01-01"] {
            let strict = db.macros_known_before("ann", date(query), TiePolicy::Strict);
            let inclusive = db.macros_known_before("ann", date(query), TiePolicy::Inclusive);
            assert!(strict.is_subset(&inclusive));
        }
    }

    #[test]
    fn empty_db_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.db");
        let db = build_author_histories(&[], &DbBuildOptions::default());
        persist_db(&db, &path).unwrap();
        assert_eq!(load_db(&path).unwrap(), db);
    }

    #[test]
    fn file_has_header_plus_one_record_per_entry() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("three.db");
        let a = vec!["a1".to_string(), "a2".to_string()];
        let b = vec!["a1".to_string()];
        let d1 = vec![def("x", "1")];
        let d2 = vec![def("y", "2")];
        let papers = vec![
            paper("p1", date("2010-01-01"), &a, &d1),
            paper("p2", date("2011-01-01"), &b, &d2),
        ];
        let db = build_author_histories(&papers, &DbBuildOptions::default());
        assert_eq!(db.entry_count(), 3);
        persist_db(&db, &path).unwrap();
        let content = fs::read_to_string(&path).unwrap();
        assert_eq!(content.lines().count(), 4);
        assert!(content.starts_with("macrolens-db v1 "));
        assert_eq!(load_db(&path).unwrap(), db);
    }

    #[test]
    fn permuted_builds_persist_identically() {
        let dir = tempfile::tempdir().unwrap();
        let a = vec!["zoe".to_string()];
        let b = vec!["abe".to_string(), "zoe".to_string()];
        let d1 = vec![def("m", "1"), def("n", "2")];
        let d2 = vec![def("n", "2"), def("o", "3")];
        let p1 = paper("p1", date("2010-01-01"), &a, &d1);
        let p2 = paper("p2", date("2011-01-01"), &b, &d2);

        let path1 = dir.path().join("order1.db");
        let path2 = dir.path().join("order2.db");
        persist_db(
            &build_author_histories(&[p1.clone(), p2.clone()], &DbBuildOptions::default()),
            &path1,
        )
        .unwrap();
        persist_db(
            &build_author_histories(&[p2, p1], &DbBuildOptions::default()),
            &path2,
        )
        .unwrap();
        assert_eq!(fs::read(&path1).unwrap(), fs::read(&path2).unwrap());
    }

    #[test]
    fn version_mismatch_names_both_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.db");
        fs::write(&path, "macrolens-db v9 abc\n").unwrap();
        let err = load_db(&path).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("v9"));
        assert!(message.contains("v1"));
    }

    #[test]
    fn stoplist_drops_ubiquitous_keys() {
        let authors: Vec<Vec<String>> = (0..4).map(|i| vec![format!("a{i}")]).collect();
        let common = vec![def("be", "\\begin{equation}"), def("rare", "x")];
        let only_common = vec![def("be", "\\begin{equation}")];
        let papers: Vec<PaperMacros> = authors
            .iter()
            .enumerate()
            .map(|(i, a)| {
                paper(
                    Box::leak(format!("p{i}").into_boxed_str()),
                    date("2010-01-01"),
                    a,
                    if i == 0 { &common } else { &only_common },
                )
            })
            .collect();
        let options = DbBuildOptions {
            stoplist_df: Some(0.5),
        };
        let db = build_author_histories(&papers, &options);
        let be = MacroKey::new("be", "\\begin{equation}");
        let rare = MacroKey::new("rare", "x");
        assert!(db.first_use("a0", &be).is_none());
        assert!(db.first_use("a0", &rare).is_some());
        assert!(db.stoplist_dropped() > 0);
    }

    #[test]
    fn monotonicity_adding_a_paper() {
        let a = vec!["ann".to_string()];
        let d1 = vec![def("x", "1")];
        let d2 = vec![def("x", "1"), def("y", "2")];
        let p1 = paper("p1", date("2012-01-01"), &a, &d1);
        let p2 = paper("p2", date("2010-01-01"), &a, &d2);
        let small = build_author_histories(&[p1.clone()], &DbBuildOptions::default());
        let large = build_author_histories(&[p1, p2], &DbBuildOptions::default());
        for (author, history) in &small.entries {
            for (key, first) in history {
                let grown = large.first_use(author, key).unwrap();
                assert!(grown <= *first);
            }
        }
    }
}
