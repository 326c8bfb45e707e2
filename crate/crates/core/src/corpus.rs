//! News-article corpora: line-delimited JSON ingestion, per-source date
//! ranges and volume statistics.
//!
//! Each line of a corpus file is one object with the keys `article_id`,
//! `source`, `published` (ISO-8601 date, optional time part is dropped),
//! `headline`, `body` and optionally `category`. Blank lines are ignored.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsArticle {
    pub article_id: String,
    pub source: String,
    pub published: NaiveDate,
    pub headline: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

/// Inclusive day range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub first: NaiveDate,
    pub last: NaiveDate,
}

impl DateRange {
    pub fn new(first: NaiveDate, last: NaiveDate) -> Self {
        debug_assert!(first <= last);
        DateRange { first, last }
    }

    pub fn day(date: NaiveDate) -> Self {
        DateRange {
            first: date,
            last: date,
        }
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.first <= date && date <= self.last
    }

    pub fn extend(&mut self, date: NaiveDate) {
        self.first = self.first.min(date);
        self.last = self.last.max(date);
    }

    /// Distinct calendar months touched by the range, both ends included.
    pub fn months_spanned(&self) -> u32 {
        let first = self.first.year() * 12 + self.first.month0() as i32;
        let last = self.last.year() * 12 + self.last.month0() as i32;
        (last - first + 1) as u32
    }

    /// Whole months elapsed between the two ends (2008-01-01 to 2017-12-01 is 119).
    pub fn elapsed_months(&self) -> u32 {
        let mut months = self.months_spanned() - 1;
        while months > 0 && self.first + Months::new(months) > self.last {
            months -= 1;
        }
        months
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> {
        let last = self.last;
        self.first.iter_days().take_while(move |d| *d <= last)
    }

    pub fn day_count(&self) -> usize {
        (self.last - self.first).num_days() as usize + 1
    }
}

impl fmt::Display for DateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MalformedPolicy {
    #[default]
    FailFast,
    Skip,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub malformed: MalformedPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

/// An immutable, deterministically ordered set of articles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    articles: Vec<NewsArticle>,
    ranges: BTreeMap<String, DateRange>,
    skipped: Vec<SkippedLine>,
}

#[derive(Deserialize)]
struct RawRecord {
    article_id: String,
    source: String,
    published: String,
    headline: String,
    body: String,
    #[serde(default)]
    category: Option<String>,
}

/// Parses `YYYY-MM-DD`, discarding any time-of-day suffix (`T...` or ` ...`).
pub fn parse_day(value: &str) -> Option<NaiveDate> {
    let value = value.trim();
    let day = match value.find(['T', ' ']) {
        Some(idx) if idx == 10 => &value[..idx],
        Some(_) => return None,
        None => value,
    };
    let b = day.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    NaiveDate::parse_from_str(day, "%Y-%m-%d").ok()
}

fn parse_record(line: &str) -> std::result::Result<NewsArticle, String> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if raw.article_id.trim().is_empty() {
        return Err("empty article_id".into());
    }
    if raw.source.trim().is_empty() {
        return Err("empty source".into());
    }
    let published = parse_day(&raw.published)
        .ok_or_else(|| format!("unparseable date `{}`", raw.published))?;
    if raw.body.trim().is_empty() {
        return Err(format!("empty body for article `{}`", raw.article_id));
    }
    Ok(NewsArticle {
        article_id: raw.article_id,
        source: raw.source,
        published,
        headline: raw.headline,
        body: raw.body,
        category: raw.category.filter(|c| !c.trim().is_empty()),
    })
}

/// Loads a corpus file. Duplicate article ids are always an error; other bad
/// lines follow `options.malformed`.
pub fn ingest_corpus(path: impl AsRef<Path>, options: &IngestOptions) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;

    let mut articles = Vec::new();
    let mut skipped = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(line) {
            Ok(article) => {
                if !seen.insert(article.article_id.clone()) {
                    return Err(Error::DuplicateArticle {
                        path: path.to_owned(),
                        line: line_no,
                        id: article.article_id,
                    });
                }
                articles.push(article);
            }
            Err(reason) => match options.malformed {
                MalformedPolicy::FailFast => {
                    return Err(Error::MalformedRecord {
                        path: path.to_owned(),
                        line: line_no,
                        reason,
                    })
                }
                MalformedPolicy::Skip => {
                    log::warn!("{}:{line_no}: skipping record: {reason}", path.display());
                    skipped.push(SkippedLine {
                        line: line_no,
                        reason,
                    });
                }
            },
        }
    }

    let mut corpus = Corpus::from_articles(articles)?;
    corpus.skipped = skipped;
    Ok(corpus)
}

impl Corpus {
    pub fn from_articles(mut articles: Vec<NewsArticle>) -> Result<Self> {
        articles.sort_by(|a, b| {
            (a.published, &a.article_id).cmp(&(b.published, &b.article_id))
        });
        let mut ids = HashSet::new();
        let mut ranges: BTreeMap<String, DateRange> = BTreeMap::new();
        for article in &articles {
            if !ids.insert(article.article_id.as_str()) {
                return Err(Error::Invariant(format!(
                    "duplicate article_id `{}`",
                    article.article_id
                )));
            }
            ranges
                .entry(article.source.clone())
                .and_modify(|r| r.extend(article.published))
                .or_insert_with(|| DateRange::day(article.published));
        }
        Ok(Corpus {
            articles,
            ranges,
            skipped: Vec::new(),
        })
    }

    /// Articles in `(published, article_id)` order.
    pub fn articles(&self) -> &[NewsArticle] {
        &self.articles
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn sources(&self) -> BTreeSet<&str> {
        self.ranges.keys().map(String::as_str).collect()
    }

    pub fn date_range(&self, source: &str) -> Option<DateRange> {
        self.ranges.get(source).copied()
    }

    pub fn date_ranges(&self) -> &BTreeMap<String, DateRange> {
        &self.ranges
    }

    /// Range across every source.
    pub fn span(&self) -> Option<DateRange> {
        let first = self.articles.first()?.published;
        let last = self.articles.last()?.published;
        Some(DateRange::new(first, last))
    }

    pub fn skipped(&self) -> &[SkippedLine] {
        &self.skipped
    }

    /// Canonical serialized form: one JSON object per line in iteration order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for article in &self.articles {
            out.push_str(&serde_json::to_string(article).expect("article serializes"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceStats {
    pub articles: usize,
    pub first: NaiveDate,
    pub last: NaiveDate,
    /// Distinct calendar months touched, both ends included.
    pub months_spanned: u32,
    /// Whole months elapsed between first and last article.
    pub elapsed_months: u32,
}

impl SourceStats {
    pub fn range(&self) -> DateRange {
        DateRange::new(self.first, self.last)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_articles: usize,
    pub skipped_records: usize,
    pub sources: BTreeMap<String, SourceStats>,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for article in corpus.articles() {
        *counts.entry(article.source.as_str()).or_default() += 1;
    }
    let sources = corpus
        .date_ranges()
        .iter()
        .map(|(source, range)| {
            let stats = SourceStats {
                articles: counts[source.as_str()],
                first: range.first,
                last: range.last,
                months_spanned: range.months_spanned(),
                elapsed_months: range.elapsed_months(),
            };
            (source.clone(), stats)
        })
        .collect();
    CorpusStats {
        total_articles: corpus.len(),
        skipped_records: corpus.skipped().len(),
        sources,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn record(id: &str, source: &str, published: &str) -> String {
        format!(
            r#"{{"article_id":"{id}","source":"{source}","published":"{published}","headline":"h","body":"Some body."}}"#
        )
    }

    fn write_lines(lines: &[String]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn two_records() {
        let f = write_lines(&[
            record("b", "Star", "2010-03-04"),
            record("a", "Star", "2009-12-31"),
        ]);
        let corpus = ingest_corpus(f.path(), &IngestOptions::default()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.articles()[0].article_id, "a");
        assert_eq!(
            corpus.date_range("Star"),
            Some(DateRange::new(date("2009-12-31"), date("2010-03-04")))
        );
    }

    #[test]
    fn empty_file() {
        let f = write_lines(&[]);
        let corpus = ingest_corpus(f.path(), &IngestOptions::default()).unwrap();
        assert!(corpus.is_empty());
        assert!(corpus.sources().is_empty());
    }

    #[test]
    fn malformed_line_policies() {
        let f = write_lines(&[record("a", "Star", "2010-01-01"), "{not json".into()]);
        let err = ingest_corpus(f.path(), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { line: 2, .. }), "{err}");

        let opts = IngestOptions {
            malformed: MalformedPolicy::Skip,
        };
        let corpus = ingest_corpus(f.path(), &opts).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.skipped().len(), 1);
        assert_eq!(corpus.skipped()[0].line, 2);
    }

    #[test]
    fn bad_date_and_empty_body_are_malformed() {
        let bad_date = record("a", "Star", "2010-02-30");
        let empty_body = r#"{"article_id":"b","source":"S","published":"2010-01-01","headline":"h","body":"  "}"#;
        for line in [bad_date, empty_body.to_string()] {
            let f = write_lines(&[line]);
            let err = ingest_corpus(f.path(), &IngestOptions::default()).unwrap_err();
            assert!(matches!(err, Error::MalformedRecord { line: 1, .. }));
        }
    }

    #[test]
    fn duplicate_id_is_error_even_when_skipping() {
        let f = write_lines(&[
            record("a", "Star", "2010-01-01"),
            record("a", "Star", "2010-01-02"),
        ]);
        let opts = IngestOptions {
            malformed: MalformedPolicy::Skip,
        };
        let err = ingest_corpus(f.path(), &opts).unwrap_err();
        assert!(matches!(err, Error::DuplicateArticle { line: 2, .. }));
    }

    #[test]
    fn missing_file() {
        let err = ingest_corpus("/nonexistent/corpus.jsonl", &IngestOptions::default());
        assert!(matches!(err, Err(Error::Io { .. })));
    }

    #[test]
    fn time_of_day_is_discarded() {
        assert_eq!(parse_day("2016-10-01T08:30:00+06:00"), Some(date("2016-10-01")));
        assert_eq!(parse_day("2016-10-01 08:30"), Some(date("2016-10-01")));
        assert_eq!(parse_day("2016-10-1"), None);
        assert_eq!(parse_day("01/10/2016"), None);
    }

    #[test]
    fn month_counts() {
        let r = DateRange::new(date("2008-01-01"), date("2017-12-01"));
        assert_eq!(r.elapsed_months(), 119);
        assert_eq!(r.months_spanned(), 120);

        let r = DateRange::new(date("2013-04-06"), date("2016-06-14"));
        assert_eq!(r.elapsed_months(), 38);
        assert_eq!(r.months_spanned(), 39);

        let r = DateRange::new(date("2016-10-01"), date("2018-04-22"));
        assert_eq!(r.elapsed_months(), 18);
        assert_eq!(r.months_spanned(), 19);

        let r = DateRange::new(date("2011-01-31"), date("2011-02-28"));
        assert_eq!(r.elapsed_months(), 1);
        let r = DateRange::new(date("2011-01-15"), date("2011-02-14"));
        assert_eq!(r.elapsed_months(), 0);
        assert_eq!(r.months_spanned(), 2);
    }

    #[test]
    fn stats_single_article_and_same_day() {
        let f = write_lines(&[record("a", "Star", "2010-05-05")]);
        let stats = corpus_stats(&ingest_corpus(f.path(), &IngestOptions::default()).unwrap());
        assert_eq!(stats.sources["Star"].months_spanned, 1);
        assert_eq!(stats.sources["Star"].elapsed_months, 0);

        let f = write_lines(&[
            record("a", "Star", "2010-05-05"),
            record("b", "Star", "2010-05-05"),
        ]);
        let stats = corpus_stats(&ingest_corpus(f.path(), &IngestOptions::default()).unwrap());
        let s = &stats.sources["Star"];
        assert_eq!(s.articles, 2);
        assert_eq!(s.first, s.last);
    }

    #[test]
    fn stats_119_months() {
        let f = write_lines(&[
            record("a", "The Daily Star", "2008-01-01"),
            record("b", "The Daily Star", "2017-12-01"),
            record("c", "New Age", "2016-10-01"),
        ]);
        let stats = corpus_stats(&ingest_corpus(f.path(), &IngestOptions::default()).unwrap());
        assert_eq!(stats.total_articles, 3);
        assert_eq!(stats.sources["The Daily Star"].elapsed_months, 119);
        assert_eq!(
            stats.sources.values().map(|s| s.articles).sum::<usize>(),
            stats.total_articles
        );
    }

    #[test]
    fn reingest_is_identical() {
        let f = write_lines(&[
            record("z", "B", "2010-01-01"),
            record("y", "A", "2010-01-01"),
            record("x", "A", "2009-01-01"),
        ]);
        let a = ingest_corpus(f.path(), &IngestOptions::default()).unwrap();
        let b = ingest_corpus(f.path(), &IngestOptions::default()).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        assert_eq!(a, b);
    }
}
