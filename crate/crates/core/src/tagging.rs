//! Person-entity tagging and name canonicalization.
//!
//! Two tagger backends are provided: a case-insensitive longest-match
//! [`Gazetteer`], and [`ExternalTags`], which imports token/label sidecar files
//! produced by any external NER system. Split name fragments are rejoined by
//! configured [`MergeRules`].

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::NewsArticle;
use crate::error::{Error, Result};
use crate::text::{segment_sentences, tokenize, Sentence};

/// Token span of a mention: `start..end` token offsets within sentence `sentence`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub surface: String,
    pub canonical: String,
    pub span: Span,
}

fn is_edge_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

/// Trims, collapses internal whitespace to single spaces and strips leading
/// and trailing punctuation. Case is preserved.
pub fn canonicalize(surface: &str) -> Result<String> {
    let collapsed = surface.split_whitespace().collect::<Vec<_>>().join(" ");
    let stripped = collapsed.trim_matches(is_edge_punct).trim();
    if stripped.is_empty() {
        return Err(Error::EmptyName(surface.to_owned()));
    }
    Ok(stripped.to_owned())
}

fn fold(token: &str) -> String {
    token.to_lowercase()
}

/// Dictionary tagger over multi-token person names.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashMap<Vec<String>, String>,
    max_tokens: usize,
}

impl Gazetteer {
    /// Builds from raw names. When two names fold to the same key the first wins.
    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut gazetteer = Gazetteer::default();
        for name in names {
            let canonical = canonicalize(name.as_ref())?;
            let key: Vec<String> = tokenize(&canonical).iter().map(|t| fold(&t.text)).collect();
            gazetteer.max_tokens = gazetteer.max_tokens.max(key.len());
            gazetteer.entries.entry(key).or_insert(canonical);
        }
        Ok(gazetteer)
    }

    /// One name per line; blank lines and `#` comments are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut names = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if canonicalize(line).is_err() {
                return Err(Error::MalformedLine {
                    path: path.to_owned(),
                    line: idx + 1,
                    reason: "entry has no name characters".into(),
                });
            }
            names.push(line.to_owned());
        }
        Self::from_names(names)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Non-overlapping mentions in span order. Among overlapping candidate
    /// matches the longest wins, ties going to the earliest start.
    pub fn tag(&self, sentence: &Sentence) -> Vec<EntityMention> {
        let folded: Vec<String> = sentence.tokens.iter().map(|t| fold(&t.text)).collect();
        let mut candidates = Vec::new();
        for start in 0..folded.len() {
            for len in 1..=self.max_tokens.min(folded.len() - start) {
                if let Some(canonical) = self.entries.get(&folded[start..start + len]) {
                    candidates.push((start, start + len, canonical));
                }
            }
        }
        candidates.sort_by_key(|&(start, end, _)| (std::cmp::Reverse(end - start), start));

        let mut taken = vec![false; folded.len()];
        let mut mentions = Vec::new();
        for (start, end, canonical) in candidates {
            if taken[start..end].iter().any(|&t| t) {
                continue;
            }
            taken[start..end].iter_mut().for_each(|t| *t = true);
            mentions.push(EntityMention {
                surface: sentence.token_slice(start, end).to_owned(),
                canonical: canonical.clone(),
                span: Span {
                    sentence: sentence.index,
                    start,
                    end,
                },
            });
        }
        mentions.sort_by_key(|m| m.span);
        mentions
    }
}

/// A sentence together with its person mentions.
#[derive(Debug, Clone)]
pub struct TaggedSentence {
    pub sentence: Sentence,
    pub mentions: Vec<EntityMention>,
}

/// Imports NER output from `<dir>/<article_id>.tags` files: one `token\tlabel`
/// per line, sentences separated by blank lines.
///
/// Labels `PERSON`/`PER` (optionally with `B-`/`I-` prefixes) mark persons.
/// Runs of consecutive person tokens form one mention unless a `B-` label
/// starts a new one. Any other label is outside.
#[derive(Debug, Clone)]
pub struct ExternalTags {
    dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum PersonLabel {
    Outside,
    Begin,
    Inside,
}

fn person_label(label: &str) -> PersonLabel {
    let (prefix, kind) = match label.split_once('-') {
        Some((p, k)) if p.len() == 1 => (Some(p), k),
        _ => (None, label),
    };
    if !matches!(kind, "PERSON" | "PER") {
        return PersonLabel::Outside;
    }
    match prefix {
        Some("B") | Some("S") => PersonLabel::Begin,
        _ => PersonLabel::Inside,
    }
}

/// Groups labeled tokens of one sentence into mentions.
pub fn mentions_from_labels<S: AsRef<str>>(sentence: &Sentence, labels: &[S]) -> Vec<EntityMention> {
    debug_assert_eq!(sentence.tokens.len(), labels.len());
    let mut mentions = Vec::new();
    let mut push = |start: usize, end: usize| {
        let surface = sentence.token_slice(start, end);
        match canonicalize(surface) {
            Ok(canonical) => mentions.push(EntityMention {
                surface: surface.to_owned(),
                canonical,
                span: Span {
                    sentence: sentence.index,
                    start,
                    end,
                },
            }),
            Err(_) => log::debug!("dropping punctuation-only person span {surface:?}"),
        }
    };
    let mut open: Option<usize> = None;
    for (i, label) in labels.iter().enumerate() {
        match person_label(label.as_ref()) {
            PersonLabel::Outside => {
                if let Some(s) = open.take() {
                    push(s, i);
                }
            }
            PersonLabel::Begin => {
                if let Some(s) = open.replace(i) {
                    push(s, i);
                }
            }
            PersonLabel::Inside => {
                open.get_or_insert(i);
            }
        }
    }
    if let Some(s) = open {
        push(s, labels.len());
    }
    mentions
}

impl ExternalTags {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ExternalTags { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn sidecar_path(&self, article_id: &str) -> PathBuf {
        self.dir.join(format!("{article_id}.tags"))
    }

    pub fn load(&self, article_id: &str) -> Result<Vec<TaggedSentence>> {
        let path = self.sidecar_path(article_id);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::MissingSidecar {
                    article_id: article_id.to_owned(),
                    path,
                })
            }
            Err(e) => return Err(Error::io(path, e)),
        };
        parse_sidecar(&text, &path)
    }
}

fn parse_sidecar(text: &str, path: &Path) -> Result<Vec<TaggedSentence>> {
    let mut out = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut flush = |tokens: &mut Vec<String>, labels: &mut Vec<String>| {
        if tokens.is_empty() {
            return;
        }
        let sentence = Sentence::from_tokens(out.len(), tokens);
        let mentions = mentions_from_labels(&sentence, labels);
        out.push(TaggedSentence { sentence, mentions });
        tokens.clear();
        labels.clear();
    };
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            flush(&mut tokens, &mut labels);
            continue;
        }
        let malformed = |reason: &str| Error::MalformedLine {
            path: path.to_owned(),
            line: idx + 1,
            reason: reason.to_owned(),
        };
        let mut fields = line.split('\t');
        let (token, label) = match (fields.next(), fields.next(), fields.next()) {
            (Some(t), Some(l), None) => (t.trim(), l.trim()),
            (_, None, _) => return Err(malformed("expected `token<TAB>label`")),
            _ => return Err(malformed("more than two tab-separated fields")),
        };
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(malformed("token must be non-empty and contain no whitespace"));
        }
        if label.is_empty() {
            return Err(malformed("empty label"));
        }
        tokens.push(token.to_owned());
        labels.push(label.to_owned());
    }
    flush(&mut tokens, &mut labels);
    Ok(out)
}

#[derive(Debug, Clone)]
pub enum Tagger {
    Gazetteer(Gazetteer),
    External(ExternalTags),
}

impl Tagger {
    /// Segments and tags one article. The gazetteer backend segments the body
    /// (headline sentences first when `include_headline`); the external
    /// backend takes sentences and tokens from the sidecar as-is.
    pub fn tag_article(&self, article: &NewsArticle, include_headline: bool) -> Result<Vec<TaggedSentence>> {
        match self {
            Tagger::Gazetteer(g) => {
                let mut sentences = Vec::new();
                if include_headline {
                    sentences.extend(segment_sentences(&article.headline));
                }
                sentences.extend(segment_sentences(&article.body));
                Ok(sentences
                    .into_iter()
                    .enumerate()
                    .map(|(idx, mut sentence)| {
                        sentence.index = idx;
                        let mentions = g.tag(&sentence);
                        TaggedSentence { sentence, mentions }
                    })
                    .collect())
            }
            Tagger::External(ext) => ext.load(&article.article_id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub merged: String,
}

impl MergeRule {
    pub fn new(left: &str, right: &str) -> Result<Self> {
        let left = canonicalize(left)?;
        let right = canonicalize(right)?;
        let merged = format!("{left} {right}");
        Ok(MergeRule { left, right, merged })
    }

    pub fn with_merged(left: &str, right: &str, merged: &str) -> Result<Self> {
        Ok(MergeRule {
            left: canonicalize(left)?,
            right: canonicalize(right)?,
            merged: canonicalize(merged)?,
        })
    }
}

/// Fragment-pair lookup. A merged name may not itself be a fragment of
/// another rule, which keeps a single merge pass idempotent.
#[derive(Debug, Clone, Default)]
pub struct MergeRules {
    rules: BTreeMap<(String, String), String>,
}

impl MergeRules {
    pub fn new(rules: impl IntoIterator<Item = MergeRule>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for rule in rules {
            let key = (rule.left, rule.right);
            if let Some(prev) = map.insert(key.clone(), rule.merged.clone()) {
                if prev != rule.merged {
                    return Err(Error::Config(format!(
                        "conflicting merge rules for ({}, {}): `{prev}` vs `{}`",
                        key.0, key.1, rule.merged
                    )));
                }
            }
        }
        for merged in map.values() {
            if map.keys().any(|(l, r)| l == merged || r == merged) {
                return Err(Error::Config(format!(
                    "merged name `{merged}` is also used as a fragment"
                )));
            }
        }
        Ok(MergeRules { rules: map })
    }

    /// Lines of `left<TAB>right[<TAB>merged]`; blank lines and `#` comments skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rules = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let rule = match fields.as_slice() {
                [l, r] => MergeRule::new(l, r),
                [l, r, m] => MergeRule::with_merged(l, r, m),
                _ => Err(Error::EmptyName(String::new())),
            };
            let rule = rule.map_err(|_| Error::MalformedLine {
                path: path.to_owned(),
                line: idx + 1,
                reason: "expected `left<TAB>right<TAB>merged` with non-empty names".into(),
            })?;
            rules.push(rule);
        }
        Self::new(rules)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, left: &str, right: &str) -> Option<&str> {
        self.rules
            .get(&(left.to_owned(), right.to_owned()))
            .map(String::as_str)
    }
}

/// Single left-to-right pass joining adjacent mentions (`right.start ==
/// left.end` in the same sentence) whose canonical names match a rule.
pub fn apply_merge_rules(mentions: Vec<EntityMention>, rules: &MergeRules) -> Vec<EntityMention> {
    if rules.is_empty() {
        return mentions;
    }
    let mut out = Vec::with_capacity(mentions.len());
    let mut iter = mentions.into_iter().peekable();
    while let Some(left) = iter.next() {
        let merged = iter.peek().and_then(|right| {
            let adjacent = right.span.sentence == left.span.sentence && right.span.start == left.span.end;
            adjacent
                .then(|| rules.get(&left.canonical, &right.canonical))
                .flatten()
        });
        match merged {
            Some(name) => {
                let name = name.to_owned();
                let right = iter.next().expect("peeked");
                out.push(EntityMention {
                    surface: format!("{} {}", left.surface, right.surface),
                    canonical: name,
                    span: Span {
                        sentence: left.span.sentence,
                        start: left.span.start,
                        end: right.span.end,
                    },
                });
            }
            None => out.push(left),
        }
    }
    out
}
