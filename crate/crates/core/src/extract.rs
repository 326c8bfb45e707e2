//! Statement-sentence selection: sentences that carry a speech trigger and
//! mention at least two distinct people.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::NewsArticle;
use crate::error::{Error, Result};
use crate::tagging::{apply_merge_rules, MergeRules, TaggedSentence, Tagger};
use crate::text::Sentence;

/// Speech verbs recognized when no lexicon file is given.
pub const DEFAULT_LEMMAS: &[&str] = &[
    "said", "asked", "told", "spoke", "speak", "says", "added", "declare", "alleged",
];

const DEFAULT_INFLECTIONS: &[&str] = &[
    "say", "saying", "ask", "asking", "asks", "tell", "telling", "tells", "spoken", "speaking",
    "speaks", "add", "adding", "adds", "declared", "declaring", "declares", "allege",
    "alleging", "alleges",
];

/// Straight and typographic single/double quotes.
pub const QUOTE_MARKS: &[char] = &['"', '\'', '“', '”', '‘', '’'];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeechLexicon {
    lemmas: BTreeSet<String>,
    surface_forms: BTreeSet<String>,
    /// A quotation mark alone qualifies a sentence.
    pub quote_rule: bool,
    /// Require a quotation mark and a speech verb together.
    pub require_both: bool,
}

impl Default for SpeechLexicon {
    fn default() -> Self {
        let lemmas: BTreeSet<String> = DEFAULT_LEMMAS.iter().map(|s| s.to_string()).collect();
        let mut surface_forms = lemmas.clone();
        surface_forms.extend(DEFAULT_INFLECTIONS.iter().map(|s| s.to_string()));
        SpeechLexicon {
            lemmas,
            surface_forms,
            quote_rule: true,
            require_both: false,
        }
    }
}

impl SpeechLexicon {
    /// A lexicon over exactly `forms` (each is its own lemma).
    pub fn from_forms<I, S>(forms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let forms: BTreeSet<String> = forms
            .into_iter()
            .map(|s| s.as_ref().trim().to_lowercase())
            .filter(|s| !s.is_empty())
            .collect();
        SpeechLexicon {
            lemmas: forms.clone(),
            surface_forms: forms,
            ..Default::default()
        }
    }

    /// One surface form per line; `#` starts a comment.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let forms = text.lines().map(|l| l.split('#').next().unwrap_or(""));
        let lexicon = Self::from_forms(forms);
        if lexicon.surface_forms.is_empty() {
            return Err(Error::Config(format!("{}: lexicon has no entries", path.display())));
        }
        Ok(lexicon)
    }

    pub fn with_triggers(mut self, quote_rule: bool, require_both: bool) -> Result<Self> {
        if require_both && !quote_rule {
            return Err(Error::Config(
                "--require-both needs quote triggers; drop --no-quote-trigger".into(),
            ));
        }
        self.quote_rule = quote_rule;
        self.require_both = require_both;
        Ok(self)
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.lemmas.iter().map(String::as_str)
    }

    pub fn surface_forms(&self) -> impl Iterator<Item = &str> {
        self.surface_forms.iter().map(String::as_str)
    }

    pub fn insert(&mut self, form: &str) {
        let form = form.trim().to_lowercase();
        if !form.is_empty() {
            self.surface_forms.insert(form);
        }
    }

    pub fn is_speech_verb(&self, token: &str) -> bool {
        self.surface_forms.contains(&token.to_lowercase())
    }
}

/// What qualified a sentence as a statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Trigger {
    Verb(String),
    Quote(char),
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trigger::Verb(v) => f.write_str(v),
            Trigger::Quote(q) => write!(f, "{q}"),
        }
    }
}

fn quote_token(token: &str) -> Option<char> {
    let mut chars = token.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if QUOTE_MARKS.contains(&c) => Some(c),
        _ => None,
    }
}

/// First trigger in token order. Verbs match whole tokens case-insensitively;
/// quotation marks count only as standalone tokens, so apostrophes inside
/// words and possessives do not fire. Under `require_both` the first verb is
/// returned, provided a quote mark also occurs.
pub fn detect_statement(sentence: &Sentence, lexicon: &SpeechLexicon) -> Option<Trigger> {
    let mut verb = None;
    let mut quote = None;
    for tok in &sentence.tokens {
        if verb.is_none() && lexicon.is_speech_verb(&tok.text) {
            verb = Some(Trigger::Verb(tok.text.clone()));
            if !lexicon.require_both {
                return verb;
            }
        }
        if quote.is_none() && lexicon.quote_rule {
            if let Some(q) = quote_token(&tok.text) {
                quote = Some(Trigger::Quote(q));
                if !lexicon.require_both {
                    return quote;
                }
            }
        }
        if verb.is_some() && quote.is_some() {
            break;
        }
    }
    if lexicon.require_both {
        verb.filter(|_| quote.is_some())
    } else {
        verb.or(quote)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementSentence {
    pub article_id: String,
    pub source: String,
    pub published: NaiveDate,
    pub sentence_index: usize,
    pub text: String,
    /// Distinct canonical names in order of first appearance.
    pub entities: Vec<String>,
    pub trigger: String,
}

impl StatementSentence {
    /// Number of co-occurrence pairs this statement contributes.
    pub fn pair_count(&self) -> usize {
        let n = self.entities.len();
        n * n.saturating_sub(1) / 2
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExtractOptions {
    pub include_headline: bool,
}

/// Statements of one article plus the number of sentences examined.
#[derive(Debug, Clone, Default)]
pub struct ArticleStatements {
    pub sentences: usize,
    pub statements: Vec<StatementSentence>,
}

fn distinct_names(tagged: TaggedSentence, rules: &MergeRules) -> (Sentence, Vec<String>) {
    let mentions = apply_merge_rules(tagged.mentions, rules);
    let mut seen = BTreeSet::new();
    let names = mentions
        .into_iter()
        .filter_map(|m| seen.insert(m.canonical.clone()).then_some(m.canonical))
        .collect();
    (tagged.sentence, names)
}

pub fn extract_statements(
    article: &NewsArticle,
    tagger: &Tagger,
    lexicon: &SpeechLexicon,
    rules: &MergeRules,
    options: &ExtractOptions,
) -> Result<ArticleStatements> {
    let tagged = tagger.tag_article(article, options.include_headline)?;
    let sentences = tagged.len();
    let mut statements = Vec::new();
    for t in tagged {
        let Some(trigger) = detect_statement(&t.sentence, lexicon) else {
            continue;
        };
        let (sentence, entities) = distinct_names(t, rules);
        if entities.len() < 2 {
            continue;
        }
        statements.push(StatementSentence {
            article_id: article.article_id.clone(),
            source: article.source.clone(),
            published: article.published,
            sentence_index: sentence.index,
            text: sentence.text,
            entities,
            trigger: trigger.to_string(),
        });
    }
    Ok(ArticleStatements {
        sentences,
        statements,
    })
}
