//! Sentence segmentation and word tokenization.

use serde::{Deserialize, Serialize};

/// A token with byte offsets into its sentence's text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(index: usize, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Sentence {
            index,
            text,
            tokens,
        }
    }

    /// Builds a sentence from pre-split tokens, joining them with single spaces.
    pub fn from_tokens<S: AsRef<str>>(index: usize, tokens: &[S]) -> Self {
        let mut text = String::new();
        let mut out = Vec::with_capacity(tokens.len());
        for tok in tokens {
            if !text.is_empty() {
                text.push(' ');
            }
            let start = text.len();
            text.push_str(tok.as_ref());
            out.push(Token {
                text: tok.as_ref().to_owned(),
                start,
                end: text.len(),
            });
        }
        Sentence {
            index,
            text,
            tokens: out,
        }
    }

    /// Text covered by tokens `start..end`.
    pub fn token_slice(&self, start: usize, end: usize) -> &str {
        &self.text[self.tokens[start].start..self.tokens[end - 1].end]
    }
}

const ABBREVIATIONS: &[&str] = &[
    "adm", "approx", "apr", "aug", "brig", "capt", "cmdr", "co", "col", "corp", "dec", "dept",
    "dr", "e.g", "feb", "gen", "gov", "govt", "hon", "i.e", "inc", "jan", "jr", "jul", "jun",
    "lt", "ltd", "maj", "mar", "md", "messrs", "mohd", "mr", "mrs", "ms", "mt", "no", "nov",
    "oct", "prof", "rev", "sen", "sep", "sept", "sgt", "sr", "st", "vs",
];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | '”' | '’' | ')' | ']')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '“' | '‘' | '(' | '[')
}

/// True when the word in front of a period should not end a sentence:
/// listed abbreviations, single-letter initials and dotted acronyms (U.S, A.K).
fn is_abbreviation(word: &str) -> bool {
    if word.is_empty() {
        return false;
    }
    let lower = word.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    let mut chars = word.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        return c.is_uppercase();
    }
    word.contains('.')
        && word
            .split('.')
            .all(|part| (1..=2).contains(&part.chars().count()) && part.chars().all(char::is_alphabetic))
}

/// Splits `body` into sentences on `.`, `!` and `?` followed by whitespace or
/// end of text. Closing quotes and brackets stay with the sentence they end.
/// Periods after abbreviations, and terminators followed by a lowercase word,
/// do not split.
pub fn segment_sentences(body: &str) -> Vec<Sentence> {
    let chars: Vec<(usize, char)> = body.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(body.len(), |&(b, _)| b);

    let mut pieces = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && is_terminator(chars[j].1) {
            j += 1;
        }
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let at_break = j == chars.len() || chars[j].1.is_whitespace();
        let mut split = at_break;
        if split && c == '.' && j == i + 1 {
            let mut w = i;
            while w > 0 && !chars[w - 1].1.is_whitespace() && !is_opener(chars[w - 1].1) {
                w -= 1;
            }
            split = !is_abbreviation(&body[byte_at(w)..byte_at(i)]);
        }
        if split {
            let next = chars[j..].iter().find(|(_, ch)| !ch.is_whitespace());
            if let Some((_, ch)) = next {
                split = !ch.is_lowercase();
            }
        }
        if split {
            let end = byte_at(j);
            pieces.push(&body[start..end]);
            start = end;
        }
        i = j;
    }
    pieces.push(&body[start..]);

    pieces
        .into_iter()
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .enumerate()
        .map(|(idx, text)| Sentence::new(idx, text))
        .collect()
}

fn is_connector(c: char) -> bool {
    matches!(c, '-' | '\'' | '’' | '.' | '&')
}

/// Whitespace and punctuation tokenizer. Alphanumeric runs may contain
/// connectors (`-`, `.`, `&`, apostrophes) between alphanumerics; a trailing
/// possessive `'s` becomes its own token. Every other non-space character is
/// a single-character token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !c.is_alphanumeric() {
            tokens.push(Token {
                text: c.to_string(),
                start: byte_at(i),
                end: byte_at(i + 1),
            });
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() {
            let cj = chars[j].1;
            if cj.is_alphanumeric() {
                j += 1;
            } else if is_connector(cj) && chars.get(j + 1).is_some_and(|n| n.1.is_alphanumeric()) {
                j += 2;
            } else {
                break;
            }
        }
        let (start, end) = (byte_at(i), byte_at(j));
        let word = &text[start..end];
        let possessive = j - i > 2
            && matches!(chars[j - 2].1, '\'' | '’')
            && matches!(chars[j - 1].1, 's' | 'S');
        if possessive {
            let split = byte_at(j - 2);
            tokens.push(Token {
                text: text[start..split].to_owned(),
                start,
                end: split,
            });
            tokens.push(Token {
                text: text[split..end].to_owned(),
                start: split,
                end,
            });
        } else {
            tokens.push(Token {
                text: word.to_owned(),
                start,
                end,
            });
        }
        i = j;
    }
    tokens
}
