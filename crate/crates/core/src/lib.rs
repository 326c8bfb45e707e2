//! Statement networks from news corpora.
//!
//! The pipeline reads dated news articles, finds sentences in which two or
//! more people appear alongside a speech verb or quotation mark, links every
//! pair of those people, and studies the resulting network's core-periphery
//! structure over time.
//!
//! ```text
//! corpus ─▶ tagging ─▶ extract ─▶ graph ─▶ temporal ─▶ reports
//! ```

pub mod corpus;
pub mod error;
pub mod extract;
pub mod graph;
pub mod pipeline;
pub mod tagging;
pub mod temporal;
pub mod text;

pub use corpus::{corpus_stats, ingest_corpus, Corpus, CorpusStats, DateRange, IngestOptions, NewsArticle};
pub use error::{Error, Result};
pub use extract::{detect_statement, extract_statements, SpeechLexicon, StatementSentence};
pub use graph::{k_core_decompose, pairs_from_statement, top_core, CoreDecomposition, Pair, StatementNetwork};
pub use tagging::{apply_merge_rules, canonicalize, Gazetteer, MergeRule, MergeRules, Tagger};
