//! A trainable rule-based part-of-speech tagger.
//!
//! The tagger learns ordered lists of symbolic rewrite rules from a tagged
//! corpus by transformation-based error-driven learning: an initial-state
//! annotator tags everything with per-word most-likely tags (plus a
//! capitalization guess for unknown words), and a greedy loop repeatedly
//! picks whichever candidate rule most reduces training errors, appends it
//! to the rule list, and applies it.
//!
//! Three rule families are learned this way:
//!
//! - [`unknown`] — morphological and distributional rules that improve the
//!   tag guess for words absent from the lexicon;
//! - [`context`] — change-tag rules triggered by neighboring tags and, in
//!   lexicalized form, by the actual words;
//! - [`kbest`] — add-tag rules that trade extra tags per word for coverage
//!   of the correct tag.
//!
//! Everything is deterministic: rule selection uses exact integer (or
//! rational) scores under a strict total order, so identical inputs give
//! bit-identical models regardless of thread count.

pub mod context;
pub mod corpus;
pub mod engine;
pub mod eval;
pub mod initial;
pub mod kbest;
pub mod lexicon;
pub mod model;
pub mod ruleio;
pub mod unknown;

pub use context::{ContextualRule, ContextualTrigger, TriggerInventory};
pub use corpus::{Corpus, Sentence, Tag, Token, Word, SENTINEL};
pub use engine::{LearnerConfig, Score};
pub use initial::UnknownTagDefaults;
pub use kbest::{KBestCondition, KBestConfig, KBestMetrics, KBestRule, TagSetCorpus};
pub use lexicon::{BigramTable, Lexicon, Wordlist};
pub use unknown::{UnknownRule, UnknownTrigger};
