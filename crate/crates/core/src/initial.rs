//! Initial-state annotation: known words get their most likely tag, unknown
//! words get a capitalization-based guess refined by learned unknown-word
//! rules.

use std::collections::HashMap;

use crate::corpus::{Corpus, Tag, Word};
use crate::lexicon::{BigramTable, Lexicon, Wordlist};
use crate::unknown::{apply_unknown_rules, UnknownRule};

/// The two guesses for words absent from the lexicon, before any unknown-word
/// rules run. Configuration, not constants: the tagger is tagset-agnostic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownTagDefaults {
    pub capitalized_tag: Tag,
    pub default_tag: Tag,
}

/// `capitalized_tag` if the first character of `word` has the uppercase
/// letter property, else `default_tag`. Digits and punctuation are not
/// capitalized.
pub fn guess_unknown_initial<'a>(word: &Word, defaults: &'a UnknownTagDefaults) -> &'a Tag {
    let first = word.as_str().chars().next().expect("words are non-empty");
    if first.is_uppercase() {
        &defaults.capitalized_tag
    } else {
        &defaults.default_tag
    }
}

/// Tag every token: known words by most likely tag, unknown words by the
/// initial guess rewritten through `unknown_rules` in order. Input tags are
/// ignored and overwritten; the output has the input's exact shape.
///
/// Known vs unknown is decided per word type against the lexicon, so the
/// unknown path is memoized per type.
pub fn annotate_initial(
    corpus: &Corpus,
    lexicon: &Lexicon,
    unknown_rules: &[UnknownRule],
    wordlist: &Wordlist,
    bigrams: &BigramTable,
    defaults: &UnknownTagDefaults,
) -> Corpus {
    let mut unknown_cache: HashMap<Word, Tag> = HashMap::new();
    let mut out = corpus.clone();
    for sentence in out.sentences_mut() {
        for i in 0..sentence.len() {
            let word = sentence.token(i).word.clone();
            let tag = match lexicon.most_likely_tag(word.as_str()) {
                Some(tag) => tag.clone(),
                None => unknown_cache
                    .entry(word.clone())
                    .or_insert_with(|| {
                        apply_unknown_rules(unknown_rules, &word, wordlist, bigrams, defaults)
                    })
                    .clone(),
            };
            sentence.set_tag(i, tag);
        }
    }
    out
}
