//! Word→tag frequency statistics, the known-word vocabulary with affix
//! indexes, and word-bigram neighbor tables.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Bound;

use thiserror::Error;

use crate::corpus::{Corpus, SymbolError, Tag, Word};

/// Per-word tag-frequency table from a tagged corpus. `most_likely_tag`
/// is the initial-state annotation for known words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<Word, BTreeMap<Tag, u64>>,
    total_tokens: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("untagged token {word:?} at sentence {sentence}, position {position}")]
    UntaggedToken {
        word: String,
        sentence: usize,
        position: usize,
    },
}

impl Lexicon {
    /// Count every (word, tag) occurrence in a fully tagged corpus.
    pub fn build(corpus: &Corpus) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::default();
        for (si, sentence) in corpus.sentences().iter().enumerate() {
            for (ti, token) in sentence.tokens().iter().enumerate() {
                let tag = token.tag.as_ref().ok_or_else(|| LexiconError::UntaggedToken {
                    word: token.word.as_str().to_string(),
                    sentence: si,
                    position: ti,
                })?;
                *lex.entries
                    .entry(token.word.clone())
                    .or_default()
                    .entry(tag.clone())
                    .or_insert(0) += 1;
                lex.total_tokens += 1;
            }
        }
        Ok(lex)
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn tag_counts(&self, word: &str) -> Option<&BTreeMap<Tag, u64>> {
        self.entries.get(word)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Word, &BTreeMap<Tag, u64>)> {
        self.entries.iter()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.entries.keys()
    }

    /// The tag with the maximal count for `word`, ties broken by
    /// lexicographically smallest tag symbol. Absent for unseen words.
    pub fn most_likely_tag(&self, word: &str) -> Option<&Tag> {
        let counts = self.entries.get(word)?;
        let mut best: Option<(&Tag, u64)> = None;
        for (tag, &count) in counts {
            // BTreeMap iterates tags in ascending order, so a strict
            // comparison keeps the lexicographically smallest on ties.
            if best.map_or(true, |(_, c)| count > c) {
                best = Some((tag, count));
            }
        }
        best.map(|(t, _)| t)
    }

    /// Render to the lexicon file format: one line per word,
    /// `word tag1 count1 tag2 count2 ...`, tags by descending count then
    /// lexicographic tag, words in lexicographic order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (word, counts) in &self.entries {
            out.push_str(word.as_str());
            let mut pairs: Vec<(&Tag, u64)> = counts.iter().map(|(t, &c)| (t, c)).collect();
            pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            for (tag, count) in pairs {
                out.push(' ');
                out.push_str(tag.as_str());
                out.push(' ');
                out.push_str(&count.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Lexicon, LexiconFileError> {
        let mut lex = Lexicon::default();
        for (idx, raw_line) in text.split('\n').enumerate() {
            let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let fail = |kind| LexiconFileError { line: lineno, kind };
            if fields.len() < 3 || fields.len() % 2 == 0 {
                return Err(fail(LexiconFileErrorKind::MalformedLine(fields.len())));
            }
            let word = Word::new(fields[0]).map_err(|e| fail(LexiconFileErrorKind::Symbol(e)))?;
            if lex.entries.contains_key(&word) {
                return Err(fail(LexiconFileErrorKind::DuplicateWord(
                    word.as_str().to_string(),
                )));
            }
            let mut counts = BTreeMap::new();
            for pair in fields[1..].chunks(2) {
                let tag = Tag::new(pair[0]).map_err(|e| fail(LexiconFileErrorKind::Symbol(e)))?;
                let count: u64 = pair[1]
                    .parse()
                    .ok()
                    .filter(|&c| c >= 1)
                    .ok_or_else(|| fail(LexiconFileErrorKind::BadCount(pair[1].to_string())))?;
                if counts.insert(tag, count).is_some() {
                    return Err(fail(LexiconFileErrorKind::DuplicateTag(
                        pair[0].to_string(),
                    )));
                }
            }
            lex.total_tokens += counts.values().sum::<u64>();
            lex.entries.insert(word, counts);
        }
        Ok(lex)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct LexiconFileError {
    pub line: usize,
    pub kind: LexiconFileErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconFileErrorKind {
    #[error("expected `word tag count [tag count ...]`, got {0} fields")]
    MalformedLine(usize),
    #[error("bad count {0:?} (must be an integer >= 1)")]
    BadCount(String),
    #[error("duplicate word {0:?}")]
    DuplicateWord(String),
    #[error("duplicate tag {0:?} for one word")]
    DuplicateTag(String),
    #[error(transparent)]
    Symbol(SymbolError),
}

/// The four affix conditions checked against a wordlist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffixOp {
    DeletePrefix,
    DeleteSuffix,
    AddPrefix,
    AddSuffix,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("affix {0:?} must be 1 to 4 characters, got {1}")]
pub struct AffixLengthError(pub String, pub usize);

/// Reverse a string by unicode scalar values.
fn reverse(s: &str) -> String {
    s.chars().rev().collect()
}

/// The set of known word forms, indexed for "adding affix x results in a
/// word" queries: `forms` answers suffix extension by prefix range scan,
/// `reversed_forms` (every form written backwards) answers prefix extension
/// the same way.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Wordlist {
    forms: BTreeSet<String>,
    reversed_forms: BTreeSet<String>,
}

impl Wordlist {
    /// All word forms of `lexicon`, unioned with `extra`.
    pub fn build<'a>(lexicon: &Lexicon, extra: impl IntoIterator<Item = &'a Word>) -> Wordlist {
        let mut wl = Wordlist::default();
        for word in lexicon.words() {
            wl.insert(word);
        }
        for word in extra {
            wl.insert(word);
        }
        wl
    }

    fn insert(&mut self, word: &Word) {
        self.forms.insert(word.as_str().to_string());
        self.reversed_forms.insert(reverse(word.as_str()));
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn contains(&self, form: &str) -> bool {
        self.forms.contains(form)
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.forms.iter().map(String::as_str)
    }

    /// Does deleting/adding affix `x` (1..=4 chars) from/to `w` result in a
    /// known word? Delete requires a non-empty remainder.
    pub fn affix_query(&self, op: AffixOp, w: &str, x: &str) -> Result<bool, AffixLengthError> {
        let x_len = x.chars().count();
        if !(1..=4).contains(&x_len) {
            return Err(AffixLengthError(x.to_string(), x_len));
        }
        let fires = match op {
            AffixOp::DeleteSuffix => match w.strip_suffix(x) {
                Some(rest) => !rest.is_empty() && self.forms.contains(rest),
                None => false,
            },
            AffixOp::DeletePrefix => match w.strip_prefix(x) {
                Some(rest) => !rest.is_empty() && self.forms.contains(rest),
                None => false,
            },
            AffixOp::AddSuffix => self.forms.contains(&format!("{w}{x}")),
            AffixOp::AddPrefix => self.forms.contains(&format!("{x}{w}")),
        };
        Ok(fires)
    }

    /// Every affix x with 1..=4 chars such that w+x (AddSuffix) or x+w
    /// (AddPrefix) is a known word, found by range scan over the extension
    /// indexes rather than by trying all strings.
    pub fn candidate_affixes(&self, op: AffixOp, w: &str) -> BTreeSet<String> {
        let (index, key) = match op {
            AffixOp::AddSuffix => (&self.forms, w.to_string()),
            AffixOp::AddPrefix => (&self.reversed_forms, reverse(w)),
            AffixOp::DeletePrefix | AffixOp::DeleteSuffix => {
                panic!("candidate_affixes is defined for the add-affix kinds only")
            }
        };
        let mut out = BTreeSet::new();
        for form in index.range::<String, _>((Bound::Excluded(&key), Bound::Unbounded)) {
            if !form.starts_with(key.as_str()) {
                break;
            }
            let extension = &form[key.len()..];
            let ext_len = extension.chars().count();
            if (1..=4).contains(&ext_len) {
                match op {
                    AffixOp::AddSuffix => out.insert(extension.to_string()),
                    AffixOp::AddPrefix => out.insert(reverse(extension)),
                    _ => unreachable!(),
                };
            }
        }
        out
    }

    /// One word per line, lexicographic order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for form in &self.forms {
            out.push_str(form);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Wordlist, WordlistFileError> {
        let mut wl = Wordlist::default();
        for (idx, raw_line) in text.split('\n').enumerate() {
            let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
            let line = line.trim_matches([' ', '\t']);
            if line.is_empty() {
                continue;
            }
            let word = Word::new(line).map_err(|e| WordlistFileError {
                line: idx + 1,
                source: e,
            })?;
            wl.insert(&word);
        }
        Ok(wl)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {source}")]
pub struct WordlistFileError {
    pub line: usize,
    #[source]
    pub source: SymbolError,
}

/// Which words were ever seen immediately left/right of which: an
/// existence table over word types, no counts, no cross-sentence pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BigramTable {
    left: BTreeMap<Word, BTreeSet<Word>>,
    right: BTreeMap<Word, BTreeSet<Word>>,
}

impl BigramTable {
    /// Record every within-sentence adjacent pair. Works on raw or tagged
    /// corpora; tags are ignored.
    pub fn build(corpus: &Corpus) -> BigramTable {
        let mut table = BigramTable::default();
        for sentence in corpus.sentences() {
            for pair in sentence.tokens().windows(2) {
                let (w1, w2) = (&pair[0].word, &pair[1].word);
                table
                    .left
                    .entry(w2.clone())
                    .or_default()
                    .insert(w1.clone());
                table
                    .right
                    .entry(w1.clone())
                    .or_default()
                    .insert(w2.clone());
            }
        }
        table
    }

    /// Was `neighbor` ever seen immediately to the left of `word`?
    pub fn seen_left_of(&self, word: &str, neighbor: &str) -> bool {
        self.left
            .get(word)
            .is_some_and(|set| set.contains(neighbor))
    }

    /// Was `neighbor` ever seen immediately to the right of `word`?
    pub fn seen_right_of(&self, word: &str, neighbor: &str) -> bool {
        self.right
            .get(word)
            .is_some_and(|set| set.contains(neighbor))
    }

    pub fn left_neighbors(&self, word: &str) -> impl Iterator<Item = &Word> {
        self.left.get(word).into_iter().flatten()
    }

    pub fn right_neighbors(&self, word: &str) -> impl Iterator<Item = &Word> {
        self.right.get(word).into_iter().flatten()
    }

    pub fn words_with_neighbors(&self) -> impl Iterator<Item = &Word> {
        self.left.keys().chain(self.right.keys())
    }
}
