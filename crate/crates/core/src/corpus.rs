//! Corpus types and the `word/TAG` text format.
//!
//! A corpus is a sequence of sentences, one per line, tokens separated by
//! whitespace. A tagged token is `word/TAG` where the delimiter is the *last*
//! slash in the token, so words may themselves contain slashes. Raw corpora
//! are the same format without tags.

use std::fmt;

use thiserror::Error;

/// Reserved word/tag standing for positions beyond sentence boundaries in
/// trigger evaluation. Corpora must not contain it; rule files may.
pub const SENTINEL: &str = "STAART";

/// A surface word form. Never empty, never contains whitespace; case is
/// preserved exactly (capitalization is meaningful).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(String);

/// A part-of-speech tag symbol. Never empty, no whitespace, no `/` (the
/// token delimiter) and no `|` (the k-best tag-set separator). Any other
/// symbol set is valid: the tagger is tagset-agnostic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(String);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolError {
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("{0} contains whitespace: {1:?}")]
    Whitespace(&'static str, String),
    #[error("tag contains reserved character {0:?}: {1:?}")]
    ReservedCharInTag(char, String),
}

fn check_no_whitespace(kind: &'static str, s: &str) -> Result<(), SymbolError> {
    if s.is_empty() {
        return Err(SymbolError::Empty(kind));
    }
    if s.contains([' ', '\t', '\n', '\r']) {
        return Err(SymbolError::Whitespace(kind, s.to_string()));
    }
    Ok(())
}

impl Word {
    pub fn new(s: impl Into<String>) -> Result<Self, SymbolError> {
        let s = s.into();
        check_no_whitespace("word", &s)?;
        Ok(Word(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Length in unicode scalar values (affix lengths count these, not bytes).
    pub fn char_len(&self) -> usize {
        self.0.chars().count()
    }
}

impl Tag {
    pub fn new(s: impl Into<String>) -> Result<Self, SymbolError> {
        let s = s.into();
        check_no_whitespace("tag", &s)?;
        for reserved in ['/', '|'] {
            if s.contains(reserved) {
                return Err(SymbolError::ReservedCharInTag(reserved, s));
            }
        }
        Ok(Tag(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Word {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Tag {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for Word {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for Tag {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// One token: a word plus an optional tag (absent in raw text).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub word: Word,
    pub tag: Option<Tag>,
}

/// A non-empty sequence of tokens. No boundary sentinels are stored;
/// sentence edges are virtual (see trigger evaluation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Result<Self, CorpusError> {
        if tokens.is_empty() {
            return Err(CorpusError::EmptySentence);
        }
        Ok(Sentence { tokens })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // by construction
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token(&self, i: usize) -> &Token {
        &self.tokens[i]
    }

    pub fn set_tag(&mut self, i: usize, tag: Tag) {
        self.tokens[i].tag = Some(tag);
    }
}

/// An ordered sequence of sentences: both training truth and the working
/// annotation state during learning.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    sentences: Vec<Sentence>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("sentence must contain at least one token")]
    EmptySentence,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Corpus { sentences }
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn sentences_mut(&mut self) -> &mut [Sentence] {
        &mut self.sentences
    }

    pub fn sentence(&self, i: usize) -> &Sentence {
        &self.sentences[i]
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Iterate all tokens in corpus order.
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    /// True if every token carries a tag.
    pub fn is_fully_tagged(&self) -> bool {
        self.tokens().all(|t| t.tag.is_some())
    }

    /// True if both corpora have the same sentence count and per-sentence
    /// token counts.
    pub fn same_shape(&self, other: &Corpus) -> bool {
        self.sentences.len() == other.sentences.len()
            && self
                .sentences
                .iter()
                .zip(&other.sentences)
                .all(|(a, b)| a.len() == b.len())
    }

    /// Tags-only copy with every word preserved and all tags dropped.
    pub fn strip_tags(&self) -> Corpus {
        Corpus {
            sentences: self
                .sentences
                .iter()
                .map(|s| Sentence {
                    tokens: s
                        .tokens
                        .iter()
                        .map(|t| Token {
                            word: t.word.clone(),
                            tag: None,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Parse failure, positioned by 1-based line and the 1-based character
/// column of the offending token.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("token {0:?} has no '/' tag delimiter")]
    MissingTagDelimiter(String),
    #[error("token {0:?} has an empty word")]
    EmptyWord(String),
    #[error("token {0:?} has an empty tag")]
    EmptyTag(String),
    #[error("invalid tag in token {0:?}: {1}")]
    InvalidTag(String, SymbolError),
    #[error("invalid word {0:?}: {1}")]
    InvalidWord(String, SymbolError),
    #[error("reserved sentinel {SENTINEL:?} may not appear in a corpus (token {0:?})")]
    ReservedSentinel(String),
}

/// Split a line into (token, 1-based char column) pairs. Runs of spaces and
/// tabs separate tokens.
pub(crate) fn split_tokens(line: &str) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None; // (byte offset, column)
    let mut col = 0usize;
    for (byte, ch) in line.char_indices() {
        col += 1;
        if ch == ' ' || ch == '\t' {
            if let Some((s, c)) = start.take() {
                out.push((&line[s..byte], c));
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((s, c)) = start {
        out.push((&line[s..], c));
    }
    out
}

fn err(line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, column, kind }
}

/// Parse a fully tagged corpus: one sentence per non-empty line, `word/TAG`
/// tokens, the tag delimited by the last slash.
pub fn parse_tagged(text: &str) -> Result<Corpus, ParseError> {
    let mut sentences = Vec::new();
    for (line_idx, raw_line) in text.split('\n').enumerate() {
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let pieces = split_tokens(line);
        if pieces.is_empty() {
            continue;
        }
        let lineno = line_idx + 1;
        let mut tokens = Vec::with_capacity(pieces.len());
        for (piece, col) in pieces {
            let slash = piece
                .rfind('/')
                .ok_or_else(|| err(lineno, col, ParseErrorKind::MissingTagDelimiter(piece.into())))?;
            let (word_part, tag_part) = (&piece[..slash], &piece[slash + 1..]);
            if word_part.is_empty() {
                return Err(err(lineno, col, ParseErrorKind::EmptyWord(piece.into())));
            }
            if tag_part.is_empty() {
                return Err(err(lineno, col, ParseErrorKind::EmptyTag(piece.into())));
            }
            if word_part == SENTINEL || tag_part == SENTINEL {
                return Err(err(lineno, col, ParseErrorKind::ReservedSentinel(piece.into())));
            }
            let word = Word::new(word_part)
                .map_err(|e| err(lineno, col, ParseErrorKind::InvalidWord(piece.into(), e)))?;
            let tag = Tag::new(tag_part)
                .map_err(|e| err(lineno, col, ParseErrorKind::InvalidTag(piece.into(), e)))?;
            tokens.push(Token {
                word,
                tag: Some(tag),
            });
        }
        sentences.push(Sentence { tokens });
    }
    Ok(Corpus { sentences })
}

/// Parse an untagged corpus: one sentence per non-empty line,
/// whitespace-separated words.
pub fn parse_raw(text: &str) -> Result<Corpus, ParseError> {
    let mut sentences = Vec::new();
    for (line_idx, raw_line) in text.split('\n').enumerate() {
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let pieces = split_tokens(line);
        if pieces.is_empty() {
            continue;
        }
        let lineno = line_idx + 1;
        let mut tokens = Vec::with_capacity(pieces.len());
        for (piece, col) in pieces {
            if piece == SENTINEL {
                return Err(err(lineno, col, ParseErrorKind::ReservedSentinel(piece.into())));
            }
            let word = Word::new(piece)
                .map_err(|e| err(lineno, col, ParseErrorKind::InvalidWord(piece.into(), e)))?;
            tokens.push(Token { word, tag: None });
        }
        sentences.push(Sentence { tokens });
    }
    Ok(Corpus { sentences })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("untagged token {0:?} at sentence {1}, position {2}")]
    UntaggedToken(String, usize, usize),
}

/// Render a fully tagged corpus back to `word/TAG` text, single spaces
/// between tokens, one `\n` after each sentence.
pub fn render_tagged(corpus: &Corpus) -> Result<String, RenderError> {
    let mut out = String::new();
    for (si, sentence) in corpus.sentences.iter().enumerate() {
        for (ti, token) in sentence.tokens.iter().enumerate() {
            if ti > 0 {
                out.push(' ');
            }
            let tag = token.tag.as_ref().ok_or_else(|| {
                RenderError::UntaggedToken(token.word.as_str().to_string(), si, ti)
            })?;
            out.push_str(token.word.as_str());
            out.push('/');
            out.push_str(tag.as_str());
        }
        out.push('\n');
    }
    Ok(out)
}
