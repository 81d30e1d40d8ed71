//! K-best tagging: add-tag rules layered over a trained single-tag tagger.
//!
//! Instead of changing tags, a k-best rule inserts an alternative tag into
//! a token's tag set when its condition and trigger match. Conditions and
//! triggers evaluate against the single-tag tagger's output (the "primary"
//! tags), which never change, so rule effects are order-independent given
//! the primaries and sets only ever grow.
//!
//! Learning maximizes coverage per added tag: a candidate's score is the
//! exact rational (newly covered tokens) / (tags added), and the loop stops
//! when the best ratio falls below the configured minimum.

use std::collections::BTreeSet;

use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::context::{firing_triggers, trigger_fires, ContextualTrigger, TriggerInventory};
use crate::corpus::{Corpus, Sentence, Tag, Word};
use crate::engine::EngineError;
use crate::lexicon::Lexicon;
use crate::ruleio::{RuleLine, RuleLineError};

/// When a k-best rule may fire at a position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KBestCondition {
    /// The primary tag is the argument.
    WhenTag(Tag),
    /// The word is the argument.
    WhenWord(Word),
}

/// Add `add` to the tag set wherever the condition holds and the trigger
/// fires against the primary tags.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KBestRule {
    add: Tag,
    condition: KBestCondition,
    trigger: ContextualTrigger,
}

impl KBestRule {
    pub fn new(
        add: Tag,
        condition: KBestCondition,
        trigger: ContextualTrigger,
    ) -> Result<Self, RuleLineError> {
        if let KBestCondition::WhenTag(y) = &condition {
            // The primary tag is always in the set already.
            if y == &add {
                return Err(RuleLineError::AddEqualsConditionTag(add.as_str().to_string()));
            }
        }
        Ok(KBestRule {
            add,
            condition,
            trigger,
        })
    }

    pub fn add(&self) -> &Tag {
        &self.add
    }

    pub fn condition(&self) -> &KBestCondition {
        &self.condition
    }

    pub fn trigger(&self) -> &ContextualTrigger {
        &self.trigger
    }
}

impl RuleLine for KBestRule {
    fn parse_line(line: &str) -> Result<Self, RuleLineError> {
        let fields: Vec<&str> = line.split_ascii_whitespace().collect();
        if fields.len() < 5 {
            return Err(RuleLineError::ArityMismatch {
                expected: 5,
                got: fields.len(),
            });
        }
        let add = Tag::new(fields[0])?;
        let condition = match fields[1] {
            "WHENTAG" => KBestCondition::WhenTag(Tag::new(fields[2])?),
            "WHENWORD" => KBestCondition::WhenWord(Word::new(fields[2])?),
            other => return Err(RuleLineError::UnknownCondition(other.to_string())),
        };
        let trigger = crate::context::parse_trigger(&fields[3..])?;
        KBestRule::new(add, condition, trigger)
    }

    fn render_line(&self) -> String {
        let (mnemonic, arg) = match &self.condition {
            KBestCondition::WhenTag(t) => ("WHENTAG", t.as_str()),
            KBestCondition::WhenWord(w) => ("WHENWORD", w.as_str()),
        };
        format!(
            "{} {} {} {}",
            self.add,
            mnemonic,
            arg,
            crate::context::render_trigger(&self.trigger)
        )
    }
}

/// A corpus whose tokens carry a set of tags plus the distinguished primary
/// tag (the single-tag tagger's output, always a member of the set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSetCorpus {
    /// The single-tag output; triggers evaluate against this and it never
    /// changes under k-best rules.
    primaries: Corpus,
    /// One tag set per token, parallel to `primaries`.
    sets: Vec<Vec<BTreeSet<Tag>>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TagSetError {
    #[error("token {word:?} at sentence {sentence}, position {position} is untagged")]
    Untagged {
        word: String,
        sentence: usize,
        position: usize,
    },
}

impl TagSetCorpus {
    /// Wrap single-tag output: every token's set is exactly its primary.
    pub fn from_single(tagged: &Corpus) -> Result<TagSetCorpus, TagSetError> {
        let mut sets = Vec::with_capacity(tagged.len());
        for (si, sentence) in tagged.sentences().iter().enumerate() {
            let mut row = Vec::with_capacity(sentence.len());
            for (ti, token) in sentence.tokens().iter().enumerate() {
                let tag = token.tag.as_ref().ok_or_else(|| TagSetError::Untagged {
                    word: token.word.as_str().to_string(),
                    sentence: si,
                    position: ti,
                })?;
                row.push(BTreeSet::from([tag.clone()]));
            }
            sets.push(row);
        }
        Ok(TagSetCorpus {
            primaries: tagged.clone(),
            sets,
        })
    }

    pub fn primaries(&self) -> &Corpus {
        &self.primaries
    }

    pub fn primary(&self, si: usize, ti: usize) -> &Tag {
        self.primaries
            .sentence(si)
            .token(ti)
            .tag
            .as_ref()
            .expect("primaries are fully tagged")
    }

    pub fn set(&self, si: usize, ti: usize) -> &BTreeSet<Tag> {
        &self.sets[si][ti]
    }

    pub fn token_count(&self) -> usize {
        self.primaries.token_count()
    }

    pub fn total_tags(&self) -> u64 {
        self.sets
            .iter()
            .flat_map(|row| row.iter())
            .map(|set| set.len() as u64)
            .sum()
    }

    fn insert(&mut self, si: usize, ti: usize, tag: Tag) {
        self.sets[si][ti].insert(tag);
    }

    /// Render as `word/tag1|tag2|...`: primary first, the remaining tags in
    /// lexicographic order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (si, sentence) in self.primaries.sentences().iter().enumerate() {
            for (ti, token) in sentence.tokens().iter().enumerate() {
                if ti > 0 {
                    out.push(' ');
                }
                out.push_str(token.word.as_str());
                out.push('/');
                let primary = self.primary(si, ti);
                out.push_str(primary.as_str());
                for tag in &self.sets[si][ti] {
                    if tag != primary {
                        out.push('|');
                        out.push_str(tag.as_str());
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parse `word/tag1|tag2|...` text; the first tag is the primary.
    pub fn parse(text: &str) -> Result<TagSetCorpus, crate::corpus::ParseError> {
        use crate::corpus::{split_tokens, ParseError, ParseErrorKind, Sentence as CSentence, Token, SENTINEL};
        let mut sentences = Vec::new();
        let mut sets = Vec::new();
        for (line_idx, raw_line) in text.split('\n').enumerate() {
            let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
            let pieces = split_tokens(line);
            if pieces.is_empty() {
                continue;
            }
            let lineno = line_idx + 1;
            let mut tokens = Vec::with_capacity(pieces.len());
            let mut row = Vec::with_capacity(pieces.len());
            for (piece, col) in pieces {
                let fail = |kind| ParseError {
                    line: lineno,
                    column: col,
                    kind,
                };
                let slash = piece
                    .rfind('/')
                    .ok_or_else(|| fail(ParseErrorKind::MissingTagDelimiter(piece.into())))?;
                let (word_part, tags_part) = (&piece[..slash], &piece[slash + 1..]);
                if word_part.is_empty() {
                    return Err(fail(ParseErrorKind::EmptyWord(piece.into())));
                }
                if word_part == SENTINEL {
                    return Err(fail(ParseErrorKind::ReservedSentinel(piece.into())));
                }
                let word = Word::new(word_part)
                    .map_err(|e| fail(ParseErrorKind::InvalidWord(piece.into(), e)))?;
                let mut set = BTreeSet::new();
                let mut primary = None;
                for part in tags_part.split('|') {
                    if part.is_empty() {
                        return Err(fail(ParseErrorKind::EmptyTag(piece.into())));
                    }
                    if part == SENTINEL {
                        return Err(fail(ParseErrorKind::ReservedSentinel(piece.into())));
                    }
                    let tag = Tag::new(part)
                        .map_err(|e| fail(ParseErrorKind::InvalidTag(piece.into(), e)))?;
                    if primary.is_none() {
                        primary = Some(tag.clone());
                    }
                    set.insert(tag);
                }
                tokens.push(Token {
                    word,
                    tag: primary,
                });
                row.push(set);
            }
            sentences.push(CSentence::new(tokens).expect("pieces is non-empty"));
            sets.push(row);
        }
        Ok(TagSetCorpus {
            primaries: Corpus::new(sentences),
            sets,
        })
    }
}

/// Insert the rule's tag at every position where its condition holds and
/// its trigger fires against the primary tags. Idempotent; primaries are
/// untouched.
pub fn apply_kbest_rule(rule: &KBestRule, corpus: &TagSetCorpus) -> TagSetCorpus {
    let mut out = corpus.clone();
    apply_kbest_in_place(rule, &mut out);
    out
}

fn condition_holds(rule: &KBestRule, sentence: &Sentence, corpus: &TagSetCorpus, si: usize, ti: usize) -> bool {
    match &rule.condition {
        KBestCondition::WhenTag(y) => corpus.primary(si, ti) == y,
        KBestCondition::WhenWord(w) => &sentence.token(ti).word == w,
    }
}

fn apply_kbest_in_place(rule: &KBestRule, corpus: &mut TagSetCorpus) {
    let mut hits = Vec::new();
    for (si, sentence) in corpus.primaries.sentences().iter().enumerate() {
        for ti in 0..sentence.len() {
            if condition_holds(rule, sentence, corpus, si, ti)
                && trigger_fires(&rule.trigger, sentence, ti)
            {
                hits.push((si, ti));
            }
        }
    }
    for (si, ti) in hits {
        corpus.insert(si, ti, rule.add.clone());
    }
}

/// Training-time effect of one k-best rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KBestScore {
    /// Tokens whose truth tag enters their set for the first time.
    pub covered: u64,
    /// Tags inserted into sets that did not already hold them.
    pub added: u64,
}

impl KBestScore {
    /// covered/added as an exact rational; None when the rule adds nothing.
    pub fn ratio(&self) -> Option<Ratio<u64>> {
        (self.added > 0).then(|| Ratio::new(self.covered, self.added))
    }
}

/// Stopping control for k-best learning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KBestConfig {
    /// Minimum covered/added ratio to accept a rule.
    pub min_ratio: Ratio<u64>,
    /// Minimum newly covered tokens per rule; must be >= 1 so learning
    /// terminates.
    pub min_covered: u64,
    pub max_rules: Option<usize>,
}

impl Default for KBestConfig {
    fn default() -> Self {
        KBestConfig {
            min_ratio: Ratio::new(1, 20),
            min_covered: 2,
            max_rules: None,
        }
    }
}

fn shape_error(tagged: &Corpus, truth: &Corpus) -> EngineError {
    EngineError::ShapeMismatch(format!(
        "tagged has {} sentences / {} tokens, truth has {} / {}",
        tagged.len(),
        tagged.token_count(),
        truth.len(),
        truth.token_count()
    ))
}

fn score_rule(rule: &KBestRule, state: &TagSetCorpus, truth: &Corpus) -> KBestScore {
    let mut score = KBestScore { covered: 0, added: 0 };
    for (si, sentence) in state.primaries.sentences().iter().enumerate() {
        for ti in 0..sentence.len() {
            if !condition_holds(rule, sentence, state, si, ti)
                || !trigger_fires(&rule.trigger, sentence, ti)
            {
                continue;
            }
            if state.sets[si][ti].contains(&rule.add) {
                continue;
            }
            score.added += 1;
            let truth_tag = truth.sentence(si).token(ti).tag.as_ref().expect("truth is tagged");
            if truth_tag == &rule.add {
                score.covered += 1;
            }
        }
    }
    score
}

/// Candidate order: higher ratio, then more newly covered, then the
/// lexicographically smallest rule line. Strict, hence deterministic.
fn candidate_order(a: &(KBestRule, KBestScore), b: &(KBestRule, KBestScore)) -> std::cmp::Ordering {
    // covered_a/added_a vs covered_b/added_b by cross-multiplication;
    // a zero `added` never reaches selection (min_covered >= 1).
    let lhs = a.1.covered as u128 * b.1.added as u128;
    let rhs = b.1.covered as u128 * a.1.added as u128;
    rhs.cmp(&lhs)
        .then_with(|| b.1.covered.cmp(&a.1.covered))
        .then_with(|| a.0.render_line().cmp(&b.0.render_line()))
}

/// Learn add-tag rules from single-tag tagger output against the truth.
/// Candidates are generated at uncovered error sites; each accepted rule's
/// (covered, added) is returned for the trade-off trace.
pub fn learn_kbest_rules(
    tagged: &Corpus,
    truth: &Corpus,
    cfg: &KBestConfig,
) -> Result<Vec<(KBestRule, KBestScore)>, EngineError> {
    assert!(cfg.min_covered >= 1, "min_covered must be >= 1");
    if !tagged.same_shape(truth) {
        return Err(shape_error(tagged, truth));
    }
    let mut state = TagSetCorpus::from_single(tagged)
        .map_err(|e| EngineError::ShapeMismatch(e.to_string()))?;
    let mut learned: Vec<(KBestRule, KBestScore)> = Vec::new();

    loop {
        if cfg.max_rules.is_some_and(|cap| learned.len() >= cap) {
            break;
        }
        let mut candidates = BTreeSet::new();
        for (si, sentence) in state.primaries.sentences().iter().enumerate() {
            for ti in 0..sentence.len() {
                let truth_tag = truth.sentence(si).token(ti).tag.as_ref().expect("truth is tagged");
                if state.sets[si][ti].contains(truth_tag) {
                    continue;
                }
                for trigger in firing_triggers(sentence, ti, TriggerInventory::Full) {
                    let conditions = [
                        KBestCondition::WhenTag(state.primary(si, ti).clone()),
                        KBestCondition::WhenWord(sentence.token(ti).word.clone()),
                    ];
                    for condition in conditions {
                        if let Ok(rule) =
                            KBestRule::new(truth_tag.clone(), condition, trigger.clone())
                        {
                            candidates.insert(rule);
                        }
                    }
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let frozen = &state;
        let scored: Vec<(KBestRule, KBestScore)> = candidates
            .into_par_iter()
            .map(|rule| {
                let score = score_rule(&rule, frozen, truth);
                (rule, score)
            })
            .collect();
        let best = scored
            .iter()
            .min_by(|a, b| candidate_order(a, b))
            .expect("candidate set is non-empty");
        let (rule, score) = (best.0.clone(), best.1);
        if score.covered < cfg.min_covered {
            break;
        }
        // covered/added >= min_ratio by cross-multiplication.
        let lhs = (score.covered as u128) * (*cfg.min_ratio.denom() as u128);
        let rhs = (*cfg.min_ratio.numer() as u128) * (score.added as u128);
        if lhs < rhs {
            break;
        }
        apply_kbest_in_place(&rule, &mut state);
        learned.push((rule, score));
    }
    Ok(learned)
}

/// Fraction of tokens whose truth tag is in their set, and mean set size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KBestMetrics {
    pub covered_tokens: u64,
    pub total_tokens: u64,
    pub total_tags: u64,
}

impl KBestMetrics {
    pub fn accuracy(&self) -> Option<Ratio<u64>> {
        (self.total_tokens > 0).then(|| Ratio::new(self.covered_tokens, self.total_tokens))
    }

    pub fn avg_tags(&self) -> Option<Ratio<u64>> {
        (self.total_tokens > 0).then(|| Ratio::new(self.total_tags, self.total_tokens))
    }
}

/// Exact coverage metrics of a k-best tagging against the truth.
pub fn kbest_metrics(corpus: &TagSetCorpus, truth: &Corpus) -> Result<KBestMetrics, EngineError> {
    if !corpus.primaries.same_shape(truth) {
        return Err(shape_error(&corpus.primaries, truth));
    }
    let mut metrics = KBestMetrics {
        covered_tokens: 0,
        total_tokens: corpus.token_count() as u64,
        total_tags: corpus.total_tags(),
    };
    for (si, sentence) in truth.sentences().iter().enumerate() {
        for (ti, token) in sentence.tokens().iter().enumerate() {
            let truth_tag = token.tag.as_ref().expect("truth is tagged");
            if corpus.sets[si][ti].contains(truth_tag) {
                metrics.covered_tokens += 1;
            }
        }
    }
    Ok(metrics)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("k must be >= 1")]
    ZeroK,
    #[error("the lexicon is empty; the baseline has no tags to assign")]
    EmptyLexicon,
}

/// The k-best baseline: each known word receives every tag it was seen
/// with in training; unknown words receive the `k` most frequent tags of
/// training words that occurred exactly once (the stand-ins for unseen
/// words), falling back to the overall most frequent tags when no such
/// words exist. The primary is the most likely tag (known) or the
/// top-ranked unknown tag.
pub fn baseline_tagsets(
    corpus: &Corpus,
    lexicon: &Lexicon,
    k: usize,
) -> Result<TagSetCorpus, BaselineError> {
    if k == 0 {
        return Err(BaselineError::ZeroK);
    }
    let unknown_tags = unknown_tag_ranking(lexicon);
    if unknown_tags.is_empty() {
        return Err(BaselineError::EmptyLexicon);
    }
    let unknown_set: BTreeSet<Tag> = unknown_tags.iter().take(k).cloned().collect();
    let unknown_primary = unknown_tags[0].clone();

    let mut primaries = corpus.clone();
    let mut sets = Vec::with_capacity(corpus.len());
    for (si, sentence) in corpus.sentences().iter().enumerate() {
        let mut row = Vec::with_capacity(sentence.len());
        for ti in 0..sentence.len() {
            let word = &sentence.token(ti).word;
            let (primary, set) = match lexicon.tag_counts(word.as_str()) {
                Some(counts) => (
                    lexicon
                        .most_likely_tag(word.as_str())
                        .expect("word has counts")
                        .clone(),
                    counts.keys().cloned().collect::<BTreeSet<Tag>>(),
                ),
                None => (unknown_primary.clone(), unknown_set.clone()),
            };
            primaries.sentences_mut()[si].set_tag(ti, primary);
            row.push(set);
        }
        sets.push(row);
    }
    Ok(TagSetCorpus { primaries, sets })
}

/// Tags ranked by how often they occur on words seen exactly once in
/// training (descending count, then lexicographic); the ranking over all
/// tokens when no single-occurrence words exist.
fn unknown_tag_ranking(lexicon: &Lexicon) -> Vec<Tag> {
    use std::collections::BTreeMap;
    let mut hapax: BTreeMap<&Tag, u64> = BTreeMap::new();
    let mut all: BTreeMap<&Tag, u64> = BTreeMap::new();
    for (_, counts) in lexicon.entries() {
        let total: u64 = counts.values().sum();
        for (tag, &n) in counts {
            *all.entry(tag).or_insert(0) += n;
            if total == 1 {
                *hapax.entry(tag).or_insert(0) += n;
            }
        }
    }
    let ranking = if hapax.is_empty() { all } else { hapax };
    let mut tags: Vec<(&Tag, u64)> = ranking.into_iter().collect();
    tags.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    tags.into_iter().map(|(t, _)| t.clone()).collect()
}

/// Parse a non-negative decimal like `0.05`, `1`, or `.5` into an exact
/// rational.
pub fn parse_decimal_ratio(s: &str) -> Option<Ratio<u64>> {
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let int: u64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    if frac_part.is_empty() {
        return Some(Ratio::from_integer(int));
    }
    if !frac_part.bytes().all(|b| b.is_ascii_digit()) || frac_part.len() > 18 {
        return None;
    }
    let frac: u64 = frac_part.parse().ok()?;
    let denom = 10u64.checked_pow(frac_part.len() as u32)?;
    Some(Ratio::from_integer(int) + Ratio::new(frac, denom))
}
