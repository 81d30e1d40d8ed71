//! Contextual rules: change tag `from` to `to` when a trigger matches the
//! neighborhood. Tag-based triggers look at tags within three positions;
//! word-based (lexicalized) triggers also look at the actual word forms.
//!
//! Rules apply with simultaneous semantics: every firing position is
//! collected against the pre-rule tags, then all are rewritten at once.
//! Scan order therefore cannot matter, and the score a rule was learned
//! at equals exactly the error reduction its application produces.

use std::collections::BTreeSet;

use crate::corpus::{Corpus, Sentence, Tag, Word, SENTINEL};
use crate::engine::{greedy_learn, EngineError, LearnerConfig, Problem, Score};
use crate::initial::{annotate_initial, UnknownTagDefaults};
use crate::lexicon::{BigramTable, Lexicon, Wordlist};
use crate::ruleio::{RuleLine, RuleLineError};
use crate::unknown::UnknownRule;

/// Context condition of a contextual rule. Positions past the sentence
/// edge read as a virtual token whose word and tag are the sentinel
/// `STAART`; a parameter equal to the sentinel is the only thing that
/// matches there, so sentence position is itself learnable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContextualTrigger {
    /// Tag at i-1 is the argument.
    PrevTag(Tag),
    /// Tag at i+1.
    NextTag(Tag),
    /// Tag at i-2.
    Prev2Tag(Tag),
    /// Tag at i+2.
    Next2Tag(Tag),
    /// Tag at i-1 or i-2.
    PrevOneOrTwoTag(Tag),
    /// Tag at i+1 or i+2.
    NextOneOrTwoTag(Tag),
    /// Tag at i-1, i-2, or i-3.
    PrevOneToThreeTag(Tag),
    /// Tag at i+1, i+2, or i+3.
    NextOneToThreeTag(Tag),
    /// Tags at (i-1, i+1).
    SurroundTag(Tag, Tag),
    /// Tags at (i-1, i-2).
    PrevBigramTag(Tag, Tag),
    /// Tags at (i+1, i+2).
    NextBigramTag(Tag, Tag),
    /// Word at i-1.
    PrevWord(Word),
    /// Word at i+1.
    NextWord(Word),
    /// Word at i-2.
    Prev2Word(Word),
    /// Word at i+2.
    Next2Word(Word),
    /// Word at i-1 or i-2.
    PrevOneOrTwoWord(Word),
    /// Word at i+1 or i+2.
    NextOneOrTwoWord(Word),
    /// Words at (i, i-1).
    CurAndPrevWord(Word, Word),
    /// Words at (i, i+1).
    CurAndNextWord(Word, Word),
    /// Word at i and tag at i-1.
    CurWordPrevTag(Word, Tag),
    /// Word at i and tag at i+1.
    CurWordNextTag(Word, Tag),
}

/// Which trigger kinds a learner may instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerInventory {
    /// Tag-based and word-based (lexicalized) kinds.
    Full,
    /// Tag-based kinds only.
    TagOnly,
}

impl ContextualTrigger {
    /// True for the lexicalized kinds (any parameter is a word form).
    pub fn is_word_based(&self) -> bool {
        use ContextualTrigger::*;
        matches!(
            self,
            PrevWord(_)
                | NextWord(_)
                | Prev2Word(_)
                | Next2Word(_)
                | PrevOneOrTwoWord(_)
                | NextOneOrTwoWord(_)
                | CurAndPrevWord(..)
                | CurAndNextWord(..)
                | CurWordPrevTag(..)
                | CurWordNextTag(..)
        )
    }
}

/// Tag at `i + offset`, or the sentinel past either edge.
fn tag_at(s: &Sentence, i: usize, offset: isize) -> &str {
    match i.checked_add_signed(offset) {
        Some(j) if j < s.len() => s
            .token(j)
            .tag
            .as_ref()
            .expect("trigger evaluation requires a fully tagged sentence")
            .as_str(),
        _ => SENTINEL,
    }
}

/// Word at `i + offset`, or the sentinel past either edge.
fn word_at(s: &Sentence, i: usize, offset: isize) -> &str {
    match i.checked_add_signed(offset) {
        Some(j) if j < s.len() => s.token(j).word.as_str(),
        _ => SENTINEL,
    }
}

/// Does `trigger` match the context of position `i`? `i` must be in range
/// and the sentence fully tagged.
pub fn trigger_fires(trigger: &ContextualTrigger, s: &Sentence, i: usize) -> bool {
    assert!(i < s.len(), "position {i} out of range");
    use ContextualTrigger::*;
    match trigger {
        PrevTag(z) => tag_at(s, i, -1) == z.as_str(),
        NextTag(z) => tag_at(s, i, 1) == z.as_str(),
        Prev2Tag(z) => tag_at(s, i, -2) == z.as_str(),
        Next2Tag(z) => tag_at(s, i, 2) == z.as_str(),
        PrevOneOrTwoTag(z) => [-1, -2].iter().any(|&o| tag_at(s, i, o) == z.as_str()),
        NextOneOrTwoTag(z) => [1, 2].iter().any(|&o| tag_at(s, i, o) == z.as_str()),
        PrevOneToThreeTag(z) => [-1, -2, -3].iter().any(|&o| tag_at(s, i, o) == z.as_str()),
        NextOneToThreeTag(z) => [1, 2, 3].iter().any(|&o| tag_at(s, i, o) == z.as_str()),
        SurroundTag(z, w) => tag_at(s, i, -1) == z.as_str() && tag_at(s, i, 1) == w.as_str(),
        PrevBigramTag(z, w) => tag_at(s, i, -1) == z.as_str() && tag_at(s, i, -2) == w.as_str(),
        NextBigramTag(z, w) => tag_at(s, i, 1) == z.as_str() && tag_at(s, i, 2) == w.as_str(),
        PrevWord(w) => word_at(s, i, -1) == w.as_str(),
        NextWord(w) => word_at(s, i, 1) == w.as_str(),
        Prev2Word(w) => word_at(s, i, -2) == w.as_str(),
        Next2Word(w) => word_at(s, i, 2) == w.as_str(),
        PrevOneOrTwoWord(w) => [-1, -2].iter().any(|&o| word_at(s, i, o) == w.as_str()),
        NextOneOrTwoWord(w) => [1, 2].iter().any(|&o| word_at(s, i, o) == w.as_str()),
        CurAndPrevWord(w, x) => {
            word_at(s, i, 0) == w.as_str() && word_at(s, i, -1) == x.as_str()
        }
        CurAndNextWord(w, x) => {
            word_at(s, i, 0) == w.as_str() && word_at(s, i, 1) == x.as_str()
        }
        CurWordPrevTag(w, z) => {
            word_at(s, i, 0) == w.as_str() && tag_at(s, i, -1) == z.as_str()
        }
        CurWordNextTag(w, z) => {
            word_at(s, i, 0) == w.as_str() && tag_at(s, i, 1) == z.as_str()
        }
    }
}

/// Change `from` to `to` wherever the trigger matches.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContextualRule {
    from: Tag,
    to: Tag,
    trigger: ContextualTrigger,
}

impl ContextualRule {
    pub fn new(from: Tag, to: Tag, trigger: ContextualTrigger) -> Result<Self, RuleLineError> {
        if from == to {
            return Err(RuleLineError::FromEqualsTo(from.as_str().to_string()));
        }
        Ok(ContextualRule { from, to, trigger })
    }

    pub fn from(&self) -> &Tag {
        &self.from
    }

    pub fn to(&self) -> &Tag {
        &self.to
    }

    pub fn trigger(&self) -> &ContextualTrigger {
        &self.trigger
    }
}

fn tag_arg(s: &str) -> Result<Tag, RuleLineError> {
    Ok(Tag::new(s)?)
}

fn word_arg(s: &str) -> Result<Word, RuleLineError> {
    Ok(Word::new(s)?)
}

fn trigger_arity(mnemonic: &str) -> Option<usize> {
    match mnemonic {
        "PREVTAG" | "NEXTTAG" | "PREV2TAG" | "NEXT2TAG" | "PREV1OR2TAG" | "NEXT1OR2TAG"
        | "PREV1OR2OR3TAG" | "NEXT1OR2OR3TAG" | "PREVWD" | "NEXTWD" | "PREV2WD" | "NEXT2WD"
        | "PREV1OR2WD" | "NEXT1OR2WD" => Some(1),
        "SURROUNDTAG" | "PREVBIGRAMTAG" | "NEXTBIGRAMTAG" | "LBIGRAM" | "RBIGRAM"
        | "WDPREVTAG" | "WDNEXTTAG" => Some(2),
        _ => None,
    }
}

pub(crate) fn parse_trigger(fields: &[&str]) -> Result<ContextualTrigger, RuleLineError> {
    let mnemonic = fields[0];
    let arity = trigger_arity(mnemonic)
        .ok_or_else(|| RuleLineError::UnknownTrigger(mnemonic.to_string()))?;
    if fields.len() != arity + 1 {
        return Err(RuleLineError::ArityMismatch {
            expected: arity + 1,
            got: fields.len(),
        });
    }
    use ContextualTrigger::*;
    let t = match mnemonic {
        "PREVTAG" => PrevTag(tag_arg(fields[1])?),
        "NEXTTAG" => NextTag(tag_arg(fields[1])?),
        "PREV2TAG" => Prev2Tag(tag_arg(fields[1])?),
        "NEXT2TAG" => Next2Tag(tag_arg(fields[1])?),
        "PREV1OR2TAG" => PrevOneOrTwoTag(tag_arg(fields[1])?),
        "NEXT1OR2TAG" => NextOneOrTwoTag(tag_arg(fields[1])?),
        "PREV1OR2OR3TAG" => PrevOneToThreeTag(tag_arg(fields[1])?),
        "NEXT1OR2OR3TAG" => NextOneToThreeTag(tag_arg(fields[1])?),
        "SURROUNDTAG" => SurroundTag(tag_arg(fields[1])?, tag_arg(fields[2])?),
        "PREVBIGRAMTAG" => PrevBigramTag(tag_arg(fields[1])?, tag_arg(fields[2])?),
        "NEXTBIGRAMTAG" => NextBigramTag(tag_arg(fields[1])?, tag_arg(fields[2])?),
        "PREVWD" => PrevWord(word_arg(fields[1])?),
        "NEXTWD" => NextWord(word_arg(fields[1])?),
        "PREV2WD" => Prev2Word(word_arg(fields[1])?),
        "NEXT2WD" => Next2Word(word_arg(fields[1])?),
        "PREV1OR2WD" => PrevOneOrTwoWord(word_arg(fields[1])?),
        "NEXT1OR2WD" => NextOneOrTwoWord(word_arg(fields[1])?),
        "LBIGRAM" => CurAndPrevWord(word_arg(fields[1])?, word_arg(fields[2])?),
        "RBIGRAM" => CurAndNextWord(word_arg(fields[1])?, word_arg(fields[2])?),
        "WDPREVTAG" => CurWordPrevTag(word_arg(fields[1])?, tag_arg(fields[2])?),
        "WDNEXTTAG" => CurWordNextTag(word_arg(fields[1])?, tag_arg(fields[2])?),
        _ => unreachable!("arity lookup covers the inventory"),
    };
    Ok(t)
}

pub(crate) fn render_trigger(t: &ContextualTrigger) -> String {
    use ContextualTrigger::*;
    match t {
        PrevTag(z) => format!("PREVTAG {z}"),
        NextTag(z) => format!("NEXTTAG {z}"),
        Prev2Tag(z) => format!("PREV2TAG {z}"),
        Next2Tag(z) => format!("NEXT2TAG {z}"),
        PrevOneOrTwoTag(z) => format!("PREV1OR2TAG {z}"),
        NextOneOrTwoTag(z) => format!("NEXT1OR2TAG {z}"),
        PrevOneToThreeTag(z) => format!("PREV1OR2OR3TAG {z}"),
        NextOneToThreeTag(z) => format!("NEXT1OR2OR3TAG {z}"),
        SurroundTag(z, w) => format!("SURROUNDTAG {z} {w}"),
        PrevBigramTag(z, w) => format!("PREVBIGRAMTAG {z} {w}"),
        NextBigramTag(z, w) => format!("NEXTBIGRAMTAG {z} {w}"),
        PrevWord(w) => format!("PREVWD {w}"),
        NextWord(w) => format!("NEXTWD {w}"),
        Prev2Word(w) => format!("PREV2WD {w}"),
        Next2Word(w) => format!("NEXT2WD {w}"),
        PrevOneOrTwoWord(w) => format!("PREV1OR2WD {w}"),
        NextOneOrTwoWord(w) => format!("NEXT1OR2WD {w}"),
        CurAndPrevWord(w, x) => format!("LBIGRAM {w} {x}"),
        CurAndNextWord(w, x) => format!("RBIGRAM {w} {x}"),
        CurWordPrevTag(w, z) => format!("WDPREVTAG {w} {z}"),
        CurWordNextTag(w, z) => format!("WDNEXTTAG {w} {z}"),
    }
}

impl RuleLine for ContextualRule {
    fn parse_line(line: &str) -> Result<Self, RuleLineError> {
        let fields: Vec<&str> = line.split_ascii_whitespace().collect();
        if fields.len() < 4 {
            return Err(RuleLineError::ArityMismatch {
                expected: 4,
                got: fields.len(),
            });
        }
        let from = tag_arg(fields[0])?;
        let to = tag_arg(fields[1])?;
        let trigger = parse_trigger(&fields[2..])?;
        ContextualRule::new(from, to, trigger)
    }

    fn render_line(&self) -> String {
        format!("{} {} {}", self.from, self.to, render_trigger(&self.trigger))
    }
}

/// All positions where the tag is `from` and the trigger fires against the
/// pre-rule tags.
fn firing_positions(rule: &ContextualRule, corpus: &Corpus) -> Vec<(usize, usize)> {
    let mut hits = Vec::new();
    for (si, sentence) in corpus.sentences().iter().enumerate() {
        for i in 0..sentence.len() {
            if sentence.token(i).tag.as_ref() == Some(&rule.from)
                && trigger_fires(&rule.trigger, sentence, i)
            {
                hits.push((si, i));
            }
        }
    }
    hits
}

/// Apply one rule corpus-wide with simultaneous semantics.
pub fn apply_contextual_rule(rule: &ContextualRule, corpus: &Corpus) -> Corpus {
    let mut out = corpus.clone();
    apply_in_place(rule, &mut out);
    out
}

pub(crate) fn apply_in_place(rule: &ContextualRule, corpus: &mut Corpus) {
    let hits = firing_positions(rule, corpus);
    for (si, i) in hits {
        corpus.sentences_mut()[si].set_tag(i, rule.to.clone());
    }
}

/// Every trigger in `inventory` that fires at position `i`, instantiated
/// from the words and tags (or sentinels) actually occupying the template
/// positions.
pub(crate) fn firing_triggers(
    s: &Sentence,
    i: usize,
    inventory: TriggerInventory,
) -> Vec<ContextualTrigger> {
    use ContextualTrigger::*;
    let t = |o: isize| Tag::new(tag_at(s, i, o)).expect("observed tags are valid");
    let w = |o: isize| Word::new(word_at(s, i, o)).expect("observed words are valid");

    let mut out = vec![
        PrevTag(t(-1)),
        NextTag(t(1)),
        Prev2Tag(t(-2)),
        Next2Tag(t(2)),
        PrevOneOrTwoTag(t(-1)),
        PrevOneOrTwoTag(t(-2)),
        NextOneOrTwoTag(t(1)),
        NextOneOrTwoTag(t(2)),
        PrevOneToThreeTag(t(-1)),
        PrevOneToThreeTag(t(-2)),
        PrevOneToThreeTag(t(-3)),
        NextOneToThreeTag(t(1)),
        NextOneToThreeTag(t(2)),
        NextOneToThreeTag(t(3)),
        SurroundTag(t(-1), t(1)),
        PrevBigramTag(t(-1), t(-2)),
        NextBigramTag(t(1), t(2)),
    ];
    if inventory == TriggerInventory::Full {
        out.extend([
            PrevWord(w(-1)),
            NextWord(w(1)),
            Prev2Word(w(-2)),
            Next2Word(w(2)),
            PrevOneOrTwoWord(w(-1)),
            PrevOneOrTwoWord(w(-2)),
            NextOneOrTwoWord(w(1)),
            NextOneOrTwoWord(w(2)),
            CurAndPrevWord(w(0), w(-1)),
            CurAndNextWord(w(0), w(1)),
            CurWordPrevTag(w(0), t(-1)),
            CurWordNextTag(w(0), t(1)),
        ]);
    }
    out
}

/// All rules that would correct position `i` (currently mistagged) to
/// `truth_tag`: from = the current tag, to = the truth, trigger = every
/// inventory kind instantiated from the actual context.
pub fn enumerate_context_candidates(
    s: &Sentence,
    i: usize,
    truth_tag: &Tag,
    inventory: TriggerInventory,
) -> BTreeSet<ContextualRule> {
    let current = s.token(i).tag.as_ref().expect("state must be tagged");
    debug_assert_ne!(current, truth_tag, "candidates are drawn at error sites");
    firing_triggers(s, i, inventory)
        .into_iter()
        .filter_map(|trigger| ContextualRule::new(current.clone(), truth_tag.clone(), trigger).ok())
        .collect()
}

struct ContextProblem<'a> {
    state: Corpus,
    truth: &'a Corpus,
    inventory: TriggerInventory,
}

impl ContextProblem<'_> {
    fn truth_tag(&self, si: usize, i: usize) -> &Tag {
        self.truth.sentence(si).token(i).tag.as_ref().expect("truth is fully tagged")
    }
}

impl Problem for ContextProblem<'_> {
    type Rule = ContextualRule;

    fn candidates(&self) -> Vec<ContextualRule> {
        let mut set = BTreeSet::new();
        for (si, sentence) in self.state.sentences().iter().enumerate() {
            for i in 0..sentence.len() {
                let truth = self.truth_tag(si, i);
                if sentence.token(i).tag.as_ref() != Some(truth) {
                    set.extend(enumerate_context_candidates(sentence, i, truth, self.inventory));
                }
            }
        }
        set.into_iter().collect()
    }

    fn score(&self, rule: &ContextualRule) -> Score {
        let mut score = Score::default();
        for (si, sentence) in self.state.sentences().iter().enumerate() {
            for i in 0..sentence.len() {
                if sentence.token(i).tag.as_ref() != Some(&rule.from) {
                    continue;
                }
                if !trigger_fires(&rule.trigger, sentence, i) {
                    continue;
                }
                let truth = self.truth_tag(si, i);
                if truth == &rule.to {
                    score.good += 1;
                } else if truth == &rule.from {
                    score.bad += 1;
                }
            }
        }
        score
    }

    fn apply(&mut self, rule: &ContextualRule) {
        apply_in_place(rule, &mut self.state);
    }

    fn error_count(&self) -> u64 {
        let mut errors = 0;
        for (si, sentence) in self.state.sentences().iter().enumerate() {
            for i in 0..sentence.len() {
                if sentence.token(i).tag.as_ref() != Some(self.truth_tag(si, i)) {
                    errors += 1;
                }
            }
        }
        errors
    }
}

/// Learn contextual rules from an initial annotation against the truth.
/// Returns rules in learned order with their acceptance scores.
pub fn learn_contextual_rules(
    initial: &Corpus,
    truth: &Corpus,
    cfg: &LearnerConfig,
    inventory: TriggerInventory,
) -> Result<Vec<(ContextualRule, Score)>, EngineError> {
    if !initial.same_shape(truth) {
        return Err(EngineError::ShapeMismatch(format!(
            "initial has {} sentences / {} tokens, truth has {} / {}",
            initial.len(),
            initial.token_count(),
            truth.len(),
            truth.token_count()
        )));
    }
    let mut problem = ContextProblem {
        state: initial.clone(),
        truth,
        inventory,
    };
    Ok(greedy_learn(&mut problem, cfg))
}

/// Tag a corpus: initial-state annotation, then each contextual rule in
/// learned order, corpus-wide, with simultaneous semantics.
#[allow(clippy::too_many_arguments)]
pub fn tag(
    corpus: &Corpus,
    lexicon: &Lexicon,
    unknown_rules: &[UnknownRule],
    contextual_rules: &[ContextualRule],
    wordlist: &Wordlist,
    bigrams: &BigramTable,
    defaults: &UnknownTagDefaults,
) -> Corpus {
    let mut out = annotate_initial(corpus, lexicon, unknown_rules, wordlist, bigrams, defaults);
    for rule in contextual_rules {
        apply_in_place(rule, &mut out);
    }
    out
}
