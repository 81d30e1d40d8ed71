//! Unknown-word rules: improve the initial tag guess for words absent from
//! the lexicon, using affix, character, and corpus-neighbor conditions.
//! All conditions are type-level (they look only at the word form and the
//! wordlist/bigram tables), never at the occurrence's sentence.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::corpus::{Corpus, Tag, Word};
use crate::engine::{greedy_learn, LearnerConfig, Problem, Score};
use crate::initial::{guess_unknown_initial, UnknownTagDefaults};
use crate::lexicon::{AffixOp, BigramTable, Lexicon, LexiconError, Wordlist};
use crate::ruleio::{fields_exact, RuleLine, RuleLineError};

/// Condition of an unknown-word rule. Affix arguments are 1..=4 characters,
/// enforced at construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnknownTrigger {
    /// Deleting prefix x results in a known word.
    DeletePrefix(String),
    /// The first |x| characters are x (and the word is longer than x).
    HasPrefix(String),
    /// Deleting suffix x results in a known word.
    DeleteSuffix(String),
    /// The last |x| characters are x (and the word is longer than x).
    HasSuffix(String),
    /// Appending x results in a known word.
    AddSuffix(String),
    /// Prepending x results in a known word.
    AddPrefix(String),
    /// The argument was ever seen immediately left of the word.
    GoodLeft(Word),
    /// The argument was ever seen immediately right of the word.
    GoodRight(Word),
    /// The character occurs anywhere in the word.
    HasChar(char),
}

fn check_affix(x: &str) -> Result<(), RuleLineError> {
    let len = x.chars().count();
    if !(1..=4).contains(&len) {
        return Err(RuleLineError::BadAffixLength(x.to_string(), len));
    }
    Ok(())
}

impl UnknownTrigger {
    fn validate(&self) -> Result<(), RuleLineError> {
        use UnknownTrigger::*;
        match self {
            DeletePrefix(x) | HasPrefix(x) | DeleteSuffix(x) | HasSuffix(x) | AddSuffix(x)
            | AddPrefix(x) => check_affix(x),
            GoodLeft(_) | GoodRight(_) | HasChar(_) => Ok(()),
        }
    }

    /// Does this condition hold for `word`?
    pub fn fires(&self, word: &Word, wordlist: &Wordlist, bigrams: &BigramTable) -> bool {
        use UnknownTrigger::*;
        let w = word.as_str();
        let strict_affix = |x: &str| word.char_len() > x.chars().count();
        match self {
            HasSuffix(x) => w.ends_with(x.as_str()) && strict_affix(x),
            HasPrefix(x) => w.starts_with(x.as_str()) && strict_affix(x),
            DeleteSuffix(x) => wordlist
                .affix_query(AffixOp::DeleteSuffix, w, x)
                .expect("affix length is validated at construction"),
            DeletePrefix(x) => wordlist
                .affix_query(AffixOp::DeletePrefix, w, x)
                .expect("affix length is validated at construction"),
            AddSuffix(x) => wordlist
                .affix_query(AffixOp::AddSuffix, w, x)
                .expect("affix length is validated at construction"),
            AddPrefix(x) => wordlist
                .affix_query(AffixOp::AddPrefix, w, x)
                .expect("affix length is validated at construction"),
            GoodLeft(neighbor) => bigrams.seen_left_of(w, neighbor.as_str()),
            GoodRight(neighbor) => bigrams.seen_right_of(w, neighbor.as_str()),
            HasChar(z) => w.contains(*z),
        }
    }
}

/// Change the guessed tag of an unknown word (from `from`, or from anything
/// when `from` is absent) to `to` when the trigger holds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnknownRule {
    from: Option<Tag>,
    to: Tag,
    trigger: UnknownTrigger,
}

impl UnknownRule {
    pub fn new(from: Option<Tag>, to: Tag, trigger: UnknownTrigger) -> Result<Self, RuleLineError> {
        if from.as_ref() == Some(&to) {
            return Err(RuleLineError::FromEqualsTo(to.as_str().to_string()));
        }
        trigger.validate()?;
        Ok(UnknownRule { from, to, trigger })
    }

    pub fn from(&self) -> Option<&Tag> {
        self.from.as_ref()
    }

    pub fn to(&self) -> &Tag {
        &self.to
    }

    pub fn trigger(&self) -> &UnknownTrigger {
        &self.trigger
    }
}

impl RuleLine for UnknownRule {
    fn parse_line(line: &str) -> Result<Self, RuleLineError> {
        let fields = fields_exact(line, 4)?;
        let from = match fields[0] {
            "*" => None,
            tag => Some(Tag::new(tag)?),
        };
        let to = Tag::new(fields[1])?;
        let arg = fields[3];
        use UnknownTrigger::*;
        let trigger = match fields[2] {
            "DELPREF" => DeletePrefix(arg.to_string()),
            "HASPREF" => HasPrefix(arg.to_string()),
            "DELSUF" => DeleteSuffix(arg.to_string()),
            "HASSUF" => HasSuffix(arg.to_string()),
            "ADDSUF" => AddSuffix(arg.to_string()),
            "ADDPREF" => AddPrefix(arg.to_string()),
            "GOODLEFT" => GoodLeft(Word::new(arg)?),
            "GOODRIGHT" => GoodRight(Word::new(arg)?),
            "HASCHAR" => {
                let mut chars = arg.chars();
                match (chars.next(), chars.next()) {
                    (Some(z), None) => HasChar(z),
                    _ => return Err(RuleLineError::NotSingleChar(arg.to_string())),
                }
            }
            other => return Err(RuleLineError::UnknownTrigger(other.to_string())),
        };
        UnknownRule::new(from, to, trigger)
    }

    fn render_line(&self) -> String {
        use UnknownTrigger::*;
        let from = self.from.as_ref().map_or("*", |t| t.as_str());
        let (mnemonic, arg) = match &self.trigger {
            DeletePrefix(x) => ("DELPREF", x.clone()),
            HasPrefix(x) => ("HASPREF", x.clone()),
            DeleteSuffix(x) => ("DELSUF", x.clone()),
            HasSuffix(x) => ("HASSUF", x.clone()),
            AddSuffix(x) => ("ADDSUF", x.clone()),
            AddPrefix(x) => ("ADDPREF", x.clone()),
            GoodLeft(w) => ("GOODLEFT", w.as_str().to_string()),
            GoodRight(w) => ("GOODRIGHT", w.as_str().to_string()),
            HasChar(z) => ("HASCHAR", z.to_string()),
        };
        format!("{} {} {} {}", from, self.to, mnemonic, arg)
    }
}

/// Run the full rule list over one word: start from the capitalization
/// guess, and let each rule whose from-tag matches the current tag and
/// whose trigger holds rewrite it, in order.
pub fn apply_unknown_rules(
    rules: &[UnknownRule],
    word: &Word,
    wordlist: &Wordlist,
    bigrams: &BigramTable,
    defaults: &UnknownTagDefaults,
) -> Tag {
    let mut current = guess_unknown_initial(word, defaults).clone();
    for rule in rules {
        let from_matches = rule.from.as_ref().map_or(true, |f| f == &current);
        if from_matches && rule.trigger.fires(word, wordlist, bigrams) {
            current = rule.to.clone();
        }
    }
    current
}

/// The prefixes or suffixes of `word` short enough that the matching
/// Has/Delete triggers can fire on it: 1..=4 characters and strictly
/// shorter than the word.
fn proper_affixes(word: &Word, suffix: bool) -> Vec<String> {
    let chars: Vec<char> = word.as_str().chars().collect();
    let max = chars.len().saturating_sub(1).min(4);
    (1..=max)
        .map(|len| {
            if suffix {
                chars[chars.len() - len..].iter().collect()
            } else {
                chars[..len].iter().collect()
            }
        })
        .collect()
}

/// All rules that would correct a mistagged unknown word: to = the truth,
/// from = absent or the current tag, trigger = every condition that
/// actually holds for the word. Affixes come from the word itself and the
/// wordlist extension indexes, neighbors from the bigram table, so nothing
/// is generated that cannot fire.
pub fn enumerate_unknown_candidates(
    word: &Word,
    current: &Tag,
    truth: &Tag,
    wordlist: &Wordlist,
    bigrams: &BigramTable,
) -> BTreeSet<UnknownRule> {
    debug_assert_ne!(current, truth, "candidates are drawn at error sites");
    use UnknownTrigger::*;
    let mut triggers = Vec::new();
    for suffix in [false, true] {
        for affix in proper_affixes(word, suffix) {
            let (has, delete, op) = if suffix {
                (HasSuffix(affix.clone()), DeleteSuffix(affix.clone()), AffixOp::DeleteSuffix)
            } else {
                (HasPrefix(affix.clone()), DeletePrefix(affix.clone()), AffixOp::DeletePrefix)
            };
            triggers.push(has);
            if wordlist
                .affix_query(op, word.as_str(), &affix)
                .expect("proper affixes are 1..=4 chars")
            {
                triggers.push(delete);
            }
        }
    }
    for x in wordlist.candidate_affixes(AffixOp::AddSuffix, word.as_str()) {
        triggers.push(AddSuffix(x));
    }
    for x in wordlist.candidate_affixes(AffixOp::AddPrefix, word.as_str()) {
        triggers.push(AddPrefix(x));
    }
    for z in word.as_str().chars() {
        triggers.push(HasChar(z));
    }
    for neighbor in bigrams.left_neighbors(word.as_str()) {
        triggers.push(GoodLeft(neighbor.clone()));
    }
    for neighbor in bigrams.right_neighbors(word.as_str()) {
        triggers.push(GoodRight(neighbor.clone()));
    }

    let mut rules = BTreeSet::new();
    for trigger in triggers {
        for from in [None, Some(current.clone())] {
            if let Ok(rule) = UnknownRule::new(from, truth.clone(), trigger.clone()) {
                rules.insert(rule);
            }
        }
    }
    rules
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnknownLearnError {
    #[error("lexicon fraction must be strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("splitting {total} sentences at fraction {fraction} leaves an empty part ({lexicon_part} for the lexicon, {heldout} held out)")]
    EmptySplit {
        total: usize,
        fraction: f64,
        lexicon_part: usize,
        heldout: usize,
    },
    #[error("the held-out part ({heldout_tokens} tokens) contains no unknown words; nothing to learn from")]
    NoUnknownInstances { heldout_tokens: usize },
}

/// One unknown-word token occurrence in the held-out part. Tags are
/// tracked per occurrence: the same word type may carry different truths.
struct Instance {
    word: Word,
    truth: Tag,
    current: Tag,
}

struct UnknownProblem {
    instances: Vec<Instance>,
    wordlist: Wordlist,
    bigrams: BigramTable,
}

impl Problem for UnknownProblem {
    type Rule = UnknownRule;

    fn candidates(&self) -> Vec<UnknownRule> {
        let mut set = BTreeSet::new();
        for inst in &self.instances {
            if inst.current != inst.truth {
                set.extend(enumerate_unknown_candidates(
                    &inst.word,
                    &inst.current,
                    &inst.truth,
                    &self.wordlist,
                    &self.bigrams,
                ));
            }
        }
        set.into_iter().collect()
    }

    fn score(&self, rule: &UnknownRule) -> Score {
        let mut score = Score::default();
        for inst in &self.instances {
            let from_matches = rule.from.as_ref().map_or(true, |f| f == &inst.current);
            if !from_matches || rule.to == inst.current {
                continue;
            }
            if rule.trigger.fires(&inst.word, &self.wordlist, &self.bigrams) {
                if inst.truth == rule.to {
                    score.good += 1;
                } else if inst.truth == inst.current {
                    score.bad += 1;
                }
            }
        }
        score
    }

    fn apply(&mut self, rule: &UnknownRule) {
        for inst in &mut self.instances {
            let from_matches = rule.from.as_ref().map_or(true, |f| f == &inst.current);
            if from_matches && rule.trigger.fires(&inst.word, &self.wordlist, &self.bigrams) {
                inst.current = rule.to.clone();
            }
        }
    }

    fn error_count(&self) -> u64 {
        self.instances
            .iter()
            .filter(|i| i.current != i.truth)
            .count() as u64
    }
}

/// Learn unknown-word rules from a tagged corpus. The first
/// `lexicon_fraction` of sentences builds the lexicon, wordlist, and bigram
/// table; every token in the remainder whose word that lexicon does not
/// know becomes a training instance, starting from the capitalization
/// guess.
pub fn learn_unknown_rules(
    train: &Corpus,
    lexicon_fraction: f64,
    cfg: &LearnerConfig,
    defaults: &UnknownTagDefaults,
) -> Result<Vec<(UnknownRule, Score)>, UnknownLearnError> {
    if !(lexicon_fraction > 0.0 && lexicon_fraction < 1.0) {
        return Err(UnknownLearnError::BadFraction(lexicon_fraction));
    }
    let total = train.len();
    let lexicon_part = (total as f64 * lexicon_fraction).floor() as usize;
    let heldout = total - lexicon_part;
    if lexicon_part == 0 || heldout == 0 {
        return Err(UnknownLearnError::EmptySplit {
            total,
            fraction: lexicon_fraction,
            lexicon_part,
            heldout,
        });
    }

    let lexicon_corpus = Corpus::new(train.sentences()[..lexicon_part].to_vec());
    let lexicon = Lexicon::build(&lexicon_corpus)?;
    // The held-out part simulates genuinely unseen text, so the trigger
    // tables come from the lexicon part only.
    let wordlist = Wordlist::build(&lexicon, []);
    let bigrams = BigramTable::build(&lexicon_corpus);

    let mut instances = Vec::new();
    let mut heldout_tokens = 0;
    for (si, sentence) in train.sentences()[lexicon_part..].iter().enumerate() {
        for (ti, token) in sentence.tokens().iter().enumerate() {
            heldout_tokens += 1;
            if lexicon.contains(token.word.as_str()) {
                continue;
            }
            let truth = token.tag.clone().ok_or(LexiconError::UntaggedToken {
                word: token.word.as_str().to_string(),
                sentence: lexicon_part + si,
                position: ti,
            })?;
            let current = guess_unknown_initial(&token.word, defaults).clone();
            instances.push(Instance {
                word: token.word.clone(),
                truth,
                current,
            });
        }
    }
    if instances.is_empty() {
        return Err(UnknownLearnError::NoUnknownInstances { heldout_tokens });
    }

    let mut problem = UnknownProblem {
        instances,
        wordlist,
        bigrams,
    };
    Ok(greedy_learn(&mut problem, cfg))
}
