//! Independent brute-force reference learners.
//!
//! These re-implement candidate instantiation, scoring, selection, and rule
//! application from the template definitions alone, sharing nothing with
//! the library path except the rule-line syntax (which doubles as the
//! declared tie-break key). Each round scans every instantiable rule over
//! the observed tags, words, and sentinel; the greedy loop accepts the
//! maximum under (net desc, broken asc, line asc) until it falls below the
//! threshold.

use std::collections::{BTreeSet, HashMap, HashSet};

use tbltag::corpus::{Corpus, SENTINEL};
use tbltag::engine::LearnerConfig;
use tbltag::initial::UnknownTagDefaults;

/// (rule line, good, bad) per accepted rule, in learned order.
pub type Trace = Vec<(String, u64, u64)>;

// ---------------------------------------------------------------------
// Contextual learner reference
// ---------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
enum Arg {
    Tag,
    Word,
}

/// (mnemonic, first param kind, optional second param kind, word-based)
const KINDS: &[(&str, Arg, Option<Arg>, bool)] = &[
    ("PREVTAG", Arg::Tag, None, false),
    ("NEXTTAG", Arg::Tag, None, false),
    ("PREV2TAG", Arg::Tag, None, false),
    ("NEXT2TAG", Arg::Tag, None, false),
    ("PREV1OR2TAG", Arg::Tag, None, false),
    ("NEXT1OR2TAG", Arg::Tag, None, false),
    ("PREV1OR2OR3TAG", Arg::Tag, None, false),
    ("NEXT1OR2OR3TAG", Arg::Tag, None, false),
    ("SURROUNDTAG", Arg::Tag, Some(Arg::Tag), false),
    ("PREVBIGRAMTAG", Arg::Tag, Some(Arg::Tag), false),
    ("NEXTBIGRAMTAG", Arg::Tag, Some(Arg::Tag), false),
    ("PREVWD", Arg::Word, None, true),
    ("NEXTWD", Arg::Word, None, true),
    ("PREV2WD", Arg::Word, None, true),
    ("NEXT2WD", Arg::Word, None, true),
    ("PREV1OR2WD", Arg::Word, None, true),
    ("NEXT1OR2WD", Arg::Word, None, true),
    ("LBIGRAM", Arg::Word, Some(Arg::Word), true),
    ("RBIGRAM", Arg::Word, Some(Arg::Word), true),
    ("WDPREVTAG", Arg::Word, Some(Arg::Tag), true),
    ("WDNEXTTAG", Arg::Word, Some(Arg::Tag), true),
];

struct CtxState {
    words: Vec<Vec<String>>,
    tags: Vec<Vec<String>>,
    truth: Vec<Vec<String>>,
}

impl CtxState {
    fn word(&self, s: usize, i: usize, off: isize) -> &str {
        match i.checked_add_signed(off) {
            Some(j) if j < self.words[s].len() => &self.words[s][j],
            _ => SENTINEL,
        }
    }

    fn tag(&self, s: usize, i: usize, off: isize) -> &str {
        match i.checked_add_signed(off) {
            Some(j) if j < self.tags[s].len() => &self.tags[s][j],
            _ => SENTINEL,
        }
    }

    fn fires(&self, kind: &str, a: &str, b: &str, s: usize, i: usize) -> bool {
        match kind {
            "PREVTAG" => self.tag(s, i, -1) == a,
            "NEXTTAG" => self.tag(s, i, 1) == a,
            "PREV2TAG" => self.tag(s, i, -2) == a,
            "NEXT2TAG" => self.tag(s, i, 2) == a,
            "PREV1OR2TAG" => self.tag(s, i, -1) == a || self.tag(s, i, -2) == a,
            "NEXT1OR2TAG" => self.tag(s, i, 1) == a || self.tag(s, i, 2) == a,
            "PREV1OR2OR3TAG" => {
                self.tag(s, i, -1) == a || self.tag(s, i, -2) == a || self.tag(s, i, -3) == a
            }
            "NEXT1OR2OR3TAG" => {
                self.tag(s, i, 1) == a || self.tag(s, i, 2) == a || self.tag(s, i, 3) == a
            }
            "SURROUNDTAG" => self.tag(s, i, -1) == a && self.tag(s, i, 1) == b,
            "PREVBIGRAMTAG" => self.tag(s, i, -1) == a && self.tag(s, i, -2) == b,
            "NEXTBIGRAMTAG" => self.tag(s, i, 1) == a && self.tag(s, i, 2) == b,
            "PREVWD" => self.word(s, i, -1) == a,
            "NEXTWD" => self.word(s, i, 1) == a,
            "PREV2WD" => self.word(s, i, -2) == a,
            "NEXT2WD" => self.word(s, i, 2) == a,
            "PREV1OR2WD" => self.word(s, i, -1) == a || self.word(s, i, -2) == a,
            "NEXT1OR2WD" => self.word(s, i, 1) == a || self.word(s, i, 2) == a,
            "LBIGRAM" => self.word(s, i, 0) == a && self.word(s, i, -1) == b,
            "RBIGRAM" => self.word(s, i, 0) == a && self.word(s, i, 1) == b,
            "WDPREVTAG" => self.word(s, i, 0) == a && self.tag(s, i, -1) == b,
            "WDNEXTTAG" => self.word(s, i, 0) == a && self.tag(s, i, 1) == b,
            other => unreachable!("unknown kind {other}"),
        }
    }
}

fn corpus_strings(c: &Corpus) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let words = c
        .sentences()
        .iter()
        .map(|s| s.tokens().iter().map(|t| t.word.as_str().to_string()).collect())
        .collect();
    let tags = c
        .sentences()
        .iter()
        .map(|s| {
            s.tokens()
                .iter()
                .map(|t| t.tag.as_ref().expect("tagged corpus").as_str().to_string())
                .collect()
        })
        .collect();
    (words, tags)
}

/// Brute-force greedy contextual learning over every instantiable rule.
pub fn learn_contextual(
    initial: &Corpus,
    truth: &Corpus,
    cfg: &LearnerConfig,
    tag_only: bool,
) -> Trace {
    assert!(cfg.min_net_score >= 1);
    let (words, tags) = corpus_strings(initial);
    let (_, truth_tags) = corpus_strings(truth);
    let mut state = CtxState {
        words,
        tags,
        truth: truth_tags,
    };

    let tag_universe: Vec<String> = {
        let mut set: BTreeSet<String> = state.tags.iter().flatten().cloned().collect();
        set.extend(state.truth.iter().flatten().cloned());
        set.into_iter().collect()
    };
    let mut param_tags = tag_universe.clone();
    param_tags.push(SENTINEL.to_string());
    let mut param_words: Vec<String> = {
        let set: BTreeSet<String> = state.words.iter().flatten().cloned().collect();
        set.into_iter().collect()
    };
    param_words.push(SENTINEL.to_string());

    let mut learned = Trace::new();
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        assert!(rounds < 10_000, "oracle failed to terminate");

        let mut by_tag: HashMap<&str, Vec<(usize, usize)>> = HashMap::new();
        for (s, row) in state.tags.iter().enumerate() {
            for (i, t) in row.iter().enumerate() {
                by_tag.entry(t).or_default().push((s, i));
            }
        }

        // (net, good, bad, line, from, to, kind, a, b)
        let mut best: Option<(i64, u64, u64, String, String, String, &str, String, String)> = None;
        for from in &tag_universe {
            let Some(positions) = by_tag.get(from.as_str()) else {
                continue;
            };
            for to in &tag_universe {
                if from == to {
                    continue;
                }
                for &(kind, first, second, word_based) in KINDS {
                    if tag_only && word_based {
                        continue;
                    }
                    let firsts = if first == Arg::Tag { &param_tags } else { &param_words };
                    let empty = vec![String::new()];
                    let seconds = match second {
                        None => &empty,
                        Some(Arg::Tag) => &param_tags,
                        Some(Arg::Word) => &param_words,
                    };
                    for a in firsts {
                        for b in seconds {
                            let mut good = 0u64;
                            let mut bad = 0u64;
                            for &(s, i) in positions {
                                if !state.fires(kind, a, b, s, i) {
                                    continue;
                                }
                                let truth = &state.truth[s][i];
                                if truth == to {
                                    good += 1;
                                } else if truth == from {
                                    bad += 1;
                                }
                            }
                            // Rules that fix nothing can never reach the
                            // threshold (>= 1), so they never win a round.
                            if good == 0 {
                                continue;
                            }
                            let net = good as i64 - bad as i64;
                            let strictly_better = match &best {
                                None => true,
                                Some((bnet, _, bbad, bline, ..)) => {
                                    if net != *bnet {
                                        net > *bnet
                                    } else if bad != *bbad {
                                        bad < *bbad
                                    } else {
                                        let line = if second.is_some() {
                                            format!("{from} {to} {kind} {a} {b}")
                                        } else {
                                            format!("{from} {to} {kind} {a}")
                                        };
                                        line < *bline
                                    }
                                }
                            };
                            if strictly_better {
                                let line = if second.is_some() {
                                    format!("{from} {to} {kind} {a} {b}")
                                } else {
                                    format!("{from} {to} {kind} {a}")
                                };
                                best = Some((
                                    net,
                                    good,
                                    bad,
                                    line,
                                    from.clone(),
                                    to.clone(),
                                    kind,
                                    a.clone(),
                                    b.clone(),
                                ));
                            }
                        }
                    }
                }
            }
        }

        match best {
            Some((net, good, bad, line, from, to, kind, a, b)) if net >= cfg.min_net_score => {
                let mut hits = Vec::new();
                for (s, row) in state.tags.iter().enumerate() {
                    for i in 0..row.len() {
                        if row[i] == from && state.fires(kind, &a, &b, s, i) {
                            hits.push((s, i));
                        }
                    }
                }
                for (s, i) in hits {
                    state.tags[s][i] = to.clone();
                }
                learned.push((line, good, bad));
            }
            _ => break,
        }
    }
    learned
}

// ---------------------------------------------------------------------
// Unknown-word learner reference
// ---------------------------------------------------------------------

struct UnknownInstance {
    word: String,
    truth: String,
    current: String,
}

const UNKNOWN_KINDS: &[&str] = &[
    "DELPREF", "HASPREF", "DELSUF", "HASSUF", "ADDSUF", "ADDPREF", "GOODLEFT", "GOODRIGHT",
    "HASCHAR",
];

struct UnknownTables {
    forms: HashSet<String>,
    left: HashMap<String, BTreeSet<String>>,
    right: HashMap<String, BTreeSet<String>>,
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

fn unknown_fires(kind: &str, arg: &str, word: &str, tables: &UnknownTables) -> bool {
    let arg_len = char_len(arg);
    let strict = char_len(word) > arg_len;
    match kind {
        "HASSUF" => strict && word.ends_with(arg),
        "HASPREF" => strict && word.starts_with(arg),
        "DELSUF" => match word.strip_suffix(arg) {
            Some(rest) => !rest.is_empty() && tables.forms.contains(rest),
            None => false,
        },
        "DELPREF" => match word.strip_prefix(arg) {
            Some(rest) => !rest.is_empty() && tables.forms.contains(rest),
            None => false,
        },
        "ADDSUF" => tables.forms.contains(&format!("{word}{arg}")),
        "ADDPREF" => tables.forms.contains(&format!("{arg}{word}")),
        "GOODLEFT" => tables.left.get(word).is_some_and(|s| s.contains(arg)),
        "GOODRIGHT" => tables.right.get(word).is_some_and(|s| s.contains(arg)),
        "HASCHAR" => {
            let mut chars = arg.chars();
            match (chars.next(), chars.next()) {
                (Some(z), None) => word.contains(z),
                _ => false,
            }
        }
        other => unreachable!("unknown kind {other}"),
    }
}

fn affixes_of(s: &str, suffix: bool, out: &mut BTreeSet<String>) {
    let chars: Vec<char> = s.chars().collect();
    for len in 1..=4.min(chars.len()) {
        let affix: String = if suffix {
            chars[chars.len() - len..].iter().collect()
        } else {
            chars[..len].iter().collect()
        };
        out.insert(affix);
    }
}

/// Brute-force greedy unknown-word learning, replicating the split and the
/// capitalization guess independently.
pub fn learn_unknown(
    train: &Corpus,
    fraction: f64,
    cfg: &LearnerConfig,
    defaults: &UnknownTagDefaults,
) -> Trace {
    assert!(cfg.min_net_score >= 1);
    let total = train.len();
    let split = (total as f64 * fraction).floor() as usize;
    assert!(split > 0 && split < total);

    let mut tables = UnknownTables {
        forms: HashSet::new(),
        left: HashMap::new(),
        right: HashMap::new(),
    };
    for sentence in &train.sentences()[..split] {
        let words: Vec<&str> = sentence.tokens().iter().map(|t| t.word.as_str()).collect();
        for w in &words {
            tables.forms.insert(w.to_string());
        }
        for pair in words.windows(2) {
            tables
                .left
                .entry(pair[1].to_string())
                .or_default()
                .insert(pair[0].to_string());
            tables
                .right
                .entry(pair[0].to_string())
                .or_default()
                .insert(pair[1].to_string());
        }
    }

    let cap = defaults.capitalized_tag.as_str();
    let default = defaults.default_tag.as_str();
    let mut instances = Vec::new();
    for sentence in &train.sentences()[split..] {
        for token in sentence.tokens() {
            let word = token.word.as_str();
            if tables.forms.contains(word) {
                continue;
            }
            let first_upper = word.chars().next().is_some_and(char::is_uppercase);
            instances.push(UnknownInstance {
                word: word.to_string(),
                truth: token.tag.as_ref().unwrap().as_str().to_string(),
                current: if first_upper { cap } else { default }.to_string(),
            });
        }
    }
    assert!(!instances.is_empty(), "fixture must contain unknown words");

    // Parameter universes: every affix of every known form and instance
    // word, every character of an instance word, every recorded neighbor.
    let mut prefixes = BTreeSet::new();
    let mut suffixes = BTreeSet::new();
    let mut chars = BTreeSet::new();
    let mut neighbors = BTreeSet::new();
    for word in tables
        .forms
        .iter()
        .map(String::as_str)
        .chain(instances.iter().map(|i| i.word.as_str()))
    {
        affixes_of(word, false, &mut prefixes);
        affixes_of(word, true, &mut suffixes);
    }
    for inst in &instances {
        for z in inst.word.chars() {
            chars.insert(z.to_string());
        }
        if let Some(set) = tables.left.get(&inst.word) {
            neighbors.extend(set.iter().cloned());
        }
        if let Some(set) = tables.right.get(&inst.word) {
            neighbors.extend(set.iter().cloned());
        }
    }
    let prefixes: Vec<String> = prefixes.into_iter().collect();
    let suffixes: Vec<String> = suffixes.into_iter().collect();
    let chars: Vec<String> = chars.into_iter().collect();
    let neighbors: Vec<String> = neighbors.into_iter().collect();

    let tag_universe: Vec<String> = {
        let mut set: BTreeSet<String> = instances.iter().map(|i| i.truth.clone()).collect();
        set.insert(cap.to_string());
        set.insert(default.to_string());
        set.into_iter().collect()
    };
    let mut froms: Vec<Option<String>> = vec![None];
    froms.extend(tag_universe.iter().cloned().map(Some));

    let mut learned = Trace::new();
    loop {
        let mut best: Option<(i64, u64, u64, String, Option<String>, String, &str, String)> = None;
        for from in &froms {
            for to in &tag_universe {
                if from.as_ref() == Some(to) {
                    continue;
                }
                for &kind in UNKNOWN_KINDS {
                    let args: &[String] = match kind {
                        "HASPREF" | "DELPREF" | "ADDPREF" => &prefixes,
                        "HASSUF" | "DELSUF" | "ADDSUF" => &suffixes,
                        "HASCHAR" => &chars,
                        "GOODLEFT" | "GOODRIGHT" => &neighbors,
                        _ => unreachable!(),
                    };
                    for arg in args {
                        let mut good = 0u64;
                        let mut bad = 0u64;
                        for inst in &instances {
                            let matches = from.as_ref().map_or(true, |f| *f == inst.current);
                            if !matches || *to == inst.current {
                                continue;
                            }
                            if unknown_fires(kind, arg, &inst.word, &tables) {
                                if inst.truth == *to {
                                    good += 1;
                                } else if inst.truth == inst.current {
                                    bad += 1;
                                }
                            }
                        }
                        if good == 0 {
                            continue;
                        }
                        let net = good as i64 - bad as i64;
                        let line = || {
                            format!(
                                "{} {} {} {}",
                                from.as_deref().unwrap_or("*"),
                                to,
                                kind,
                                arg
                            )
                        };
                        let strictly_better = match &best {
                            None => true,
                            Some((bnet, _, bbad, bline, ..)) => {
                                if net != *bnet {
                                    net > *bnet
                                } else if bad != *bbad {
                                    bad < *bbad
                                } else {
                                    line() < *bline
                                }
                            }
                        };
                        if strictly_better {
                            best = Some((
                                net,
                                good,
                                bad,
                                line(),
                                from.clone(),
                                to.clone(),
                                kind,
                                arg.clone(),
                            ));
                        }
                    }
                }
            }
        }

        match best {
            Some((net, good, bad, line, from, to, kind, arg)) if net >= cfg.min_net_score => {
                for inst in &mut instances {
                    let matches = from.as_ref().map_or(true, |f| *f == inst.current);
                    if matches && unknown_fires(kind, &arg, &inst.word, &tables) {
                        inst.current = to.clone();
                    }
                }
                learned.push((line, good, bad));
            }
            _ => break,
        }
    }
    learned
}
