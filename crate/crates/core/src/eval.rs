//! Accuracy reports: overall, known-word, and unknown-word token accuracy.
//! Tags are compared by exact string equality; a token is unknown when its
//! word is absent from the lexicon. All arithmetic is exact; decimals
//! appear only when rendering.

use num_rational::Ratio;
use thiserror::Error;

use crate::corpus::Corpus;
use crate::lexicon::Lexicon;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalReport {
    pub total_tokens: u64,
    pub correct_tokens: u64,
    pub known_tokens: u64,
    pub known_correct: u64,
    pub unknown_tokens: u64,
    pub unknown_correct: u64,
}

impl EvalReport {
    pub fn overall_accuracy(&self) -> Option<Ratio<u64>> {
        accuracy(self.correct_tokens, self.total_tokens)
    }

    pub fn known_accuracy(&self) -> Option<Ratio<u64>> {
        accuracy(self.known_correct, self.known_tokens)
    }

    pub fn unknown_accuracy(&self) -> Option<Ratio<u64>> {
        accuracy(self.unknown_correct, self.unknown_tokens)
    }
}

fn accuracy(correct: u64, total: u64) -> Option<Ratio<u64>> {
    (total > 0).then(|| Ratio::new(correct, total))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("corpora differ in shape: system has {sys_sentences} sentences / {sys_tokens} tokens, gold has {gold_sentences} / {gold_tokens}")]
    ShapeMismatch {
        sys_sentences: usize,
        sys_tokens: usize,
        gold_sentences: usize,
        gold_tokens: usize,
    },
    #[error("word mismatch at sentence {sentence}, position {position}: system has {sys_word:?}, gold has {gold_word:?}")]
    WordMismatch {
        sentence: usize,
        position: usize,
        sys_word: String,
        gold_word: String,
    },
    #[error("untagged token at sentence {sentence}, position {position} in the {side} corpus")]
    Untagged {
        sentence: usize,
        position: usize,
        side: &'static str,
    },
}

/// Compare a system tagging against the gold corpus. Both must have the
/// same shape and the same words position by position.
pub fn evaluate(sys: &Corpus, gold: &Corpus, lexicon: &Lexicon) -> Result<EvalReport, EvalError> {
    if !sys.same_shape(gold) {
        return Err(EvalError::ShapeMismatch {
            sys_sentences: sys.len(),
            sys_tokens: sys.token_count(),
            gold_sentences: gold.len(),
            gold_tokens: gold.token_count(),
        });
    }
    let mut report = EvalReport::default();
    for (si, (ss, gs)) in sys.sentences().iter().zip(gold.sentences()).enumerate() {
        for (ti, (st, gt)) in ss.tokens().iter().zip(gs.tokens()).enumerate() {
            if st.word != gt.word {
                return Err(EvalError::WordMismatch {
                    sentence: si,
                    position: ti,
                    sys_word: st.word.as_str().to_string(),
                    gold_word: gt.word.as_str().to_string(),
                });
            }
            let untagged = |side| EvalError::Untagged {
                sentence: si,
                position: ti,
                side,
            };
            let sys_tag = st.tag.as_ref().ok_or_else(|| untagged("system"))?;
            let gold_tag = gt.tag.as_ref().ok_or_else(|| untagged("gold"))?;
            let known = lexicon.contains(st.word.as_str());
            let correct = sys_tag == gold_tag;
            report.total_tokens += 1;
            report.correct_tokens += correct as u64;
            if known {
                report.known_tokens += 1;
                report.known_correct += correct as u64;
            } else {
                report.unknown_tokens += 1;
                report.unknown_correct += correct as u64;
            }
        }
    }
    Ok(report)
}

/// Fixed-decimal rendering of an exact ratio, rounding half away from zero.
pub fn format_ratio(ratio: Option<Ratio<u64>>, decimals: u32) -> String {
    let Some(r) = ratio else {
        return "n/a".to_string();
    };
    let scale = 10u128.pow(decimals);
    let numer = *r.numer() as u128;
    let denom = *r.denom() as u128;
    let scaled = (numer * scale * 2 + denom) / (denom * 2);
    let (whole, frac) = (scaled / scale, scaled % scale);
    if decimals == 0 {
        format!("{whole}")
    } else {
        format!("{whole}.{frac:0width$}", width = decimals as usize)
    }
}

/// Human-readable report.
pub fn render_report_text(report: &EvalReport) -> String {
    format!(
        "overall accuracy   {} ({}/{})\nknown accuracy     {} ({}/{})\nunknown accuracy   {} ({}/{})\nunknown tokens     {}\n",
        format_ratio(report.overall_accuracy(), 4),
        report.correct_tokens,
        report.total_tokens,
        format_ratio(report.known_accuracy(), 4),
        report.known_correct,
        report.known_tokens,
        format_ratio(report.unknown_accuracy(), 4),
        report.unknown_correct,
        report.unknown_tokens,
        report.unknown_tokens,
    )
}

/// Machine-readable `key=value` block.
pub fn render_report_machine(report: &EvalReport) -> String {
    format!(
        "total_tokens={}\ncorrect_tokens={}\noverall_accuracy={}\nknown_accuracy={}\nunknown_accuracy={}\nunknown_token_count={}\n",
        report.total_tokens,
        report.correct_tokens,
        format_ratio(report.overall_accuracy(), 4),
        format_ratio(report.known_accuracy(), 4),
        format_ratio(report.unknown_accuracy(), 4),
        report.unknown_tokens,
    )
}
