//! Rule files: plain text, one rule per line, space-separated fields,
//! uppercase trigger mnemonics. Rule lists are ordered; file order is
//! preserved exactly.

use thiserror::Error;

use crate::corpus::SymbolError;

/// A rule kind with a one-line text form. `parse_line` and `render_line`
/// are mutual inverses; `render_line` is also the serialization used for
/// deterministic tie-breaking during learning.
pub trait RuleLine: Sized {
    fn parse_line(line: &str) -> Result<Self, RuleLineError>;
    fn render_line(&self) -> String;
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleLineError {
    #[error("unknown trigger mnemonic {0:?}")]
    UnknownTrigger(String),
    #[error("unknown condition mnemonic {0:?}")]
    UnknownCondition(String),
    #[error("expected {expected} fields, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("affix {0:?} must be 1 to 4 characters, got {1}")]
    BadAffixLength(String, usize),
    #[error("argument {0:?} must be a single character")]
    NotSingleChar(String),
    #[error("invalid symbol: {0}")]
    BadSymbol(#[from] SymbolError),
    #[error("rule changes nothing: from and to are both {0:?}")]
    FromEqualsTo(String),
    #[error("k-best rule would add the tag its condition already requires: {0:?}")]
    AddEqualsConditionTag(String),
}

/// A rule-file parse failure with its 1-based line number.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {source}")]
pub struct RuleParseError {
    pub line: usize,
    #[source]
    pub source: RuleLineError,
}

/// Parse a rule file. Empty lines are skipped; order is preserved.
pub fn parse_rules<R: RuleLine>(text: &str) -> Result<Vec<R>, RuleParseError> {
    let mut rules = Vec::new();
    for (idx, raw_line) in text.split('\n').enumerate() {
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        let rule = R::parse_line(line).map_err(|source| RuleParseError {
            line: idx + 1,
            source,
        })?;
        rules.push(rule);
    }
    Ok(rules)
}

/// Render rules one per line in order, `\n` after each.
pub fn render_rules<R: RuleLine>(rules: &[R]) -> String {
    let mut out = String::new();
    for rule in rules {
        out.push_str(&rule.render_line());
        out.push('\n');
    }
    out
}

/// Split a rule line into whitespace-separated fields and check the count.
pub(crate) fn fields_exact(line: &str, expected: usize) -> Result<Vec<&str>, RuleLineError> {
    let fields: Vec<&str> = line.split_ascii_whitespace().collect();
    if fields.len() != expected {
        return Err(RuleLineError::ArityMismatch {
            expected,
            got: fields.len(),
        });
    }
    Ok(fields)
}
