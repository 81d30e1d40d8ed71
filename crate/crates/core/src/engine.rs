//! The greedy error-driven learning loop shared by the rule learners.
//!
//! Each round enumerates candidate rules at currently mistagged positions,
//! scores every candidate over the whole training state, picks the best
//! under a strict total order, applies it, and repeats until no candidate
//! reaches the score threshold.

use rayon::prelude::*;
use thiserror::Error;

use crate::ruleio::RuleLine;

/// Effect of one rule on the training state: `good` tokens changed
/// wrong→right, `bad` changed right→wrong.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Score {
    pub good: u64,
    pub bad: u64,
}

impl Score {
    pub fn net(&self) -> i64 {
        self.good as i64 - self.bad as i64
    }
}

/// Stopping control for the greedy loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnerConfig {
    /// Minimum net score to accept a rule; must be >= 1 so every accepted
    /// rule strictly reduces training errors.
    pub min_net_score: i64,
    pub max_rules: Option<usize>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            // Suppresses single-token overfit rules; configurable.
            min_net_score: 2,
            max_rules: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("select_best called on an empty candidate set")]
    NoCandidates,
    #[error("state and truth differ in shape: {0}")]
    ShapeMismatch(String),
}

/// A learning task the greedy loop can drive. Scoring must be a pure
/// function of the frozen state so candidates can be scored in parallel.
pub trait Problem: Sync {
    type Rule: RuleLine + Clone + Ord + Send + Sync;

    /// Candidate rules drawn from the current error sites, deduplicated.
    fn candidates(&self) -> Vec<Self::Rule>;
    /// Exact effect of applying `rule` to the current state.
    fn score(&self, rule: &Self::Rule) -> Score;
    /// Apply `rule`, updating the state.
    fn apply(&mut self, rule: &Self::Rule);
    /// Number of tokens currently tagged differently from the truth.
    fn error_count(&self) -> u64;
}

/// The best of a non-empty scored candidate set: maximal net score, then
/// fewer tokens broken, then lexicographically smallest rendered rule line.
/// The order is strict (rule lines are unique), so the choice is
/// deterministic regardless of input order or thread count.
pub fn select_best<R: RuleLine>(scored: &[(R, Score)]) -> Result<&(R, Score), EngineError> {
    scored
        .iter()
        .min_by(|(ra, sa), (rb, sb)| {
            sb.net()
                .cmp(&sa.net())
                .then_with(|| sa.bad.cmp(&sb.bad))
                .then_with(|| ra.render_line().cmp(&rb.render_line()))
        })
        .ok_or(EngineError::NoCandidates)
}

/// Run the greedy loop to completion. Returns the accepted rules in learned
/// order, each with the score it was accepted at.
pub fn greedy_learn<P: Problem>(
    problem: &mut P,
    cfg: &LearnerConfig,
) -> Vec<(P::Rule, Score)> {
    assert!(cfg.min_net_score >= 1, "min_net_score must be >= 1");
    let mut learned = Vec::new();
    loop {
        if cfg.max_rules.is_some_and(|cap| learned.len() >= cap) {
            break;
        }
        let candidates = problem.candidates();
        if candidates.is_empty() {
            break;
        }
        let frozen: &P = problem;
        let scored: Vec<(P::Rule, Score)> = candidates
            .into_par_iter()
            .map(|rule| {
                let score = frozen.score(&rule);
                (rule, score)
            })
            .collect();
        let (rule, score) = select_best(&scored).expect("candidate set is non-empty");
        if score.net() < cfg.min_net_score {
            break;
        }
        let (rule, score) = (rule.clone(), *score);
        problem.apply(&rule);
        learned.push((rule, score));
    }
    learned
}
