//! Two-player games with XOR-type predicates, their parallel repetitions,
//! deterministic strategies and classical values.
//!
//! A game is stored as a list of question pairs, each with an integer
//! weight over a common denominator and a target bit vector. Answers are
//! bit vectors of length `depth`; under the [`Predicate::Xor`] rule a pair
//! is won iff `alice_answer ^ bob_answer == target`. Both the Odd-Cycle and
//! the CHSH game, and all their tensor powers, have this shape.

mod strategy;
mod value;

pub use strategy::DeterministicStrategy;
pub use value::{
    classical_value_exact, classical_value_exact_budgeted, classical_value_search, evaluate_strategy,
    repetition_decay_check, DecayDiagnostic, DecayRegime, ExactMode, ValueMethod, ValueReport, DEFAULT_EXACT_BUDGET,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One (Alice question, Bob question) pair drawn by the referee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionPair {
    pub alice: usize,
    pub bob: usize,
    /// Probability numerator over [`GameSpec::denominator`].
    pub weight: u64,
    /// Bit `i` is the required value of `a_i ⊕ b_i` in coordinate `i`.
    pub target: u32,
}

/// Scoring rule applied to every question pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predicate {
    /// Win iff `a ^ b == target` (every coordinate wins).
    Xor,
    AlwaysWin,
    AlwaysLose,
}

impl Predicate {
    #[inline]
    pub fn wins(self, alice: u32, bob: u32, target: u32) -> bool {
        match self {
            Predicate::Xor => alice ^ bob == target,
            Predicate::AlwaysWin => true,
            Predicate::AlwaysLose => false,
        }
    }
}

/// Which family a game belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GameKind {
    OddCycle {
        n: usize,
    },
    Chsh {
        delta: Option<DeltaTable>,
    },
    /// A subgame or a hand-built game.
    Custom {
        label: String,
    },
}

/// A twist table `δ(x, y) ∈ {0,1}` for the CHSH predicate: the per-coordinate
/// target becomes `(x ∧ y) ⊕ δ(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaTable(pub Vec<[u8; 2]>);

impl DeltaTable {
    pub fn zero(rows: usize) -> Self {
        DeltaTable(vec![[0, 0]; rows])
    }

    fn validate(&self, rows: usize) -> Result<()> {
        if self.0.len() != rows {
            return Err(Error::MalformedGame(format!(
                "δ-table has {} rows, expected {rows}",
                self.0.len()
            )));
        }
        if self.0.iter().flatten().any(|&v| v > 1) {
            return Err(Error::MalformedGame("δ-table entries must be 0 or 1".into()));
        }
        Ok(())
    }

    /// Sum of all entries, the quantity the two parity constraints on δ refer to.
    pub fn total(&self) -> u64 {
        self.0.iter().flatten().map(|&v| v as u64).sum()
    }
}

/// A finite two-player game, possibly a `depth`-fold parallel repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGame")]
pub struct GameSpec {
    pub kind: GameKind,
    /// Number of Alice questions per coordinate.
    pub alice_base: usize,
    /// Number of Bob questions per coordinate.
    pub bob_base: usize,
    pub depth: u32,
    pub alice_questions: usize,
    pub bob_questions: usize,
    pub denominator: u64,
    pub predicate: Predicate,
    pub pairs: Vec<QuestionPair>,
}

#[derive(Deserialize)]
struct RawGame {
    kind: GameKind,
    alice_base: usize,
    bob_base: usize,
    depth: u32,
    alice_questions: usize,
    bob_questions: usize,
    denominator: u64,
    predicate: Predicate,
    pairs: Vec<QuestionPair>,
}

impl TryFrom<RawGame> for GameSpec {
    type Error = Error;

    fn try_from(r: RawGame) -> Result<Self> {
        let g = GameSpec {
            kind: r.kind,
            alice_base: r.alice_base,
            bob_base: r.bob_base,
            depth: r.depth,
            alice_questions: r.alice_questions,
            bob_questions: r.bob_questions,
            denominator: r.denominator,
            predicate: r.predicate,
            pairs: r.pairs,
        };
        g.validate()?;
        Ok(g)
    }
}

impl GameSpec {
    /// Builds a custom game and checks every invariant.
    pub fn new(
        label: impl Into<String>,
        alice_questions: usize,
        bob_questions: usize,
        depth: u32,
        denominator: u64,
        pairs: Vec<QuestionPair>,
    ) -> Result<Self> {
        let g = GameSpec {
            kind: GameKind::Custom { label: label.into() },
            alice_base: alice_questions,
            bob_base: bob_questions,
            depth,
            alice_questions,
            bob_questions,
            denominator,
            predicate: Predicate::Xor,
            pairs,
        };
        g.validate()?;
        Ok(g)
    }

    /// The `n`-Odd-Cycle game repeated `d` times in parallel.
    ///
    /// Per coordinate the referee draws `x` uniform in `[n]` and `t` uniform
    /// in `{0,1}`; Alice gets `x`, Bob gets `(x + t) mod n`, and they must
    /// answer with `a ⊕ b = t`.
    pub fn odd_cycle(n: usize, d: u32) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("n must be odd and at least 3, got {n}")));
        }
        if d < 1 {
            return Err(Error::InvalidArgument("repetition depth must be at least 1".into()));
        }
        let mut pairs = Vec::with_capacity(2 * n);
        for x in 0..n {
            for t in 0..2u32 {
                pairs.push(QuestionPair {
                    alice: x,
                    bob: (x + t as usize) % n,
                    weight: 1,
                    target: t,
                });
            }
        }
        let base = GameSpec {
            kind: GameKind::OddCycle { n },
            alice_base: n,
            bob_base: n,
            depth: 1,
            alice_questions: n,
            bob_questions: n,
            denominator: 2 * n as u64,
            predicate: Predicate::Xor,
            pairs,
        };
        base.tensor_power(d)
    }

    /// CHSH repeated `d` times, optionally with a δ-twist on every coordinate.
    pub fn chsh(d: u32, delta: Option<&DeltaTable>) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidArgument("repetition depth must be at least 1".into()));
        }
        if let Some(delta) = delta {
            delta.validate(2)?;
        }
        let mut pairs = Vec::with_capacity(4);
        for x in 0..2usize {
            for y in 0..2usize {
                let twist = delta.map_or(0, |t| t.0[x][y] as u32);
                pairs.push(QuestionPair {
                    alice: x,
                    bob: y,
                    weight: 1,
                    target: ((x & y) as u32) ^ twist,
                });
            }
        }
        let base = GameSpec {
            kind: GameKind::Chsh { delta: delta.cloned() },
            alice_base: 2,
            bob_base: 2,
            depth: 1,
            alice_questions: 2,
            bob_questions: 2,
            denominator: 4,
            predicate: Predicate::Xor,
            pairs,
        };
        base.tensor_power(d)
    }

    /// `d`-fold parallel repetition of a single-coordinate game: question
    /// sets become Cartesian products, weights multiply, and a pair is won
    /// iff every coordinate is won.
    pub fn tensor_power(&self, d: u32) -> Result<Self> {
        if self.depth != 1 {
            return Err(Error::InvalidArgument(
                "tensor_power expects a single-coordinate game".into(),
            ));
        }
        if d < 1 {
            return Err(Error::InvalidArgument("repetition depth must be at least 1".into()));
        }
        if d > 16 {
            return Err(Error::InvalidArgument(format!("repetition depth {d} is too large")));
        }
        let mut pairs = self.pairs.clone();
        let mut qa = self.alice_questions;
        let mut qb = self.bob_questions;
        let mut denom = self.denominator;
        for level in 1..d {
            let mut next = Vec::with_capacity(pairs.len() * self.pairs.len());
            for p in &pairs {
                for c in &self.pairs {
                    next.push(QuestionPair {
                        alice: p.alice + qa * c.alice,
                        bob: p.bob + qb * c.bob,
                        weight: p.weight * c.weight,
                        target: p.target | (c.target << level),
                    });
                }
            }
            pairs = next;
            qa *= self.alice_questions;
            qb *= self.bob_questions;
            denom = denom
                .checked_mul(self.denominator)
                .ok_or_else(|| Error::InvalidArgument("denominator overflow".into()))?;
        }
        let g = GameSpec {
            kind: self.kind.clone(),
            alice_base: self.alice_base,
            bob_base: self.bob_base,
            depth: d,
            alice_questions: qa,
            bob_questions: qb,
            denominator: denom,
            predicate: self.predicate,
            pairs,
        };
        g.validate()?;
        Ok(g)
    }

    /// Same questions and distribution, different scoring rule.
    pub fn with_predicate(&self, predicate: Predicate) -> Self {
        GameSpec {
            predicate,
            ..self.clone()
        }
    }

    /// The subgame on the pairs selected by `keep`, with the distribution
    /// renormalised. Returns `None` when no pair survives.
    pub fn restricted(&self, keep: impl Fn(usize, &QuestionPair) -> bool) -> Option<Self> {
        let pairs: Vec<QuestionPair> = self
            .pairs
            .iter()
            .enumerate()
            .filter(|(i, p)| keep(*i, p))
            .map(|(_, p)| *p)
            .collect();
        let denominator: u64 = pairs.iter().map(|p| p.weight).sum();
        if denominator == 0 {
            return None;
        }
        let label = match &self.kind {
            GameKind::OddCycle { n } => format!("odd-cycle(n={n},d={}) restricted", self.depth),
            GameKind::Chsh { .. } => format!("chsh(d={}) restricted", self.depth),
            GameKind::Custom { label } => format!("{label} restricted"),
        };
        Some(GameSpec {
            kind: GameKind::Custom { label },
            denominator,
            pairs,
            ..self.clone()
        })
    }

    pub fn answers_per_question(&self) -> u32 {
        1 << self.depth
    }

    /// Coordinate `i` of an Alice question index.
    #[inline]
    pub fn alice_digit(&self, question: usize, i: u32) -> usize {
        (question / self.alice_base.pow(i)) % self.alice_base
    }

    #[inline]
    pub fn bob_digit(&self, question: usize, i: u32) -> usize {
        (question / self.bob_base.pow(i)) % self.bob_base
    }

    /// Checks the structural invariants: indices and targets in range and
    /// weights summing exactly to the denominator.
    pub fn validate(&self) -> Result<()> {
        if self.depth < 1 || self.depth > 16 {
            return Err(Error::MalformedGame(format!("bad depth {}", self.depth)));
        }
        if self.alice_base == 0 || self.bob_base == 0 {
            return Err(Error::MalformedGame("empty question set".into()));
        }
        let expect_a = self.alice_base.checked_pow(self.depth);
        let expect_b = self.bob_base.checked_pow(self.depth);
        let is_product = expect_a == Some(self.alice_questions) && expect_b == Some(self.bob_questions);
        let is_flat =
            self.depth == 1 || (self.alice_base == self.alice_questions && self.bob_base == self.bob_questions);
        if !is_product && !is_flat {
            return Err(Error::MalformedGame("question counts do not match base^depth".into()));
        }
        if self.denominator == 0 {
            return Err(Error::MalformedGame("zero denominator".into()));
        }
        let k = self.answers_per_question();
        let mut total: u64 = 0;
        for p in &self.pairs {
            if p.alice >= self.alice_questions || p.bob >= self.bob_questions {
                return Err(Error::MalformedGame(format!(
                    "question pair ({}, {}) out of range",
                    p.alice, p.bob
                )));
            }
            if p.target >= k {
                return Err(Error::MalformedGame(format!("target {} out of range", p.target)));
            }
            total = total
                .checked_add(p.weight)
                .ok_or_else(|| Error::MalformedGame("weight overflow".into()))?;
        }
        if total != self.denominator {
            return Err(Error::MalformedGame(format!(
                "weights sum to {total}/{}, not 1",
                self.denominator
            )));
        }
        Ok(())
    }

    /// For each Alice question, the indices of the pairs that ask it.
    pub(crate) fn pairs_by_alice(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.alice_questions];
        for (i, p) in self.pairs.iter().enumerate() {
            out[p.alice].push(i);
        }
        out
    }
}
