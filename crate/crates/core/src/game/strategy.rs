use serde::{Deserialize, Serialize};

use super::GameSpec;
use crate::error::{Error, Result};

/// Answer tables for both players. Answers are bit vectors stored as
/// integers: bit `i` is the answer in coordinate `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub alice_table: Vec<u32>,
    pub bob_table: Vec<u32>,
}

impl DeterministicStrategy {
    pub fn new(alice_table: Vec<u32>, bob_table: Vec<u32>) -> Self {
        DeterministicStrategy { alice_table, bob_table }
    }

    /// Both players answer `x mod 2` on a single-coordinate game with `n` questions each.
    pub fn parity(n: usize) -> Self {
        let t: Vec<u32> = (0..n as u32).map(|x| x % 2).collect();
        DeterministicStrategy::new(t.clone(), t)
    }

    /// Checks that the tables cover the game's questions and that every
    /// answer fits in `depth` bits.
    pub fn validate_for(&self, game: &GameSpec) -> Result<()> {
        if self.alice_table.len() != game.alice_questions {
            return Err(Error::StrategyMismatch(format!(
                "Alice table has {} entries, game has {} questions",
                self.alice_table.len(),
                game.alice_questions
            )));
        }
        if self.bob_table.len() != game.bob_questions {
            return Err(Error::StrategyMismatch(format!(
                "Bob table has {} entries, game has {} questions",
                self.bob_table.len(),
                game.bob_questions
            )));
        }
        let k = game.answers_per_question();
        if let Some(a) = self.alice_table.iter().chain(&self.bob_table).find(|&&a| a >= k) {
            return Err(Error::StrategyMismatch(format!(
                "answer {a} does not fit in {} bits",
                game.depth
            )));
        }
        Ok(())
    }

    /// The product strategy `s^⊗d`: each coordinate of a question is answered
    /// independently with this (single-coordinate) strategy.
    pub fn tensor_power(&self, d: u32) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidArgument("repetition depth must be at least 1".into()));
        }
        if self.alice_table.iter().chain(&self.bob_table).any(|&a| a > 1) {
            return Err(Error::StrategyMismatch(
                "tensor_power expects single-bit answers".into(),
            ));
        }
        Ok(DeterministicStrategy {
            alice_table: product_table(&self.alice_table, d),
            bob_table: product_table(&self.bob_table, d),
        })
    }
}

fn product_table(base: &[u32], d: u32) -> Vec<u32> {
    let q = base.len();
    let total = q.pow(d);
    (0..total)
        .map(|mut idx| {
            let mut answer = 0;
            for i in 0..d {
                answer |= base[idx % q] << i;
                idx /= q;
            }
            answer
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_table_digits() {
        let s = DeterministicStrategy::parity(3).tensor_power(2).unwrap();
        // question 5 = digits (2, 1): answers (0, 1)
        assert_eq!(s.alice_table[5], 0b10);
        assert_eq!(s.alice_table.len(), 9);
    }

    #[test]
    fn mismatched_tables_rejected() {
        let g = GameSpec::odd_cycle(3, 1).unwrap();
        let s = DeterministicStrategy::new(vec![0, 1], vec![0, 1, 0]);
        assert!(matches!(s.validate_for(&g), Err(Error::StrategyMismatch(_))));
        let s = DeterministicStrategy::new(vec![0, 1, 2], vec![0, 1, 0]);
        assert!(s.validate_for(&g).is_err());
    }
}
