use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DeterministicStrategy, GameSpec, Predicate};
use crate::error::{Error, Result};
use crate::report::Fraction;
use crate::rng::stream_rng;

/// Default cap on the number of strategy tables an exact search may visit.
pub const DEFAULT_EXACT_BUDGET: u128 = 1 << 26;

/// How a [`ValueReport`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueMethod {
    Exhaustive,
    AliceExhaustiveBestResponse,
    LocalSearch,
}

/// Exact search strategy for [`classical_value_exact`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactMode {
    /// Every pair of Alice and Bob tables.
    Full,
    /// Every Alice table, with Bob answering each question optimally.
    AliceExhaustiveBestResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueReport {
    /// Exact value of the witness strategy.
    pub value: Fraction,
    pub value_f64: f64,
    pub method: ValueMethod,
    pub witness: Option<DeterministicStrategy>,
    /// Strategy tables (exact) or candidate moves (search) evaluated.
    pub evaluations: u64,
    /// True when the value is only a lower bound on the classical value.
    pub lower_bound_only: bool,
}

impl ValueReport {
    fn new(numer: u64, denom: u64, method: ValueMethod, witness: DeterministicStrategy, evaluations: u64) -> Self {
        let value = Fraction::new(numer, denom);
        ValueReport {
            value_f64: value.to_f64(),
            value,
            lower_bound_only: method == ValueMethod::LocalSearch,
            method,
            witness: Some(witness),
            evaluations,
        }
    }
}

/// Exact winning probability of a deterministic strategy.
pub fn evaluate_strategy(game: &GameSpec, s: &DeterministicStrategy) -> Result<Fraction> {
    s.validate_for(game)?;
    let won: u64 = game
        .pairs
        .iter()
        .filter(|p| {
            game.predicate
                .wins(s.alice_table[p.alice], s.bob_table[p.bob], p.target)
        })
        .map(|p| p.weight)
        .sum();
    Ok(Fraction::new(won, game.denominator))
}

/// Incrementally maintained payoff of an Alice table against Bob's best
/// response. `hist[y·k + b]` is the weight won if Bob answers `b` to `y`.
#[derive(Clone)]
struct BestResponse<'g> {
    by_alice: &'g [Vec<(usize, u64, u32)>],
    k: usize,
    hist: Vec<u64>,
    best: Vec<u64>,
    total: u64,
}

impl<'g> BestResponse<'g> {
    fn new(by_alice: &'g [Vec<(usize, u64, u32)>], bob_questions: usize, k: usize, table: &[u32]) -> Self {
        let mut hist = vec![0u64; bob_questions * k];
        for (x, pairs) in by_alice.iter().enumerate() {
            for &(y, w, t) in pairs {
                hist[y * k + (table[x] ^ t) as usize] += w;
            }
        }
        let best: Vec<u64> = hist.chunks(k).map(|h| *h.iter().max().unwrap()).collect();
        let total = best.iter().sum();
        BestResponse {
            by_alice,
            k,
            hist,
            best,
            total,
        }
    }

    #[inline]
    fn change(&mut self, x: usize, old: u32, new: u32) {
        let k = self.k;
        for &(y, w, t) in &self.by_alice[x] {
            self.hist[y * k + (old ^ t) as usize] -= w;
            self.hist[y * k + (new ^ t) as usize] += w;
        }
        for &(y, _, _) in &self.by_alice[x] {
            let m = *self.hist[y * k..(y + 1) * k].iter().max().unwrap();
            self.total = self.total - self.best[y] + m;
            self.best[y] = m;
        }
    }

    /// Bob's best response, ties going to the smallest answer.
    fn bob_table(&self) -> Vec<u32> {
        self.hist
            .chunks(self.k)
            .map(|h| {
                let m = *h.iter().max().unwrap();
                h.iter().position(|&v| v == m).unwrap() as u32
            })
            .collect()
    }
}

fn grouped_pairs(game: &GameSpec) -> Vec<Vec<(usize, u64, u32)>> {
    game.pairs_by_alice()
        .into_iter()
        .map(|idx| {
            idx.into_iter()
                .map(|i| {
                    let p = game.pairs[i];
                    (p.bob, p.weight, p.target)
                })
                .collect()
        })
        .collect()
}

fn table_count(k: u32, questions: usize) -> Option<u128> {
    (k as u128).checked_pow(questions as u32)
}

/// Mixed-radix decoding of a table index, question 0 least significant.
fn decode(mut index: u64, k: u32, len: usize) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let a = (index % k as u64) as u32;
            index /= k as u64;
            a
        })
        .collect()
}

/// Classical value with the default budget. See [`classical_value_exact_budgeted`].
pub fn classical_value_exact(game: &GameSpec, mode: ExactMode) -> Result<ValueReport> {
    classical_value_exact_budgeted(game, mode, DEFAULT_EXACT_BUDGET)
}

/// Exact classical value by exhaustive enumeration.
///
/// `Full` visits every (Alice table, Bob table) pair; the alternative visits
/// every Alice table and lets Bob answer each question optimally, which is
/// exact because the payoff is a sum of independent per-Bob-question terms.
/// Refuses with [`Error::Intractable`] when the visit count exceeds `budget`.
/// The witness is the lexicographically smallest optimal table (question 0
/// least significant).
pub fn classical_value_exact_budgeted(game: &GameSpec, mode: ExactMode, budget: u128) -> Result<ValueReport> {
    game.validate()?;
    let k = game.answers_per_question();
    let (method, required) = match mode {
        ExactMode::Full => (
            ValueMethod::Exhaustive,
            table_count(k, game.alice_questions + game.bob_questions),
        ),
        ExactMode::AliceExhaustiveBestResponse => (
            ValueMethod::AliceExhaustiveBestResponse,
            table_count(k, game.alice_questions),
        ),
    };
    let required = required.unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::Intractable {
            what: format!("{mode:?} search over {} strategy tables", required),
            required,
            budget,
        });
    }
    if game.predicate != Predicate::Xor {
        let s = DeterministicStrategy::new(vec![0; game.alice_questions], vec![0; game.bob_questions]);
        let v = evaluate_strategy(game, &s)?;
        return Ok(ValueReport::new(v.numer(), v.denom(), method, s, 1));
    }
    let (numer, alice, bob) = match mode {
        ExactMode::Full => full_search(game),
        ExactMode::AliceExhaustiveBestResponse => best_response_search(game),
    };
    let witness = DeterministicStrategy::new(alice, bob);
    Ok(ValueReport::new(
        numer,
        game.denominator,
        method,
        witness,
        required as u64,
    ))
}

fn best_response_search(game: &GameSpec) -> (u64, Vec<u32>, Vec<u32>) {
    let k = game.answers_per_question();
    let q = game.alice_questions;
    let by_alice = grouped_pairs(game);
    // The top `fixed` questions are fixed per chunk; the rest run as an odometer.
    let fixed = (0..=q).find(|&f| (k as u64).pow(f as u32) >= 256).unwrap_or(q);
    let free = q - fixed;
    let chunks = (k as u64).pow(fixed as u32);
    let per_chunk = (k as u64).pow(free as u32);

    let (value, index) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut table = vec![0u32; q];
            table[free..].copy_from_slice(&decode(c, k, fixed));
            let mut br = BestResponse::new(&by_alice, game.bob_questions, k as usize, &table);
            let mut best = (br.total, 0u64);
            for low in 1..per_chunk {
                let mut i = 0;
                loop {
                    let old = table[i];
                    let new = if old + 1 == k { 0 } else { old + 1 };
                    table[i] = new;
                    br.change(i, old, new);
                    if new != 0 {
                        break;
                    }
                    i += 1;
                }
                if br.total > best.0 {
                    best = (br.total, low);
                }
            }
            (best.0, c * per_chunk + best.1)
        })
        .reduce(|| (0, u64::MAX), pick);
    let alice = decode(index, k, q);
    let bob = BestResponse::new(&by_alice, game.bob_questions, k as usize, &alice).bob_table();
    (value, alice, bob)
}

/// Higher value wins; equal values go to the smaller index.
fn pick(a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
    if a.0 > b.0 || (a.0 == b.0 && a.1 <= b.1) {
        a
    } else {
        b
    }
}

fn full_search(game: &GameSpec) -> (u64, Vec<u32>, Vec<u32>) {
    let k = game.answers_per_question();
    let qa = game.alice_questions;
    let qb = game.bob_questions;
    let bob_tables = (k as u64).pow(qb as u32);
    let (value, index) = (0..(k as u64).pow(qa as u32))
        .into_par_iter()
        .map(|ai| {
            let alice = decode(ai, k, qa);
            let mut best = (0u64, u64::MAX);
            for bi in 0..bob_tables {
                let bob = decode(bi, k, qb);
                let won: u64 = game
                    .pairs
                    .iter()
                    .filter(|p| alice[p.alice] ^ bob[p.bob] == p.target)
                    .map(|p| p.weight)
                    .sum();
                if won > best.0 || best.1 == u64::MAX {
                    best = (won, ai * bob_tables + bi);
                }
            }
            best
        })
        .reduce(|| (0, u64::MAX), pick);
    (
        value,
        decode(index / bob_tables, k, qa),
        decode(index % bob_tables, k, qb),
    )
}

/// Seeded hill climbing over Alice tables with Bob best-responding.
///
/// `iterations` counts evaluated candidates across all chains; each chain's
/// first evaluation is its random starting table, so `iterations == 1`
/// returns the value of chain 0's starting point. Moves change one Alice
/// answer; non-worsening moves are kept and a chain restarts from a fresh
/// random table after a run of rejected moves. Chains run on independent
/// seed streams, so the result depends only on `(game, seed, iterations)`.
pub fn classical_value_search(game: &GameSpec, seed: u64, iterations: u64) -> Result<ValueReport> {
    game.validate()?;
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    let k = game.answers_per_question();
    let q = game.alice_questions;
    if game.predicate != Predicate::Xor {
        let s = DeterministicStrategy::new(vec![0; q], vec![0; game.bob_questions]);
        let v = evaluate_strategy(game, &s)?;
        return Ok(ValueReport::new(v.numer(), v.denom(), ValueMethod::LocalSearch, s, 1));
    }
    let by_alice = grouped_pairs(game);
    let chains = iterations.min(8);
    let patience = (20 * q as u64 * k as u64).max(64);

    let results: Vec<(u64, Vec<u32>)> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let budget = iterations / chains + u64::from(c < iterations % chains);
            let mut rng = stream_rng(seed, c);
            let mut table: Vec<u32> = (0..q).map(|_| rng.random_range(0..k)).collect();
            let mut br = BestResponse::new(&by_alice, game.bob_questions, k as usize, &table);
            let mut best = (br.total, table.clone());
            let mut stale = 0u64;
            for _ in 1..budget {
                if stale >= patience {
                    for (x, a) in table.iter_mut().enumerate() {
                        let new = rng.random_range(0..k);
                        br.change(x, *a, new);
                        *a = new;
                    }
                    stale = 0;
                }
                let x = rng.random_range(0..q);
                let old = table[x];
                let new = (old + rng.random_range(1..k.max(2))) % k;
                let before = br.total;
                br.change(x, old, new);
                if br.total >= before {
                    table[x] = new;
                    stale = if br.total > before { 0 } else { stale + 1 };
                    if br.total > best.0 {
                        best = (br.total, table.clone());
                    }
                } else {
                    br.change(x, new, old);
                    stale += 1;
                }
            }
            best
        })
        .collect();
    let (value, alice) = results
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one chain");
    let bob = BestResponse::new(&by_alice, game.bob_questions, k as usize, &alice).bob_table();
    Ok(ValueReport::new(
        value,
        game.denominator,
        ValueMethod::LocalSearch,
        DeterministicStrategy::new(alice, bob),
        iterations,
    ))
}

/// Where `(n, d)` sits relative to the regime `d ≤ n² log n` of the decay bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayRegime {
    Inside,
    /// `d = 1`: `log d = 0` and the bound quantity is singular.
    Boundary,
    Outside,
}

/// Deficit `1 − value` next to the bound quantity `√d / (n √log d)`.
/// The bound holds only up to an unknown constant, so nothing is asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayDiagnostic {
    pub n: usize,
    pub d: u32,
    pub value: f64,
    pub deficit: f64,
    pub bound_quantity: Option<f64>,
    /// `deficit / bound_quantity`, the implied constant.
    pub implied_constant: Option<f64>,
    pub regime: DecayRegime,
}

pub fn repetition_decay_check(n: usize, d: u32, value: f64) -> Result<DecayDiagnostic> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("n and d must be positive".into()));
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidArgument(format!("value {value} is not a probability")));
    }
    let nf = n as f64;
    let df = d as f64;
    let deficit = 1.0 - value;
    let (bound_quantity, regime) = if d == 1 {
        (None, DecayRegime::Boundary)
    } else {
        let b = df.sqrt() / (nf * df.ln().sqrt());
        let inside = df <= nf * nf * nf.ln();
        (
            Some(b),
            if inside {
                DecayRegime::Inside
            } else {
                DecayRegime::Outside
            },
        )
    };
    Ok(DecayDiagnostic {
        n,
        d,
        value,
        deficit,
        implied_constant: bound_quantity.map(|b| deficit / b),
        bound_quantity,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::DeltaTable;

    fn frac(n: u64, d: u64) -> Fraction {
        Fraction::new(n, d)
    }

    /// Hand enumeration of the six (x, t) draws for n = 3 and the parity strategy.
    #[test]
    fn parity_strategy_on_three_cycle() {
        let mut won = 0;
        for x in 0..3u32 {
            for t in 0..2u32 {
                let y = (x + t) % 3;
                if (x % 2) ^ (y % 2) == t {
                    won += 1;
                }
            }
        }
        assert_eq!(won, 5);
        let g = GameSpec::odd_cycle(3, 1).unwrap();
        let v = evaluate_strategy(&g, &DeterministicStrategy::parity(3)).unwrap();
        assert_eq!(v, frac(won, 6));
    }

    #[test]
    fn chsh_constant_strategy() {
        let g = GameSpec::chsh(1, None).unwrap();
        let s = DeterministicStrategy::new(vec![0, 0], vec![0, 0]);
        assert_eq!(evaluate_strategy(&g, &s).unwrap(), frac(3, 4));
        let always = g.with_predicate(Predicate::AlwaysWin);
        assert_eq!(evaluate_strategy(&always, &s).unwrap(), frac(1, 1));
    }

    #[test]
    fn exact_small_values() {
        let g = GameSpec::odd_cycle(3, 1).unwrap();
        for mode in [ExactMode::Full, ExactMode::AliceExhaustiveBestResponse] {
            let r = classical_value_exact(&g, mode).unwrap();
            assert_eq!(r.value, frac(5, 6));
            let w = r.witness.unwrap();
            assert_eq!(evaluate_strategy(&g, &w).unwrap(), r.value);
        }
        let chsh = GameSpec::chsh(1, None).unwrap();
        let r = classical_value_exact(&chsh, ExactMode::Full).unwrap();
        assert_eq!(r.value, frac(3, 4));
        assert_eq!(r.evaluations, 16);
    }

    #[test]
    fn modes_agree_where_both_run() {
        for g in [
            GameSpec::odd_cycle(3, 1).unwrap(),
            GameSpec::odd_cycle(5, 1).unwrap(),
            GameSpec::chsh(1, None).unwrap(),
            GameSpec::chsh(2, None).unwrap(),
        ] {
            let full = classical_value_exact(&g, ExactMode::Full).unwrap();
            let br = classical_value_exact(&g, ExactMode::AliceExhaustiveBestResponse).unwrap();
            assert_eq!(full.value, br.value);
        }
    }

    #[test]
    fn full_mode_refuses_over_budget() {
        let g = GameSpec::odd_cycle(3, 2).unwrap();
        match classical_value_exact(&g, ExactMode::Full) {
            Err(Error::Intractable { required, budget, .. }) => {
                assert_eq!(required, 1 << 36);
                assert_eq!(budget, DEFAULT_EXACT_BUDGET);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
        assert!(classical_value_exact_budgeted(&g, ExactMode::AliceExhaustiveBestResponse, 1000).is_err());
    }

    #[test]
    fn product_strategy_value_is_power() {
        let base = GameSpec::odd_cycle(3, 1).unwrap();
        let s = DeterministicStrategy::parity(3);
        let v1 = evaluate_strategy(&base, &s).unwrap().0;
        for d in 1..=3 {
            let g = base.tensor_power(d).unwrap();
            let vd = evaluate_strategy(&g, &s.tensor_power(d).unwrap()).unwrap().0;
            assert_eq!(vd, v1.pow(d as i32));
        }
    }

    #[test]
    fn twisted_chsh_with_all_ones_is_complementary() {
        let g = GameSpec::chsh(1, Some(&DeltaTable(vec![[1, 1], [1, 1]]))).unwrap();
        let r = classical_value_exact(&g, ExactMode::Full).unwrap();
        assert_eq!(r.value, frac(3, 4));
    }

    #[test]
    fn search_is_seeded_and_bounded_by_exact() {
        let g = GameSpec::odd_cycle(3, 1).unwrap();
        let a = classical_value_search(&g, 7, 2000).unwrap();
        let b = classical_value_search(&g, 7, 2000).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.value, frac(5, 6));
        assert!(a.lower_bound_only);
        assert!(classical_value_search(&g, 7, 0).is_err());
    }

    #[test]
    fn single_iteration_is_initial_strategy() {
        let g = GameSpec::odd_cycle(5, 1).unwrap();
        let r = classical_value_search(&g, 3, 1).unwrap();
        let mut rng = stream_rng(3, 0);
        let table: Vec<u32> = (0..5).map(|_| rng.random_range(0..2)).collect();
        assert_eq!(r.witness.as_ref().unwrap().alice_table, table);
        assert_eq!(evaluate_strategy(&g, r.witness.as_ref().unwrap()).unwrap(), r.value);
    }

    #[test]
    fn decay_diagnostic_cases() {
        let r = repetition_decay_check(3, 2, 0.75).unwrap();
        assert_eq!(r.deficit, 0.25);
        let expect = 2f64.sqrt() / (3.0 * 2f64.ln().sqrt());
        assert!((r.bound_quantity.unwrap() - expect).abs() < 1e-15);
        assert_eq!(r.regime, DecayRegime::Inside);
        let r = repetition_decay_check(3, 1, 5.0 / 6.0).unwrap();
        assert_eq!(r.regime, DecayRegime::Boundary);
        assert!(r.bound_quantity.is_none());
        assert_eq!(
            repetition_decay_check(3, 100, 0.5).unwrap().regime,
            DecayRegime::Outside
        );
    }
}
