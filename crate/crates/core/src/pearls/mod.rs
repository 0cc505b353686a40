//! Consistent regions and pearls, the value-via-regions formula, the
//! Rademacher diamond norm, the blocker integral bound, gap overlaps and
//! the consistent cycle-growing procedure.
//!
//! Alice tables are indexed like torus vertices: mixed radix over `[n]^d`,
//! coordinate 0 least significant, answers as bit masks.

mod diamond;
mod growth;

pub use diamond::{
    blocker_integral_bound, diamond_norm, lambda_measure, DiamondEstimate, DiamondMethod, DiamondVector, IntegralBound,
    LambdaReport, MAX_EXACT_DIAMOND_DIM,
};
pub use growth::{grow_consistent_cycle, GrowthEvent, GrowthOptions, GrowthReport, IsoperimetricDiagnostic};

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::Fraction;

/// Largest dimension accepted by the region functions.
pub const MAX_REGION_DIM: u32 = 20;

fn check_table(s_a: &[u32], n: usize, d: u32) -> Result<usize> {
    if n < 2 || !(1..=MAX_REGION_DIM).contains(&d) {
        return Err(Error::InvalidArgument(format!("unsupported n = {n}, d = {d}")));
    }
    let count = n
        .checked_pow(d)
        .ok_or_else(|| Error::InvalidArgument("n^d overflows".into()))?;
    if s_a.len() != count {
        return Err(Error::StrategyMismatch(format!(
            "table has {} entries, expected {count}",
            s_a.len()
        )));
    }
    if s_a.iter().any(|&a| a >= 1 << d) {
        return Err(Error::StrategyMismatch(format!("answers must fit in {d} bits")));
    }
    Ok(count)
}

/// `y − t mod n` coordinatewise for the bit vector `t`.
fn shift_back(y: usize, t: u32, n: usize, d: u32) -> usize {
    let mut out = 0;
    let mut stride = 1;
    let mut rest = y;
    for i in 0..d {
        let c = rest % n;
        rest /= n;
        let c = (c + n - ((t >> i) & 1) as usize) % n;
        out += c * stride;
        stride *= n;
    }
    out
}

/// `Q_y = {y − t mod n : t ∈ {0,1}^d}` in order of `t`.
pub fn question_neighbourhood(y: usize, n: usize, d: u32) -> Vec<usize> {
    (0..1u32 << d).map(|t| shift_back(y, t, n, d)).collect()
}

/// Wrapped difference parity mask: bit `i` is `(x − x′)~_i mod 2`.
fn wrapped_parity(x: usize, xp: usize, n: usize, d: u32) -> u32 {
    let (mut a, mut b) = (x, xp);
    let mut mask = 0;
    for i in 0..d {
        let diff = (a % n) as i64 - (b % n) as i64;
        let r = diff.rem_euclid(n as i64);
        let wrapped = if r > n as i64 / 2 { r - n as i64 } else { r };
        mask |= ((wrapped.rem_euclid(2)) as u32) << i;
        a /= n;
        b /= n;
    }
    mask
}

/// Whether every pair in `region` satisfies `S_A(x) ⊕ S_A(x′) = (x − x′)~ mod 2`.
pub fn is_consistent(s_a: &[u32], region: &[usize], n: usize, d: u32) -> bool {
    region.iter().enumerate().all(|(i, &x)| {
        region[i + 1..]
            .iter()
            .all(|&xp| s_a[x] ^ s_a[xp] == wrapped_parity(x, xp, n, d))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistentRegion {
    pub y: usize,
    /// Sorted members, a subset of `Q_y`.
    pub members: Vec<usize>,
}

/// Largest consistent subset of `Q_y`, ties to the lexicographically
/// smallest sorted member list.
///
/// Within `Q_y` the wrapped difference of `y − t` and `y − t′` has parity
/// `t ⊕ t′`, so two members are consistent iff they share the key
/// `S_A(y − t) ⊕ t`. Consistency is therefore an equivalence relation and
/// the maximal consistent subsets are its classes; the key of the largest
/// class is also Bob's best answer to `y`.
pub fn max_consistent_region(s_a: &[u32], y: usize, n: usize, d: u32) -> Result<ConsistentRegion> {
    let count = check_table(s_a, n, d)?;
    if y >= count {
        return Err(Error::InvalidArgument(format!("y = {y} out of range")));
    }
    let mut classes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for t in 0..1u32 << d {
        let x = shift_back(y, t, n, d);
        classes.entry(s_a[x] ^ t).or_default().push(x);
    }
    let members = classes
        .into_values()
        .map(|mut c| {
            c.sort();
            c.dedup();
            c
        })
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)))
        .expect("Q_y is nonempty");
    Ok(ConsistentRegion { y, members })
}

/// A family `{R_y}` over all `y ∈ [n]^d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pearl {
    pub n: usize,
    pub d: u32,
    /// `y → R_y`.
    pub regions: BTreeMap<usize, Vec<usize>>,
    pub consistent: bool,
}

impl Pearl {
    /// The pearl of maximum consistent regions.
    pub fn maximal(s_a: &[u32], n: usize, d: u32) -> Result<Self> {
        let count = check_table(s_a, n, d)?;
        let mut regions = BTreeMap::new();
        for y in 0..count {
            regions.insert(y, max_consistent_region(s_a, y, n, d)?.members);
        }
        Ok(Pearl {
            n,
            d,
            regions,
            consistent: true,
        })
    }

    /// Checks `R_y ⊆ Q_y` for every member and sets the consistency flag
    /// against `s_a`.
    pub fn from_regions(s_a: &[u32], n: usize, d: u32, regions: BTreeMap<usize, Vec<usize>>) -> Result<Self> {
        check_table(s_a, n, d)?;
        for (&y, r) in &regions {
            let q = question_neighbourhood(y, n, d);
            if let Some(x) = r.iter().find(|x| !q.contains(x)) {
                return Err(Error::InvalidArgument(format!("{x} is not in Q_{y}")));
            }
        }
        let consistent = regions.values().all(|r| is_consistent(s_a, r, n, d));
        Ok(Pearl {
            n,
            d,
            regions,
            consistent,
        })
    }

    /// `(1/(n^d 2^d)) Σ_y |R_y|`.
    pub fn value(&self) -> Fraction {
        let total: usize = self.regions.values().map(|r| r.len()).sum();
        Fraction::new(total as u64, (self.n.pow(self.d) as u64) << self.d)
    }
}

/// `(1/(n^d 2^d)) Σ_y |R_y|` over maximum consistent regions, which equals
/// the value of `S_A` against Bob's best response.
pub fn value_via_regions(s_a: &[u32], n: usize, d: u32) -> Result<Fraction> {
    Ok(Pearl::maximal(s_a, n, d)?.value())
}

/// A maximal run of consecutive indices where the supporting sets differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub start: i64,
    pub magnitude: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    /// `|q_A Δ q_B|`.
    pub overlap_count: usize,
    pub gaps: Vec<Gap>,
    pub max_gap_magnitude: usize,
}

/// Symmetric difference of two supporting sets over `universe`, grouped
/// into maximal runs of consecutive indices.
pub fn gap_overlap(qa: &[i64], qb: &[i64], universe: RangeInclusive<i64>) -> Result<GapReport> {
    if let Some(x) = qa.iter().chain(qb).find(|x| !universe.contains(x)) {
        return Err(Error::InvalidArgument(format!(
            "{x} lies outside the universe {}..={}",
            universe.start(),
            universe.end()
        )));
    }
    let a: std::collections::BTreeSet<i64> = qa.iter().copied().collect();
    let b: std::collections::BTreeSet<i64> = qb.iter().copied().collect();
    let diff: Vec<i64> = a
        .symmetric_difference(&b)
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut gaps: Vec<Gap> = Vec::new();
    for &x in &diff {
        match gaps.last_mut() {
            Some(g) if g.start + g.magnitude as i64 == x => g.magnitude += 1,
            _ => gaps.push(Gap { start: x, magnitude: 1 }),
        }
    }
    Ok(GapReport {
        overlap_count: diff.len(),
        max_gap_magnitude: gaps.iter().map(|g| g.magnitude).max().unwrap_or(0),
        gaps,
    })
}
