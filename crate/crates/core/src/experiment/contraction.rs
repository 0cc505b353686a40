use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{classical_value_exact, classical_value_search, ExactMode, GameSpec, ValueMethod};
use crate::quantum::{canonical_odd_cycle_strategy, optimize_angles, AngleSearch, QubitStrategy};
use crate::torus::{verify_blocker, BlockerMode, Edge, TorusGraph};

/// `|preimage| / |image|` at or below this is "approximately one".
pub const NEAR_ONE: f64 = 1.25;
/// `|preimage| / |image|` at or above this is "much larger than one".
pub const MUCH_LARGER: f64 = 2.0;
/// `|preimage| / |image|` below this would be "approximately zero", which the
/// counting makes impossible.
pub const NEAR_ZERO: f64 = 0.5;

/// Which of the possible regimes a contraction's size ratio falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionClass {
    /// Ratio at most [`NEAR_ONE`]: few question pairs lost.
    NearOne,
    /// Ratio strictly between the two thresholds.
    Mixed,
    /// Ratio at least [`MUCH_LARGER`].
    MuchLarger,
}

/// The restriction of the `depth`-fold Odd-Cycle game to the question
/// pairs whose elementary path survives in `graph`.
///
/// Questions live on the `depth`-dimensional slice of the torus through the
/// origin (coordinates past `depth` are zero). The elementary path of
/// `(x, t)` steps forward along each axis `i` with `t_i = 1`, in increasing
/// axis order; a pair survives iff every edge on it survives. Pair indices
/// follow [`GameSpec::odd_cycle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionMap {
    pub graph: TorusGraph,
    pub depth: u32,
    pub surviving: Vec<usize>,
    /// Surviving pair count.
    pub image: usize,
    /// All pair count.
    pub preimage: usize,
}

impl ContractionMap {
    pub fn new(graph: &TorusGraph, depth: u32) -> Result<Self> {
        if depth < 1 || depth > graph.d() {
            return Err(Error::InvalidArgument(format!(
                "depth {depth} outside 1..={}",
                graph.d()
            )));
        }
        let game = GameSpec::odd_cycle(graph.n(), depth)?;
        let surviving: Vec<usize> = game
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                elementary_path(graph, depth, p.alice, p.target)
                    .iter()
                    .all(|&e| graph.survives(e))
            })
            .map(|(i, _)| i)
            .collect();
        Ok(ContractionMap {
            graph: graph.clone(),
            depth,
            image: surviving.len(),
            preimage: game.pairs.len(),
            surviving,
        })
    }

    /// `|preimage| / |image|`, infinite when nothing survives.
    pub fn size_ratio(&self) -> f64 {
        self.preimage as f64 / self.image as f64
    }

    pub fn class(&self) -> ContractionClass {
        let r = self.size_ratio();
        if r <= NEAR_ONE {
            ContractionClass::NearOne
        } else if r >= MUCH_LARGER {
            ContractionClass::MuchLarger
        } else {
            ContractionClass::Mixed
        }
    }

    /// The renormalised subgame, `None` when no pair survives.
    pub fn game(&self) -> Result<Option<GameSpec>> {
        let full = GameSpec::odd_cycle(self.graph.n(), self.depth)?;
        let keep = |i: usize| self.surviving.binary_search(&i).is_ok();
        Ok(full.restricted(|i, _| keep(i)))
    }
}

/// Edges from `x` to `x + t` on the slice through the origin, one axis at a
/// time in increasing order. `x` is a mixed-radix question index.
pub fn elementary_path(g: &TorusGraph, depth: u32, x: usize, t: u32) -> Vec<Edge> {
    let n = g.n();
    let mut coords = vec![0usize; g.d() as usize];
    let mut rest = x;
    for c in coords.iter_mut().take(depth as usize) {
        *c = rest % n;
        rest /= n;
    }
    let mut v = g.vertex(&coords).expect("coordinates in range");
    let mut path = Vec::new();
    for axis in 0..depth {
        if (t >> axis) & 1 == 1 {
            path.push(Edge(v, axis));
            v = g.neighbor(v, axis, true);
        }
    }
    path
}

/// Quantum values of a contraction against the full game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedValues {
    pub n: usize,
    pub depth: u32,
    /// Best angle-optimised value on the surviving pairs; a lower bound.
    pub q_restricted: f64,
    /// Best angle-optimised value on the full game; a lower bound.
    pub q_full: f64,
    pub classical_ref: f64,
    pub classical_method: ValueMethod,
    /// False when `classical_ref` is a search lower bound.
    pub classical_exact: bool,
    pub image: usize,
    pub preimage: usize,
}

/// Full-game reference values for one `(n, depth)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullValues {
    pub q_full: f64,
    pub classical_ref: f64,
    pub classical_method: ValueMethod,
    pub classical_exact: bool,
}

/// Memoises full-game values per `(n, depth)` and restricted values per
/// surviving pair set. Every value is a function of its key and the
/// options alone, so results do not depend on lookup order.
#[derive(Debug, Clone)]
pub struct ValueCache {
    pub search: AngleSearch,
    /// Local-search iterations when the exact classical value is refused.
    pub classical_iterations: u64,
    full: HashMap<(usize, u32), FullValues>,
    restricted: HashMap<(usize, u32, Vec<usize>), f64>,
}

impl ValueCache {
    pub fn new(search: AngleSearch, classical_iterations: u64) -> Self {
        ValueCache {
            search,
            classical_iterations,
            full: HashMap::new(),
            restricted: HashMap::new(),
        }
    }

    pub fn full(&mut self, n: usize, depth: u32) -> Result<FullValues> {
        if let Some(v) = self.full.get(&(n, depth)) {
            return Ok(v.clone());
        }
        let v = compute_full(n, depth, &self.search, self.classical_iterations)?;
        self.full.insert((n, depth), v.clone());
        Ok(v)
    }

    /// Restricted value of `map`, `None` for an empty surviving set.
    pub fn restricted(&mut self, map: &ContractionMap) -> Result<Option<f64>> {
        let key = (map.graph.n(), map.depth, map.surviving.clone());
        if let Some(&v) = self.restricted.get(&key) {
            return Ok(Some(v));
        }
        let Some(v) = compute_restricted(map, &self.search)? else {
            return Ok(None);
        };
        self.restricted.insert(key, v);
        Ok(Some(v))
    }

    pub(crate) fn insert_restricted(&mut self, map: &ContractionMap, value: f64) {
        self.restricted
            .insert((map.graph.n(), map.depth, map.surviving.clone()), value);
    }

    pub(crate) fn has_restricted(&self, map: &ContractionMap) -> bool {
        self.restricted
            .contains_key(&(map.graph.n(), map.depth, map.surviving.clone()))
    }

    pub fn values(&mut self, map: &ContractionMap) -> Result<Option<RestrictedValues>> {
        let full = self.full(map.graph.n(), map.depth)?;
        let Some(q_restricted) = self.restricted(map)? else {
            return Ok(None);
        };
        Ok(Some(RestrictedValues {
            n: map.graph.n(),
            depth: map.depth,
            q_restricted,
            q_full: full.q_full,
            classical_ref: full.classical_ref,
            classical_method: full.classical_method,
            classical_exact: full.classical_exact,
            image: map.image,
            preimage: map.preimage,
        }))
    }
}

fn optimised(game: &GameSpec, n: usize, search: &AngleSearch) -> Result<f64> {
    let start: QubitStrategy = canonical_odd_cycle_strategy(n, 0.0)?;
    Ok(optimize_angles(game, Some(&start), search)?.value)
}

fn compute_full(n: usize, depth: u32, search: &AngleSearch, iterations: u64) -> Result<FullValues> {
    let game = GameSpec::odd_cycle(n, depth)?;
    let q_full = optimised(&game, n, search)?;
    let classical = match classical_value_exact(&game, ExactMode::AliceExhaustiveBestResponse) {
        Ok(r) => r,
        Err(Error::Intractable { .. }) => classical_value_search(&game, search.seed, iterations)?,
        Err(e) => return Err(e),
    };
    Ok(FullValues {
        q_full,
        classical_ref: classical.value_f64,
        classical_method: classical.method,
        classical_exact: !classical.lower_bound_only,
    })
}

pub(crate) fn compute_restricted(map: &ContractionMap, search: &AngleSearch) -> Result<Option<f64>> {
    match map.game()? {
        Some(game) => Ok(Some(optimised(&game, map.graph.n(), search)?)),
        None => Ok(None),
    }
}

/// Quantum values of the subgame left by the removed edges of `g` against
/// the full `depth`-fold game, with the classical reference. `None` flags a
/// degenerate contraction with no surviving pair. `g` must block every odd
/// cycle.
pub fn restricted_values(
    g: &TorusGraph,
    base_n: usize,
    depth: u32,
    search: &AngleSearch,
) -> Result<Option<RestrictedValues>> {
    if !verify_blocker(g, BlockerMode::OddOnly).blocked {
        return Err(Error::InvalidArgument(
            "removed edges do not block every odd cycle".into(),
        ));
    }
    restricted_values_unchecked(g, base_n, depth, search)
}

/// [`restricted_values`] without the odd-blocker precondition, for
/// comparing against identity and no-op contractions.
pub fn restricted_values_unchecked(
    g: &TorusGraph,
    base_n: usize,
    depth: u32,
    search: &AngleSearch,
) -> Result<Option<RestrictedValues>> {
    if base_n != g.n() {
        return Err(Error::InvalidArgument(format!(
            "game side {base_n} differs from torus side {}",
            g.n()
        )));
    }
    let map = ContractionMap::new(g, depth)?;
    ValueCache::new(search.clone(), DEFAULT_CLASSICAL_ITERATIONS).values(&map)
}

/// Local-search iterations for classical references that exceed the exact
/// budget.
pub const DEFAULT_CLASSICAL_ITERATIONS: u64 = 1_000_000;

/// `ℛ = (q_restricted − q_full) / classical_ref`, reported with its sign.
pub fn ratio_r(v: &RestrictedValues) -> Result<f64> {
    if v.classical_ref <= 0.0 {
        return Err(Error::InvalidArgument("classical reference is zero".into()));
    }
    Ok((v.q_restricted - v.q_full) / v.classical_ref)
}

/// The same gap over the restricted value instead of the classical one.
pub fn ratio_r_restricted(v: &RestrictedValues) -> Result<f64> {
    if v.q_restricted <= 0.0 {
        return Err(Error::InvalidArgument("restricted value is zero".into()));
    }
    Ok((v.q_restricted - v.q_full) / v.q_restricted)
}
