use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::contraction::ContractionMap;
use crate::error::{Error, Result};
use crate::pearls::{diamond_norm, DiamondMethod, DiamondVector};
use crate::torus::{giant_detect, RegionSet, TorusGraph};

/// Tolerances for the foam event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoamEventParams {
    /// Scale in the vertex bound `m^{−d}·|tube|`.
    pub m: f64,
    /// `≲ n^d` is read as `≤ constant·n^d`.
    pub constant: f64,
    pub giant_threshold: f64,
    /// Depth of the game whose contraction is counted.
    pub depth: u32,
}

impl Default for FoamEventParams {
    fn default() -> Self {
        FoamEventParams {
            m: 0.7,
            constant: 2.0,
            giant_threshold: 0.95,
            depth: 2,
        }
    }
}

impl FoamEventParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::InvalidArgument(format!("m = {} must be positive", self.m)));
        }
        if !(self.constant > 0.0 && self.constant.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "constant {} must be positive",
                self.constant
            )));
        }
        if !(0.0..=1.0).contains(&self.giant_threshold) {
            return Err(Error::InvalidArgument(format!(
                "giant threshold {} outside [0, 1]",
                self.giant_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prefactors {
    /// Surviving question pairs.
    pub f1: usize,
    /// Tube vertices.
    pub f2: usize,
    /// Torus vertices.
    pub f3: usize,
    /// All question pairs.
    pub f4: usize,
    /// Vertices of the largest marked component of the tube.
    pub f5: usize,
    /// Section vertices.
    pub f6: usize,
    /// `f1·f2·f4·f5 / (f3·f6)`; `None` when the section is empty.
    pub product: Option<f64>,
    pub is_giant: bool,
    /// Distinct endpoints of removed edges.
    pub foam_vertices: usize,
    /// Removed edges per axis.
    pub axis_counts: Vec<usize>,
    /// Events (1) to (4): the removal set is nonempty; the foam has at most
    /// `m^{−d}·|tube|` vertices; the section is a proper subset of the tube;
    /// the Rademacher diamond norm of the per-axis counts is at most
    /// `constant·n^d`.
    pub events: [bool; 4],
}

impl Prefactors {
    /// All four events at once.
    pub fn foam_event(&self) -> bool {
        self.events.iter().all(|&e| e)
    }
}

/// Width-2 tube along axis 0 through the origin with every vertex marked,
/// so its marked components are the pieces the removed edges cut it into,
/// and its slice at `x_0 = 0`.
pub fn standard_tube_and_section(g: &TorusGraph) -> Result<(RegionSet, RegionSet)> {
    let tube = RegionSet::tube(g, 0, 0, 2.min(g.n()))?;
    let marks = tube.members.clone();
    let tube = tube.with_marked(marks)?;
    let section = RegionSet::section(g, &tube, 0, 0)?;
    Ok((tube, section))
}

fn foam_vertex_set(g: &TorusGraph) -> BTreeSet<usize> {
    g.removed_edges()
        .into_iter()
        .flat_map(|e| [e.vertex(), g.neighbor(e.vertex(), e.axis(), true)])
        .collect()
}

/// The counts and events that relate the contraction of `g` to the foam
/// formed by its removed edges. A section that is not inside the tube makes
/// event (3) false.
pub fn proposition_prefactors(
    g: &TorusGraph,
    tube: &RegionSet,
    section: &RegionSet,
    params: &FoamEventParams,
) -> Result<Prefactors> {
    params.validate()?;
    let depth = params.depth.min(g.d());
    let map = ContractionMap::new(g, depth)?;
    let giant = giant_detect(tube, g, params.giant_threshold)?;
    let (f1, f2, f3, f4, f5, f6) = (
        map.image,
        tube.members.len(),
        g.vertex_count(),
        map.preimage,
        giant.component.len(),
        section.members.len(),
    );
    let product = (f6 > 0).then(|| f1 as f64 * f2 as f64 * f4 as f64 * f5 as f64 / (f3 as f64 * f6 as f64));
    let foam_vertices = foam_vertex_set(g).len();
    let mut axis_counts = vec![0usize; g.d() as usize];
    for e in g.removed_edges() {
        axis_counts[e.axis() as usize] += 1;
    }
    let scale = (g.n() as f64).powi(g.d() as i32);
    let bound = params.m.powi(-(g.d() as i32)) * f2 as f64;
    let diamond = diamond_norm(
        &DiamondVector::new(axis_counts.iter().map(|&c| c as f64).collect())?,
        DiamondMethod::ExactEnumeration,
    )?
    .value;
    let events = [
        g.removed_count() > 0,
        foam_vertices as f64 <= bound,
        section.is_subset_of(tube) && section.members.len() < tube.members.len(),
        diamond <= params.constant * scale,
    ];
    Ok(Prefactors {
        f1,
        f2,
        f3,
        f4,
        f5,
        f6,
        product,
        is_giant: giant.is_giant,
        foam_vertices,
        axis_counts,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::Edge;

    #[test]
    fn whole_torus_and_a_column() {
        let g = TorusGraph::new(3, 2).unwrap();
        let whole = RegionSet::tube(&g, 1, 0, 3).unwrap();
        let column = RegionSet::section(&g, &whole, 0, 0).unwrap();
        let p = proposition_prefactors(&g, &whole, &column, &FoamEventParams::default()).unwrap();
        assert_eq!(p.f3, 9);
        assert_eq!(p.f6, 3);
        assert!(p.events[2]);
        // nothing removed: identity contraction
        assert_eq!(p.f1, p.f4);
        assert!(!p.events[0]);
        assert_eq!(p.f5, 0);
        assert_eq!(p.product, Some(0.0));
    }

    #[test]
    fn transverse_cuts() {
        let cuts = (0..3).flat_map(|k| [Edge(3 * k, 0), Edge(k, 1)]);
        let g = TorusGraph::with_removed(3, 2, cuts).unwrap();
        let (tube, section) = standard_tube_and_section(&g).unwrap();
        assert_eq!(tube.members.len(), 6);
        assert_eq!(section.members.len(), 2);
        let p = proposition_prefactors(&g, &tube, &section, &FoamEventParams::default()).unwrap();
        // rows 0 and 1 are separated and each is cut once
        assert_eq!(p.f5, 3);
        assert!(!p.is_giant);
        // (0,0) (1,0) (0,1) (1,1) (2,0) (0,2) (2,1) (1,2) are touched
        assert_eq!(p.foam_vertices, 8);
        assert_eq!(p.axis_counts, vec![3, 3]);
        assert_eq!(p.events, [true, true, true, true]);
        assert!(p.foam_event());
        let expected = (p.f1 * 6 * 36 * p.f5) as f64 / (9.0 * 2.0);
        assert_eq!(p.product, Some(expected));
    }

    #[test]
    fn section_outside_tube() {
        let g = TorusGraph::new(3, 2).unwrap();
        let tube = RegionSet::tube(&g, 0, 0, 1).unwrap();
        let whole = RegionSet::tube(&g, 0, 0, 3).unwrap();
        let other = RegionSet::section(&g, &whole, 1, 2).unwrap();
        let p = proposition_prefactors(&g, &tube, &other, &FoamEventParams::default()).unwrap();
        assert!(!p.events[2]);
    }
}
