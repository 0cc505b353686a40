use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::TorusGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    Section,
    Tube,
    Cube,
}

/// A set of torus vertices with a marked subset. Members and marks are
/// kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSet {
    pub kind: RegionKind,
    pub members: Vec<usize>,
    pub marked: Vec<usize>,
}

impl RegionSet {
    /// Checks `marked ⊆ members ⊆ V`.
    pub fn new(
        g: &TorusGraph,
        kind: RegionKind,
        members: impl IntoIterator<Item = usize>,
        marked: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        let marked: BTreeSet<usize> = marked.into_iter().collect();
        if let Some(&v) = members.iter().next_back().filter(|&&v| v >= g.vertex_count()) {
            return Err(Error::InvalidArgument(format!("vertex {v} out of range")));
        }
        if !marked.is_subset(&members) {
            return Err(Error::InvalidArgument("marked vertices must be members".into()));
        }
        Ok(RegionSet {
            kind,
            members: members.into_iter().collect(),
            marked: marked.into_iter().collect(),
        })
    }

    /// Band of the given width around the axis loop through `through`: every
    /// vertex whose transverse coordinates lie within `width` steps forward
    /// of those of `through`.
    pub fn tube(g: &TorusGraph, axis: u32, through: usize, width: usize) -> Result<Self> {
        if axis >= g.d() || width == 0 || width > g.n() {
            return Err(Error::InvalidArgument(format!("bad tube: axis {axis}, width {width}")));
        }
        let base = g.coords(through);
        let members = (0..g.vertex_count())
            .filter(|&v| (0..g.d()).all(|i| i == axis || (g.coord(v, i) + g.n() - base[i as usize]) % g.n() < width));
        RegionSet::new(g, RegionKind::Tube, members, [])
    }

    /// The slice of `tube` at coordinate `at` along `axis`.
    pub fn section(g: &TorusGraph, tube: &RegionSet, axis: u32, at: usize) -> Result<Self> {
        if axis >= g.d() || at >= g.n() {
            return Err(Error::InvalidArgument(format!("bad section: axis {axis}, at {at}")));
        }
        let members: Vec<usize> = tube
            .members
            .iter()
            .copied()
            .filter(|&v| g.coord(v, axis) == at)
            .collect();
        let marked: Vec<usize> = tube
            .marked
            .iter()
            .copied()
            .filter(|&v| g.coord(v, axis) == at)
            .collect();
        RegionSet::new(g, RegionKind::Section, members, marked)
    }

    /// Axis-aligned block of side `side` with its low corner at `corner`.
    pub fn cube(g: &TorusGraph, corner: usize, side: usize) -> Result<Self> {
        if side == 0 || side > g.n() {
            return Err(Error::InvalidArgument(format!("bad cube side {side}")));
        }
        let base = g.coords(corner);
        let members = (0..g.vertex_count())
            .filter(|&v| (0..g.d()).all(|i| (g.coord(v, i) + g.n() - base[i as usize]) % g.n() < side));
        RegionSet::new(g, RegionKind::Cube, members, [])
    }

    /// Replaces the marking with the members in `marked`.
    pub fn with_marked(mut self, marked: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = marked.into_iter().collect();
        if !set.iter().all(|v| self.members.binary_search(v).is_ok()) {
            return Err(Error::InvalidArgument("marked vertices must be members".into()));
        }
        self.marked = set.into_iter().collect();
        Ok(self)
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &RegionSet) -> bool {
        self.members.iter().all(|&v| other.contains(v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    /// Member count per region.
    pub degree: Vec<usize>,
    /// Marked count per region.
    pub distribution: Vec<usize>,
    /// `|marked| / |members|` per region.
    pub relative_distribution: Vec<f64>,
}

pub fn region_stats(regions: &[RegionSet]) -> Result<RegionStats> {
    if let Some(i) = regions.iter().position(|r| r.members.is_empty()) {
        return Err(Error::EmptyRegion(format!("region {i} has no members")));
    }
    Ok(RegionStats {
        degree: regions.iter().map(|r| r.members.len()).collect(),
        distribution: regions.iter().map(|r| r.marked.len()).collect(),
        relative_distribution: regions
            .iter()
            .map(|r| r.marked.len() as f64 / r.members.len() as f64)
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiantReport {
    pub is_giant: bool,
    /// The largest marked component (ties to the smallest first vertex).
    pub component: Vec<usize>,
    /// `|component| / |tube|`.
    pub ratio: f64,
    pub threshold: f64,
    pub component_count: usize,
    /// Every marked component meets the largest one, i.e. there is at most one.
    pub all_components_meet_giant: bool,
}

/// Connected components of the marked vertices of `tube`, joined by
/// surviving edges between marked vertices.
pub fn giant_detect(tube: &RegionSet, g: &TorusGraph, threshold: f64) -> Result<GiantReport> {
    if tube.members.is_empty() {
        return Err(Error::EmptyRegion("tube has no members".into()));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside [0, 1]")));
    }
    let marked: BTreeSet<usize> = tube.marked.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    for &start in &marked {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for (w, _) in g.incident(u) {
                if marked.contains(&w) && seen.insert(w) {
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort();
        components.push(comp);
    }
    let component = components
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .cloned()
        .unwrap_or_default();
    let ratio = component.len() as f64 / tube.members.len() as f64;
    Ok(GiantReport {
        is_giant: !component.is_empty() && ratio >= threshold,
        component,
        ratio,
        threshold,
        component_count: components.len(),
        all_components_meet_giant: components.len() <= 1,
    })
}
