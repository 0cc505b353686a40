use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{question_neighbourhood, value_via_regions};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::torus::{verify_blocker, BlockerMode, CyclePath, Step, TorusGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthOptions {
    pub seed: u64,
    /// Cap on the number of points in the cycle.
    pub max_points: usize,
    /// Refuse graphs that do not block every odd cycle.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum GrowthEvent {
    Centre {
        y: usize,
    },
    Added {
        point: usize,
        distance: usize,
        consistent: bool,
    },
    Closed {
        winding: Vec<i64>,
        even: bool,
        homotopy_zero: bool,
    },
    Stopped {
        reason: String,
    },
}

/// `1.5n ≤ 2n²(1 − v(S_A))`, reported and never asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricDiagnostic {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub y: Option<usize>,
    pub points: Vec<usize>,
    /// The closed cycle, when growth returned to its first point.
    pub cycle: Option<CyclePath>,
    /// Every step joins two points whose answers differ exactly in the step's coordinate.
    pub consistent: bool,
    pub even: Option<bool>,
    pub homotopy_zero: Option<bool>,
    pub reason: Option<String>,
    pub trace: Vec<GrowthEvent>,
    pub isoperimetric: IsoperimetricDiagnostic,
}

/// Grows a cycle of mutually consistent points outside `Q_y`.
///
/// A seeded centre `y` is drawn, and the first point is a seeded choice
/// among vertices at L∞ distance 1 from `Q_y`. Each later point is a
/// surviving neighbour of the last one, outside `Q_y`, not yet used, and
/// consistent with it (`S_A` differs exactly in the step's coordinate);
/// among those the one closest to `Q_y` in L∞ distance wins, ties to the
/// smaller index. The cycle closes as soon as it has three points and the
/// first point is a consistent neighbour of the last. Consistency along
/// every step makes the winding of a closed cycle even in every coordinate.
pub fn grow_consistent_cycle(g: &TorusGraph, s_a: &[u32], opts: &GrowthOptions) -> Result<GrowthReport> {
    let n = g.n();
    let d = g.d();
    if opts.strict && !verify_blocker(g, BlockerMode::OddOnly).blocked {
        return Err(Error::InvalidArgument("graph does not block every odd cycle".into()));
    }
    let v = value_via_regions(s_a, n, d)?.to_f64();
    let nf = n as f64;
    let iso = IsoperimetricDiagnostic {
        lhs: 1.5 * nf,
        rhs: 2.0 * nf * nf * (1.0 - v),
        holds: 1.5 * nf <= 2.0 * nf * nf * (1.0 - v),
    };
    let mut report = GrowthReport {
        y: None,
        points: Vec::new(),
        cycle: None,
        consistent: true,
        even: None,
        homotopy_zero: None,
        reason: None,
        trace: Vec::new(),
        isoperimetric: iso,
    };
    if opts.max_points == 0 {
        return Ok(report);
    }
    let mut rng = stream_rng(opts.seed, 0);
    let y = rng.random_range(0..g.vertex_count());
    report.y = Some(y);
    report.trace.push(GrowthEvent::Centre { y });
    let q = question_neighbourhood(y, n, d);
    let in_q = |x: usize| q.contains(&x);
    let dist = |x: usize| q.iter().map(|&p| g.linf_distance(x, p)).min().unwrap_or(0);

    let starts: Vec<usize> = (0..g.vertex_count())
        .filter(|&x| !in_q(x) && !g.is_vertex_removed(x) && dist(x) == 1)
        .collect();
    if starts.is_empty() {
        return Ok(stop(report, "no extension: no vertex outside Q_y is adjacent to it"));
    }
    let x0 = starts[rng.random_range(0..starts.len())];
    let mut used = vec![false; g.vertex_count()];
    used[x0] = true;
    report.points.push(x0);
    report.trace.push(GrowthEvent::Added {
        point: x0,
        distance: 1,
        consistent: true,
    });
    let mut steps: Vec<Step> = Vec::new();
    let consistent_step = |from: usize, step: Step| {
        let to = g.step_target(from, step);
        s_a[from] ^ s_a[to] == 1 << step.edge.1
    };

    loop {
        let cur = *report.points.last().expect("nonempty");
        let moves = g.incident(cur);
        if report.points.len() >= 3 {
            if let Some(&(_, step)) = moves.iter().find(|(w, s)| *w == x0 && consistent_step(cur, *s)) {
                steps.push(step);
                let cycle = CyclePath::from_steps(g, x0, steps);
                let even = !cycle.odd();
                let zero = !cycle.nontrivial();
                report.trace.push(GrowthEvent::Closed {
                    winding: cycle.winding.clone(),
                    even,
                    homotopy_zero: zero,
                });
                report.even = Some(even);
                report.homotopy_zero = Some(zero);
                report.cycle = Some(cycle);
                return Ok(report);
            }
        }
        if report.points.len() >= opts.max_points {
            return Ok(stop(report, "reached the point limit before closing"));
        }
        let next = moves
            .iter()
            .filter(|(w, s)| !in_q(*w) && !used[*w] && consistent_step(cur, *s))
            .map(|&(w, s)| (dist(w), w, s))
            .min_by_key(|&(dd, w, _)| (dd, w));
        match next {
            Some((distance, w, s)) => {
                used[w] = true;
                steps.push(s);
                report.points.push(w);
                report.trace.push(GrowthEvent::Added {
                    point: w,
                    distance,
                    consistent: true,
                });
            }
            None => return Ok(stop(report, "no extension: no consistent unused neighbour")),
        }
    }
}

fn stop(mut report: GrowthReport, reason: &str) -> GrowthReport {
    report.reason = Some(reason.to_string());
    report.trace.push(GrowthEvent::Stopped {
        reason: reason.to_string(),
    });
    report
}
