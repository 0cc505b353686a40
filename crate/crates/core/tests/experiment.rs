mod common;

use std::sync::OnceLock;

use oddcycle::experiment::{
    estimate_events, proposition_prefactors, ratio_r, restricted_values, restricted_values_unchecked,
    sample_torical_graph, standard_tube_and_section, ContractionClass, ContractionMap, ExperimentConfig,
    ExperimentReport, FoamEventParams, RemovalLaw,
};
use oddcycle::quantum::AngleSearch;
use oddcycle::report::to_json_string;
use oddcycle::torus::{BlockerMode, Edge, TorusGraph};
use serde_json::Value;

fn search() -> AngleSearch {
    AngleSearch {
        starts: 2,
        max_sweeps: 100,
        seed: 1,
        tolerance: 1e-12,
    }
}

fn transverse_cuts(n: usize) -> TorusGraph {
    let mut g = TorusGraph::new(n, 2).unwrap();
    for k in 0..n {
        g.remove_edge(Edge(g.vertex(&[0, k]).unwrap(), 0)).unwrap();
        g.remove_edge(Edge(g.vertex(&[k, 0]).unwrap(), 1)).unwrap();
    }
    g
}

fn default_n3() -> &'static ExperimentReport {
    static REPORT: OnceLock<ExperimentReport> = OnceLock::new();
    REPORT.get_or_init(|| estimate_events(&ExperimentConfig::default()).unwrap())
}

#[test]
fn identity_contraction_keeps_the_value() {
    let g = TorusGraph::new(3, 2).unwrap();
    for depth in [1, 2] {
        let v = restricted_values_unchecked(&g, 3, depth, &search()).unwrap().unwrap();
        assert_eq!(v.image, v.preimage);
        assert_eq!(v.q_restricted, v.q_full);
        assert_eq!(ratio_r(&v).unwrap(), 0.0);
    }
    assert!(restricted_values(&g, 3, 1, &search()).is_err());
}

#[test]
fn no_op_contraction_keeps_the_value() {
    // Depth-2 questions live on the slice spanned by axes 0 and 1, so an
    // axis-2 edge lies on no elementary path.
    let mut g = TorusGraph::new(3, 3).unwrap();
    g.remove_edge(Edge(g.vertex(&[1, 1, 1]).unwrap(), 2)).unwrap();
    let v = restricted_values_unchecked(&g, 3, 2, &search()).unwrap().unwrap();
    assert_eq!(v.image, v.preimage);
    assert_eq!(v.q_restricted, v.q_full);
}

#[test]
fn transverse_cut_shrinks_the_image() {
    let g = transverse_cuts(3);
    let v = restricted_values(&g, 3, 2, &search()).unwrap().unwrap();
    // Count by hand: a pair (x, t) survives iff its path crosses no cut.
    let map = ContractionMap::new(&g, 2).unwrap();
    let mut survivors = 0;
    for x0 in 0..3usize {
        for x1 in 0..3usize {
            for t in 0..4u32 {
                let (t0, t1) = ((t & 1) as usize, (t >> 1) as usize);
                let cut0 = t0 == 1 && x0 == 0;
                let cut1 = t1 == 1 && x1 == 0;
                survivors += usize::from(!cut0 && !cut1);
            }
        }
    }
    assert_eq!(map.image, survivors);
    assert_eq!(v.image, survivors);
    assert!(v.image < v.preimage);
    assert!(v.q_restricted.is_finite() && v.q_full.is_finite());
    assert!(ratio_r(&v).unwrap().is_finite());
}

#[test]
fn every_size_class_has_a_witness() {
    let full = ContractionMap::new(&TorusGraph::new(3, 2).unwrap(), 2).unwrap();
    assert_eq!(full.class(), ContractionClass::NearOne);
    let cut = ContractionMap::new(&transverse_cuts(3), 2).unwrap();
    assert_eq!(cut.class(), ContractionClass::Mixed);
    let mut g = TorusGraph::new(3, 2).unwrap();
    for v in 0..9 {
        g.remove_edge(Edge(v, 0)).unwrap();
    }
    assert_eq!(
        ContractionMap::new(&g, 2).unwrap().class(),
        ContractionClass::MuchLarger
    );
}

#[test]
fn acceptance_rate_matches_the_exhaustive_count() {
    // Every 6-subset of the 18 edges of T_3^2, checked against cycle enumeration.
    let cycles = common::simple_cycles(3, 2);
    let mut blocking = 0u64;
    let mut total = 0u64;
    for mask in 0u64..1 << 18 {
        if mask.count_ones() == 6 {
            total += 1;
            blocking += u64::from(common::oracle_blocked(&cycles, mask, BlockerMode::OddOnly));
        }
    }
    let p = blocking as f64 / total as f64;
    assert!(p > 0.0 && p < 1.0);
    let draws = 100;
    let attempts: u64 = (0..draws)
        .map(|seed| {
            sample_torical_graph(3, 2, RemovalLaw::Uniform { min: 6, max: 6 }, seed)
                .unwrap()
                .attempts
        })
        .sum();
    let observed = draws as f64 / attempts as f64;
    // Attempts per draw are geometric, so the mean over 100 draws has a
    // relative spread of about 10%.
    assert!((observed / p - 1.0).abs() < 0.4, "observed {observed}, exact {p}");
}

#[test]
fn empty_removal_is_never_accepted() {
    let r = sample_torical_graph(3, 2, RemovalLaw::Uniform { min: 0, max: 0 }, 1);
    assert!(r.is_err());
}

#[test]
fn vanishing_epsilon_counts_positive_ratios() {
    let config = ExperimentConfig {
        samples: 30,
        epsilon1: 1e-300,
        epsilon2: 1e-300,
        ..ExperimentConfig::default()
    };
    let r = estimate_events(&config).unwrap();
    assert_eq!(r.e1.phat, r.r1.unwrap().positive_fraction);
    assert_eq!(r.e2.phat, r.r2.unwrap().positive_fraction);
}

#[test]
fn ratios_are_finite_over_a_hundred_samples() {
    let config = ExperimentConfig {
        samples: 100,
        seed: 7,
        ..ExperimentConfig::default()
    };
    let r = estimate_events(&config).unwrap();
    assert_eq!(r.records.len(), 100);
    for rec in &r.records {
        assert!(rec.r1.is_finite() && rec.r2.is_finite() && rec.relative_gap.is_finite());
        assert!(rec.image2 <= 36);
    }
    assert_eq!(r.classes.near_zero, 0);
    assert!(r.min_size_ratio >= 1.0);
}

#[test]
fn identity_contraction_prefactors() {
    let g = TorusGraph::new(3, 2).unwrap();
    let (tube, section) = standard_tube_and_section(&g).unwrap();
    let p = proposition_prefactors(&g, &tube, &section, &FoamEventParams::default()).unwrap();
    assert_eq!(p.f1, p.f4);
    assert_eq!(p.f3, 9);
    let f = |x: usize| x as f64;
    let expected = f(p.f1) * f(p.f2) * f(p.f4) * f(p.f5) / (f(p.f3) * f(p.f6));
    assert_eq!(p.product, Some(expected));
}

#[test]
fn default_run_half_widths_and_sweep_regimes() {
    let r = default_n3();
    assert!(r.e1.halfwidth <= 0.05 && r.e2.halfwidth <= 0.05);
    for sweep in &r.sweeps {
        // Tightening the sandwich can only lose samples, so the ratio is at
        // least one below Θ, at most one above it and nonincreasing in Θ₁.
        let ratios: Vec<(f64, f64)> = sweep.points.iter().map(|p| (p.theta, p.ratio.unwrap())).collect();
        for &(theta, ratio) in &ratios {
            if theta < sweep.reference_theta {
                assert!(ratio >= 1.0, "{} at Θ₁ = {theta}: {ratio}", sweep.event);
            } else {
                assert!(ratio <= 1.0, "{} at Θ₁ = {theta}: {ratio}", sweep.event);
            }
        }
        assert!(ratios.windows(2).all(|w| w[1].1 <= w[0].1));
    }
    // The single-game ratio is the same on every sample and sits away from
    // ε, so the grid points on either side of Θ both give ratio one.
    let e1 = &r.sweeps[0];
    let below = e1.points.iter().rfind(|p| p.theta < e1.reference_theta).unwrap();
    let above = e1.points.iter().find(|p| p.theta > e1.reference_theta).unwrap();
    assert_eq!((below.ratio, above.ratio), (Some(1.0), Some(1.0)));
}

#[test]
fn default_run_is_reproducible_on_more_threads() {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let again = pool.install(|| estimate_events(&ExperimentConfig::default()).unwrap());
    assert_eq!(to_json_string(&again).unwrap(), to_json_string(default_n3()).unwrap());
}

/// Scalar fields of the seeded default run, archived once. Set
/// `ODDCYCLE_BLESS=1` to rewrite the fixture after an intended change.
#[test]
fn default_run_matches_the_archived_fixture() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/default-n3.json");
    let r = default_n3();
    let current = serde_json::json!({
        "attempts": r.attempts,
        "e1": r.e1.count,
        "e2": r.e2.count,
        "e3": r.e3.count,
        "foam_event": r.foam_event.count,
        "classes": r.classes,
        "min_size_ratio": r.min_size_ratio,
        "prefactor_mean": r.prefactors.mean,
        "mean_product": r.prefactors.mean_product,
        "r1": r.r1,
        "r2": r.r2,
        "relative_gap": r.relative_gap,
        "q_full": [r.full1.q_full, r.full2.q_full],
    });
    if std::env::var_os("ODDCYCLE_BLESS").is_some() {
        std::fs::write(path, to_json_string(&current).unwrap()).unwrap();
    }
    let archived: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_close(&current, &archived, "");
}

fn assert_close(a: &Value, b: &Value, at: &str) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            assert_eq!(x.len(), y.len(), "{at}");
            for (k, v) in x {
                assert_close(v, &y[k], &format!("{at}.{k}"));
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len(), "{at}");
            x.iter()
                .zip(y)
                .enumerate()
                .for_each(|(i, (u, v))| assert_close(u, v, &format!("{at}.{i}")));
        }
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()), "{at}: {x} vs {y}");
        }
        _ => assert_eq!(a, b, "{at}"),
    }
}
