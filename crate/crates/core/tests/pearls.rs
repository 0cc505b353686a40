mod common;

use oddcycle::game::{DeterministicStrategy, GameSpec};
use oddcycle::pearls::{
    blocker_integral_bound, diamond_norm, gap_overlap, lambda_measure, max_consistent_region, question_neighbourhood,
    value_via_regions, DiamondMethod, DiamondVector,
};
use oddcycle::report::Fraction;
use oddcycle::rng::stream_rng;
use proptest::prelude::*;
use rand::Rng;

fn exact(v: &[f64]) -> f64 {
    diamond_norm(
        &DiamondVector::new(v.to_vec()).unwrap(),
        DiamondMethod::ExactEnumeration,
    )
    .unwrap()
    .value
}

/// `y − t` coordinatewise, `t` a bit mask.
fn minus(y: usize, t: u32, n: usize, d: u32) -> usize {
    let (mut out, mut place, mut rest) = (0, 1, y);
    for i in 0..d {
        let yi = rest % n;
        rest /= n;
        out += ((yi + n - ((t >> i) & 1) as usize) % n) * place;
        place *= n;
    }
    out
}

/// Size of the largest subset of `Q_y` on which one Bob answer wins
/// against every member, by trying every subset.
fn largest_consistent_subset(s_a: &[u32], y: usize, n: usize, d: u32) -> usize {
    let ts: Vec<u32> = (0..1u32 << d).collect();
    let mut best = 0;
    for subset in 0u32..1 << ts.len() {
        let members: Vec<u32> = ts.iter().copied().filter(|&t| subset >> t & 1 == 1).collect();
        let ok = (0..1u32 << d).any(|b| members.iter().all(|&t| s_a[minus(y, t, n, d)] ^ b == t));
        if ok {
            best = best.max(members.len());
        }
    }
    best
}

#[test]
fn hand_enumerated_regions() {
    let s = [0, 1, 0];
    let r0 = max_consistent_region(&s, 0, 3, 1).unwrap();
    assert_eq!(r0.members.len(), 1);
    let r1 = max_consistent_region(&s, 1, 3, 1).unwrap();
    assert_eq!(r1.members, vec![0, 1]);
    let mut q0 = question_neighbourhood(0, 3, 1);
    q0.sort();
    assert_eq!(q0, vec![0, 2]);
    assert_eq!(value_via_regions(&s, 3, 1).unwrap(), Fraction::new(5, 6));
}

#[test]
fn region_sizes_match_subset_exhaustion() {
    let mut rng = stream_rng(23, 0);
    for (n, d) in [(3usize, 1u32), (5, 1), (3, 2), (5, 2), (3, 3)] {
        let q = n.pow(d);
        for _ in 0..20 {
            let s: Vec<u32> = (0..q).map(|_| rng.random_range(0..1 << d)).collect();
            for y in 0..q {
                let r = max_consistent_region(&s, y, n, d).unwrap();
                assert_eq!(
                    r.members.len(),
                    largest_consistent_subset(&s, y, n, d),
                    "n={n} d={d} y={y}"
                );
                let q_y = question_neighbourhood(y, n, d);
                assert!(r.members.iter().all(|x| q_y.contains(x)));
            }
        }
    }
}

#[test]
fn region_value_equals_best_response_value() {
    let mut rng = stream_rng(29, 0);
    for (n, d) in [(3usize, 2u32), (5, 2), (3, 3)] {
        let game = GameSpec::odd_cycle(n, d).unwrap();
        let parity = DeterministicStrategy::parity(n).tensor_power(d).unwrap().alice_table;
        assert_eq!(
            value_via_regions(&parity, n, d).unwrap(),
            common::best_response_value(&game, &parity)
        );
        for _ in 0..10 {
            let s: Vec<u32> = (0..n.pow(d)).map(|_| rng.random_range(0..1 << d)).collect();
            let a = value_via_regions(&s, n, d).unwrap();
            let b = common::best_response_value(&game, &s);
            assert!((a.to_f64() - b.to_f64()).abs() < 1e-12);
        }
    }
}

#[test]
fn diamond_norm_examples() {
    assert_eq!(exact(&[1.0, 1.0]), 1.0);
    assert_eq!(exact(&[3.0, 4.0]), 4.0);
    let l = lambda_measure(&[
        DiamondVector::new(vec![1.0, 1.0]).unwrap(),
        DiamondVector::new(vec![0.0; 4]).unwrap(),
    ])
    .unwrap();
    assert_eq!(l.per_segment, vec![0.5, 0.0]);
    assert_eq!(l.total, 0.5);
}

#[test]
fn gap_examples() {
    let r = gap_overlap(&[1, 3, 5], &[1, 4, 5], 1..=6).unwrap();
    assert_eq!(r.overlap_count, 2);
    assert_eq!(r.gaps.len(), 1);
    assert_eq!(r.max_gap_magnitude, 2);
    let same = gap_overlap(&[2, 4], &[2, 4], 1..=6).unwrap();
    assert_eq!((same.overlap_count, same.gaps.len()), (0, 0));
    let single = gap_overlap(&[1], &[], 1..=6).unwrap();
    assert_eq!(single.max_gap_magnitude, 1);
}

#[test]
fn integral_bound_examples() {
    let steps = vec![vec![1, 0], vec![0, 1], vec![-1, -1]];
    let b = blocker_integral_bound(&steps, 9, 0.01).unwrap();
    // |(1,0)|⋄ = |(0,1)|⋄ = 1 and |(−1,−1)|⋄ = 1.
    assert!((b.bound - (1.0 - 1.01 / 9.0 * 3.0)).abs() < 1e-12);
    let axis = vec![vec![1, 0]; 5];
    let a = blocker_integral_bound(&axis, 5, 0.1).unwrap();
    assert!(a.clamped && a.bound == 0.0 && a.raw < 0.0);
    assert!(blocker_integral_bound(&[vec![1, 0]], 5, 0.1).is_err());
}

#[test]
fn integral_bound_never_exceeds_a_measured_pearl_value() {
    // The straight blocker along axis 1 at column 0: the matching strategy
    // flips its answer across that cut.
    for n in [3usize, 5, 7, 9] {
        let steps = vec![vec![0, 1]; n];
        let bound = blocker_integral_bound(&steps, n, 0.01).unwrap().bound;
        let s = DeterministicStrategy::parity(n).tensor_power(2).unwrap().alice_table;
        assert!(bound <= value_via_regions(&s, n, 2).unwrap().to_f64());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn diamond_is_homogeneous_and_sandwiched(v in prop::collection::vec(-100.0f64..100.0, 0..12), c in -8.0f64..8.0) {
        let x = exact(&v);
        let scaled: Vec<f64> = v.iter().map(|a| c * a).collect();
        prop_assert!((exact(&scaled) - c.abs() * x).abs() <= 1e-9 * (1.0 + x * c.abs()));
        let l2 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let linf = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        prop_assert!(l2 / 2f64.sqrt() <= x + 1e-9 && x <= l2 + 1e-9);
        prop_assert!(linf <= x + 1e-9);
    }

    #[test]
    fn diamond_triangle_inequality(
        v in prop::collection::vec(-10.0f64..10.0, 6),
        w in prop::collection::vec(-10.0f64..10.0, 6),
    ) {
        let sum: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
        prop_assert!(exact(&sum) <= exact(&v) + exact(&w) + 1e-9);
    }

    #[test]
    fn monte_carlo_converges_to_enumeration(v in prop::collection::vec(-5.0f64..5.0, 1..10), seed in any::<u64>()) {
        let dv = DiamondVector::new(v.clone()).unwrap();
        let mc = diamond_norm(&dv, DiamondMethod::MonteCarlo { samples: 20_000, seed }).unwrap();
        let se = mc.std_error.unwrap();
        prop_assert!((mc.value - exact(&v)).abs() <= 5.0 * se + 1e-9);
    }
}
