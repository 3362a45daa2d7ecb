mod support;

use nr2::membership::{benefits, desirability_scores};
use nr2::{
    comparison_matrix, desirability, fuzzify, pairwise_from_scores, pairwise_majority, rank,
    row_minima, BenefitVector, MembershipProvider, RouteId, RouteMetrics, RouteRanking,
};
use proptest::prelude::*;

fn bv(d: f64, l: f64, t: f64) -> BenefitVector {
    BenefitVector::new(d, l, t).unwrap()
}

/// Centroid of a triangle with the given vertices.
fn triangle_centroid(a: f64, b: f64, c: f64) -> f64 {
    (a + b + c) / 3.0
}

#[test]
fn single_rule_centroids() {
    let good = desirability(&bv(1.0, 1.0, 1.0));
    let poor = desirability(&bv(0.0, 0.0, 0.0));
    assert!(
        (good - triangle_centroid(0.6, 1.0, 1.0)).abs() < 0.002,
        "{good}"
    );
    assert!(
        (poor - triangle_centroid(0.0, 0.0, 0.4)).abs() < 0.002,
        "{poor}"
    );
    assert_eq!(desirability(&bv(0.5, 0.5, 0.5)), 0.5);
}

const ROUNDING: f64 = 1e-12;

#[test]
fn monotone_on_grid() {
    let g: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let mut table = vec![0.0; 11 * 11 * 11];
    for a in 0..11 {
        for b in 0..11 {
            for c in 0..11 {
                table[(a * 11 + b) * 11 + c] = desirability(&bv(g[a], g[b], g[c]));
            }
        }
    }
    let at = |a: usize, b: usize, c: usize| table[(a * 11 + b) * 11 + c];
    // Mathematically equal values may differ in the last bit.
    let rises = |lo: f64, hi: f64| lo <= hi + ROUNDING;
    for a in 0..11 {
        for b in 0..11 {
            for c in 1..11 {
                assert!(
                    rises(at(a, b, c - 1), at(a, b, c)),
                    "lifetime step at ({a}, {b}, {c})"
                );
                assert!(
                    rises(at(a, c - 1, b), at(a, c, b)),
                    "load step at ({a}, {c}, {b})"
                );
                assert!(
                    rises(at(c - 1, a, b), at(c, a, b)),
                    "delay step at ({c}, {a}, {b})"
                );
            }
        }
    }
    assert!(table.iter().all(|&d| d > 0.0 && d < 1.0));
}

#[test]
fn majority_cycle() {
    let table = [bv(0.9, 0.5, 0.1), bv(0.5, 0.1, 0.9), bv(0.1, 0.9, 0.5)];
    let p = pairwise_majority(&table, &RouteId::default_ids(3)).unwrap();
    // counted by hand: each route beats the next on two of three metrics
    let third = 1.0 / 3.0;
    let two_thirds = 2.0 / 3.0;
    assert_eq!(p.get(0, 1), third);
    assert_eq!(p.get(1, 0), two_thirds);
    assert_eq!(p.get(1, 2), third);
    assert_eq!(p.get(2, 1), two_thirds);
    assert_eq!(p.get(2, 0), third);
    assert_eq!(p.get(0, 2), two_thirds);

    let c = comparison_matrix(&p).unwrap();
    // r1 over r2, r2 over r3, r3 over r1
    assert_eq!(c.get(0, 1), 1.0);
    assert!(c.get(1, 0) < 1.0);
    assert_eq!(c.get(1, 2), 1.0);
    assert!(c.get(2, 1) < 1.0);
    assert_eq!(c.get(2, 0), 1.0);
    assert!(c.get(0, 2) < 1.0);
    assert!(row_minima(&c).iter().all(|&m| m < 1.0));
}

#[test]
fn majority_dominance() {
    let table = [bv(0.9, 0.8, 0.7), bv(0.2, 0.3, 0.1)];
    let p = pairwise_majority(&table, &RouteId::default_ids(2)).unwrap();
    assert_eq!(p.get(1, 0), 1.0);
    assert_eq!(p.get(0, 1), 0.0);
    let r = rank(&p).unwrap();
    assert_eq!(r.best().id.as_str(), "r1");
    assert_eq!(r.best().score, 1.0);
}

#[test]
fn ratio_best_row_all_ones() {
    let p = pairwise_from_scores(&[0.9, 0.6, 0.3], &RouteId::default_ids(3)).unwrap();
    let c = comparison_matrix(&p).unwrap();
    // enumerate: only the top-scoring row is all ones
    let all_ones: Vec<usize> = (0..3)
        .filter(|&i| c.row(i).iter().all(|&v| v == 1.0))
        .collect();
    assert_eq!(all_ones, vec![0]);
    assert_eq!(rank(&p).unwrap().indices(), vec![0, 1, 2]);
}

#[test]
fn provider_names() {
    assert_eq!(MembershipProvider::DesirabilityRatio(None).name(), "ratio");
    assert_eq!(MembershipProvider::MetricMajority(None).name(), "majority");
}

fn metrics_table() -> impl Strategy<Value = Vec<RouteMetrics>> {
    prop::collection::vec((0.0f64..200.0, 0.0f64..=1.0, 0.0f64..100.0), 1..=6).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (d, l, t))| RouteMetrics::new(format!("r{}", i + 1), d, l, t).unwrap())
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn fuzzify_degrees(x in 0.0f64..=1.0) {
        let d = fuzzify(x);
        prop_assert!(d.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(d.iter().filter(|&&v| v > 0.0).count() <= 2);
    }

    #[test]
    fn ratio_order_follows_scores(scores in prop::collection::vec(0.01f64..=1.0, 1..=8)) {
        let ids = RouteId::default_ids(scores.len());
        let r = rank(&pairwise_from_scores(&scores, &ids).unwrap()).unwrap();
        let by_score = RouteRanking::from_scores(&ids, &scores);
        prop_assert_eq!(r.indices(), by_score.indices());
    }

    #[test]
    fn providers_produce_valid_matrices(table in metrics_table()) {
        for provider in [MembershipProvider::DesirabilityRatio(None), MembershipProvider::MetricMajority(None)] {
            let p = provider.pairwise(&table).unwrap();
            for i in 0..p.len() {
                prop_assert_eq!(p.get(i, i), 1.0);
                for j in 0..p.len() {
                    prop_assert!((0.0..=1.0).contains(&p.get(i, j)));
                }
            }
            prop_assert!(rank(&p).is_ok());
        }
    }

    #[test]
    fn majority_is_complementary(table in metrics_table()) {
        let b = benefits(&table, None).unwrap();
        let ids: Vec<RouteId> = table.iter().map(|m| m.route_id.clone()).collect();
        let p = pairwise_majority(&b, &ids).unwrap();
        for i in 0..p.len() {
            for j in 0..p.len() {
                if i != j {
                    prop_assert_eq!(p.get(i, j) + p.get(j, i), 1.0);
                }
            }
        }
    }

    #[test]
    fn ratio_provider_matches_desirability(table in metrics_table()) {
        let p = MembershipProvider::DesirabilityRatio(None).pairwise(&table).unwrap();
        let scores = desirability_scores(&table, None).unwrap();
        let ids: Vec<RouteId> = table.iter().map(|m| m.route_id.clone()).collect();
        prop_assert_eq!(rank(&p).unwrap().indices(), RouteRanking::from_scores(&ids, &scores).indices());
    }
}
