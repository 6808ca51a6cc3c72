mod common;

use aeroprint::geometry::segment_min_distance;

#[test]
fn closed_form_distance_matches_sampling() {
    for (k, (a, b)) in common::random_segment_pairs(7, 1000).iter().enumerate() {
        let exact = segment_min_distance(a, b).unwrap();
        let sampled = common::sampled_segment_distance(a, b);
        assert!((exact - sampled).abs() <= 1e-6, "pair {k}: {exact} vs {sampled}");
    }
}
