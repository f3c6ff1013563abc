use proptest::prelude::*;
use taxotrack_core::comparison::{extract_sample, window_bounds};
use taxotrack_core::geo::turning_deviation;
use taxotrack_core::outlier::{scale_scores, score_node};
use taxotrack_core::signature::{distance_geometry_signatures, part_range};
use taxotrack_core::*;

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-179.0..179.0f64, -80.0..80.0f64)
}

fn trajectory(min: usize, max: usize) -> impl Strategy<Value = Trajectory> {
    prop::collection::vec((point(), 1.0..600.0f64), min..max).prop_map(|steps| {
        let mut t = 0.0;
        let pts = steps
            .into_iter()
            .map(|((lon, lat), dt)| {
                t += dt;
                TrajectoryPoint::new(lon, lat, t).unwrap()
            })
            .collect();
        Trajectory::with_features("p", pts).unwrap()
    })
}

proptest! {
    #[test]
    fn haversine_is_a_symmetric_nonnegative_distance(a in point(), b in point()) {
        let p = TrajectoryPoint::new(a.0, a.1, 0.0).unwrap();
        let q = TrajectoryPoint::new(b.0, b.1, 0.0).unwrap();
        let d = haversine_distance(&p, &q);
        prop_assert!(d >= 0.0);
        prop_assert!((d - haversine_distance(&q, &p)).abs() <= 1e-6);
        prop_assert!(d <= std::f64::consts::PI * EARTH_RADIUS_M + 1e-6);
    }

    #[test]
    fn bearings_and_turns_in_range(a in point(), b in point(), f in 0.0..360.0f64, g in 0.0..360.0f64) {
        let p = TrajectoryPoint::new(a.0, a.1, 0.0).unwrap();
        let q = TrajectoryPoint::new(b.0, b.1, 0.0).unwrap();
        let br = initial_bearing(&p, &q);
        prop_assert!((0.0..360.0).contains(&br));
        let turn = turning_deviation(f, g);
        prop_assert!((0.0..=180.0).contains(&turn));
        prop_assert!((turn - turning_deviation(g, f)).abs() < 1e-9);
    }

    #[test]
    fn point_features_are_padded_and_finite(t in trajectory(2, 60)) {
        let f = compute_point_features(&t).unwrap();
        prop_assert_eq!(f.len(), t.len());
        prop_assert_eq!(f.speed[0], 0.0);
        prop_assert_eq!(f.acceleration[0], 0.0);
        prop_assert_eq!(f.angle[0], 0.0);
        prop_assert_eq!(f.angle[t.len() - 1], 0.0);
        prop_assert_eq!(f.distance[0], 0.0);
        for s in [&f.speed, &f.acceleration, &f.angle, &f.distance, &f.bearing] {
            prop_assert!(s.iter().all(|v| v.is_finite()));
        }
        prop_assert!(f.angle.iter().all(|a| (0.0..=180.0).contains(a)));
        prop_assert!(f.speed.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn vectors_have_72_finite_values(t in trajectory(2, 80)) {
        let v = vectorize_trajectory(&t).unwrap();
        prop_assert_eq!(v.values.len(), 72);
        prop_assert!(v.values.iter().all(|x| x.is_finite()));
        prop_assert!(v.values[57..].iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn summary_is_ordered(values in prop::collection::vec(-1e6..1e6f64, 1..300)) {
        let s = summarize_series(&values).unwrap();
        let q = [s.quant_min, s.quant_05, s.quant_10, s.quant_25, s.quant_median, s.quant_75, s.quant_90, s.quant_95, s.quant_max];
        prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(s.sd >= 0.0 && s.mad >= 0.0 && s.iqr >= 0.0 && s.range >= 0.0);
        prop_assert!(s.mean >= s.quant_min - 1e-9 * s.quant_min.abs() && s.mean <= s.quant_max + 1e-9 * s.quant_max.abs());
        prop_assert!(s.to_array().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn partitions_tile(n in 0usize..500, k in 1usize..=5) {
        let mut next = 0;
        for j in 1..=k {
            let r = part_range(n, k, j);
            prop_assert_eq!(r.start, next);
            prop_assert!(r.len() + 1 >= n / k && r.len() <= n / k + 1);
            next = r.end;
        }
        prop_assert_eq!(next, n);
    }

    #[test]
    fn signature_segments_share_the_partition(t in trajectory(2, 60), k in 1u8..=5, j in 1u8..=5) {
        prop_assume!(j <= k);
        let sig = SignatureIndex::new(k, j).unwrap();
        let w = segment_for_signature(&t, sig).unwrap();
        prop_assert_eq!(w.start..w.end, part_range(t.len(), k as usize, j as usize));
        prop_assert_eq!(w.statistic, distance_geometry_signatures(&t.points)[sig.ordinal()]);
    }

    #[test]
    fn scaling_is_monotone_and_bounded(raw in prop::collection::vec(0.0..1.0f64, 1..200)) {
        let s = scale_scores(&raw);
        prop_assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                if raw[i] < raw[j] {
                    prop_assert!(s[i] < s[j]);
                } else if raw[i] == raw[j] {
                    prop_assert_eq!(s[i], s[j]);
                }
            }
        }
    }

    #[test]
    fn zones_partition_the_square(x in 0.0..=1.0f64, y in 0.0..=1.0f64) {
        let zone = assign_zone(x, y).unwrap();
        let fired = [
            x < 0.5 && y < 0.5,
            !(x < 0.5 && y < 0.5) && y > 0.5 && x < y - 0.5,
            !(x < 0.5 && y < 0.5) && !(y > 0.5 && x < y - 0.5) && x > 0.5 && y < x - 0.5,
        ];
        let expected = fired.iter().position(|&f| f).unwrap_or(3);
        prop_assert_eq!(zone as usize, expected);
    }

    #[test]
    fn sample_window_contains_anchor(t in trajectory(2, 120), var in 0usize..57) {
        let v = Variable::from_index(var).unwrap();
        let w = extract_sample(&t, v).unwrap();
        let a = w.anchor.unwrap();
        prop_assert!(w.start <= a && a < w.end);
        prop_assert_eq!(w.points.len(), w.len());
        prop_assert_eq!(w.features.len(), w.len());
        prop_assert_eq!(w.len(), t.len().min(10).min(w.end - w.start));
        let (s, e) = window_bounds(a, t.len(), 5, 4);
        prop_assert_eq!((w.start, w.end), (s, e));
        if a >= 5 && a + 4 < t.len() {
            prop_assert_eq!(w.len(), 10);
        }
    }

    #[test]
    fn combination_validation_is_symmetric(a in 0usize..6, b in 0usize..6) {
        let (na, nb) = (TaxonomyNode::ALL[a], TaxonomyNode::ALL[b]);
        prop_assert_eq!(validate_combination(na, nb).ok(), validate_combination(nb, na).ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn node_scores_bounded_and_extreme(rows in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 72), 3..25)) {
        let vectors: Vec<FeatureVector> = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| FeatureVector::new(format!("t{i}"), r).unwrap())
            .collect();
        for node in TaxonomyNode::ALL {
            let s = score_node(&vectors, node, &DbosOptions::default()).unwrap();
            prop_assert!(s.scores.iter().all(|v| (0.0..=1.0).contains(v)));
            let distinct_raw = s.raw.iter().any(|&r| r != s.raw[0]);
            if distinct_raw {
                prop_assert!(s.scores.contains(&1.0) && s.scores.contains(&0.0));
            } else {
                prop_assert!(s.scores.iter().all(|&v| v == 0.0));
            }
        }
        let heat = frequency_heatmap(&vectors, &DbosOptions::default()).unwrap();
        prop_assert!(heat.rows.iter().all(|r| r.counts.iter().sum::<usize>() == vectors.len()));
    }
}
