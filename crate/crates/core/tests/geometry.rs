use taxotrack_core::signature::distance_geometry_signatures;
use taxotrack_core::*;

/// Great-circle destination from `(lat, lon)` after `dist` metres on `bearing` degrees.
fn destination(lat: f64, lon: f64, bearing: f64, dist: f64) -> (f64, f64) {
    let (phi, lambda, theta) = (lat.to_radians(), lon.to_radians(), bearing.to_radians());
    let delta = dist / EARTH_RADIUS_M;
    let phi2 = (phi.sin() * delta.cos() + phi.cos() * delta.sin() * theta.cos()).asin();
    let lambda2 = lambda + (theta.sin() * delta.sin() * phi.cos()).atan2(delta.cos() - phi.sin() * phi2.sin());
    (phi2.to_degrees(), lambda2.to_degrees())
}

fn traj(coords: &[(f64, f64)]) -> Trajectory {
    let pts = coords
        .iter()
        .enumerate()
        .map(|(i, &(lat, lon))| TrajectoryPoint::new(lon, lat, i as f64 * 60.0).unwrap())
        .collect();
    Trajectory::with_features("g", pts).unwrap()
}

/// Points along the great circle leaving `start` on `bearing`, `step` metres apart.
fn great_circle(start: (f64, f64), bearing: f64, step: f64, n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|i| destination(start.0, start.1, bearing, step * i as f64)).collect()
}

#[test]
fn straight_path_signatures_are_one() {
    for n in [2, 7, 23, 100] {
        let t = traj(&great_circle((10.0, 20.0), 63.0, 1500.0, n));
        for s in distance_geometry_signatures(&t.points) {
            assert!((s - 1.0).abs() <= 1e-6, "n={n} s={s}");
        }
    }
}

#[test]
fn out_and_back_has_near_zero_straightness() {
    let mut coords = great_circle((45.0, 7.0), 90.0, 800.0, 11);
    let back: Vec<_> = coords.iter().rev().skip(1).copied().collect();
    coords.extend(back);
    let t = traj(&coords);
    let dg = distance_geometry_signatures(&t.points);
    assert!(dg[0] <= 1e-3, "{}", dg[0]);
    // halves are the two straight legs (11 and 10 points)
    assert!((dg[1] - 1.0).abs() < 1e-6 && (dg[2] - 1.0).abs() < 1e-6);
}

#[test]
fn right_angle_path() {
    // 6 points east then 5 more north, 1 km legs; halves are 6 and 5 points
    let mut coords = great_circle((0.0, 0.0), 90.0, 1000.0, 6);
    let corner = *coords.last().unwrap();
    coords.extend(great_circle(corner, 0.0, 1000.0, 6).into_iter().skip(1));
    let t = traj(&coords);
    let dg = distance_geometry_signatures(&t.points);
    assert!((dg[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3, "{}", dg[0]);
    assert!((dg[1] - 1.0).abs() < 1e-6);
    let f = t.features.as_ref().unwrap();
    assert!((f.angle[5] - 90.0).abs() < 1e-3, "{}", f.angle[5]);
    assert!((f.speed[3] - 1000.0 / 60.0).abs() < 1e-6);
    assert!(f.acceleration[3].abs() < 1e-9);
}

#[test]
fn turn_of_135_degrees() {
    let a = (30.0, 30.0);
    let b = destination(a.0, a.1, 90.0, 5000.0);
    let c = destination(b.0, b.1, 225.0, 5000.0);
    let t = traj(&[a, b, c]);
    let f = t.features.as_ref().unwrap();
    let turn = f.angle[1];
    assert!((turn - 135.0).abs() < 0.1, "{turn}");
    assert_eq!(f.angle[0], 0.0);
    assert_eq!(f.angle[2], 0.0);
}

#[test]
fn vector_shape_and_subspaces() {
    let t = traj(&great_circle((1.0, 1.0), 10.0, 300.0, 40));
    let v = vectorize_trajectory(&t).unwrap();
    assert_eq!(v.values.len(), 72);
    use taxotrack_core::catalog::node_subspace;
    assert_eq!(node_subspace(TaxonomyNode::Kinematic).len(), 38);
    assert_eq!(node_subspace(TaxonomyNode::Geometric).len(), 34);
    assert_eq!(node_subspace(TaxonomyNode::Curvature).len(), 15);
    assert!((v.get(Variable::parse("speed_mean").unwrap()) - 300.0 / 60.0 * 39.0 / 40.0).abs() < 1e-6);
}
