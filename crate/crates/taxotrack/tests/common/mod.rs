#![allow(dead_code)]

use std::fmt::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taxotrack::config::AppConfig;

const R: f64 = 6_371_000.0;

/// Point `dist` metres from (lon, lat) along `bearing` degrees.
pub fn destination(lon: f64, lat: f64, bearing: f64, dist: f64) -> (f64, f64) {
    let (p1, l1, b, d) = (lat.to_radians(), lon.to_radians(), bearing.to_radians(), dist / R);
    let p2 = (p1.sin() * d.cos() + p1.cos() * d.sin() * b.cos()).asin();
    let l2 = l1 + (b.sin() * d.sin() * p1.cos()).atan2(d.cos() - p1.sin() * p2.sin());
    let lon2 = (l2.to_degrees() + 540.0) % 360.0 - 180.0;
    (lon2, p2.to_degrees())
}

/// Random-walk trajectories as CSV (`trajectory_id,timestamp,lat,lon`).
/// Every tenth trajectory is fast and every tenth (offset by one) turns hard,
/// so more than one zone is populated.
pub fn synthetic_csv(n: usize, min_points: usize, max_points: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("trajectory_id,timestamp,lat,lon\n");
    for i in 0..n {
        let len = rng.random_range(min_points..=max_points);
        let (mut lon, mut lat) = (rng.random_range(-100.0..100.0), rng.random_range(-50.0..50.0));
        let mut heading: f64 = rng.random_range(0.0..360.0);
        let mut t = 1_600_000_000.0 + rng.random_range(0.0..1e6f64).floor();
        let speed = match i % 10 {
            0 => rng.random_range(40.0..80.0),
            _ => rng.random_range(2.0..8.0),
        };
        let turn = if i % 10 == 1 { 120.0 } else { 15.0 };
        for _ in 0..len {
            writeln!(out, "traj-{i:04},{t},{lat},{lon}").unwrap();
            let dt = rng.random_range(50.0..70.0f64).floor();
            heading = (heading + rng.random_range(-turn..turn)).rem_euclid(360.0);
            let step = speed * dt * rng.random_range(0.7..1.3);
            (lon, lat) = destination(lon, lat, heading, step);
            t += dt;
        }
    }
    out
}

pub fn write_csv(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

/// Service config rooted in `dir` with a small forest.
pub fn test_config(dir: &Path) -> AppConfig {
    let mut cfg = AppConfig { data_dir: dir.join("data"), ui_dir: dir.join("no-ui"), workers: 2, ..Default::default() };
    cfg.forest.n_trees = 30;
    cfg
}
