//! Spherical-earth geodesy for trajectory points.

use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

/// Mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Location of a moving object at a point in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub lon: f64,
    pub lat: f64,
    /// UTC seconds.
    pub t: f64,
}

impl TrajectoryPoint {
    pub fn new(lon: f64, lat: f64, t: f64) -> Result<Self> {
        if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::CoordinateOutOfRange { lat, lon });
        }
        if !t.is_finite() {
            return Err(Error::InvalidTimestamp);
        }
        Ok(Self { lon, lat, t })
    }

    fn same_place(&self, other: &Self) -> bool {
        self.lat == other.lat && self.lon == other.lon
    }
}

#[inline]
fn to_rad(deg: f64) -> f64 {
    deg * PI / 180.0
}

/// Great-circle distance in meters (haversine formula).
pub fn haversine_distance(a: &TrajectoryPoint, b: &TrajectoryPoint) -> f64 {
    if a.same_place(b) {
        return 0.0;
    }
    let (lat1, lat2) = (to_rad(a.lat), to_rad(b.lat));
    let dlat = lat2 - lat1;
    let dlon = to_rad(b.lon - a.lon);
    let s_lat = math::sin(dlat / 2.0);
    let s_lon = math::sin(dlon / 2.0);
    let h = s_lat * s_lat + math::cos(lat1) * math::cos(lat2) * s_lon * s_lon;
    2.0 * EARTH_RADIUS_M * math::asin(math::sqrt(h.clamp(0.0, 1.0)))
}

/// Forward azimuth from `a` to `b` in degrees, normalized to `[0, 360)`.
///
/// Coincident points have no defined direction; they get a bearing of 0.
pub fn initial_bearing(a: &TrajectoryPoint, b: &TrajectoryPoint) -> f64 {
    if a.same_place(b) {
        return 0.0;
    }
    let (lat1, lat2) = (to_rad(a.lat), to_rad(b.lat));
    let dlon = to_rad(b.lon - a.lon);
    let y = math::sin(dlon) * math::cos(lat2);
    let x = math::cos(lat1) * math::sin(lat2) - math::sin(lat1) * math::cos(lat2) * math::cos(dlon);
    let deg = math::atan2(y, x) * 180.0 / PI;
    let b = math::rem_euclid(deg, 360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if b >= 360.0 {
        0.0
    } else {
        b
    }
}

/// Absolute change between two bearings folded into `[0, 180]`; 0 means no turn.
pub fn turning_deviation(from_bearing: f64, to_bearing: f64) -> f64 {
    let d = math::rem_euclid((to_bearing - from_bearing).abs(), 360.0);
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}
