//! Trajectory data model, cleaning, and per-point movement features.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geo::{haversine_distance, initial_bearing, turning_deviation, TrajectoryPoint};
use crate::{Error, Result};

/// The five per-point movement series; every series has one value per point.
///
/// Values that need a predecessor (or a successor, for `angle`) are 0 at the
/// affected indices: `speed[0]`, `acceleration[0..2]`, `distance[0]`,
/// `bearing[0]`, `angle[0]` and `angle[last]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSeries {
    /// m/s
    pub speed: Vec<f64>,
    /// m/s²
    pub acceleration: Vec<f64>,
    /// Turning deviation in degrees, `[0, 180]`, 0 = straight.
    pub angle: Vec<f64>,
    /// Meters from the previous point.
    pub distance: Vec<f64>,
    /// Degrees in `[0, 360)` of the segment arriving at the point.
    pub bearing: Vec<f64>,
}

impl FeatureSeries {
    pub fn len(&self) -> usize {
        self.speed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speed.is_empty()
    }

    /// Restrict all five series to `range`.
    pub fn slice(&self, range: core::ops::Range<usize>) -> FeatureSeries {
        FeatureSeries {
            speed: self.speed[range.clone()].to_vec(),
            acceleration: self.acceleration[range.clone()].to_vec(),
            angle: self.angle[range.clone()].to_vec(),
            distance: self.distance[range.clone()].to_vec(),
            bearing: self.bearing[range].to_vec(),
        }
    }
}

/// Time-ordered points of one moving object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: String,
    pub points: Vec<TrajectoryPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureSeries>,
}

impl Trajectory {
    /// Builds a cleaned trajectory. Points must already be strictly increasing in time.
    pub fn new(id: impl Into<String>, points: Vec<TrajectoryPoint>) -> Result<Self> {
        let id = id.into();
        if points.len() < 2 {
            return Err(Error::TooFewPoints(id));
        }
        if let Some(index) = points.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::NonIncreasingTime { id, index: index + 1 });
        }
        Ok(Self { id, points, features: None })
    }

    /// Builds the trajectory and computes its feature series.
    pub fn with_features(id: impl Into<String>, points: Vec<TrajectoryPoint>) -> Result<Self> {
        let mut traj = Self::new(id, points)?;
        traj.features = Some(compute_point_features(&traj)?);
        Ok(traj)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Computed features, calculating them on the fly if the trajectory has none.
    pub fn features_or_compute(&self) -> Result<alloc::borrow::Cow<'_, FeatureSeries>> {
        match &self.features {
            Some(f) => Ok(alloc::borrow::Cow::Borrowed(f)),
            None => compute_point_features(self).map(alloc::borrow::Cow::Owned),
        }
    }
}

/// Speed, acceleration, angle, distance and bearing for every point.
pub fn compute_point_features(traj: &Trajectory) -> Result<FeatureSeries> {
    let pts = &traj.points;
    let n = pts.len();
    if n < 2 {
        return Err(Error::TooFewPoints(traj.id.clone()));
    }
    let mut speed = vec![0.0; n];
    let mut acceleration = vec![0.0; n];
    let mut angle = vec![0.0; n];
    let mut distance = vec![0.0; n];
    let mut bearing = vec![0.0; n];

    for i in 1..n {
        let dt = pts[i].t - pts[i - 1].t;
        if !(dt > 0.0) {
            return Err(Error::NonIncreasingTime { id: traj.id.clone(), index: i });
        }
        distance[i] = haversine_distance(&pts[i - 1], &pts[i]);
        speed[i] = distance[i] / dt;
        bearing[i] = initial_bearing(&pts[i - 1], &pts[i]);
        if i >= 2 {
            acceleration[i] = (speed[i] - speed[i - 1]) / dt;
        }
    }
    for i in 1..n - 1 {
        angle[i] = turning_deviation(bearing[i], bearing[i + 1]);
    }

    Ok(FeatureSeries { speed, acceleration, angle, distance, bearing })
}

/// Counts produced while cleaning raw rows into trajectories.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestionReport {
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub duplicates_collapsed: usize,
    pub trajectories: usize,
    pub points: usize,
    /// Trajectories discarded for having fewer than 2 points after cleaning.
    #[serde(default)]
    pub trajectories_rejected: usize,
}

/// Where a dataset came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub config_hash: String,
}

/// Immutable collection of trajectories with unique ids, ordered by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    trajectories: Vec<Trajectory>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(name: impl Into<String>, mut trajectories: Vec<Trajectory>) -> Result<Self> {
        trajectories.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = trajectories.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateId(w[0].id.clone()));
        }
        Ok(Self { name: name.into(), trajectories, provenance: Provenance::default() })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn get(&self, id: &str) -> Option<&Trajectory> {
        self.trajectories
            .binary_search_by(|t| t.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.trajectories[i])
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.trajectories.iter().map(|t| t.id.as_str())
    }

    /// Fills in feature series for any trajectory that lacks them.
    pub fn compute_features(&mut self) -> Result<()> {
        for t in &mut self.trajectories {
            if t.features.is_none() {
                t.features = Some(compute_point_features(t)?);
            }
        }
        Ok(())
    }
}

/// Accumulates raw rows and cleans them into a [`Dataset`].
///
/// Rows with out-of-range coordinates are dropped, points are sorted by time,
/// repeated timestamps within a trajectory keep their first occurrence, and
/// trajectories left with fewer than two points are rejected.
#[derive(Debug, Default)]
pub struct DatasetBuilder {
    name: String,
    // kept in arrival order; finish() relies on a stable sort
    rows: BTreeMap<String, Vec<TrajectoryPoint>>,
    report: IngestionReport,
}

impl DatasetBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    /// Records one raw row. Returns `false` if the row was dropped.
    pub fn push(&mut self, id: &str, lon: f64, lat: f64, t: f64) -> bool {
        self.report.rows_read += 1;
        match TrajectoryPoint::new(lon, lat, t) {
            Ok(p) => {
                self.rows.entry(id.to_string()).or_default().push(p);
                true
            }
            Err(_) => {
                self.report.rows_dropped += 1;
                false
            }
        }
    }

    /// Records a row that could not be parsed upstream.
    pub fn reject_row(&mut self) {
        self.report.rows_read += 1;
        self.report.rows_dropped += 1;
    }

    pub fn finish(self) -> Result<(Dataset, IngestionReport)> {
        let DatasetBuilder { name, rows, mut report } = self;
        if rows.is_empty() {
            return Err(Error::NoValidRows);
        }
        let mut trajectories = Vec::with_capacity(rows.len());
        for (id, mut points) in rows {
            // stable: equal timestamps keep input order
            points.sort_by(|a, b| a.t.total_cmp(&b.t));
            let before = points.len();
            points.dedup_by(|later, earlier| later.t == earlier.t);
            report.duplicates_collapsed += before - points.len();
            if points.len() < 2 {
                report.trajectories_rejected += 1;
                continue;
            }
            report.points += points.len();
            trajectories.push(Trajectory::new(id, points)?);
        }
        if trajectories.is_empty() {
            return Err(Error::NoValidRows);
        }
        report.trajectories = trajectories.len();
        Ok((Dataset::new(name, trajectories)?, report))
    }
}
