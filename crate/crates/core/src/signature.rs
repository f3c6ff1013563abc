//! Distance-geometry signatures: straightness of contiguous trajectory parts.
//!
//! A trajectory is cut into `k` contiguous parts of near-equal point count
//! (the first `n mod k` parts get one extra point). For part `j` the
//! signature is the great-circle distance between its first and last point
//! divided by its path length, so 1 means perfectly straight and values near
//! 0 mean the part doubles back on itself. Parts with fewer than two points
//! or zero path length score 1.

use alloc::format;
use alloc::string::String;
use core::ops::Range;

use serde::Serialize;

use crate::geo::{haversine_distance, TrajectoryPoint};
use crate::{Error, Result};

pub const MAX_PARTS: u8 = 5;
pub const SIGNATURE_COUNT: usize = 15;

/// Part `j` (1-based) of a split into `k` parts, `1 <= j <= k <= 5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SignatureIndex {
    k: u8,
    j: u8,
}

impl SignatureIndex {
    pub fn new(k: u8, j: u8) -> Result<Self> {
        if k == 0 || k > MAX_PARTS || j == 0 || j > k {
            return Err(Error::UnknownVariable(format!("distance_geometry_{k}_{j}")));
        }
        Ok(Self { k, j })
    }

    pub fn k(self) -> u8 {
        self.k
    }

    pub fn j(self) -> u8 {
        self.j
    }

    /// All 15 signatures ordered by `k`, then `j`.
    pub fn all() -> impl Iterator<Item = SignatureIndex> + Clone {
        (1..=MAX_PARTS).flat_map(|k| (1..=k).map(move |j| SignatureIndex { k, j }))
    }

    /// Position within [`SignatureIndex::all`].
    pub fn ordinal(self) -> usize {
        let k = self.k as usize;
        k * (k - 1) / 2 + self.j as usize - 1
    }

    pub fn name(self) -> String {
        format!("distance_geometry_{}_{}", self.k, self.j)
    }

    /// Parses `distance_geometry_<k>_<j>`.
    pub fn parse(name: &str) -> Option<Self> {
        let rest = name.strip_prefix("distance_geometry_")?;
        let (k, j) = rest.split_once('_')?;
        Self::new(k.parse().ok()?, j.parse().ok()?).ok()
    }

    /// Point-index range of this part in a trajectory of `n` points.
    pub fn part_range(self, n: usize) -> Range<usize> {
        part_range(n, self.k as usize, self.j as usize)
    }
}

/// Range of the `j`-th (1-based) of `k` near-equal parts of `0..n`.
pub fn part_range(n: usize, k: usize, j: usize) -> Range<usize> {
    debug_assert!(k >= 1 && (1..=k).contains(&j));
    let base = n / k;
    let extra = n % k;
    let idx = j - 1;
    let start = idx * base + idx.min(extra);
    let len = base + usize::from(idx < extra);
    start..start + len
}

fn straightness(points: &[TrajectoryPoint]) -> f64 {
    if points.len() < 2 {
        return 1.0;
    }
    let path: f64 = points.windows(2).map(|w| haversine_distance(&w[0], &w[1])).sum();
    if !(path > 0.0) {
        return 1.0;
    }
    let chord = haversine_distance(&points[0], &points[points.len() - 1]);
    (chord / path).clamp(0.0, 1.0)
}

/// The 15 signatures of a trajectory in [`SignatureIndex::all`] order.
pub fn distance_geometry_signatures(points: &[TrajectoryPoint]) -> [f64; SIGNATURE_COUNT] {
    let mut out = [1.0; SIGNATURE_COUNT];
    for (slot, sig) in out.iter_mut().zip(SignatureIndex::all()) {
        *slot = straightness(&points[sig.part_range(points.len())]);
    }
    out
}
