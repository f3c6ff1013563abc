//! The 19 order-free summary statistics computed over a feature series.
//!
//! Quantiles interpolate linearly between order statistics. `sd` is the
//! sample (n − 1) deviation, `skew` the adjusted Fisher–Pearson coefficient
//! G1, `kurt` the bias-corrected excess kurtosis G2, `mad` the unscaled
//! median absolute deviation from the median.
//!
//! Degenerate inputs are clamped so every statistic stays finite: a series
//! whose values are all equal has `sd`, `variance`, `skew` and `kurt` of 0;
//! `vcoef` is 0 when the mean is 0; `meanse` is 0 for a single value; `skew`
//! needs 3 values and `kurt` 4, otherwise they are 0.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

/// One of the 19 per-series statistics, in catalog order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    QuantMin,
    Quant05,
    Quant10,
    Quant25,
    QuantMedian,
    Quant75,
    Quant90,
    Quant95,
    QuantMax,
    Mean,
    Sd,
    Variance,
    Vcoef,
    Mad,
    Meanse,
    Skew,
    Kurt,
    Iqr,
    Range,
}

impl Statistic {
    pub const ALL: [Statistic; 19] = [
        Statistic::QuantMin,
        Statistic::Quant05,
        Statistic::Quant10,
        Statistic::Quant25,
        Statistic::QuantMedian,
        Statistic::Quant75,
        Statistic::Quant90,
        Statistic::Quant95,
        Statistic::QuantMax,
        Statistic::Mean,
        Statistic::Sd,
        Statistic::Variance,
        Statistic::Vcoef,
        Statistic::Mad,
        Statistic::Meanse,
        Statistic::Skew,
        Statistic::Kurt,
        Statistic::Iqr,
        Statistic::Range,
    ];

    /// Column suffix, e.g. `quant_95` in `speed_quant_95`.
    pub fn name(self) -> &'static str {
        match self {
            Statistic::QuantMin => "quant_min",
            Statistic::Quant05 => "quant_05",
            Statistic::Quant10 => "quant_10",
            Statistic::Quant25 => "quant_25",
            Statistic::QuantMedian => "quant_median",
            Statistic::Quant75 => "quant_75",
            Statistic::Quant90 => "quant_90",
            Statistic::Quant95 => "quant_95",
            Statistic::QuantMax => "quant_max",
            Statistic::Mean => "mean",
            Statistic::Sd => "sd",
            Statistic::Variance => "variance",
            Statistic::Vcoef => "vcoef",
            Statistic::Mad => "mad",
            Statistic::Meanse => "meanse",
            Statistic::Skew => "skew",
            Statistic::Kurt => "kurt",
            Statistic::Iqr => "iqr",
            Statistic::Range => "range",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|s| s.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// All 19 statistics of one series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub quant_min: f64,
    pub quant_05: f64,
    pub quant_10: f64,
    pub quant_25: f64,
    pub quant_median: f64,
    pub quant_75: f64,
    pub quant_90: f64,
    pub quant_95: f64,
    pub quant_max: f64,
    pub mean: f64,
    pub sd: f64,
    pub variance: f64,
    pub vcoef: f64,
    pub mad: f64,
    pub meanse: f64,
    pub skew: f64,
    pub kurt: f64,
    pub iqr: f64,
    pub range: f64,
}

impl SeriesSummary {
    pub fn get(&self, stat: Statistic) -> f64 {
        match stat {
            Statistic::QuantMin => self.quant_min,
            Statistic::Quant05 => self.quant_05,
            Statistic::Quant10 => self.quant_10,
            Statistic::Quant25 => self.quant_25,
            Statistic::QuantMedian => self.quant_median,
            Statistic::Quant75 => self.quant_75,
            Statistic::Quant90 => self.quant_90,
            Statistic::Quant95 => self.quant_95,
            Statistic::QuantMax => self.quant_max,
            Statistic::Mean => self.mean,
            Statistic::Sd => self.sd,
            Statistic::Variance => self.variance,
            Statistic::Vcoef => self.vcoef,
            Statistic::Mad => self.mad,
            Statistic::Meanse => self.meanse,
            Statistic::Skew => self.skew,
            Statistic::Kurt => self.kurt,
            Statistic::Iqr => self.iqr,
            Statistic::Range => self.range,
        }
    }

    /// Values in [`Statistic::ALL`] order.
    pub fn to_array(&self) -> [f64; 19] {
        Statistic::ALL.map(|s| self.get(s))
    }
}

/// Quantile of already sorted values by linear interpolation (`p` in `[0, 1]`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = math::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Computes the full statistic roster for a non-empty series.
pub fn summarize_series(values: &[f64]) -> Result<SeriesSummary> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = values.len();
    let nf = n as f64;
    let sorted = sorted_copy(values);
    let q = |p: f64| quantile_sorted(&sorted, p);

    let min = sorted[0];
    let max = sorted[n - 1];
    let median = q(0.5);
    let constant = min == max;

    let mean = if constant { min } else { values.iter().sum::<f64>() / nf };

    let (m2, m3, m4) = if constant {
        (0.0, 0.0, 0.0)
    } else {
        let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
        for &x in values {
            let d = x - mean;
            let d2 = d * d;
            s2 += d2;
            s3 += d2 * d;
            s4 += d2 * d2;
        }
        (s2 / nf, s3 / nf, s4 / nf)
    };

    let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
    let sd = math::sqrt(variance);
    let vcoef = if mean == 0.0 { 0.0 } else { sd / mean };
    let meanse = if n > 1 { sd / math::sqrt(nf) } else { 0.0 };

    let skew = if constant || n < 3 || m2 == 0.0 {
        0.0
    } else {
        let g1 = m3 / (m2 * math::sqrt(m2));
        math::sqrt(nf * (nf - 1.0)) / (nf - 2.0) * g1
    };
    let kurt = if constant || n < 4 || m2 == 0.0 {
        0.0
    } else {
        let g2 = m4 / (m2 * m2) - 3.0;
        ((nf + 1.0) * g2 + 6.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0))
    };

    let mad = {
        let deviations: Vec<f64> = values.iter().map(|x| (x - median).abs()).collect();
        quantile_sorted(&sorted_copy(&deviations), 0.5)
    };

    let quant_25 = q(0.25);
    let quant_75 = q(0.75);

    Ok(SeriesSummary {
        quant_min: min,
        quant_05: q(0.05),
        quant_10: q(0.10),
        quant_25,
        quant_median: median,
        quant_75,
        quant_90: q(0.90),
        quant_95: q(0.95),
        quant_max: max,
        mean,
        sd,
        variance,
        vcoef,
        mad,
        meanse,
        skew,
        kurt,
        iqr: quant_75 - quant_25,
        range: max - min,
    })
}
