//! Retrieval quality of a set of codes against pair labels.
//!
//! Everything is counted over unordered pairs `i < j`. A pair is retrieved
//! at threshold `α` when its (doubled) Hamming distance is `≤ α`.

use std::io::Write;

use crate::affinity::{Dataset, Metric, ProximityLabels};
use crate::error::{Error, Result};
use crate::index::PackedCodes;
use crate::scalar::Scalar;

/// One threshold of a precision–recall sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrPoint {
    pub alpha: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

fn check_sizes(codes: &PackedCodes, n: usize) -> Result<()> {
    if codes.n() != n {
        return Err(Error::DimensionMismatch {
            what: "codes",
            expected: n,
            found: codes.n(),
        });
    }
    Ok(())
}

/// Near and far pair counts by `d_H / 2` (index `0..=p`).
pub fn distance_counts(codes: &PackedCodes, labels: &ProximityLabels) -> Result<(Vec<u64>, Vec<u64>)> {
    check_sizes(codes, labels.n())?;
    let mut near = vec![0u64; codes.p() + 1];
    let mut far = vec![0u64; codes.p() + 1];
    for (i, j, is_near) in labels.pairs() {
        let half = (codes.distance(i, j) / 2) as usize;
        if is_near {
            near[half] += 1;
        } else {
            far[half] += 1;
        }
    }
    Ok((near, far))
}

/// Sweep over every achievable threshold `α ∈ {0, 2, …, 2p}`. Precision is 1
/// when nothing is retrieved.
pub fn precision_recall(codes: &PackedCodes, labels: &ProximityLabels) -> Result<PrCurve> {
    let (near, far) = distance_counts(codes, labels)?;
    let near_total = labels.near_count();
    let far_total = labels.far_count();
    if near_total == 0 {
        return Err(Error::InvalidInput("precision-recall needs at least one near pair".into()));
    }
    let (mut tp, mut fp) = (0u64, 0u64);
    let points = near
        .iter()
        .zip(&far)
        .enumerate()
        .map(|(half, (&nc, &fc))| {
            tp += nc;
            fp += fc;
            PrPoint {
                alpha: 2.0 * half as f64,
                precision: if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 },
                recall: tp as f64 / near_total as f64,
                tp,
                fp,
                fn_: near_total - tp,
                tn: far_total - fp,
            }
        })
        .collect();
    Ok(PrCurve { points })
}

/// Trapezoidal area under precision over recall, starting from recall 0 at
/// the precision of the smallest threshold.
pub fn auc(curve: &PrCurve) -> Result<f64> {
    let first = curve
        .points
        .first()
        .ok_or_else(|| Error::InvalidInput("empty precision-recall curve".into()))?;
    let mut pts: Vec<(f64, f64)> = std::iter::once((0.0, first.precision))
        .chain(curve.points.iter().map(|p| (p.recall, p.precision)))
        .collect();
    // Stable: equal recalls keep threshold order.
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pts
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1))
        .sum())
}

/// Pair counts by feature-distance bin (rows) and `d_H` (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct JointHistogram {
    pub p: usize,
    pub bins: usize,
    pub dist_min: f64,
    pub dist_max: f64,
    /// Row-major `bins × (p + 1)`; column `c` holds `d_H = 2c`.
    pub counts: Vec<u64>,
}

impl JointHistogram {
    pub fn bin_width(&self) -> f64 {
        (self.dist_max - self.dist_min) / self.bins as f64
    }

    pub fn bin_center(&self, row: usize) -> f64 {
        self.dist_min + (row as f64 + 0.5) * self.bin_width()
    }

    pub fn count(&self, row: usize, hamming: u32) -> u64 {
        self.counts[row * (self.p + 1) + hamming as usize / 2]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["dist_bin", "hamming", "count", "log_count"])?;
        for row in 0..self.bins {
            for col in 0..=self.p {
                let count = self.counts[row * (self.p + 1) + col];
                out.write_record([
                    format!("{:?}", self.bin_center(row)),
                    (2 * col).to_string(),
                    count.to_string(),
                    format!("{:?}", (count as f64).ln_1p()),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Equal-width distance bins over the observed range of pair distances.
pub fn joint_histogram<T: Scalar>(
    codes: &PackedCodes,
    data: &Dataset<T>,
    metric: Metric,
    bins: usize,
) -> Result<JointHistogram> {
    check_sizes(codes, data.n())?;
    if bins == 0 {
        return Err(Error::InvalidConfig("histogram needs at least one bin".into()));
    }
    let n = data.n();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((metric.distance(data.point(i), data.point(j)).widen(), codes.distance(i, j)));
        }
    }
    let lo = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let cols = codes.p() + 1;
    let mut counts = vec![0u64; bins * cols];
    for (dist, ham) in pairs {
        let row = if width > 0.0 {
            (((dist - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[row * cols + ham as usize / 2] += 1;
    }
    Ok(JointHistogram {
        p: codes.p(),
        bins,
        dist_min: lo,
        dist_max: hi,
        counts,
    })
}

/// How the near and far pairs fall on either side of a threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassSplit {
    pub near_within: u64,
    pub near_total: u64,
    pub far_beyond: u64,
    pub far_total: u64,
}

impl MassSplit {
    /// Share of near pairs at `d_H ≤ α` (1 when there are none).
    pub fn near_fraction(&self) -> f64 {
        ratio(self.near_within, self.near_total)
    }

    /// Share of far pairs at `d_H > α` (1 when there are none).
    pub fn far_fraction(&self) -> f64 {
        ratio(self.far_beyond, self.far_total)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

pub fn mass_split(codes: &PackedCodes, labels: &ProximityLabels, alpha: f64) -> Result<MassSplit> {
    let (near, far) = distance_counts(codes, labels)?;
    let within = |half: usize| 2.0 * half as f64 <= alpha;
    Ok(MassSplit {
        near_within: near.iter().enumerate().filter(|(h, _)| within(*h)).map(|(_, c)| c).sum(),
        near_total: labels.near_count(),
        far_beyond: far.iter().enumerate().filter(|(h, _)| !within(*h)).map(|(_, c)| c).sum(),
        far_total: labels.far_count(),
    })
}

pub fn write_curve_csv<W: Write>(curve: &PrCurve, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["alpha", "precision", "recall", "tp", "fp", "fn", "tn"])?;
    for p in &curve.points {
        out.write_record([
            format!("{:?}", p.alpha),
            format!("{:?}", p.precision),
            format!("{:?}", p.recall),
            p.tp.to_string(),
            p.fp.to_string(),
            p.fn_.to_string(),
            p.tn.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Headline numbers for one evaluation run.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub p: usize,
    pub near_pairs: u64,
    pub far_pairs: u64,
    pub auc: f64,
}

impl Summary {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "p", "near_pairs", "far_pairs", "auc"])?;
        out.write_record([
            self.n.to_string(),
            self.p.to_string(),
            self.near_pairs.to_string(),
            self.far_pairs.to_string(),
            format!("{:?}", self.auc),
        ])?;
        out.flush()?;
        Ok(())
    }
}
