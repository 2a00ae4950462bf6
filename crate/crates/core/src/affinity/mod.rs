//! Datasets and the near/far pair labeling derived from them.

mod io;
mod synth;

pub use io::{load_dataset, read_csv, read_raw_f32, sidecar_path, write_csv, write_raw_f32, DataFormat};
pub use synth::{synth_2d, synth_blobs, BlobSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default cap on the number of points; the trainer keeps Θ(n²) state.
pub const DEFAULT_MAX_POINTS: usize = 10_000;

/// Dense row-major `rows × cols` matrix of finite feature values.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix<T: Scalar = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::InvalidInput("feature dimension must be at least 1".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "feature payload",
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                column: pos % cols,
            });
        }
        Ok(FeatureMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Parse {
                    row: i,
                    message: format!("expected {cols} features, found {}", r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Copies the selected rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix<T> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

/// `n` feature vectors in `d` dimensions, with optional integer class ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T: Scalar = f64> {
    features: FeatureMatrix<T>,
    class_labels: Option<Vec<i64>>,
    ids: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset; ids default to the row index when `ids` is `None`.
    pub fn new(
        features: FeatureMatrix<T>,
        class_labels: Option<Vec<i64>>,
        ids: Option<Vec<String>>,
    ) -> Result<Self> {
        let n = features.rows();
        if n < 2 {
            return Err(Error::InvalidInput(format!("a dataset needs at least 2 points, got {n}")));
        }
        if let Some(labels) = &class_labels {
            if labels.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "class labels",
                    expected: n,
                    found: labels.len(),
                });
            }
        }
        let ids = match ids {
            Some(ids) if ids.len() != n => {
                return Err(Error::DimensionMismatch {
                    what: "record ids",
                    expected: n,
                    found: ids.len(),
                })
            }
            Some(ids) => ids,
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        Ok(Dataset {
            features,
            class_labels,
            ids,
        })
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn d(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &FeatureMatrix<T> {
        &self.features
    }

    pub fn point(&self, i: usize) -> &[T] {
        self.features.row(i)
    }

    pub fn class_labels(&self) -> Option<&[i64]> {
        self.class_labels.as_deref()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Subset of the rows in the given order; fails if fewer than two remain.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset<T>> {
        let labels = self
            .class_labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        let ids = indices.iter().map(|&i| self.ids[i].clone()).collect();
        Dataset::new(self.features.select(indices), labels, Some(ids))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    L1,
}

impl Metric {
    pub fn distance<T: Scalar>(self, a: &[T], b: &[T]) -> T {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x - y) * (x - y))
                .sum::<T>()
                .sqrt(),
            Metric::L1 => a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffinityMode {
    ByClass,
    ByRadius,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffinityConfig {
    pub mode: AffinityMode,
    /// Neighborhood radius in feature-space units. Ignored for class mode.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub metric: Metric,
    /// When set (and `radius` is not), the radius is chosen so that points
    /// have this many neighbors on average.
    #[serde(default)]
    pub target_avg_neighbors: Option<f64>,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

fn default_max_points() -> usize {
    DEFAULT_MAX_POINTS
}

impl AffinityConfig {
    pub fn by_class() -> Self {
        AffinityConfig {
            mode: AffinityMode::ByClass,
            radius: None,
            metric: Metric::Euclidean,
            target_avg_neighbors: None,
            max_points: DEFAULT_MAX_POINTS,
        }
    }

    pub fn by_radius(radius: f64, metric: Metric) -> Self {
        AffinityConfig {
            mode: AffinityMode::ByRadius,
            radius: Some(radius),
            metric,
            target_avg_neighbors: None,
            max_points: DEFAULT_MAX_POINTS,
        }
    }

    pub fn by_avg_neighbors(target: f64, metric: Metric) -> Self {
        AffinityConfig {
            mode: AffinityMode::ByRadius,
            radius: None,
            metric,
            target_avg_neighbors: Some(target),
            max_points: DEFAULT_MAX_POINTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == AffinityMode::ByRadius {
            match (self.radius, self.target_avg_neighbors) {
                (Some(r), _) if !(r > 0.0 && r.is_finite()) => {
                    return Err(Error::InvalidConfig(format!("radius must be positive, got {r}")))
                }
                (None, None) => {
                    return Err(Error::InvalidConfig(
                        "radius mode needs either a radius or a target average neighbor count".into(),
                    ))
                }
                (None, Some(t)) if !(t > 0.0 && t.is_finite()) => {
                    return Err(Error::InvalidConfig(format!(
                        "target average neighbor count must be positive, got {t}"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Near/far labeling of every unordered pair `i < j`, packed one bit per
/// pair in row-major upper-triangular order (bit set = near).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProximityLabels {
    n: usize,
    words: Vec<u64>,
    near_count: u64,
}

impl ProximityLabels {
    /// Labels pair `(i, j)`, `i < j`, near iff `near(i, j)`.
    pub fn from_fn(n: usize, mut near: impl FnMut(usize, usize) -> bool) -> Self {
        let total = n * n.saturating_sub(1) / 2;
        let mut words = vec![0u64; total.div_ceil(64)];
        let mut near_count = 0u64;
        let mut k = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                if near(i, j) {
                    words[k / 64] |= 1 << (k % 64);
                    near_count += 1;
                }
                k += 1;
            }
        }
        ProximityLabels {
            n,
            words,
            near_count,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pair_count(&self) -> u64 {
        (self.n * self.n.saturating_sub(1) / 2) as u64
    }

    pub fn near_count(&self) -> u64 {
        self.near_count
    }

    pub fn far_count(&self) -> u64 {
        self.pair_count() - self.near_count
    }

    /// Index of pair `(i, i + 1)` in the packed order.
    #[inline]
    pub fn row_offset(&self, i: usize) -> usize {
        i * (2 * self.n - i - 1) / 2
    }

    #[inline]
    pub fn is_near_at(&self, pair: usize) -> bool {
        self.words[pair / 64] >> (pair % 64) & 1 == 1
    }

    /// Whether `i` and `j` are near; the order of the arguments is irrelevant.
    ///
    /// Panics if `i == j`: the diagonal carries no label.
    pub fn is_near(&self, i: usize, j: usize) -> bool {
        assert!(i != j, "diagonal pairs are not labeled");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.is_near_at(self.row_offset(a) + (b - a - 1))
    }

    /// `+1` for near, `-1` for far.
    pub fn label(&self, i: usize, j: usize) -> i8 {
        if self.is_near(i, j) {
            1
        } else {
            -1
        }
    }

    /// All pairs `(i, j, near)` with `i < j` in packed order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
        (0..self.n)
            .flat_map(move |i| (i + 1..self.n).map(move |j| (i, j)))
            .enumerate()
            .map(move |(k, (i, j))| (i, j, self.is_near_at(k)))
    }
}

fn check_cap(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::TooLarge {
            what: "dataset",
            n,
            max,
        });
    }
    Ok(())
}

/// Near iff both points share a class id.
pub fn labels_by_class<T: Scalar>(data: &Dataset<T>) -> Result<ProximityLabels> {
    let classes = data.class_labels().ok_or(Error::MissingClassLabels)?;
    Ok(ProximityLabels::from_fn(data.n(), |i, j| classes[i] == classes[j]))
}

/// Near iff `distance ≤ radius`; the boundary counts as near.
pub fn labels_by_radius<T: Scalar>(data: &Dataset<T>, radius: T, metric: Metric) -> ProximityLabels {
    ProximityLabels::from_fn(data.n(), |i, j| {
        metric.distance(data.point(i), data.point(j)) <= radius
    })
}

/// Radius picked by [`radius_for_avg_neighbors`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusChoice<T> {
    pub radius: T,
    /// 1-based rank of the radius among the sorted pairwise distances.
    pub rank: usize,
    /// Average neighbor count the radius actually yields (ties can push it
    /// above the target).
    pub achieved_avg: f64,
}

/// Chooses `r` as the `m`-th smallest pairwise distance, `m = round(n·target/2)`.
pub fn radius_for_avg_neighbors<T: Scalar>(
    data: &Dataset<T>,
    target_avg: f64,
    metric: Metric,
) -> Result<RadiusChoice<T>> {
    let n = data.n();
    if !(target_avg > 0.0 && target_avg < (n - 1) as f64) {
        return Err(Error::InvalidConfig(format!(
            "target average neighbor count must lie in (0, {}), got {target_avg}",
            n - 1
        )));
    }
    let mut dists = pairwise_distances(data, metric);
    let total = dists.len();
    let m = ((n as f64 * target_avg / 2.0).round() as usize).clamp(1, total);
    let (_, &mut radius, _) = dists.select_nth_unstable_by(m - 1, |a, b| a.partial_cmp(b).unwrap());
    let near = dists.iter().filter(|&&d| d <= radius).count();
    Ok(RadiusChoice {
        radius,
        rank: m,
        achieved_avg: 2.0 * near as f64 / n as f64,
    })
}

/// Distances of all pairs `i < j` in packed order.
pub fn pairwise_distances<T: Scalar>(data: &Dataset<T>, metric: Metric) -> Vec<T> {
    let n = data.n();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(metric.distance(data.point(i), data.point(j)));
        }
    }
    out
}

/// Builds the labeling described by `cfg`.
pub fn build_labels<T: Scalar>(data: &Dataset<T>, cfg: &AffinityConfig) -> Result<ProximityLabels> {
    cfg.validate()?;
    check_cap(data.n(), cfg.max_points)?;
    match cfg.mode {
        AffinityMode::ByClass => labels_by_class(data),
        AffinityMode::ByRadius => {
            let radius = match (cfg.radius, cfg.target_avg_neighbors) {
                (Some(r), _) => T::of(r),
                (None, Some(t)) => radius_for_avg_neighbors(data, t, cfg.metric)?.radius,
                (None, None) => unreachable!("validated above"),
            };
            Ok(labels_by_radius(data, radius, cfg.metric))
        }
    }
}
