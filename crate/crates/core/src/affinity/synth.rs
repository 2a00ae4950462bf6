use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::{Dataset, FeatureMatrix};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

/// `n` points drawn uniformly from `[-half_width, half_width]²`.
pub fn synth_2d<T: Scalar>(n: usize, seed: u64, half_width: f64) -> Result<Dataset<T>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 points, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let lo = -half_width;
    let span = 2.0 * half_width;
    let data = (0..2 * n)
        .map(|_| T::of(lo + span * rng.gen::<f64>()))
        .collect();
    Dataset::new(FeatureMatrix::new(n, 2, data)?, None, None)
}

/// Isotropic Gaussian mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct BlobSpec {
    pub n: usize,
    pub blobs: usize,
    pub dim: usize,
    /// Blob centers are drawn uniformly from `[-center_box, center_box]^dim`.
    pub center_box: f64,
    /// Per-coordinate standard deviation inside a blob.
    pub spread: f64,
}

/// Samples `spec.n` points, assigning blobs round-robin so every blob is
/// populated. The class label is the blob index.
pub fn synth_blobs<T: Scalar>(spec: &BlobSpec, seed: u64) -> Result<Dataset<T>> {
    if spec.n < 2 || spec.blobs == 0 || spec.dim == 0 {
        return Err(Error::InvalidInput(format!("degenerate blob spec {spec:?}")));
    }
    let mut rng = rng_from_seed(seed);
    let centers: Vec<f64> = (0..spec.blobs * spec.dim)
        .map(|_| spec.center_box * (2.0 * rng.gen::<f64>() - 1.0))
        .collect();
    let mut data = Vec::with_capacity(spec.n * spec.dim);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let b = i % spec.blobs;
        labels.push(b as i64);
        for k in 0..spec.dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            data.push(T::of(centers[b * spec.dim + k] + spec.spread * z));
        }
    }
    Dataset::new(FeatureMatrix::new(spec.n, spec.dim, data)?, Some(labels), None)
}
