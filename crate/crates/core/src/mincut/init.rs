//! Initial guesses for the bit solvers.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::eigen::{smallest_eigenpairs, smallest_eigenpairs_excluding, EigenConfig, EigenPair};
use super::{laplacian, signed_laplacian, BitVector, SignedWeightMatrix};
use crate::error::Result;
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

/// I.i.d. uniform ±1 entries.
pub fn init_random(n: usize, seed: u64) -> BitVector {
    let mut rng = rng_from_seed(seed);
    BitVector((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
}

/// A thresholded eigenvector guess.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralGuess<T> {
    pub bits: BitVector,
    /// Eigenvalues of the vectors the guess was built from.
    pub eigenvalues: Vec<T>,
    /// The matrix was zero, or the chosen eigenvalue is repeated, so the
    /// guess is one arbitrary choice among many.
    pub degenerate: bool,
}

impl<T> SpectralGuess<T> {
    fn trivial(n: usize) -> Self {
        SpectralGuess {
            bits: BitVector::ones(n),
            eigenvalues: Vec::new(),
            degenerate: true,
        }
    }
}

fn constant_unit<T: Scalar>(n: usize) -> Vec<T> {
    vec![T::one() / T::of(n as f64).sqrt(); n]
}

/// The `k` smallest eigenpairs of `L = D − W` orthogonal to the constant
/// vector (which is always an eigenvector of `L` with eigenvalue 0).
pub fn nontrivial_laplacian_pairs<T: Scalar>(
    w: &SignedWeightMatrix<T>,
    k: usize,
    cfg: &EigenConfig,
) -> Result<Vec<EigenPair<T>>> {
    let l = laplacian(w);
    smallest_eigenpairs_excluding(&l, k, &[constant_unit(w.n())], cfg)
}

/// Sign of the Fiedler vector: the smallest eigenpair of `L` that is not the
/// trivial constant one. Zeros map to `+1`.
pub fn init_fiedler<T: Scalar>(w: &SignedWeightMatrix<T>, cfg: &EigenConfig) -> Result<SpectralGuess<T>> {
    let n = w.n();
    if n < 2 || laplacian(w).is_zero() {
        return Ok(SpectralGuess::trivial(n));
    }
    let pair = nontrivial_laplacian_pairs(w, 1, cfg)?.remove(0);
    Ok(SpectralGuess {
        bits: BitVector::from_signs(&pair.vector),
        eigenvalues: vec![pair.value],
        degenerate: pair.degenerate,
    })
}

/// Sign of an eigenvector of the signed Laplacian `L̄ = D̄ − W`: the smallest
/// eigenpair whose sign pattern is not constant, else the second smallest.
pub fn init_signed_laplacian<T: Scalar>(
    w: &SignedWeightMatrix<T>,
    cfg: &EigenConfig,
) -> Result<SpectralGuess<T>> {
    let n = w.n();
    let lbar = signed_laplacian(w);
    if n < 2 || lbar.is_zero() {
        return Ok(SpectralGuess::trivial(n));
    }
    let pairs = smallest_eigenpairs(&lbar, n.min(4), cfg)?;
    let chosen = pairs
        .iter()
        .find(|p| !BitVector::from_signs(&p.vector).is_constant())
        .unwrap_or(&pairs[1]);
    Ok(SpectralGuess {
        bits: BitVector::from_signs(&chosen.vector),
        eigenvalues: vec![chosen.value],
        degenerate: chosen.degenerate,
    })
}

/// Sign of a Gaussian random combination of the three smallest non-trivial
/// Laplacian eigenvectors (fewer when `n < 4`).
pub fn init_random_projection<T: Scalar>(
    w: &SignedWeightMatrix<T>,
    seed: u64,
    cfg: &EigenConfig,
) -> Result<SpectralGuess<T>> {
    let n = w.n();
    if n < 2 || laplacian(w).is_zero() {
        return Ok(SpectralGuess::trivial(n));
    }
    let pairs = nontrivial_laplacian_pairs(w, PROJECTION_RANK.min(n - 1), cfg)?;
    Ok(SpectralGuess {
        bits: project_signs(&pairs, &projection_coefficients(pairs.len(), seed)),
        eigenvalues: pairs.iter().map(|p| p.value).collect(),
        degenerate: false,
    })
}

/// Number of eigenvectors mixed by [`init_random_projection`].
pub const PROJECTION_RANK: usize = 3;

/// Standard normal mixing coefficients for [`project_signs`].
pub fn projection_coefficients<T: Scalar>(k: usize, seed: u64) -> Vec<T> {
    let mut rng = rng_from_seed(seed);
    (0..k).map(|_| T::of(StandardNormal.sample(&mut rng))).collect()
}

/// `sign(Σ gₘ vₘ)` with zeros mapped to `+1`.
pub fn project_signs<T: Scalar>(pairs: &[EigenPair<T>], coefficients: &[T]) -> BitVector {
    let n = pairs.first().map_or(0, |p| p.vector.len());
    let mut acc = vec![T::zero(); n];
    for (p, &g) in pairs.iter().zip(coefficients) {
        for (a, &v) in acc.iter_mut().zip(&p.vector) {
            *a += g * v;
        }
    }
    BitVector::from_signs(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: usize, v: &[f64]) -> SignedWeightMatrix {
        SignedWeightMatrix::new(n, v.to_vec()).unwrap()
    }

    fn two_blocks() -> SignedWeightMatrix {
        m(4, &[
            0.0, 1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ])
    }

    #[test]
    fn random_guess_is_seeded() {
        assert_eq!(init_random(5, 3), init_random(5, 3));
        assert_eq!(init_random(1, 9).len(), 1);
        let big = init_random(10_000, 11);
        let mean = big.as_slice().iter().map(|&b| b as f64).sum::<f64>() / 1e4;
        assert!(mean.abs() <= 0.1);
    }

    #[test]
    fn fiedler_splits_disconnected_blocks() {
        let g = init_fiedler(&two_blocks(), &EigenConfig::default()).unwrap();
        let b = g.bits.as_slice();
        assert_eq!(b[0], b[1]);
        assert_eq!(b[2], b[3]);
        assert_ne!(b[0], b[2]);
        assert!(g.eigenvalues[0].abs() < 1e-9);
    }

    #[test]
    fn fiedler_of_two_nodes() {
        let g = init_fiedler(&m(2, &[0.0, 1.0, 1.0, 0.0]), &EigenConfig::default()).unwrap();
        assert_ne!(g.bits[0], g.bits[1]);
        assert!((g.eigenvalues[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let z = SignedWeightMatrix::<f64>::zeros(4);
        for g in [
            init_fiedler(&z, &EigenConfig::default()).unwrap(),
            init_signed_laplacian(&z, &EigenConfig::default()).unwrap(),
            init_random_projection(&z, 1, &EigenConfig::default()).unwrap(),
        ] {
            assert_eq!(g.bits, BitVector::ones(4));
            assert!(g.degenerate);
        }
    }

    #[test]
    fn signed_laplacian_two_nodes() {
        // L̄ = [[1,1],[1,1]]: eigenvalue 0 with eigenvector (1,−1)/√2.
        let g = init_signed_laplacian(&m(2, &[0.0, -1.0, -1.0, 0.0]), &EigenConfig::default()).unwrap();
        assert_eq!(g.bits.as_slice(), &[1, -1]);
        assert!(g.eigenvalues[0].abs() < 1e-10);
    }

    #[test]
    fn signed_laplacian_equals_fiedler_for_nonnegative_weights() {
        let w = m(4, &[
            0.0, 3.0, 0.2, 0.1, //
            3.0, 0.0, 0.1, 0.3, //
            0.2, 0.1, 0.0, 2.0, //
            0.1, 0.3, 2.0, 0.0,
        ]);
        let a = init_fiedler(&w, &EigenConfig::default()).unwrap();
        let b = init_signed_laplacian(&w, &EigenConfig::default()).unwrap();
        assert!(a.bits == b.bits || a.bits == b.bits.negated());
        assert_eq!(a.bits.as_slice()[0], a.bits.as_slice()[1]);
        assert_ne!(a.bits.as_slice()[0], a.bits.as_slice()[2]);
    }

    #[test]
    fn projection_is_odd_in_coefficients() {
        let w = two_blocks();
        let pairs = nontrivial_laplacian_pairs(&w, 3, &EigenConfig::default()).unwrap();
        let g = [0.3, -1.2, 0.7];
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        assert_eq!(project_signs(&pairs, &g).negated(), project_signs(&pairs, &neg));
        let a = init_random_projection(&w, 5, &EigenConfig::default()).unwrap();
        assert_eq!(a, init_random_projection(&w, 5, &EigenConfig::default()).unwrap());
    }
}
