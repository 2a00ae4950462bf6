//! The per-bit subproblem: maximize `bᵀWb` over `b ∈ {±1}ⁿ` for a symmetric
//! matrix `W` with positive (attractive) and negative (repulsive) weights.
//!
//! Two greedy improvers are provided. [`vector_update`] iterates
//! `b ← sign(W'b)` on a diagonally shifted, positive semidefinite `W'`;
//! [`bit_update`] performs coordinate-wise sign updates until no single flip
//! helps. Both start from an initial guess ([`init`]) and never decrease the
//! objective.

pub mod eigen;
pub mod init;
mod io;
mod solve;

pub use io::{read_matrix, write_matrix_dense, MatrixFormat};
pub use solve::{
    bit_update, bit_update_with, exhaustive_maxcut, objective, psd_shift, vector_update,
    vector_update_with, MAX_BIT_SWEEPS, MAX_EXHAUSTIVE_N, MAX_VECTOR_ITERATIONS,
};

use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense symmetric `n × n` matrix stored as a full row-major square.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedWeightMatrix<T: Scalar = f64> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SignedWeightMatrix<T> {
    /// Validates length, finiteness and exact symmetry.
    pub fn new(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                what: "matrix entries",
                expected: n * n,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / n,
                column: pos % n,
            });
        }
        for i in 0..n {
            for j in i + 1..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SignedWeightMatrix { n, data })
    }

    /// Evaluates `f(i, j)` for `i ≤ j` and mirrors it.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SignedWeightMatrix { n, data }
    }

    /// Trusted constructor for matrices symmetric by construction.
    pub(crate) fn from_raw(n: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        SignedWeightMatrix { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        SignedWeightMatrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// `W + c·I`.
    pub fn with_diagonal_added(&self, c: T) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += c;
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `W b` for a ±1 vector.
    pub fn mul_bits(&self, b: &BitVector) -> Vec<T> {
        (0..self.n).map(|i| signed_dot(self.row(i), b.as_slice())).collect()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }
}

impl<T: Scalar> Index<(usize, usize)> for SignedWeightMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

#[inline]
fn signed_dot<T: Scalar>(row: &[T], bits: &[i8]) -> T {
    row.iter()
        .zip(bits)
        .fold(T::zero(), |acc, (&w, &b)| if b > 0 { acc + w } else { acc - w })
}

/// A column of ±1 values; one bit of every code word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitVector(Vec<i8>);

impl BitVector {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b != 1 && b != -1) {
            return Err(Error::InvalidInput(format!(
                "bit {pos} is {}, expected ±1",
                bits[pos]
            )));
        }
        Ok(BitVector(bits))
    }

    pub fn ones(n: usize) -> Self {
        BitVector(vec![1; n])
    }

    /// Sign of each value, with `sign(0) = +1`.
    pub fn from_signs<T: Scalar>(values: &[T]) -> Self {
        BitVector(values.iter().map(|&v| if v < T::zero() { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        BitVector(self.0.iter().map(|&b| -b).collect())
    }

    /// True when every entry is equal.
    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    pub(crate) fn set(&mut self, i: usize, v: i8) {
        debug_assert!(v == 1 || v == -1);
        self.0[i] = v;
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }
}

impl Index<usize> for BitVector {
    type Output = i8;

    fn index(&self, i: usize) -> &i8 {
        &self.0[i]
    }
}

/// Outcome of one solver run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport<T> {
    /// `bᵀWb` of the returned vector on the unshifted matrix.
    pub objective: T,
    /// `b₀ᵀWb₀` of the initial guess.
    pub initial_objective: T,
    /// Vector iterations or full bit sweeps performed.
    pub iterations: usize,
    /// Diagonal shift used to make the matrix positive semidefinite (0 for bit update).
    pub shift_applied: T,
    /// False when the iteration cap was hit before a fixpoint.
    pub converged: bool,
}

/// Graph Laplacian `L = D − W` and signed Laplacian `L̄ = D̄ − W`, where
/// `D` holds row sums of `W` and `D̄` row sums of `|W|`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplacianPair<T: Scalar = f64> {
    pub laplacian: SignedWeightMatrix<T>,
    pub signed_laplacian: SignedWeightMatrix<T>,
}

impl<T: Scalar> LaplacianPair<T> {
    pub fn new(w: &SignedWeightMatrix<T>) -> Self {
        LaplacianPair {
            laplacian: laplacian(w),
            signed_laplacian: signed_laplacian(w),
        }
    }
}

pub fn laplacian<T: Scalar>(w: &SignedWeightMatrix<T>) -> SignedWeightMatrix<T> {
    let degree: Vec<T> = (0..w.n()).map(|i| w.row(i).iter().copied().sum()).collect();
    SignedWeightMatrix::from_upper(w.n(), |i, j| {
        if i == j {
            degree[i] - w.get(i, i)
        } else {
            -w.get(i, j)
        }
    })
}

pub fn signed_laplacian<T: Scalar>(w: &SignedWeightMatrix<T>) -> SignedWeightMatrix<T> {
    let degree: Vec<T> = (0..w.n())
        .map(|i| w.row(i).iter().map(|v| v.abs()).sum())
        .collect();
    SignedWeightMatrix::from_upper(w.n(), |i, j| {
        if i == j {
            degree[i] - w.get(i, i)
        } else {
            -w.get(i, j)
        }
    })
}
