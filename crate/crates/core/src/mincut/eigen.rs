//! Extreme eigenpairs of dense symmetric matrices.
//!
//! Only a handful of the algebraically smallest pairs are ever needed (for
//! the spectral initial guesses), so the solver is a Lanczos iteration with
//! full reorthogonalization. Converged pairs are locked and deflated one at
//! a time; unconverged runs restart from the current Ritz vector with a
//! larger Krylov space. Every returned pair satisfies `‖Mv − λv‖ ≤ tol`.

use rand_distr::{Distribution, StandardNormal};

use super::SignedWeightMatrix;
use crate::error::{Error, Result};
use crate::rng::{derived_rng, Rng};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenConfig {
    /// Residual tolerance `‖Mv − λv‖`.
    pub tol: f64,
    /// Budget of matrix-vector products.
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            tol: 1e-8,
            max_iterations: 100_000,
            seed: 0x5EED,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair<T> {
    pub value: T,
    /// Unit vector; oriented so that its first non-negligible entry is positive.
    pub vector: Vec<T>,
    pub residual: T,
    /// Another computed eigenvalue lies within `√tol·max(1, |λ|)`, so the
    /// vector is only determined up to rotation within that eigenspace.
    pub degenerate: bool,
}

/// The `k` algebraically smallest eigenpairs of `m`, ascending.
pub fn smallest_eigenpairs<T: Scalar>(
    m: &SignedWeightMatrix<T>,
    k: usize,
    cfg: &EigenConfig,
) -> Result<Vec<EigenPair<T>>> {
    smallest_eigenpairs_excluding(m, k, &[], cfg)
}

/// Like [`smallest_eigenpairs`] but restricted to the orthogonal complement
/// of `exclude`, which must span an invariant subspace (known eigenvectors).
pub fn smallest_eigenpairs_excluding<T: Scalar>(
    m: &SignedWeightMatrix<T>,
    k: usize,
    exclude: &[Vec<T>],
    cfg: &EigenConfig,
) -> Result<Vec<EigenPair<T>>> {
    let n = m.n();
    let mut basis: Vec<Vec<T>> = Vec::new();
    for v in exclude {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                what: "excluded vector",
                expected: n,
                found: v.len(),
            });
        }
        let mut v = v.clone();
        if orthonormalize(&mut v, &basis) {
            basis.push(v);
        }
    }
    let avail = n - basis.len();
    if k > avail {
        return Err(Error::InvalidInput(format!(
            "requested {k} eigenpairs but only {avail} dimensions are available"
        )));
    }
    if k == 0 {
        return Ok(Vec::new());
    }

    let anorm = m.norm_inf();
    let floor = T::of(64.0) * T::epsilon() * anorm.max(T::one());
    let tol = T::of(cfg.tol).max(floor);

    // One extra pair, when available, to detect degeneracy of the k-th.
    let target = (k + 1).min(avail);
    let mut found: Vec<(T, Vec<T>, T)> = Vec::new();
    let mut budget = cfg.max_iterations;
    let mut run = 0u64;
    let mut last_residual = T::zero();
    while found.len() < target {
        let remaining = n - basis.len();
        let mut steps = remaining.min(64);
        let mut rng = derived_rng(cfg.seed, "lanczos", &[run]);
        let mut start = random_vector(n, &mut rng);
        loop {
            run += 1;
            let spent = steps + 1;
            if spent > budget {
                return Err(Error::NotConverged {
                    iterations: cfg.max_iterations,
                    residual: last_residual.widen(),
                });
            }
            budget -= spent;
            let (value, vector) = lanczos_smallest(m, &basis, start, steps, anorm, &mut rng);
            let mv = m.mul_vec(&vector);
            let residual = mv
                .iter()
                .zip(&vector)
                .map(|(&a, &x)| (a - value * x) * (a - value * x))
                .sum::<T>()
                .sqrt();
            last_residual = residual;
            if residual <= tol {
                basis.push(vector.clone());
                found.push((value, vector, residual));
                break;
            }
            // The extra degeneracy probe is never returned; one run is enough.
            if found.len() == k {
                found.push((value, vector, residual));
                break;
            }
            start = vector;
            steps = (steps * 2).min(remaining);
        }
    }
    // Locking order is ascending up to round-off; sort to be safe.
    found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let gap_tol = |v: T| T::of(cfg.tol).sqrt() * v.abs().max(T::one());
    let values: Vec<T> = found.iter().map(|p| p.0).collect();
    let pairs = found
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (value, mut vector, residual))| {
            let close = |j: usize| (values[j] - value).abs() <= gap_tol(value);
            let degenerate = (i > 0 && close(i - 1)) || (i + 1 < values.len() && close(i + 1));
            orient(&mut vector);
            EigenPair {
                value,
                vector,
                residual,
                degenerate,
            }
        })
        .collect();
    Ok(pairs)
}

fn random_vector<T: Scalar>(n: usize, rng: &mut Rng) -> Vec<T> {
    (0..n)
        .map(|_| T::of(StandardNormal.sample(&mut *rng)))
        .collect()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Two passes of classical Gram-Schmidt against `basis`, then normalize.
/// Returns false if nothing independent is left.
fn orthonormalize<T: Scalar>(v: &mut [T], basis: &[Vec<T>]) -> bool {
    let before = norm(v);
    if before == T::zero() {
        return false;
    }
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (x, &y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
    let after = norm(v);
    if after <= before * T::of(1e-10) || after == T::zero() {
        return false;
    }
    for x in v.iter_mut() {
        *x /= after;
    }
    true
}

/// Smallest Ritz pair from `steps` Lanczos steps in the complement of `locked`.
fn lanczos_smallest<T: Scalar>(
    m: &SignedWeightMatrix<T>,
    locked: &[Vec<T>],
    mut start: Vec<T>,
    steps: usize,
    anorm: T,
    rng: &mut Rng,
) -> (T, Vec<T>) {
    let n = m.n();
    let breakdown = T::of(100.0) * T::epsilon() * anorm;
    let mut q: Vec<Vec<T>> = Vec::with_capacity(steps);
    let mut alpha: Vec<T> = Vec::with_capacity(steps);
    let mut beta: Vec<T> = Vec::with_capacity(steps);

    let mut all: Vec<Vec<T>> = locked.to_vec();
    if !orthonormalize(&mut start, &all) {
        loop {
            start = random_vector(n, rng);
            if orthonormalize(&mut start, &all) {
                break;
            }
        }
    }
    let mut current = start;
    for j in 0..steps {
        let mut w = m.mul_vec(&current);
        let a = dot(&current, &w);
        for (x, &c) in w.iter_mut().zip(&current) {
            *x -= a * c;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (x, &p) in w.iter_mut().zip(&q[j - 1]) {
                *x -= b * p;
            }
        }
        q.push(current);
        alpha.push(a);
        all.push(q[j].clone());
        if j + 1 == steps {
            break;
        }
        for _ in 0..2 {
            for v in &all {
                let c = dot(v, &w);
                for (x, &y) in w.iter_mut().zip(v) {
                    *x -= c * y;
                }
            }
        }
        let b = norm(&w);
        if b > breakdown {
            for x in w.iter_mut() {
                *x /= b;
            }
            beta.push(b);
            current = w;
        } else {
            // Invariant subspace: continue with a fresh orthogonal direction.
            let mut fresh = random_vector(n, rng);
            if !orthonormalize(&mut fresh, &all) {
                break;
            }
            beta.push(T::zero());
            current = fresh;
        }
    }

    let size = alpha.len();
    let mut off = beta[..size - 1].to_vec();
    off.push(T::zero());
    let (values, vectors) = tridiagonal_eigen(&alpha, &off);
    let idx = (0..size)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        .unwrap();
    let mut x = vec![T::zero(); n];
    for (j, qj) in q.iter().enumerate() {
        let c = vectors[j * size + idx];
        for (xi, &v) in x.iter_mut().zip(qj) {
            *xi += c * v;
        }
    }
    // Re-project out the locked space and renormalize against drift.
    orthonormalize(&mut x, locked);
    (values[idx], x)
}

/// Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `off[i]` couples rows `i` and `i + 1`; `off[m-1]` is
/// ignored. Returns values and the row-major `m × m` eigenvector matrix
/// (column `j` belongs to value `j`).
pub fn tridiagonal_eigen<T: Scalar>(diag: &[T], off: &[T]) -> (Vec<T>, Vec<T>) {
    let m = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    if m > 0 {
        e[m - 1] = T::zero();
    }
    let mut z = vec![T::zero(); m * m];
    for i in 0..m {
        z[i * m + i] = T::one();
    }
    let two = T::of(2.0);
    for l in 0..m {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < m {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= T::epsilon() * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > 60 * m.max(1) {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[mm] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = mm;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[mm] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..m {
                    let f = z[k * m + i + 1];
                    z[k * m + i + 1] = s * z[k * m + i] + c * f;
                    z[k * m + i] = c * z[k * m + i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = T::zero();
        }
    }
    (d, z)
}

/// Flips `v` so its first entry with magnitude above `√ε·max|v|` is positive.
fn orient<T: Scalar>(v: &mut [T]) {
    let max = v.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let cut = T::epsilon().sqrt() * max;
    if let Some(&first) = v.iter().find(|x| x.abs() > cut) {
        if first < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}
