use super::{signed_dot, BitVector, SignedWeightMatrix, SolverReport};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_VECTOR_ITERATIONS: usize = 1000;
pub const MAX_BIT_SWEEPS: usize = 100;
/// Largest problem [`exhaustive_maxcut`] will enumerate (2ⁿ⁻¹ candidates).
pub const MAX_EXHAUSTIVE_N: usize = 22;

fn check_dims<T: Scalar>(w: &SignedWeightMatrix<T>, b: &BitVector) -> Result<()> {
    if w.n() != b.len() {
        return Err(Error::DimensionMismatch {
            what: "bit vector",
            expected: w.n(),
            found: b.len(),
        });
    }
    Ok(())
}

/// `bᵀWb`, accumulated row by row in index order.
pub fn objective<T: Scalar>(w: &SignedWeightMatrix<T>, b: &BitVector) -> Result<T> {
    check_dims(w, b)?;
    Ok(objective_unchecked(w, b))
}

fn objective_unchecked<T: Scalar>(w: &SignedWeightMatrix<T>, b: &BitVector) -> T {
    let bits = b.as_slice();
    (0..w.n()).fold(T::zero(), |acc, i| {
        let r = signed_dot(w.row(i), bits);
        if bits[i] > 0 {
            acc + r
        } else {
            acc - r
        }
    })
}

/// Smallest `s ≥ 0` such that `W + sI` is positive semidefinite by the
/// Gershgorin bound `λ_min ≥ minᵢ (Wᵢᵢ − Σ_{j≠i} |Wᵢⱼ|)`.
fn gershgorin_shift<T: Scalar>(w: &SignedWeightMatrix<T>) -> T {
    let lower = (0..w.n())
        .map(|i| {
            let radius: T = w
                .row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.abs())
                .sum();
            w.get(i, i) - radius
        })
        .fold(T::infinity(), T::min);
    if lower.is_finite() && lower < T::zero() {
        -lower
    } else {
        T::zero()
    }
}

/// Returns `(W + shift·I, shift)`.
pub fn psd_shift<T: Scalar>(w: &SignedWeightMatrix<T>) -> (SignedWeightMatrix<T>, T) {
    let shift = gershgorin_shift(w);
    (w.with_diagonal_added(shift), shift)
}

/// Whole-vector updates `b ← sign((W + sI) b)` until a fixpoint.
pub fn vector_update<T: Scalar>(
    w: &SignedWeightMatrix<T>,
    b0: &BitVector,
) -> Result<(BitVector, SolverReport<T>)> {
    vector_update_with(w, b0, MAX_VECTOR_ITERATIONS, |_| {})
}

/// [`vector_update`] with an explicit cap; `on_iterate` sees `b0` and every
/// subsequent iterate.
pub fn vector_update_with<T: Scalar>(
    w: &SignedWeightMatrix<T>,
    b0: &BitVector,
    max_iterations: usize,
    mut on_iterate: impl FnMut(&BitVector),
) -> Result<(BitVector, SolverReport<T>)> {
    check_dims(w, b0)?;
    let shift = gershgorin_shift(w);
    let initial = objective_unchecked(w, b0);

    let mut b = b0.clone();
    on_iterate(&b);
    let mut best = (initial, b.clone());
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        // (W + sI) b without materializing the shifted matrix.
        let field: Vec<T> = (0..w.n())
            .map(|i| signed_dot(w.row(i), b.as_slice()) + shift * T::of(b[i] as f64))
            .collect();
        let next = BitVector::from_signs(&field);
        if next == b {
            converged = true;
            break;
        }
        b = next;
        on_iterate(&b);
        let obj = objective_unchecked(w, &b);
        if obj > best.0 {
            best = (obj, b.clone());
        }
    }
    let out = if converged { b } else { best.1 };
    let report = SolverReport {
        objective: objective_unchecked(w, &out),
        initial_objective: initial,
        iterations,
        shift_applied: shift,
        converged,
    };
    Ok((out, report))
}

/// Coordinate sweeps `b[i] ← sign(Σ_{j≠i} W[j,i] b[j])` with immediate
/// write-back, keeping the current bit on an exact zero.
pub fn bit_update<T: Scalar>(
    w: &SignedWeightMatrix<T>,
    b0: &BitVector,
) -> Result<(BitVector, SolverReport<T>)> {
    bit_update_with(w, b0, MAX_BIT_SWEEPS, |_, _| {})
}

/// [`bit_update`] with an explicit sweep cap; `on_flip(i, b)` is called after
/// every flip of bit `i`.
pub fn bit_update_with<T: Scalar>(
    w: &SignedWeightMatrix<T>,
    b0: &BitVector,
    max_sweeps: usize,
    mut on_flip: impl FnMut(usize, &BitVector),
) -> Result<(BitVector, SolverReport<T>)> {
    check_dims(w, b0)?;
    let n = w.n();
    let mut b = b0.clone();
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut changed = false;
        for i in 0..n {
            let row = w.row(i);
            let bits = b.as_slice();
            // Diagonal excluded; summed as two halves so W[i,i] never enters.
            let field = signed_dot(&row[..i], &bits[..i]) + signed_dot(&row[i + 1..], &bits[i + 1..]);
            let next = if field > T::zero() {
                1
            } else if field < T::zero() {
                -1
            } else {
                bits[i]
            };
            if next != bits[i] {
                b.set(i, next);
                changed = true;
                on_flip(i, &b);
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    let report = SolverReport {
        objective: objective_unchecked(w, &b),
        initial_objective: objective_unchecked(w, b0),
        iterations: sweeps,
        shift_applied: T::zero(),
        converged,
    };
    Ok((b, report))
}

/// Exact maximizer of `bᵀWb` by enumeration with `b[0] = +1`.
///
/// Among exact ties the lexicographically first vector wins, ordering `+1`
/// before `−1`.
pub fn exhaustive_maxcut<T: Scalar>(w: &SignedWeightMatrix<T>) -> Result<(BitVector, T)> {
    let n = w.n();
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::TooLarge {
            what: "exhaustive max-cut instance",
            n,
            max: MAX_EXHAUSTIVE_N,
        });
    }
    if n == 0 {
        return Ok((BitVector::ones(0), T::zero()));
    }
    // Lexicographic key: position 1 is the most significant, −1 sorts after +1.
    let key = |b: &BitVector| -> u64 {
        (1..n).fold(0u64, |k, i| (k << 1) | u64::from(b[i] < 0))
    };

    let scale: T = w.as_slice().iter().map(|v| v.abs()).sum();
    let slack = scale * T::of(1e-9);

    let mut b = BitVector::ones(n);
    let mut field = w.mul_bits(&b);
    let mut best_b = b.clone();
    let mut best = objective_unchecked(w, &b);

    // Gray-code walk: one flip per step, field updated in O(n).
    for step in 1u64..(1u64 << (n - 1)) {
        let pos = step.trailing_zeros() as usize + 1;
        let s = T::of(b[pos] as f64);
        let two = T::of(2.0);
        for (j, f) in field.iter_mut().enumerate() {
            *f -= two * s * w.get(j, pos);
        }
        b.set(pos, -b[pos]);
        let approx: T = field
            .iter()
            .zip(b.as_slice())
            .map(|(&f, &bi)| if bi > 0 { f } else { -f })
            .sum();
        if approx + slack >= best {
            let exact = objective_unchecked(w, &b);
            if exact > best || (exact == best && key(&b) < key(&best_b)) {
                best = exact;
                best_b = b.clone();
            }
        }
    }
    Ok((best_b, best))
}
