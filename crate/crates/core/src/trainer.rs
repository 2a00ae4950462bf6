//! Bit-sequential code construction.
//!
//! For bit `k + 1` the trainer first fixes the threshold `α̂` that balances
//! misclassified near and far pairs under the current `k`-bit code, then
//! linearizes the logistic loss around the current margins
//! `γᵢⱼ = Bᵢⱼ − β̂` (with `B = CᵀC` and `β̂ = k − α̂`). The gradient gives
//! the signed weights `Wᵢⱼ = yᵢⱼ / (1 + exp(yᵢⱼ γᵢⱼ))`, and the new bit is
//! the best `b` found for `max bᵀWb`. Pairs are unordered and counted once.

use serde::{Deserialize, Serialize};

use crate::affinity::ProximityLabels;
use crate::error::{Error, Result};
use crate::mincut::eigen::{EigenConfig, EigenPair};
use crate::mincut::init::{
    init_fiedler, init_random, init_signed_laplacian, nontrivial_laplacian_pairs,
    projection_coefficients, project_signs, PROJECTION_RANK,
};
use crate::mincut::{bit_update, vector_update, BitVector, SignedWeightMatrix, SolverReport};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

/// `p × n` matrix of ±1 codes stored as its `p` bit rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeMatrix {
    n: usize,
    bits: Vec<BitVector>,
}

impl CodeMatrix {
    pub fn empty(n: usize) -> Self {
        CodeMatrix { n, bits: Vec::new() }
    }

    pub fn from_bits(n: usize, bits: Vec<BitVector>) -> Result<Self> {
        let mut c = CodeMatrix::empty(n);
        for b in bits {
            c.push(b)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, b: BitVector) -> Result<()> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "code bit",
                expected: self.n,
                found: b.len(),
            });
        }
        self.bits.push(b);
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.bits.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bit(&self, k: usize) -> &BitVector {
        &self.bits[k]
    }

    pub fn bits(&self) -> &[BitVector] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize) -> i8 {
        self.bits[k][i]
    }

    /// Code word of point `i`.
    pub fn code(&self, i: usize) -> Vec<i8> {
        self.bits.iter().map(|b| b[i]).collect()
    }

    /// `p − cᵢᵀcⱼ`, twice the number of differing bits.
    pub fn hamming(&self, i: usize, j: usize) -> i32 {
        self.bits.iter().filter(|b| b[i] != b[j]).count() as i32 * 2
    }
}

/// Per-bit loss summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    /// Pairs with `yᵢⱼ(α − d_H) < 0`.
    pub empirical: u64,
    /// `Σ ln(1 + exp(−yᵢⱼ(Bᵢⱼ − β)))` with `β = k − α`.
    pub relaxed: f64,
    pub alpha: f64,
    pub margin_min: f64,
    pub margin_mean: f64,
}

/// Gram matrix of the emitted bits plus the current threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainerState {
    n: usize,
    /// Full `n × n` row-major `B = CᵀC`.
    gram: Vec<i32>,
    bits_done: usize,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub loss_history: Vec<LossReport>,
}

impl TrainerState {
    pub fn new(n: usize) -> Self {
        TrainerState {
            n,
            gram: vec![0; n * n],
            bits_done: 0,
            alpha_hat: 0.0,
            beta_hat: 0.0,
            loss_history: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits_done(&self) -> usize {
        self.bits_done
    }

    #[inline]
    pub fn gram(&self, i: usize, j: usize) -> i32 {
        self.gram[i * self.n + j]
    }

    /// Doubled Hamming distance of pair `(i, j)` from the gram entry.
    pub fn hamming(&self, i: usize, j: usize) -> Result<i32> {
        hamming_from_gram(self.gram(i, j), self.bits_done)
    }

    /// Checks symmetry, diagonal, range and parity of `B`.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.bits_done as i32;
        for i in 0..self.n {
            if self.gram(i, i) != k {
                return Err(Error::Corrupt(format!("B[{i},{i}] = {} ≠ {k}", self.gram(i, i))));
            }
            for j in i + 1..self.n {
                let b = self.gram(i, j);
                if b != self.gram(j, i) || b.abs() > k || (k - b) % 2 != 0 {
                    return Err(Error::Corrupt(format!("B[{i},{j}] = {b} with {k} bits")));
                }
            }
        }
        Ok(())
    }
}

/// `k − Bᵢⱼ`; fails when the entry cannot come from `k` ±1 bits.
pub fn hamming_from_gram(b: i32, k: usize) -> Result<i32> {
    let k = k as i32;
    if b.abs() > k || (k - b) % 2 != 0 {
        return Err(Error::Corrupt(format!("gram entry {b} is inconsistent with {k} bits")));
    }
    Ok(k - b)
}

/// `B ← B + b bᵀ`.
pub fn accumulate(state: &mut TrainerState, b: &BitVector) -> Result<()> {
    let n = state.n;
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            what: "bit vector",
            expected: n,
            found: b.len(),
        });
    }
    let bits = b.as_slice();
    for (i, row) in state.gram.chunks_exact_mut(n).enumerate() {
        let bi = bits[i] as i32;
        for (g, &bj) in row.iter_mut().zip(bits) {
            *g += bi * bj as i32;
        }
    }
    state.bits_done += 1;
    Ok(())
}

/// `ln(1 + e^{−z})` without overflow.
pub fn logistic_loss(z: f64) -> f64 {
    (-z).max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `1 / (1 + eˣ)` without overflow.
pub(crate) fn logistic_complement<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        let e = (-x).exp();
        e / (T::one() + e)
    } else {
        T::one() / (T::one() + x.exp())
    }
}

/// Neumaier-compensated running sum; loss totals run over millions of pairs.
#[derive(Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// Relaxed loss `Σ ln(1 + exp(−yᵢⱼ(Bᵢⱼ − β)))` over unordered pairs.
pub fn relaxed_loss(labels: &ProximityLabels, state: &TrainerState, beta: f64) -> f64 {
    let mut total = CompensatedSum::default();
    for (i, j, near) in labels.pairs() {
        let y = if near { 1.0 } else { -1.0 };
        total.add(logistic_loss(y * (state.gram(i, j) as f64 - beta)));
    }
    total.value()
}

/// Empirical and relaxed loss at threshold `alpha`.
pub fn empirical_loss(labels: &ProximityLabels, state: &TrainerState, alpha: f64) -> LossReport {
    let k = state.bits_done as f64;
    let beta = k - alpha;
    let mut empirical = 0u64;
    let mut relaxed = CompensatedSum::default();
    let mut margin_min = f64::INFINITY;
    let mut margin_sum = CompensatedSum::default();
    for (i, j, near) in labels.pairs() {
        let y = if near { 1.0 } else { -1.0 };
        let b = state.gram(i, j) as f64;
        let z = y * (alpha - (k - b));
        if z < 0.0 {
            empirical += 1;
        }
        relaxed.add(logistic_loss(y * (b - beta)));
        margin_min = margin_min.min(z);
        margin_sum.add(z);
    }
    let pairs = labels.pair_count().max(1) as f64;
    LossReport {
        empirical,
        relaxed: relaxed.value(),
        alpha,
        margin_min,
        margin_mean: margin_sum.value() / pairs,
    }
}

/// Histograms of `d_H / 2 ∈ [0, k]` for near and far pairs.
pub fn distance_histograms(labels: &ProximityLabels, state: &TrainerState) -> (Vec<u64>, Vec<u64>) {
    let k = state.bits_done;
    let mut near = vec![0u64; k + 1];
    let mut far = vec![0u64; k + 1];
    for (i, j, is_near) in labels.pairs() {
        let half = ((k as i32 - state.gram(i, j)) / 2) as usize;
        if is_near {
            near[half] += 1;
        } else {
            far[half] += 1;
        }
    }
    (near, far)
}

/// Result of the threshold scan.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaChoice {
    pub alpha: f64,
    pub beta: f64,
    /// `|E_N(α)|`: near pairs with `d_H > α`.
    pub near_errors: u64,
    /// `|E_F(α)|`: far pairs with `d_H ≤ α`.
    pub far_errors: u64,
    /// No near or no far pairs exist; `α` is an extreme of the grid.
    pub degenerate: bool,
}

/// Scans `α ∈ {−1, 1, …, 2k−1}` for the smallest `||E_N| − |E_F||`, ties
/// going to the smaller `α`.
pub fn optimize_alpha(labels: &ProximityLabels, state: &TrainerState) -> Result<AlphaChoice> {
    let k = state.bits_done;
    if k == 0 {
        return Err(Error::InvalidInput("threshold scan needs at least one bit".into()));
    }
    let (near, far) = distance_histograms(labels, state);
    Ok(balance_alpha(&near, &far))
}

/// Threshold scan on precomputed histograms of `d_H / 2`.
pub fn balance_alpha(near: &[u64], far: &[u64]) -> AlphaChoice {
    let k = near.len() - 1;
    let mut near_errors: u64 = near.iter().sum();
    let mut far_errors = 0u64;
    let degenerate = near_errors == 0 || far.iter().sum::<u64>() == 0;
    let mut best = (u64::MAX, 0usize, 0, 0);
    // Candidate c is α = 2c − 1: near pairs with d/2 ≥ c and far pairs with d/2 < c err.
    for c in 0..=k {
        if c > 0 {
            near_errors -= near[c - 1];
            far_errors += far[c - 1];
        }
        let gap = near_errors.abs_diff(far_errors);
        if gap < best.0 {
            best = (gap, c, near_errors, far_errors);
        }
    }
    let alpha = 2.0 * best.1 as f64 - 1.0;
    AlphaChoice {
        alpha,
        beta: k as f64 - alpha,
        near_errors: best.2,
        far_errors: best.3,
        degenerate,
    }
}

/// `Wᵢⱼ = yᵢⱼ / (1 + exp(yᵢⱼ(Bᵢⱼ − β)))` off the diagonal, zero on it.
pub fn weight_matrix<T: Scalar>(labels: &ProximityLabels, state: &TrainerState, beta: f64) -> SignedWeightMatrix<T> {
    let n = state.n;
    let mut data = vec![T::zero(); n * n];
    let mut pair = 0;
    for i in 0..n {
        for j in i + 1..n {
            let y = if labels.is_near_at(pair) { T::one() } else { -T::one() };
            let gamma = T::of(state.gram(i, j) as f64 - beta);
            let w = y * logistic_complement(y * gamma);
            data[i * n + j] = w;
            data[j * n + i] = w;
            pair += 1;
        }
    }
    SignedWeightMatrix::from_raw(n, data)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateScheme {
    #[default]
    Bit,
    Vector,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMethod {
    #[default]
    Random,
    Fiedler,
    SignedLaplacian,
    RandomProjection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub max_bits: usize,
    /// Training stops once the empirical loss is at or below this count.
    pub target_empirical_loss: u64,
    pub solver: UpdateScheme,
    pub init: InitMethod,
    /// Initial guesses tried per bit; the best objective wins. Ignored by the
    /// deterministic spectral guesses.
    pub restarts: usize,
    pub seed: u64,
    #[serde(skip)]
    pub eigen: EigenConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_bits: 32,
            target_empirical_loss: 0,
            solver: UpdateScheme::Bit,
            init: InitMethod::Random,
            restarts: 4,
            seed: 0,
            eigen: EigenConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_bits == 0 {
            return Err(Error::InvalidConfig("code length must be at least 1 bit".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// The bit chosen for one step, before it is committed to the state.
#[derive(Clone, Debug, PartialEq)]
pub struct BitSolution<T> {
    pub bits: BitVector,
    pub report: SolverReport<T>,
    /// Threshold and offset the weights were built with.
    pub alpha: f64,
    pub beta: f64,
    pub restarts_run: usize,
}

/// One line of the JSON-lines training log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitLog {
    pub bit: usize,
    pub alpha: f64,
    pub beta: f64,
    pub empirical_loss: u64,
    pub relaxed_loss: f64,
    pub solver_objective: f64,
    pub iterations: usize,
}

fn initial_guesses<T: Scalar>(
    w: &SignedWeightMatrix<T>,
    cfg: &TrainConfig,
    bit: usize,
) -> Result<Vec<BitVector>> {
    let n = w.n();
    let seed = |r: usize| derive_seed(cfg.seed, "init", &[bit as u64, r as u64]);
    Ok(match cfg.init {
        InitMethod::Random => (0..cfg.restarts).map(|r| init_random(n, seed(r))).collect(),
        InitMethod::Fiedler => vec![init_fiedler(w, &cfg.eigen)?.bits],
        InitMethod::SignedLaplacian => vec![init_signed_laplacian(w, &cfg.eigen)?.bits],
        InitMethod::RandomProjection => {
            if n < 2 || w.is_zero() {
                return Ok(vec![BitVector::ones(n)]);
            }
            let pairs: Vec<EigenPair<T>> = nontrivial_laplacian_pairs(w, PROJECTION_RANK.min(n - 1), &cfg.eigen)?;
            (0..cfg.restarts)
                .map(|r| project_signs(&pairs, &projection_coefficients(pairs.len(), seed(r))))
                .collect()
        }
    })
}

/// Step I and II for the next bit: threshold scan, weight matrix, and the
/// best solver outcome over the configured initial guesses.
pub fn solve_bit<T: Scalar>(
    state: &TrainerState,
    labels: &ProximityLabels,
    cfg: &TrainConfig,
) -> Result<BitSolution<T>> {
    if labels.n() != state.n {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: state.n,
            found: labels.n(),
        });
    }
    // Before the first bit the margins are taken as zero (β̂ = 0 against an empty B).
    let (alpha, beta) = if state.bits_done == 0 {
        (0.0, 0.0)
    } else {
        let c = optimize_alpha(labels, state)?;
        (c.alpha, c.beta)
    };
    let w = weight_matrix::<T>(labels, state, beta);
    let guesses = initial_guesses(&w, cfg, state.bits_done)?;
    let restarts_run = guesses.len();
    let mut best: Option<(BitVector, SolverReport<T>)> = None;
    for b0 in &guesses {
        let (b, report) = match cfg.solver {
            UpdateScheme::Bit => bit_update(&w, b0)?,
            UpdateScheme::Vector => vector_update(&w, b0)?,
        };
        if best.as_ref().map_or(true, |(_, r)| report.objective > r.objective) {
            best = Some((b, report));
        }
    }
    let (bits, report) = best.expect("at least one initial guess");
    Ok(BitSolution {
        bits,
        report,
        alpha,
        beta,
        restarts_run,
    })
}

/// Accumulates `b`, rebalances the threshold for the new length and records
/// the losses at it.
pub fn commit_bit(state: &mut TrainerState, labels: &ProximityLabels, b: &BitVector) -> Result<LossReport> {
    accumulate(state, b)?;
    let choice = optimize_alpha(labels, state)?;
    state.alpha_hat = choice.alpha;
    state.beta_hat = choice.beta;
    let report = empirical_loss(labels, state, choice.alpha);
    state.loss_history.push(report.clone());
    Ok(report)
}

fn log_line<T: Scalar>(state: &TrainerState, report: &LossReport, sol: &SolverReport<T>) -> BitLog {
    BitLog {
        bit: state.bits_done,
        alpha: state.alpha_hat,
        beta: state.beta_hat,
        empirical_loss: report.empirical,
        relaxed_loss: report.relaxed,
        solver_objective: sol.objective.widen(),
        iterations: sol.iterations,
    }
}

/// One full step: solve, accumulate, report.
pub fn train_bit<T: Scalar>(
    state: &mut TrainerState,
    labels: &ProximityLabels,
    cfg: &TrainConfig,
) -> Result<(BitSolution<T>, LossReport, BitLog)> {
    let sol = solve_bit::<T>(state, labels, cfg)?;
    let report = commit_bit(state, labels, &sol.bits)?;
    let log = log_line(state, &report, &sol.report);
    Ok((sol, report, log))
}

/// Output of [`train`].
#[derive(Clone, Debug)]
pub struct Training {
    pub codes: CodeMatrix,
    pub state: TrainerState,
    pub log: Vec<BitLog>,
}

/// Adds bits until the empirical loss reaches the target or `max_bits` is hit.
pub fn train<T: Scalar>(labels: &ProximityLabels, cfg: &TrainConfig) -> Result<Training> {
    cfg.validate()?;
    let n = labels.n();
    let mut state = TrainerState::new(n);
    let mut codes = CodeMatrix::empty(n);
    let mut log = Vec::new();
    while codes.p() < cfg.max_bits {
        let (sol, report, line) = train_bit::<T>(&mut state, labels, cfg)?;
        codes.push(sol.bits)?;
        log.push(line);
        if report.empirical <= cfg.target_empirical_loss {
            break;
        }
    }
    Ok(Training { codes, state, log })
}
