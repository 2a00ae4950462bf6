//! Hash functions for unseen points.
//!
//! Every bit gets a Gaussian-kernel logistic classifier fitted to the
//! trainer's optimal bit. All bits share one set of kernel centers and one
//! bandwidth ([`KernelBasis`]). During training the classifier's in-sample
//! predictions replace the optimal bit before it is accumulated, so later
//! bits see (and can correct) the errors of earlier classifiers.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::affinity::{Dataset, FeatureMatrix, ProximityLabels};
use crate::error::{Error, Result};
use crate::mincut::BitVector;
use crate::rng::derived_rng;
use crate::scalar::Scalar;
use crate::trainer::{
    commit_bit, logistic_complement, logistic_loss, solve_bit, BitLog, CodeMatrix, TrainConfig,
    TrainerState,
};

pub const MODEL_VERSION: u32 = 1;

/// Kernel classifier settings, shared by every bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// Gaussian width; `None` picks the median pairwise distance.
    pub sigma: Option<f64>,
    /// Ridge penalty on the kernel coefficients.
    pub ridge: f64,
    /// Upper bound on the number of kernel centers.
    pub max_centers: usize,
    /// Points sampled for the median-distance bandwidth.
    pub sigma_sample: usize,
    pub max_iterations: usize,
    /// Stop when the largest gradient component falls below this.
    pub tol: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            sigma: None,
            ridge: 1e-3,
            max_centers: 1000,
            sigma_sample: 1000,
            max_iterations: 500,
            tol: 1e-6,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidConfig(format!("kernel sigma must be positive, got {s}")));
            }
        }
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return Err(Error::InvalidConfig(format!("ridge must be non-negative, got {}", self.ridge)));
        }
        if self.max_centers == 0 {
            return Err(Error::InvalidConfig("max_centers must be at least 1".into()));
        }
        if self.sigma_sample < 2 {
            return Err(Error::InvalidConfig("sigma_sample must be at least 2".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be non-negative, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Centers and bandwidth of the Gaussian kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelBasis<T: Scalar = f64> {
    centers: FeatureMatrix<T>,
    sigma: f64,
}

impl<T: Scalar> KernelBasis<T> {
    pub fn new(centers: FeatureMatrix<T>, sigma: f64) -> Result<Self> {
        if centers.rows() == 0 {
            return Err(Error::InvalidInput("kernel basis needs at least one center".into()));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidInput(format!("kernel sigma must be positive, got {sigma}")));
        }
        Ok(KernelBasis { centers, sigma })
    }

    /// Draws `min(n, max_centers)` centers uniformly (kept in data order) and
    /// sets the bandwidth from the configuration or the median distance.
    pub fn from_data(data: &Dataset<T>, cfg: &KernelConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let n = data.n();
        let m = n.min(cfg.max_centers);
        let mut idx = sample(&mut derived_rng(seed, "centers", &[]), n, m).into_vec();
        idx.sort_unstable();
        let centers = data.features().select(&idx);
        let sigma = match cfg.sigma {
            Some(s) => s,
            None => median_distance(data.features(), cfg.sigma_sample, seed),
        };
        Self::new(centers, sigma)
    }

    pub fn centers(&self) -> &FeatureMatrix<T> {
        &self.centers
    }

    pub fn m(&self) -> usize {
        self.centers.rows()
    }

    pub fn d(&self) -> usize {
        self.centers.cols()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `k(x, c_j) = exp(−‖x − c_j‖² / 2σ²)` for every center.
    pub fn kernel_row(&self, x: &[T]) -> Result<Vec<f64>> {
        if x.len() != self.d() {
            return Err(Error::DimensionMismatch {
                what: "feature vector",
                expected: self.d(),
                found: x.len(),
            });
        }
        let scale = -0.5 / (self.sigma * self.sigma);
        Ok((0..self.m())
            .map(|j| {
                let sq: f64 = self
                    .centers
                    .row(j)
                    .iter()
                    .zip(x)
                    .map(|(c, v)| {
                        let t = c.widen() - v.widen();
                        t * t
                    })
                    .sum();
                (scale * sq).exp()
            })
            .collect())
    }
}

/// Median pairwise Euclidean distance over at most `limit` sampled rows; 1
/// when all sampled points coincide.
pub fn median_distance<T: Scalar>(x: &FeatureMatrix<T>, limit: usize, seed: u64) -> f64 {
    let n = x.rows();
    let mut idx = sample(&mut derived_rng(seed, "sigma", &[]), n, n.min(limit)).into_vec();
    idx.sort_unstable();
    let mut dist = Vec::with_capacity(idx.len() * idx.len().saturating_sub(1) / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let sq: f64 = x
                .row(i)
                .iter()
                .zip(x.row(j))
                .map(|(u, v)| (u.widen() - v.widen()).powi(2))
                .sum();
            dist.push(sq.sqrt());
        }
    }
    if dist.is_empty() {
        return 1.0;
    }
    let mid = dist.len() / 2;
    let (_, &mut med, _) = dist.select_nth_unstable_by(mid, f64::total_cmp);
    if med > 0.0 && med.is_finite() {
        med
    } else {
        1.0
    }
}

/// `sign(Σⱼ aⱼ k(x, cⱼ) + b)` with `sign(0) = +1`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelClassifier<T: Scalar = f64> {
    basis: Arc<KernelBasis<T>>,
    coefficients: Vec<T>,
    bias: T,
}

impl<T: Scalar> KernelClassifier<T> {
    pub fn new(basis: Arc<KernelBasis<T>>, coefficients: Vec<T>, bias: T) -> Result<Self> {
        if coefficients.len() != basis.m() {
            return Err(Error::DimensionMismatch {
                what: "kernel coefficients",
                expected: basis.m(),
                found: coefficients.len(),
            });
        }
        Ok(KernelClassifier {
            basis,
            coefficients,
            bias,
        })
    }

    /// All-zero coefficients; the sign of `bias` decides every point.
    pub fn constant(basis: Arc<KernelBasis<T>>, bias: T) -> Self {
        let m = basis.m();
        KernelClassifier {
            basis,
            coefficients: vec![T::zero(); m],
            bias,
        }
    }

    pub fn basis(&self) -> &Arc<KernelBasis<T>> {
        &self.basis
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn bias(&self) -> T {
        self.bias
    }

    pub fn bandwidth(&self) -> f64 {
        self.basis.sigma
    }

    fn decision_from_row(&self, row: &[f64]) -> f64 {
        row.iter()
            .zip(&self.coefficients)
            .fold(self.bias.widen(), |acc, (k, a)| acc + k * a.widen())
    }

    pub fn decision(&self, x: &[T]) -> Result<f64> {
        Ok(self.decision_from_row(&self.basis.kernel_row(x)?))
    }

    pub fn predict(&self, x: &[T]) -> Result<i8> {
        Ok(sign(self.decision(x)?))
    }
}

fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

pub fn predict_bit<T: Scalar>(clf: &KernelClassifier<T>, x: &[T]) -> Result<i8> {
    clf.predict(x)
}

/// A fitted classifier and how well it reproduces its targets.
#[derive(Clone, Debug)]
pub struct BitFit<T: Scalar = f64> {
    pub classifier: KernelClassifier<T>,
    pub predictions: BitVector,
    /// Fraction of training points where the prediction equals the target.
    pub accuracy: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Row-major `n × m` kernel matrix between the data and the basis centers.
pub fn kernel_matrix<T: Scalar>(basis: &KernelBasis<T>, x: &FeatureMatrix<T>) -> Result<Vec<f64>> {
    let mut k = Vec::with_capacity(x.rows() * basis.m());
    for i in 0..x.rows() {
        k.extend(basis.kernel_row(x.row(i))?);
    }
    Ok(k)
}

/// Fits one bit. `kernel` is the precomputed [`kernel_matrix`] of the
/// training features against `basis`.
pub fn fit_bit_classifier<T: Scalar>(
    basis: Arc<KernelBasis<T>>,
    kernel: &[f64],
    targets: &BitVector,
    cfg: &KernelConfig,
) -> Result<BitFit<T>> {
    let n = targets.len();
    let m = basis.m();
    if kernel.len() != n * m {
        return Err(Error::DimensionMismatch {
            what: "kernel matrix entries",
            expected: n * m,
            found: kernel.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("cannot fit a classifier on zero points".into()));
    }
    let y: Vec<f64> = targets.as_slice().iter().map(|&v| v as f64).collect();

    let (classifier, iterations, converged) = if targets.is_constant() {
        (KernelClassifier::constant(basis, T::of(y[0])), 0, true)
    } else {
        let problem = Logistic { kernel, y: &y, m, ridge: cfg.ridge };
        let (theta, iterations, converged) = lbfgs(&problem, vec![0.0; m + 1], cfg.max_iterations, cfg.tol);
        let coefficients = theta[..m].iter().map(|&a| T::of(a)).collect();
        (KernelClassifier::new(basis, coefficients, T::of(theta[m]))?, iterations, converged)
    };

    let predictions: Vec<i8> = kernel
        .chunks_exact(m)
        .map(|row| sign(classifier.decision_from_row(row)))
        .collect();
    let hits = predictions.iter().zip(targets.as_slice()).filter(|(a, b)| a == b).count();
    Ok(BitFit {
        classifier,
        predictions: BitVector::new(predictions)?,
        accuracy: hits as f64 / n as f64,
        iterations,
        converged,
    })
}

/// Mean logistic loss of `f = Ka + b` plus `λ/2 ‖a‖²`; `θ = (a, b)`.
struct Logistic<'a> {
    kernel: &'a [f64],
    y: &'a [f64],
    m: usize,
    ridge: f64,
}

impl Logistic<'_> {
    fn eval(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let m = self.m;
        let n = self.y.len() as f64;
        let (a, b) = (&theta[..m], theta[m]);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for (row, &y) in self.kernel.chunks_exact(m).zip(self.y) {
            let f = row.iter().zip(a).fold(b, |acc, (k, a)| acc + k * a);
            let z = y * f;
            loss += logistic_loss(z);
            // d/df ln(1 + e^{−yf}) = −y / (1 + e^{yf})
            let r = -y * logistic_complement(z) / n;
            for (g, k) in grad[..m].iter_mut().zip(row) {
                *g += r * k;
            }
            grad[m] += r;
        }
        let mut penalty = 0.0;
        for (g, a) in grad[..m].iter_mut().zip(a) {
            *g += self.ridge * a;
            penalty += a * a;
        }
        loss / n + 0.5 * self.ridge * penalty
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS with backtracking (Armijo) line search. Returns the
/// final iterate, the iteration count and whether the gradient tolerance was
/// met. Every accepted step decreases the objective, so the final iterate is
/// the best one seen.
fn lbfgs(problem: &Logistic<'_>, mut x: Vec<f64>, max_iter: usize, tol: f64) -> (Vec<f64>, usize, bool) {
    const MEMORY: usize = 10;
    let dim = x.len();
    let mut g = vec![0.0; dim];
    let mut f = problem.eval(&x, &mut g);
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(MEMORY);
    let mut x_new = vec![0.0; dim];
    let mut g_new = vec![0.0; dim];

    for iter in 0..max_iter {
        if g.iter().all(|v| v.abs() <= tol) {
            return (x, iter, true);
        }
        // Two-loop recursion for d = −H g.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut coeffs = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let c = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= c * yi);
            coeffs.push(c);
        }
        if let Some((s, y, _)) = history.last() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for ((s, y, rho), c) in history.iter().zip(coeffs.iter().rev()) {
            let beta = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (c - beta) * si);
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            // Lost descent direction: fall back to steepest descent.
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut step = if history.is_empty() {
            1.0 / g.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            x_new.iter_mut().zip(&x).zip(&d).for_each(|((xn, xi), di)| *xn = xi + step * di);
            let f_new = problem.eval(&x_new, &mut g_new);
            if f_new <= f + 1e-4 * step * slope {
                accepted = Some(f_new);
                break;
            }
            step *= 0.5;
        }
        let Some(f_new) = accepted else {
            return (x, iter, false);
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == MEMORY {
                history.remove(0);
            }
            history.push((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
    }
    let done = g.iter().all(|v| v.abs() <= tol);
    (x, max_iter, done)
}

/// The hash function family plus the retrieval threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct HashModel<T: Scalar = f64> {
    basis: Arc<KernelBasis<T>>,
    classifiers: Vec<KernelClassifier<T>>,
    alpha: f64,
    train_bit_accuracy: Vec<f64>,
}

impl<T: Scalar> HashModel<T> {
    pub fn new(
        basis: Arc<KernelBasis<T>>,
        classifiers: Vec<KernelClassifier<T>>,
        alpha: f64,
        train_bit_accuracy: Vec<f64>,
    ) -> Result<Self> {
        let p = classifiers.len();
        if train_bit_accuracy.len() != p {
            return Err(Error::DimensionMismatch {
                what: "train_bit_accuracy",
                expected: p,
                found: train_bit_accuracy.len(),
            });
        }
        if classifiers.iter().any(|c| !Arc::ptr_eq(&c.basis, &basis) && *c.basis != *basis) {
            return Err(Error::InvalidInput("classifiers must share the model's kernel basis".into()));
        }
        if p > 0 && !(alpha >= -1.0 && alpha <= 2.0 * p as f64 - 1.0) {
            return Err(Error::InvalidInput(format!("alpha {alpha} outside [-1, {}]", 2 * p - 1)));
        }
        Ok(HashModel {
            basis,
            classifiers,
            alpha,
            train_bit_accuracy,
        })
    }

    pub fn p(&self) -> usize {
        self.classifiers.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn basis(&self) -> &KernelBasis<T> {
        &self.basis
    }

    pub fn classifiers(&self) -> &[KernelClassifier<T>] {
        &self.classifiers
    }

    pub fn train_bit_accuracy(&self) -> &[f64] {
        &self.train_bit_accuracy
    }

    /// Codes for every row of `x`; column `j` is `[h¹(x_j), …, h^p(x_j)]`.
    pub fn encode(&self, x: &FeatureMatrix<T>) -> Result<CodeMatrix> {
        if self.p() == 0 {
            return Err(Error::InvalidInput("model has no bits".into()));
        }
        let n = x.rows();
        let mut bits = vec![Vec::with_capacity(n); self.p()];
        for i in 0..n {
            let row = self.basis.kernel_row(x.row(i))?;
            for (bit, clf) in bits.iter_mut().zip(&self.classifiers) {
                bit.push(sign(clf.decision_from_row(&row)));
            }
        }
        let bits = bits.into_iter().map(BitVector::new).collect::<Result<_>>()?;
        CodeMatrix::from_bits(n, bits)
    }

    /// Model JSON with every float written to 17 significant digits.
    pub fn to_json(&self) -> String {
        fn num(out: &mut String, v: f64) {
            write!(out, "{v:.16e}").expect("writing to a String");
        }
        fn list<T: Scalar>(out: &mut String, vals: &[T]) {
            out.push('[');
            for (i, v) in vals.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                num(out, v.widen());
            }
            out.push(']');
        }

        let mut s = String::new();
        write!(s, "{{\"version\":{MODEL_VERSION},\"p\":{},\"alpha\":", self.p()).unwrap();
        num(&mut s, self.alpha);
        s.push_str(",\"kernel\":{\"type\":\"gaussian\",\"sigma\":");
        num(&mut s, self.basis.sigma);
        s.push_str("},\n\"centers\":[");
        for j in 0..self.basis.m() {
            if j > 0 {
                s.push_str(",\n");
            }
            list(&mut s, self.basis.centers.row(j));
        }
        s.push_str("],\n\"bits\":[");
        for (k, clf) in self.classifiers.iter().enumerate() {
            if k > 0 {
                s.push_str(",\n");
            }
            s.push_str("{\"coeffs\":");
            list(&mut s, &clf.coefficients);
            s.push_str(",\"bias\":");
            num(&mut s, clf.bias.widen());
            s.push('}');
        }
        s.push_str("],\n\"train_bit_accuracy\":");
        list(&mut s, &self.train_bit_accuracy);
        s.push_str("}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {}", file.version)));
        }
        if file.kernel.kind != "gaussian" {
            return Err(Error::Format(format!("unsupported kernel type {:?}", file.kernel.kind)));
        }
        if file.bits.len() != file.p {
            return Err(Error::Format(format!("p = {} but {} bits listed", file.p, file.bits.len())));
        }
        let d = file.centers.first().map_or(0, Vec::len);
        let rows: Vec<Vec<T>> = file
            .centers
            .iter()
            .map(|r| r.iter().map(|&v| T::of(v)).collect())
            .collect();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Format("centers have unequal lengths".into()));
        }
        let centers = FeatureMatrix::from_rows(&rows).map_err(|e| Error::Format(e.to_string()))?;
        let basis = Arc::new(KernelBasis::new(centers, file.kernel.sigma).map_err(|e| Error::Format(e.to_string()))?);
        let classifiers = file
            .bits
            .into_iter()
            .map(|b| {
                let coeffs = b.coeffs.into_iter().map(T::of).collect();
                KernelClassifier::new(Arc::clone(&basis), coeffs, T::of(b.bias))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Format(e.to_string()))?;
        let accuracy = file.train_bit_accuracy.unwrap_or_else(|| vec![f64::NAN; file.p]);
        Self::new(basis, classifiers, file.alpha, accuracy).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub fn encode<T: Scalar>(model: &HashModel<T>, x: &FeatureMatrix<T>) -> Result<CodeMatrix> {
    model.encode(x)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    p: usize,
    alpha: f64,
    kernel: KernelFile,
    centers: Vec<Vec<f64>>,
    bits: Vec<BitFile>,
    #[serde(default)]
    train_bit_accuracy: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelFile {
    #[serde(rename = "type")]
    kind: String,
    sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BitFile {
    coeffs: Vec<f64>,
    bias: f64,
}

/// Output of [`train_with_hashing`].
#[derive(Clone, Debug)]
pub struct HashTraining<T: Scalar = f64> {
    pub model: HashModel<T>,
    /// Classifier-produced training codes; `state` is accumulated from these.
    pub codes: CodeMatrix,
    /// The optimal bits the classifiers were fitted to.
    pub targets: CodeMatrix,
    pub state: TrainerState,
    pub log: Vec<BitLog>,
    /// Whether each bit's optimizer met its gradient tolerance.
    pub fit_converged: Vec<bool>,
}

/// Trains codes and hash functions together. Each bit's classifier
/// predictions, not the optimal bit, are accumulated into the trainer state.
pub fn train_with_hashing<T: Scalar>(
    data: &Dataset<T>,
    labels: &ProximityLabels,
    cfg: &TrainConfig,
    kernel_cfg: &KernelConfig,
) -> Result<HashTraining<T>> {
    cfg.validate()?;
    kernel_cfg.validate()?;
    let n = data.n();
    if labels.n() != n {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: n,
            found: labels.n(),
        });
    }
    let basis = Arc::new(KernelBasis::from_data(data, kernel_cfg, cfg.seed)?);
    let kernel = kernel_matrix(&basis, data.features())?;

    let mut state = TrainerState::new(n);
    let mut codes = CodeMatrix::empty(n);
    let mut targets = CodeMatrix::empty(n);
    let mut classifiers = Vec::new();
    let mut accuracy = Vec::new();
    let mut fit_converged = Vec::new();
    let mut log = Vec::new();
    while codes.p() < cfg.max_bits {
        let sol = solve_bit::<T>(&state, labels, cfg)?;
        let fit = fit_bit_classifier(Arc::clone(&basis), &kernel, &sol.bits, kernel_cfg)?;
        let report = commit_bit(&mut state, labels, &fit.predictions)?;
        log.push(BitLog {
            bit: state.bits_done(),
            alpha: state.alpha_hat,
            beta: state.beta_hat,
            empirical_loss: report.empirical,
            relaxed_loss: report.relaxed,
            solver_objective: sol.report.objective.widen(),
            iterations: sol.report.iterations,
        });
        codes.push(fit.predictions)?;
        targets.push(sol.bits)?;
        classifiers.push(fit.classifier);
        accuracy.push(fit.accuracy);
        fit_converged.push(fit.converged);
        if report.empirical <= cfg.target_empirical_loss {
            break;
        }
    }
    let model = HashModel::new(basis, classifiers, state.alpha_hat, accuracy)?;
    Ok(HashTraining {
        model,
        codes,
        targets,
        state,
        log,
        fit_converged,
    })
}
