//! Soft-margin SVM with a polynomial kernel, trained by sequential minimal
//! optimization on the dual with per-class box constraints.
//!
//! The solver follows the usual second-order working-set selection: the
//! first index maximizes the KKT violation, the second maximizes the
//! guaranteed decrease of the dual objective.

use std::path::Path;

use mutacyc_core::LabeledDataset;
use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;
/// Rows with a dual coefficient above this are kept as support vectors.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

/// `(gamma * (u . v) + coef0)^degree`.
pub fn kernel_poly(u: &[f64], v: &[f64], gamma: f64, coef0: f64, degree: u32) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (gamma * dot + coef0).powi(degree as i32)
}

/// `1 / (variance * dim)` with the variance taken over every feature
/// value jointly. Falls back to `1 / dim` for constant data.
pub fn default_gamma(features: &[f64], dim: usize) -> f64 {
    let n = features.len() as f64;
    let mean = features.iter().sum::<f64>() / n;
    let var = features.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (var * dim as f64)
    } else {
        1.0 / dim as f64
    }
}

/// Multipliers on `C` for the negative (MA) and positive (NMA) class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub ma: f64,
    pub nma: f64,
}

impl Default for ClassWeights {
    fn default() -> Self {
        Self {
            ma: 1.0,
            nma: 3.998,
        }
    }
}

impl ClassWeights {
    pub fn for_label(&self, y: i8) -> f64 {
        if y > 0 {
            self.nma
        } else {
            self.ma
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvmConfig {
    pub degree: u32,
    pub c: f64,
    pub weights: ClassWeights,
    /// `None` picks [`default_gamma`] on the training features.
    pub gamma: Option<f64>,
    pub coef0: f64,
    /// Stop once the maximal KKT violation drops below this.
    pub tol: f64,
    /// One pass is as many SMO steps as there are training rows.
    pub max_passes: usize,
    /// Kernel row cache budget.
    pub cache_mb: usize,
    /// Record the dual objective after every step (slow; for testing).
    pub trace_objective: bool,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            degree: 2,
            c: 1.0,
            weights: ClassWeights::default(),
            gamma: None,
            coef0: 0.0,
            tol: 1e-3,
            max_passes: 10_000,
            cache_mb: 2048,
            trace_objective: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `-1` (MA) or `+1` (NMA) per support vector.
    pub labels: Vec<i8>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub degree: u32,
    pub gamma: f64,
    pub coef0: f64,
    pub c: f64,
    pub weights: ClassWeights,
}

/// Solver statistics.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations: usize,
    pub kkt_gap: f64,
    /// Dual objective (to be maximized) at the end of training.
    pub dual_objective: f64,
    pub objective_trace: Vec<f64>,
    pub free_support_vectors: usize,
    pub bounded_support_vectors: usize,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    /// `sum_k y_k alpha_k K(x_k, x) + b`.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if !self.support_vectors.is_empty() && x.len() != self.dim() {
            return Err(MlError::Dimension {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(self.kernel_sum(x) + self.bias)
    }

    fn kernel_sum(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.labels)
            .zip(&self.alphas)
            .map(|((sv, &y), &a)| {
                y as f64 * a * kernel_poly(sv, x, self.gamma, self.coef0, self.degree)
            })
            .sum()
    }

    /// Sign of the decision value, with ties going to `+1` (NMA).
    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        Ok(if self.decision(x)? >= 0.0 { 1 } else { -1 })
    }

    /// Predicted dataset labels (0 = MA, 1 = NMA) for each row.
    pub fn predict_dataset(&self, ds: &LabeledDataset) -> Result<Vec<usize>> {
        let x = ds.features_f64();
        x.chunks(ds.dim())
            .map(|row| Ok(usize::from(self.predict(row)? > 0)))
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(f)?)
    }
}

/// Map dataset labels (0 = MA, 1 = NMA) to `-1 / +1`.
pub fn signed_labels(ds: &LabeledDataset) -> Result<Vec<i8>> {
    ds.labels()
        .iter()
        .map(|&l| match l {
            0 => Ok(-1),
            1 => Ok(1),
            other => Err(MlError::LabelOutOfRange {
                label: other as usize,
                classes: 2,
            }),
        })
        .collect()
}

/// Train on a binary dataset.
pub fn svm_train(ds: &LabeledDataset, cfg: &SvmConfig) -> Result<(SvmModel, TrainReport)> {
    let y = signed_labels(ds)?;
    train(&ds.features_f64(), ds.dim(), &y, cfg)
}

/// LRU cache of kernel rows.
struct KernelCache<'a> {
    x: &'a [f64],
    dim: usize,
    gamma: f64,
    coef0: f64,
    degree: u32,
    rows: Vec<Option<Vec<f64>>>,
    last_used: Vec<u64>,
    clock: u64,
    cached: usize,
    capacity: usize,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a [f64], dim: usize, gamma: f64, coef0: f64, degree: u32, cache_mb: usize) -> Self {
        let n = x.len() / dim;
        let row_bytes = (n * std::mem::size_of::<f64>()).max(1);
        let capacity = (cache_mb.saturating_mul(1 << 20) / row_bytes).clamp(2, n.max(2));
        Self {
            x,
            dim,
            gamma,
            coef0,
            degree,
            rows: vec![None; n],
            last_used: vec![0; n],
            clock: 0,
            cached: 0,
            capacity,
        }
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    fn eval(&self, i: usize, j: usize) -> f64 {
        kernel_poly(
            self.point(i),
            self.point(j),
            self.gamma,
            self.coef0,
            self.degree,
        )
    }

    fn ensure(&mut self, i: usize) {
        self.clock += 1;
        self.last_used[i] = self.clock;
        if self.rows[i].is_some() {
            return;
        }
        if self.cached >= self.capacity {
            let victim = (0..self.rows.len())
                .filter(|&k| self.rows[k].is_some())
                .min_by_key(|&k| self.last_used[k])
                .expect("cache is non-empty");
            self.rows[victim] = None;
            self.cached -= 1;
        }
        let n = self.rows.len();
        let row = (0..n).map(|j| self.eval(i, j)).collect();
        self.rows[i] = Some(row);
        self.cached += 1;
    }

    fn row(&self, i: usize) -> &[f64] {
        self.rows[i].as_deref().expect("row was ensured")
    }
}

/// Train on row-major features `x` (`n x dim`) with labels in `{-1, +1}`.
pub fn train(x: &[f64], dim: usize, y: &[i8], cfg: &SvmConfig) -> Result<(SvmModel, TrainReport)> {
    if dim == 0 || x.len() % dim != 0 {
        return Err(MlError::Dimension {
            expected: dim,
            actual: x.len(),
        });
    }
    let n = x.len() / dim;
    if n != y.len() {
        return Err(MlError::LengthMismatch(n, y.len()));
    }
    if n < 2 {
        return Err(MlError::TooFewRows { needed: 2, got: n });
    }
    if cfg.degree == 0 {
        return Err(MlError::Config("kernel degree must be at least 1".into()));
    }
    if !(cfg.c > 0.0 && cfg.weights.ma > 0.0 && cfg.weights.nma > 0.0) {
        return Err(MlError::Config(
            "C and class weights must be positive".into(),
        ));
    }
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(MlError::Config("labels must be -1 or +1".into()));
    }
    let gamma = cfg.gamma.unwrap_or_else(|| default_gamma(x, dim));
    let upper: Vec<f64> = y
        .iter()
        .map(|&v| cfg.c * cfg.weights.for_label(v))
        .collect();
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();

    let mut cache = KernelCache::new(x, dim, gamma, cfg.coef0, cfg.degree, cfg.cache_mb);
    let qd: Vec<f64> = (0..n).map(|i| cache.eval(i, i)).collect();
    let mut alpha = vec![0.0; n];
    // Gradient of 1/2 a'Qa - e'a.
    let mut grad = vec![-1.0; n];
    let is_upper = |a: &[f64], t: usize| a[t] >= upper[t];
    let is_lower = |a: &[f64], t: usize| a[t] <= 0.0;

    let mut report = TrainReport::default();
    let max_iter = cfg.max_passes.saturating_mul(n);
    let mut iter = 0usize;
    loop {
        // First index: maximal violation among I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if y[t] > 0 {
                if !is_upper(&alpha, t) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = t;
                }
            } else if !is_lower(&alpha, t) && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        if i_sel != usize::MAX {
            cache.ensure(i_sel);
            let ki = cache.row(i_sel);
            let mut best = f64::INFINITY;
            for t in 0..n {
                let grad_diff = if y[t] > 0 {
                    if is_lower(&alpha, t) {
                        continue;
                    }
                    gmax2 = gmax2.max(grad[t]);
                    gmax + grad[t]
                } else {
                    if is_upper(&alpha, t) {
                        continue;
                    }
                    gmax2 = gmax2.max(-grad[t]);
                    gmax - grad[t]
                };
                if grad_diff > 0.0 {
                    let quad = qd[i_sel] + qd[t] - 2.0 * ki[t];
                    let q = if quad > 0.0 { quad } else { TAU };
                    let obj = -(grad_diff * grad_diff) / q;
                    if obj <= best {
                        best = obj;
                        j_sel = t;
                    }
                }
            }
        }
        report.kkt_gap = gmax + gmax2;
        if i_sel == usize::MAX || j_sel == usize::MAX || gmax + gmax2 < cfg.tol {
            break;
        }
        if iter >= max_iter {
            return Err(MlError::NotConverged {
                iterations: iter,
                gap: gmax + gmax2,
                tol: cfg.tol,
            });
        }
        iter += 1;

        let (i, j) = (i_sel, j_sel);
        cache.ensure(i);
        cache.ensure(j);
        let ki = cache.row(i);
        let kj = cache.row(j);
        let qij = yf[i] * yf[j] * ki[j];
        let (ci, cj) = (upper[i], upper[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = qd[i] + qd[j] + 2.0 * qij;
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let quad = qd[i] + qd[j] - 2.0 * qij;
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        // Q_tk = y_t y_k K_tk
        let (si, sj) = (yf[i] * di, yf[j] * dj);
        for t in 0..n {
            grad[t] += yf[t] * (ki[t] * si + kj[t] * sj);
        }
        if cfg.trace_objective {
            report.objective_trace.push(dual_objective(&alpha, &grad));
        }
    }
    report.iterations = iter;
    report.dual_objective = dual_objective(&alpha, &grad);

    // Bias from free vectors, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = yf[t] * grad[t];
        if is_upper(&alpha, t) {
            if y[t] < 0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if is_lower(&alpha, t) {
            if y[t] > 0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };

    let mut model = SvmModel {
        support_vectors: Vec::new(),
        labels: Vec::new(),
        alphas: Vec::new(),
        bias: -rho,
        degree: cfg.degree,
        gamma,
        coef0: cfg.coef0,
        c: cfg.c,
        weights: cfg.weights,
    };
    for t in 0..n {
        if alpha[t] > SUPPORT_THRESHOLD {
            model
                .support_vectors
                .push(x[t * dim..(t + 1) * dim].to_vec());
            model.labels.push(y[t]);
            model.alphas.push(alpha[t]);
            if alpha[t] < upper[t] {
                report.free_support_vectors += 1;
            } else {
                report.bounded_support_vectors += 1;
            }
        }
    }
    log::debug!(
        "SMO degree {} finished after {} iterations, {} support vectors, gap {:.2e}",
        cfg.degree,
        iter,
        model.alphas.len(),
        report.kkt_gap
    );
    Ok((model, report))
}

/// `sum(alpha) - 1/2 a'Qa`, written in terms of the gradient `Qa - e`.
fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    -0.5 * alpha
        .iter()
        .zip(grad)
        .map(|(a, g)| a * (g - 1.0))
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clouds() -> (Vec<f64>, Vec<i8>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.1;
            x.extend([2.0 + t, 1.0 - t * 0.5]);
            y.push(1);
            x.extend([-2.0 - t, -0.5 + t * 0.3]);
            y.push(-1);
        }
        (x, y)
    }

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_poly(&[1.0, 2.0], &[3.0, 4.0], 1.0, 0.0, 1), 11.0);
        assert_eq!(kernel_poly(&[1.0, 0.0], &[0.0, 5.0], 0.7, 0.0, 3), 0.0);
        let ones = [1.0; 6];
        assert!((kernel_poly(&ones, &ones, 0.25, 0.0, 2) - 1.5f64.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn separable_clouds_are_fit_exactly() {
        let (x, y) = clouds();
        let cfg = SvmConfig {
            degree: 1,
            weights: ClassWeights { ma: 1.0, nma: 1.0 },
            ..Default::default()
        };
        let (m, _) = train(&x, 2, &y, &cfg).unwrap();
        for (row, &label) in x.chunks(2).zip(&y) {
            assert_eq!(m.predict(row).unwrap(), label);
        }
    }

    #[test]
    fn box_constraints_and_kkt() {
        let (mut x, mut y) = clouds();
        // Add label noise so some multipliers hit their bounds.
        x.extend([1.5, 0.5, -1.5, 0.0]);
        y.extend([-1, 1]);
        let cfg = SvmConfig {
            degree: 2,
            c: 0.5,
            trace_objective: true,
            ..Default::default()
        };
        let (m, report) = train(&x, 2, &y, &cfg).unwrap();
        for (&a, &l) in m.alphas.iter().zip(&m.labels) {
            assert!(a > 0.0 && a <= cfg.c * cfg.weights.for_label(l) + 1e-12);
        }
        for ((sv, &a), &l) in m.support_vectors.iter().zip(&m.alphas).zip(&m.labels) {
            if a < cfg.c * cfg.weights.for_label(l) - 1e-9 {
                let d = m.decision(sv).unwrap();
                assert!((d * l as f64 - 1.0).abs() < 1e-2, "free vector margin {d}");
            }
        }
        assert!(report
            .objective_trace
            .windows(2)
            .all(|w| w[1] >= w[0] - 1e-12));
        assert!(report.bounded_support_vectors > 0);
    }

    #[test]
    fn ties_go_to_nma() {
        let m = SvmModel {
            support_vectors: vec![vec![1.0, 0.0]],
            labels: vec![1],
            alphas: vec![1.0],
            bias: 0.0,
            degree: 1,
            gamma: 1.0,
            coef0: 0.0,
            c: 1.0,
            weights: ClassWeights::default(),
        };
        assert_eq!(m.predict(&[0.0, 3.0]).unwrap(), 1);
        assert!(m.decision(&[1.0]).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(train(&[1.0, 2.0], 2, &[1], &SvmConfig::default()).is_err());
        assert!(train(&[1.0, 2.0], 1, &[1, 0], &SvmConfig::default()).is_err());
        let cfg = SvmConfig {
            degree: 0,
            ..Default::default()
        };
        assert!(train(&[1.0, 2.0], 1, &[1, -1], &cfg).is_err());
    }

    #[test]
    fn tiny_cache_matches_full_cache() {
        let (x, y) = clouds();
        let full = train(
            &x,
            2,
            &y,
            &SvmConfig {
                degree: 3,
                ..Default::default()
            },
        )
        .unwrap()
        .0;
        let tiny = train(
            &x,
            2,
            &y,
            &SvmConfig {
                degree: 3,
                cache_mb: 0,
                ..Default::default()
            },
        )
        .unwrap()
        .0;
        assert_eq!(full, tiny);
    }
}
