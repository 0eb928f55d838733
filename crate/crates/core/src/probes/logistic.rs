//! L2-regularized logistic regression, one-vs-rest.
//!
//! Each binary problem minimizes
//!
//! ```text
//! L(w, b) = Σᵢ cᵢ · log(1 + exp(−sᵢ (w·xᵢ + b))) + (λ/2)‖w‖²,   sᵢ ∈ {−1, +1}
//! ```
//!
//! by full-batch gradient descent. The trial step is the Barzilai–Borwein
//! estimate from the previous iteration, shrunk by backtracking until the
//! Armijo condition holds, so the loss never increases. The bias is not
//! penalized.

use crate::point::dot;
use crate::{exec, Error, Point, Result};

use super::ProbeDataset;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub l2_strength: f64,
    /// Stop once the gradient norm drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Reweight positives and negatives to equal total mass.
    pub balanced: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            l2_strength: 1.0,
            tol: 1e-6,
            max_iter: 1000,
            balanced: false,
        }
    }
}

impl TrainOptions {
    fn check(&self) -> Result<()> {
        if self.l2_strength.is_nan() || self.l2_strength < 0.0 {
            return Err(Error::invalid("l2_strength must be nonnegative"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::invalid("tol must be positive"));
        }
        Ok(())
    }
}

/// One binary problem: rows, ±1 targets and per-row weights.
#[derive(Debug, Clone)]
pub struct BinaryProblem<'a> {
    pub rows: &'a [&'a [f64]],
    pub positive: Vec<bool>,
    pub sample_weight: Vec<f64>,
    pub l2_strength: f64,
}

impl<'a> BinaryProblem<'a> {
    pub fn new(rows: &'a [&'a [f64]], positive: Vec<bool>, l2_strength: f64, balanced: bool) -> Self {
        let n = rows.len() as f64;
        let n_pos = positive.iter().filter(|p| **p).count() as f64;
        let n_neg = n - n_pos;
        let sample_weight = positive
            .iter()
            .map(|&p| match (balanced, p) {
                (false, _) => 1.0,
                (true, true) => n / (2.0 * n_pos),
                (true, false) => n / (2.0 * n_neg),
            })
            .collect();
        BinaryProblem {
            rows,
            positive,
            sample_weight,
            l2_strength,
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    /// Loss and gradient at `params = [w; b]`.
    pub fn objective(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let d = self.dim();
        let (w, b) = params.split_at(d);
        let b = b[0];
        let mut grad = vec![0.0; d + 1];
        let mut loss = 0.0;
        for ((x, &pos), &c) in self.rows.iter().zip(&self.positive).zip(&self.sample_weight) {
            let s = if pos { 1.0 } else { -1.0 };
            let margin = s * (dot(w, x) + b);
            loss += c * softplus(-margin);
            // d/dz log(1+exp(−s z)) = −s σ(−s z)
            let coef = -c * s * sigmoid(-margin);
            for (g, xi) in grad[..d].iter_mut().zip(x.iter()) {
                *g += coef * xi;
            }
            grad[d] += coef;
        }
        loss += 0.5 * self.l2_strength * dot(w, w);
        for (g, wi) in grad[..d].iter_mut().zip(w) {
            *g += self.l2_strength * wi;
        }
        (loss, grad)
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        self.objective(params).0
    }
}

/// Result of fitting one binary problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryFit {
    pub params: Vec<f64>,
    pub iterations: usize,
    pub final_loss: f64,
    pub converged: bool,
    /// Loss before the first step and after every accepted step.
    pub loss_history: Vec<f64>,
}

pub fn fit_binary(problem: &BinaryProblem<'_>, opts: &TrainOptions) -> BinaryFit {
    let d = problem.dim();
    let mut params = vec![0.0; d + 1];
    let (mut loss, mut grad) = problem.objective(&params);
    let mut history = vec![loss];

    // Conservative first step from the Lipschitz bound of the loss.
    let lipschitz: f64 = problem
        .rows
        .iter()
        .zip(&problem.sample_weight)
        .map(|(x, c)| 0.25 * c * (dot(x, x) + 1.0))
        .sum::<f64>()
        + problem.l2_strength;
    let mut step = 1.0 / lipschitz.max(f64::MIN_POSITIVE);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        let gnorm2 = dot(&grad, &grad);
        if gnorm2.sqrt() < opts.tol {
            converged = true;
            break;
        }
        let mut t = step;
        let (next, next_loss, next_grad) = loop {
            let candidate: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - t * g).collect();
            let (l, g) = problem.objective(&candidate);
            if l <= loss - ARMIJO * t * gnorm2 {
                break (candidate, l, g);
            }
            t *= 0.5;
            if t < MIN_STEP {
                return BinaryFit {
                    params,
                    iterations,
                    final_loss: loss,
                    converged: false,
                    loss_history: history,
                };
            }
        };
        let s: Vec<f64> = next.iter().zip(&params).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { dot(&s, &s) / sy } else { 2.0 * t };
        params = next;
        loss = next_loss;
        grad = next_grad;
        history.push(loss);
        iterations += 1;
    }
    if !converged {
        converged = dot(&grad, &grad).sqrt() < opts.tol;
    }
    BinaryFit {
        params,
        iterations,
        final_loss: loss,
        converged,
        loss_history: history,
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitMeta {
    pub iterations: usize,
    pub final_loss: f64,
    pub converged: bool,
}

/// One row of `[w; b]` per class.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub classes: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub l2_strength: f64,
    pub meta: Vec<FitMeta>,
}

impl LinearClassifier {
    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, |w| w.len() - 1)
    }

    pub fn scores(&self, point: &Point) -> Result<Vec<f64>> {
        if point.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: point.dim(),
            });
        }
        let d = self.dim();
        Ok(self
            .weights
            .iter()
            .map(|row| dot(&row[..d], point.coords()) + row[d])
            .collect())
    }

    /// Index of the highest-scoring class; exact ties go to the lowest index.
    pub fn predict_index(&self, point: &Point) -> Result<usize> {
        let scores = self.scores(point)?;
        let mut best = 0;
        for (k, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = k;
            }
        }
        Ok(best)
    }

    pub fn predict(&self, point: &Point) -> Result<&str> {
        Ok(&self.classes[self.predict_index(point)?])
    }
}

/// Fits one binary classifier per class against all others on the
/// training rows of `dataset`.
pub fn train_ovr_logistic(dataset: &ProbeDataset, opts: &TrainOptions) -> Result<LinearClassifier> {
    opts.check()?;
    let k = dataset.classes().len();
    if k < 2 {
        return Err(Error::TooFewClasses);
    }
    let rows: Vec<&[f64]> = dataset.train().iter().map(|lp| lp.point.coords()).collect();
    let labels: Vec<usize> = dataset.train().iter().map(|lp| lp.label).collect();
    let fits = exec::map_range(k, |class| {
        let positive = labels.iter().map(|&l| l == class).collect();
        let problem = BinaryProblem::new(&rows, positive, opts.l2_strength, opts.balanced);
        fit_binary(&problem, opts)
    });
    if fits.iter().flat_map(|f| &f.params).any(|w| !w.is_finite()) {
        return Err(Error::Invariant("training produced non-finite weights".into()));
    }
    let meta = fits
        .iter()
        .map(|f| FitMeta {
            iterations: f.iterations,
            final_loss: f.final_loss,
            converged: f.converged,
        })
        .collect();
    Ok(LinearClassifier {
        classes: dataset.classes().to_vec(),
        weights: fits.into_iter().map(|f| f.params).collect(),
        l2_strength: opts.l2_strength,
        meta,
    })
}
