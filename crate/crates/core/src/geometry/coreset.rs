use crate::point::{common_dim, dist2, dot};
use crate::{exec, Ball, Error, Point, Result};

pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Above this many points the Gram matrix is not materialised and each
/// iteration pays `O(n·d)` instead of `O(n)`.
const GRAM_MAX_POINTS: usize = 4096;

/// `(1+epsilon)`-approximate minimum enclosing ball by core-set iteration.
///
/// The center starts at the first point and at step `i` moves a `1/(i+1)`
/// fraction of the way toward the current farthest point, for at most
/// `⌈1/epsilon²⌉` steps. The center is always a convex combination
/// `Σ uⱼ pⱼ` of the inputs, so `Σ uⱼ‖pⱼ − c‖²` is a lower bound on the
/// squared optimal radius; iteration stops as soon as the farthest distance
/// is within `1 + epsilon` of that bound.
///
/// The returned radius is the largest distance from the returned center to
/// any input point, so every input lies inside the ball.
pub fn meb_coreset(points: &[Point], epsilon: f64) -> Result<Ball> {
    let dim = common_dim(points)?;
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 0.5], got {epsilon}")));
    }
    let n = points.len();
    let max_iter = (1.0 / (epsilon * epsilon)).ceil() as u64;

    // Work relative to the first point to keep the Gram route well conditioned.
    let origin = points[0].coords();
    let shifted: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.coords().iter().zip(origin).map(|(a, b)| a - b).collect())
        .collect();

    let mut state = if n <= GRAM_MAX_POINTS {
        Distances::gram(&shifted)
    } else {
        Distances::direct(&shifted, dim)
    };

    let mut weights = vec![0.0; n];
    weights[0] = 1.0;
    let mut best_lower2 = 0.0_f64;
    let mut best_upper2 = f64::INFINITY;
    let mut best_weights = weights.clone();
    let ratio2 = (1.0 + epsilon) * (1.0 + epsilon);

    for i in 1..=max_iter {
        let (far, upper2, lower2) = state.scan(&weights);
        best_lower2 = best_lower2.max(lower2);
        if upper2 < best_upper2 {
            best_upper2 = upper2;
            best_weights.copy_from_slice(&weights);
        }
        if upper2 <= ratio2 * best_lower2 {
            best_weights.copy_from_slice(&weights);
            break;
        }
        let step = 1.0 / (i as f64 + 1.0);
        for w in weights.iter_mut() {
            *w *= 1.0 - step;
        }
        weights[far] += step;
        state.step(far, step);
    }

    let mut center = vec![0.0; dim];
    for (w, q) in best_weights.iter().zip(&shifted) {
        if *w > 0.0 {
            for (c, x) in center.iter_mut().zip(q) {
                *c += w * x;
            }
        }
    }
    for (c, o) in center.iter_mut().zip(origin) {
        *c += o;
    }
    let radius = points
        .iter()
        .map(|p| dist2(p.coords(), &center))
        .fold(0.0_f64, f64::max)
        .sqrt();
    Ok(Ball {
        center: Point::new(center)?,
        radius,
        epsilon,
        support_size: best_weights.iter().filter(|w| **w > 0.0).count(),
    })
}

/// Squared distances from the running center to every point.
enum Distances<'a> {
    /// `sⱼ = Σₖ uₖ Gⱼₖ` and `uᵀGu` tracked incrementally, `O(n)` per step.
    Gram {
        gram: Vec<f64>,
        n: usize,
        s: Vec<f64>,
        quad: f64,
    },
    /// Explicit center, `O(n·d)` per step.
    Direct { q: &'a [Vec<f64>], center: Vec<f64> },
}

impl<'a> Distances<'a> {
    fn gram(q: &[Vec<f64>]) -> Self {
        let n = q.len();
        let upper = exec::map_range(n, |i| q[i..].iter().map(|x| dot(&q[i], x)).collect::<Vec<_>>());
        let mut gram = vec![0.0; n * n];
        for (i, row) in upper.into_iter().enumerate() {
            for (off, g) in row.into_iter().enumerate() {
                gram[i * n + i + off] = g;
                gram[(i + off) * n + i] = g;
            }
        }
        // The center starts at q[0] = 0, so s = G[0, ·] = 0 and uᵀGu = 0.
        Distances::Gram {
            gram,
            n,
            s: vec![0.0; n],
            quad: 0.0,
        }
    }

    fn direct(q: &'a [Vec<f64>], dim: usize) -> Self {
        Distances::Direct {
            q,
            center: vec![0.0; dim],
        }
    }

    /// Returns (farthest index, farthest squared distance, Σ uⱼ dⱼ²).
    fn scan(&self, weights: &[f64]) -> (usize, f64, f64) {
        let mut far = 0;
        let mut upper = f64::NEG_INFINITY;
        let mut lower = 0.0;
        let mut visit = |j: usize, d2: f64| {
            let d2 = d2.max(0.0);
            if d2 > upper {
                upper = d2;
                far = j;
            }
            lower += weights[j] * d2;
        };
        match self {
            Distances::Gram { gram, n, s, quad } => {
                for j in 0..*n {
                    visit(j, gram[j * n + j] - 2.0 * s[j] + quad);
                }
            }
            Distances::Direct { q, center } => {
                for (j, x) in q.iter().enumerate() {
                    visit(j, dist2(x, center));
                }
            }
        }
        (far, upper, lower)
    }

    fn step(&mut self, far: usize, step: f64) {
        match self {
            Distances::Gram { gram, n, s, quad } => {
                let row = &gram[far * *n..(far + 1) * *n];
                // u' = (1-t)u + t·e_far
                *quad = (1.0 - step) * (1.0 - step) * *quad
                    + 2.0 * step * (1.0 - step) * s[far]
                    + step * step * row[far];
                for (sj, g) in s.iter_mut().zip(row) {
                    *sj = (1.0 - step) * *sj + step * g;
                }
            }
            Distances::Direct { q, center } => {
                for (c, x) in center.iter_mut().zip(&q[far]) {
                    *c += step * (x - *c);
                }
            }
        }
    }
}
