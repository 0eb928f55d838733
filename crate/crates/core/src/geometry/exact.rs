use rand::seq::SliceRandom;

use crate::point::{common_dim, dist2, dot};
use crate::seed;
use crate::{Ball, Error, Point, Result};

/// Largest dimension accepted by the exact solver.
pub const EXACT_MAX_DIM: usize = 10;

const DEFAULT_SHUFFLE_SEED: u64 = 0x5eed_ba11;

/// Exact minimum enclosing ball for small dimensions (Welzl's randomized
/// recursion in move-to-front form). Deterministic: the input is shuffled
/// with a fixed seed.
pub fn meb_exact_small(points: &[Point]) -> Result<Ball> {
    meb_exact_small_seeded(points, DEFAULT_SHUFFLE_SEED)
}

pub fn meb_exact_small_seeded(points: &[Point], shuffle_seed: u64) -> Result<Ball> {
    let dim = common_dim(points)?;
    if dim > EXACT_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            max: EXACT_MAX_DIM,
        });
    }
    let coords: Vec<&[f64]> = points.iter().map(Point::coords).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(&mut seed::rng(shuffle_seed));

    let mut boundary = Vec::with_capacity(dim + 1);
    let (center, r2) = move_to_front(&coords, &mut order, points.len(), &mut boundary, dim)
        .ok_or_else(|| Error::Invariant("exact solver produced no ball".into()))?;

    let radius = coords
        .iter()
        .map(|p| dist2(p, &center))
        .fold(r2, f64::max)
        .sqrt();
    let tol = 1e-9 * radius.max(1e-300);
    let support_size = coords
        .iter()
        .filter(|p| (dist2(p, &center).sqrt() - radius).abs() <= tol)
        .count();
    Ok(Ball {
        center: Point::new(center)?,
        radius,
        epsilon: 0.0,
        support_size,
    })
}

type RawBall = (Vec<f64>, f64);

fn move_to_front(
    pts: &[&[f64]],
    order: &mut Vec<usize>,
    end: usize,
    boundary: &mut Vec<usize>,
    dim: usize,
) -> Option<RawBall> {
    let mut ball = circumball(pts, boundary);
    if boundary.len() == dim + 1 {
        return ball;
    }
    for i in 0..end {
        let idx = order[i];
        if ball.as_ref().is_some_and(|b| inside(b, pts[idx])) {
            continue;
        }
        boundary.push(idx);
        let grown = move_to_front(pts, order, i, boundary, dim);
        boundary.pop();
        if grown.is_some() {
            ball = grown;
        }
        order.remove(i);
        order.insert(0, idx);
    }
    ball
}

fn inside((center, r2): &RawBall, p: &[f64]) -> bool {
    dist2(p, center) <= r2 * (1.0 + 1e-12) + 1e-300
}

/// Smallest ball with every boundary point on its sphere; `None` when the
/// boundary set is empty or affinely dependent.
fn circumball(pts: &[&[f64]], boundary: &[usize]) -> Option<RawBall> {
    let (&first, rest) = boundary.split_first()?;
    let base = pts[first];
    if rest.is_empty() {
        return Some((base.to_vec(), 0.0));
    }
    let k = rest.len();
    let vs: Vec<Vec<f64>> = rest
        .iter()
        .map(|&j| pts[j].iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    // 2 VVᵀ λ = diag(VVᵀ)
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = 2.0 * dot(&vs[i], &vs[j]);
        }
        a[i][k] = dot(&vs[i], &vs[i]);
    }
    let lambda = solve_augmented(a)?;
    let mut center = base.to_vec();
    for (l, v) in lambda.iter().zip(&vs) {
        for (c, x) in center.iter_mut().zip(v) {
            *c += l * x;
        }
    }
    let r2 = boundary
        .iter()
        .map(|&j| dist2(pts[j], &center))
        .fold(0.0, f64::max);
    Some((center, r2))
}

/// Gaussian elimination with partial pivoting on an augmented `k × (k+1)` system.
fn solve_augmented(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let k = a.len();
    let scale = (0..k).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..k {
        let pivot = (col..k).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (upper, lower) = a.split_at_mut(row);
                for (x, p) in lower[0][col..=k].iter_mut().zip(&upper[col][col..=k]) {
                    *x -= f * p;
                }
            }
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let tail: f64 = (row + 1..k).map(|c| a[row][c] * x[c]).sum();
        x[row] = (a[row][k] - tail) / a[row][row];
    }
    Some(x)
}
