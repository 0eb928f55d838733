use rand::seq::index;

use super::coreset::{meb_coreset, DEFAULT_EPSILON};
use crate::point::common_dim;
use crate::{exec, seed, Error, Point, Result, SiblingCohort};

/// Sampling parameters for averaged cohort radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusParams {
    pub sample_size: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for RadiusParams {
    fn default() -> Self {
        RadiusParams {
            sample_size: 10,
            trials: 5,
            epsilon: DEFAULT_EPSILON,
            seed: 0,
        }
    }
}

/// Draws `sample_size` distinct points of `cohort` for trial `trial`.
///
/// The draw depends only on `(seed, word, source, trial)`.
pub fn sample_points(
    cohort: &SiblingCohort,
    sample_size: usize,
    seed: u64,
    trial: usize,
) -> Result<Vec<&Point>> {
    if sample_size == 0 {
        return Err(Error::invalid("sample_size must be at least 1"));
    }
    if cohort.len() < sample_size {
        return Err(Error::InsufficientPoints {
            word: cohort.word().to_string(),
            needed: sample_size,
            available: cohort.len(),
        });
    }
    let key = seed::derive(seed, &format!("{}\u{1f}{}", cohort.word(), cohort.source()));
    let mut rng = seed::rng(seed::derive_index(key, trial as u64));
    let mut picked = index::sample(&mut rng, cohort.len(), sample_size).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| &cohort.points()[i]).collect())
}

/// Mean core-set radius over `trials` random samples of `sample_size` points.
pub fn cohort_radius(cohort: &SiblingCohort, params: &RadiusParams) -> Result<f64> {
    if params.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let radii = exec::try_map_range(params.trials, |trial| {
        let sample: Vec<Point> = sample_points(cohort, params.sample_size, params.seed, trial)?
            .into_iter()
            .cloned()
            .collect();
        meb_coreset(&sample, params.epsilon).map(|b| b.radius)
    })?;
    Ok(radii.iter().sum::<f64>() / radii.len() as f64)
}

/// Mean Euclidean distance over all unordered pairs.
pub fn pairwise_mean_distance(points: &[Point]) -> Result<f64> {
    common_dim(points)?;
    let n = points.len();
    if n < 2 {
        return Err(Error::invalid("pairwise distance needs at least 2 points"));
    }
    let row_sums = exec::map_range(n, |i| {
        points[i + 1..]
            .iter()
            .map(|q| points[i].distance(q))
            .sum::<f64>()
    });
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(row_sums.iter().sum::<f64>() / pairs)
}

/// Volume ratio of two balls in `dim` dimensions whose radii differ by
/// `radius_factor`.
pub fn volume_ratio(radius_factor: f64, dim: usize) -> Result<f64> {
    if !(radius_factor > 0.0 && radius_factor.is_finite()) {
        return Err(Error::invalid(format!("radius_factor must be positive, got {radius_factor}")));
    }
    if dim == 0 {
        return Err(Error::invalid("dim must be at least 1"));
    }
    Ok((dim as f64 * radius_factor.ln()).exp())
}
