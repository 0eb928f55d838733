//! Minimum enclosing balls and other size measures of sibling cohorts.

mod coreset;
mod exact;
mod measures;

pub use coreset::{meb_coreset, DEFAULT_EPSILON};
pub use exact::{meb_exact_small, meb_exact_small_seeded, EXACT_MAX_DIM};
pub use measures::{
    cohort_radius, pairwise_mean_distance, sample_points, volume_ratio, RadiusParams,
};

use crate::point::common_dim;
use crate::{Error, Point, Result};

/// A ball in `d` dimensions produced by one of the enclosing-ball solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Point,
    /// Largest distance from `center` to any input point.
    pub radius: f64,
    /// Approximation tolerance the solver certified; 0 for exact solutions.
    pub epsilon: f64,
    /// Number of distinct input points that determined the solution.
    pub support_size: usize,
}

impl Ball {
    pub fn contains(&self, p: &Point, slack: f64) -> bool {
        self.center.distance(p) <= self.radius * (1.0 + slack)
    }
}

/// Provenance tag of a cohort, e.g. `base`, `multilingual`, `artificial`.
pub type SourceTag = String;

/// All contextual embeddings of one word from one source.
#[derive(Debug, Clone, PartialEq)]
pub struct SiblingCohort {
    word: String,
    source: SourceTag,
    points: Vec<Point>,
}

impl SiblingCohort {
    pub fn new(word: impl Into<String>, source: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        let word = word.into();
        if word.is_empty() {
            return Err(Error::invalid("cohort word is empty"));
        }
        common_dim(&points)?;
        Ok(SiblingCohort {
            word,
            source: source.into(),
            points,
        })
    }

    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}
