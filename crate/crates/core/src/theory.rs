//! Range of cosine distances between a fixed unit vector and the points of a
//! ball.
//!
//! Normalizing every point of a ball `B(c, r)` with `r < ‖c‖` yields a
//! spherical cap around `c/‖c‖` of angular radius `θ = arcsin(r/‖c‖)`. If
//! the target `w` makes angle `α` with `c`, every point of the ball makes an
//! angle in `[max(0, α−θ), min(π, α+θ)]` with `w`, and cosine distance
//! `1 − cos` is increasing on `[0, π]`. With the center fixed, a larger `r`
//! widens the cap and therefore the range of distances.

use crate::point::dot;
use crate::{Error, Point, Result};

/// Unit-norm tolerance for targets.
const UNIT_TOL: f64 = 1e-9;

/// Angular half-width of the normalized image of a ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfAngle {
    /// Origin outside the ball: the image is a cap of this half-angle (radians).
    Arc(f64),
    /// Origin inside or on the ball: normalized points cover every direction.
    FullSphere,
}

pub fn arc_half_angle(center: &Point, radius: f64) -> Result<HalfAngle> {
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::invalid(format!("radius must be nonnegative, got {radius}")));
    }
    let norm = center.norm();
    if norm == 0.0 {
        return Err(Error::ArcUndefined);
    }
    if radius >= norm {
        Ok(HalfAngle::FullSphere)
    } else {
        Ok(HalfAngle::Arc((radius / norm).asin()))
    }
}

/// A ball (`center`, `radius`) and a unit `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineRangeQuery {
    center: Point,
    radius: f64,
    target: Point,
    half_angle: HalfAngle,
    offset_angle: f64,
}

impl CosineRangeQuery {
    pub fn new(center: Point, radius: f64, target: Point) -> Result<Self> {
        if center.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: center.dim(),
                found: target.dim(),
            });
        }
        let tn = target.norm();
        if (tn - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!("target must have unit norm, got {tn}")));
        }
        let half_angle = arc_half_angle(&center, radius)?;
        let cos_alpha = dot(center.coords(), target.coords()) / (center.norm() * tn);
        Ok(CosineRangeQuery {
            offset_angle: cos_alpha.clamp(-1.0, 1.0).acos(),
            center,
            radius,
            target,
            half_angle,
        })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn target(&self) -> &Point {
        &self.target
    }

    pub fn half_angle(&self) -> HalfAngle {
        self.half_angle
    }

    /// Angle between the target and the ball center, in `[0, π]`.
    pub fn offset_angle(&self) -> f64 {
        self.offset_angle
    }
}

/// Closed interval of cosine distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineRange {
    pub lo: f64,
    pub hi: f64,
    /// Set when the origin lies in the ball and the interval is `[0, 2]`.
    pub full_sphere: bool,
}

impl CosineRange {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, d: f64, slack: f64) -> bool {
        d >= self.lo - slack && d <= self.hi + slack
    }
}

pub fn cosine_distance_range(query: &CosineRangeQuery) -> CosineRange {
    match query.half_angle {
        HalfAngle::FullSphere => CosineRange {
            lo: 0.0,
            hi: 2.0,
            full_sphere: true,
        },
        HalfAngle::Arc(theta) => {
            let alpha = query.offset_angle;
            CosineRange {
                lo: 1.0 - (alpha - theta).max(0.0).cos(),
                hi: 1.0 - (alpha + theta).min(std::f64::consts::PI).cos(),
                full_sphere: false,
            }
        }
    }
}

/// Cosine distance `1 − cos(a, b)` for nonzero vectors.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt());
    1.0 - c.clamp(-1.0, 1.0)
}

/// True iff the interval width is nondecreasing along `radii` with `center`
/// and `target` fixed. `target` need not be unit length.
pub fn range_width_monotone(center: &Point, target: &Point, radii: &[f64]) -> Result<bool> {
    if radii.is_empty() {
        return Err(Error::invalid("radius grid is empty"));
    }
    if radii.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::invalid("radii must be strictly increasing"));
    }
    let norm = center.norm();
    if let Some(r) = radii.iter().find(|&&r| r >= norm || r < 0.0) {
        return Err(Error::invalid(format!("radius {r} must lie in [0, ‖center‖ = {norm})")));
    }
    let tn = target.norm();
    if tn == 0.0 {
        return Err(Error::invalid("target is the zero vector"));
    }
    let unit = Point::new(target.coords().iter().map(|x| x / tn).collect())?;
    let mut prev = f64::NEG_INFINITY;
    for &r in radii {
        let q = CosineRangeQuery::new(center.clone(), r, unit.clone())?;
        let w = cosine_distance_range(&q).width();
        if w < prev {
            return Ok(false);
        }
        prev = w;
    }
    Ok(true)
}
