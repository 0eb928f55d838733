//! Correlations, least squares and binning helpers.

use crate::{Error, Result};

/// Two equal-length series of finite values, at least two observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(Error::invalid("a paired series needs at least 2 observations"));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("paired series contains a non-finite value"));
        }
        Ok(PairedSeries { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Centered sums of squares and cross products: (Sxx, Syy, Sxy).
fn moments(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    x.iter().zip(y).fold((0.0, 0.0, 0.0), |(sxx, syy, sxy), (a, b)| {
        let (dx, dy) = (a - mx, b - my);
        (sxx + dx * dx, syy + dy * dy, sxy + dx * dy)
    })
}

/// Sample Pearson correlation.
pub fn pearson(series: &PairedSeries) -> Result<f64> {
    let (sxx, syy, sxy) = moments(&series.x, &series.y);
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Ranks starting at 1; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end (0-based) → ranks start+1..=end
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(series: &PairedSeries) -> Result<f64> {
    let ranked = PairedSeries {
        x: average_ranks(&series.x),
        y: average_ranks(&series.y),
    };
    pearson(&ranked)
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(series: &PairedSeries) -> Result<LinearFit> {
    let (sxx, syy, sxy) = moments(&series.x, &series.y);
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    let slope = sxy / sxx;
    let intercept = mean(&series.y) - slope * mean(&series.x);
    let sse: f64 = series
        .x
        .iter()
        .zip(&series.y)
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Splits indices into four groups by ascending key.
///
/// Groups are contiguous in key order and their sizes differ by at most one;
/// when `n` is not a multiple of four the earlier groups take the extra
/// elements. Equal keys keep input order. Group 4 holds the largest keys.
pub fn quartile_split(keys: &[f64]) -> Result<[Vec<usize>; 4]> {
    let n = keys.len();
    if n < 4 {
        return Err(Error::invalid(format!("quartile split needs at least 4 values, got {n}")));
    }
    if keys.iter().any(|k| !k.is_finite()) {
        return Err(Error::invalid("quartile keys must be finite"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    let (base, extra) = (n / 4, n % 4);
    let mut groups: [Vec<usize>; 4] = Default::default();
    let mut at = 0;
    for (q, group) in groups.iter_mut().enumerate() {
        let size = base + usize::from(q < extra);
        group.extend_from_slice(&order[at..at + size]);
        at += size;
    }
    Ok(groups)
}

/// Bin index per value for left-closed bins `[edges[i], edges[i+1])`; values
/// at or above the last edge land in the final bin, so there are
/// `edges.len()` bins.
pub fn log_bin(values: &[f64], edges: &[f64]) -> Result<Vec<usize>> {
    if edges.is_empty() {
        return Err(Error::invalid("no bin edges"));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("bin edges must be strictly ascending"));
    }
    values
        .iter()
        .map(|&v| {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::invalid(format!("log_bin value must be positive, got {v}")));
            }
            if v < edges[0] {
                return Err(Error::invalid(format!("value {v} lies below the first bin edge {}", edges[0])));
            }
            Ok(edges.partition_point(|&e| e <= v) - 1)
        })
        .collect()
}

/// Decade edges `1e2 … 1e7` used for frequency binning.
pub fn decade_edges() -> Vec<f64> {
    vec![1e2, 1e3, 1e4, 1e5, 1e6, 1e7]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(x: &[f64], y: &[f64]) -> PairedSeries {
        PairedSeries::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn pearson_documented_cases() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&series(&x, &y)).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&series(&x, &neg)).unwrap() + 1.0).abs() < 1e-12);
        // Sxy = 3, Sxx = Syy = 5
        let r = pearson(&series(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0])).unwrap();
        assert!((r - 0.6).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_an_error() {
        let err = pearson(&series(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0])).unwrap_err();
        assert!(err.to_string().contains("undefined correlation"));
        assert!(linear_fit(&series(&[2.0, 2.0], &[0.0, 1.0])).is_err());
    }

    #[test]
    fn series_validation() {
        assert!(PairedSeries::new(vec![1.0], vec![1.0]).is_err());
        assert!(PairedSeries::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(PairedSeries::new(vec![1.0, f64::NAN], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn spearman_ties_use_average_ranks() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
        let x = [1.0, 2.0, 2.0, 3.0, 4.0];
        let y = [1.0, 3.0, 2.0, 2.0, 5.0];
        // x ranks 1, 2.5, 2.5, 4, 5; y ranks 1, 4, 2.5, 2.5, 5
        let hand = pearson(&series(&[1.0, 2.5, 2.5, 4.0, 5.0], &[1.0, 4.0, 2.5, 2.5, 5.0])).unwrap();
        assert!((spearman(&series(&x, &y)).unwrap() - hand).abs() < 1e-12);
    }

    #[test]
    fn spearman_monotone_and_reversed() {
        let x: Vec<f64> = (1..=9).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * v).exp() * v.exp()).collect();
        assert!((spearman(&series(&x, &y)).unwrap() - 1.0).abs() < 1e-12);
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert!((spearman(&series(&x, &rev)).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_exact_line_and_symmetric_cloud() {
        let x: Vec<f64> = (0..6).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let fit = linear_fit(&series(&x, &y)).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let fit = linear_fit(&series(&[-1.0, -1.0, 1.0, 1.0], &[1.0, -1.0, 1.0, -1.0])).unwrap();
        assert_eq!(fit.slope, 0.0);
    }

    #[test]
    fn quartiles_even_and_uneven() {
        let keys: Vec<f64> = (1..=8).map(f64::from).collect();
        let g = quartile_split(&keys).unwrap();
        assert_eq!(g, [vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]]);
        let keys: Vec<f64> = (0..10).rev().map(f64::from).collect();
        let sizes: Vec<usize> = quartile_split(&keys).unwrap().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 3, 2, 2]);
        assert!(quartile_split(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn quartile_duplicates_stable_exhaustive() {
        // every multiset over {0,1,2} of length 4..=7
        for n in 4..=7usize {
            for code in 0..3usize.pow(n as u32) {
                let keys: Vec<f64> = (0..n).map(|i| ((code / 3usize.pow(i as u32)) % 3) as f64).collect();
                let groups = quartile_split(&keys).unwrap();
                let mut seen: Vec<usize> = groups.iter().flatten().copied().collect();
                let flat = seen.clone();
                seen.sort_unstable();
                assert_eq!(seen, (0..n).collect::<Vec<_>>());
                // stable: key-sorted, equal keys in index order
                for w in flat.windows(2) {
                    assert!(keys[w[0]] < keys[w[1]] || (keys[w[0]] == keys[w[1]] && w[0] < w[1]));
                }
            }
        }
    }

    #[test]
    fn log_bin_edges() {
        assert_eq!(log_bin(&[100.0], &[100.0, 1000.0]).unwrap(), vec![0]);
        let edges = decade_edges();
        assert_eq!(log_bin(&[1e7, 5e9, 999.0, 1e3], &edges).unwrap(), vec![5, 5, 0, 1]);
        assert!(log_bin(&[0.0], &edges).is_err());
        assert!(log_bin(&[-3.0], &edges).is_err());
        assert!(log_bin(&[10.0], &edges).is_err());
        assert!(log_bin(&[10.0], &[5.0, 5.0]).is_err());
    }

    #[test]
    fn log_bin_matches_direct_filter() {
        let mut rng = crate::seed::rng(3);
        use rand::Rng;
        let values: Vec<f64> = (0..500).map(|_| 10f64.powf(rng.random_range(2.0..9.0))).collect();
        let edges = decade_edges();
        let bins = log_bin(&values, &edges).unwrap();
        for b in 0..edges.len() {
            let hi = edges.get(b + 1).copied().unwrap_or(f64::INFINITY);
            let direct = values.iter().filter(|&&v| v >= edges[b] && v < hi).count();
            assert_eq!(bins.iter().filter(|&&x| x == b).count(), direct);
        }
    }
}
