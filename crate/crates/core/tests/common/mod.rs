//! Independent reference implementations used as test oracles. Nothing
//! here calls into the library.

#![allow(dead_code)]

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Smallest ball with every point of `support` on its sphere, centered in
/// the affine hull of `support`. `None` for degenerate subsets.
pub fn circumball(support: &[&Vec<f64>]) -> Option<(Vec<f64>, f64)> {
    let p0 = support[0];
    let k = support.len() - 1;
    let v: Vec<Vec<f64>> = support[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    // Gram system G λ = h with G_ij = v_i·v_j and h_i = |v_i|²/2.
    let mut a: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row: Vec<f64> = (0..k).map(|j| v[i].iter().zip(&v[j]).map(|(x, y)| x * y).sum()).collect();
            row.push(v[i].iter().map(|x| x * x).sum::<f64>() / 2.0);
            row
        })
        .collect();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                let pivot = a[col].clone();
                for (x, p) in a[r][col..=k].iter_mut().zip(&pivot[col..=k]) {
                    *x -= f * p;
                }
            }
        }
    }
    let lambda: Vec<f64> = (0..k).map(|i| a[i][k] / a[i][i]).collect();
    let center: Vec<f64> = (0..p0.len())
        .map(|d| p0[d] + (0..k).map(|i| lambda[i] * v[i][d]).sum::<f64>())
        .collect();
    let r = dist(&center, p0);
    Some((center, r))
}

/// Exact MEB radius by exhaustive search over support sets of size 1..=d+1.
pub fn brute_force_meb(points: &[Vec<f64>]) -> f64 {
    fn rec(start: usize, n: usize, max: usize, subset: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if !subset.is_empty() {
            visit(subset);
        }
        if subset.len() == max {
            return;
        }
        for i in start..n {
            subset.push(i);
            rec(i + 1, n, max, subset, visit);
            subset.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(0, points.len(), points[0].len() + 1, &mut Vec::new(), &mut |s| {
        let sup: Vec<&Vec<f64>> = s.iter().map(|&i| &points[i]).collect();
        if let Some((c, r)) = circumball(&sup) {
            if r < best && points.iter().all(|p| dist(p, &c) <= r * (1.0 + 1e-10) + 1e-12) {
                best = r;
            }
        }
    });
    best
}

/// Equal-size quartiles of `keys` by stable ascending order, the first
/// `n mod 4` groups one larger.
pub fn brute_quartiles(keys: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).unwrap());
    let (q, rem) = (keys.len() / 4, keys.len() % 4);
    let mut out = Vec::new();
    let mut at = 0;
    for g in 0..4 {
        let size = q + usize::from(g < rem);
        out.push(order[at..at + size].to_vec());
        at += size;
    }
    out
}

/// Pearson r from raw sums.
pub fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}
