//! Exact one-dimensional transport costs via the monotone (CDF) coupling,
//! which is optimal for the convex cost ½|x−y|².

use crate::cloud::{PointCloud, WeightedCloud};

/// C₂ between two equal-mass discrete measures on ℝ given as sorted
/// (position, weight) lists.
fn sweep(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut cost = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    let mut wi = a[0].1;
    let mut wj = b[0].1;
    loop {
        let c = {
            let d = a[i].0 - b[j].0;
            0.5 * d * d
        };
        if wi <= wj {
            cost += wi * c;
            wj -= wi;
            i += 1;
            if i == a.len() {
                break;
            }
            wi = a[i].1;
            if wj <= 0.0 {
                j += 1;
                if j == b.len() {
                    break;
                }
                wj = b[j].1;
            }
        } else {
            cost += wj * c;
            wi -= wj;
            j += 1;
            if j == b.len() {
                break;
            }
            wj = b[j].1;
        }
    }
    cost
}

fn sorted_atoms(points: impl Iterator<Item = f64>, weights: &[f64]) -> Vec<(f64, f64)> {
    let mut atoms: Vec<(f64, f64)> = points.zip(weights.iter().copied()).collect();
    atoms.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    atoms
}

/// Exact C₂ for weighted 1-d measures.
pub fn c2_weighted_1d(mu: &WeightedCloud, nu: &WeightedCloud) -> f64 {
    debug_assert_eq!(mu.dim(), 1);
    debug_assert_eq!(nu.dim(), 1);
    let a = sorted_atoms((0..mu.len()).map(|i| mu.point(i)[0]), mu.weights());
    let b = sorted_atoms((0..nu.len()).map(|i| nu.point(i)[0]), nu.weights());
    sweep(&a, &b)
}

/// Exact C₂ for equal-size uniform 1-d clouds: sort both and pair in order.
pub fn c2_uniform_1d(mu: &PointCloud, nu: &PointCloud) -> f64 {
    debug_assert_eq!(mu.dim(), 1);
    debug_assert_eq!(nu.dim(), 1);
    debug_assert_eq!(mu.len(), nu.len());
    let mut xs: Vec<f64> = mu.as_slice().to_vec();
    let mut ys: Vec<f64> = nu.as_slice().to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = xs.len() as f64;
    xs.iter()
        .zip(&ys)
        .map(|(x, y)| 0.5 * (x - y) * (x - y))
        .sum::<f64>()
        / m
}

/// Exact C₂ between the empirical measure of `samples` and the uniform law
/// on [0,1]: closed-form quantile integral.
pub fn c2_empirical_vs_uniform01(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    // ∫ over each quantile cell [(k-1)/n, k/n] of ½ (x_(k) − u)² du
    let mut total = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let lo = k as f64 / n;
        let hi = (k + 1) as f64 / n;
        // ∫_lo^hi (x-u)^2 du = [(x-lo)^3 - (x-hi)^3]/3
        let a = x - lo;
        let b = x - hi;
        total += (a * a * a - b * b * b) / 3.0;
    }
    0.5 * total
}
