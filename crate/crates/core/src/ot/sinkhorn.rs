//! Entropic-regularized transport in the log domain.
//!
//! Used only as a scalable upper-trend check; the reported value is the
//! transport part ⟨plan, cost⟩ without the entropy term and without
//! debiasing.

use crate::cloud::{half_sq_dist, WeightedCloud};
use crate::error::{CoreError, Result};

#[derive(Clone, Debug)]
pub struct SinkhornResult {
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = terms.collect();
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Entropic OT with cost ½|x−y|².  Stops when the L1 marginal violation of
/// the implied plan drops below `tol`; `converged = false` past `max_iters`
/// is returned to the caller rather than treated as an error.
pub fn sinkhorn_w2(
    mu: &WeightedCloud,
    nu: &WeightedCloud,
    epsilon: f64,
    max_iters: usize,
    tol: f64,
) -> Result<SinkhornResult> {
    if !(epsilon > 0.0) {
        return Err(CoreError::param("epsilon", "must be positive"));
    }
    if mu.dim() != nu.dim() {
        return Err(CoreError::Dim {
            left: mu.dim(),
            right: nu.dim(),
        });
    }
    let m = mu.len();
    let n = nu.len();
    let cost: Vec<f64> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| half_sq_dist(mu.point(i), nu.point(j)))
        .collect();
    let log_a: Vec<f64> = mu.weights().iter().map(|w| w.ln()).collect();
    let log_b: Vec<f64> = nu.weights().iter().map(|w| w.ln()).collect();

    let mut f = vec![0.0_f64; m];
    let mut g = vec![0.0_f64; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        for (i, fi) in f.iter_mut().enumerate() {
            *fi = -epsilon
                * log_sum_exp(
                    (0..n).map(|j| (g[j] - cost[i * n + j]) / epsilon + log_b[j]),
                );
        }
        for (j, gj) in g.iter_mut().enumerate() {
            *gj = -epsilon
                * log_sum_exp(
                    (0..m).map(|i| (f[i] - cost[i * n + j]) / epsilon + log_a[i]),
                );
        }
        // plan entries: a_i b_j exp((f_i + g_j − c_ij)/ε)
        let mut row_violation = 0.0;
        let mut col_sums = vec![0.0_f64; n];
        for i in 0..m {
            let mut row = 0.0;
            for j in 0..n {
                let p = (log_a[i] + log_b[j] + (f[i] + g[j] - cost[i * n + j]) / epsilon).exp();
                row += p;
                col_sums[j] += p;
            }
            row_violation += (row - mu.weight(i)).abs();
        }
        let col_violation: f64 = col_sums
            .iter()
            .zip(nu.weights())
            .map(|(s, w)| (s - w).abs())
            .sum();
        if row_violation + col_violation < tol {
            converged = true;
            break;
        }
    }

    let mut transport = 0.0;
    for i in 0..m {
        for j in 0..n {
            let p = (log_a[i] + log_b[j] + (f[i] + g[j] - cost[i * n + j]) / epsilon).exp();
            transport += p * cost[i * n + j];
        }
    }
    Ok(SinkhornResult {
        cost: transport,
        iterations,
        converged,
    })
}
