//! Optimal-transport distances between empirical measures, Gaussian closed
//! forms, and Lévy-measure couplings.  All costs use c₂(x,y) = ½|x−y|²; the
//! metric convention is W₂ = √(2·C₂).

pub mod assignment;
pub mod bruteforce;
pub mod gaussian;
pub mod levy_cost;
pub mod one_dim;
pub mod sinkhorn;

pub use assignment::{exact_w2_assignment, solve_dense, Assignment};
pub use bruteforce::{bruteforce_ot, DensePlan, BRUTEFORCE_ATOM_LIMIT};
pub use gaussian::{bures_wasserstein, bures_wasserstein_sq, gaussian_w2, sample_gaussian_cloud};
pub use levy_cost::{
    generator_metric_wg, generator_metric_wg_sq, jump_cost_upper_sq, levy_pushforward_cost,
    trivial_coupling_cost,
};
pub use one_dim::{c2_empirical_vs_uniform01, c2_uniform_1d, c2_weighted_1d};
pub use sinkhorn::{sinkhorn_w2, SinkhornResult};

use crate::cloud::{half_sq_dist, PointCloud};
use crate::error::{CoreError, Result};

/// A coupling between two discrete measures: a permutation for equal-size
/// uniform clouds, or a dense plan.
#[derive(Clone, Debug)]
pub enum TransportPlan {
    Assignment(Vec<usize>),
    Dense(DensePlan),
}

/// Tensorized configuration cost 𝐜(x, y) = (1/N) Σ ½|x_k − y_k|², where the
/// configurations are given as ordered point lists.
pub fn tensorized_cost(x: &PointCloud, y: &PointCloud) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CoreError::Size {
            left: x.len(),
            right: y.len(),
            context: "tensorized configurations",
        });
    }
    if x.dim() != y.dim() {
        return Err(CoreError::Dim {
            left: x.dim(),
            right: y.dim(),
        });
    }
    let n = x.len() as f64;
    Ok(x.points()
        .zip(y.points())
        .map(|(p, q)| half_sq_dist(p, q))
        .sum::<f64>()
        / n)
}

/// Upper bound (in fact an equality) for the tensorized cost between product
/// measures: (1/N) Σ C₂(μ_k, ν_k) computed by the assignment solver.
pub fn tensor_product_upper_bound(pairs: &[(PointCloud, PointCloud)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(CoreError::param("pairs", "need at least one factor"));
    }
    let mut total = 0.0;
    for (mu, nu) in pairs {
        total += exact_w2_assignment(mu, nu)?.0;
    }
    Ok(total / pairs.len() as f64)
}

/// Exact C₂ between equal-size uniform clouds, routed to the cheapest exact
/// method: sorted pairing in one dimension, assignment otherwise.
pub fn empirical_c2(mu: &PointCloud, nu: &PointCloud) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(CoreError::Size {
            left: mu.len(),
            right: nu.len(),
            context: "empirical clouds",
        });
    }
    if mu.dim() != nu.dim() {
        return Err(CoreError::Dim {
            left: mu.dim(),
            right: nu.dim(),
        });
    }
    if mu.dim() == 1 {
        return Ok(c2_uniform_1d(mu, nu));
    }
    Ok(exact_w2_assignment(mu, nu)?.0)
}
