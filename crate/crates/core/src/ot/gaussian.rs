//! Gaussian closed forms: the Bures–Wasserstein matrix distance and the
//! Givens–Shortt formula for the transport cost between Gaussians.

use crate::cloud::PointCloud;
use crate::error::{CoreError, Result};
use crate::rng::StreamRng;
use crate::spd::SpdMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// W_S(a, ã)² = ½[tr a + tr ã − 2 tr((ã^{1/2} a ã^{1/2})^{1/2})].
pub fn bures_wasserstein_sq(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(CoreError::Dim {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let b_half = b.sqrt();
    let inner = &b_half * a.as_matrix() * &b_half;
    let cross = SpdMatrix::new(inner)
        .map_err(|e| CoreError::Matrix(format!("cross term not PSD: {e}")))?
        .trace_sqrt();
    let val = 0.5 * (a.trace() + b.trace() - 2.0 * cross);
    // exact-arithmetic value is >= 0; clamp the rounding residue
    Ok(val.max(0.0))
}

/// Bures–Wasserstein distance W_S(a, ã).
pub fn bures_wasserstein(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    Ok(bures_wasserstein_sq(a, b)?.sqrt())
}

/// Transport cost C₂ between Normal(x0, a) and Normal(y0, ã):
/// ½|x0 − y0|² + W_S(a, ã)².
pub fn gaussian_w2(x0: &[f64], a: &SpdMatrix, y0: &[f64], b: &SpdMatrix) -> Result<f64> {
    if x0.len() != a.dim() || y0.len() != b.dim() || x0.len() != y0.len() {
        return Err(CoreError::Dim {
            left: x0.len(),
            right: y0.len(),
        });
    }
    let mean_part = 0.5
        * x0.iter()
            .zip(y0)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>();
    Ok(mean_part + bures_wasserstein_sq(a, b)?)
}

/// Draw `m` samples from Normal(mean, cov) using the symmetric square root
/// of the covariance.
pub fn sample_gaussian_cloud(
    mean: &[f64],
    cov: &SpdMatrix,
    m: usize,
    rng: &mut StreamRng,
) -> Result<PointCloud> {
    let d = cov.dim();
    if mean.len() != d {
        return Err(CoreError::Dim {
            left: mean.len(),
            right: d,
        });
    }
    let factor = cov.sqrt();
    let mut data = vec![0.0_f64; m * d];
    let mut z = vec![0.0_f64; d];
    for s in 0..m {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for i in 0..d {
            let mut acc = mean[i];
            for (j, zj) in z.iter().enumerate() {
                acc += factor[(i, j)] * zj;
            }
            data[s * d + i] = acc;
        }
    }
    PointCloud::new(d, data)
}
