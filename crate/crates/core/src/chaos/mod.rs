//! Quantitative verification of propagation-of-chaos estimates: ℵ_N
//! estimation, dimension-dependent empirical-measure rates, flow probes, and
//! the N-sweep rate experiment.

pub mod poc;
pub mod probe;

pub use poc::{fg_bound_check, poc_rate_experiment, FgReport, FgRow, PocConfig, RhoFamily};
pub use probe::{exp_stability_check, omega_probe, ExpStabilityReport, OmegaProbeReport};

use crate::cloud::{PointCloud, WeightedCloud};
use crate::error::{CoreError, Result};
use crate::model::{sigma_functional_views, MeanFieldModel, MeasureView};
use crate::ot::{bruteforce_ot, c2_weighted_1d, sinkhorn_w2, BRUTEFORCE_ATOM_LIMIT};
use crate::rng::{StreamDomain, StreamRng};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// The discrepancy functional Ξ(y, μ, ν) whose expectation under resampling
/// defines ℵ_N.
pub enum XiKind<'a> {
    /// Ξ = C₂ (squared-Wasserstein route)
    W2Squared,
    /// Ξ = squared difference of mean vectors
    FirstMomentSq,
    /// Ξ = Σ(y, μ, ν)² for an average-form model
    SigmaSq(&'a MeanFieldModel),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlephEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// true when the transport cost fell back to the entropic solver
    pub sinkhorn_fallback: bool,
}

/// Draw N−1 points from the reference cloud and return the transport cost of
/// the (compressed) empirical measure back to the cloud.
pub(crate) fn w2sq_resample_once(
    rho: &PointCloud,
    rho_weighted: &WeightedCloud,
    n: usize,
    rng: &mut StreamRng,
) -> Result<(f64, bool)> {
    let d = rho.dim();
    let m_ref = rho.len();
    let mut counts = vec![0usize; m_ref];
    for _ in 0..n - 1 {
        let idx = (rng.random::<u64>() % m_ref as u64) as usize;
        counts[idx] += 1;
    }
    let mut pts = Vec::new();
    let mut weights = Vec::new();
    for (idx, &c) in counts.iter().enumerate() {
        if c > 0 {
            pts.extend_from_slice(rho.point(idx));
            weights.push(c as f64 / (n - 1) as f64);
        }
    }
    let total: f64 = weights.iter().sum();
    if let Some(last) = weights.last_mut() {
        *last += 1.0 - total;
    }
    let resampled = WeightedCloud::new(d, pts, weights)?;
    w2sq_between(&resampled, rho_weighted)
}

/// Ξ = C₂ between a resampled empirical measure and the reference cloud.
/// Exact in one dimension (monotone coupling); exact LP when the instance is
/// small enough; entropic fallback otherwise (flagged).
fn w2sq_between(resampled: &WeightedCloud, reference: &WeightedCloud) -> Result<(f64, bool)> {
    if resampled.dim() == 1 {
        return Ok((c2_weighted_1d(resampled, reference), false));
    }
    if resampled.len() * reference.len() <= BRUTEFORCE_ATOM_LIMIT {
        return Ok((bruteforce_ot(resampled, reference)?.0, false));
    }
    let mean_cost: f64 = {
        let mut acc = 0.0;
        for i in 0..resampled.len() {
            for j in 0..reference.len() {
                acc += crate::cloud::half_sq_dist(resampled.point(i), reference.point(j));
            }
        }
        acc / (resampled.len() * reference.len()) as f64
    };
    let eps = (0.02 * mean_cost).max(1e-9);
    let res = sinkhorn_w2(resampled, reference, eps, 2000, 1e-8)?;
    Ok((res.cost, true))
}

/// Monte Carlo estimate of
/// ℵ_N(ρ̄; Ξ) = E[Ξ(Y₁, empirical of Y₂..Y_N, ρ̄)] with Y_k i.i.d. from the
/// reference cloud (the cloud is the law).
pub fn estimate_aleph(
    rho: &PointCloud,
    xi: &XiKind,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<AlephEstimate> {
    if n < 2 {
        return Err(CoreError::param("n", "need N >= 2"));
    }
    if trials < 2 {
        return Err(CoreError::param("trials", "need at least 2 trials"));
    }
    if let XiKind::SigmaSq(model) = xi {
        if !model.is_average_form() {
            return Err(CoreError::ModelKind);
        }
    }
    let d = rho.dim();
    let m_ref = rho.len();
    let rho_mean = rho.mean();
    let rho_weighted = WeightedCloud::uniform(rho);
    let rho_view = MeasureView::from_cloud(rho);

    let mut values = Vec::with_capacity(trials);
    let mut fallback = false;
    for trial in 0..trials {
        let mut rng = StreamRng::new(seed, StreamDomain::Aleph, trial as u64, 0);
        let y1_idx = (rng.random::<u64>() % m_ref as u64) as usize;
        let y1 = rho.point(y1_idx);

        let value = match xi {
            XiKind::W2Squared => {
                let (cost, fb) = w2sq_resample_once(rho, &rho_weighted, n, &mut rng)?;
                fallback |= fb;
                cost
            }
            _ => {
                let mut sample_data = Vec::with_capacity((n - 1) * d);
                for _ in 0..n - 1 {
                    let idx = (rng.random::<u64>() % m_ref as u64) as usize;
                    sample_data.extend_from_slice(rho.point(idx));
                }
                match xi {
                    XiKind::FirstMomentSq => {
                        let mut mean = vec![0.0; d];
                        for p in sample_data.chunks_exact(d) {
                            for (m, v) in mean.iter_mut().zip(p) {
                                *m += v;
                            }
                        }
                        for m in &mut mean {
                            *m /= (n - 1) as f64;
                        }
                        mean.iter()
                            .zip(&rho_mean)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum()
                    }
                    XiKind::SigmaSq(model) => {
                        let sample = PointCloud::new(d, sample_data)?;
                        let view = MeasureView::from_cloud(&sample);
                        let s = sigma_functional_views(model, y1, &view, &rho_view)?;
                        s * s
                    }
                    XiKind::W2Squared => unreachable!(),
                }
            }
        };
        values.push(value);
    }

    let mean: f64 = values.iter().sum::<f64>() / trials as f64;
    let var: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (trials - 1) as f64;
    Ok(AlephEstimate {
        mean,
        stderr: (var / trials as f64).sqrt(),
        sinkhorn_fallback: fallback,
    })
}

/// Closed-form value of ℵ_N(ρ̄; Σ²) on a discrete reference cloud:
/// (1/(N−1)) Σ_components ∫ Var_ρ̄(kernel component(x, ·)) dρ̄(x).
pub fn sigma_sq_aleph_exact(model: &MeanFieldModel, rho: &PointCloud, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(CoreError::param("n", "need N >= 2"));
    }
    Ok(kernel_variance_integral(model, rho)? / (n - 1) as f64)
}

/// The N-independent factor Σ_components ∫ Var_ρ̄(τ̃_component(x, ·)) dρ̄(x).
/// Built-in kernels are affine in z and admit O(M) closed forms; custom
/// kernels fall back to the generic O(M²) scan.
pub fn kernel_variance_integral(model: &MeanFieldModel, rho: &PointCloud) -> Result<f64> {
    use crate::model::{DriftKernel, MatrixKernel, ModelKind};
    let ModelKind::AverageForm { b, sigma, eta } = &model.kind else {
        return Err(CoreError::ModelKind);
    };
    let d = model.dim();
    let m = rho.len() as f64;

    // per-coordinate variance of z and variance of the coordinate mean z̄
    let mean = rho.mean();
    let mut var_coord = vec![0.0; d];
    let mut var_zbar = 0.0;
    let mut second_moment_x = 0.0;
    for p in rho.points() {
        let mut zbar = 0.0;
        for (i, v) in p.iter().enumerate() {
            let c = v - mean[i];
            var_coord[i] += c * c;
            zbar += v;
        }
        zbar /= d as f64;
        let mbar = mean.iter().sum::<f64>() / d as f64;
        var_zbar += (zbar - mbar) * (zbar - mbar);
        second_moment_x += p.iter().map(|v| v * v).sum::<f64>();
    }
    for v in &mut var_coord {
        *v /= m;
    }
    var_zbar /= m;
    second_moment_x /= m;

    let drift = match b {
        DriftKernel::LinearAttraction { kappa } => {
            kappa * kappa * var_coord.iter().sum::<f64>()
        }
        DriftKernel::Constant { .. } => 0.0,
        DriftKernel::ScaledRestoring { slope, .. } => {
            slope * slope * var_zbar * second_moment_x
        }
        DriftKernel::Custom(_) => return generic_variance_integral(model, rho),
    };
    let mut matrices = 0.0;
    for kernel in [sigma, eta] {
        matrices += match kernel {
            MatrixKernel::Zero | MatrixKernel::ScalarIdentity { .. } => 0.0,
            MatrixKernel::LinearIsotropic { slope, .. } => {
                d as f64 * slope * slope * var_zbar
            }
            MatrixKernel::Custom(_) => return generic_variance_integral(model, rho),
        };
    }
    Ok(drift + matrices)
}

/// Generic variance integral: componentwise kernel variance over z, averaged
/// over x, both against the cloud.
fn generic_variance_integral(model: &MeanFieldModel, rho: &PointCloud) -> Result<f64> {
    use crate::model::ModelKind;
    let ModelKind::AverageForm { b, sigma, eta } = &model.kind else {
        return Err(CoreError::ModelKind);
    };
    let d = model.dim();
    let m = rho.len() as f64;
    let mut total = 0.0;
    let mut bvals = vec![0.0; d];
    let mut mat = nalgebra::DMatrix::zeros(d, d);
    for x in rho.points() {
        // component-wise variance over z ~ rho of each kernel entry
        let mut sums = vec![0.0; d + 2 * d * d];
        let mut sq_sums = vec![0.0; d + 2 * d * d];
        for z in rho.points() {
            let mut k = 0;
            b.eval(x, z, &mut bvals);
            for v in &bvals {
                sums[k] += v;
                sq_sums[k] += v * v;
                k += 1;
            }
            sigma.eval(x, z, &mut mat);
            for v in mat.iter() {
                sums[k] += v;
                sq_sums[k] += v * v;
                k += 1;
            }
            eta.eval(x, z, &mut mat);
            for v in mat.iter() {
                sums[k] += v;
                sq_sums[k] += v * v;
                k += 1;
            }
        }
        for k in 0..sums.len() {
            let mean = sums[k] / m;
            let var = (sq_sums[k] / m - mean * mean).max(0.0);
            total += var;
        }
    }
    Ok(total / m)
}

/// Empirical-measure convergence rate ε_{d,q}(N), piecewise in the dimension,
/// scaled by L·M_q^{2/q}.
pub fn fournier_guillin_rate(d: usize, q: f64, n: usize, mq: f64, l: f64) -> Result<f64> {
    if d == 0 {
        return Err(CoreError::param("d", "dimension must be positive"));
    }
    if !(q > 2.0) {
        return Err(CoreError::param("q", "requires q > 2"));
    }
    if n == 0 {
        return Err(CoreError::param("n", "requires N >= 1"));
    }
    if mq < 0.0 || l < 0.0 {
        return Err(CoreError::param("mq", "moment and constant must be nonnegative"));
    }
    let nf = n as f64;
    let tail = nf.powf(-(q - 2.0) / q);
    let main = if d < 4 {
        if (q - 4.0).abs() < 1e-12 {
            return Err(CoreError::param("q", "excluded case: d < 4 with q = 4"));
        }
        nf.powf(-0.5)
    } else if d == 4 {
        if (q - 4.0).abs() < 1e-12 {
            return Err(CoreError::param("q", "excluded case: d = 4 with q = 4"));
        }
        nf.powf(-0.5) * (1.0 + nf).ln()
    } else {
        let excluded = d as f64 / (d as f64 - 2.0);
        if (q - excluded).abs() < 1e-12 {
            return Err(CoreError::param(
                "q",
                format!("excluded case: d > 4 with q = d/(d-2) = {excluded}"),
            ));
        }
        nf.powf(-2.0 / d as f64)
    };
    Ok(l * mq.powf(2.0 / q) * (main + tail))
}

/// Constants of the exponential envelope C·ζ_K(T)·sup_t ℵ_N for an
/// average-form model with declared Lipschitz data.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub alpha: f64,
    pub beta: f64,
    pub b: f64,
    pub k: f64,
}

/// Derive envelope constants from the declared kernel data: the coefficient
/// map satisfies ‖τ(x,μ)−τ(y,ν)‖²_𝒱 ≤ 2Σ² + m|x−y|², the generator
/// discrepancy picks up D = max(1, m₂(Ω)), and the Ξ = Σ² relaxed triangle
/// constant is 3·max{1, 2·m′², m}.
pub fn envelope_constants(model: &MeanFieldModel) -> Option<EnvelopeParams> {
    let lp = model.lipschitz?;
    let d_factor = model
        .base_jump()
        .map(|b| b.second_moment().max(1.0))
        .unwrap_or(1.0);
    let alpha = 2.0 * d_factor;
    let beta = 2.0 * d_factor * lp.m + 1.0;
    let b = 3.0 * (1.0_f64).max(2.0 * lp.m_prime * lp.m_prime).max(lp.m);
    Some(EnvelopeParams {
        alpha,
        beta,
        b,
        k: beta + 2.0 * alpha * b,
    })
}

/// Least-squares slope of ln(y) against ln(x) with a ±2·stderr interval.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return None;
    }
    if ys.iter().any(|y| *y <= 0.0) || xs.iter().any(|x| *x <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let se = if lx.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(SlopeFit {
        slope,
        ci_low: slope - 2.0 * se,
        ci_high: slope + 2.0 * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DriftKernel, MatrixKernel, ModelKind};

    #[test]
    fn aleph_of_point_mass_is_zero_for_every_xi() {
        let rho = PointCloud::from_scalars(&[1.5]).unwrap();
        let model = MeanFieldModel::new(
            1,
            ModelKind::AverageForm {
                b: DriftKernel::LinearAttraction { kappa: 1.0 },
                sigma: MatrixKernel::Zero,
                eta: MatrixKernel::Zero,
            },
            None,
            None,
            "m",
        )
        .unwrap();
        for xi in [
            XiKind::W2Squared,
            XiKind::FirstMomentSq,
            XiKind::SigmaSq(&model),
        ] {
            let est = estimate_aleph(&rho, &xi, 8, 16, 3).unwrap();
            assert_eq!(est.mean, 0.0, "point mass must give zero");
        }
    }

    #[test]
    fn aleph_first_moment_rademacher() {
        // rho uniform on {−1, +1}: ℵ_N = Var(mean of N−1 signs) = 1/(N−1)
        let rho = PointCloud::from_scalars(&[-1.0, 1.0]).unwrap();
        for n in [4usize, 16, 64] {
            let est = estimate_aleph(&rho, &XiKind::FirstMomentSq, n, 4000, 7).unwrap();
            let expect = 1.0 / (n - 1) as f64;
            assert!(
                (est.mean - expect).abs() <= 3.0 * est.stderr,
                "N={n}: {} vs {} (stderr {})",
                est.mean,
                expect,
                est.stderr
            );
        }
    }

    #[test]
    fn aleph_sigma_sq_matches_discrete_closed_form() {
        let model = MeanFieldModel::new(
            1,
            ModelKind::AverageForm {
                b: DriftKernel::LinearAttraction { kappa: 1.0 },
                sigma: MatrixKernel::LinearIsotropic {
                    base: 0.5,
                    slope: 0.3,
                },
                eta: MatrixKernel::Zero,
            },
            None,
            None,
            "m",
        )
        .unwrap();
        let rho =
            PointCloud::from_scalars(&[-1.2, -0.3, 0.1, 0.4, 0.9, 1.7, 2.2, -2.0]).unwrap();
        let n = 16;
        let exact = sigma_sq_aleph_exact(&model, &rho, n).unwrap();
        let est = estimate_aleph(&rho, &XiKind::SigmaSq(&model), n, 6000, 11).unwrap();
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.stderr,
            "MC {} vs exact {exact} (stderr {})",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn aleph_w2_small_reference_uses_exact_lp() {
        let rho = PointCloud::from_points(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let est = estimate_aleph(&rho, &XiKind::W2Squared, 8, 200, 13).unwrap();
        assert!(!est.sinkhorn_fallback);
        assert!(est.mean > 0.0);
    }

    #[test]
    fn fournier_rate_values() {
        // d=1, q=5, N=100: N^{−1/2} + N^{−3/5} = 0.1 + 0.063096...
        let v = fournier_guillin_rate(1, 5.0, 100, 1.0, 1.0).unwrap();
        let expect = 0.1 + 100.0_f64.powf(-0.6);
        assert!((v - expect).abs() < 1e-12);
        assert!((v - 0.163_095_734_448_f64).abs() < 1e-9);

        // d=4 branch carries the log factor at N=1: log 2 + 1
        let v4 = fournier_guillin_rate(4, 5.0, 1, 1.0, 1.0).unwrap();
        assert!((v4 - (2.0_f64.ln() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn fournier_rate_monotone_in_n() {
        for (d, q) in [(1usize, 5.0), (3, 3.0), (4, 6.0), (6, 4.0)] {
            let mut prev = f64::INFINITY;
            for n in [2usize, 5, 10, 50, 100, 1000, 10_000] {
                let v = fournier_guillin_rate(d, q, n, 2.0, 1.3).unwrap();
                assert!(v <= prev, "d={d} q={q} N={n}: {v} > {prev}");
                prev = v;
            }
        }
    }

    #[test]
    fn fournier_rate_excluded_cases() {
        assert!(fournier_guillin_rate(2, 4.0, 10, 1.0, 1.0).is_err());
        assert!(fournier_guillin_rate(4, 4.0, 10, 1.0, 1.0).is_err());
        assert!(fournier_guillin_rate(6, 1.5, 10, 1.0, 1.0).is_err());
        // d=6: excluded q = 6/4 = 1.5 is already < 2; also q must be > 2
        assert!(fournier_guillin_rate(1, 2.0, 10, 1.0, 1.0).is_err());
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let xs: [f64; 5] = [8.0, 16.0, 32.0, 64.0, 128.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.0)).collect();
        let fit = log_log_slope(&xs, &ys).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!(fit.ci_low <= -1.0 && -1.0 <= fit.ci_high);
    }
}
