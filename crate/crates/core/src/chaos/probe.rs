//! Flow probes: finite-difference estimates of the initial rate of change of
//! the transport cost between two constant-coefficient flows, compared with
//! the closed forms, and the exponential-envelope check along a time grid.
//!
//! Constant triplets are simulated exactly at each probe time (Gaussian part
//! in closed form, jumps as compound Poisson over [0, t]), so the only time
//! bias is the difference quotient itself.

use crate::cloud::{half_sq_dist, PointCloud};
use crate::error::{CoreError, Result};
use crate::levy::LevyTriplet;
use crate::ot::{exact_w2_assignment, generator_metric_wg_sq};
use crate::rng::{StreamDomain, StreamRng};
use crate::solver::zeta;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

/// Exact endpoint draw of the flow started at x under a constant triplet.
fn sample_endpoint(
    triplet: &LevyTriplet,
    x: &[f64],
    t: f64,
    rng: &mut StreamRng,
    out: &mut [f64],
) {
    let d = triplet.dim;
    let sqrt_t = t.sqrt();
    for (i, o) in out.iter_mut().enumerate() {
        *o = x[i] + triplet.drift[i] * t;
    }
    if triplet.has_diffusion() {
        for c in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            for (r, o) in out.iter_mut().enumerate() {
                *o += triplet.sigma[(r, c)] * sqrt_t * z;
            }
        }
    }
    if let Some(jump) = &triplet.jump {
        for atom in jump.base.atoms() {
            let poisson = Poisson::new(atom.lambda * t).expect("positive rate");
            let count = poisson.sample(rng);
            if count > 0.0 {
                for r in 0..d {
                    let mut v = 0.0;
                    for c in 0..d {
                        v += jump.eta[(r, c)] * atom.z[c];
                    }
                    out[r] += count * v;
                }
            }
        }
        // global-form compensator −η·m₁(Ω)·t
        let m1 = jump.base.first_moment();
        for r in 0..d {
            let mut v = 0.0;
            for c in 0..d {
                v += jump.eta[(r, c)] * m1[c];
            }
            out[r] -= v * t;
        }
    }
}

fn sample_cloud(
    triplet: &LevyTriplet,
    x: &[f64],
    t: f64,
    m: usize,
    rng: &mut StreamRng,
) -> PointCloud {
    let d = triplet.dim;
    let mut data = vec![0.0; m * d];
    for chunk in data.chunks_exact_mut(d) {
        sample_endpoint(triplet, x, t, rng, chunk);
    }
    PointCloud::new(d, data).expect("nonempty")
}

fn is_deterministic(t: &LevyTriplet) -> bool {
    !t.has_diffusion() && !t.has_jump()
}

/// Debiased empirical transport cost between the time-t laws:
/// Ĉ(A_t, B_t) − ½Ĉ(A_t, A_t′) − ½Ĉ(B_t, B_t′) with independent copies,
/// cancelling the leading finite-sample bias of the empirical cost.
fn debiased_cost(
    gen_a: &LevyTriplet,
    gen_b: &LevyTriplet,
    x: &[f64],
    y: &[f64],
    t: f64,
    mc_size: usize,
    rng: &mut StreamRng,
) -> Result<f64> {
    let a = sample_cloud(gen_a, x, t, mc_size, rng);
    let a2 = sample_cloud(gen_a, x, t, mc_size, rng);
    let b = sample_cloud(gen_b, y, t, mc_size, rng);
    let b2 = sample_cloud(gen_b, y, t, mc_size, rng);
    let cross = exact_w2_assignment(&a, &b)?.0;
    let self_a = exact_w2_assignment(&a, &a2)?.0;
    let self_b = exact_w2_assignment(&b, &b2)?.0;
    Ok(cross - 0.5 * self_a - 0.5 * self_b)
}

/// Closed form (or constructive upper bound) for the initial rate of change.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum ClosedForm {
    Exact(f64),
    UpperBound(f64),
}

impl ClosedForm {
    pub fn value(&self) -> f64 {
        match self {
            ClosedForm::Exact(v) | ClosedForm::UpperBound(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ClosedForm::Exact(_))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OmegaProbeReport {
    pub closed_form: ClosedForm,
    /// (t, mean difference quotient, stderr) for each grid time
    pub grid: Vec<(f64, f64, f64)>,
    /// two-point extrapolation over the smallest grid times
    pub extrapolated: f64,
    pub extrapolated_stderr: f64,
    /// W_G² + ½|x−y|², never undershot by more than the MC error
    pub cor_bound: f64,
}

/// Finite-difference probe of the Dini rate
/// ω₂ = d/dt C₂(δ_x e^{tA}, δ_y e^{tB}) at t = 0.
///
/// Closed forms: (b−b̃)ᵀ(x−y) for pure drifts, W_S(a,ã)² for pure
/// diffusions; for jump or mixed pairs only an upper bound is reported.
#[allow(clippy::too_many_arguments)]
pub fn omega_probe(
    gen_a: &LevyTriplet,
    gen_b: &LevyTriplet,
    x: &[f64],
    y: &[f64],
    dt_grid: &[f64],
    mc_size: usize,
    reps: usize,
    seed: u64,
) -> Result<OmegaProbeReport> {
    if gen_a.dim != gen_b.dim || x.len() != gen_a.dim || y.len() != gen_a.dim {
        return Err(CoreError::Dim {
            left: gen_a.dim,
            right: gen_b.dim,
        });
    }
    if dt_grid.len() < 2 || dt_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::param(
            "dt_grid",
            "need at least two increasing probe times",
        ));
    }
    if !dt_grid.iter().all(|t| *t > 0.0) {
        return Err(CoreError::param("dt_grid", "probe times must be positive"));
    }

    let c2_xy = half_sq_dist(x, y);
    let drift_term: f64 = gen_a
        .drift
        .iter()
        .zip(&gen_b.drift)
        .zip(x.iter().zip(y))
        .map(|((ba, bb), (xi, yi))| (ba - bb) * (xi - yi))
        .sum();
    let wg_sq = generator_metric_wg_sq(gen_a, gen_b)?;
    let cor_bound = wg_sq + c2_xy;

    let pure_drift = is_deterministic(gen_a) && is_deterministic(gen_b);
    let pure_diffusion = !gen_a.has_drift()
        && !gen_b.has_drift()
        && !gen_a.has_jump()
        && !gen_b.has_jump();
    let pure_jump = !gen_a.has_drift()
        && !gen_b.has_drift()
        && !gen_a.has_diffusion()
        && !gen_b.has_diffusion();
    let closed_form = if pure_drift {
        ClosedForm::Exact(drift_term)
    } else if pure_diffusion {
        let a = crate::spd::SpdMatrix::from_factor(&gen_a.sigma)?;
        let b = crate::spd::SpdMatrix::from_factor(&gen_b.sigma)?;
        ClosedForm::Exact(crate::ot::bures_wasserstein_sq(&a, &b)? + drift_term)
    } else if pure_jump {
        // the jump rate is only bounded, by the constructive coupling cost
        ClosedForm::UpperBound(crate::ot::jump_cost_upper_sq(gen_a, gen_b)?)
    } else {
        ClosedForm::UpperBound(cor_bound)
    };

    // Per-rep difference quotients at each grid time; for deterministic
    // flows the "cloud" is a single point and the quotient is exact.
    let effective_mc = if pure_drift { 1 } else { mc_size.max(2) };
    let effective_reps = if pure_drift { 1 } else { reps.max(2) };
    let mut quotients: Vec<Vec<f64>> = vec![Vec::with_capacity(effective_reps); dt_grid.len()];
    for (ti, &t) in dt_grid.iter().enumerate() {
        for rep in 0..effective_reps {
            let mut rng =
                StreamRng::new(seed, StreamDomain::Probe, ti as u64 + 1, rep as u64);
            let cost = if pure_drift {
                let a = sample_cloud(gen_a, x, t, 1, &mut rng);
                let b = sample_cloud(gen_b, y, t, 1, &mut rng);
                exact_w2_assignment(&a, &b)?.0
            } else {
                debiased_cost(gen_a, gen_b, x, y, t, effective_mc, &mut rng)?
            };
            quotients[ti].push((cost - c2_xy) / t);
        }
    }

    let grid: Vec<(f64, f64, f64)> = dt_grid
        .iter()
        .zip(&quotients)
        .map(|(t, qs)| {
            let mean = qs.iter().sum::<f64>() / qs.len() as f64;
            let stderr = if qs.len() > 1 {
                let var = qs.iter().map(|q| (q - mean) * (q - mean)).sum::<f64>()
                    / (qs.len() - 1) as f64;
                (var / qs.len() as f64).sqrt()
            } else {
                0.0
            };
            (*t, mean, stderr)
        })
        .collect();

    // Two-point extrapolation on the smallest pair removes the linear-in-t
    // remainder of the quotient; computed per rep so the spread is honest.
    let (t1, t2) = (dt_grid[0], dt_grid[1]);
    let richardson: Vec<f64> = quotients[0]
        .iter()
        .zip(&quotients[1])
        .map(|(q1, q2)| (t2 * q1 - t1 * q2) / (t2 - t1))
        .collect();
    let extrapolated = richardson.iter().sum::<f64>() / richardson.len() as f64;
    let extrapolated_stderr = if richardson.len() > 1 {
        let var = richardson
            .iter()
            .map(|q| (q - extrapolated) * (q - extrapolated))
            .sum::<f64>()
            / (richardson.len() - 1) as f64;
        (var / richardson.len() as f64).sqrt()
    } else {
        0.0
    };

    Ok(OmegaProbeReport {
        closed_form,
        grid,
        extrapolated,
        extrapolated_stderr,
        cor_bound,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpStabilityPoint {
    pub t: f64,
    pub lhs_mean: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpStabilityReport {
    pub points: Vec<ExpStabilityPoint>,
    pub pass: bool,
}

/// Check C₂(δ_x e^{tA}, δ_y e^{tB}) ≤ e^{βt}·c₂(x,y) + α·ζ_β(t) over a time
/// grid; the left side is the debiased Monte Carlo cost.
#[allow(clippy::too_many_arguments)]
pub fn exp_stability_check(
    gen_a: &LevyTriplet,
    gen_b: &LevyTriplet,
    x: &[f64],
    y: &[f64],
    alpha: f64,
    beta: f64,
    t_grid: &[f64],
    mc_size: usize,
    reps: usize,
    seed: u64,
) -> Result<ExpStabilityReport> {
    if t_grid.is_empty() || !t_grid.iter().all(|t| *t > 0.0) {
        return Err(CoreError::param("t_grid", "need positive times"));
    }
    let c2_xy = half_sq_dist(x, y);
    let deterministic = is_deterministic(gen_a) && is_deterministic(gen_b);
    let effective_reps = if deterministic { 1 } else { reps.max(2) };
    let mut points = Vec::with_capacity(t_grid.len());
    let mut pass = true;
    for (ti, &t) in t_grid.iter().enumerate() {
        let mut vals = Vec::with_capacity(effective_reps);
        for rep in 0..effective_reps {
            let mut rng =
                StreamRng::new(seed, StreamDomain::Probe, 1000 + ti as u64, rep as u64);
            let cost = if deterministic {
                let a = sample_cloud(gen_a, x, t, 1, &mut rng);
                let b = sample_cloud(gen_b, y, t, 1, &mut rng);
                exact_w2_assignment(&a, &b)?.0
            } else {
                debiased_cost(gen_a, gen_b, x, y, t, mc_size.max(2), &mut rng)?
            };
            vals.push(cost);
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let stderr = if vals.len() > 1 {
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (vals.len() - 1) as f64;
            (var / vals.len() as f64).sqrt()
        } else {
            0.0
        };
        let rhs = (beta * t).exp() * c2_xy + alpha * zeta(beta, t)?;
        if mean > rhs + 3.0 * stderr {
            pass = false;
        }
        points.push(ExpStabilityPoint {
            t,
            lhs_mean: mean,
            lhs_stderr: stderr,
            rhs,
        });
    }
    Ok(ExpStabilityReport { points, pass })
}
