//! Monte Carlo simulation of the interacting N-particle system and of its
//! synchronously coupled mean-field partner.
//!
//! Explicit Euler scheme with coefficients frozen at the step start.  Each
//! particle interacts through the truncated empirical measure of the other
//! N−1 particles.  Jumps are exact compound-Poisson events per step with the
//! global-form compensator −η·m₁(Ω)·dt.

use crate::cloud::PointCloud;
use crate::error::{CoreError, Result};
use crate::levy::DiscreteLevyMeasure;
use crate::model::{CoefficientTuple, MeanFieldModel, MeasureView};
use crate::rng::{StreamDomain, StreamRng};
use crate::solver::MeasureCurve;
use crate::spd::SpdMatrix;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

/// Simulation parameters.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub n: usize,
    pub dim: usize,
    pub t_end: f64,
    pub dt: f64,
    pub seed: u64,
    pub checkpoints: Vec<f64>,
    /// exact compound-Poisson events when true; Gaussian moment-matched
    /// jump increments otherwise
    pub exact_jumps: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(CoreError::param("n", "need at least 2 particles"));
        }
        if !(self.dt > 0.0) {
            return Err(CoreError::param("dt", "must be positive"));
        }
        if self.t_end < 0.0 {
            return Err(CoreError::param("t", "must be nonnegative"));
        }
        if self.t_end > 0.0 && self.dt > self.t_end + 1e-12 {
            return Err(CoreError::param("dt", "must not exceed the horizon"));
        }
        for c in &self.checkpoints {
            if *c < -1e-12 || *c > self.t_end + 1e-9 {
                return Err(CoreError::param(
                    "checkpoints",
                    format!("checkpoint {c} outside [0, {}]", self.t_end),
                ));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> Result<usize> {
        if self.t_end == 0.0 {
            return Ok(0);
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(CoreError::param("dt", "must divide the horizon"));
        }
        Ok(steps as usize)
    }
}

/// Positions of the interacting system, plus optionally the synchronous
/// partner system.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleState {
    pub time: f64,
    pub dim: usize,
    /// N×d row-major
    pub positions: Vec<f64>,
    /// partner system X̄, same shape
    pub coupled: Option<Vec<f64>>,
}

impl ParticleState {
    pub fn from_cloud(cloud: &PointCloud) -> Self {
        ParticleState {
            time: 0.0,
            dim: cloud.dim(),
            positions: cloud.as_slice().to_vec(),
            coupled: None,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn to_cloud(&self) -> PointCloud {
        PointCloud::new(self.dim, self.positions.clone()).expect("nonempty state")
    }

    pub fn coupled_cloud(&self) -> Option<PointCloud> {
        self.coupled
            .as_ref()
            .map(|c| PointCloud::new(self.dim, c.clone()).expect("nonempty state"))
    }
}

/// Per-step driver noise: Brownian increments ~ N(0, dt·I) per particle and
/// compensated base-space jump increments.
#[derive(Clone, Debug)]
pub struct DriverNoise {
    pub dw: Vec<f64>,
    pub jump: Vec<f64>,
}

/// Deterministic noise source addressed by (seed, particle, step).
pub struct NoiseGen {
    seed: u64,
    dim: usize,
    dt: f64,
    exact_jumps: bool,
    bm_domain: StreamDomain,
    jump_domain: StreamDomain,
    jump: Option<JumpSampler>,
}

struct JumpSampler {
    atoms: Vec<(Vec<f64>, Poisson<f64>)>,
    /// dt·m₁(Ω), subtracted as the compensator
    drift_correction: Vec<f64>,
    /// factor F with FFᵀ = dt·Σλzzᵀ, for the Gaussian approximation
    gauss_factor: DMatrix<f64>,
}

impl NoiseGen {
    pub fn new(
        seed: u64,
        dim: usize,
        dt: f64,
        base: Option<&DiscreteLevyMeasure>,
        exact_jumps: bool,
        solver_streams: bool,
    ) -> Result<Self> {
        let jump = match base {
            Some(b) if !b.is_zero() => {
                let atoms = b
                    .atoms()
                    .iter()
                    .map(|a| {
                        Poisson::new(a.lambda * dt)
                            .map(|p| (a.z.clone(), p))
                            .map_err(|e| CoreError::param("lambda", e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let drift_correction: Vec<f64> =
                    b.first_moment().iter().map(|m| m * dt).collect();
                let cov = SpdMatrix::new(b.covariance_rate() * dt)
                    .map_err(|e| CoreError::Matrix(format!("jump covariance: {e}")))?;
                Some(JumpSampler {
                    atoms,
                    drift_correction,
                    gauss_factor: cov.sqrt(),
                })
            }
            _ => None,
        };
        let (bm_domain, jump_domain) = if solver_streams {
            (StreamDomain::SolverBrownian, StreamDomain::SolverJump)
        } else {
            (StreamDomain::Brownian, StreamDomain::Jump)
        };
        Ok(NoiseGen {
            seed,
            dim,
            dt,
            exact_jumps,
            bm_domain,
            jump_domain,
            jump,
        })
    }

    /// Noise slice for one step.  `step` is the global step index, so a run
    /// restarted from a checkpoint reuses exactly the same streams.
    pub fn generate(&self, step: u64, n: usize) -> DriverNoise {
        let d = self.dim;
        let sqrt_dt = self.dt.sqrt();
        let mut dw = vec![0.0; n * d];
        let mut jump = vec![0.0; n * d];
        for i in 0..n {
            let mut rng = StreamRng::new(self.seed, self.bm_domain, i as u64, step);
            for k in 0..d {
                let z: f64 = rng.sample(StandardNormal);
                dw[i * d + k] = sqrt_dt * z;
            }
            if let Some(js) = &self.jump {
                let mut jrng = StreamRng::new(self.seed, self.jump_domain, i as u64, step);
                let slot = &mut jump[i * d..(i + 1) * d];
                if self.exact_jumps {
                    for (z, poisson) in &js.atoms {
                        let count = poisson.sample(&mut jrng);
                        if count > 0.0 {
                            for (s, zk) in slot.iter_mut().zip(z) {
                                *s += count * zk;
                            }
                        }
                    }
                    for (s, c) in slot.iter_mut().zip(&js.drift_correction) {
                        *s -= c;
                    }
                } else {
                    for (row, s) in slot.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for col in 0..d {
                            let z: f64 = jrng.sample(StandardNormal);
                            acc += js.gauss_factor[(row, col)] * z;
                        }
                        // factor already includes dt
                        *s = acc;
                    }
                }
            }
        }
        DriverNoise { dw, jump }
    }
}

fn apply_update(
    x: &[f64],
    coeffs: &CoefficientTuple,
    dt: f64,
    dw: &[f64],
    jump: &[f64],
    out: &mut [f64],
) {
    let d = x.len();
    for i in 0..d {
        let mut v = x[i] + coeffs.drift[i] * dt;
        for j in 0..d {
            v += coeffs.sigma[(i, j)] * dw[j];
            v += coeffs.eta[(i, j)] * jump[j];
        }
        out[i] = v;
    }
}

fn check_finite(positions: &[f64], step: usize, t: f64) -> Result<()> {
    if positions.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CoreError::Divergence { step, t })
    }
}

fn full_mean(dim: usize, data: &[f64]) -> Vec<f64> {
    let n = data.len() / dim;
    let mut mean = vec![0.0; dim];
    for p in data.chunks_exact(dim) {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    mean
}

/// One explicit Euler step of the interacting system.  Coefficients are
/// evaluated at the truncated empirical measure of the step-start state.
pub fn step(
    state: &ParticleState,
    model: &MeanFieldModel,
    dt: f64,
    noise: &DriverNoise,
) -> Result<ParticleState> {
    let d = state.dim;
    let n = state.len();
    if noise.dw.len() != n * d {
        return Err(CoreError::Size {
            left: noise.dw.len(),
            right: n * d,
            context: "noise slice",
        });
    }
    let mean = full_mean(d, &state.positions);
    let mut next = vec![0.0; n * d];
    let mut coeffs = CoefficientTuple::zeros(d);
    for i in 0..n {
        let view = MeasureView::leave_one_out(d, &state.positions, i, &mean)?;
        let x = &state.positions[i * d..(i + 1) * d];
        model.evaluate_into(x, &view, &mut coeffs)?;
        apply_update(
            x,
            &coeffs,
            dt,
            &noise.dw[i * d..(i + 1) * d],
            &noise.jump[i * d..(i + 1) * d],
            &mut next[i * d..(i + 1) * d],
        );
    }
    let t = state.time + dt;
    check_finite(&next, (state.time / dt).round() as usize, t)?;
    Ok(ParticleState {
        time: t,
        dim: d,
        positions: next,
        coupled: state.coupled.clone(),
    })
}

fn checkpoint_steps(config: &SimConfig, n_steps: usize) -> Vec<usize> {
    let mut steps: Vec<usize> = config
        .checkpoints
        .iter()
        .map(|c| ((c / config.dt).round() as usize).min(n_steps))
        .collect();
    if config.checkpoints.is_empty() {
        steps.push(n_steps);
    }
    steps.sort_unstable();
    steps.dedup();
    steps
}

/// Simulate the interacting system, reporting states at the configured
/// checkpoints (nearest step times).  Deterministic given the seed.
pub fn simulate(
    config: &SimConfig,
    model: &MeanFieldModel,
    initial: &PointCloud,
) -> Result<Vec<(f64, ParticleState)>> {
    config.validate()?;
    if initial.len() != config.n {
        return Err(CoreError::Size {
            left: initial.len(),
            right: config.n,
            context: "initial cloud vs particle count",
        });
    }
    if initial.dim() != config.dim {
        return Err(CoreError::Dim {
            left: initial.dim(),
            right: config.dim,
        });
    }
    let n_steps = config.n_steps()?;
    let noise_gen = NoiseGen::new(
        config.seed,
        config.dim,
        config.dt,
        model.base_jump(),
        config.exact_jumps,
        false,
    )?;
    let marks = checkpoint_steps(config, n_steps);
    let mut out = Vec::with_capacity(marks.len());
    let mut state = ParticleState::from_cloud(initial);
    let mut mark_iter = marks.iter().peekable();
    for k in 0..=n_steps {
        state.time = k as f64 * config.dt;
        while mark_iter.peek() == Some(&&k) {
            out.push((state.time, state.clone()));
            mark_iter.next();
        }
        if k == n_steps {
            break;
        }
        let noise = noise_gen.generate(k as u64, config.n);
        state = step(&state, model, config.dt, &noise)
            .map_err(|e| rewrite_divergence(e, k, state.time))?;
    }
    Ok(out)
}

fn rewrite_divergence(e: CoreError, step: usize, t: f64) -> CoreError {
    match e {
        CoreError::Divergence { .. } => CoreError::Divergence { step, t },
        other => other,
    }
}

/// A synchronous-pair checkpoint: the joint state and the mean tensorized
/// cost (1/N) Σ ½|X_i − X̄_i|², an empirical upper bound for the tensorized
/// transport cost between the interacting law and the mean-field product.
#[derive(Clone, Debug)]
pub struct SyncCheckpoint {
    pub t: f64,
    pub state: ParticleState,
    pub mean_pathcost: f64,
}

/// Simulate the interacting system together with the partner system driven
/// by the SAME noise but with coefficients frozen at the mean-field curve.
pub fn simulate_synchronous_pair(
    config: &SimConfig,
    model: &MeanFieldModel,
    mf_curve: &MeasureCurve,
    initial: &PointCloud,
) -> Result<Vec<SyncCheckpoint>> {
    config.validate()?;
    if initial.len() != config.n {
        return Err(CoreError::Size {
            left: initial.len(),
            right: config.n,
            context: "initial cloud vs particle count",
        });
    }
    let n_steps = config.n_steps()?;
    if config.t_end > 0.0 {
        mf_curve.require_coverage(0.0, config.t_end)?;
    }
    let noise_gen = NoiseGen::new(
        config.seed,
        config.dim,
        config.dt,
        model.base_jump(),
        config.exact_jumps,
        false,
    )?;
    let d = config.dim;
    let n = config.n;
    let marks = checkpoint_steps(config, n_steps);
    let mut out = Vec::with_capacity(marks.len());

    let mut positions = initial.as_slice().to_vec();
    let mut partner = positions.clone();
    let mut coeffs = CoefficientTuple::zeros(d);
    let mut mark_iter = marks.iter().peekable();
    let mut frozen_cell = usize::MAX;
    let mut frozen_mean: Vec<f64> = vec![];

    for k in 0..=n_steps {
        let t = k as f64 * config.dt;
        while mark_iter.peek() == Some(&&k) {
            let cost = positions
                .chunks_exact(d)
                .zip(partner.chunks_exact(d))
                .map(|(x, y)| crate::cloud::half_sq_dist(x, y))
                .sum::<f64>()
                / n as f64;
            out.push(SyncCheckpoint {
                t,
                state: ParticleState {
                    time: t,
                    dim: d,
                    positions: positions.clone(),
                    coupled: Some(partner.clone()),
                },
                mean_pathcost: cost,
            });
            mark_iter.next();
        }
        if k == n_steps {
            break;
        }

        let (cell, frozen_cloud) = mf_curve.cell_at(t)?;
        if cell != frozen_cell {
            frozen_cell = cell;
            frozen_mean = frozen_cloud.mean();
        }
        let frozen_view = MeasureView::from_cloud_with_mean(frozen_cloud, frozen_mean.clone());

        let noise = noise_gen.generate(k as u64, n);
        let mean = full_mean(d, &positions);
        let mut next = vec![0.0; n * d];
        let mut next_partner = vec![0.0; n * d];
        for i in 0..n {
            let dw = &noise.dw[i * d..(i + 1) * d];
            let jump = &noise.jump[i * d..(i + 1) * d];

            let view = MeasureView::leave_one_out(d, &positions, i, &mean)?;
            let x = &positions[i * d..(i + 1) * d];
            model.evaluate_into(x, &view, &mut coeffs)?;
            apply_update(x, &coeffs, config.dt, dw, jump, &mut next[i * d..(i + 1) * d]);

            let xb = &partner[i * d..(i + 1) * d];
            model.evaluate_into(xb, &frozen_view, &mut coeffs)?;
            apply_update(
                xb,
                &coeffs,
                config.dt,
                dw,
                jump,
                &mut next_partner[i * d..(i + 1) * d],
            );
        }
        check_finite(&next, k, t)?;
        check_finite(&next_partner, k, t)?;
        positions = next;
        partner = next_partner;
    }
    Ok(out)
}

/// Truncated empirical measure μ(x_k′): the cloud of the other N−1 particles.
pub fn truncated_empirical(state: &ParticleState, k: usize) -> Result<PointCloud> {
    let n = state.len();
    if n < 2 {
        return Err(CoreError::Size {
            left: n,
            right: 2,
            context: "truncated empirical needs N >= 2",
        });
    }
    if k >= n {
        return Err(CoreError::param("k", "particle index out of range"));
    }
    let d = state.dim;
    let mut data = Vec::with_capacity((n - 1) * d);
    for (i, p) in state.positions.chunks_exact(d).enumerate() {
        if i != k {
            data.extend_from_slice(p);
        }
    }
    PointCloud::new(d, data)
}
