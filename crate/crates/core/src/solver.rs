//! Mean-field evolution on particle clouds: frozen-generator cell solves
//! glued over a partition, and windowed fixed-point iteration for the
//! self-consistent problem.

use crate::cloud::PointCloud;
use crate::error::{CoreError, Result};
use crate::model::{CoefficientTuple, MeanFieldModel, MeasureView};
use crate::ot::{c2_uniform_1d, exact_w2_assignment, tensorized_cost};
use crate::rng::{StreamDomain, StreamRng};
use crate::sim::NoiseGen;
use rand::Rng;

/// ζ_β(t) = (e^{βt} − 1)/β for β > 0, and t at β = 0; continuous in β.
pub fn zeta(beta: f64, t: f64) -> Result<f64> {
    if beta < 0.0 || !beta.is_finite() {
        return Err(CoreError::param("beta", "must be a nonnegative real"));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(CoreError::param("t", "must be a nonnegative real"));
    }
    if beta == 0.0 {
        return Ok(t);
    }
    // expm1 keeps full precision for small βt, matching the series expansion
    Ok(f64::exp_m1(beta * t) / beta)
}

/// A time-indexed family of clouds on a strictly increasing partition;
/// piecewise constant from the left between partition times.
#[derive(Clone, Debug)]
pub struct MeasureCurve {
    times: Vec<f64>,
    clouds: Vec<PointCloud>,
}

impl MeasureCurve {
    pub fn new(times: Vec<f64>, clouds: Vec<PointCloud>) -> Result<Self> {
        if times.len() != clouds.len() || times.is_empty() {
            return Err(CoreError::Size {
                left: times.len(),
                right: clouds.len(),
                context: "curve times vs clouds",
            });
        }
        if times[0] < 0.0 {
            return Err(CoreError::param("times", "must start at a nonnegative time"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::param("times", "must be strictly increasing"));
        }
        let (m, d) = (clouds[0].len(), clouds[0].dim());
        if clouds.iter().any(|c| c.len() != m || c.dim() != d) {
            return Err(CoreError::param("clouds", "all clouds must share (M, dim)"));
        }
        Ok(MeasureCurve { times, clouds })
    }

    /// Constant curve: the same cloud on a uniform partition of [t0, t1].
    pub fn constant(t0: f64, t1: f64, cells: usize, cloud: PointCloud) -> Result<Self> {
        if cells == 0 || t1 <= t0 {
            return Err(CoreError::param("cells", "need a nonempty partition"));
        }
        let times: Vec<f64> = (0..=cells)
            .map(|k| t0 + (t1 - t0) * k as f64 / cells as f64)
            .collect();
        let clouds = vec![cloud; cells + 1];
        MeasureCurve::new(times, clouds)
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn clouds(&self) -> &[PointCloud] {
        &self.clouds
    }

    pub fn cloud_dim(&self) -> usize {
        self.clouds[0].dim()
    }

    pub fn cloud_size(&self) -> usize {
        self.clouds[0].len()
    }

    pub fn require_coverage(&self, t0: f64, t1: f64) -> Result<()> {
        let tol = 1e-9 * (1.0 + self.t_end().abs());
        if t0 < self.t_start() - tol || t1 > self.t_end() + tol {
            return Err(CoreError::CurveCoverage {
                t: if t0 < self.t_start() - tol { t0 } else { t1 },
                t_start: self.t_start(),
                t_end: self.t_end(),
            });
        }
        Ok(())
    }

    /// Cell index k and the curve value at the left endpoint of the cell
    /// containing t (largest k with t_k ≤ t).
    pub fn cell_at(&self, t: f64) -> Result<(usize, &PointCloud)> {
        let tol = 1e-9 * (1.0 + self.t_end().abs());
        if t < self.t_start() - tol || t > self.t_end() + tol {
            return Err(CoreError::CurveCoverage {
                t,
                t_start: self.t_start(),
                t_end: self.t_end(),
            });
        }
        let k = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&(t + tol)).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        Ok((k, &self.clouds[k]))
    }

    /// Last curve value: the cloud at t_end.
    pub fn final_cloud(&self) -> &PointCloud {
        self.clouds.last().unwrap()
    }
}

/// Parameters for the cloud solver.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// cloud size
    pub m: usize,
    /// partition mesh for freezing the generator curve
    pub mesh: f64,
    /// inner Euler step
    pub dt: f64,
    pub picard_tol: f64,
    pub max_picard_iters: usize,
    /// contraction window; derived from the declared Lipschitz data when None
    pub window: Option<f64>,
    pub seed: u64,
}

impl SolverConfig {
    pub fn validate(&self, t_end: f64) -> Result<()> {
        if self.m == 0 {
            return Err(CoreError::param("m", "cloud size must be positive"));
        }
        if !(self.dt > 0.0) || !(self.mesh > 0.0) {
            return Err(CoreError::param("dt", "dt and mesh must be positive"));
        }
        if self.dt > self.mesh + 1e-12 || self.mesh > t_end + 1e-12 {
            return Err(CoreError::param("mesh", "need dt <= mesh <= t"));
        }
        if !(self.picard_tol > 0.0) {
            return Err(CoreError::param("picard_tol", "must be positive"));
        }
        Ok(())
    }
}

/// Distance used for solver residuals and curve comparisons: exact in one
/// dimension, assignment-exact for small clouds, and the identity-coupling
/// upper bound for large multi-dimensional clouds (iterates are coupled by
/// common random numbers, so the pairing is meaningful).
pub fn cloud_residual_c2(mu: &PointCloud, nu: &PointCloud) -> Result<f64> {
    if mu.dim() == 1 {
        return Ok(c2_uniform_1d(mu, nu));
    }
    if mu.len() <= 512 {
        return Ok(exact_w2_assignment(mu, nu)?.0);
    }
    tensorized_cost(mu, nu)
}

/// Deterministic initial cloud: M i.i.d. draws from the reference cloud's
/// atoms (resampling with replacement).
pub fn resample_cloud(reference: &PointCloud, m: usize, seed: u64, job: u64) -> PointCloud {
    let d = reference.dim();
    let mut rng = StreamRng::new(seed, StreamDomain::InitialDraw, job, 0);
    let mut data = Vec::with_capacity(m * d);
    for _ in 0..m {
        let idx = (rng.random::<u64>() % reference.len() as u64) as usize;
        data.extend_from_slice(reference.point(idx));
    }
    PointCloud::new(d, data).expect("nonempty resample")
}

/// Evolve one cloud of independent particles under coefficients frozen at a
/// fixed measure, from `t0` over `steps` Euler steps.  Stream addresses use
/// the global step index so restarts glue bitwise.
fn evolve_cell(
    cloud: &mut Vec<f64>,
    dim: usize,
    model: &MeanFieldModel,
    frozen: &MeasureView,
    noise: &NoiseGen,
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<()> {
    let m = cloud.len() / dim;
    let mut coeffs = CoefficientTuple::zeros(dim);
    let base_step = (t0 / dt).round() as u64;
    let mut next = vec![0.0; cloud.len()];
    for s in 0..steps {
        let noise_slice = noise.generate(base_step + s as u64, m);
        for i in 0..m {
            let x = &cloud[i * dim..(i + 1) * dim];
            model.evaluate_into(x, frozen, &mut coeffs)?;
            let mut out = [0.0; 8];
            let out = &mut out[..dim];
            for r in 0..dim {
                let mut v = x[r] + coeffs.drift[r] * dt;
                for c in 0..dim {
                    v += coeffs.sigma[(r, c)] * noise_slice.dw[i * dim + c];
                    v += coeffs.eta[(r, c)] * noise_slice.jump[i * dim + c];
                }
                out[r] = v;
            }
            next[i * dim..(i + 1) * dim].copy_from_slice(out);
        }
        if !next.iter().all(|v| v.is_finite()) {
            return Err(CoreError::Divergence {
                step: base_step as usize + s,
                t: t0 + (s + 1) as f64 * dt,
            });
        }
        std::mem::swap(cloud, &mut next);
    }
    Ok(())
}

fn cell_steps(t0: f64, t1: f64, dt: f64) -> Result<usize> {
    let steps = ((t1 - t0) / dt).round();
    if (steps * dt - (t1 - t0)).abs() > 1e-9 * (t1 - t0).max(1.0) {
        return Err(CoreError::param("dt", "must divide every partition cell"));
    }
    Ok(steps as usize)
}

/// Solve the linearized problem: evolve `rho0` with the generator frozen at
/// the driving curve's left-endpoint value on each partition cell, gluing
/// cell solutions.  Output curve lives on `mu_curve`'s partition.
pub fn solve_linearized(
    model: &MeanFieldModel,
    mu_curve: &MeasureCurve,
    rho0: &PointCloud,
    config: &SolverConfig,
) -> Result<MeasureCurve> {
    if rho0.len() != config.m {
        return Err(CoreError::Size {
            left: rho0.len(),
            right: config.m,
            context: "initial cloud vs configured M",
        });
    }
    if rho0.dim() != model.dim() {
        return Err(CoreError::Dim {
            left: rho0.dim(),
            right: model.dim(),
        });
    }
    let dim = model.dim();
    let noise = NoiseGen::new(config.seed, dim, config.dt, model.base_jump(), true, true)?;
    let times = mu_curve.times();
    let mut clouds = Vec::with_capacity(times.len());
    let mut positions = rho0.as_slice().to_vec();
    clouds.push(rho0.clone());
    for k in 0..times.len() - 1 {
        let (t0, t1) = (times[k], times[k + 1]);
        let steps = cell_steps(t0, t1, config.dt)?;
        let frozen_cloud = &mu_curve.clouds()[k];
        let frozen = MeasureView::from_cloud(frozen_cloud);
        evolve_cell(
            &mut positions,
            dim,
            model,
            &frozen,
            &noise,
            t0,
            config.dt,
            steps,
        )?;
        clouds.push(PointCloud::new(dim, positions.clone())?);
    }
    MeasureCurve::new(times.to_vec(), clouds)
}

/// Output of the self-consistent solve.
#[derive(Clone, Debug)]
pub struct MeanFieldRun {
    pub curve: MeasureCurve,
    pub picard_iters_per_window: Vec<usize>,
    /// residual sequence of each window's fixed-point iteration
    pub picard_residuals: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

/// Contraction window from declared (α, β): the largest h with
/// α·ζ_β(h) = ½; unbounded when α = 0.
pub fn contraction_window(alpha: f64, beta: f64) -> Option<f64> {
    if alpha <= 0.0 {
        return None;
    }
    let target = 0.5 / alpha;
    if beta == 0.0 {
        Some(target)
    } else {
        Some(f64::ln_1p(beta * target) / beta)
    }
}

/// Solve the self-consistent mean-field problem by windowed fixed-point
/// iteration: on each window, iterate μ ↦ solve_linearized(model, μ, ρ_w)
/// under common random numbers until the sup-residual drops below
/// `picard_tol`, then advance and glue.
pub fn solve_mean_field(
    model: &MeanFieldModel,
    rho0: &PointCloud,
    t_end: f64,
    config: &SolverConfig,
) -> Result<MeanFieldRun> {
    solve_mean_field_from(model, rho0, 0.0, t_end, config)
}

/// As [`solve_mean_field`], starting from an arbitrary time.  Stream
/// addresses use global step indices, so a solve over [0, T] and two solves
/// over [0, T/2], [T/2, T] (windows aligned) glue bitwise.
pub fn solve_mean_field_from(
    model: &MeanFieldModel,
    rho0: &PointCloud,
    t_start: f64,
    t_end: f64,
    config: &SolverConfig,
) -> Result<MeanFieldRun> {
    if t_end <= t_start {
        return Err(CoreError::param("t", "t_end must exceed t_start"));
    }
    let span = t_end - t_start;
    config.validate(span)?;
    let mut warnings = Vec::new();
    let n_cells = {
        let c = (span / config.mesh).round();
        if (c * config.mesh - span).abs() > 1e-9 * span.max(1.0) {
            return Err(CoreError::param("mesh", "must divide the horizon"));
        }
        c as usize
    };
    let times: Vec<f64> = (0..=n_cells)
        .map(|k| t_start + span * k as f64 / n_cells as f64)
        .collect();

    let window_len = match config.window {
        Some(h) => h,
        None => match model.lipschitz {
            Some(lp) => match contraction_window(lp.alpha, lp.beta) {
                Some(h) => h,
                None => span,
            },
            None => {
                warnings.push(
                    "no declared Lipschitz data; using fallback window T/8".to_string(),
                );
                span / 8.0
            }
        },
    };
    let cells_per_window =
        ((window_len / config.mesh).floor() as usize).clamp(1, n_cells.max(1));
    if let Some(lp) = model.lipschitz {
        // warn on the actual window after mesh quantization
        let actual_window = (cells_per_window as f64 * config.mesh).min(span);
        let contraction = lp.alpha * zeta(lp.beta, actual_window)?;
        if contraction >= 1.0 {
            warnings.push(format!(
                "window {actual_window} gives contraction factor {contraction:.3} >= 1"
            ));
        }
    }

    // measure-independent coefficients make the fixed-point map constant:
    // a single linearized solve per window is already the fixed point
    let single_shot = model.is_measure_independent();

    let mut glued_times = vec![times[0]];
    let mut glued_clouds = vec![rho0.clone()];
    let mut iters_per_window = Vec::new();
    let mut residuals_per_window: Vec<Vec<f64>> = Vec::new();
    let mut window_start_cell = 0usize;
    let mut window_initial = rho0.clone();

    while window_start_cell < n_cells {
        let window_end_cell = (window_start_cell + cells_per_window).min(n_cells);
        let wtimes: Vec<f64> = times[window_start_cell..=window_end_cell].to_vec();
        let wcells = wtimes.len() - 1;

        // initial guess: constant extension of the window-start cloud
        let mut guess =
            MeasureCurve::new(wtimes.clone(), vec![window_initial.clone(); wcells + 1])?;
        let mut iters = 0usize;
        let mut residuals = Vec::new();
        loop {
            iters += 1;
            let next = solve_linearized(model, &guess, &window_initial, config)?;
            if single_shot {
                guess = next;
                break;
            }
            let mut residual = 0.0_f64;
            for (a, b) in next.clouds().iter().zip(guess.clouds()) {
                residual = residual.max(cloud_residual_c2(a, b)?);
            }
            residuals.push(residual);
            guess = next;
            if residual < config.picard_tol {
                break;
            }
            if iters >= config.max_picard_iters {
                return Err(CoreError::NonContraction { iters, residuals });
            }
        }
        iters_per_window.push(iters);
        residuals_per_window.push(residuals);
        for (t, c) in guess.times().iter().zip(guess.clouds()).skip(1) {
            glued_times.push(*t);
            glued_clouds.push(c.clone());
        }
        window_initial = guess.final_cloud().clone();
        window_start_cell = window_end_cell;
    }

    Ok(MeanFieldRun {
        curve: MeasureCurve::new(glued_times, glued_clouds)?,
        picard_iters_per_window: iters_per_window,
        picard_residuals: residuals_per_window,
        warnings,
    })
}

/// What drives the refinement study: a prescribed curve or the
/// self-consistent solution at each mesh.
pub enum PcaDrive<'a> {
    Prescribed(&'a MeasureCurve),
    SelfConsistent,
}

/// Mesh-refinement table: distances of each mesh's solution to the finest
/// mesh's, and between successive meshes, under common random numbers.
#[derive(Clone, Debug)]
pub struct PcaTable {
    pub meshes: Vec<f64>,
    pub dist_to_finest: Vec<f64>,
    pub successive: Vec<f64>,
}

pub fn pca_refinement_study(
    model: &MeanFieldModel,
    drive: PcaDrive,
    rho0: &PointCloud,
    t_end: f64,
    meshes: &[f64],
    config: &SolverConfig,
) -> Result<PcaTable> {
    if meshes.len() < 2 {
        return Err(CoreError::param("meshes", "need at least two meshes"));
    }
    if meshes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CoreError::param("meshes", "must be strictly decreasing"));
    }
    for w in meshes.windows(2) {
        let ratio = w[0] / w[1];
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(CoreError::param("meshes", "must be nested (integer ratios)"));
        }
    }

    let mut curves: Vec<MeasureCurve> = Vec::with_capacity(meshes.len());
    for &mesh in meshes {
        let mut cfg = config.clone();
        cfg.mesh = mesh;
        let n_cells = (t_end / mesh).round() as usize;
        let times: Vec<f64> = (0..=n_cells)
            .map(|k| t_end * k as f64 / n_cells as f64)
            .collect();
        let curve = match &drive {
            PcaDrive::Prescribed(fine) => {
                fine.require_coverage(0.0, t_end)?;
                let clouds: Vec<PointCloud> = times
                    .iter()
                    .map(|t| fine.cell_at(*t).map(|(_, c)| c.clone()))
                    .collect::<Result<_>>()?;
                let coarse = MeasureCurve::new(times, clouds)?;
                solve_linearized(model, &coarse, rho0, &cfg)?
            }
            PcaDrive::SelfConsistent => solve_mean_field(model, rho0, t_end, &cfg)?.curve,
        };
        curves.push(curve);
    }

    let finest = curves.last().unwrap();
    let mut dist_to_finest = Vec::with_capacity(curves.len());
    for curve in &curves {
        let mut dist = 0.0_f64;
        for (t, cloud) in curve.times().iter().zip(curve.clouds()) {
            let (_, fine_cloud) = finest.cell_at(*t)?;
            dist = dist.max(cloud_residual_c2(cloud, fine_cloud)?);
        }
        dist_to_finest.push(dist);
    }
    let mut successive = Vec::new();
    for pair in curves.windows(2) {
        let (coarse, fine) = (&pair[0], &pair[1]);
        let mut dist = 0.0_f64;
        for (t, cloud) in coarse.times().iter().zip(coarse.clouds()) {
            let (_, fine_cloud) = fine.cell_at(*t)?;
            dist = dist.max(cloud_residual_c2(cloud, fine_cloud)?);
        }
        successive.push(dist);
    }
    Ok(PcaTable {
        meshes: meshes.to_vec(),
        dist_to_finest,
        successive,
    })
}

/// One evaluation point of the linearized-stability inequality.
#[derive(Clone, Debug)]
pub struct StabilityPoint {
    pub t: f64,
    pub lhs_mean: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub points: Vec<StabilityPoint>,
    pub sup_driver_distance: f64,
    pub pass: bool,
}

/// Check C₂(ρ_t, σ_t) ≤ C₂(ρ₀, σ₀)e^{βt} + αζ_β(t)·sup_s C₂(μ_s, ν_s) over
/// the curve partition, with `reps` common-random-number replicates giving
/// the Monte Carlo standard error of the left side.
#[allow(clippy::too_many_arguments)]
pub fn stability_check(
    model: &MeanFieldModel,
    mu_curve: &MeasureCurve,
    nu_curve: &MeasureCurve,
    rho0: &PointCloud,
    sigma0: &PointCloud,
    alpha: f64,
    beta: f64,
    config: &SolverConfig,
    reps: usize,
) -> Result<StabilityReport> {
    if mu_curve.times() != nu_curve.times() {
        return Err(CoreError::param(
            "curves",
            "driver curves must share a partition",
        ));
    }
    let times = mu_curve.times().to_vec();
    let mut sup_driver = 0.0_f64;
    for (a, b) in mu_curve.clouds().iter().zip(nu_curve.clouds()) {
        sup_driver = sup_driver.max(cloud_residual_c2(a, b)?);
    }
    let c2_initial = cloud_residual_c2(rho0, sigma0)?;

    let mut lhs: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); times.len()];
    for r in 0..reps {
        let mut cfg = config.clone();
        cfg.seed = config.seed.wrapping_add(0x9e37_79b9).wrapping_mul(r as u64 + 1);
        let rho = solve_linearized(model, mu_curve, rho0, &cfg)?;
        let sig = solve_linearized(model, nu_curve, sigma0, &cfg)?;
        for (k, (a, b)) in rho.clouds().iter().zip(sig.clouds()).enumerate() {
            lhs[k].push(cloud_residual_c2(a, b)?);
        }
    }

    let mut points = Vec::with_capacity(times.len());
    let mut pass = true;
    for (k, t) in times.iter().enumerate() {
        let vals = &lhs[k];
        let mean: f64 = vals.iter().sum::<f64>() / vals.len() as f64;
        let stderr = if vals.len() > 1 {
            let var: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (vals.len() - 1) as f64;
            (var / vals.len() as f64).sqrt()
        } else {
            0.0
        };
        let rhs = c2_initial * (beta * t).exp() + alpha * zeta(beta, *t)? * sup_driver;
        if mean > rhs + 3.0 * stderr {
            pass = false;
        }
        points.push(StabilityPoint {
            t: *t,
            lhs_mean: mean,
            lhs_stderr: stderr,
            rhs,
        });
    }
    Ok(StabilityReport {
        points,
        sup_driver_distance: sup_driver,
        pass,
    })
}
