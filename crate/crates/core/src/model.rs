//! Lévy-type mean-field models: measure-dependent coefficient fields
//! (b, σ, η)(x, μ) with an average-form specialization via kernels
//! (b̃, σ̃, η̃)(x, z) integrated against μ.

use crate::cloud::PointCloud;
use crate::error::{CoreError, Result};
use crate::levy::DiscreteLevyMeasure;
use crate::ot::empirical_c2;
use crate::rng::{StreamDomain, StreamRng};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;
use std::sync::Arc;

/// Declared Lipschitz data for a model:
/// `alpha`, `beta` bound the coefficient map (square of the 𝒱-distance by
/// α·W₂(μ,ν)² + (β/2)|x−y|²); `m` bounds Σ ≤ √m·W₂ and `m_prime` the
/// x-Lipschitz constant of Σ.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipschitzParams {
    pub alpha: f64,
    pub beta: f64,
    pub m: f64,
    pub m_prime: f64,
}

/// An element of 𝒱 = ℝ^d × M_d × M_d.
#[derive(Clone, Debug)]
pub struct CoefficientTuple {
    pub drift: Vec<f64>,
    pub sigma: DMatrix<f64>,
    pub eta: DMatrix<f64>,
}

impl CoefficientTuple {
    pub fn zeros(d: usize) -> Self {
        CoefficientTuple {
            drift: vec![0.0; d],
            sigma: DMatrix::zeros(d, d),
            eta: DMatrix::zeros(d, d),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        CoefficientTuple {
            drift: self.drift.iter().map(|v| c * v).collect(),
            sigma: &self.sigma * c,
            eta: &self.eta * c,
        }
    }
}

/// ‖(b,σ,η)‖_𝒱 = √(½|b|² + ½‖σ‖_F² + ½‖η‖_F²).
pub fn vnorm(t: &CoefficientTuple) -> f64 {
    let b: f64 = t.drift.iter().map(|v| v * v).sum();
    let s: f64 = t.sigma.iter().map(|v| v * v).sum();
    let e: f64 = t.eta.iter().map(|v| v * v).sum();
    (0.5 * (b + s + e)).sqrt()
}

/// ‖τ − τ′‖_𝒱.
pub fn vnorm_diff(a: &CoefficientTuple, b: &CoefficientTuple) -> f64 {
    let d: f64 = a
        .drift
        .iter()
        .zip(&b.drift)
        .map(|(u, v)| (u - v) * (u - v))
        .sum();
    let s: f64 = a
        .sigma
        .iter()
        .zip(b.sigma.iter())
        .map(|(u, v)| (u - v) * (u - v))
        .sum();
    let e: f64 = a
        .eta
        .iter()
        .zip(b.eta.iter())
        .map(|(u, v)| (u - v) * (u - v))
        .sum();
    (0.5 * (d + s + e)).sqrt()
}

/// A view of an empirical measure used during coefficient evaluation: a full
/// cloud, or a leave-one-out slice of a flat particle array.  The mean is
/// computed once so affine kernels can be reduced without touching points.
pub struct MeasureView<'a> {
    dim: usize,
    data: &'a [f64],
    exclude: Option<usize>,
    mean: Vec<f64>,
}

impl<'a> MeasureView<'a> {
    pub fn from_cloud(cloud: &'a PointCloud) -> Self {
        MeasureView {
            dim: cloud.dim(),
            data: cloud.as_slice(),
            exclude: None,
            mean: cloud.mean(),
        }
    }

    /// As `from_cloud` but with a precomputed mean (hot loops cache it).
    pub fn from_cloud_with_mean(cloud: &'a PointCloud, mean: Vec<f64>) -> Self {
        debug_assert_eq!(mean.len(), cloud.dim());
        MeasureView {
            dim: cloud.dim(),
            data: cloud.as_slice(),
            exclude: None,
            mean,
        }
    }

    /// View over a flat N×d array.
    pub fn from_flat(dim: usize, data: &'a [f64]) -> Self {
        let n = data.len() / dim;
        let mut mean = vec![0.0; dim];
        for p in data.chunks_exact(dim) {
            for (o, v) in mean.iter_mut().zip(p) {
                *o += v;
            }
        }
        for o in &mut mean {
            *o /= n as f64;
        }
        MeasureView {
            dim,
            data,
            exclude: None,
            mean,
        }
    }

    /// Leave-one-out view: the truncated empirical measure excluding
    /// particle `k`.  `full_mean` is the mean of all N points; the truncated
    /// mean is (N·mean − x_k)/(N−1).
    pub fn leave_one_out(dim: usize, data: &'a [f64], k: usize, full_mean: &[f64]) -> Result<Self> {
        let n = data.len() / dim;
        if n < 2 {
            return Err(CoreError::EmptyMeasure);
        }
        let xk = &data[k * dim..(k + 1) * dim];
        let mean = full_mean
            .iter()
            .zip(xk)
            .map(|(m, x)| (n as f64 * m - x) / (n as f64 - 1.0))
            .collect();
        Ok(MeasureView {
            dim,
            data,
            exclude: Some(k),
            mean,
        })
    }

    pub fn len(&self) -> usize {
        let n = self.data.len() / self.dim;
        if self.exclude.is_some() {
            n - 1
        } else {
            n
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        let ex = self.exclude;
        self.data
            .chunks_exact(self.dim)
            .enumerate()
            .filter(move |(i, _)| Some(*i) != ex)
            .map(|(_, p)| p)
    }

    pub fn to_cloud(&self) -> PointCloud {
        let mut data = Vec::with_capacity(self.len() * self.dim);
        for p in self.points() {
            data.extend_from_slice(p);
        }
        PointCloud::new(self.dim, data).expect("view is nonempty")
    }
}

fn coord_mean(z: &[f64]) -> f64 {
    z.iter().sum::<f64>() / z.len() as f64
}

/// Vector kernels b̃(x, z) for average-form drifts.
#[derive(Clone)]
pub enum DriftKernel {
    /// b̃(x,z) = κ(z − x)
    LinearAttraction { kappa: f64 },
    /// b̃(x,z) = v
    Constant { value: Vec<f64> },
    /// b̃(x,z) = −(base + slope·z̄)·x with z̄ the coordinate mean of z
    ScaledRestoring { base: f64, slope: f64 },
    Custom(Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>),
}

/// Matrix kernels σ̃(x, z) / η̃(x, z) for average-form coefficients.
#[derive(Clone)]
pub enum MatrixKernel {
    Zero,
    /// s·I
    ScalarIdentity { value: f64 },
    /// (base + slope·z̄)·I
    LinearIsotropic { base: f64, slope: f64 },
    Custom(Arc<dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync>),
}

impl DriftKernel {
    pub fn eval(&self, x: &[f64], z: &[f64], out: &mut [f64]) {
        match self {
            DriftKernel::LinearAttraction { kappa } => {
                for ((o, zi), xi) in out.iter_mut().zip(z).zip(x) {
                    *o = kappa * (zi - xi);
                }
            }
            DriftKernel::Constant { value } => out.copy_from_slice(value),
            DriftKernel::ScaledRestoring { base, slope } => {
                let s = -(base + slope * coord_mean(z));
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = s * xi;
                }
            }
            DriftKernel::Custom(f) => out.copy_from_slice(&f(x, z)),
        }
    }

    /// Kernels affine in z reduce to a single evaluation at the measure mean.
    pub fn reduces_to_mean(&self) -> bool {
        !matches!(self, DriftKernel::Custom(_))
    }
}

impl MatrixKernel {
    pub fn eval(&self, x: &[f64], z: &[f64], out: &mut DMatrix<f64>) {
        match self {
            MatrixKernel::Zero => out.fill(0.0),
            MatrixKernel::ScalarIdentity { value } => {
                out.fill(0.0);
                out.fill_diagonal(*value);
            }
            MatrixKernel::LinearIsotropic { base, slope } => {
                out.fill(0.0);
                out.fill_diagonal(base + slope * coord_mean(z));
            }
            MatrixKernel::Custom(f) => out.copy_from(&f(x, z)),
        }
    }

    pub fn reduces_to_mean(&self) -> bool {
        !matches!(self, MatrixKernel::Custom(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, MatrixKernel::Zero)
    }
}

/// General measure-dependent drift fields b(x, μ).
#[derive(Clone)]
pub enum DriftField {
    /// b(x,μ) = −κx
    Restoring { kappa: f64 },
    Constant { value: Vec<f64> },
    /// b(x,μ) = κ(mean(μ) − x)
    MeanAttraction { kappa: f64 },
    Custom(Arc<dyn Fn(&[f64], &MeasureView) -> Vec<f64> + Send + Sync>),
}

/// General measure-dependent matrix fields.
#[derive(Clone)]
pub enum MatrixField {
    Zero,
    ScalarIdentity { value: f64 },
    Custom(Arc<dyn Fn(&[f64], &MeasureView) -> DMatrix<f64> + Send + Sync>),
}

impl DriftField {
    fn eval(&self, x: &[f64], mu: &MeasureView, out: &mut [f64]) {
        match self {
            DriftField::Restoring { kappa } => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = -kappa * xi;
                }
            }
            DriftField::Constant { value } => out.copy_from_slice(value),
            DriftField::MeanAttraction { kappa } => {
                for ((o, m), xi) in out.iter_mut().zip(mu.mean()).zip(x) {
                    *o = kappa * (m - xi);
                }
            }
            DriftField::Custom(f) => out.copy_from_slice(&f(x, mu)),
        }
    }

    fn depends_on_measure(&self) -> bool {
        matches!(self, DriftField::MeanAttraction { .. } | DriftField::Custom(_))
    }
}

impl MatrixField {
    fn eval(&self, x: &[f64], mu: &MeasureView, out: &mut DMatrix<f64>) {
        match self {
            MatrixField::Zero => out.fill(0.0),
            MatrixField::ScalarIdentity { value } => {
                out.fill(0.0);
                out.fill_diagonal(*value);
            }
            MatrixField::Custom(f) => out.copy_from(&f(x, mu)),
        }
    }

    fn depends_on_measure(&self) -> bool {
        matches!(self, MatrixField::Custom(_))
    }
}

#[derive(Clone)]
pub enum ModelKind {
    General {
        b: DriftField,
        sigma: MatrixField,
        eta: MatrixField,
    },
    AverageForm {
        b: DriftKernel,
        sigma: MatrixKernel,
        eta: MatrixKernel,
    },
}

/// A mean-field model: coefficient fields, an optional base jump measure Ω
/// (the jump part of the generator is η(x,μ)♯Ω), and declared Lipschitz
/// metadata.
#[derive(Clone)]
pub struct MeanFieldModel {
    dim: usize,
    pub kind: ModelKind,
    base_jump: Option<DiscreteLevyMeasure>,
    pub lipschitz: Option<LipschitzParams>,
    label: String,
}

impl std::fmt::Debug for MeanFieldModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeanFieldModel")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field(
                "kind",
                &match self.kind {
                    ModelKind::General { .. } => "general",
                    ModelKind::AverageForm { .. } => "average_form",
                },
            )
            .field("jump_atoms", &self.base_jump.as_ref().map(|j| j.atoms().len()))
            .finish()
    }
}

impl MeanFieldModel {
    pub fn new(
        dim: usize,
        kind: ModelKind,
        base_jump: Option<DiscreteLevyMeasure>,
        lipschitz: Option<LipschitzParams>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(CoreError::param("dim", "must be positive"));
        }
        if let Some(j) = &base_jump {
            if j.dim() != dim {
                return Err(CoreError::Dim {
                    left: j.dim(),
                    right: dim,
                });
            }
        }
        Ok(MeanFieldModel {
            dim,
            kind,
            base_jump,
            lipschitz,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn base_jump(&self) -> Option<&DiscreteLevyMeasure> {
        self.base_jump.as_ref()
    }

    pub fn is_average_form(&self) -> bool {
        matches!(self.kind, ModelKind::AverageForm { .. })
    }

    /// True when no coefficient reads the measure argument: the interacting
    /// system decouples.
    pub fn is_measure_independent(&self) -> bool {
        match &self.kind {
            ModelKind::General { b, sigma, eta } => {
                !b.depends_on_measure()
                    && !sigma.depends_on_measure()
                    && !eta.depends_on_measure()
            }
            ModelKind::AverageForm { b, sigma, eta } => {
                // constant kernels ignore z
                matches!(b, DriftKernel::Constant { .. })
                    && matches!(
                        sigma,
                        MatrixKernel::Zero | MatrixKernel::ScalarIdentity { .. }
                    )
                    && matches!(
                        eta,
                        MatrixKernel::Zero | MatrixKernel::ScalarIdentity { .. }
                    )
            }
        }
    }

    /// Evaluate (b, σ, η)(x, μ) into `out`.  Average-form coefficients are
    /// empirical averages of their kernels; kernels affine in z are reduced
    /// to a single evaluation at the measure mean.
    pub fn evaluate_into(
        &self,
        x: &[f64],
        mu: &MeasureView,
        out: &mut CoefficientTuple,
    ) -> Result<()> {
        if x.len() != self.dim || mu.dim() != self.dim {
            return Err(CoreError::Dim {
                left: x.len(),
                right: self.dim,
            });
        }
        if mu.is_empty() {
            return Err(CoreError::EmptyMeasure);
        }
        match &self.kind {
            ModelKind::General { b, sigma, eta } => {
                b.eval(x, mu, &mut out.drift);
                sigma.eval(x, mu, &mut out.sigma);
                eta.eval(x, mu, &mut out.eta);
            }
            ModelKind::AverageForm { b, sigma, eta } => {
                if b.reduces_to_mean() {
                    b.eval(x, mu.mean(), &mut out.drift);
                } else {
                    average_drift_kernel(b, x, mu, &mut out.drift);
                }
                if sigma.reduces_to_mean() {
                    sigma.eval(x, mu.mean(), &mut out.sigma);
                } else {
                    average_matrix_kernel(sigma, x, mu, &mut out.sigma);
                }
                if eta.reduces_to_mean() {
                    eta.eval(x, mu.mean(), &mut out.eta);
                } else {
                    average_matrix_kernel(eta, x, mu, &mut out.eta);
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64], mu: &MeasureView) -> Result<CoefficientTuple> {
        let mut out = CoefficientTuple::zeros(self.dim);
        self.evaluate_into(x, mu, &mut out)?;
        Ok(out)
    }

    /// Wrap the average-form kernels as general fields (pointwise averaging,
    /// no mean reduction).  Used to check the two evaluation paths agree.
    pub fn general_wrapped(&self) -> Result<MeanFieldModel> {
        let ModelKind::AverageForm { b, sigma, eta } = &self.kind else {
            return Err(CoreError::ModelKind);
        };
        let d = self.dim;
        let bk = b.clone();
        let sk = sigma.clone();
        let ek = eta.clone();
        Ok(MeanFieldModel {
            dim: d,
            kind: ModelKind::General {
                b: DriftField::Custom(Arc::new(move |x, mu| {
                    let mut acc = vec![0.0; d];
                    average_drift_kernel(&bk, x, mu, &mut acc);
                    acc
                })),
                sigma: MatrixField::Custom(Arc::new(move |x, mu| {
                    let mut acc = DMatrix::zeros(d, d);
                    average_matrix_kernel(&sk, x, mu, &mut acc);
                    acc
                })),
                eta: MatrixField::Custom(Arc::new(move |x, mu| {
                    let mut acc = DMatrix::zeros(d, d);
                    average_matrix_kernel(&ek, x, mu, &mut acc);
                    acc
                })),
            },
            base_jump: self.base_jump.clone(),
            lipschitz: self.lipschitz,
            label: format!("{}-general", self.label),
        })
    }
}

fn average_drift_kernel(k: &DriftKernel, x: &[f64], mu: &MeasureView, out: &mut [f64]) {
    let d = out.len();
    out.fill(0.0);
    let mut tmp = vec![0.0; d];
    let mut count = 0usize;
    for z in mu.points() {
        k.eval(x, z, &mut tmp);
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o += t;
        }
        count += 1;
    }
    for o in out.iter_mut() {
        *o /= count as f64;
    }
}

fn average_matrix_kernel(k: &MatrixKernel, x: &[f64], mu: &MeasureView, out: &mut DMatrix<f64>) {
    let d = out.nrows();
    out.fill(0.0);
    let mut tmp = DMatrix::zeros(d, d);
    let mut count = 0usize;
    for z in mu.points() {
        k.eval(x, z, &mut tmp);
        *out += &tmp;
        count += 1;
    }
    *out /= count as f64;
}

/// Spec-level entry point: evaluate the coefficients at a point against a
/// full cloud.
pub fn evaluate_coefficients(
    model: &MeanFieldModel,
    x: &[f64],
    mu: &PointCloud,
) -> Result<CoefficientTuple> {
    model.evaluate(x, &MeasureView::from_cloud(mu))
}

/// A twice-differentiable test function with analytic gradient and Hessian.
pub struct TestFunction {
    pub value: Box<dyn Fn(&[f64]) -> f64>,
    pub gradient: Box<dyn Fn(&[f64]) -> Vec<f64>>,
    pub hessian: Box<dyn Fn(&[f64]) -> DMatrix<f64>>,
}

/// Generator action
/// A(φ; μ)(x) = b·∇φ + ½tr(a D²φ) + Σ λ_k [φ(x+ηz_k) − φ(x) − (ηz_k)·∇φ(x)],
/// with a = σσᵀ and jump atoms from the model's base measure pushed through
/// η(x, μ).
pub fn generator_apply(
    model: &MeanFieldModel,
    phi: &TestFunction,
    x: &[f64],
    mu: &PointCloud,
) -> Result<f64> {
    let coeffs = evaluate_coefficients(model, x, mu)?;
    let grad = (phi.gradient)(x);
    let hess = (phi.hessian)(x);
    let d = model.dim();

    let drift: f64 = coeffs.drift.iter().zip(&grad).map(|(b, g)| b * g).sum();

    let a = &coeffs.sigma * coeffs.sigma.transpose();
    let mut diffusion = 0.0;
    for i in 0..d {
        for j in 0..d {
            diffusion += a[(i, j)] * hess[(j, i)];
        }
    }
    diffusion *= 0.5;

    let mut jump = 0.0;
    if let Some(base) = model.base_jump() {
        let phi_x = (phi.value)(x);
        let mut shifted = vec![0.0; d];
        for atom in base.atoms() {
            let z = nalgebra::DVector::from_row_slice(&atom.z);
            let eta_z = &coeffs.eta * z;
            for i in 0..d {
                shifted[i] = x[i] + eta_z[i];
            }
            let linear: f64 = eta_z.iter().zip(&grad).map(|(e, g)| e * g).sum();
            jump += atom.lambda * ((phi.value)(&shifted) - phi_x - linear);
        }
    }
    Ok(drift + diffusion + jump)
}

/// Σ(x, μ, ν)² = Σ_b² + Σ_σ² + Σ_η², each term the squared componentwise
/// difference of the kernel averages under μ and ν.  Requires an
/// average-form model.
pub fn sigma_functional(
    model: &MeanFieldModel,
    x: &[f64],
    mu: &PointCloud,
    nu: &PointCloud,
) -> Result<f64> {
    sigma_functional_views(
        model,
        x,
        &MeasureView::from_cloud(mu),
        &MeasureView::from_cloud(nu),
    )
}

pub fn sigma_functional_views(
    model: &MeanFieldModel,
    x: &[f64],
    mu: &MeasureView,
    nu: &MeasureView,
) -> Result<f64> {
    let ModelKind::AverageForm { b, sigma, eta } = &model.kind else {
        return Err(CoreError::ModelKind);
    };
    let d = model.dim();
    let mut bd = vec![0.0; d];
    let mut bd2 = vec![0.0; d];
    average_drift_kernel(b, x, mu, &mut bd);
    average_drift_kernel(b, x, nu, &mut bd2);
    let mut total: f64 = bd
        .iter()
        .zip(&bd2)
        .map(|(u, v)| (u - v) * (u - v))
        .sum();

    for kernel in [sigma, eta] {
        let mut ma = DMatrix::zeros(d, d);
        let mut mb = DMatrix::zeros(d, d);
        average_matrix_kernel(kernel, x, mu, &mut ma);
        average_matrix_kernel(kernel, x, nu, &mut mb);
        total += ma
            .iter()
            .zip(mb.iter())
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>();
    }
    Ok(total.sqrt())
}

/// Empirical Lipschitz probe: maximal observed ratios for the coefficient
/// Lipschitz bound.  `beta_hat` maximizes
/// ‖τ(x,μ)−τ(y,μ)‖²_𝒱 / (½|x−y|²) over sampled pairs with a shared measure;
/// `alpha_hat` maximizes ‖τ(x,μ)−τ(x,ν)‖²_𝒱 / W₂(μ,ν)².  The declared
/// parameters are flagged when exceeded by more than 5%.
#[derive(Clone, Debug)]
pub struct LipschitzProbe {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub declared_violated: bool,
}

pub fn lipschitz_probe(
    model: &MeanFieldModel,
    sample_count: usize,
    rng_seed: u64,
) -> Result<LipschitzProbe> {
    let d = model.dim();
    let mut rng = StreamRng::new(rng_seed, StreamDomain::Probe, 0, 0);
    let cloud_size = 8;
    let mut alpha_hat: f64 = 0.0;
    let mut beta_hat: f64 = 0.0;
    let draw_point = |rng: &mut StreamRng| -> Vec<f64> {
        (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * 1.5)
            .collect()
    };
    let draw_cloud = |rng: &mut StreamRng| -> PointCloud {
        let data: Vec<f64> = (0..cloud_size * d)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * 1.5)
            .collect();
        PointCloud::new(d, data).expect("nonempty")
    };

    for _ in 0..sample_count {
        let x = draw_point(&mut rng);
        let y = draw_point(&mut rng);
        let mu = draw_cloud(&mut rng);
        let nu = draw_cloud(&mut rng);
        let mu_view = MeasureView::from_cloud(&mu);
        let nu_view = MeasureView::from_cloud(&nu);

        // shared measure: x-direction ratio
        let tx = model.evaluate(&x, &mu_view)?;
        let ty = model.evaluate(&y, &mu_view)?;
        let dx: f64 = x
            .iter()
            .zip(&y)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>();
        if dx > 1e-12 {
            let num = vnorm_diff(&tx, &ty).powi(2);
            beta_hat = beta_hat.max(num / (0.5 * dx));
        }

        // shared point: measure-direction ratio
        let ta = model.evaluate(&x, &mu_view)?;
        let tb = model.evaluate(&x, &nu_view)?;
        let w2_sq = 2.0 * empirical_c2(&mu, &nu)?;
        if w2_sq > 1e-12 {
            let num = vnorm_diff(&ta, &tb).powi(2);
            alpha_hat = alpha_hat.max(num / w2_sq);
        }
    }

    let declared_violated = model
        .lipschitz
        .map(|lp| alpha_hat > 1.05 * lp.alpha || beta_hat > 1.05 * lp.beta)
        .unwrap_or(false);
    Ok(LipschitzProbe {
        alpha_hat,
        beta_hat,
        declared_violated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpAtom;

    fn attraction_model(kappa: f64, sigma: f64) -> MeanFieldModel {
        MeanFieldModel::new(
            1,
            ModelKind::AverageForm {
                b: DriftKernel::LinearAttraction { kappa },
                sigma: MatrixKernel::ScalarIdentity { value: sigma },
                eta: MatrixKernel::Zero,
            },
            None,
            None,
            "attraction",
        )
        .unwrap()
    }

    #[test]
    fn average_form_symmetric_cloud_zero_drift() {
        let model = attraction_model(1.0, 0.0);
        let mu = PointCloud::from_scalars(&[-1.0, 1.0]).unwrap();
        let c = evaluate_coefficients(&model, &[0.0], &mu).unwrap();
        assert_eq!(c.drift[0], 0.0);
    }

    #[test]
    fn average_form_single_atom() {
        let model = attraction_model(1.0, 0.0);
        let mu = PointCloud::from_scalars(&[3.0]).unwrap();
        let c = evaluate_coefficients(&model, &[1.0], &mu).unwrap();
        assert!((c.drift[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_kernels_ignore_measure() {
        let model = MeanFieldModel::new(
            2,
            ModelKind::AverageForm {
                b: DriftKernel::Constant {
                    value: vec![0.5, -0.5],
                },
                sigma: MatrixKernel::ScalarIdentity { value: 2.0 },
                eta: MatrixKernel::Zero,
            },
            None,
            None,
            "const",
        )
        .unwrap();
        let mu = PointCloud::from_points(&[vec![9.0, 9.0], vec![-3.0, 4.0]]).unwrap();
        let nu = PointCloud::from_points(&[vec![0.0, 0.0]]).unwrap();
        let a = evaluate_coefficients(&model, &[1.0, 1.0], &mu).unwrap();
        let b = evaluate_coefficients(&model, &[1.0, 1.0], &nu).unwrap();
        assert_eq!(a.drift, b.drift);
        assert_eq!(a.sigma, b.sigma);
    }

    #[test]
    fn vnorm_values() {
        let d = 1;
        let mut t = CoefficientTuple::zeros(d);
        assert_eq!(vnorm(&t), 0.0);
        t.drift[0] = 2.0;
        assert!((vnorm(&t) - (2.0_f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn general_wrapped_matches_average_form_exactly() {
        let model = attraction_model(0.7, 0.3);
        let wrapped = model.general_wrapped().unwrap();
        let mu = PointCloud::from_scalars(&[0.3, -1.2, 2.5]).unwrap();
        for x in [[-1.0], [0.0], [2.0]] {
            let a = evaluate_coefficients(&model, &x, &mu).unwrap();
            let b = evaluate_coefficients(&wrapped, &x, &mu).unwrap();
            // both paths must agree exactly for affine kernels:
            // mean reduction vs pointwise averaging
            assert!((a.drift[0] - b.drift[0]).abs() < 1e-12);
            assert_eq!(a.sigma, b.sigma);
        }
    }

    fn quadratic_test_function() -> TestFunction {
        TestFunction {
            value: Box::new(|x| x[0] * x[0]),
            gradient: Box::new(|x| vec![2.0 * x[0]]),
            hessian: Box::new(|_| DMatrix::from_row_slice(1, 1, &[2.0])),
        }
    }

    #[test]
    fn generator_annihilates_constants() {
        let model = attraction_model(1.0, 0.8);
        let phi = TestFunction {
            value: Box::new(|_| 5.0),
            gradient: Box::new(|x| vec![0.0; x.len()]),
            hessian: Box::new(|x| DMatrix::zeros(x.len(), x.len())),
        };
        let mu = PointCloud::from_scalars(&[1.0, 2.0]).unwrap();
        let v = generator_apply(&model, &phi, &[0.7], &mu).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn generator_first_order_term() {
        // φ(x) = x, drift-only b(x,μ) = −x at x = 2 gives −2
        let model = MeanFieldModel::new(
            1,
            ModelKind::General {
                b: DriftField::Restoring { kappa: 1.0 },
                sigma: MatrixField::Zero,
                eta: MatrixField::Zero,
            },
            None,
            None,
            "ou",
        )
        .unwrap();
        let phi = TestFunction {
            value: Box::new(|x| x[0]),
            gradient: Box::new(|_| vec![1.0]),
            hessian: Box::new(|_| DMatrix::zeros(1, 1)),
        };
        let mu = PointCloud::from_scalars(&[0.0]).unwrap();
        let v = generator_apply(&model, &phi, &[2.0], &mu).unwrap();
        assert!((v + 2.0).abs() < 1e-15);
    }

    #[test]
    fn generator_second_order_term() {
        // φ(x) = x², b = 0, σ = s: ½·s²·2 = s²
        let s = 1.3;
        let model = MeanFieldModel::new(
            1,
            ModelKind::General {
                b: DriftField::Constant { value: vec![0.0] },
                sigma: MatrixField::ScalarIdentity { value: s },
                eta: MatrixField::Zero,
            },
            None,
            None,
            "diffusion",
        )
        .unwrap();
        let mu = PointCloud::from_scalars(&[0.0]).unwrap();
        let v = generator_apply(&model, &quadratic_test_function(), &[0.5], &mu).unwrap();
        assert!((v - s * s).abs() < 1e-15);
    }

    #[test]
    fn generator_jump_term() {
        // φ(x) = x², b = σ = 0, one atom (z, λ), η const:
        // λ[(x+ηz)² − x² − 2x·ηz] = λ(ηz)²
        let base = DiscreteLevyMeasure::new(vec![JumpAtom {
            z: vec![2.0],
            lambda: 0.7,
        }])
        .unwrap();
        let eta = 0.4;
        let model = MeanFieldModel::new(
            1,
            ModelKind::General {
                b: DriftField::Constant { value: vec![0.0] },
                sigma: MatrixField::Zero,
                eta: MatrixField::ScalarIdentity { value: eta },
            },
            Some(base),
            None,
            "jumpy",
        )
        .unwrap();
        let mu = PointCloud::from_scalars(&[0.0]).unwrap();
        let v = generator_apply(&model, &quadratic_test_function(), &[1.1], &mu).unwrap();
        let expect = 0.7 * (eta * 2.0) * (eta * 2.0);
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn generator_linearity_in_phi() {
        let model = attraction_model(0.9, 0.4);
        let mu = PointCloud::from_scalars(&[0.5, -0.5, 1.5]).unwrap();
        let x = [0.3];
        let phi = TestFunction {
            value: Box::new(|x| x[0].powi(3)),
            gradient: Box::new(|x| vec![3.0 * x[0] * x[0]]),
            hessian: Box::new(|x| DMatrix::from_row_slice(1, 1, &[6.0 * x[0]])),
        };
        let psi = quadratic_test_function();
        let (a, b) = (2.5, -1.5);
        let combo = TestFunction {
            value: Box::new(move |x| a * x[0].powi(3) + b * x[0] * x[0]),
            gradient: Box::new(move |x| vec![a * 3.0 * x[0] * x[0] + b * 2.0 * x[0]]),
            hessian: Box::new(move |x| {
                DMatrix::from_row_slice(1, 1, &[a * 6.0 * x[0] + b * 2.0])
            }),
        };
        let va = generator_apply(&model, &phi, &x, &mu).unwrap();
        let vb = generator_apply(&model, &psi, &x, &mu).unwrap();
        let vc = generator_apply(&model, &combo, &x, &mu).unwrap();
        assert!((vc - (a * va + b * vb)).abs() < 1e-10);
    }

    #[test]
    fn sigma_functional_values() {
        let model = MeanFieldModel::new(
            1,
            ModelKind::AverageForm {
                b: DriftKernel::Custom(Arc::new(|_x, z| vec![z[0]])),
                sigma: MatrixKernel::Zero,
                eta: MatrixKernel::Zero,
            },
            None,
            None,
            "identity-kernel",
        )
        .unwrap();
        let mu = PointCloud::from_scalars(&[0.0]).unwrap();
        let nu = PointCloud::from_scalars(&[1.0]).unwrap();
        let s = sigma_functional(&model, &[0.0], &mu, &nu).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
        let same = sigma_functional(&model, &[0.0], &mu, &mu).unwrap();
        assert_eq!(same, 0.0);
    }

    #[test]
    fn sigma_functional_rejects_general_models() {
        let model = MeanFieldModel::new(
            1,
            ModelKind::General {
                b: DriftField::Restoring { kappa: 1.0 },
                sigma: MatrixField::Zero,
                eta: MatrixField::Zero,
            },
            None,
            None,
            "general",
        )
        .unwrap();
        let mu = PointCloud::from_scalars(&[0.0]).unwrap();
        assert!(matches!(
            sigma_functional(&model, &[0.0], &mu, &mu),
            Err(CoreError::ModelKind)
        ));
    }

    #[test]
    fn sigma_functional_bounded_by_w2() {
        // 1-Lipschitz kernel: Σ ≤ √1·W₂
        let model = MeanFieldModel::new(
            1,
            ModelKind::AverageForm {
                b: DriftKernel::LinearAttraction { kappa: 1.0 },
                sigma: MatrixKernel::Zero,
                eta: MatrixKernel::Zero,
            },
            None,
            None,
            "lip",
        )
        .unwrap();
        let mut rng = StreamRng::new(21, StreamDomain::Generic, 11, 0);
        for _ in 0..25 {
            let mu = PointCloud::from_scalars(
                &(0..6).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect::<Vec<_>>(),
            )
            .unwrap();
            let nu = PointCloud::from_scalars(
                &(0..6).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect::<Vec<_>>(),
            )
            .unwrap();
            let s = sigma_functional(&model, &[0.2], &mu, &nu).unwrap();
            let w2 = (2.0 * empirical_c2(&mu, &nu).unwrap()).sqrt();
            // kernel difference in 𝒱... the plain componentwise bound
            assert!(s <= w2 + 1e-10, "sigma {s} vs w2 {w2}");
        }
    }

    #[test]
    fn sigma_functional_pseudometric_properties() {
        let model = attraction_model(1.0, 0.0);
        let mut rng = StreamRng::new(22, StreamDomain::Generic, 12, 0);
        for _ in 0..20 {
            let cloud = |rng: &mut StreamRng| {
                PointCloud::from_scalars(
                    &(0..5).map(|_| rng.random::<f64>() * 2.0).collect::<Vec<_>>(),
                )
                .unwrap()
            };
            let (mu, nu, rho) = (cloud(&mut rng), cloud(&mut rng), cloud(&mut rng));
            let x = [0.0];
            let ab = sigma_functional(&model, &x, &mu, &nu).unwrap();
            let ba = sigma_functional(&model, &x, &nu, &mu).unwrap();
            let ac = sigma_functional(&model, &x, &mu, &rho).unwrap();
            let cb = sigma_functional(&model, &x, &rho, &nu).unwrap();
            assert!((ab - ba).abs() < 1e-12);
            assert!(ab <= ac + cb + 1e-12);
        }
    }

    #[test]
    fn sigma_functional_x_lipschitz() {
        // the attraction kernel's x-dependence cancels in the difference of
        // averages, so Σ does not depend on x at all
        let model = attraction_model(1.0, 0.0);
        let mu = PointCloud::from_scalars(&[0.0, 1.0]).unwrap();
        let nu = PointCloud::from_scalars(&[2.0, -1.0]).unwrap();
        let s0 = sigma_functional(&model, &[0.0], &mu, &nu).unwrap();
        let s1 = sigma_functional(&model, &[5.0], &mu, &nu).unwrap();
        assert!((s0 - s1).abs() < 1e-12);
    }

    #[test]
    fn sigma_functional_x_lipschitz_for_x_dependent_kernel() {
        // b̃(x,z) = sin(x)·z gives Σ(x,μ,ν) = |sin x|·|mean(μ) − mean(ν)|,
        // which is x-Lipschitz with constant |Δmean| (≤ the kernel's
        // z-uniform x-Lipschitz constant)
        let model = MeanFieldModel::new(
            1,
            ModelKind::AverageForm {
                b: DriftKernel::Custom(Arc::new(|x: &[f64], z: &[f64]| {
                    vec![x[0].sin() * z[0]]
                })),
                sigma: MatrixKernel::Zero,
                eta: MatrixKernel::Zero,
            },
            None,
            None,
            "modulated",
        )
        .unwrap();
        let mu = PointCloud::from_scalars(&[0.4, 1.2]).unwrap();
        let nu = PointCloud::from_scalars(&[-0.6, 0.2]).unwrap();
        let dmean = (mu.mean()[0] - nu.mean()[0]).abs();
        let mut rng = StreamRng::new(5, StreamDomain::Generic, 13, 0);
        for _ in 0..40 {
            let x = [rng.random::<f64>() * 6.0 - 3.0];
            let y = [rng.random::<f64>() * 6.0 - 3.0];
            let sx = sigma_functional(&model, &x, &mu, &nu).unwrap();
            let sy = sigma_functional(&model, &y, &mu, &nu).unwrap();
            assert!(
                (sx - sy).abs() <= dmean * (x[0] - y[0]).abs() + 1e-12,
                "Σ({:.2}) = {sx}, Σ({:.2}) = {sy}",
                x[0],
                y[0]
            );
        }
    }

    #[test]
    fn probe_constant_model_is_flat() {
        let model = MeanFieldModel::new(
            1,
            ModelKind::AverageForm {
                b: DriftKernel::Constant { value: vec![0.4] },
                sigma: MatrixKernel::ScalarIdentity { value: 0.2 },
                eta: MatrixKernel::Zero,
            },
            None,
            None,
            "const",
        )
        .unwrap();
        let probe = lipschitz_probe(&model, 50, 3).unwrap();
        assert_eq!(probe.alpha_hat, 0.0);
        assert_eq!(probe.beta_hat, 0.0);
    }

    #[test]
    fn probe_linear_restoring_drift() {
        // b(x,μ) = −x: ‖τ(x)−τ(y)‖²_𝒱 = ½|x−y|², so the β ratio is exactly 1
        // and the measure ratio is 0.
        let model = MeanFieldModel::new(
            1,
            ModelKind::General {
                b: DriftField::Restoring { kappa: 1.0 },
                sigma: MatrixField::Zero,
                eta: MatrixField::Zero,
            },
            None,
            Some(LipschitzParams {
                alpha: 0.0,
                beta: 1.0,
                m: 0.0,
                m_prime: 0.0,
            }),
            "ou",
        )
        .unwrap();
        let probe = lipschitz_probe(&model, 80, 5).unwrap();
        assert!((probe.beta_hat - 1.0).abs() < 1e-9, "beta {}", probe.beta_hat);
        assert!(probe.alpha_hat < 1e-12);
        assert!(!probe.declared_violated);
    }

    #[test]
    fn probe_average_form_lipschitz_kernels_within_declaration() {
        let model = MeanFieldModel::new(
            1,
            ModelKind::AverageForm {
                b: DriftKernel::LinearAttraction { kappa: 1.0 },
                sigma: MatrixKernel::ScalarIdentity { value: 0.5 },
                eta: MatrixKernel::Zero,
            },
            None,
            Some(LipschitzParams {
                alpha: 1.0,
                beta: 1.0,
                m: 1.0,
                m_prime: 1.5,
            }),
            "attraction",
        )
        .unwrap();
        let probe = lipschitz_probe(&model, 100, 7).unwrap();
        assert!(!probe.declared_violated, "{probe:?}");
    }
}
