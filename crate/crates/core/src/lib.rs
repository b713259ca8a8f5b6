//! Numerical laboratory for mean-field particle systems on (ℝ^d, ½|x−y|²):
//! optimal-transport metrics between empirical measures, Lévy-type
//! mean-field generators, cloud-based solvers for the mean-field evolution,
//! interacting-particle simulation under synchronous coupling, and
//! quantitative propagation-of-chaos verification.

pub mod chaos;
pub mod cloud;
pub mod error;
pub mod levy;
pub mod model;
pub mod model_file;
pub mod ot;
pub mod rng;
pub mod sim;
pub mod solver;
pub mod spd;

pub use cloud::{PointCloud, WeightedCloud};
pub use error::{CoreError, Result};
pub use levy::{DiscreteLevyMeasure, JumpAtom, JumpPart, LevyTriplet};
pub use model::{
    evaluate_coefficients, generator_apply, lipschitz_probe, sigma_functional, vnorm,
    CoefficientTuple, LipschitzParams, MeanFieldModel, MeasureView, ModelKind, TestFunction,
};
pub use solver::{zeta, MeasureCurve, SolverConfig};
pub use spd::SpdMatrix;
