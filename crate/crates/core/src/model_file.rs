//! Model definition files (TOML or JSON): a named-coefficient description of
//! a mean-field model with an inline base jump measure.

use crate::error::{CoreError, Result};
use crate::levy::DiscreteLevyMeasure;
use crate::model::{
    DriftField, DriftKernel, LipschitzParams, MatrixField, MatrixKernel, MeanFieldModel,
    ModelKind,
};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    /// "general" or "average_form"
    pub kind: String,
    #[serde(default)]
    pub label: Option<String>,
    pub drift: CoeffSpec,
    #[serde(default)]
    pub sigma: Option<CoeffSpec>,
    #[serde(default)]
    pub eta: Option<CoeffSpec>,
    #[serde(default)]
    pub jump: Option<DiscreteLevyMeasure>,
    #[serde(default)]
    pub lipschitz: Option<LipschitzParams>,
}

/// One coefficient slot, selected by name from the built-in library.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSpec {
    pub name: String,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub vector: Option<Vec<f64>>,
    #[serde(default)]
    pub base: Option<f64>,
    #[serde(default)]
    pub slope: Option<f64>,
}

impl CoeffSpec {
    fn require(&self, field: &'static str, v: Option<f64>) -> Result<f64> {
        v.ok_or_else(|| {
            CoreError::param(
                field,
                format!("coefficient `{}` needs `{field}`", self.name),
            )
        })
    }
}

fn drift_kernel(spec: &CoeffSpec, dim: usize) -> Result<DriftKernel> {
    match spec.name.as_str() {
        "linear_attraction" => Ok(DriftKernel::LinearAttraction {
            kappa: spec.require("kappa", spec.kappa)?,
        }),
        "constant" => {
            let v = spec
                .vector
                .clone()
                .or_else(|| spec.value.map(|s| vec![s; dim]))
                .ok_or_else(|| CoreError::param("vector", "constant drift needs a vector"))?;
            if v.len() != dim {
                return Err(CoreError::Dim {
                    left: v.len(),
                    right: dim,
                });
            }
            Ok(DriftKernel::Constant { value: v })
        }
        "scaled_restoring" => Ok(DriftKernel::ScaledRestoring {
            base: spec.require("base", spec.base)?,
            slope: spec.require("slope", spec.slope)?,
        }),
        other => Err(CoreError::param(
            "drift",
            format!("unknown average-form drift kernel `{other}`"),
        )),
    }
}

fn matrix_kernel(spec: &CoeffSpec) -> Result<MatrixKernel> {
    match spec.name.as_str() {
        "zero" | "none" => Ok(MatrixKernel::Zero),
        "constant" | "constant_sigma" => Ok(MatrixKernel::ScalarIdentity {
            value: spec.require("value", spec.value)?,
        }),
        "linear" | "linear_eta" => Ok(MatrixKernel::LinearIsotropic {
            base: spec.require("base", spec.base)?,
            slope: spec.require("slope", spec.slope)?,
        }),
        other => Err(CoreError::param(
            "sigma",
            format!("unknown matrix kernel `{other}`"),
        )),
    }
}

fn drift_field(spec: &CoeffSpec, dim: usize) -> Result<DriftField> {
    match spec.name.as_str() {
        "restoring" => Ok(DriftField::Restoring {
            kappa: spec.require("kappa", spec.kappa)?,
        }),
        "mean_attraction" => Ok(DriftField::MeanAttraction {
            kappa: spec.require("kappa", spec.kappa)?,
        }),
        "constant" => {
            let v = spec
                .vector
                .clone()
                .or_else(|| spec.value.map(|s| vec![s; dim]))
                .ok_or_else(|| CoreError::param("vector", "constant drift needs a vector"))?;
            if v.len() != dim {
                return Err(CoreError::Dim {
                    left: v.len(),
                    right: dim,
                });
            }
            Ok(DriftField::Constant { value: v })
        }
        other => Err(CoreError::param(
            "drift",
            format!("unknown general drift field `{other}`"),
        )),
    }
}

fn matrix_field(spec: &CoeffSpec) -> Result<MatrixField> {
    match spec.name.as_str() {
        "zero" | "none" => Ok(MatrixField::Zero),
        "constant" | "constant_sigma" => Ok(MatrixField::ScalarIdentity {
            value: spec.require("value", spec.value)?,
        }),
        other => Err(CoreError::param(
            "sigma",
            format!("unknown general matrix field `{other}`"),
        )),
    }
}

impl ModelFile {
    pub fn build(&self) -> Result<MeanFieldModel> {
        let dim = self.dim;
        let label = self
            .label
            .clone()
            .unwrap_or_else(|| format!("{}-{}", self.kind, self.drift.name));
        let kind = match self.kind.as_str() {
            "average_form" => ModelKind::AverageForm {
                b: drift_kernel(&self.drift, dim)?,
                sigma: self
                    .sigma
                    .as_ref()
                    .map(matrix_kernel)
                    .transpose()?
                    .unwrap_or(MatrixKernel::Zero),
                eta: self
                    .eta
                    .as_ref()
                    .map(matrix_kernel)
                    .transpose()?
                    .unwrap_or(MatrixKernel::Zero),
            },
            "general" => ModelKind::General {
                b: drift_field(&self.drift, dim)?,
                sigma: self
                    .sigma
                    .as_ref()
                    .map(matrix_field)
                    .transpose()?
                    .unwrap_or(MatrixField::Zero),
                eta: self
                    .eta
                    .as_ref()
                    .map(matrix_field)
                    .transpose()?
                    .unwrap_or(MatrixField::Zero),
            },
            other => {
                return Err(CoreError::param(
                    "kind",
                    format!("expected `general` or `average_form`, got `{other}`"),
                ))
            }
        };
        MeanFieldModel::new(dim, kind, self.jump.clone(), self.lipschitz, label)
    }
}

pub fn parse_model_toml(text: &str) -> Result<MeanFieldModel> {
    let file: ModelFile =
        toml::from_str(text).map_err(|e| CoreError::Parse(format!("model file: {e}")))?;
    file.build()
}

pub fn parse_model_json(text: &str) -> Result<MeanFieldModel> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| CoreError::Parse(format!("model file: {e}")))?;
    file.build()
}

/// Load a model definition, dispatching on the file extension.
pub fn load_model_file(path: &Path) -> Result<MeanFieldModel> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => parse_model_json(&text),
        _ => parse_model_toml(&text),
    }
}
