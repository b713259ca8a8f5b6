//! Finite-activity Lévy measures and Lévy triplets in global form.

use crate::error::{CoreError, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// One atom of a discrete Lévy measure: jump vector `z` with intensity
/// `lambda`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpAtom {
    pub z: Vec<f64>,
    pub lambda: f64,
}

/// A finite-atom Lévy measure with finite second moment.  No atom may sit at
/// the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiscreteLevyMeasureRepr", into = "DiscreteLevyMeasureRepr")]
pub struct DiscreteLevyMeasure {
    dim: usize,
    atoms: Vec<JumpAtom>,
}

#[derive(Serialize, Deserialize)]
struct DiscreteLevyMeasureRepr {
    atoms: Vec<JumpAtom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

impl From<DiscreteLevyMeasure> for DiscreteLevyMeasureRepr {
    fn from(m: DiscreteLevyMeasure) -> Self {
        DiscreteLevyMeasureRepr {
            dim: if m.atoms.is_empty() { Some(m.dim) } else { None },
            atoms: m.atoms,
        }
    }
}

impl TryFrom<DiscreteLevyMeasureRepr> for DiscreteLevyMeasure {
    type Error = CoreError;
    fn try_from(r: DiscreteLevyMeasureRepr) -> Result<Self> {
        match (r.atoms.is_empty(), r.dim) {
            (true, Some(d)) => DiscreteLevyMeasure::empty(d),
            (true, None) => Err(CoreError::param(
                "atoms",
                "empty measure needs an explicit dim",
            )),
            (false, d) => {
                let m = DiscreteLevyMeasure::new(r.atoms)?;
                if let Some(d) = d {
                    if d != m.dim {
                        return Err(CoreError::Dim {
                            left: d,
                            right: m.dim,
                        });
                    }
                }
                Ok(m)
            }
        }
    }
}

impl DiscreteLevyMeasure {
    pub fn new(atoms: Vec<JumpAtom>) -> Result<Self> {
        let dim = atoms
            .first()
            .map(|a| a.z.len())
            .ok_or_else(|| CoreError::param("atoms", "use `empty(dim)` for the zero measure"))?;
        for a in &atoms {
            if a.z.len() != dim {
                return Err(CoreError::Dim {
                    left: a.z.len(),
                    right: dim,
                });
            }
            if !a.z.iter().all(|v| v.is_finite()) || !a.lambda.is_finite() {
                return Err(CoreError::param("atoms", "non-finite atom"));
            }
            if a.lambda <= 0.0 {
                return Err(CoreError::param("lambda", "intensities must be positive"));
            }
            if a.z.iter().map(|v| v * v).sum::<f64>() == 0.0 {
                return Err(CoreError::param("z", "atom at the origin is not allowed"));
            }
        }
        Ok(DiscreteLevyMeasure { dim, atoms })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(CoreError::param("dim", "must be positive"));
        }
        Ok(DiscreteLevyMeasure { dim, atoms: vec![] })
    }

    pub fn one_atom(z: Vec<f64>, lambda: f64) -> Result<Self> {
        DiscreteLevyMeasure::new(vec![JumpAtom { z, lambda }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[JumpAtom] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total intensity Σ λ_k.
    pub fn total_intensity(&self) -> f64 {
        self.atoms.iter().map(|a| a.lambda).sum()
    }

    /// First moment Σ λ_k z_k (the global-form compensator rate).
    pub fn first_moment(&self) -> Vec<f64> {
        let mut m1 = vec![0.0; self.dim];
        for a in &self.atoms {
            for (o, z) in m1.iter_mut().zip(&a.z) {
                *o += a.lambda * z;
            }
        }
        m1
    }

    /// Second moment Σ λ_k |z_k|².
    pub fn second_moment(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.lambda * a.z.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    /// Covariance rate Σ λ_k z_k z_kᵀ.
    pub fn covariance_rate(&self) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.dim, self.dim);
        for a in &self.atoms {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    c[(i, j)] += a.lambda * a.z[i] * a.z[j];
                }
            }
        }
        c
    }
}

/// Jump part of a Lévy triplet: the Lévy measure is the pushforward η♯Ω of a
/// finite-atom base measure Ω by the matrix η.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpPart {
    pub eta: DMatrix<f64>,
    pub base: DiscreteLevyMeasure,
}

/// A Lévy triplet (b, σ, jump) in the global untruncated form; the diffusion
/// matrix is a = σσᵀ.
#[derive(Clone, Debug, PartialEq)]
pub struct LevyTriplet {
    pub dim: usize,
    pub drift: Vec<f64>,
    pub sigma: DMatrix<f64>,
    pub jump: Option<JumpPart>,
}

impl LevyTriplet {
    pub fn new(
        drift: Vec<f64>,
        sigma: DMatrix<f64>,
        jump: Option<JumpPart>,
    ) -> Result<Self> {
        let dim = drift.len();
        if dim == 0 {
            return Err(CoreError::param("drift", "dimension must be positive"));
        }
        if sigma.nrows() != dim || sigma.ncols() != dim {
            return Err(CoreError::Dim {
                left: sigma.nrows(),
                right: dim,
            });
        }
        if let Some(j) = &jump {
            if j.eta.nrows() != dim || j.eta.ncols() != dim || j.base.dim() != dim {
                return Err(CoreError::Dim {
                    left: j.base.dim(),
                    right: dim,
                });
            }
        }
        Ok(LevyTriplet {
            dim,
            drift,
            sigma,
            jump,
        })
    }

    pub fn pure_drift(drift: Vec<f64>) -> Result<Self> {
        let d = drift.len();
        LevyTriplet::new(drift, DMatrix::zeros(d, d), None)
    }

    pub fn pure_diffusion(sigma: DMatrix<f64>) -> Result<Self> {
        let d = sigma.nrows();
        LevyTriplet::new(vec![0.0; d], sigma, None)
    }

    pub fn pure_jump(eta: DMatrix<f64>, base: DiscreteLevyMeasure) -> Result<Self> {
        let d = base.dim();
        LevyTriplet::new(
            vec![0.0; d],
            DMatrix::zeros(d, d),
            Some(JumpPart { eta, base }),
        )
    }

    /// Diffusion matrix a = σσᵀ.
    pub fn diffusion(&self) -> DMatrix<f64> {
        &self.sigma * self.sigma.transpose()
    }

    pub fn has_diffusion(&self) -> bool {
        self.sigma.iter().any(|v| *v != 0.0)
    }

    pub fn has_jump(&self) -> bool {
        self.jump.as_ref().is_some_and(|j| !j.base.is_zero())
    }

    pub fn has_drift(&self) -> bool {
        self.drift.iter().any(|v| *v != 0.0)
    }
}

/// Wire format for triplets (matrices as row-major flat arrays).
#[derive(Serialize, Deserialize)]
pub struct LevyTripletRepr {
    pub dim: usize,
    pub b: Vec<f64>,
    pub sigma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump: Option<JumpRepr>,
}

#[derive(Serialize, Deserialize)]
pub struct JumpRepr {
    pub eta: Vec<f64>,
    pub base: DiscreteLevyMeasure,
}

impl LevyTriplet {
    pub fn to_repr(&self) -> LevyTripletRepr {
        LevyTripletRepr {
            dim: self.dim,
            b: self.drift.clone(),
            sigma: row_major(&self.sigma),
            jump: self.jump.as_ref().map(|j| JumpRepr {
                eta: row_major(&j.eta),
                base: j.base.clone(),
            }),
        }
    }

    pub fn from_repr(r: LevyTripletRepr) -> Result<Self> {
        let d = r.dim;
        if r.b.len() != d {
            return Err(CoreError::Dim {
                left: r.b.len(),
                right: d,
            });
        }
        let sigma = matrix_from_row_major(d, &r.sigma)?;
        let jump = match r.jump {
            None => None,
            Some(j) => Some(JumpPart {
                eta: matrix_from_row_major(d, &j.eta)?,
                base: j.base,
            }),
        };
        LevyTriplet::new(r.b, sigma, jump)
    }
}

pub fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
        .collect()
}

pub fn matrix_from_row_major(dim: usize, rows: &[f64]) -> Result<DMatrix<f64>> {
    if rows.len() != dim * dim {
        return Err(CoreError::Size {
            left: rows.len(),
            right: dim * dim,
            context: "matrix data length",
        });
    }
    Ok(DMatrix::from_row_slice(dim, dim, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_origin_atom() {
        assert!(DiscreteLevyMeasure::one_atom(vec![0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn moments() {
        let m = DiscreteLevyMeasure::new(vec![
            JumpAtom {
                z: vec![1.0],
                lambda: 2.0,
            },
            JumpAtom {
                z: vec![-2.0],
                lambda: 0.5,
            },
        ])
        .unwrap();
        assert!((m.total_intensity() - 2.5).abs() < 1e-15);
        assert!((m.first_moment()[0] - 1.0).abs() < 1e-15);
        assert!((m.second_moment() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn measure_json_shape() {
        let m = DiscreteLevyMeasure::one_atom(vec![2.0], 3.0).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"atoms":[{"z":[2.0],"lambda":3.0}]}"#);
        let back: DiscreteLevyMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
    }
}
