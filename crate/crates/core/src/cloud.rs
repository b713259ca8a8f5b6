//! Empirical measures on ℝ^d represented as point clouds.

use crate::error::{CoreError, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::io::{BufRead, Write};

/// An empirical probability measure: M points in ℝ^d with uniform weight 1/M.
///
/// Stored row-major (`data[i*dim..(i+1)*dim]` is point `i`).
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    data: Vec<f64>,
}

impl PointCloud {
    /// Build a cloud from row-major coordinates.  Requires at least one point
    /// and finite entries.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(CoreError::param("dim", "must be positive"));
        }
        if data.is_empty() || data.len() % dim != 0 {
            return Err(CoreError::Size {
                left: data.len(),
                right: dim,
                context: "cloud data length vs dim",
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(CoreError::param("points", "non-finite coordinate"));
        }
        Ok(PointCloud { dim, data })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        if points.iter().any(|p| p.len() != dim) {
            return Err(CoreError::param("points", "ragged point list"));
        }
        PointCloud::new(dim, points.concat())
    }

    /// One-dimensional helper.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        PointCloud::new(1, xs.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points M.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: M >= 1
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + Clone {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> Vec<f64> {
        let m = self.len() as f64;
        let mut out = vec![0.0; self.dim];
        for p in self.points() {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        for o in &mut out {
            *o /= m;
        }
        out
    }

    /// Total variance: (1/M) Σ |x_i − mean|².
    pub fn total_variance(&self) -> f64 {
        let mean = self.mean();
        let m = self.len() as f64;
        self.points()
            .map(|p| {
                p.iter()
                    .zip(&mean)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / m
    }

    pub fn translated(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(CoreError::Dim {
                left: v.len(),
                right: self.dim,
            });
        }
        let mut data = self.data.clone();
        for p in data.chunks_exact_mut(self.dim) {
            for (c, s) in p.iter_mut().zip(v) {
                *c += s;
            }
        }
        PointCloud::new(self.dim, data)
    }

    /// CSV with header `x0,..,x{d-1}`, one point per row.  Floats are written
    /// in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (0..self.dim).map(|j| format!("x{j}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV is valid UTF-8")
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| CoreError::Parse("empty CSV".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        let dim = cols.len();
        for (j, c) in cols.iter().enumerate() {
            if c.trim() != format!("x{j}") {
                return Err(CoreError::Parse(format!(
                    "unexpected CSV header column `{c}` (expected `x{j}`)"
                )));
            }
        }
        let mut data = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim {
                return Err(CoreError::Parse(format!(
                    "row has {} fields, expected {dim}",
                    fields.len()
                )));
            }
            for f in fields {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|e| CoreError::Parse(format!("bad float `{f}`: {e}")))?;
                data.push(v);
            }
        }
        PointCloud::new(dim, data)
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        Self::read_csv(s.as_bytes())
    }
}

// Clouds serialize as plain JSON arrays of points.
impl Serialize for PointCloud {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = self.points().collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PointCloud {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(deserializer)?;
        PointCloud::from_points(&rows).map_err(D::Error::custom)
    }
}

/// Weight-sum slack tolerated by [`WeightedCloud`].
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A general discrete probability measure: atoms with positive weights that
/// sum to 1 (within `WEIGHT_SUM_TOL`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedCloud {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedCloud {
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(CoreError::param("dim", "must be positive"));
        }
        if points.len() != weights.len() * dim {
            return Err(CoreError::Size {
                left: points.len(),
                right: weights.len() * dim,
                context: "weighted cloud points vs weights",
            });
        }
        if weights.is_empty() {
            return Err(CoreError::EmptyMeasure);
        }
        if !weights.iter().all(|w| w.is_finite() && *w > 0.0) {
            return Err(CoreError::param("weights", "weights must be positive"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(CoreError::param(
                "weights",
                format!("weights sum to {sum}, expected 1"),
            ));
        }
        if !points.iter().all(|v| v.is_finite()) {
            return Err(CoreError::param("points", "non-finite coordinate"));
        }
        Ok(WeightedCloud {
            dim,
            points,
            weights,
        })
    }

    /// Uniform weights over the points of a cloud.
    pub fn uniform(cloud: &PointCloud) -> Self {
        let m = cloud.len();
        // Exact-sum construction: the last weight absorbs rounding.
        let w = 1.0 / m as f64;
        let mut weights = vec![w; m];
        let sum: f64 = weights.iter().sum();
        weights[m - 1] += 1.0 - sum;
        WeightedCloud {
            dim: cloud.dim(),
            points: cloud.as_slice().to_vec(),
            weights,
        }
    }

    /// Single atom of mass 1.
    pub fn dirac(point: &[f64]) -> Result<Self> {
        WeightedCloud::new(point.len(), point.to_vec(), vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for i in 0..self.len() {
            for (o, v) in out.iter_mut().zip(self.point(i)) {
                *o += self.weights[i] * v;
            }
        }
        out
    }
}

/// Squared-distance cost ½|x−y|² used throughout.
#[inline]
pub fn half_sq_dist(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    0.5 * x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
}
