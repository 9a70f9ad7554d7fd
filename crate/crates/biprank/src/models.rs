//! Parameterized scoring-function classes with score and parameter-gradient
//! evaluation.
//!
//! Both classes are linear in their parameters: a linear scorer is
//! `s(z) = <theta, z>`, and the quadratic scale scorer is `s(z) = <z, M z>`
//! with `M` symmetric and stored packed (upper triangle, row major). In the
//! packed parameterization the score is `<params, param_gradient(z)>`, which
//! the optimizer exploits.

use crate::error::{Error, Result};

/// Two labeled feature matrices sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSample {
    positives: Vec<Vec<f64>>,
    negatives: Vec<Vec<f64>>,
    dim: usize,
}

impl FeatureSample {
    pub fn new(positives: Vec<Vec<f64>>, negatives: Vec<Vec<f64>>) -> Result<Self> {
        if positives.is_empty() || negatives.is_empty() {
            return Err(Error::InvalidInput(
                "both feature samples must be nonempty".into(),
            ));
        }
        let dim = positives[0].len();
        if dim == 0 {
            return Err(Error::InvalidInput("feature dimension must be >= 1".into()));
        }
        for row in positives.iter().chain(negatives.iter()) {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("features must be finite".into()));
            }
        }
        Ok(Self {
            positives,
            negatives,
            dim,
        })
    }

    pub fn positives(&self) -> &[Vec<f64>] {
        &self.positives
    }

    pub fn negatives(&self) -> &[Vec<f64>] {
        &self.negatives
    }

    pub fn n(&self) -> usize {
        self.positives.len()
    }

    pub fn m(&self) -> usize {
        self.negatives.len()
    }

    pub fn pooled_size(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All feature rows, positives first.
    pub fn pooled_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.positives
            .iter()
            .chain(self.negatives.iter())
            .map(Vec::as_slice)
    }
}

/// Which scoring-function class to optimize over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Linear,
    QuadraticScale,
}

impl ModelKind {
    /// Dimension of the packed parameter vector for feature dimension `d`.
    pub fn param_dim(self, d: usize) -> usize {
        match self {
            ModelKind::Linear => d,
            ModelKind::QuadraticScale => d * (d + 1) / 2,
        }
    }

    /// Parses the CLI model spec strings.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(ModelKind::Linear),
            "quadscale" => Ok(ModelKind::QuadraticScale),
            other => Err(Error::InvalidInput(format!(
                "unknown scorer kind `{other}` (expected `linear` or `quadscale`)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::QuadraticScale => "quadscale",
        }
    }
}

/// A concrete scoring function `s_theta`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoringModel {
    /// `s(z) = <theta, z>`.
    Linear { theta: Vec<f64> },
    /// `s(z) = <z, M z>` with `M` symmetric, stored packed: upper triangle in
    /// row-major order `(M11, M12, .., M1d, M22, ..)`.
    QuadraticScale { packed: Vec<f64>, dim: usize },
}

impl ScoringModel {
    pub fn linear(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidInput("theta must be nonempty".into()));
        }
        Ok(ScoringModel::Linear { theta })
    }

    /// Builds the scale scorer from a full matrix, symmetrizing it first so
    /// `|M - M^T| = 0` holds by construction.
    #[allow(clippy::needless_range_loop)]
    pub fn quadratic_scale(matrix: &[Vec<f64>]) -> Result<Self> {
        let d = matrix.len();
        if d == 0 || matrix.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidInput("matrix must be square".into()));
        }
        let mut packed = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in i..d {
                packed.push(0.5 * (matrix[i][j] + matrix[j][i]));
            }
        }
        Ok(ScoringModel::QuadraticScale { packed, dim: d })
    }

    /// Reassembles a model from its packed parameter vector.
    pub fn from_params(kind: ModelKind, dim: usize, params: &[f64]) -> Result<Self> {
        let expected = kind.param_dim(dim);
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: params.len(),
            });
        }
        Ok(match kind {
            ModelKind::Linear => ScoringModel::Linear {
                theta: params.to_vec(),
            },
            ModelKind::QuadraticScale => ScoringModel::QuadraticScale {
                packed: params.to_vec(),
                dim,
            },
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ScoringModel::Linear { .. } => ModelKind::Linear,
            ScoringModel::QuadraticScale { .. } => ModelKind::QuadraticScale,
        }
    }

    /// Feature dimension the model expects.
    pub fn dim(&self) -> usize {
        match self {
            ScoringModel::Linear { theta } => theta.len(),
            ScoringModel::QuadraticScale { dim, .. } => *dim,
        }
    }

    /// Packed parameter vector (for `Linear` this is `theta` itself).
    pub fn params(&self) -> &[f64] {
        match self {
            ScoringModel::Linear { theta } => theta,
            ScoringModel::QuadraticScale { packed, .. } => packed,
        }
    }

    /// Evaluates `s(z)`.
    pub fn score(&self, z: &[f64]) -> Result<f64> {
        self.check_dim(z)?;
        Ok(match self {
            ScoringModel::Linear { theta } => dot(theta, z),
            ScoringModel::QuadraticScale { packed, dim } => {
                let mut acc = 0.0;
                let mut idx = 0;
                for i in 0..*dim {
                    acc += packed[idx] * z[i] * z[i];
                    idx += 1;
                    for j in i + 1..*dim {
                        acc += 2.0 * packed[idx] * z[i] * z[j];
                        idx += 1;
                    }
                }
                acc
            }
        })
    }

    /// Gradient of the score with respect to the packed parameters:
    /// `z` for the linear class, the packed outer product `z z^T` with
    /// doubled off-diagonal entries for the scale class. The score equals
    /// `<params, param_gradient(z)>` for both classes.
    pub fn param_gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(z)?;
        Ok(match self {
            ScoringModel::Linear { .. } => z.to_vec(),
            ScoringModel::QuadraticScale { dim, .. } => packed_outer(z, *dim),
        })
    }

    fn check_dim(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(())
    }
}

/// Packed `z z^T` with doubled off-diagonal entries, the parameter-gradient
/// (and feature map) of the quadratic scale class.
pub(crate) fn packed_outer(z: &[f64], dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim * (dim + 1) / 2);
    for i in 0..dim {
        out.push(z[i] * z[i]);
        for j in i + 1..dim {
            out.push(2.0 * z[i] * z[j]);
        }
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
