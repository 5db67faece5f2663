//! Feature-space compression of output windows and the linear dynamics the
//! features obey.
//!
//! A feature basis `S` spans the column space of either the observability
//! matrix `O_N` (model-based) or a data Hankel matrix (data-driven). The
//! feature vector of a window is `w(k) = S^T (y(k); ...; y(k+N-1))`.
//! Nominal windows satisfy an exact one-step recursion `w(k+1) = M w(k)`;
//! [`model_feature_dynamics`] constructs `M` from the system matrices, while
//! [`fit_feature_dynamics`] recovers it from shifted data alone. The fit is
//! exact (zero residual) as soon as the window reaches the observability
//! index and the horizon covers the excitability index, which is what lets a
//! purely data-trained monitor match the model-based one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::HankelMatrix;
use crate::indices::observability_index;
use crate::linsys::{observability_matrix, LtiSystem, OutputSeries};
use crate::numerics::{
    least_squares_propagator, pseudoinverse, range_basis, Matrix, RankTolerance, Vector,
};

/// Where a feature basis came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ModelBased,
    DataDriven,
}

/// An orthonormal basis of a window feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBasis {
    /// Window length `N` the basis applies to.
    pub window: usize,
    /// Feature dimension (number of basis columns).
    pub q: usize,
    /// `p * window` by `q` orthonormal matrix.
    pub basis: Matrix,
    pub provenance: Provenance,
}

impl FeatureBasis {
    /// `w = S^T v` for a stacked window `v`.
    pub fn project(&self, window_vec: &Vector) -> Result<Vector> {
        if window_vec.len() != self.basis.nrows() {
            return Err(Error::DimensionMismatch {
                context: "FeatureBasis::project",
                expected: self.basis.nrows(),
                got: window_vec.len(),
            });
        }
        Ok(self.basis.transpose() * window_vec)
    }

    /// `v = S w`: the window reconstructed from features.
    pub fn reconstruct(&self, w: &Vector) -> Result<Vector> {
        if w.len() != self.q {
            return Err(Error::DimensionMismatch {
                context: "FeatureBasis::reconstruct",
                expected: self.q,
                got: w.len(),
            });
        }
        Ok(&self.basis * w)
    }
}

/// Feature vectors `w(0), ..., w(len - N)` of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    pub q: usize,
    pub vectors: Vec<Vector>,
}

impl FeatureSequence {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Linear one-step feature dynamics `w(k+1) = M w(k)` with the residual the
/// fit attained on its training data.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDynamics {
    pub q: usize,
    pub m: Matrix,
    pub fit_residual: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDynamics {
    q: usize,
    #[serde(rename = "M")]
    m: Vec<f64>,
    fit_residual: f64,
}

impl Serialize for FeatureDynamics {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = Vec::with_capacity(self.q * self.q);
        for i in 0..self.q {
            for j in 0..self.q {
                m.push(self.m[(i, j)]);
            }
        }
        RawDynamics {
            q: self.q,
            m,
            fit_residual: self.fit_residual,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FeatureDynamics {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawDynamics::deserialize(deserializer)?;
        if raw.m.len() != raw.q * raw.q {
            return Err(serde::de::Error::custom(format!(
                "M has {} entries, expected {}",
                raw.m.len(),
                raw.q * raw.q
            )));
        }
        Ok(FeatureDynamics {
            q: raw.q,
            m: Matrix::from_row_slice(raw.q, raw.q, &raw.m),
            fit_residual: raw.fit_residual,
        })
    }
}

/// Orthonormal basis of `Col(O_N)`.
pub fn model_feature_basis(
    sys: &LtiSystem,
    n_window: usize,
    tol: &RankTolerance,
) -> Result<FeatureBasis> {
    let o = observability_matrix(sys, n_window)?;
    let basis = range_basis(&o, tol)?;
    Ok(FeatureBasis {
        window: n_window,
        q: basis.ncols(),
        basis,
        provenance: Provenance::ModelBased,
    })
}

/// Orthonormal basis of the column space of a data Hankel matrix.
pub fn data_feature_basis(hankel: &HankelMatrix, tol: &RankTolerance) -> Result<FeatureBasis> {
    let basis = range_basis(&hankel.data, tol)?;
    Ok(FeatureBasis {
        window: hankel.n_window,
        q: basis.ncols(),
        basis,
        provenance: Provenance::DataDriven,
    })
}

/// Projects every window of `y` through the basis. The series must be at
/// least one window long and its sample dimension must match the basis.
pub fn feature_sequence(basis: &FeatureBasis, y: &OutputSeries) -> Result<FeatureSequence> {
    let n_window = basis.window;
    if y.len() < n_window {
        return Err(Error::WindowTooLarge {
            window: n_window,
            len: y.len(),
        });
    }
    if y.p() * n_window != basis.basis.nrows() {
        return Err(Error::DimensionMismatch {
            context: "feature_sequence",
            expected: basis.basis.nrows(),
            got: y.p() * n_window,
        });
    }
    let mut vectors = Vec::with_capacity(y.len() - n_window + 1);
    for k in 0..=y.len() - n_window {
        vectors.push(basis.project(&y.stacked_window(k, n_window)?)?);
    }
    Ok(FeatureSequence {
        q: basis.q,
        vectors,
    })
}

/// Splits a feature sequence into the aligned pair `W = [w(0) ... w(c-1)]`,
/// `W_fwd = [w(1) ... w(c)]`.
pub fn assemble_shifted_pair(features: &FeatureSequence) -> Result<(Matrix, Matrix)> {
    let count = features.len();
    if count < 2 {
        return Err(Error::TooFewSamples {
            context: "assemble_shifted_pair",
            needed: 2,
            got: count,
        });
    }
    let q = features.q;
    let cols = count - 1;
    let mut w = Matrix::zeros(q, cols);
    let mut w_fwd = Matrix::zeros(q, cols);
    for j in 0..cols {
        w.column_mut(j).copy_from(&features.vectors[j]);
        w_fwd.column_mut(j).copy_from(&features.vectors[j + 1]);
    }
    Ok((w, w_fwd))
}

/// Least-squares feature dynamics from a shifted data pair.
pub fn fit_feature_dynamics(
    w: &Matrix,
    w_fwd: &Matrix,
    tol: &RankTolerance,
) -> Result<FeatureDynamics> {
    let (m, fit_residual) = least_squares_propagator(w, w_fwd, tol)?;
    Ok(FeatureDynamics {
        q: w.nrows(),
        m,
        fit_residual,
    })
}

/// Exact feature dynamics `M = (S^T O_N) A (S^T O_N)^+` from the model.
///
/// Requires the basis window to reach the observability index: below it the
/// kernel of `O_N` need not be invariant under `A` and no linear recursion on
/// features reproduces the windows.
pub fn model_feature_dynamics(
    sys: &LtiSystem,
    basis: &FeatureBasis,
    tol: &RankTolerance,
) -> Result<FeatureDynamics> {
    let nu = observability_index(sys, tol)?;
    if basis.window < nu {
        return Err(Error::WindowBelowObservabilityIndex {
            window: basis.window,
            nu,
        });
    }
    let o = observability_matrix(sys, basis.window)?;
    let so = basis.basis.transpose() * o;
    let m = &so * sys.a() * pseudoinverse(&so, tol)?;
    Ok(FeatureDynamics {
        q: basis.q,
        m,
        fit_residual: 0.0,
    })
}
