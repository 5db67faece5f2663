//! Tolerance-aware numerical linear algebra primitives.
//!
//! Every rank decision in the crate flows through [`RankTolerance`], so the
//! cutoff convention is stated once: a singular value is *kept* when it
//! exceeds `max(relative_cutoff * sigma_max, absolute_floor)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense column-major double-precision matrix used throughout the crate.
pub type Matrix = DMatrix<f64>;
/// Dense double-precision column vector.
pub type Vector = DVector<f64>;

/// Cutoff policy for numerical rank decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankTolerance {
    /// Singular values below `relative_cutoff * sigma_max` are treated as zero.
    #[serde(default = "default_relative_cutoff")]
    pub relative_cutoff: f64,
    /// Absolute floor below which singular values are always treated as zero.
    #[serde(default = "default_absolute_floor")]
    pub absolute_floor: f64,
}

fn default_relative_cutoff() -> f64 {
    1e-9
}

fn default_absolute_floor() -> f64 {
    1e-12
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self {
            relative_cutoff: default_relative_cutoff(),
            absolute_floor: default_absolute_floor(),
        }
    }
}

impl RankTolerance {
    /// The effective cutoff for a spectrum with largest singular value `sigma_max`.
    pub fn cutoff(&self, sigma_max: f64) -> f64 {
        (self.relative_cutoff * sigma_max).max(self.absolute_floor)
    }
}

fn ensure_finite(m: &Matrix, context: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { context })
    }
}

/// Thin SVD with descending singular values. `U` is `rows x k`, `V_t` is
/// `k x cols` with `k = min(rows, cols)`.
struct ThinSvd {
    sigma: Vec<f64>,
    u: Matrix,
    v_t: Matrix,
}

/// SVD with a convergence ladder: machine epsilon first, then slightly looser
/// deflation thresholds, then the transposed problem. Marginally stable data
/// yields tightly clustered singular values on which the iteration can stall
/// at full precision; loosening to 1e-12 keeps every singular value accurate
/// orders of magnitude below any rank cutoff used in the crate.
fn converged_svd(
    m: &Matrix,
    with_uv: bool,
) -> Option<nalgebra::linalg::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    for eps in [f64::EPSILON, 1e-14, 1e-12] {
        if let Some(svd) = m.clone().try_svd(with_uv, with_uv, eps, 100_000) {
            return Some(svd);
        }
    }
    None
}

fn thin_svd(m: &Matrix, context: &'static str) -> Result<ThinSvd> {
    ensure_finite(m, context)?;
    let (rows, cols) = m.shape();
    let (svd, transposed) = match converged_svd(m, true) {
        Some(svd) => (svd, false),
        None => (
            converged_svd(&m.transpose(), true).ok_or(Error::SvdFailed { rows, cols })?,
            true,
        ),
    };
    let (u, v_t) = if transposed {
        // A^T = U' S V'^T  =>  A = V' S U'^T.
        (
            svd.v_t.expect("v_t requested").transpose(),
            svd.u.expect("u requested").transpose(),
        )
    } else {
        (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"))
    };
    let k = svd.singular_values.len();

    // nalgebra sorts descending, but the factorization is re-ordered here so
    // the ordering is a local guarantee rather than a backend detail.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("finite singular values")
    });
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = Matrix::from_columns(&order.iter().map(|&i| u.column(i)).collect::<Vec<_>>());
    let v_t = Matrix::from_rows(&order.iter().map(|&i| v_t.row(i)).collect::<Vec<_>>());
    Ok(ThinSvd { sigma, u, v_t })
}

/// Number of singular values kept under `tol`, plus the smallest kept one
/// (0.0 when the rank is zero).
pub(crate) fn rank_and_smallest_kept(m: &Matrix, tol: &RankTolerance) -> Result<(usize, f64)> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok((0, 0.0));
    }
    ensure_finite(m, "numerical_rank")?;
    let (rows, cols) = m.shape();
    let svd = converged_svd(m, false)
        .or_else(|| converged_svd(&m.transpose(), false))
        .ok_or(Error::SvdFailed { rows, cols })?;
    let mut sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    let cutoff = tol.cutoff(sigma[0]);
    let rank = sigma.iter().take_while(|&&s| s > cutoff).count();
    let smallest = if rank == 0 { 0.0 } else { sigma[rank - 1] };
    Ok((rank, smallest))
}

/// Numerical rank of `m` under the cutoff policy `tol`.
pub fn numerical_rank(m: &Matrix, tol: &RankTolerance) -> Result<usize> {
    rank_and_smallest_kept(m, tol).map(|(r, _)| r)
}

/// Flips each column so its entry of largest magnitude (first such entry on
/// ties) is positive. Makes SVD-derived bases deterministic fixtures.
fn normalize_column_signs(m: &mut Matrix) {
    for mut col in m.column_iter_mut() {
        let mut pivot = 0;
        let mut best = -1.0f64;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > best {
                best = x.abs();
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Orthonormal basis of the numerical column space of `m`, columns ordered by
/// descending singular value and sign-normalized.
pub fn range_basis(m: &Matrix, tol: &RankTolerance) -> Result<Matrix> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Matrix::zeros(m.nrows(), 0));
    }
    let svd = thin_svd(m, "range_basis")?;
    let cutoff = tol.cutoff(svd.sigma[0]);
    let rank = svd.sigma.iter().take_while(|&&s| s > cutoff).count();
    let mut basis = svd.u.columns(0, rank).into_owned();
    normalize_column_signs(&mut basis);
    Ok(basis)
}

/// Orthonormal basis of the numerical kernel (right null space) of `m`,
/// sign-normalized. Returns a `cols x (cols - rank)` matrix.
///
/// The thin SVD only exposes `min(rows, cols)` right singular vectors, so for
/// wide matrices the kernel is recovered as the range of the projector
/// `I - R R^T` onto the orthogonal complement of the row space; its singular
/// values are exactly 0 and 1, which makes the cut unambiguous.
pub fn kernel_basis(m: &Matrix, tol: &RankTolerance) -> Result<Matrix> {
    let cols = m.ncols();
    if cols == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    if m.nrows() == 0 {
        return Ok(Matrix::identity(cols, cols));
    }
    let svd = thin_svd(m, "kernel_basis")?;
    let cutoff = tol.cutoff(svd.sigma[0]);
    let rank = svd.sigma.iter().take_while(|&&s| s > cutoff).count();
    if rank == cols {
        return Ok(Matrix::zeros(cols, 0));
    }
    // Row-space basis as columns.
    let row_space = svd.v_t.rows(0, rank).transpose();
    let projector = Matrix::identity(cols, cols) - &row_space * row_space.transpose();
    let proj_svd = thin_svd(&projector, "kernel_basis")?;
    let mut basis = proj_svd.u.columns(0, cols - rank).into_owned();
    normalize_column_signs(&mut basis);
    Ok(basis)
}

/// Moore-Penrose pseudoinverse with singular values below the cutoff
/// discarded.
pub fn pseudoinverse(m: &Matrix, tol: &RankTolerance) -> Result<Matrix> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Matrix::zeros(m.ncols(), m.nrows()));
    }
    let svd = thin_svd(m, "pseudoinverse")?;
    let cutoff = tol.cutoff(svd.sigma[0]);
    let rank = svd.sigma.iter().take_while(|&&s| s > cutoff).count();
    let mut pinv = Matrix::zeros(m.ncols(), m.nrows());
    for i in 0..rank {
        let vi = svd.v_t.row(i).transpose();
        let ui = svd.u.column(i);
        pinv += (vi / svd.sigma[i]) * ui.transpose();
    }
    Ok(pinv)
}

/// Least-squares one-step propagator: the minimizer `M = W_fwd W^+` of
/// `||W_fwd - M W||_F`, returned together with the attained residual.
///
/// `w` holds feature vectors as columns and `w_fwd` their one-step shifts;
/// both must have identical shape.
pub fn least_squares_propagator(
    w: &Matrix,
    w_fwd: &Matrix,
    tol: &RankTolerance,
) -> Result<(Matrix, f64)> {
    if w.shape() != w_fwd.shape() {
        return Err(Error::ShapeMismatch {
            context: "least_squares_propagator",
            left_rows: w.nrows(),
            left_cols: w.ncols(),
            right_rows: w_fwd.nrows(),
            right_cols: w_fwd.ncols(),
        });
    }
    ensure_finite(w, "least_squares_propagator")?;
    ensure_finite(w_fwd, "least_squares_propagator")?;
    let m = w_fwd * pseudoinverse(w, tol)?;
    let residual = (w_fwd - &m * w).norm();
    Ok((m, residual))
}
