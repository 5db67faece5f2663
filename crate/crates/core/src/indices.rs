//! Structure indices of an LTI system and the horizon lengths they imply.
//!
//! * The observability index `nu` is the smallest window length at which the
//!   extended observability matrix stops gaining rank. Once ranks agree at two
//!   consecutive lengths the kernels coincide, the kernel becomes invariant
//!   under `A`, and the plateau is permanent, so the search never needs to go
//!   past `N = n`.
//! * The excitability index at a state, `mu(x)`, is the rank plateau of the
//!   Krylov sequence `x, Ax, A^2 x, ...`, i.e. how many steps of the free
//!   motion from `x` carry fresh information. Its maximum over all states,
//!   `mu`, equals the degree of the minimal polynomial of `A`: the first power
//!   `A^d` that is a combination of lower powers ends every Krylov chain.
//! * `nu + mu` bounds the horizon after which windowed output data cannot gain
//!   rank, which is what the data-driven monitor waits for.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linsys::{observability_matrix, LtiSystem};
use crate::numerics::{numerical_rank, Matrix, RankTolerance, Vector};

/// Summary of the structure indices of one system (and optionally one
/// initial state).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexReport {
    /// Observability index.
    pub nu: usize,
    /// Excitability index of the system (minimal polynomial degree).
    pub mu: usize,
    /// Excitability index of the supplied initial state, when one was given.
    pub mu_of_x0: Option<usize>,
    /// Horizon at which a model-based monitor attains full detection
    /// capability: `nu`.
    pub t_safe_model: usize,
    /// Horizon at which output data determines everything the model-based
    /// monitor knows: `nu + mu`.
    pub t_safe_data: usize,
    /// Upper bound on the horizon at which the heuristic-window rank curve
    /// saturates.
    pub t_safe_heuristic: usize,
}

/// Smallest `N` with `rank(O_N) = rank(O_(N+1))`. Always at most `n`.
pub fn observability_index(sys: &LtiSystem, tol: &RankTolerance) -> Result<usize> {
    let n = sys.n();
    let mut prev = numerical_rank(&observability_matrix(sys, 1)?, tol)?;
    for window in 1..=n {
        let next = numerical_rank(&observability_matrix(sys, window + 1)?, tol)?;
        if next == prev {
            return Ok(window);
        }
        prev = next;
    }
    // Rank growth past N = n is impossible (Cayley-Hamilton); the loop above
    // must have returned, but cap defensively.
    Ok(n)
}

/// Krylov matrix `[x, Ax, ..., A^(len-1) x]`.
fn krylov(sys: &LtiSystem, x: &Vector, len: usize) -> Matrix {
    let mut out = Matrix::zeros(sys.n(), len);
    let mut v = x.clone();
    for j in 0..len {
        out.column_mut(j).copy_from(&v);
        if j + 1 < len {
            v = sys.a() * v;
        }
    }
    out
}

/// Excitability index of a single state: the rank plateau of its Krylov
/// sequence. The zero state has index 1.
pub fn excitability_index_at(sys: &LtiSystem, x: &Vector, tol: &RankTolerance) -> Result<usize> {
    if x.len() != sys.n() {
        return Err(Error::DimensionMismatch {
            context: "excitability_index_at",
            expected: sys.n(),
            got: x.len(),
        });
    }
    let n = sys.n();
    let mut prev = numerical_rank(&krylov(sys, x, 1), tol)?;
    for len in 1..=n {
        let next = numerical_rank(&krylov(sys, x, len + 1), tol)?;
        if next == prev {
            return Ok(len);
        }
        prev = next;
    }
    Ok(n)
}

/// Excitability index of the system: the maximum of `mu(x)` over all states,
/// computed as the degree of the minimal polynomial of `A`.
///
/// The powers `I, A, ..., A^n` are vectorized into columns (normalized so the
/// rank decision is scale-free); the first power lying in the span of its
/// predecessors truncates the chain, so the column rank is exactly the
/// minimal polynomial degree.
pub fn excitability_index(sys: &LtiSystem, tol: &RankTolerance) -> Result<usize> {
    let n = sys.n();
    let mut stack = Matrix::zeros(n * n, n + 1);
    let mut power = Matrix::identity(n, n);
    for j in 0..=n {
        let mut col = Vector::zeros(n * n);
        for c in 0..n {
            col.rows_mut(c * n, n).copy_from(&power.column(c));
        }
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
        stack.column_mut(j).copy_from(&col);
        if j < n {
            power = sys.a() * power;
            if !power.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite {
                    context: "excitability_index",
                });
            }
        }
    }
    numerical_rank(&stack, tol)
}

/// Window length the data-driven side pairs with a horizon `t`:
/// `floor((t + 1) / (p + 1))`. Requires `t >= p` so the window is nonempty.
pub fn heuristic_window(t: usize, p: usize) -> Result<usize> {
    let window = (t + 1) / (p + 1);
    if window < 1 {
        return Err(Error::WindowTooSmall { horizon: t, p });
    }
    Ok(window)
}

/// Upper bound on the horizon at which the heuristic-window rank curve
/// saturates: `ceil(max(nu (p+1) - 1, mu (p+1) / p - 1))`.
pub fn safe_horizon_heuristic(nu: usize, mu: usize, p: usize) -> usize {
    let from_nu = nu * (p + 1) - 1;
    let from_mu = (mu * (p + 1)).div_ceil(p) - 1;
    from_nu.max(from_mu)
}

/// Computes every index for one system, plus `mu(x0)` when a state is given.
pub fn index_report(
    sys: &LtiSystem,
    x0: Option<&Vector>,
    tol: &RankTolerance,
) -> Result<IndexReport> {
    let nu = observability_index(sys, tol)?;
    let mu = excitability_index(sys, tol)?;
    let mu_of_x0 = match x0 {
        Some(x) => Some(excitability_index_at(sys, x, tol)?),
        None => None,
    };
    Ok(IndexReport {
        nu,
        mu,
        mu_of_x0,
        t_safe_model: nu,
        t_safe_data: nu + mu,
        t_safe_heuristic: safe_horizon_heuristic(nu, mu, sys.p()),
    })
}
