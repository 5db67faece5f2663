//! Block-Hankel matrices of output data and the rank information they carry.
//!
//! For a series `y(0..T-1)` and window length `N`, the Hankel matrix `Y_{N,T}`
//! has `T - N + 1` columns, column `j` stacking the window
//! `(y(j); ...; y(j+N-1))`. Nominal data factors as `Y_{N,T} = O_N K` with `K`
//! the Krylov matrix of the initial state, so the attainable rank is limited
//! both by the observability matrix and by how much of the state space the
//! free motion visits. [`hankel_information`] reports the best rank any
//! window/horizon pair achieves on the given data; [`rank_curve`] tracks the
//! single heuristic pairing `N(T)` used by the streaming monitor.

use crate::error::{Error, Result};
use crate::indices::heuristic_window;
use crate::linsys::OutputSeries;
use crate::numerics::{rank_and_smallest_kept, Matrix, RankTolerance};

/// A block-Hankel matrix of output windows.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    /// Window length (block rows).
    pub n_window: usize,
    /// Horizon: number of samples the matrix was built from.
    pub horizon: usize,
    /// Output dimension per sample.
    pub p: usize,
    /// The `p * n_window` by `horizon - n_window + 1` matrix itself.
    pub data: Matrix,
}

/// Builds `Y_{N,T}` from the whole series (`T = y.len()`).
pub fn build_hankel(y: &OutputSeries, n_window: usize) -> Result<HankelMatrix> {
    let len = y.len();
    if n_window == 0 {
        return Err(Error::WindowTooSmall {
            horizon: len,
            p: y.p(),
        });
    }
    if n_window > len {
        return Err(Error::WindowTooLarge {
            window: n_window,
            len,
        });
    }
    let p = y.p();
    let cols = len - n_window + 1;
    let mut data = Matrix::zeros(p * n_window, cols);
    for j in 0..cols {
        data.column_mut(j).copy_from(&y.stacked_window(j, n_window)?);
    }
    Ok(HankelMatrix {
        n_window,
        horizon: len,
        p,
        data,
    })
}

/// One row of the heuristic rank curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankCurvePoint {
    /// Horizon (number of samples used).
    pub horizon: usize,
    /// Window length `N(T)` chosen by [`heuristic_window`].
    pub window: usize,
    /// Numerical rank of `Y_{N(T),T}`.
    pub rank: usize,
    /// Smallest retained singular value (0 when the rank is 0).
    pub sigma_min_kept: f64,
}

/// Rank of `Y_{N(T),T}` for every horizon `T` from `p` to `len(y)`, pairing
/// each horizon with the heuristic window.
pub fn rank_curve(y: &OutputSeries, tol: &RankTolerance) -> Result<Vec<RankCurvePoint>> {
    let len = y.len();
    let p = y.p();
    if len < p.max(1) {
        return Err(Error::TooFewSamples {
            context: "rank_curve",
            needed: p.max(1),
            got: len,
        });
    }
    let mut out = Vec::with_capacity(len - p + 1);
    for t in p.max(1)..=len {
        let window = heuristic_window(t, p)?;
        let hankel = build_hankel(&y.prefix(t)?, window)?;
        let (rank, sigma_min_kept) = rank_and_smallest_kept(&hankel.data, tol)?;
        out.push(RankCurvePoint {
            horizon: t,
            window,
            rank,
            sigma_min_kept,
        });
    }
    Ok(out)
}

/// The maximal Hankel rank observed on a series, with the first window/horizon
/// pair attaining it and the heuristic curve alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelInfoEstimate {
    /// Maximum numerical rank over all admissible `(N, T)` pairs.
    pub gamma: usize,
    /// First pair `(N, T)` attaining `gamma`, ordered by horizon then window.
    pub achieved_at: (usize, usize),
    /// Heuristic curve entries `(T, N(T), rank)`; on data long enough for the
    /// curve to saturate its maximum equals `gamma`.
    pub rank_curve: Vec<(usize, usize, usize)>,
}

/// Sweeps all admissible window/horizon pairs (windows capped at
/// `ceil(len/2)`, beyond which columns are scarcer than block rows) and
/// returns the maximal rank, where it is first attained, and the heuristic
/// curve. On nominal data of length at least `nu + mu` the estimate is exact:
/// longer horizons cannot add rank.
pub fn hankel_information(y: &OutputSeries, tol: &RankTolerance) -> Result<HankelInfoEstimate> {
    let len = y.len();
    if len == 0 {
        return Err(Error::EmptySeries {
            context: "hankel_information",
        });
    }
    let p = y.p();
    let cap = len.div_ceil(2);

    // The rank of Y_{N,T} is nondecreasing in T (columns only accumulate), so
    // the per-window maximum sits at the full horizon.
    let mut gamma = 0;
    for window in 1..=cap {
        let hankel = build_hankel(y, window)?;
        let (rank, _) = rank_and_smallest_kept(&hankel.data, tol)?;
        gamma = gamma.max(rank);
    }

    // First (by horizon, then window) pair attaining the maximum. Pairs whose
    // shape cannot reach gamma are skipped without a decomposition.
    let mut achieved_at = (1, 1);
    'outer: for t in 1..=len {
        for window in 1..=t.min(cap) {
            if (p * window).min(t - window + 1) < gamma {
                continue;
            }
            let hankel = build_hankel(&y.prefix(t)?, window)?;
            let (rank, _) = rank_and_smallest_kept(&hankel.data, tol)?;
            if rank == gamma {
                achieved_at = (window, t);
                break 'outer;
            }
        }
    }

    let curve = if len >= p.max(1) {
        rank_curve(y, tol)?
            .into_iter()
            .map(|pt| (pt.horizon, pt.window, pt.rank))
            .collect()
    } else {
        Vec::new()
    };

    Ok(HankelInfoEstimate {
        gamma,
        achieved_at,
        rank_curve: curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsys::{simulate, InputSeries, LtiSystem};
    use crate::numerics::Vector;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn tol() -> RankTolerance {
        RankTolerance::default()
    }

    fn series(p: usize, flat: &[f64]) -> OutputSeries {
        let samples = flat
            .chunks(p)
            .map(|c| Vector::from_row_slice(c))
            .collect::<Vec<_>>();
        OutputSeries::new(p, samples).unwrap()
    }

    #[test]
    fn hankel_of_shift_series() {
        let y = series(1, &[0.0, 1.0, 0.0]);
        let h = build_hankel(&y, 2).unwrap();
        assert_eq!(h.data, Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(h.horizon, 3);
        assert_eq!(h.p, 1);
    }

    #[test]
    fn hankel_of_zero_series_is_zero() {
        let y = series(1, &[0.0; 5]);
        let h = build_hankel(&y, 3).unwrap();
        assert_eq!(h.data.norm(), 0.0);
        assert_eq!(h.data.shape(), (3, 3));
    }

    #[test]
    fn hankel_single_window_row() {
        let y = series(1, &[1.0, 0.5, 0.25]);
        let h = build_hankel(&y, 1).unwrap();
        assert_eq!(h.data, Matrix::from_row_slice(1, 3, &[1.0, 0.5, 0.25]));
    }

    #[test]
    fn hankel_rejects_oversized_window() {
        let y = series(1, &[1.0, 2.0]);
        assert!(matches!(
            build_hankel(&y, 3),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn hankel_blocks_reread_the_series() {
        let y = series(2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let h = build_hankel(&y, 2).unwrap();
        for j in 0..h.data.ncols() {
            for i in 0..h.n_window {
                let block = h.data.column(j).rows(i * 2, 2).into_owned();
                assert_eq!(&block, y.sample(j + i));
            }
        }
    }

    #[test]
    fn information_of_shift_series() {
        let y = series(1, &[0.0, 1.0, 0.0]);
        let info = hankel_information(&y, &tol()).unwrap();
        assert_eq!(info.gamma, 2);
        assert_eq!(info.achieved_at, (2, 3));
        assert_eq!(info.rank_curve.last().unwrap().2, 2);
    }

    #[test]
    fn information_of_zero_series() {
        let y = series(1, &[0.0; 6]);
        let info = hankel_information(&y, &tol()).unwrap();
        assert_eq!(info.gamma, 0);
        assert_eq!(info.achieved_at, (1, 1));
        assert!(info.rank_curve.iter().all(|&(_, _, r)| r == 0));
    }

    #[test]
    fn rank_curve_of_geometric_series_is_flat_one() {
        let y = series(1, &[1.0, 0.5, 0.25, 0.125, 0.0625]);
        let curve = rank_curve(&y, &tol()).unwrap();
        assert!(curve.iter().all(|pt| pt.rank == 1));
        assert!(curve.iter().all(|pt| pt.sigma_min_kept > 0.0));
    }

    #[test]
    fn rank_curve_requires_enough_samples() {
        let y = series(3, &[1.0; 12]);
        assert_eq!(rank_curve(&y, &tol()).unwrap().len(), 2);
        let minimal = series(3, &[1.0; 9]);
        assert_eq!(rank_curve(&minimal, &tol()).unwrap().len(), 1);
        let too_short = series(3, &[1.0; 6]);
        assert!(matches!(
            rank_curve(&too_short, &tol()),
            Err(Error::TooFewSamples { .. })
        ));
    }

    fn random_autonomous(seed: u64, n: usize, p: usize) -> (LtiSystem, Vector) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut draw =
            |r: usize, c: usize| Matrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng));
        let a = draw(n, n) * (0.95 / (n as f64).sqrt());
        let c = draw(p, n);
        let x0 = Vector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        (
            LtiSystem::new(a, Matrix::zeros(n, 1), c, Matrix::zeros(p, 1)).unwrap(),
            x0,
        )
    }

    #[test]
    fn nominal_hankel_factors_through_observability() {
        use crate::linsys::observability_matrix;
        for seed in 0..10u64 {
            let n = 2 + (seed as usize % 4);
            let (sys, x0) = random_autonomous(seed, n, 2);
            let horizon = 12;
            let (y, states) = simulate(&sys, &x0, &InputSeries::zero(1), horizon).unwrap();
            let n_window = 3;
            let h = build_hankel(&y, n_window).unwrap();
            let o = observability_matrix(&sys, n_window).unwrap();
            let cols = horizon - n_window + 1;
            let mut krylov = Matrix::zeros(n, cols);
            for j in 0..cols {
                krylov.column_mut(j).copy_from(&states[j]);
            }
            let factored = o * krylov;
            assert!((&h.data - factored).norm() <= 1e-10 * h.data.norm().max(1.0));
        }
    }

    #[test]
    fn rank_curve_nondecreasing_on_nominal_data() {
        for seed in 0..8u64 {
            let n = 2 + (seed as usize % 4);
            let (sys, x0) = random_autonomous(seed.wrapping_add(50), n, 2);
            let (y, _) = simulate(&sys, &x0, &InputSeries::zero(1), 24).unwrap();
            let curve = rank_curve(&y, &tol()).unwrap();
            for pair in curve.windows(2) {
                assert!(
                    pair[1].rank >= pair[0].rank,
                    "rank curve dipped at T={} (seed {seed})",
                    pair[1].horizon
                );
            }
        }
    }

    #[test]
    fn information_bounded_by_indices_and_attained_early() {
        use crate::indices::{excitability_index, observability_index};
        for seed in 0..8u64 {
            let n = 2 + (seed as usize % 3);
            let p = 1 + (seed as usize % 2);
            let (sys, x0) = random_autonomous(seed.wrapping_add(900), n, p);
            let nu = observability_index(&sys, &tol()).unwrap();
            let mu = excitability_index(&sys, &tol()).unwrap();
            let horizon = 2 * (nu + mu);
            let (y, _) = simulate(&sys, &x0, &InputSeries::zero(1), horizon).unwrap();
            let info = hankel_information(&y, &tol()).unwrap();
            assert!(info.gamma <= (nu * p).min(mu), "seed {seed}");
            // The pair (nu, nu + mu - 1) already attains the maximum.
            let early = build_hankel(&y.prefix(nu + mu - 1).unwrap(), nu).unwrap();
            let (rank, _) = rank_and_smallest_kept(&early.data, &tol()).unwrap();
            assert_eq!(rank, info.gamma, "seed {seed}");
            assert!(info.achieved_at.1 <= nu + mu - 1, "seed {seed}");
        }
    }

    #[test]
    fn deep_window_rank_converges_on_marginally_stable_data() {
        // Companion dynamics put every eigenvalue on the unit circle, so deep
        // Hankel windows have tightly clustered singular values; this shape
        // once stalled the SVD iteration outright.
        use crate::generator::{companion_system, random_unit_state};
        use crate::numerics::numerical_rank;
        let sys = companion_system(6, 2, 3, 6).unwrap();
        let x0 = random_unit_state(6, 6).unwrap();
        let (y, _) = simulate(&sys, &x0, &InputSeries::zero(2), 150).unwrap();
        let h = build_hankel(&y, 75).unwrap();
        let rank = numerical_rank(&h.data, &tol()).unwrap();
        // Autonomous data: the rank can never exceed the state dimension.
        assert!(rank <= 6, "rank {rank}");
    }
}
