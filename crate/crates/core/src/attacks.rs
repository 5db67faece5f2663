//! Attack scenarios and detectability analysis.
//!
//! An attack that starts once the plant has been running quietly deviates the
//! output stream if and only if its input windows leave the kernel of the
//! input coupling matrix: the measured-minus-predicted window of an armed
//! monitor equals `C_N · u-window` whenever the base window is still nominal,
//! so a window inside `Ker(C_N)` for every `N` never produces a residual.
//! Early attacks (within the first observability-index samples) are the
//! opposite regime: there the question is whether the output deviation can be
//! attributed to a different initial state, i.e. whether `C_T · u` lies in
//! `Col(O_T)`.
//!
//! The "for every window length" quantifier is finite in disguise: if the
//! burst `u` is supported on `N` samples and `C_(N+n+1) · (u; 0; ...; 0) = 0`,
//! then every Markov-parameter block `C A^j B` against the burst vanishes for
//! `j ≤ n`, and the remaining powers of `A` are linear combinations of those
//! already covered (Cayley–Hamilton), so all later blocks vanish too and the
//! output never deviates. [`synthesize_undetectable`] therefore works in the
//! kernel of the first `m·N` columns of `C_(N+n+1)`, and checking
//! undetectability up to `N_max = n+1` windows is exact for bursts inside the
//! checked range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indices::{excitability_index, observability_index};
use crate::linsys::{input_coupling_matrix, observability_matrix, InputSeries, LtiSystem};
use crate::numerics::{kernel_basis, range_basis, RankTolerance, Vector};

/// An input stream that is zero until `start` and nonzero somewhere after.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackScenario {
    pub start: usize,
    pub inputs: InputSeries,
    pub label: String,
}

impl AttackScenario {
    pub fn new(start: usize, inputs: InputSeries, label: impl Into<String>) -> Result<Self> {
        if inputs.start_time() != start {
            return Err(Error::DimensionMismatch {
                context: "AttackScenario start vs inputs.start_time",
                expected: start,
                got: inputs.start_time(),
            });
        }
        if !inputs.nonzero_at_or_after(start) {
            return Err(Error::EmptySeries {
                context: "AttackScenario requires a nonzero input at or after start",
            });
        }
        Ok(AttackScenario {
            start,
            inputs,
            label: label.into(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RawScenario {
    start: usize,
    m: usize,
    /// Dense samples from `start` onward.
    samples: Vec<Vec<f64>>,
    #[serde(default)]
    label: String,
}

impl Serialize for AttackScenario {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let samples = self
            .inputs
            .samples()
            .iter()
            .skip(self.start)
            .map(|v| v.iter().copied().collect())
            .collect();
        RawScenario {
            start: self.start,
            m: self.inputs.m(),
            samples,
            label: self.label.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AttackScenario {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawScenario::deserialize(deserializer)?;
        let mut samples = vec![Vector::zeros(raw.m); raw.start];
        for (i, s) in raw.samples.iter().enumerate() {
            if s.len() != raw.m {
                return Err(serde::de::Error::custom(format!(
                    "attack sample {i} has {} entries, expected {}",
                    s.len(),
                    raw.m
                )));
            }
            samples.push(Vector::from_row_slice(s));
        }
        let inputs = InputSeries::new(raw.m, samples, raw.start).map_err(serde::de::Error::custom)?;
        AttackScenario::new(raw.start, inputs, raw.label).map_err(serde::de::Error::custom)
    }
}

/// Evidence backing a detectability verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// Projection residual of `C_T · u` against `Col(O_T)` at window `T`.
    WindowResidual { window: usize, residual: f64 },
    /// Scaled kernel residuals `‖C_N · u-window‖ / (‖C_N‖_F · ‖u-window‖)`
    /// maximized over all checked windows.
    KernelMembership {
        max_scaled_residual: f64,
        checked_up_to: usize,
        /// Remark-level cross-check: an undetectable nonzero attack requires
        /// the input-output map to not be left invertible.
        left_invertible: Option<bool>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectabilityVerdict {
    pub detectable: bool,
    pub certificate: Certificate,
}

/// Detectability of an attack over the first `t` samples, `t` at most the
/// observability index. In that regime the initial state is still ambiguous,
/// so the attack is visible exactly when its output contribution cannot be
/// explained by any initial state.
pub fn check_early_detectability(
    sys: &LtiSystem,
    scenario: &AttackScenario,
    t: usize,
    tol: &RankTolerance,
) -> Result<DetectabilityVerdict> {
    let nu = observability_index(sys, tol)?;
    if t == 0 || t > nu {
        return Err(Error::RegimeViolation {
            context: format!("early-detectability window t = {t} outside 1..={nu}"),
        });
    }
    if scenario.inputs.m() != sys.m() {
        return Err(Error::DimensionMismatch {
            context: "attack input dimension",
            expected: sys.m(),
            got: scenario.inputs.m(),
        });
    }
    let u_stack = scenario.inputs.stacked_window(0, t);
    let v = input_coupling_matrix(sys, t)? * u_stack;
    let q = range_basis(&observability_matrix(sys, t)?, tol)?;
    let residual = (&v - &q * (q.transpose() * &v)).norm();
    let detectable = residual > (tol.relative_cutoff * v.norm()).max(tol.absolute_floor);
    Ok(DetectabilityVerdict {
        detectable,
        certificate: Certificate::WindowResidual {
            window: t,
            residual,
        },
    })
}

/// Whether `rank(C_(n+1)) - rank(C_n) = m`: injectivity of input windows into
/// output windows once transients are accounted for.
fn left_invertible(sys: &LtiSystem, tol: &RankTolerance) -> Result<bool> {
    let n = sys.n();
    let rank = |k: usize| -> Result<usize> {
        crate::numerics::numerical_rank(&input_coupling_matrix(sys, k)?, tol)
    };
    Ok(rank(n + 1)? - rank(n)? == sys.m())
}

/// Checks the kernel condition `u-window ∈ Ker(C_N)` for every window length
/// up to `n_max` (use `n + 1` for an exact answer on bursts no longer than
/// `n_max`). The scenario must start after the quiet horizon — observability
/// plus excitability indices — so that arming on the nominal prefix is
/// settled and the windowed evaluation is the whole story.
pub fn check_undetectable(
    sys: &LtiSystem,
    scenario: &AttackScenario,
    n_max: usize,
    tol: &RankTolerance,
) -> Result<DetectabilityVerdict> {
    if n_max == 0 {
        return Err(Error::BadDimensions {
            context: "check_undetectable: n_max must be positive".into(),
        });
    }
    if scenario.inputs.m() != sys.m() {
        return Err(Error::DimensionMismatch {
            context: "attack input dimension",
            expected: sys.m(),
            got: scenario.inputs.m(),
        });
    }
    let quiet = observability_index(sys, tol)? + excitability_index(sys, tol)?;
    if scenario.start < quiet + 1 {
        return Err(Error::RegimeViolation {
            context: format!(
                "attack starts at {} but the quiet-horizon regime begins at {}",
                scenario.start,
                quiet + 1
            ),
        });
    }
    let mut max_scaled = 0.0f64;
    for n_window in 1..=n_max {
        let u_win = scenario.inputs.stacked_window(scenario.start, n_window);
        let coupling = input_coupling_matrix(sys, n_window)?;
        let scale = coupling.norm() * u_win.norm();
        if scale > 0.0 {
            max_scaled = max_scaled.max((coupling * u_win).norm() / scale);
        }
    }
    let detectable = max_scaled > tol.relative_cutoff;
    let left_inv = left_invertible(sys, tol)?;
    Ok(DetectabilityVerdict {
        detectable,
        certificate: Certificate::KernelMembership {
            max_scaled_residual: max_scaled,
            checked_up_to: n_max,
            left_invertible: Some(left_inv),
        },
    })
}

/// A unit-norm input burst of `n_window` samples that no output monitor can
/// see, if one exists. The burst is drawn from the kernel of the first
/// `m·n_window` columns of `C_(n_window+n+1)`, which forces the output
/// contribution to vanish for all time (see module docs); in particular the
/// returned vector also lies in `Ker(C_N)` for the burst's own window.
pub fn synthesize_undetectable(
    sys: &LtiSystem,
    n_window: usize,
    tol: &RankTolerance,
) -> Result<Option<Vector>> {
    if n_window == 0 {
        return Err(Error::BadDimensions {
            context: "synthesize_undetectable: window must be positive".into(),
        });
    }
    let extended = input_coupling_matrix(sys, n_window + sys.n() + 1)?;
    let padded_burst_map = extended.columns(0, sys.m() * n_window).into_owned();
    let kernel = kernel_basis(&padded_burst_map, tol)?;
    if kernel.ncols() == 0 {
        return Ok(None);
    }
    // The numerical kernel can mix exact kernel directions with
    // merely-weakly-visible ones; return the column whose actual image is
    // smallest so an exact direction wins whenever one exists.
    let images = &padded_burst_map * &kernel;
    let quietest = (0..kernel.ncols())
        .min_by(|&a, &b| {
            images
                .column(a)
                .norm()
                .partial_cmp(&images.column(b).norm())
                .expect("finite image norms")
        })
        .expect("kernel is nonempty");
    Ok(Some(kernel.column(quietest).into_owned()))
}
