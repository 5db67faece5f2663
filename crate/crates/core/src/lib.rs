//! Attack detection for deterministic discrete-time LTI systems, built on
//! Hankel representations of output streams.
//!
//! The crate covers the full pipeline:
//!
//! * [`numerics`] — tolerance-aware rank, range/kernel bases, pseudoinverse,
//!   and the least-squares one-step propagator shared by everything else.
//! * [`linsys`] — state-space systems, input/output series, simulation, and
//!   the windowed output map `y_window = O_N x(0) + C_N u_window`.
//! * [`indices`] — observability index `nu`, excitability index `mu`, and the
//!   horizon lengths at which output data carries maximal information.
//! * [`hankel`] — block-Hankel assembly, rank curves over growing horizons,
//!   and the maximal-rank (information) estimate.
//! * [`features`] — low-dimensional feature bases from model or data, and the
//!   learned linear dynamics that propagate feature vectors one step.
//! * [`monitor`] — streaming Attack/NoAttack monitors: a model-based one armed
//!   from the observability index on, and a data-driven one that trains itself
//!   once its rank curve saturates.
//! * [`attacks`] — detectability checks for attack inputs and synthesis of
//!   inputs that no output-based monitor can see.
//! * [`generator`] — seeded construction of the companion-form benchmark
//!   family used by the CLI and the acceptance suite.

pub mod attacks;
pub mod error;
pub mod features;
pub mod generator;
pub mod hankel;
pub mod indices;
pub mod linsys;
pub mod monitor;
pub mod numerics;

pub use attacks::{
    check_early_detectability, check_undetectable, synthesize_undetectable, AttackScenario,
    Certificate, DetectabilityVerdict,
};
pub use error::{Error, Result};
pub use features::{
    assemble_shifted_pair, data_feature_basis, feature_sequence, fit_feature_dynamics,
    model_feature_basis, model_feature_dynamics, FeatureBasis, FeatureDynamics, FeatureSequence,
    Provenance,
};
pub use generator::{companion_system, random_unit_state, FIXTURE_SEED};
pub use hankel::{build_hankel, hankel_information, rank_curve, HankelInfoEstimate, HankelMatrix};
pub use indices::{
    excitability_index, excitability_index_at, heuristic_window, index_report,
    observability_index, safe_horizon_heuristic, IndexReport,
};
pub use linsys::{
    input_coupling_matrix, observability_matrix, simulate, windowed_output, InputSeries,
    LtiSystem, OutputSeries,
};
pub use monitor::{
    run_monitor, Assessment, DetectionReport, MonitorConfig, MonitorKind, MonitorState, Phase,
    TrainingHorizon, Verdict, WindowPolicy,
};
pub use numerics::{
    kernel_basis, least_squares_propagator, numerical_rank, pseudoinverse, range_basis, Matrix,
    RankTolerance, Vector,
};
